#include "sepl/synthfield.hpp"

#include "sepl/error.hpp"
#include "sepl/groundtruth.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace sepl {

namespace {

using Rng = std::mt19937_64;
constexpr double kPi = std::numbers::pi;
constexpr int kMaxPlacementTries = 1000;

double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double gauss(Rng& rng, double sigma) {
    if (!(sigma > 0.0)) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng);
}

std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix(seed ^ mix(stream));
}

// Lattice noise in [-1, 1], bilinearly interpolated, anchored to world mm.
double lattice_noise(double x, double y, double cell, std::uint64_t seed) {
    const double gx = x / cell, gy = y / cell;
    const double fx = std::floor(gx), fy = std::floor(gy);
    const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
    auto at = [&](std::int64_t a, std::int64_t b) {
        const std::uint64_t h =
            mix(seed ^ mix(static_cast<std::uint64_t>(a) * 0x100000001b3ULL ^ static_cast<std::uint64_t>(b)));
        return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    };
    const double tx = gx - fx, ty = gy - fy;
    const double sx = tx * tx * (3.0 - 2.0 * tx), sy = ty * ty * (3.0 - 2.0 * ty);
    const double top = at(ix, iy) * (1.0 - sx) + at(ix + 1, iy) * sx;
    const double bottom = at(ix, iy + 1) * (1.0 - sx) + at(ix + 1, iy + 1) * sx;
    return top * (1.0 - sy) + bottom * sy;
}

struct StageShape {
    int leaves_lo, leaves_hi;
    double length_lo, length_hi;  // crop leaf length, mm
    double blade_lo, blade_hi;    // weed blade length, mm
};

StageShape stage_shape(GrowthStage s) {
    switch (s) {
        case GrowthStage::Early: return {2, 4, 8.0, 14.0, 8.0, 16.0};
        case GrowthStage::Mid: return {4, 6, 14.0, 22.0, 14.0, 26.0};
        case GrowthStage::Late: return {6, 8, 22.0, 32.0, 22.0, 36.0};
    }
    throw Error("unknown growth stage");
}

constexpr double kStemRadiusMm = 2.5;

void grow_crop(Plant& p, GrowthStage stage, Rng& rng) {
    const StageShape sh = stage_shape(stage);
    const int n = uniform_int(rng, sh.leaves_lo, sh.leaves_hi);
    const double base = uniform(rng, 0.0, 2.0 * kPi);
    p.leaves.clear();
    p.extent_mm = kStemRadiusMm;
    for (int i = 0; i < n; ++i) {
        Leaf l;
        l.angle = normalize_angle(base + 2.0 * kPi * i / n + gauss(rng, 0.15));
        l.length = uniform(rng, sh.length_lo, sh.length_hi);
        l.width = l.length * uniform(rng, 0.35, 0.5);
        l.shade = uniform(rng, 0.85, 1.1);
        p.leaves.push_back(l);
        p.extent_mm = std::max(p.extent_mm, l.length);
    }
}

void grow_weed(Plant& p, GrowthStage stage, Rng& rng) {
    const StageShape sh = stage_shape(stage);
    const int n = uniform_int(rng, 3, 6);
    p.strokes.clear();
    p.extent_mm = 0.0;
    for (const auto& v : p.emergence) {
        p.extent_mm = std::max(p.extent_mm, std::hypot(v.x - p.sep.x, v.y - p.sep.y));
    }
    for (int i = 0; i < n; ++i) {
        const auto& start = p.emergence[static_cast<std::size_t>(
            uniform_int(rng, 0, static_cast<int>(p.emergence.size()) - 1))];
        Stroke s;
        s.width = uniform(rng, 1.6, 2.4);
        double dir = std::atan2(start.y - p.sep.y, start.x - p.sep.x) + gauss(rng, 0.4);
        const double bend = gauss(rng, 0.25);
        const double len = uniform(rng, sh.blade_lo, sh.blade_hi);
        constexpr int kSegments = 4;
        Point2 q = start;
        s.points.push_back(q);
        for (int k = 0; k < kSegments; ++k) {
            q = {q.x + len / kSegments * std::cos(dir), q.y + len / kSegments * std::sin(dir)};
            s.points.push_back(q);
            dir += bend;
        }
        for (const auto& pt : s.points) {
            p.extent_mm = std::max(p.extent_mm, std::hypot(pt.x - p.sep.x, pt.y - p.sep.y) + s.width / 2);
        }
        p.strokes.push_back(std::move(s));
    }
}

void grow(std::vector<Plant>& plants, GrowthStage stage, std::uint64_t appearance_seed) {
    Rng rng(derive_seed(appearance_seed, 1));
    for (auto& p : plants) {
        if (p.species == Species::Crop) grow_crop(p, stage, rng);
        else grow_weed(p, stage, rng);
    }
}

std::vector<Point2> emergence_polygon(Point2 center, Rng& rng) {
    const int n = uniform_int(rng, 5, 7);
    const double base = uniform(rng, 0.0, 2.0 * kPi);
    std::vector<Point2> poly;
    for (int i = 0; i < n; ++i) {
        const double a = base + 2.0 * kPi * (i + uniform(rng, -0.25, 0.25)) / n;
        const double r = uniform(rng, 2.5, 4.5);
        poly.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
    }
    return poly;
}

struct PathBuilder {
    double rate;
    OdometryNoise noise;
    Pose2D pose;
    std::vector<TimedPose> poses;
    std::vector<OdometryMeasurement> odo;

    void start(double x, double y, double theta) {
        pose.x = x;
        pose.y = y;
        pose.theta = theta;
        poses.push_back({0.0, pose});
    }
    void move(double d, double dtheta) {
        const double h = pose.theta + dtheta / 2.0;
        pose.x += d * std::cos(h);
        pose.y += d * std::sin(h);
        pose.theta = normalize_angle(pose.theta + dtheta);
        const double t = static_cast<double>(poses.size()) / rate;
        poses.push_back({t, pose});
        odo.push_back({t, d, dtheta, noise});
    }
    void straight(double length, double max_step) {
        const int n = std::max(1, static_cast<int>(std::ceil(length / max_step - 1e-9)));
        for (int i = 0; i < n; ++i) move(length / n, 0.0);
    }
};

void build_path(const FieldConfig& c, FieldTruth& f) {
    const double foot_w = c.image_width * c.resolution_mm_px;
    const double foot_h = c.image_height * c.resolution_mm_px;
    const double x_lo = std::min(foot_w / 4.0, c.field_width_mm / 2.0);
    const double x_hi = c.field_width_mm - x_lo;
    const double y_lo = std::min(foot_h / 4.0, c.field_height_mm / 2.0);
    const double y_hi = c.field_height_mm - y_lo;
    const int lanes = std::max(1, static_cast<int>(std::ceil((y_hi - y_lo) / c.lane_spacing_mm - 1e-9)) + 1);
    const double lane_gap = lanes > 1 ? (y_hi - y_lo) / (lanes - 1) : 0.0;

    PathBuilder b{c.frame_rate_hz, c.odometry, {}, {}, {}};
    b.start(x_lo, y_lo, 0.0);
    for (int lane = 0; lane < lanes; ++lane) {
        b.straight(x_hi - x_lo, c.step_mm);
        if (lane + 1 == lanes) break;
        const double turn = lane % 2 == 0 ? kPi / 2.0 : -kPi / 2.0;
        b.move(0.0, turn);
        b.straight(lane_gap, c.step_mm);
        b.move(0.0, turn);
    }
    f.poses = std::move(b.poses);
    f.true_odometry = std::move(b.odo);
}

bool point_in_polygon(double x, double y, const std::vector<Point2>& poly) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Point2& a = poly[i];
        const Point2& b = poly[j];
        if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
    return in;
}

double segment_distance(double x, double y, const Point2& a, const Point2& b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((x - a.x) * vx + (y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(x - a.x - t * vx, y - a.y - t * vy);
}

// Vegetation shade at a world point, or a negative value over bare soil.
double coverage(const Plant& p, double x, double y) {
    const double dx = x - p.sep.x, dy = y - p.sep.y;
    if (dx * dx + dy * dy > p.extent_mm * p.extent_mm) return -1.0;
    if (p.species == Species::Crop) {
        if (dx * dx + dy * dy <= kStemRadiusMm * kStemRadiusMm) return 1.15;
        double shade = -1.0;
        for (const auto& l : p.leaves) {
            const double c = std::cos(l.angle), s = std::sin(l.angle);
            const double a = dx * c + dy * s - l.length / 2.0;
            const double b = -dx * s + dy * c;
            const double ra = l.length / 2.0, rb = l.width / 2.0;
            if ((a * a) / (ra * ra) + (b * b) / (rb * rb) <= 1.0) shade = l.shade;
        }
        return shade;
    }
    if (point_in_polygon(x, y, p.emergence)) return 0.8;
    for (const auto& s : p.strokes) {
        for (std::size_t k = 1; k < s.points.size(); ++k) {
            if (segment_distance(x, y, s.points[k - 1], s.points[k]) <= s.width / 2.0) return 1.0;
        }
    }
    return -1.0;
}

}  // namespace

const char* to_string(GrowthStage s) {
    switch (s) {
        case GrowthStage::Early: return "early";
        case GrowthStage::Mid: return "mid";
        case GrowthStage::Late: return "late";
    }
    return "?";
}

GrowthStage growth_stage_from_string(const std::string& s) {
    if (s == "early") return GrowthStage::Early;
    if (s == "mid") return GrowthStage::Mid;
    if (s == "late") return GrowthStage::Late;
    throw Error("unknown growth stage '" + s + "'");
}

CameraConfig FieldConfig::camera() const {
    CameraConfig cam;
    cam.height_mm = camera_height_mm;
    cam.focal_px = camera_height_mm / resolution_mm_px;
    cam.cx = (image_width - 1) / 2.0;
    cam.cy = (image_height - 1) / 2.0;
    return cam;
}

void FieldConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw Error(std::string(name) + " must be positive");
    };
    positive(field_width_mm, "field width");
    positive(field_height_mm, "field height");
    positive(row_spacing_mm, "row spacing");
    positive(plant_spacing_mm, "plant spacing");
    positive(resolution_mm_px, "ground resolution");
    positive(camera_height_mm, "camera height");
    positive(lane_spacing_mm, "lane spacing");
    positive(step_mm, "step");
    positive(frame_rate_hz, "frame rate");
    if (crop_rows < 0 || crops_per_row < 0) throw Error("plant counts must be non-negative");
    if (image_width < 8 || image_height < 8) throw Error("image must be at least 8x8 pixels");
    if (jitter_mm < 0.0 || weed_density_per_m2 < 0.0 || gnss_sigma_mm < 0.0 || min_separation_px < 0.0) {
        throw Error("noise levels, densities and separations must be non-negative");
    }
    if (crop_rows > 0 && crops_per_row > 0) {
        const double x_last = first_plant_x_mm + (crops_per_row - 1) * plant_spacing_mm;
        const double y_last = first_row_y_mm + (crop_rows - 1) * row_spacing_mm;
        if (first_plant_x_mm < 0.0 || first_row_y_mm < 0.0 || x_last > field_width_mm ||
            y_last > field_height_mm) {
            throw Error("crop grid does not fit the field");
        }
    }
}

SensorStreams corrupt_sensors(std::span<const TimedPose> poses,
                              std::span<const OdometryMeasurement> true_odometry,
                              double gnss_sigma_mm, const OdometryNoise& noise,
                              std::uint64_t seed) {
    if (gnss_sigma_mm < 0.0) throw Error("GNSS sigma must be non-negative");
    Rng gnss_rng(derive_seed(seed, 2));
    Rng odo_rng(derive_seed(seed, 3));
    SensorStreams out;
    for (const auto& p : poses) {
        out.fixes.push_back({p.timestamp, p.pose.x + gauss(gnss_rng, gnss_sigma_mm),
                             p.pose.y + gauss(gnss_rng, gnss_sigma_mm), gnss_sigma_mm});
    }
    for (const auto& m : true_odometry) {
        OdometryMeasurement o = m;
        o.noise = noise;
        o.distance += gauss(odo_rng, noise.floor_mm + noise.per_mm * std::abs(m.distance));
        o.dtheta += gauss(odo_rng, noise.floor_rad + noise.per_rad * std::abs(m.dtheta));
        out.odometry.push_back(o);
    }
    return out;
}

FieldTruth generate_field(const FieldConfig& config) {
    config.validate();
    FieldTruth f;
    f.config = config;
    Rng rng(derive_seed(config.rng_seed, 0));
    const double sep = config.min_separation_mm();

    auto fits = [&](Point2 q) {
        for (const auto& p : f.plants) {
            if (std::hypot(p.sep.x - q.x, p.sep.y - q.y) < sep) return false;
        }
        return true;
    };

    for (int r = 0; r < config.crop_rows; ++r) {
        for (int i = 0; i < config.crops_per_row; ++i) {
            const Point2 nominal{config.first_plant_x_mm + i * config.plant_spacing_mm,
                                 config.first_row_y_mm + r * config.row_spacing_mm};
            bool placed = false;
            for (int t = 0; t < kMaxPlacementTries && !placed; ++t) {
                const Point2 q{nominal.x + gauss(rng, config.jitter_mm),
                               nominal.y + gauss(rng, config.jitter_mm)};
                if (!fits(q)) continue;
                Plant p;
                p.species = Species::Crop;
                p.sep = q;
                f.plants.push_back(std::move(p));
                placed = true;
            }
            if (!placed) throw Error("crop spacing is below the minimum plant separation");
        }
    }

    const double area_m2 = config.field_width_mm * config.field_height_mm * 1e-6;
    const double expected = config.weed_density_per_m2 * area_m2;
    const int weeds = expected > 0.0 ? static_cast<int>(std::poisson_distribution<int>(expected)(rng)) : 0;
    constexpr double kWeedMargin = 6.0;
    for (int w = 0; w < weeds; ++w) {
        bool placed = false;
        for (int t = 0; t < kMaxPlacementTries && !placed; ++t) {
            const Point2 c{uniform(rng, kWeedMargin, config.field_width_mm - kWeedMargin),
                           uniform(rng, kWeedMargin, config.field_height_mm - kWeedMargin)};
            if (!fits(c)) continue;
            Plant p;
            p.species = Species::Weed;
            p.emergence = emergence_polygon(c, rng);
            p.sep = region_to_sep(p.emergence);
            if (!fits(p.sep)) continue;
            f.plants.push_back(std::move(p));
            placed = true;
        }
        if (!placed) {
            throw Error("weed density too high: no free spot after 1000 samples");
        }
    }

    grow(f.plants, config.stage, config.appearance_seed);
    build_path(config, f);
    f.sensors = corrupt_sensors(f.poses, f.true_odometry, config.gnss_sigma_mm, config.odometry,
                                config.sensor_seed);
    return f;
}

FieldTruth regrow_field(const FieldTruth& field, std::uint64_t appearance_seed,
                        std::uint64_t sensor_seed, double weed_death_fraction) {
    if (weed_death_fraction < 0.0 || weed_death_fraction > 1.0) {
        throw Error("weed death fraction must lie in [0, 1]");
    }
    FieldTruth f = field;
    f.config.appearance_seed = appearance_seed;
    f.config.sensor_seed = sensor_seed;
    if (weed_death_fraction > 0.0) {
        Rng rng(derive_seed(appearance_seed, 4));
        std::bernoulli_distribution dies(weed_death_fraction);
        std::vector<Plant> alive;
        for (auto& p : f.plants) {
            if (p.species == Species::Weed && dies(rng)) continue;
            alive.push_back(std::move(p));
        }
        f.plants = std::move(alive);
    }
    grow(f.plants, f.config.stage, appearance_seed);
    f.sensors = corrupt_sensors(f.poses, f.true_odometry, f.config.gnss_sigma_mm, f.config.odometry,
                                sensor_seed);
    return f;
}

View render_view(const FieldTruth& field, const Pose2D& pose, int index) {
    const FieldConfig& c = field.config;
    const CameraConfig cam = c.camera();
    const int w = c.image_width, h = c.image_height;
    View v;
    v.image = Raster(w, h, 4);
    char id[32];
    std::snprintf(id, sizeof id, "view_%05d", index);
    v.annotation.image_id = id;

    const Point2 center = project_detection({cam.cx, cam.cy, 0.0}, pose, cam);
    const double view_radius = std::hypot(w, h) / 2.0 * c.resolution_mm_px + 1.0;
    std::vector<const Plant*> near;
    for (const auto& p : field.plants) {
        if (std::hypot(p.sep.x - center.x, p.sep.y - center.y) <= view_radius + p.extent_mm) {
            near.push_back(&p);
        }
    }

    const std::uint64_t soil_seed = derive_seed(c.appearance_seed, 5);
    Rng noise_rng(derive_seed(c.appearance_seed, 1000 + static_cast<std::uint64_t>(index)));
    constexpr int kSuper = 2;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double rgbn[4] = {0, 0, 0, 0};
            for (int sy = 0; sy < kSuper; ++sy) {
                for (int sx = 0; sx < kSuper; ++sx) {
                    const double u = x - 0.5 + (sx + 0.5) / kSuper;
                    const double vv = y - 0.5 + (sy + 0.5) / kSuper;
                    const Point2 g = project_detection({u, vv, 0.0}, pose, cam);
                    double shade = -1.0;
                    Species sp = Species::Crop;
                    for (const Plant* p : near) {
                        const double s = coverage(*p, g.x, g.y);
                        if (s >= 0.0) {
                            shade = s;
                            sp = p->species;
                        }
                    }
                    if (shade < 0.0) {
                        const double n = 0.6 * lattice_noise(g.x, g.y, 6.0, soil_seed) +
                                         0.4 * lattice_noise(g.x, g.y, 20.0, soil_seed + 1);
                        rgbn[0] += 0.45 + 0.06 * n;
                        rgbn[1] += 0.35 + 0.05 * n;
                        rgbn[2] += 0.25 + 0.04 * n;
                        rgbn[3] += 0.20 + 0.05 * n;
                    } else if (sp == Species::Crop) {
                        rgbn[0] += 0.18 * shade;
                        rgbn[1] += 0.55 * shade;
                        rgbn[2] += 0.14 * shade;
                        rgbn[3] += 0.80 * shade;
                    } else {
                        rgbn[0] += 0.32 * shade;
                        rgbn[1] += 0.58 * shade;
                        rgbn[2] += 0.20 * shade;
                        rgbn[3] += 0.72 * shade;
                    }
                }
            }
            for (int ch = 0; ch < 4; ++ch) {
                const double val = rgbn[ch] / (kSuper * kSuper) + gauss(noise_rng, 0.01);
                v.image.at(x, y, ch) = static_cast<float>(std::clamp(val, 0.0, 1.0));
            }
        }
    }

    const double xmax = w - 0.5, ymax = h - 0.5;
    auto inside = [&](const Point2& q) { return q.x >= 0.0 && q.y >= 0.0 && q.x < xmax && q.y < ymax; };
    for (const auto& p : field.plants) {
        const Point2 s = world_to_pixel(p.sep, pose, cam);
        if (!inside(s)) continue;
        if (p.species == Species::Weed) {
            RegionAnnotation r;
            r.species = Species::Weed;
            bool all_in = true;
            for (const auto& q : p.emergence) {
                r.polygon.push_back(world_to_pixel(q, pose, cam));
                all_in = all_in && inside(r.polygon.back());
            }
            if (all_in) {
                v.annotation.regions.push_back(std::move(r));
                continue;
            }
        }
        v.annotation.seps.push_back({s.x, s.y, p.species, false});
    }
    return v;
}

std::vector<View> render_views(const FieldTruth& field) {
    std::vector<View> out;
    out.reserve(field.poses.size());
    for (std::size_t i = 0; i < field.poses.size(); ++i) {
        out.push_back(render_view(field, field.poses[i].pose, static_cast<int>(i)));
    }
    return out;
}

double mean_leaf_length(const FieldTruth& field) {
    double sum = 0.0;
    int n = 0;
    for (const auto& p : field.plants) {
        for (const auto& l : p.leaves) {
            sum += l.length;
            ++n;
        }
    }
    return n > 0 ? sum / n : 0.0;
}

double mean_plant_radius(const FieldTruth& field) {
    if (field.plants.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& p : field.plants) sum += p.extent_mm;
    return sum / static_cast<double>(field.plants.size());
}

std::vector<TrajectoryRecord> trajectory_records(const SensorStreams& sensors) {
    std::vector<TrajectoryRecord> rows;
    std::size_t k = 0;
    for (const auto& f : sensors.fixes) {
        TrajectoryRecord r;
        r.timestamp = f.timestamp;
        while (k < sensors.odometry.size() && sensors.odometry[k].timestamp < f.timestamp) {
            TrajectoryRecord o;
            o.timestamp = sensors.odometry[k].timestamp;
            o.odo_distance = sensors.odometry[k].distance;
            o.odo_dtheta = sensors.odometry[k].dtheta;
            rows.push_back(o);
            ++k;
        }
        if (k < sensors.odometry.size() && sensors.odometry[k].timestamp == f.timestamp) {
            r.odo_distance = sensors.odometry[k].distance;
            r.odo_dtheta = sensors.odometry[k].dtheta;
            ++k;
        }
        r.fix = f;
        rows.push_back(r);
    }
    for (; k < sensors.odometry.size(); ++k) {
        TrajectoryRecord o;
        o.timestamp = sensors.odometry[k].timestamp;
        o.odo_distance = sensors.odometry[k].distance;
        o.odo_dtheta = sensors.odometry[k].dtheta;
        rows.push_back(o);
    }
    return rows;
}

std::string field_truth_to_json(const FieldTruth& field) {
    using nlohmann::json;
    const FieldConfig& c = field.config;
    json j;
    j["config"] = {{"field_width_mm", c.field_width_mm},
                   {"field_height_mm", c.field_height_mm},
                   {"crop_rows", c.crop_rows},
                   {"crops_per_row", c.crops_per_row},
                   {"row_spacing_mm", c.row_spacing_mm},
                   {"plant_spacing_mm", c.plant_spacing_mm},
                   {"weed_density_per_m2", c.weed_density_per_m2},
                   {"stage", to_string(c.stage)},
                   {"image_width", c.image_width},
                   {"image_height", c.image_height},
                   {"resolution_mm_px", c.resolution_mm_px},
                   {"camera_height_mm", c.camera_height_mm},
                   {"gnss_sigma_mm", c.gnss_sigma_mm},
                   {"rng_seed", c.rng_seed},
                   {"appearance_seed", c.appearance_seed},
                   {"sensor_seed", c.sensor_seed}};
    j["plants"] = json::array();
    for (const auto& p : field.plants) {
        json e = {{"species", to_string(p.species)},
                  {"sep_mm", {p.sep.x, p.sep.y}},
                  {"extent_mm", p.extent_mm}};
        if (p.species == Species::Crop) {
            e["leaves"] = p.leaves.size();
        } else {
            json poly = json::array();
            for (const auto& q : p.emergence) poly.push_back({q.x, q.y});
            e["emergence_mm"] = poly;
            e["strokes"] = p.strokes.size();
        }
        j["plants"].push_back(e);
    }
    j["poses"] = json::array();
    for (const auto& tp : field.poses) {
        j["poses"].push_back({{"t", tp.timestamp}, {"x_mm", tp.pose.x}, {"y_mm", tp.pose.y},
                              {"theta_rad", tp.pose.theta}});
    }
    return j.dump(2) + "\n";
}

}  // namespace sepl
