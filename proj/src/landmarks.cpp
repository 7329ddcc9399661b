#include "sepl/error.hpp"
#include "sepl/geomap.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace sepl {

namespace {

constexpr int kMaxMergePasses = 100;

struct Cluster {
    double x, y;
    double weight;          // sum of observation weights
    double confidence_sum;  // sum of observation confidences
    int observations;
};

}  // namespace

std::vector<Landmark> merge_landmarks(std::vector<Landmark> landmarks, double merge_radius) {
    if (!(merge_radius > 0.0)) throw Error("merge radius must be positive");
    std::vector<Cluster> clusters;
    clusters.reserve(landmarks.size());
    for (const auto& l : landmarks) {
        const double w = std::max(l.confidence, 1e-12) * l.observations;
        clusters.push_back({l.x, l.y, w, l.confidence * l.observations, l.observations});
    }

    const double r2 = merge_radius * merge_radius;
    for (int pass = 0;; ++pass) {
        if (pass == kMaxMergePasses) throw Error("landmark merging did not converge");
        std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
            if (a.y != b.y) return a.y < b.y;
            return a.x < b.x;
        });
        std::vector<bool> dead(clusters.size(), false);
        bool merged = false;
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            if (dead[i]) continue;
            Cluster& a = clusters[i];
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                if (dead[j]) continue;
                const Cluster& b = clusters[j];
                const double dx = a.x - b.x, dy = a.y - b.y;
                if (dx * dx + dy * dy >= r2) continue;
                const double w = a.weight + b.weight;
                a.x = (a.weight * a.x + b.weight * b.x) / w;
                a.y = (a.weight * a.y + b.weight * b.y) / w;
                a.weight = w;
                a.confidence_sum += b.confidence_sum;
                a.observations += b.observations;
                dead[j] = true;
                merged = true;
            }
        }
        std::vector<Cluster> alive;
        alive.reserve(clusters.size());
        for (std::size_t i = 0; i < clusters.size(); ++i)
            if (!dead[i]) alive.push_back(clusters[i]);
        clusters = std::move(alive);
        if (!merged) break;
    }

    std::vector<Landmark> out;
    out.reserve(clusters.size());
    for (const auto& c : clusters) {
        out.push_back({c.x, c.y, c.confidence_sum / c.observations, c.observations});
    }
    return out;
}

LandmarkMap build_map(std::span<const FrameDetections> frames, const CameraConfig& cam,
                      double merge_radius) {
    std::vector<Landmark> raw;
    for (const auto& f : frames) {
        for (const auto& d : f.detections) {
            const Point2 p = project_detection(d, f.pose, cam);
            raw.push_back({p.x, p.y, d.confidence, 1});
        }
    }
    LandmarkMap map;
    map.landmarks = merge_landmarks(std::move(raw), merge_radius);
    return map;
}

double auto_acceptance(const LandmarkMap& earlier, const LandmarkMap& later) {
    if (earlier.landmarks.empty() || later.landmarks.empty()) {
        throw Error("cannot compare an empty landmark map");
    }
    double sum_sq = 0.0;
    for (const auto& a : earlier.landmarks) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& b : later.landmarks) best = std::min(best, std::hypot(a.x - b.x, a.y - b.y));
        sum_sq += best * best;
    }
    return 3.0 * std::sqrt(sum_sq / static_cast<double>(earlier.landmarks.size()));
}

MapComparison compare_maps(const LandmarkMap& earlier, const LandmarkMap& later,
                           Acceptance acceptance) {
    if (earlier.landmarks.empty() || later.landmarks.empty()) {
        throw Error("cannot compare an empty landmark map");
    }
    MapComparison rep;
    rep.acceptance_mm = acceptance ? *acceptance : auto_acceptance(earlier, later);
    if (!(rep.acceptance_mm > 0.0)) throw Error("acceptance must be positive");
    rep.earlier_count = static_cast<int>(earlier.landmarks.size());
    rep.later_count = static_cast<int>(later.landmarks.size());

    struct Candidate {
        double d;
        int i, j;
    };
    std::vector<Candidate> cand;
    for (int i = 0; i < rep.earlier_count; ++i) {
        const auto& a = earlier.landmarks[static_cast<std::size_t>(i)];
        for (int j = 0; j < rep.later_count; ++j) {
            const auto& b = later.landmarks[static_cast<std::size_t>(j)];
            const double d = std::hypot(b.x - a.x, b.y - a.y);
            if (d <= rep.acceptance_mm) cand.push_back({d, i, j});
        }
    }
    std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
        if (a.d != b.d) return a.d < b.d;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    std::vector<bool> used_a(earlier.landmarks.size(), false), used_b(later.landmarks.size(), false);
    for (const auto& c : cand) {
        if (used_a[static_cast<std::size_t>(c.i)] || used_b[static_cast<std::size_t>(c.j)]) continue;
        used_a[static_cast<std::size_t>(c.i)] = true;
        used_b[static_cast<std::size_t>(c.j)] = true;
        const auto& a = earlier.landmarks[static_cast<std::size_t>(c.i)];
        const auto& b = later.landmarks[static_cast<std::size_t>(c.j)];
        rep.pairs.push_back({c.i, c.j, b.x - a.x, b.y - a.y, c.d});
    }

    rep.matched = static_cast<int>(rep.pairs.size());
    rep.outliers = rep.earlier_count - rep.matched;
    rep.recall = static_cast<double>(rep.matched) / rep.earlier_count;
    rep.precision = static_cast<double>(rep.matched) / rep.later_count;
    if (rep.matched > 0) {
        const double n = rep.matched;
        for (const auto& p : rep.pairs) {
            rep.mean_dx += p.dx / n;
            rep.mean_dy += p.dy / n;
            rep.mean_distance += p.distance / n;
        }
        for (const auto& p : rep.pairs) {
            rep.std_dx += (p.dx - rep.mean_dx) * (p.dx - rep.mean_dx) / n;
            rep.std_dy += (p.dy - rep.mean_dy) * (p.dy - rep.mean_dy) / n;
        }
        rep.std_dx = std::sqrt(rep.std_dx);
        rep.std_dy = std::sqrt(rep.std_dy);
    }
    return rep;
}

std::string landmark_map_to_csv(const LandmarkMap& map) {
    std::ostringstream out;
    out << "# run_id: " << map.run_id << "\n# date_tag: " << map.date_tag << "\n";
    out << "x_mm,y_mm,confidence,observations\n" << std::setprecision(17);
    for (const auto& l : map.landmarks) {
        out << l.x << "," << l.y << "," << l.confidence << "," << l.observations << "\n";
    }
    return out.str();
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw FormatError("bad number '" + s + "'");
    }
    if (used != s.size()) throw FormatError("bad number '" + s + "'");
    return v;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

LandmarkMap landmark_map_from_csv(const std::string& text) {
    LandmarkMap map;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        if (line.rfind("# run_id: ", 0) == 0) {
            map.run_id = line.substr(10);
            continue;
        }
        if (line.rfind("# date_tag: ", 0) == 0) {
            map.date_tag = line.substr(12);
            continue;
        }
        if (line[0] == '#') continue;
        if (!header) {
            if (line != "x_mm,y_mm,confidence,observations") {
                throw FormatError("unexpected landmark CSV header");
            }
            header = true;
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 4) throw FormatError("landmark CSV row needs 4 fields");
        map.landmarks.push_back({parse_double(cells[0]), parse_double(cells[1]),
                                 parse_double(cells[2]), static_cast<int>(parse_double(cells[3]))});
    }
    if (!header) throw FormatError("landmark CSV without header");
    return map;
}

void save_landmark_map(const std::filesystem::path& path, const LandmarkMap& map) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << landmark_map_to_csv(map);
}

LandmarkMap load_landmark_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return landmark_map_from_csv(ss.str());
}

std::string trajectory_to_csv(std::span<const TrajectoryRecord> rows) {
    std::ostringstream out;
    out << "timestamp,odo_dist_mm,odo_dtheta_rad,gnss_x_mm,gnss_y_mm,gnss_sigma_mm\n"
        << std::setprecision(17);
    for (const auto& r : rows) {
        out << r.timestamp << "," << r.odo_distance << "," << r.odo_dtheta << ",";
        if (r.fix) out << r.fix->x << "," << r.fix->y << "," << r.fix->sigma;
        else out << ",,";
        out << "\n";
    }
    return out.str();
}

std::vector<TrajectoryRecord> trajectory_from_csv(const std::string& text) {
    std::vector<TrajectoryRecord> rows;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        const auto c = split_csv(line);
        if (c.size() != 6 && c.size() != 3) throw FormatError("trajectory row needs 6 fields");
        TrajectoryRecord r;
        r.timestamp = parse_double(c[0]);
        r.odo_distance = c[1].empty() ? 0.0 : parse_double(c[1]);
        r.odo_dtheta = c[2].empty() ? 0.0 : parse_double(c[2]);
        if (c.size() == 6 && !c[3].empty()) {
            r.fix = GnssFix{r.timestamp, parse_double(c[3]), parse_double(c[4]), parse_double(c[5])};
        }
        rows.push_back(r);
    }
    return rows;
}

std::string comparison_to_json(const MapComparison& rep) {
    nlohmann::json j;
    j["acceptance_mm"] = rep.acceptance_mm;
    j["matched"] = rep.matched;
    j["outliers"] = rep.outliers;
    j["earlier_count"] = rep.earlier_count;
    j["later_count"] = rep.later_count;
    j["recall"] = rep.recall;
    j["precision"] = rep.precision;
    j["mean_dx_mm"] = rep.mean_dx;
    j["std_dx_mm"] = rep.std_dx;
    j["mean_dy_mm"] = rep.mean_dy;
    j["std_dy_mm"] = rep.std_dy;
    j["mean_distance_mm"] = rep.mean_distance;
    j["errors"] = nlohmann::json::array();
    for (const auto& p : rep.pairs) {
        j["errors"].push_back({{"earlier", p.earlier}, {"later", p.later}, {"dx_mm", p.dx},
                               {"dy_mm", p.dy}, {"distance_mm", p.distance}});
    }
    return j.dump(2) + "\n";
}

}  // namespace sepl
