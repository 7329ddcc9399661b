#include "sepl/groundtruth.hpp"

#include "sepl/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace sepl {

double polygon_signed_area(std::span<const Point2> polygon) {
    const std::size_t n = polygon.size();
    if (n < 3) return 0.0;
    const Point2 o = polygon[0];
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = polygon[i];
        const Point2& b = polygon[(i + 1) % n];
        twice += (a.x - o.x) * (b.y - o.y) - (b.x - o.x) * (a.y - o.y);
    }
    return 0.5 * twice;
}

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

bool segments_touch(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const double d1 = cross(c, d, a);
    const double d2 = cross(c, d, b);
    const double d3 = cross(a, b, c);
    const double d4 = cross(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    return (d1 == 0 && on_segment(c, d, a)) || (d2 == 0 && on_segment(c, d, b)) ||
           (d3 == 0 && on_segment(a, b, c)) || (d4 == 0 && on_segment(a, b, d));
}

}  // namespace

bool is_simple_polygon(std::span<const Point2> polygon) {
    const std::size_t n = polygon.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = polygon[i];
        const Point2& b = polygon[(i + 1) % n];
        if (a == b) return false;
        for (std::size_t j = i + 1; j < n; ++j) {
            const Point2& c = polygon[j];
            const Point2& d = polygon[(j + 1) % n];
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent) {
                // Shared vertex is fine; collinear fold-back is not.
                const Point2& shared = (j == i + 1) ? b : a;
                const Point2& p = (j == i + 1) ? a : b;
                const Point2& q = (j == i + 1) ? d : c;
                if (cross(shared, p, q) == 0.0) {
                    const double dot = (p.x - shared.x) * (q.x - shared.x) +
                                       (p.y - shared.y) * (q.y - shared.y);
                    if (dot > 0.0) return false;
                }
                continue;
            }
            if (segments_touch(a, b, c, d)) return false;
        }
    }
    return true;
}

Point2 region_to_sep(std::span<const Point2> polygon) {
    if (polygon.size() < 3) throw Error("polygon needs at least three vertices");
    const Point2 o = polygon[0];
    const std::size_t n = polygon.size();
    double twice_area = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ax = polygon[i].x - o.x, ay = polygon[i].y - o.y;
        const double bx = polygon[(i + 1) % n].x - o.x, by = polygon[(i + 1) % n].y - o.y;
        const double c = ax * by - bx * ay;
        twice_area += c;
        cx += (ax + bx) * c;
        cy += (ay + by) * c;
    }
    if (twice_area == 0.0) throw Error("degenerate polygon (zero area)");
    return {o.x + cx / (3.0 * twice_area), o.y + cy / (3.0 * twice_area)};
}

std::vector<Point2> collect_seps(const Annotation& a) {
    std::vector<Point2> out;
    out.reserve(a.seps.size() + a.regions.size());
    for (const auto& s : a.seps) out.push_back({s.x, s.y});
    for (const auto& r : a.regions) out.push_back(region_to_sep(r.polygon));
    return out;
}

GroundTruthMap make_groundtruth(std::span<const Point2> seps, int width, int height,
                                double sigma) {
    if (!(sigma > 0.0)) throw Error("sigma must be positive");
    std::vector<Pixel> pixels;
    pixels.reserve(seps.size());
    for (const Point2& p : seps) {
        if (!(p.x >= 0.0 && p.y >= 0.0 && p.x < width && p.y < height)) {
            throw Error("SEP outside image bounds");
        }
        pixels.push_back({std::min(static_cast<int>(std::lround(p.x)), width - 1),
                          std::min(static_cast<int>(std::lround(p.y)), height - 1)});
    }
    Raster r = distance_transform(pixels, width, height);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (float& v : r.data()) {
        const double d = v;
        v = static_cast<float>(std::exp(-d * d * inv));
    }
    return {std::move(r), sigma, std::vector<Point2>(seps.begin(), seps.end())};
}

GroundTruthMap make_groundtruth(const Annotation& a, int width, int height, double sigma) {
    validate(a, width, height);
    const auto seps = collect_seps(a);
    return make_groundtruth(seps, width, height, sigma);
}

Raster rotate90(const Raster& img) {
    const int w = img.width(), h = img.height(), c = img.channels();
    Raster out(h, w, c);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < c; ++k) out.at(h - 1 - y, x, k) = img.at(x, y, k);
    return out;
}

Raster mirror_horizontal(const Raster& img) {
    Raster out(img.width(), img.height(), img.channels());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int k = 0; k < img.channels(); ++k)
                out.at(img.width() - 1 - x, y, k) = img.at(x, y, k);
    return out;
}

Raster mirror_vertical(const Raster& img) {
    Raster out(img.width(), img.height(), img.channels());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int k = 0; k < img.channels(); ++k)
                out.at(x, img.height() - 1 - y, k) = img.at(x, y, k);
    return out;
}

Raster rotate_degrees(const Raster& img, int degrees) {
    const int norm = ((degrees % 360) + 360) % 360;
    if (norm % 90 == 0) {
        Raster out = img;
        for (int i = 0; i < norm / 90; ++i) out = rotate90(out);
        return out;
    }
    const int w = img.width(), h = img.height(), ch = img.channels();
    const double theta = norm * std::numbers::pi / 180.0;
    const double cs = std::cos(theta), sn = std::sin(theta);
    const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
    Raster out(w, h, ch);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = x - cx, dy = y - cy;
            const long sx = std::lround(cx + dx * cs + dy * sn);
            const long sy = std::lround(cy - dx * sn + dy * cs);
            if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
            for (int k = 0; k < ch; ++k)
                out.at(x, y, k) = img.at(static_cast<int>(sx), static_cast<int>(sy), k);
        }
    }
    return out;
}

Raster crop(const Raster& img, int x0, int y0, int width, int height) {
    if (x0 < 0 || y0 < 0 || width <= 0 || height <= 0 || x0 + width > img.width() ||
        y0 + height > img.height()) {
        throw Error("crop window outside image");
    }
    Raster out(width, height, img.channels());
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            for (int k = 0; k < img.channels(); ++k) out.at(x, y, k) = img.at(x0 + x, y0 + y, k);
    return out;
}

std::vector<std::pair<Raster, Raster>> augment(const Raster& image, const Raster& target,
                                               const AugmentConfig& config, std::uint64_t seed) {
    if (image.width() != target.width() || image.height() != target.height()) {
        throw Error("image and target differ in size");
    }
    const int cw = config.crop_width > 0 ? config.crop_width : image.width();
    const int chh = config.crop_height > 0 ? config.crop_height : image.height();
    if (cw > image.width() || chh > image.height()) throw Error("crop size larger than image");
    if (config.crop_count < 0) throw Error("negative crop count");

    std::vector<std::pair<Raster, Raster>> out;
    out.reserve(10 + static_cast<std::size_t>(config.crop_count));
    for (int k = 0; k < 8; ++k) {
        out.emplace_back(rotate_degrees(image, 45 * k), rotate_degrees(target, 45 * k));
    }
    out.emplace_back(mirror_horizontal(image), mirror_horizontal(target));
    out.emplace_back(mirror_vertical(image), mirror_vertical(target));

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> ux(0, image.width() - cw);
    std::uniform_int_distribution<int> uy(0, image.height() - chh);
    for (int i = 0; i < config.crop_count; ++i) {
        const int x0 = ux(rng);
        const int y0 = uy(rng);
        out.emplace_back(crop(image, x0, y0, cw, chh), crop(target, x0, y0, cw, chh));
    }
    return out;
}

}  // namespace sepl
