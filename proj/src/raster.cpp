#include "sepl/raster.hpp"

#include "sepl/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>

namespace sepl {

Raster::Raster(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels < 0) {
        throw Error("raster dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Raster::Raster(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    if (width < 0 || height < 0 || channels < 0) {
        throw Error("raster dimensions must be non-negative");
    }
    if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
        throw Error("raster data length does not match " + std::to_string(width) + "x" +
                    std::to_string(height) + "x" + std::to_string(channels));
    }
    for (float v : data_) {
        if (!std::isfinite(v)) throw Error("raster contains a non-finite value");
    }
}

Raster Raster::channel(int c) const {
    if (c < 0 || c >= channels_) throw Error("channel index out of range");
    Raster out(width_, height_, 1);
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x) out.at(x, y) = at(x, y, c);
    return out;
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height),
      bits_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

LabeledRegions::LabeledRegions(int width, int height, std::vector<int> labels, int region_count)
    : width_(width), height_(height), region_count_(region_count), labels_(std::move(labels)) {
    if (labels_.size() != static_cast<std::size_t>(width) * height) {
        throw Error("label count does not match raster size");
    }
}

std::vector<std::vector<Pixel>> LabeledRegions::regions() const {
    std::vector<std::vector<Pixel>> out(static_cast<std::size_t>(region_count_));
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const int l = label(x, y);
            if (l > 0) out[static_cast<std::size_t>(l - 1)].push_back({x, y});
        }
    }
    return out;
}

namespace {

constexpr std::int64_t kUnreached = std::numeric_limits<std::int64_t>::max();

// Lower envelope of parabolas (q - i)^2 + f[i] over the finite entries of f.
void lower_envelope_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& out,
                       std::vector<int>& v, std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == kUnreached) continue;
        const double fq = static_cast<double>(f[q]) + static_cast<double>(q) * q;
        double s = -std::numeric_limits<double>::infinity();
        while (k >= 0) {
            const int p = v[k];
            const double fp = static_cast<double>(f[p]) + static_cast<double>(p) * p;
            s = (fq - fp) / (2.0 * (q - p));
            if (s > z[k]) break;
            --k;
        }
        if (k < 0) s = -std::numeric_limits<double>::infinity();
        ++k;
        v[k] = q;
        z[k] = s;
    }
    if (k < 0) {
        std::fill(out.begin(), out.end(), kUnreached);
        return;
    }
    const int last = k;
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (k < last && z[k + 1] < q) ++k;
        const std::int64_t dq = q - v[k];
        out[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

Raster distance_transform(std::span<const Pixel> points, int width, int height) {
    if (points.empty()) throw Error("no SEPs");
    if (width <= 0 || height <= 0) throw Error("distance transform needs a non-empty raster");
    const auto w = static_cast<std::size_t>(width);

    // Row pass: squared distance to the nearest seed in the same row.
    std::vector<std::uint8_t> seed(w * height, 0);
    for (const Pixel& p : points) {
        if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) {
            throw Error("SEP (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                        ") outside raster");
        }
        seed[static_cast<std::size_t>(p.y) * w + p.x] = 1;
    }
    std::vector<std::int64_t> sq(w * height, kUnreached);
    for (int y = 0; y < height; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * w;
        std::int64_t last = -1;
        for (int x = 0; x < width; ++x) {
            if (seed[row + x]) last = x;
            if (last >= 0) sq[row + x] = (x - last) * (x - last);
        }
        last = -1;
        for (int x = width - 1; x >= 0; --x) {
            if (seed[row + x]) last = x;
            if (last >= 0) {
                const std::int64_t d = (last - x) * (last - x);
                sq[row + x] = std::min(sq[row + x], d);
            }
        }
    }

    // Column pass: lower envelope over the row results.
    std::vector<std::int64_t> col(height), res(height);
    std::vector<int> v(height);
    std::vector<double> z(height + 1);
    Raster out(width, height, 1);
    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y) col[y] = sq[static_cast<std::size_t>(y) * w + x];
        lower_envelope_1d(col, res, v, z);
        for (int y = 0; y < height; ++y) {
            out.at(x, y) = static_cast<float>(std::sqrt(static_cast<double>(res[y])));
        }
    }
    return out;
}

int histogram_bin(float value, float lo, float hi, int bins) {
    const double t = (static_cast<double>(value) - lo) / (static_cast<double>(hi) - lo);
    const int b = static_cast<int>(t * bins);
    return std::clamp(b, 0, bins - 1);
}

float otsu_threshold(const Raster& map, int bins) {
    if (map.empty()) throw Error("otsu: empty map");
    if (map.channels() != 1) throw Error("otsu: expected a single-channel map");
    if (bins < 2) throw Error("otsu: need at least two bins");
    const auto values = map.data();
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const float lo = *lo_it;
    const float hi = *hi_it;
    if (!(hi > lo)) throw Error("degenerate histogram");

    std::vector<std::int64_t> hist(static_cast<std::size_t>(bins), 0);
    for (float v : values) ++hist[static_cast<std::size_t>(histogram_bin(v, lo, hi, bins))];

    const double total = static_cast<double>(values.size());
    double total_sum = 0.0;
    for (int i = 0; i < bins; ++i) total_sum += static_cast<double>(i) * hist[i];

    double best = -1.0;
    int best_k = 0;
    double w0 = 0.0;
    double s0 = 0.0;
    for (int k = 0; k < bins - 1; ++k) {
        w0 += static_cast<double>(hist[k]);
        s0 += static_cast<double>(k) * hist[k];
        const double w1 = total - w0;
        double between = 0.0;
        if (w0 > 0.0 && w1 > 0.0) {
            const double diff = s0 / w0 - (total_sum - s0) / w1;
            between = w0 * w1 * diff * diff;
        }
        if (between > best) {
            best = between;
            best_k = k;
        }
    }
    // Smallest float that falls into bin best_k + 1, so `v >= edge` agrees with
    // the histogram split exactly.
    float edge = static_cast<float>(lo + (best_k + 1) * ((static_cast<double>(hi) - lo) / bins));
    while (edge > lo && histogram_bin(std::nextafter(edge, lo), lo, hi, bins) > best_k) {
        edge = std::nextafter(edge, lo);
    }
    while (histogram_bin(edge, lo, hi, bins) <= best_k) edge = std::nextafter(edge, hi);
    return edge;
}

BinaryMask threshold_mask(const Raster& map, float threshold) {
    BinaryMask mask(map.width(), map.height());
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x)
            if (map.at(x, y) >= threshold) mask.set(x, y);
    return mask;
}

LabeledRegions connected_components(const BinaryMask& mask, Connectivity connectivity) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
    static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int neighbours = connectivity == Connectivity::Eight ? 8 : 4;

    int next = 0;
    std::queue<Pixel> frontier;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.test(x, y) || labels[static_cast<std::size_t>(y) * w + x] != 0) continue;
            ++next;
            labels[static_cast<std::size_t>(y) * w + x] = next;
            frontier.push({x, y});
            while (!frontier.empty()) {
                const Pixel p = frontier.front();
                frontier.pop();
                for (int n = 0; n < neighbours; ++n) {
                    const int nx = p.x + kDx[n];
                    const int ny = p.y + kDy[n];
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    int& l = labels[static_cast<std::size_t>(ny) * w + nx];
                    if (l != 0 || !mask.test(nx, ny)) continue;
                    l = next;
                    frontier.push({nx, ny});
                }
            }
        }
    }
    return LabeledRegions(w, h, std::move(labels), next);
}

Point2 weighted_centroid(std::span<const Pixel> region, const Raster& weights) {
    if (region.empty()) throw Error("empty region");
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (const Pixel& p : region) {
        const double wgt = weights.at(p.x, p.y);
        if (wgt < 0.0) throw Error("negative centroid weight");
        sw += wgt;
        sx += wgt * p.x;
        sy += wgt * p.y;
    }
    if (!(sw > 0.0)) throw Error("massless region");
    return {sx / sw, sy / sw};
}

}  // namespace sepl
