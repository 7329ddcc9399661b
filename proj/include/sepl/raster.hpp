#pragma once

// Raster container and the image-processing primitives the SEP pipeline is
// built from.
//
// Coordinate convention (used everywhere in the library): pixel centers sit at
// integer coordinates, x is the column index and y the row index.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sepl {

struct Pixel {
    int x = 0;
    int y = 0;
    friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Sub-pixel image coordinate in pixels.
struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Row-major float raster with channel-interleaved pixels.
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, int channels, float fill = 0.0f);
    /// Takes ownership of `data`; throws if the size does not match or any
    /// value is not finite.
    Raster(int width, int height, int channels, std::vector<float> data);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const { return data_.empty(); }

    float at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }
    float& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }

    std::span<const float> data() const { return data_; }
    std::span<float> data() { return data_; }

    /// Copy of one channel as a single-channel raster.
    Raster channel(int c) const;

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);

    int width() const { return width_; }
    int height() const { return height_; }
    bool test(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool v = true) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
    std::size_t count() const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Per-pixel region labels, 0 is background and regions are numbered densely
/// from 1 in order of their first pixel in row-major scan order.
class LabeledRegions {
public:
    LabeledRegions() = default;
    LabeledRegions(int width, int height, std::vector<int> labels, int region_count);

    int width() const { return width_; }
    int height() const { return height_; }
    int region_count() const { return region_count_; }
    int label(int x, int y) const { return labels_[static_cast<std::size_t>(y) * width_ + x]; }

    /// Pixel lists per region; element i holds region i + 1 in scan order.
    std::vector<std::vector<Pixel>> regions() const;

private:
    int width_ = 0;
    int height_ = 0;
    int region_count_ = 0;
    std::vector<int> labels_;
};

enum class Connectivity { Four = 4, Eight = 8 };

/// Exact Euclidean distance from every pixel to the nearest seed point.
/// Separable two-pass lower-envelope algorithm on squared integer distances;
/// the final square root is taken in double precision and rounded once to f32.
/// Throws when `points` is empty or a point lies outside the raster.
Raster distance_transform(std::span<const Pixel> points, int width, int height);

/// Otsu threshold over a `bins`-bin histogram spanning [min, max] of a
/// single-channel map. Returns the upper edge of the last background bin; a
/// pixel belongs to the foreground iff its value is >= the returned edge.
/// Ties between equally good splits resolve to the lowest one. Throws on a
/// constant map ("degenerate histogram").
float otsu_threshold(const Raster& map, int bins = 256);

/// Histogram bin of `value` for `bins` uniform bins over [lo, hi]; exposed so
/// foreground tests agree bit-for-bit with the threshold search.
int histogram_bin(float value, float lo, float hi, int bins);

BinaryMask threshold_mask(const Raster& map, float threshold);

LabeledRegions connected_components(const BinaryMask& mask,
                                    Connectivity connectivity = Connectivity::Eight);

/// Weighted center of mass of `region` using channel 0 of `weights`.
/// Throws "massless region" when the weights sum to zero.
Point2 weighted_centroid(std::span<const Pixel> region, const Raster& weights);

}  // namespace sepl
