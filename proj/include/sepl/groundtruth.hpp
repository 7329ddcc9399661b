#pragma once

// Training targets: polygon-to-SEP reduction, Gaussian likelihood maps and
// data augmentation.

#include "sepl/annotation.hpp"
#include "sepl/raster.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sepl {

inline constexpr double kDefaultSigmaPx = 17.0;

/// Signed shoelace area; positive for counter-clockwise vertex order in a
/// y-up frame.
double polygon_signed_area(std::span<const Point2> polygon);

/// True when no two non-adjacent edges intersect and no adjacent edges fold
/// back onto each other.
bool is_simple_polygon(std::span<const Point2> polygon);

/// Area centroid of the polygon interior. Throws on fewer than three vertices
/// or zero area.
Point2 region_to_sep(std::span<const Point2> polygon);

/// Point SEPs followed by the centroids of all annotated regions.
std::vector<Point2> collect_seps(const Annotation& a);

struct GroundTruthMap {
    Raster likelihood;  // single channel, values in [0,1]
    double sigma = kDefaultSigmaPx;
    std::vector<Point2> seps;
};

/// r(x) = exp(-d(x)^2 / (2 sigma^2)) where d is the distance to the nearest SEP
/// pixel (SEPs are rounded to their pixel).
GroundTruthMap make_groundtruth(const Annotation& a, int width, int height, double sigma);
GroundTruthMap make_groundtruth(std::span<const Point2> seps, int width, int height, double sigma);

struct AugmentConfig {
    int crop_count = 4;
    int crop_width = 0;   // 0 means the full image width
    int crop_height = 0;  // 0 means the full image height
};

/// Rotates 90 degrees clockwise in image coordinates: (x, y) -> (H-1-y, x).
Raster rotate90(const Raster& img);
Raster mirror_horizontal(const Raster& img);
Raster mirror_vertical(const Raster& img);
/// Nearest-neighbour rotation by `degrees` about the image center, keeping the
/// input size; samples falling outside the source are 0. Multiples of 90
/// degrees are exact.
Raster rotate_degrees(const Raster& img, int degrees);
Raster crop(const Raster& img, int x0, int y0, int width, int height);

/// 8 rotations (k * 45 degrees, k = 0..7), horizontal and vertical mirrors and
/// `crop_count` random crops, applied identically to image and target.
std::vector<std::pair<Raster, Raster>> augment(const Raster& image, const Raster& target,
                                               const AugmentConfig& config, std::uint64_t seed);

}  // namespace sepl
