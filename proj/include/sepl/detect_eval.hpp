#pragma once

// Detection evaluation: confidence-ranked one-to-one matching against ground
// truth SEPs, precision/recall over confidence cutoffs, average precision and
// mean accepted distance.

#include "sepl/extraction.hpp"
#include "sepl/raster.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sepl {

inline constexpr double kDefaultAcceptancePx = 20.0;

struct DetectionMatch {
    bool true_positive = false;
    int gt_index = -1;      // matched ground truth, -1 for false positives
    double distance = 0.0;  // distance to the matched ground truth (TP only)
};

struct MatchOutcome {
    std::vector<DetectionMatch> detections;  // same order as the input detections
    std::vector<bool> gt_matched;

    int true_positives() const;
    int false_positives() const;
};

/// Visits detections by descending confidence (ties keep input order); each
/// takes the nearest still-unmatched ground truth if it lies within
/// `threshold` (inclusive), otherwise it is a false positive.
MatchOutcome match(std::span<const Detection> dets, std::span<const Point2> gts,
                   double threshold);

struct PrPoint {
    double cutoff = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

struct PrCurve {
    double threshold = 0.0;
    std::vector<PrPoint> points;  // cutoffs descending, recall non-decreasing
};

/// Detections and ground truth of one image.
struct ImageEval {
    std::vector<Detection> detections;
    std::vector<Point2> ground_truth;
};

/// One point per distinct detection confidence. Counts are summed over all
/// images before precision and recall are formed. Throws "no ground truth"
/// when there are no ground truth SEPs at all.
PrCurve pr_curve(std::span<const ImageEval> images, double threshold);
PrCurve pr_curve(std::span<const Detection> dets, std::span<const Point2> gts, double threshold);

/// Area under the precision envelope p(r) = max_{r' >= r} p(r'), integrated
/// over recall. 0 for an empty curve.
double average_precision(const PrCurve& curve);

struct AcceptedDistance {
    std::optional<double> mad_px;  // absent when nothing was accepted
    double ap = 0.0;
    int accepted = 0;
};

AcceptedDistance mean_accepted_distance(std::span<const ImageEval> images,
                                        double acceptance = kDefaultAcceptancePx);
AcceptedDistance mean_accepted_distance(std::span<const Detection> dets,
                                        std::span<const Point2> gts,
                                        double acceptance = kDefaultAcceptancePx);

std::string pr_curve_to_csv(const PrCurve& curve);

}  // namespace sepl
