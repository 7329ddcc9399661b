#pragma once

// End-to-end orchestration on synthetic fields: training data, the detection
// benchmark and the two-run map reproducibility simulation. The CLI
// subcommands and `e2e` are thin wrappers around these functions.

#include "sepl/detect_eval.hpp"
#include "sepl/extraction.hpp"
#include "sepl/geomap.hpp"
#include "sepl/network.hpp"
#include "sepl/synthfield.hpp"
#include "sepl/train.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace sepl {

/// Detections kept for mapping: away from the image border, where plants are
/// cut off and peaks shift, and above a confidence floor.
struct MapFilter {
    double border_px = 8.0;
    double min_confidence = 0.25;
};

std::vector<Detection> filter_for_mapping(std::span<const Detection> dets, int width, int height,
                                          const MapFilter& filter);

struct E2EConfig {
    FieldConfig field;
    int train_images = 200;
    int test_images = 50;
    double sigma_px = 4.0;
    bool augment = true;  // 90 degree rotations and mirrors of every training image
    TrainConfig train;
    ExtractConfig extract;
    double ap_threshold_px = 6.0;
    double mad_acceptance_px = kDefaultAcceptancePx;
    double merge_radius_mm = kDefaultMergeRadiusMm;
    MapFilter map_filter;
    double weed_death_fraction = 0.0;
    std::uint64_t seed = 1;

    E2EConfig();
};

using Logger = std::function<void(const std::string&)>;

/// Field configs derived from the run seed: training fields, the held-out test
/// field and the mapping field never share a layout seed.
FieldConfig training_field(const E2EConfig& cfg, int k);
FieldConfig test_field(const E2EConfig& cfg);
FieldConfig mapping_field(const E2EConfig& cfg);

/// Views from consecutive training fields until `count` images are collected.
std::vector<View> training_views(const E2EConfig& cfg, int count);
/// `count` views spread evenly over the path of the held-out field.
std::vector<View> test_views(const E2EConfig& cfg, int count);

/// Appends the image/target pair; with `augment`, the four 90 degree
/// rotations of the pair and of its horizontal mirror.
void append_samples(std::vector<Sample>& out, const Raster& image, const Raster& target, bool augment);

/// Network input/target pairs; with `augment`, the four 90 degree rotations of
/// the image and of its horizontal mirror.
std::vector<Sample> make_samples(std::span<const View> views, double sigma_px, bool augment);

/// Single-channel likelihood map predicted for a 4-channel image.
Raster infer(const Network& net, const Raster& image);

struct DetectionBenchmark {
    Network network;
    std::vector<double> loss_history;
    std::vector<View> test;
    std::vector<std::vector<Detection>> detections;  // per test view
    PrCurve curve;                                    // at ap_threshold_px
    double ap = 0.0;
    AcceptedDistance mad;
};

DetectionBenchmark run_detection_benchmark(const E2EConfig& cfg, const Logger& log = {});

/// Pose estimates for a run: fix averaging, initial heading from the first
/// stretch of travel, UKF fusion. One pose per image.
std::vector<TimedPose> estimate_poses(const SensorStreams& sensors);

struct MappingRun {
    std::vector<std::vector<Detection>> detections;  // per view, before filtering
    std::vector<TimedPose> poses;
    LandmarkMap map;
};

MappingRun map_run(const FieldTruth& field, const Network& net, const ExtractConfig& extract,
                   const MapFilter& filter, double merge_radius_mm, const std::string& run_id);

struct MappingBenchmark {
    FieldTruth earlier_field;
    FieldTruth later_field;
    MappingRun earlier;
    MappingRun later;
    MapComparison comparison;
};

MappingBenchmark run_mapping_benchmark(const E2EConfig& cfg, const Network& net,
                                       const Logger& log = {});

/// Inverse of trajectory_records: every row with a fix is a GNSS fix, every
/// row after the first is an odometry increment carrying `noise`.
SensorStreams streams_from_records(std::span<const TrajectoryRecord> rows, const OdometryNoise& noise);

/// Ground truth SEPs (pixels) of an annotation, with uncertain instances removed.
std::vector<Point2> annotation_seps(const Annotation& a);

}  // namespace sepl
