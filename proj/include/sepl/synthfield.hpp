#pragma once

// Procedural crop fields with exact SEP ground truth: plant layout, RGB+NIR
// rendering of nadir views along a serpentine robot path, and noisy GNSS and
// odometry streams.
//
// World frame as in geomap: millimetres, x along the crop rows.

#include "sepl/annotation.hpp"
#include "sepl/geomap.hpp"
#include "sepl/raster.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sepl {

enum class GrowthStage { Early, Mid, Late };

const char* to_string(GrowthStage s);
GrowthStage growth_stage_from_string(const std::string& s);

struct FieldConfig {
    double field_width_mm = 576.0;
    double field_height_mm = 416.0;
    int crop_rows = 4;
    int crops_per_row = 8;
    double row_spacing_mm = 104.0;
    double plant_spacing_mm = 68.0;
    double first_plant_x_mm = 48.0;
    double first_row_y_mm = 48.0;
    double jitter_mm = 4.0;
    double weed_density_per_m2 = 40.0;
    GrowthStage stage = GrowthStage::Mid;

    int image_width = 64;
    int image_height = 64;
    double resolution_mm_px = 2.0;
    double camera_height_mm = 500.0;
    double min_separation_px = 20.0;

    double lane_spacing_mm = 64.0;
    double step_mm = 32.0;
    double frame_rate_hz = 4.0;

    double gnss_sigma_mm = 7.9 / 1.96;
    OdometryNoise odometry;

    std::uint64_t rng_seed = 1;         // layout and trajectory
    std::uint64_t appearance_seed = 1;  // leaf shapes, soil texture, pixel noise
    std::uint64_t sensor_seed = 1;      // GNSS and odometry noise

    CameraConfig camera() const;
    double min_separation_mm() const { return min_separation_px * resolution_mm_px; }
    /// Throws Error on non-positive spacings or sizes, or a crop grid that does
    /// not fit the field.
    void validate() const;
};

struct Leaf {
    double angle = 0.0;   // direction from the SEP, rad
    double length = 0.0;  // mm
    double width = 0.0;   // mm
    double shade = 1.0;
};

struct Stroke {
    std::vector<Point2> points;  // world mm
    double width = 1.0;
};

struct Plant {
    Species species = Species::Crop;
    Point2 sep;                     // world mm
    double extent_mm = 0.0;         // radius around the SEP containing all vegetation
    std::vector<Leaf> leaves;       // crops
    std::vector<Point2> emergence;  // weeds: emergence region polygon, world mm
    std::vector<Stroke> strokes;    // weeds
};

struct SensorStreams {
    std::vector<GnssFix> fixes;
    std::vector<OdometryMeasurement> odometry;
};

struct FieldTruth {
    FieldConfig config;
    std::vector<Plant> plants;
    std::vector<TimedPose> poses;                   // one per image
    std::vector<OdometryMeasurement> true_odometry;  // motion between consecutive poses
    SensorStreams sensors;
};

/// Deterministic in `config`. Throws Error when a plant cannot be placed at
/// the minimum separation within 1000 rejection samples.
FieldTruth generate_field(const FieldConfig& config);

/// Same field and path with new plant appearance and sensor noise; a fraction
/// of the weeds can be removed to model plant death.
FieldTruth regrow_field(const FieldTruth& field, std::uint64_t appearance_seed,
                        std::uint64_t sensor_seed, double weed_death_fraction = 0.0);

/// Adds seeded Gaussian noise: per-axis sigma on every GNSS fix and the
/// odometry noise model on every motion increment. Zero noise reproduces the
/// truth.
SensorStreams corrupt_sensors(std::span<const TimedPose> poses,
                              std::span<const OdometryMeasurement> true_odometry,
                              double gnss_sigma_mm, const OdometryNoise& noise,
                              std::uint64_t seed);

struct View {
    Raster image;  // 4 channels: R, G, B, NIR in [0, 1]
    Annotation annotation;
};

View render_view(const FieldTruth& field, const Pose2D& pose, int index);
std::vector<View> render_views(const FieldTruth& field);

/// Average leaf length of all crops (mm).
double mean_leaf_length(const FieldTruth& field);
/// Average extent radius of all plants (mm).
double mean_plant_radius(const FieldTruth& field);

std::vector<TrajectoryRecord> trajectory_records(const SensorStreams& sensors);
std::string field_truth_to_json(const FieldTruth& field);

}  // namespace sepl
