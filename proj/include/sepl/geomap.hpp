#pragma once

// Geo-referenced SEP landmark mapping: GNSS fix averaging, UKF fusion of
// odometry and GNSS, nadir pinhole ground projection, landmark merging and
// map-to-map comparison.
//
// World frame: planar, millimetres, headings in radians normalized to
// (-pi, pi]. The camera looks straight down with its image x/y axes aligned
// with the robot x/y axes.

#include "sepl/extraction.hpp"
#include "sepl/raster.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sepl {

/// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

struct Pose2D {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

struct GnssFix {
    double timestamp = 0.0;
    double x = 0.0;
    double y = 0.0;
    double sigma = 1.0;  // isotropic per-axis standard deviation, mm
};

/// Odometry noise: sigma_d = floor_mm + per_mm * |d|,
///                 sigma_dtheta = floor_rad + per_rad * |dtheta|.
struct OdometryNoise {
    double per_mm = 0.01;
    double per_rad = 0.02;
    double floor_mm = 0.05;
    double floor_rad = 1e-4;
};

struct OdometryMeasurement {
    double timestamp = 0.0;
    double distance = 0.0;  // forward travel since the previous measurement, mm
    double dtheta = 0.0;    // heading change since the previous measurement, rad
    OdometryNoise noise;
};

struct CameraConfig {
    double focal_px = 250.0;
    double cx = 31.5;
    double cy = 31.5;
    double height_mm = 500.0;
    double mount_x_mm = 0.0;
    double mount_y_mm = 0.0;
    bool nadir = true;
};

// ---------------------------------------------------------------------------
// GNSS fix averaging

struct FixAveragingConfig {
    int speed_window = 5;            // odometry samples in the sliding speed window
    double max_speed_variation = 0.1;  // allowed std(speed) / mean(speed)
    int max_window_fixes = 20;
};

/// Replaces every fix recorded during constant motion by the
/// motion-compensated mean of its window: all fixes of the window are moved to
/// the fix's time along the dead-reckoned odometry path (rotated onto the
/// fixes by a least-squares fit) and averaged; sigma shrinks by sqrt(n).
/// Fixes outside constant-motion windows are returned unchanged.
std::vector<GnssFix> average_fixes(std::span<const GnssFix> fixes,
                                   std::span<const OdometryMeasurement> odometry,
                                   const FixAveragingConfig& config = {});

// ---------------------------------------------------------------------------
// Unscented Kalman filter on (x, y, theta)

struct UkfParams {
    double alpha = 1e-3;
    double beta = 2.0;
    double kappa = 0.0;
};

struct SigmaWeights {
    std::vector<double> mean;
    std::vector<double> covariance;
    double lambda = 0.0;
};

SigmaWeights sigma_weights(int n, const UkfParams& params = {});

/// Motion model x' = x + d cos(theta + dtheta/2), y' = y + d sin(theta + dtheta/2),
/// theta' = theta + dtheta, plus additive process noise (odometry sigmas mapped
/// through the control Jacobian at the mean). Throws "filter divergence" if the
/// covariance stops being positive semi-definite.
Pose2D ukf_predict(const Pose2D& pose, const OdometryMeasurement& odom,
                   const UkfParams& params = {});

/// Position update with h(x) = (x, y) and R = sigma^2 I.
Pose2D ukf_update(const Pose2D& pose, const GnssFix& fix, const UkfParams& params = {});

struct TimedPose {
    double timestamp = 0.0;
    Pose2D pose;
};

/// Runs the filter over the whole stream: starts at the first fix, predicts
/// with every odometry measurement and updates with every fix whose timestamp
/// falls into the measurement's interval. Returns one pose per odometry
/// measurement (plus the initial pose).
std::vector<TimedPose> fuse_trajectory(std::span<const GnssFix> fixes,
                                       std::span<const OdometryMeasurement> odometry,
                                       double initial_heading, const UkfParams& params = {});

/// Heading of the robot at the first odometry sample, estimated by aligning the
/// dead-reckoned path with the fixes over the first `span_mm` of travel.
double estimate_initial_heading(std::span<const GnssFix> fixes,
                                std::span<const OdometryMeasurement> odometry,
                                double span_mm = 200.0);

// ---------------------------------------------------------------------------
// Projection

/// Ground point (mm) seen at a detection: pixel offset from the principal
/// point scaled by height / focal, offset by the camera mount, rotated by the
/// robot heading and translated by the robot position.
Point2 project_detection(const Detection& det, const Pose2D& pose, const CameraConfig& cam);

/// Inverse of project_detection: pixel coordinates of a ground point.
Point2 world_to_pixel(const Point2& world, const Pose2D& pose, const CameraConfig& cam);

// ---------------------------------------------------------------------------
// Landmark maps

inline constexpr double kDefaultMergeRadiusMm = 7.9;

struct Landmark {
    double x = 0.0;
    double y = 0.0;
    double confidence = 0.0;  // mean confidence of the merged observations
    int observations = 1;
    friend bool operator==(const Landmark&, const Landmark&) = default;
};

struct LandmarkMap {
    std::string run_id;
    std::string date_tag;
    std::vector<Landmark> landmarks;
};

struct FrameDetections {
    Pose2D pose;
    std::vector<Detection> detections;
};

/// Projects all detections and merges landmarks closer than `merge_radius`
/// into their confidence-weighted mean, sweeping in ascending (y, x) order
/// until no pair is closer than the radius. Throws after 100 sweeps.
LandmarkMap build_map(std::span<const FrameDetections> frames, const CameraConfig& cam,
                      double merge_radius = kDefaultMergeRadiusMm);

/// Merges already-projected landmarks (weights = confidence * observations).
std::vector<Landmark> merge_landmarks(std::vector<Landmark> landmarks, double merge_radius);

struct MatchedPair {
    int earlier = -1;
    int later = -1;
    double dx = 0.0;  // later - earlier
    double dy = 0.0;
    double distance = 0.0;
};

struct MapComparison {
    double acceptance_mm = 0.0;
    int matched = 0;
    int outliers = 0;  // earlier landmarks without an accepted partner
    int earlier_count = 0;
    int later_count = 0;
    double recall = 0.0;
    double precision = 0.0;
    double mean_dx = 0.0;
    double std_dx = 0.0;
    double mean_dy = 0.0;
    double std_dy = 0.0;
    double mean_distance = 0.0;
    std::vector<MatchedPair> pairs;
};

/// Fixed acceptance in mm, or nullopt for the automatic 3-sigma range.
using Acceptance = std::optional<double>;

/// Three times the root-mean-square nearest-neighbour distance from every
/// earlier landmark to the later map.
double auto_acceptance(const LandmarkMap& earlier, const LandmarkMap& later);

/// One-to-one matching by globally ascending distance; pairs farther apart
/// than the acceptance are rejected. Throws on an empty map.
MapComparison compare_maps(const LandmarkMap& earlier, const LandmarkMap& later,
                           Acceptance acceptance);

// ---------------------------------------------------------------------------
// File formats

/// "x_mm,y_mm,confidence,observations" with "# run_id:" / "# date_tag:"
/// comment lines in front.
std::string landmark_map_to_csv(const LandmarkMap& map);
LandmarkMap landmark_map_from_csv(const std::string& text);
void save_landmark_map(const std::filesystem::path& path, const LandmarkMap& map);
LandmarkMap load_landmark_map(const std::filesystem::path& path);

struct TrajectoryRecord {
    double timestamp = 0.0;
    double odo_distance = 0.0;
    double odo_dtheta = 0.0;
    std::optional<GnssFix> fix;
};

/// "timestamp,odo_dist_mm,odo_dtheta_rad,gnss_x_mm,gnss_y_mm,gnss_sigma_mm";
/// GNSS fields are empty on rows without a fix.
std::string trajectory_to_csv(std::span<const TrajectoryRecord> rows);
std::vector<TrajectoryRecord> trajectory_from_csv(const std::string& text);

std::string comparison_to_json(const MapComparison& report);

}  // namespace sepl
