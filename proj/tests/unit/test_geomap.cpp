#include "sepl/error.hpp"
#include "sepl/geomap.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace sepl;

namespace {

constexpr double kPi = std::numbers::pi;

OdometryMeasurement odo(double t, double d, double dth, OdometryNoise n = {}) {
    return {t, d, dth, n};
}

}  // namespace

TEST(Angles, Normalize) {
    EXPECT_DOUBLE_EQ(normalize_angle(0.5), 0.5);
    EXPECT_DOUBLE_EQ(normalize_angle(-kPi), kPi);
    EXPECT_NEAR(normalize_angle(3 * kPi), kPi, 1e-12);
    EXPECT_NEAR(normalize_angle(-2.5 * kPi), -0.5 * kPi, 1e-12);
}

TEST(Ukf, WeightsSumToOne) {
    for (double alpha : {1e-3, 0.1, 1.0}) {
        UkfParams p;
        p.alpha = alpha;
        const auto w = sigma_weights(3, p);
        double s = 0.0;
        for (double v : w.mean) s += v;
        EXPECT_NEAR(s, 1.0, 1e-9);
        EXPECT_EQ(w.mean.size(), 7u);
    }
}

TEST(Ukf, ZeroMotionAddsFloorOnly) {
    Pose2D p;
    p.x = 10;
    p.y = -4;
    p.theta = 0.3;
    p.covariance = Eigen::Vector3d(4.0, 9.0, 0.01).asDiagonal();
    p.covariance(0, 1) = p.covariance(1, 0) = 1.0;
    const OdometryNoise n;
    const Pose2D q = ukf_predict(p, odo(1, 0, 0, n));
    EXPECT_NEAR(q.x, p.x, 1e-9);
    EXPECT_NEAR(q.y, p.y, 1e-9);
    EXPECT_NEAR(q.theta, p.theta, 1e-12);
    Eigen::Matrix3d expect = p.covariance;
    const Eigen::Vector3d g(std::cos(0.3), std::sin(0.3), 0.0);
    expect += n.floor_mm * n.floor_mm * g * g.transpose();
    expect(2, 2) += n.floor_rad * n.floor_rad;
    EXPECT_LT((q.covariance - expect).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Ukf, MatchesLinearKalmanFilter) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double heading = 0.7;
    OdometryNoise n;
    n.floor_rad = 0.0;
    n.per_rad = 0.02;
    n.floor_mm = 0.3;
    n.per_mm = 0.01;
    Pose2D ukf;
    ukf.x = 100.0;
    ukf.y = 50.0;
    ukf.theta = heading;
    ukf.covariance = Eigen::Vector3d(16.0, 16.0, 0.0).asDiagonal();
    oracle::LinearKf kf{{100.0, 50.0}, Eigen::Matrix2d::Identity() * 16.0};
    Eigen::Vector2d truth(100.0, 50.0);
    for (int k = 1; k <= 100; ++k) {
        const double d = 20.0 + 5.0 * std::sin(0.1 * k);
        truth += d * Eigen::Vector2d(std::cos(heading), std::sin(heading));
        ukf = ukf_predict(ukf, odo(k, d, 0.0, n));
        kf.predict(d, heading, n.floor_mm + n.per_mm * d);
        const GnssFix fix{static_cast<double>(k), truth.x() + 4 * noise(rng), truth.y() + 4 * noise(rng), 4.0};
        ukf = ukf_update(ukf, fix);
        kf.update({fix.x, fix.y}, fix.sigma);
        ASSERT_NEAR(ukf.x, kf.x.x(), 1e-6) << "step " << k;
        ASSERT_NEAR(ukf.y, kf.x.y(), 1e-6) << "step " << k;
        ASSERT_NEAR(ukf.theta, heading, 1e-12);
        ASSERT_LT((ukf.covariance.topLeftCorner<2, 2>() - kf.P).cwiseAbs().maxCoeff(), 1e-6);
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(ukf.covariance);
        ASSERT_GE(es.eigenvalues().minCoeff(), -1e-9);
    }
}

TEST(Ukf, DivergenceDetected) {
    Pose2D p;
    p.covariance = Eigen::Vector3d(1.0, -5.0, 0.1).asDiagonal();
    try {
        ukf_predict(p, odo(1, 1, 0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("filter divergence"), std::string::npos);
    }
}

TEST(Ukf, FuseTracksNoisyTurningPath) {
    std::mt19937_64 rng(32);
    std::normal_distribution<double> nz(0.0, 1.0);
    Pose2D truth;
    std::vector<GnssFix> fixes{{0.0, nz(rng) * 4, nz(rng) * 4, 4.0}};
    std::vector<OdometryMeasurement> odom;
    std::vector<Pose2D> truths{truth};
    for (int k = 1; k <= 200; ++k) {
        const double d = 30.0, dth = k % 50 < 5 ? 0.3 : 0.0;
        const double h = truth.theta + dth / 2;
        truth.x += d * std::cos(h);
        truth.y += d * std::sin(h);
        truth.theta = normalize_angle(truth.theta + dth);
        truths.push_back(truth);
        const OdometryNoise n;
        odom.push_back(odo(k * 0.25, d + nz(rng) * (n.floor_mm + n.per_mm * d),
                           dth + nz(rng) * (n.floor_rad + n.per_rad * dth), n));
        fixes.push_back({k * 0.25, truth.x + nz(rng) * 4, truth.y + nz(rng) * 4, 4.0});
    }
    const double h0 = estimate_initial_heading(fixes, odom);
    EXPECT_NEAR(h0, 0.0, 0.1);
    const auto est = fuse_trajectory(fixes, odom, h0);
    ASSERT_EQ(est.size(), truths.size());
    double se = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        se += std::pow(est[i].pose.x - truths[i].x, 2) + std::pow(est[i].pose.y - truths[i].y, 2);
    }
    EXPECT_LT(std::sqrt(se / est.size()), 4.0 * std::sqrt(2.0));
}

TEST(FixAveraging, StationaryCollapsesToMean) {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> nz(0.0, 4.0);
    std::vector<GnssFix> fixes;
    std::vector<OdometryMeasurement> odom;
    double mx = 0, my = 0;
    for (int k = 0; k < 10; ++k) {
        fixes.push_back({k * 0.25, 50 + nz(rng), 20 + nz(rng), 4.0});
        mx += fixes.back().x / 10;
        my += fixes.back().y / 10;
        if (k > 0) odom.push_back(odo(k * 0.25, 0.0, 0.0));
    }
    const auto out = average_fixes(fixes, odom);
    ASSERT_EQ(out.size(), 10u);
    for (const auto& f : out) {
        EXPECT_NEAR(f.x, mx, 1e-9);
        EXPECT_NEAR(f.y, my, 1e-9);
        EXPECT_NEAR(f.sigma, 4.0 / std::sqrt(10.0), 1e-12);
    }
    EXPECT_TRUE(average_fixes({}, odom).empty());
}

TEST(FixAveraging, ConstantVelocityIsExact) {
    std::vector<GnssFix> fixes;
    std::vector<OdometryMeasurement> odom;
    const double heading = 1.1;  // odometry frame differs from the world frame
    for (int k = 0; k < 15; ++k) {
        fixes.push_back({k * 0.25, 7 + 12.0 * k * std::cos(heading), -3 + 12.0 * k * std::sin(heading), 4.0});
        if (k > 0) odom.push_back(odo(k * 0.25, 12.0, 0.0));
    }
    const auto out = average_fixes(fixes, odom);
    for (std::size_t i = 0; i < fixes.size(); ++i) {
        EXPECT_NEAR(out[i].x, fixes[i].x, 1e-9);
        EXPECT_NEAR(out[i].y, fixes[i].y, 1e-9);
        EXPECT_LT(out[i].sigma, 4.0);
    }
}

TEST(FixAveraging, BurstPassesThrough) {
    // speeds 10 mm/step for 10 steps, a burst of 40 for 3 steps, then 10 again
    std::vector<double> speed;
    for (int k = 0; k < 10; ++k) speed.push_back(10);
    for (int k = 0; k < 3; ++k) speed.push_back(40);
    for (int k = 0; k < 12; ++k) speed.push_back(10);
    std::vector<GnssFix> fixes{{0.0, 0.0, 0.0, 4.0}};
    std::vector<OdometryMeasurement> odom;
    double x = 0.0;
    std::mt19937_64 rng(34);
    std::normal_distribution<double> nz(0.0, 4.0);
    for (std::size_t k = 0; k < speed.size(); ++k) {
        x += speed[k];
        odom.push_back(odo((k + 1) * 0.25, speed[k], 0.0));
        fixes.push_back({(k + 1) * 0.25, x + nz(rng), nz(rng), 4.0});
    }
    const auto out = average_fixes(fixes, odom);
    // hand simulation: segment k (1-based) is constant when its 5-wide window of
    // speeds has std <= 0.1 mean; the burst occupies segments 11-13, so windows
    // touching segments 11..13 (centers 9..15) are not constant.
    for (std::size_t i = 1; i < fixes.size(); ++i) {
        const bool burst = i >= 9 && i <= 15;
        if (burst) {
            EXPECT_EQ(out[i].x, fixes[i].x) << i;
            EXPECT_EQ(out[i].sigma, 4.0) << i;
        } else {
            EXPECT_LT(out[i].sigma, 4.0) << i;
        }
    }
    // the window before the burst: fixes 0..8 averaged together
    for (std::size_t i = 0; i <= 8; ++i) EXPECT_NEAR(out[i].sigma, 4.0 / 3.0, 1e-12) << i;
}

TEST(Projection, Examples) {
    CameraConfig cam;
    cam.focal_px = 1000;
    cam.height_mm = 500;
    cam.cx = 320;
    cam.cy = 240;
    Pose2D pose;
    pose.x = 10;
    pose.y = 20;
    const Point2 c = project_detection({320, 240, 1}, pose, cam);
    EXPECT_NEAR(c.x, 10, 1e-12);
    EXPECT_NEAR(c.y, 20, 1e-12);
    const Point2 r = project_detection({420, 240, 1}, pose, cam);
    EXPECT_NEAR(r.x - 10, 50, 1e-12);
    EXPECT_NEAR(r.y - 20, 0, 1e-12);
    pose.theta = kPi / 2;
    const Point2 q = project_detection({420, 240, 1}, pose, cam);
    EXPECT_NEAR(q.x - 10, 0, 1e-9);
    EXPECT_NEAR(q.y - 20, 50, 1e-9);
}

TEST(Projection, InverseRoundTrip) {
    std::mt19937_64 rng(35);
    std::uniform_real_distribution<double> u(-500, 500);
    CameraConfig cam;
    cam.mount_x_mm = 12;
    cam.mount_y_mm = -7;
    for (int i = 0; i < 100; ++i) {
        Pose2D pose;
        pose.x = u(rng);
        pose.y = u(rng);
        pose.theta = u(rng) / 100;
        const Point2 w{u(rng), u(rng)};
        const Point2 px = world_to_pixel(w, pose, cam);
        const Point2 back = project_detection({px.x, px.y, 1}, pose, cam);
        EXPECT_NEAR(back.x, w.x, 1e-9);
        EXPECT_NEAR(back.y, w.y, 1e-9);
    }
    cam.nadir = false;
    EXPECT_THROW(project_detection({0, 0, 1}, Pose2D{}, cam), Error);
}

TEST(Landmarks, MergeExamples) {
    const auto same = merge_landmarks({{0, 0, 0.8, 1}, {3, 0, 0.8, 1}}, kDefaultMergeRadiusMm);
    ASSERT_EQ(same.size(), 1u);
    EXPECT_EQ(same[0].observations, 2);
    EXPECT_NEAR(same[0].x, 1.5, 1e-12);
    EXPECT_EQ(merge_landmarks({{0, 0, 0.8, 1}, {30, 0, 0.8, 1}}, kDefaultMergeRadiusMm).size(), 2u);
}

TEST(Landmarks, ChainMatchesClusteringOracle) {
    const std::vector<Point2> pts{{0, 0}, {5, 0}, {10, 0}};
    const std::vector<double> conf{0.5, 1.0, 0.25};
    std::vector<Landmark> lm;
    for (std::size_t i = 0; i < pts.size(); ++i) lm.push_back({pts[i].x, pts[i].y, conf[i], 1});
    const auto merged = merge_landmarks(lm, kDefaultMergeRadiusMm);
    const auto ref = oracle::transitive_clusters(pts, conf, kDefaultMergeRadiusMm);
    ASSERT_EQ(merged.size(), 1u);
    ASSERT_EQ(ref.size(), 1u);
    EXPECT_NEAR(merged[0].x, ref[0].x, 1e-12);
    EXPECT_NEAR(merged[0].y, ref[0].y, 1e-12);
    EXPECT_EQ(merged[0].observations, 3);
    EXPECT_NEAR(merged[0].confidence, (0.5 + 1.0 + 0.25) / 3, 1e-12);
}

TEST(Landmarks, RandomClustersMatchOracle) {
    std::mt19937_64 rng(36);
    for (int trial = 0; trial < 30; ++trial) {
        // tight groups far apart: greedy merging and transitive clustering agree
        std::vector<Point2> pts;
        std::vector<double> w;
        std::vector<Landmark> lm;
        for (int g = 0; g < 6; ++g) {
            const Point2 c{100.0 * g, 60.0 * (g % 2)};
            const int n = std::uniform_int_distribution<int>(1, 5)(rng);
            for (int i = 0; i < n; ++i) {
                const Point2 p{c.x + std::uniform_real_distribution<double>(-2, 2)(rng),
                               c.y + std::uniform_real_distribution<double>(-2, 2)(rng)};
                const double conf = std::uniform_real_distribution<double>(0.1, 1)(rng);
                pts.push_back(p);
                w.push_back(conf);
                lm.push_back({p.x, p.y, conf, 1});
            }
        }
        std::shuffle(lm.begin(), lm.end(), rng);
        const auto merged = merge_landmarks(lm, kDefaultMergeRadiusMm);
        const auto ref = oracle::transitive_clusters(pts, w, kDefaultMergeRadiusMm);
        ASSERT_EQ(merged.size(), ref.size());
        for (const auto& c : ref) {
            bool found = false;
            for (const auto& m : merged) {
                if (std::hypot(m.x - c.x, m.y - c.y) < 1e-9 && m.observations == c.members) found = true;
            }
            EXPECT_TRUE(found);
        }
        for (std::size_t i = 0; i < merged.size(); ++i)
            for (std::size_t j = i + 1; j < merged.size(); ++j)
                EXPECT_GE(std::hypot(merged[i].x - merged[j].x, merged[i].y - merged[j].y), kDefaultMergeRadiusMm);
    }
}

TEST(Landmarks, BuildMapProjectsAndMerges) {
    CameraConfig cam;
    Pose2D a, b;
    b.x = 3.0;
    const Detection d{cam.cx, cam.cy, 0.9};
    const Detection d2{cam.cx - 1.5, cam.cy, 0.9};  // 3 mm left of center in the second frame
    const std::vector<FrameDetections> frames{{a, {d}}, {b, {d2}}};
    const auto map = build_map(frames, cam);
    ASSERT_EQ(map.landmarks.size(), 1u);
    EXPECT_EQ(map.landmarks[0].observations, 2);
    EXPECT_NEAR(map.landmarks[0].x, 0.0, 1e-9);
}

namespace {

LandmarkMap grid_map(int n, double dx = 0.0) {
    LandmarkMap m;
    for (int i = 0; i < n; ++i) m.landmarks.push_back({100.0 * (i % 20) + dx, 100.0 * (i / 20), 0.9, 1});
    return m;
}

}  // namespace

TEST(Compare, IdenticalMaps) {
    const auto m = grid_map(30);
    const auto r = compare_maps(m, m, 10.0);
    EXPECT_EQ(r.matched, 30);
    EXPECT_EQ(r.recall, 1.0);
    EXPECT_EQ(r.precision, 1.0);
    EXPECT_EQ(r.mean_distance, 0.0);
    EXPECT_EQ(r.std_dx, 0.0);
}

TEST(Compare, CountArithmetic) {
    auto earlier = grid_map(314);
    auto later = grid_map(302, 5.0);
    for (int i = 0; i < 43; ++i) later.landmarks.push_back({5000.0 + 100 * i, 9000.0, 0.5, 1});
    const auto r = compare_maps(earlier, later, 70.0);
    EXPECT_EQ(r.matched, 302);
    EXPECT_EQ(r.outliers, 12);
    EXPECT_NEAR(r.recall, 0.962, 0.001);
    EXPECT_NEAR(r.precision, 0.875, 0.001);
    EXPECT_NEAR(r.mean_dx, 5.0, 1e-9);

    auto e2 = grid_map(291);
    auto l2 = grid_map(257, -3.0);
    for (int i = 0; i < 20; ++i) l2.landmarks.push_back({5000.0 + 100 * i, 9000.0, 0.5, 1});
    const auto r2 = compare_maps(e2, l2, 70.0);
    EXPECT_EQ(r2.matched, 257);
    EXPECT_NEAR(r2.recall, 0.883, 0.001);
    EXPECT_NEAR(r2.precision, 0.928, 0.001);
}

TEST(Compare, AcceptanceAndSymmetry) {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> nz(0.0, 6.0);
    LandmarkMap a = grid_map(80), b;
    for (const auto& l : a.landmarks) b.landmarks.push_back({l.x + nz(rng), l.y + nz(rng), 0.9, 1});
    b.landmarks.push_back({-500, -500, 0.9, 1});
    const auto ab = compare_maps(a, b, std::nullopt);
    const auto ba = compare_maps(b, a, std::nullopt);
    EXPECT_EQ(ab.matched, 80);
    EXPECT_GT(ab.acceptance_mm, 0.0);
    const auto fixed_ab = compare_maps(a, b, 25.0);
    const auto fixed_ba = compare_maps(b, a, 25.0);
    EXPECT_EQ(fixed_ab.matched, fixed_ba.matched);
    for (const auto& p : ab.pairs) EXPECT_LE(p.distance, ab.acceptance_mm);
    EXPECT_GE(ba.acceptance_mm, ab.acceptance_mm);
    EXPECT_THROW(compare_maps(a, LandmarkMap{}, 10.0), Error);
}

TEST(Compare, AutoAcceptanceIsThreeRms) {
    LandmarkMap a, b;
    a.landmarks = {{0, 0, 1, 1}, {100, 0, 1, 1}};
    b.landmarks = {{3, 4, 1, 1}, {100, 0, 1, 1}};
    EXPECT_NEAR(auto_acceptance(a, b), 3.0 * std::sqrt(25.0 / 2.0), 1e-12);
}

TEST(Formats, LandmarkCsvRoundTrip) {
    std::mt19937_64 rng(38);
    std::uniform_real_distribution<double> u(-1e4, 1e4);
    for (int i = 0; i < 20; ++i) {
        LandmarkMap m;
        m.run_id = "run-" + std::to_string(i);
        m.date_tag = "2017-06-0" + std::to_string(i % 9);
        for (int k = 0; k < 15; ++k) m.landmarks.push_back({u(rng), u(rng), u(rng) / 1e4, k + 1});
        const std::string csv = landmark_map_to_csv(m);
        const LandmarkMap back = landmark_map_from_csv(csv);
        EXPECT_EQ(back.run_id, m.run_id);
        EXPECT_EQ(back.date_tag, m.date_tag);
        EXPECT_EQ(back.landmarks, m.landmarks);
        EXPECT_EQ(landmark_map_to_csv(back), csv);
    }
    EXPECT_THROW(landmark_map_from_csv("a,b\n1,2\n"), FormatError);
    EXPECT_THROW(landmark_map_from_csv("x_mm,y_mm,confidence,observations\n1,2,zz,1\n"), FormatError);
}

TEST(Formats, TrajectoryCsvRoundTrip) {
    std::vector<TrajectoryRecord> rows;
    rows.push_back({0.0, 0.0, 0.0, GnssFix{0.0, 1.5, -2.25, 4.03}});
    rows.push_back({0.25, 32.1, 0.001, std::nullopt});
    rows.push_back({0.5, 31.9, -0.002, GnssFix{0.5, 33.0, -2.0, 4.03}});
    const std::string csv = trajectory_to_csv(rows);
    const auto back = trajectory_from_csv(csv);
    ASSERT_EQ(back.size(), 3u);
    EXPECT_FALSE(back[1].fix.has_value());
    EXPECT_EQ(back[2].fix->x, 33.0);
    EXPECT_EQ(trajectory_to_csv(back), csv);
}
