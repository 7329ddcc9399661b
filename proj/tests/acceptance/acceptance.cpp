// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Criterion 9 repeats 7 and 8, so a full run takes several minutes.

#include "sepl/annotation.hpp"
#include "sepl/detect_eval.hpp"
#include "sepl/error.hpp"
#include "sepl/extraction.hpp"
#include "sepl/geomap.hpp"
#include "sepl/groundtruth.hpp"
#include "sepl/network.hpp"
#include "sepl/pipeline.hpp"
#include "sepl/raster.hpp"
#include "sepl/raster_io.hpp"
#include "sepl/weights_io.hpp"

#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

using namespace sepl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check, double max_seconds = 0) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (max_seconds > 0 && s > max_seconds) {
        o.pass = false;
        o.detail += " (over the " + std::to_string(static_cast<int>(max_seconds)) + " s budget)";
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), s);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// 1 ---------------------------------------------------------------------------
Outcome distance_transform_oracle() {
    std::mt19937_64 rng(101);
    int exact = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int w = std::uniform_int_distribution<int>(1, 64)(rng);
        const int h = std::uniform_int_distribution<int>(1, 64)(rng);
        const int n = std::uniform_int_distribution<int>(1, 50)(rng);
        std::vector<Pixel> pts;
        for (int i = 0; i < n; ++i) {
            pts.push_back({std::uniform_int_distribution<int>(0, w - 1)(rng), std::uniform_int_distribution<int>(0, h - 1)(rng)});
        }
        const auto ref = oracle::distance_transform(pts, w, h);
        const Raster d = distance_transform(pts, w, h);
        exact += std::equal(d.data().begin(), d.data().end(), ref.begin(), ref.end()) ? 1 : 0;
    }
    return {exact == 200, std::to_string(exact) + "/200 instances identical to brute force"};
}

// 2 ---------------------------------------------------------------------------
Outcome otsu_oracle() {
    std::mt19937_64 rng(102);
    int equal = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<float> v(32 * 32);
        const int mode = trial % 4;
        for (auto& x : v) {
            const double u = std::uniform_real_distribution<double>(0, 1)(rng);
            const double g = std::normal_distribution<double>(0, 1)(rng);
            x = static_cast<float>(mode == 0   ? u
                                   : mode == 1 ? u * u * u
                                   : mode == 2 ? (u < 0.3 ? 0.2 + 0.05 * g : 0.7 + 0.1 * g)
                                               : std::exp(g));
        }
        const Raster m(32, 32, 1, v);
        const auto ref = oracle::otsu(v, 256);
        const BinaryMask mask = threshold_mask(m, otsu_threshold(m, 256));
        bool same = true;
        for (int i = 0; i < 32 * 32 && same; ++i) same = mask.test(i % 32, i / 32) == ref.foreground[static_cast<std::size_t>(i)];
        equal += same ? 1 : 0;
    }
    return {equal == 100, std::to_string(equal) + "/100 maps split identically to exhaustive search"};
}

// 3 ---------------------------------------------------------------------------
std::vector<LayerSpec> random_toy_architecture(std::mt19937_64& rng) {
    const int convs = std::uniform_int_distribution<int>(1, 3)(rng);
    const int kernels[] = {1, 3, 5};
    std::vector<LayerSpec> specs;
    bool pooled = false;
    for (int c = 0; c < convs; ++c) {
        const bool last = c + 1 == convs;
        const int k = kernels[std::uniform_int_distribution<int>(0, 2)(rng)];
        specs.push_back(LayerSpec::conv(k, last ? 1 : std::uniform_int_distribution<int>(1, 4)(rng)));
        if (last) break;
        specs.push_back(LayerSpec::relu());
        if (!pooled && std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
            specs.push_back(LayerSpec::downsample2());
            pooled = true;
        }
    }
    if (pooled) {
        specs.insert(specs.end() - 1, LayerSpec::upsample2());
    }
    return specs;
}

Outcome gradient_check() {
    std::mt19937_64 rng(103);
    double worst = 0.0;
    std::size_t weights = 0;
    for (int net_id = 0; net_id < 20; ++net_id) {
        const int channels = std::uniform_int_distribution<int>(1, 4)(rng);
        auto net = build_network(channels, 8, 8, random_toy_architecture(rng), 1000 + net_id).cast<double>();
        // zero-initialised biases can leave a ReLU input exactly at its kink
        for (auto& layer : net.layers)
            for (auto& p : layer.params) p = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
        BasicTensor<double> in(channels, 8, 8), target(1, 8, 8);
        for (auto& v : in.data) v = std::uniform_real_distribution<double>(-1, 1)(rng);
        for (auto& v : target.data) v = std::uniform_real_distribution<double>(0, 1)(rng);
        const Gradients g = backward(net, in, target);
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            for (std::size_t i = 0; i < net.layers[l].params.size(); ++i) {
                const double num = oracle::numeric_gradient(net, in, target, l, i);
                const double ana = g.layers[l][i];
                const double scale = std::max({std::abs(num), std::abs(ana)});
                const double rel = scale < 1e-8 ? 0.0 : std::abs(num - ana) / scale;
                worst = std::max(worst, rel);
                ++weights;
            }
        }
    }
    return {worst < 1e-4, fmt("max relative error %.2e over %.0f weights of 20 nets", worst, static_cast<double>(weights))};
}

// 4 ---------------------------------------------------------------------------
Outcome likelihood_exactness() {
    double worst_sigma = 0.0, worst_peak = 0.0;
    const double target = std::exp(-0.5);
    for (int sigma : {3, 5, 10, 15, 17, 19}) {
        const std::vector<Point2> seps{{40, 40}, {45 + 3.0 * sigma, 80}};
        const auto gt = make_groundtruth(seps, 160, 160, sigma);
        for (const auto& s : seps) worst_peak = std::max(worst_peak, std::abs(gt.likelihood.at(int(s.x), int(s.y)) - 1.0));
        for (const auto& [dx, dy] : {std::pair{sigma, 0}, {0, sigma}, {-sigma, 0}, {0, -sigma}}) {
            worst_sigma = std::max(worst_sigma, std::abs(gt.likelihood.at(40 + dx, 40 + dy) - target));
        }
    }
    // off-axis pixel at distance 5: (3, 4)
    const std::vector<Point2> one{{20, 20}};
    worst_sigma = std::max(worst_sigma, std::abs(make_groundtruth(one, 40, 40, 5.0).likelihood.at(23, 24) - target));
    return {worst_sigma <= 1e-6 && worst_peak == 0.0,
            fmt("|r(sigma) - exp(-1/2)| <= %.1e, |r(SEP) - 1| = %.1e", worst_sigma, worst_peak)};
}

// 5 ---------------------------------------------------------------------------
Outcome ukf_vs_kalman() {
    std::mt19937_64 rng(105);
    std::normal_distribution<double> nz(0.0, 1.0);
    const double heading = -2.2;
    OdometryNoise n;
    n.floor_mm = 0.5;
    n.per_mm = 0.02;
    n.floor_rad = 0.0;
    Pose2D ukf;
    ukf.x = -40.0;
    ukf.y = 12.0;
    ukf.theta = heading;
    ukf.covariance = Eigen::Vector3d(25.0, 25.0, 0.0).asDiagonal();
    oracle::LinearKf kf{{-40.0, 12.0}, Eigen::Matrix2d::Identity() * 25.0};
    Eigen::Vector2d truth(-40.0, 12.0);
    double worst = 0.0, min_eig = 1e300;
    for (int k = 1; k <= 100; ++k) {
        const double d = 15.0 + 10.0 * std::cos(0.2 * k);
        truth += d * Eigen::Vector2d(std::cos(heading), std::sin(heading));
        ukf = ukf_predict(ukf, {static_cast<double>(k), d, 0.0, n});
        kf.predict(d, heading, n.floor_mm + n.per_mm * d);
        const GnssFix fix{static_cast<double>(k), truth.x() + 4.03 * nz(rng), truth.y() + 4.03 * nz(rng), 4.03};
        ukf = ukf_update(ukf, fix);
        kf.update({fix.x, fix.y}, fix.sigma);
        worst = std::max({worst, std::abs(ukf.x - kf.x.x()), std::abs(ukf.y - kf.x.y())});
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(ukf.covariance).eigenvalues().minCoeff());
    }
    return {worst <= 1e-6 && min_eig >= -1e-9,
            fmt("max |UKF - KF| = %.2e mm over 100 steps, min covariance eigenvalue %.2e", worst, min_eig)};
}

// 6 ---------------------------------------------------------------------------
LandmarkMap lattice(int n, double shift) {
    LandmarkMap m;
    for (int i = 0; i < n; ++i) m.landmarks.push_back({(i % 20) * 300.0 + shift, (i / 20) * 300.0, 0.8, 2});
    return m;
}

Outcome count_arithmetic() {
    auto earlier = lattice(314, 0.0);
    auto later = lattice(302, 4.0);
    for (int i = 0; i < 43; ++i) later.landmarks.push_back({-1000.0 - 300 * i, -5000.0, 0.5, 1});
    const auto a = compare_maps(earlier, later, 70.0);
    auto e2 = lattice(291, 0.0);
    auto l2 = lattice(257, -6.0);
    const auto b = compare_maps(e2, l2, 70.0);
    const bool ok = a.matched == 302 && std::abs(100 * a.recall - 96.2) <= 0.1 && std::abs(100 * a.precision - 87.5) <= 0.1 &&
                    b.matched == 257 && std::abs(100 * b.recall - 88.3) <= 0.1;
    return {ok, fmt("302/314/345 -> recall %.2f%% precision %.2f%%; 257/291 -> recall %.2f%%", 100 * a.recall,
                    100 * a.precision, 100 * b.recall)};
}

// 7, 8, 9 ---------------------------------------------------------------------
struct PipelineRun {
    DetectionBenchmark detection;
    MappingBenchmark mapping;
    double detection_seconds = 0.0;
    double mapping_seconds = 0.0;
};

PipelineRun run_pipeline(const E2EConfig& cfg) {
    PipelineRun r;
    auto t0 = std::chrono::steady_clock::now();
    r.detection = run_detection_benchmark(cfg);
    auto t1 = std::chrono::steady_clock::now();
    r.mapping = run_mapping_benchmark(cfg, r.detection.network);
    auto t2 = std::chrono::steady_clock::now();
    r.detection_seconds = std::chrono::duration<double>(t1 - t0).count();
    r.mapping_seconds = std::chrono::duration<double>(t2 - t1).count();
    return r;
}

std::string detection_files(const PipelineRun& r) {
    std::string all;
    for (const auto& d : r.detection.detections) all += detections_to_json(d);
    for (const auto& d : r.mapping.earlier.detections) all += detections_to_json(d);
    for (const auto& d : r.mapping.later.detections) all += detections_to_json(d);
    return all;
}

// 10 --------------------------------------------------------------------------
template <typename Encode, typename Decode>
bool stable(const std::string& bytes, Encode encode, Decode decode) {
    return encode(decode(bytes)) == bytes;
}

Outcome format_round_trips() {
    std::mt19937_64 rng(110);
    const fs::path dir = fs::temp_directory_path() / "sepl_acceptance_io";
    fs::create_directories(dir);
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    auto uint = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    int ok[4] = {0, 0, 0, 0};
    for (int i = 0; i < 50; ++i) {
        // LKM1
        Raster map(uint(1, 64), uint(1, 64), 1);
        for (auto& v : map.data()) v = static_cast<float>(uni(-1e3, 1e3));
        write_lkm1(dir / "m.lkm1", map);
        const auto b1 = read_file_bytes(dir / "m.lkm1");
        write_lkm1(dir / "m2.lkm1", read_lkm1(dir / "m.lkm1"));
        ok[0] += read_lkm1(dir / "m.lkm1") == map && read_file_bytes(dir / "m2.lkm1") == b1;

        // SEPN
        const int ch = uint(1, 4);
        auto net = build_network(ch, 16, 16, random_toy_architecture(rng), static_cast<std::uint64_t>(i));
        save_weights(dir / "w.sepn", net);
        const auto b2 = read_file_bytes(dir / "w.sepn");
        save_weights(dir / "w2.sepn", load_weights(dir / "w.sepn"));
        ok[1] += load_weights(dir / "w.sepn") == net && read_file_bytes(dir / "w2.sepn") == b2;

        // annotation JSON
        Annotation a;
        a.image_id = "img_" + std::to_string(i);
        for (int k = uint(0, 12); k > 0; --k) {
            a.seps.push_back({uni(0, 63.9), uni(0, 63.9), uint(0, 1) ? Species::Crop : Species::Weed, false});
        }
        for (int k = uint(0, 3); k > 0; --k) {
            const double cx = uni(10, 50), cy = uni(10, 50);
            RegionAnnotation r;
            for (int v = 0; v < 5; ++v) {
                const double t = 2 * 3.141592653589793 * v / 5, rad = uni(2, 8);
                r.polygon.push_back({cx + rad * std::cos(t), cy + rad * std::sin(t)});
            }
            a.regions.push_back(r);
        }
        save_annotation(dir / "a.json", a);
        const auto b3 = read_file_bytes(dir / "a.json");
        save_annotation(dir / "a2.json", load_annotation(dir / "a.json"));
        ok[2] += read_file_bytes(dir / "a2.json") == b3 && annotation_to_json(load_annotation(dir / "a.json")) == annotation_to_json(a);

        // landmark CSV
        LandmarkMap lm;
        lm.run_id = "run-" + std::to_string(i);
        lm.date_tag = "2016-05-" + std::to_string(10 + i % 20);
        for (int k = uint(0, 40); k > 0; --k) lm.landmarks.push_back({uni(-1e5, 1e5), uni(-1e5, 1e5), uni(0, 1), uint(1, 30)});
        save_landmark_map(dir / "l.csv", lm);
        const auto b4 = read_file_bytes(dir / "l.csv");
        save_landmark_map(dir / "l2.csv", load_landmark_map(dir / "l.csv"));
        const auto back = load_landmark_map(dir / "l.csv");
        ok[3] += read_file_bytes(dir / "l2.csv") == b4 && back.landmarks == lm.landmarks && back.run_id == lm.run_id;
    }
    fs::remove_all(dir);
    const bool pass = ok[0] == 50 && ok[1] == 50 && ok[2] == 50 && ok[3] == 50;
    return {pass, "LKM1 " + std::to_string(ok[0]) + "/50, SEPN " + std::to_string(ok[1]) + "/50, annotation " +
                      std::to_string(ok[2]) + "/50, landmark CSV " + std::to_string(ok[3]) + "/50 bit-exact"};
}

}  // namespace

int main() {
    report(1, "distance transform vs brute force", distance_transform_oracle, 10);
    report(2, "Otsu vs exhaustive search", otsu_oracle, 5);
    report(3, "gradient check", gradient_check, 60);
    report(4, "likelihood map exactness", likelihood_exactness);
    report(5, "UKF vs linear Kalman filter", ukf_vs_kalman);
    report(6, "map comparison count arithmetic", count_arithmetic);

    const E2EConfig cfg;
    PipelineRun first;
    bool have_first = false;
    report(7, "end-to-end detection benchmark", [&]() -> Outcome {
        first = run_pipeline(cfg);
        have_first = true;
        const auto& d = first.detection;
        const double mad = d.mad.mad_px.value_or(INFINITY);
        return {d.ap >= 0.90 && mad <= 2.0 && first.detection_seconds <= 900,
                fmt("AP@6px %.4f (>= 0.90), MAD %.3f px (<= 2), %.0f s training+evaluation", d.ap, mad, first.detection_seconds)};
    });
    report(8, "map reproducibility simulation", [&]() -> Outcome {
        if (!have_first) return {false, "no pipeline run"};
        const auto& c = first.mapping.comparison;
        return {c.recall >= 0.95 && c.mean_distance <= 25.0 && first.mapping_seconds <= 120,
                fmt("%.0f%% of landmarks matched (>= 95%%) within %.2f mm, mean error %.2f mm (<= 25), %.0f s", 100 * c.recall,
                    c.acceptance_mm, c.mean_distance, first.mapping_seconds) +
                    " [" + std::to_string(c.matched) + "/" + std::to_string(c.earlier_count) + "]"};
    });
    report(9, "determinism", [&]() -> Outcome {
        if (!have_first) return {false, "no pipeline run"};
        const PipelineRun again = run_pipeline(cfg);
        const bool dets = detection_files(again) == detection_files(first);
        const bool maps = landmark_map_to_csv(again.mapping.earlier.map) == landmark_map_to_csv(first.mapping.earlier.map) &&
                          landmark_map_to_csv(again.mapping.later.map) == landmark_map_to_csv(first.mapping.later.map);
        const bool weights = encode_weights(again.detection.network) == encode_weights(first.detection.network);
        return {dets && maps && weights, std::string("detection JSON ") + (dets ? "identical" : "DIFFERS") + ", landmark CSV " +
                                             (maps ? "identical" : "DIFFERS") + ", weights " + (weights ? "identical" : "DIFFER")};
    });
    report(10, "format round trips", format_round_trips);

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
