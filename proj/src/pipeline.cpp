#include "sepl/pipeline.hpp"

#include "sepl/error.hpp"
#include "sepl/groundtruth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sepl {

namespace {

constexpr std::uint64_t kFieldsPerSeed = 1000;
constexpr std::uint64_t kTestOffset = 500;
constexpr std::uint64_t kMappingOffset = 700;

void say(const Logger& log, const std::string& s) {
    if (log) log(s);
}

}  // namespace

E2EConfig::E2EConfig() {
    train.learning_rate = 1e-5;
    train.batch_size = 4;
    train.iterations = 2000;
    train.momentum = 0.9;
}

FieldConfig training_field(const E2EConfig& cfg, int k) {
    FieldConfig f = cfg.field;
    f.rng_seed = cfg.seed * kFieldsPerSeed + static_cast<std::uint64_t>(k);
    f.appearance_seed = f.rng_seed;
    f.sensor_seed = f.rng_seed;
    return f;
}

FieldConfig test_field(const E2EConfig& cfg) {
    FieldConfig f = cfg.field;
    f.rng_seed = cfg.seed * kFieldsPerSeed + kTestOffset;
    f.appearance_seed = f.rng_seed;
    f.sensor_seed = f.rng_seed;
    return f;
}

FieldConfig mapping_field(const E2EConfig& cfg) {
    FieldConfig f = cfg.field;
    f.rng_seed = cfg.seed * kFieldsPerSeed + kMappingOffset;
    f.appearance_seed = f.rng_seed;
    f.sensor_seed = f.rng_seed;
    return f;
}

std::vector<View> training_views(const E2EConfig& cfg, int count) {
    std::vector<View> out;
    for (int k = 0; static_cast<int>(out.size()) < count; ++k) {
        if (k >= static_cast<int>(kTestOffset)) throw Error("cannot collect enough training views");
        const FieldTruth field = generate_field(training_field(cfg, k));
        for (std::size_t i = 0; i < field.poses.size() && static_cast<int>(out.size()) < count; ++i) {
            View v = render_view(field, field.poses[i].pose, static_cast<int>(out.size()));
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::vector<View> test_views(const E2EConfig& cfg, int count) {
    const FieldTruth field = generate_field(test_field(cfg));
    const int n = static_cast<int>(field.poses.size());
    if (count > n) throw Error("test field has fewer views than requested");
    std::vector<View> out;
    for (int i = 0; i < count; ++i) {
        const int k = static_cast<int>(static_cast<long>(i) * n / count);
        out.push_back(render_view(field, field.poses[static_cast<std::size_t>(k)].pose, k));
    }
    return out;
}

std::vector<Point2> annotation_seps(const Annotation& a) {
    return collect_seps(drop_uncertain(a));
}

void append_samples(std::vector<Sample>& out, const Raster& image, const Raster& target, bool augment) {
    if (!augment) {
        out.push_back({to_tensor(image), to_tensor(target)});
        return;
    }
    Raster img[2] = {image, mirror_horizontal(image)};
    Raster tgt[2] = {target, mirror_horizontal(target)};
    for (int m = 0; m < 2; ++m) {
        for (int r = 0; r < 4; ++r) {
            out.push_back({to_tensor(img[m]), to_tensor(tgt[m])});
            img[m] = rotate90(img[m]);
            tgt[m] = rotate90(tgt[m]);
        }
    }
}

std::vector<Sample> make_samples(std::span<const View> views, double sigma_px, bool augment) {
    std::vector<Sample> out;
    for (const auto& v : views) {
        const auto gt = make_groundtruth(annotation_seps(v.annotation), v.image.width(),
                                         v.image.height(), sigma_px);
        append_samples(out, v.image, gt.likelihood, augment);
    }
    return out;
}

Raster infer(const Network& net, const Raster& image) {
    return to_raster(forward(net, to_tensor(image)));
}

DetectionBenchmark run_detection_benchmark(const E2EConfig& cfg, const Logger& log) {
    DetectionBenchmark out;
    const auto train_views = training_views(cfg, cfg.train_images);
    const auto samples = make_samples(train_views, cfg.sigma_px, cfg.augment);
    say(log, "training on " + std::to_string(train_views.size()) + " images (" +
                 std::to_string(samples.size()) + " samples)");

    const auto& first = train_views.front().image;
    Network net = build_network(first.channels(), first.height(), first.width(),
                                default_architecture(), cfg.train.seed);
    const int every = std::max(1, cfg.train.iterations / 10);
    auto result = train(std::move(net), samples, cfg.train, [&](int it, double l) {
        if ((it + 1) % every == 0) {
            std::ostringstream s;
            s << "iteration " << it + 1 << " loss " << l;
            say(log, s.str());
        }
    });
    out.network = std::move(result.network);
    out.loss_history = std::move(result.loss_history);

    out.test = test_views(cfg, cfg.test_images);
    std::vector<ImageEval> evals;
    for (const auto& v : out.test) {
        auto dets = extract_seps(infer(out.network, v.image), cfg.extract);
        evals.push_back({dets, annotation_seps(v.annotation)});
        out.detections.push_back(std::move(dets));
    }
    out.curve = pr_curve(evals, cfg.ap_threshold_px);
    out.ap = average_precision(out.curve);
    out.mad = mean_accepted_distance(evals, cfg.mad_acceptance_px);
    return out;
}

std::vector<Detection> filter_for_mapping(std::span<const Detection> dets, int width, int height,
                                          const MapFilter& filter) {
    std::vector<Detection> out;
    for (const auto& d : dets) {
        const double edge = std::min({d.x, d.y, width - 1 - d.x, height - 1 - d.y});
        if (edge >= filter.border_px && d.confidence >= filter.min_confidence) out.push_back(d);
    }
    return out;
}

SensorStreams streams_from_records(std::span<const TrajectoryRecord> rows, const OdometryNoise& noise) {
    SensorStreams s;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].fix) s.fixes.push_back(*rows[i].fix);
        if (i > 0) s.odometry.push_back({rows[i].timestamp, rows[i].odo_distance, rows[i].odo_dtheta, noise});
    }
    return s;
}

std::vector<TimedPose> estimate_poses(const SensorStreams& sensors) {
    const auto fixes = average_fixes(sensors.fixes, sensors.odometry);
    const double heading = estimate_initial_heading(fixes, sensors.odometry);
    return fuse_trajectory(fixes, sensors.odometry, heading);
}

MappingRun map_run(const FieldTruth& field, const Network& net, const ExtractConfig& extract,
                   const MapFilter& filter, double merge_radius_mm, const std::string& run_id) {
    MappingRun run;
    run.poses = estimate_poses(field.sensors);
    if (run.poses.size() != field.poses.size()) {
        throw Error("estimated trajectory does not cover every image");
    }
    std::vector<FrameDetections> frames;
    for (std::size_t i = 0; i < field.poses.size(); ++i) {
        const View v = render_view(field, field.poses[i].pose, static_cast<int>(i));
        auto dets = extract_seps(infer(net, v.image), extract);
        frames.push_back({run.poses[i].pose, filter_for_mapping(dets, v.image.width(), v.image.height(), filter)});
        run.detections.push_back(std::move(dets));
    }
    run.map = build_map(frames, field.config.camera(), merge_radius_mm);
    run.map.run_id = run_id;
    run.map.date_tag = "sim-" + std::to_string(field.config.appearance_seed);
    return run;
}

MappingBenchmark run_mapping_benchmark(const E2EConfig& cfg, const Network& net, const Logger& log) {
    MappingBenchmark out;
    out.earlier_field = generate_field(mapping_field(cfg));
    const std::uint64_t base = out.earlier_field.config.rng_seed;
    out.later_field = regrow_field(out.earlier_field, base + 1, base + 1, cfg.weed_death_fraction);
    say(log, "mapping run A");
    out.earlier = map_run(out.earlier_field, net, cfg.extract, cfg.map_filter, cfg.merge_radius_mm, "run-a");
    say(log, "mapping run B");
    out.later = map_run(out.later_field, net, cfg.extract, cfg.map_filter, cfg.merge_radius_mm, "run-b");
    out.comparison = compare_maps(out.earlier.map, out.later.map, std::nullopt);
    return out;
}

}  // namespace sepl
