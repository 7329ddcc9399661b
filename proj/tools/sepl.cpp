// sepl: command line front end for the SEP detection and mapping pipeline.

#include "sepl/annotation.hpp"
#include "sepl/detect_eval.hpp"
#include "sepl/error.hpp"
#include "sepl/extraction.hpp"
#include "sepl/geomap.hpp"
#include "sepl/groundtruth.hpp"
#include "sepl/pipeline.hpp"
#include "sepl/raster_io.hpp"
#include "sepl/synthfield.hpp"
#include "sepl/train.hpp"
#include "sepl/weights_io.hpp"

#include "svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sepl;

namespace {

struct Output {
    bool quiet = false;
    bool as_json = false;
    json result = json::object();

    void log(const std::string& s) const {
        if (!quiet) std::cerr << s << '\n';
    }
    void finish() const {
        if (as_json) {
            std::cout << result.dump(2) << '\n';
        } else if (!quiet) {
            for (const auto& [k, v] : result.items()) {
                if (!v.is_structured()) std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
            }
        }
    }
};

void make_parent(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
    make_parent(path);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
    if (!f) throw Error("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
    const auto bytes = read_file_bytes(path);
    return std::string(bytes.begin(), bytes.end());
}

/// Sorted file stems in `dir` whose names end with `suffix`.
std::vector<std::string> stems(const fs::path& dir, const std::string& suffix) {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            out.push_back(name.substr(0, name.size() - suffix.size()));
        }
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) throw Error("no *" + suffix + " files in " + dir.string());
    return out;
}

int view_index(const std::string& stem) {
    const auto pos = stem.find_last_of('_');
    const std::string digits = pos == std::string::npos ? stem : stem.substr(pos + 1);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        throw Error("cannot read a view index from '" + stem + "'");
    }
    return std::stoi(digits);
}

Raster read_view_image(const fs::path& dir, const std::string& stem) {
    return read_rgbn(dir / (stem + "_rgb.ppm"), dir / (stem + "_nir.pgm"));
}

void write_view_image(const fs::path& dir, const std::string& stem, const Raster& image) {
    fs::create_directories(dir);
    write_rgbn(dir / (stem + "_rgb.ppm"), dir / (stem + "_nir.pgm"), image);
}

struct CameraFile {
    CameraConfig camera;
    int image_width = 0;
    int image_height = 0;
};

json camera_to_json(const FieldConfig& f) {
    const CameraConfig c = f.camera();
    return {{"focal_px", c.focal_px},     {"cx", c.cx},
            {"cy", c.cy},                 {"height_mm", c.height_mm},
            {"mount_x_mm", c.mount_x_mm}, {"mount_y_mm", c.mount_y_mm},
            {"image_width", f.image_width}, {"image_height", f.image_height}};
}

CameraFile camera_from_file(const fs::path& path) {
    try {
        const json j = json::parse(read_text(path));
        CameraFile file;
        file.image_width = j.at("image_width").get<int>();
        file.image_height = j.at("image_height").get<int>();
        CameraConfig& c = file.camera;
        c.focal_px = j.at("focal_px").get<double>();
        c.cx = j.at("cx").get<double>();
        c.cy = j.at("cy").get<double>();
        c.height_mm = j.at("height_mm").get<double>();
        c.mount_x_mm = j.value("mount_x_mm", 0.0);
        c.mount_y_mm = j.value("mount_y_mm", 0.0);
        return file;
    } catch (const json::exception& e) {
        throw FormatError("bad camera file " + path.string() + ": " + e.what());
    }
}

std::vector<double> parse_thresholds(const std::string& spec) {
    std::vector<double> out;
    try {
        if (spec.find(':') != std::string::npos) {
            double lo = 0, hi = 0, step = 0;
            char c1 = 0, c2 = 0;
            std::istringstream in(spec);
            if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !in.eof() || step <= 0 || hi < lo) {
                throw Error("");
            }
            for (int k = 0; lo + k * step <= hi + 1e-9; ++k) out.push_back(lo + k * step);
        } else {
            std::stringstream in(spec);
            std::string item;
            while (std::getline(in, item, ',')) out.push_back(std::stod(item));
        }
    } catch (const std::exception&) {
        throw CLI::ValidationError("--thresholds", "expected lo:hi:step or a comma list, got '" + spec + "'");
    }
    for (double t : out) {
        if (!(t > 0)) throw CLI::ValidationError("--thresholds", "thresholds must be positive");
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

void write_pr_reports(const fs::path& dir, const std::vector<PrCurve>& curves) {
    std::vector<svg::Series> series;
    for (const auto& c : curves) {
        write_text(dir / ("pr_" + fmt(c.threshold) + "px.csv"), pr_curve_to_csv(c));
        svg::Series s{fmt(c.threshold) + " px", {}};
        for (const auto& p : c.points) s.points.push_back({p.recall, p.precision});
        series.push_back(std::move(s));
    }
    write_text(dir / "pr.svg", svg::line_chart({"Precision / recall", "recall", "precision"}, series));
}

void write_error_histogram(const fs::path& dir, const MapComparison& cmp) {
    const int bins = 10;
    const double width = std::max(cmp.acceptance_mm, 1e-9) / bins;
    std::vector<double> edges, counts(bins, 0.0);
    for (int i = 0; i <= bins; ++i) edges.push_back(i * width);
    for (const auto& p : cmp.pairs) counts[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(p.distance / width)))] += 1;
    std::ostringstream csv;
    csv.precision(17);
    csv << "bin_lo_mm,bin_hi_mm,count\n";
    for (int i = 0; i < bins; ++i) csv << edges[i] << ',' << edges[i + 1] << ',' << counts[i] << '\n';
    write_text(dir / "errors.csv", csv.str());
    svg::Chart chart{"Landmark position error", "error (mm)", "count"};
    chart.x_max = edges.back();
    chart.y_max = std::max(1.0, *std::max_element(counts.begin(), counts.end()));
    write_text(dir / "errors.svg", svg::bar_chart(chart, edges, counts));
}

json comparison_summary(const MapComparison& c) {
    return {{"acceptance_mm", c.acceptance_mm}, {"matched", c.matched},     {"earlier", c.earlier_count},
            {"later", c.later_count},           {"recall", c.recall},       {"precision", c.precision},
            {"mean_error_mm", c.mean_distance}, {"mean_dx_mm", c.mean_dx}, {"mean_dy_mm", c.mean_dy}};
}

void write_comparison(const fs::path& dir, const MapComparison& cmp) {
    write_text(dir / "report.json", comparison_to_json(cmp));
    write_error_histogram(dir, cmp);
}

void write_mapping_run(const fs::path& dir, const FieldTruth& field, const MappingRun& run) {
    write_text(dir / "trajectory.csv", trajectory_to_csv(trajectory_records(field.sensors)));
    fs::create_directories(dir / "detections");
    for (std::size_t i = 0; i < run.detections.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "view_%05zu.json", i);
        save_detections(dir / "detections" / name, run.detections[i]);
    }
    save_landmark_map(dir / "landmarks.csv", run.map);
}

// ---------------------------------------------------------------------------

struct FieldOptions {
    std::string stage = "mid";
    double weed_density = FieldConfig{}.weed_density_per_m2;
    int rows = FieldConfig{}.crop_rows;
    int crops_per_row = FieldConfig{}.crops_per_row;
    double gnss_sigma = FieldConfig{}.gnss_sigma_mm;

    void add(CLI::App* app) {
        app->add_option("--stage", stage, "Growth stage")->check(CLI::IsMember({"early", "mid", "late"}))->capture_default_str();
        app->add_option("--weed-density", weed_density, "Weeds per square metre")->check(CLI::NonNegativeNumber)->capture_default_str();
        app->add_option("--rows", rows, "Crop rows")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--crops-per-row", crops_per_row, "Crops per row")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--gnss-sigma", gnss_sigma, "Per-axis GNSS noise sigma (mm)")->check(CLI::NonNegativeNumber)->capture_default_str();
    }
    void apply(FieldConfig& f) const {
        f.stage = growth_stage_from_string(stage);
        f.weed_density_per_m2 = weed_density;
        f.crop_rows = rows;
        f.crops_per_row = crops_per_row;
        f.gnss_sigma_mm = gnss_sigma;
    }
};

struct TrainOptions {
    double lr = E2EConfig{}.train.learning_rate;
    int iterations = E2EConfig{}.train.iterations;
    int batch = E2EConfig{}.train.batch_size;
    double momentum = E2EConfig{}.train.momentum;
    bool no_augment = false;

    void add(CLI::App* app) {
        app->add_option("--lr", lr, "Learning rate")->check(CLI::NonNegativeNumber)->capture_default_str();
        app->add_option("--iterations", iterations, "SGD iterations")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--batch", batch, "Mini-batch size")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--momentum", momentum, "Momentum")->check(CLI::Range(0.0, 1.0))->capture_default_str();
        app->add_flag("--no-augment", no_augment, "Train on the images as given, without rotations and mirrors");
    }
    TrainConfig config(std::uint64_t seed) const {
        TrainConfig t;
        t.learning_rate = lr;
        t.iterations = iterations;
        t.batch_size = batch;
        t.momentum = momentum;
        t.seed = seed;
        return t;
    }
};

struct ExtractOptions {
    int bins = ExtractConfig{}.otsu_bins;
    int min_area = ExtractConfig{}.min_region_area;
    std::string scoring = "mean";

    void add(CLI::App* app) {
        app->add_option("--bins", bins, "Otsu histogram bins")->check(CLI::Range(2, 65536))->capture_default_str();
        app->add_option("--min-area", min_area, "Smallest peak region (px)")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--scoring", scoring, "Peak confidence")->check(CLI::IsMember({"mean", "max"}))->capture_default_str();
    }
    ExtractConfig config() const {
        ExtractConfig c;
        c.otsu_bins = bins;
        c.min_region_area = min_area;
        c.scoring = scoring == "max" ? PeakScoring::RegionMax : PeakScoring::RegionMean;
        return c;
    }
};

struct MapOptions {
    double merge_radius = kDefaultMergeRadiusMm;
    double border = MapFilter{}.border_px;
    double min_confidence = MapFilter{}.min_confidence;

    void add(CLI::App* app) {
        app->add_option("--merge-radius", merge_radius, "Landmark merge radius (mm)")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--border", border, "Ignore detections closer than this to the image border (px)")->check(CLI::NonNegativeNumber)->capture_default_str();
        app->add_option("--min-confidence", min_confidence, "Ignore detections below this confidence")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    }
    MapFilter filter() const { return {border, min_confidence}; }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stem emerging point detection, evaluation and landmark mapping.\n"
                 "Option precedence: command line flags > --config file > built-in defaults.\n"
                 "Config files are TOML; options of a subcommand go into a section named after it."};
    app.set_config("--config", "", "TOML config file");
    app.require_subcommand(1);
    app.fallthrough();

    Output out;
    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "Seed for every random choice")->capture_default_str();
    app.add_flag("--quiet", out.quiet, "No progress or summary output");
    app.add_flag("--json", out.as_json, "Print the result as JSON on stdout");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic field: images, annotations, trajectory");
    fs::path gen_out;
    FieldOptions gen_field;
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen_field.add(gen);

    // gt
    auto* gt = app.add_subcommand("gt", "Annotations to LKM1 likelihood maps");
    fs::path gt_ann, gt_out;
    double gt_sigma = kDefaultSigmaPx;
    int gt_width = 64, gt_height = 64;
    gt->add_option("--annotations", gt_ann, "Annotation directory")->required()->check(CLI::ExistingDirectory);
    gt->add_option("--out", gt_out, "Output directory")->required();
    gt->add_option("--sigma", gt_sigma, "Likelihood spread (px)")->check(CLI::PositiveNumber)->capture_default_str();
    gt->add_option("--width", gt_width, "Map width (px)")->check(CLI::PositiveNumber)->capture_default_str();
    gt->add_option("--height", gt_height, "Map height (px)")->check(CLI::PositiveNumber)->capture_default_str();

    // train
    auto* tr = app.add_subcommand("train", "Train the network on images and LKM1 targets");
    fs::path tr_images, tr_targets, tr_out, tr_loss;
    TrainOptions tr_opts;
    tr->add_option("--images", tr_images, "Image directory (*_rgb.ppm + *_nir.pgm)")->required()->check(CLI::ExistingDirectory);
    tr->add_option("--targets", tr_targets, "Target directory (*.lkm1)")->required()->check(CLI::ExistingDirectory);
    tr->add_option("--out", tr_out, "Weights file")->required();
    tr->add_option("--loss-csv", tr_loss, "Write the loss history here");
    tr_opts.add(tr);

    // infer
    auto* inf = app.add_subcommand("infer", "Predict LKM1 likelihood maps");
    fs::path inf_weights, inf_images, inf_out;
    inf->add_option("--weights", inf_weights, "Weights file")->required()->check(CLI::ExistingFile);
    inf->add_option("--images", inf_images, "Image directory")->required()->check(CLI::ExistingDirectory);
    inf->add_option("--out", inf_out, "Output directory")->required();

    // extract
    auto* ex = app.add_subcommand("extract", "Likelihood maps to detection JSON");
    fs::path ex_maps, ex_out;
    ExtractOptions ex_opts;
    ex->add_option("--maps", ex_maps, "LKM1 directory")->required()->check(CLI::ExistingDirectory);
    ex->add_option("--out", ex_out, "Output directory")->required();
    ex_opts.add(ex);

    // eval
    auto* ev = app.add_subcommand("eval", "Precision/recall, AP and MAD of detections");
    fs::path ev_dets, ev_ann, ev_out;
    std::string ev_thresholds = "6:18:2";
    double ev_acceptance = kDefaultAcceptancePx;
    ev->add_option("--detections", ev_dets, "Detection directory")->required()->check(CLI::ExistingDirectory);
    ev->add_option("--annotations", ev_ann, "Annotation directory")->required()->check(CLI::ExistingDirectory);
    ev->add_option("--out", ev_out, "Report directory")->required();
    ev->add_option("--thresholds", ev_thresholds, "Match thresholds (px): lo:hi:step or a comma list")->capture_default_str();
    ev->add_option("--acceptance", ev_acceptance, "Acceptance radius for MAD (px)")->check(CLI::PositiveNumber)->capture_default_str();

    // map
    auto* mp = app.add_subcommand("map", "Detections and trajectory to a landmark map");
    fs::path mp_dets, mp_traj, mp_cam, mp_out;
    std::string mp_run_id = "run", mp_date;
    MapOptions mp_opts;
    mp->add_option("--detections", mp_dets, "Detection directory (view_NNNNN.json)")->required()->check(CLI::ExistingDirectory);
    mp->add_option("--trajectory", mp_traj, "Trajectory CSV")->required()->check(CLI::ExistingFile);
    mp->add_option("--camera", mp_cam, "Camera JSON")->required()->check(CLI::ExistingFile);
    mp->add_option("--out", mp_out, "Landmark CSV")->required();
    mp->add_option("--run-id", mp_run_id, "Run id stored in the map")->capture_default_str();
    mp->add_option("--date-tag", mp_date, "Date tag stored in the map");
    mp_opts.add(mp);

    // compare
    auto* cmpc = app.add_subcommand("compare", "Compare two landmark maps");
    fs::path cmp_a, cmp_b, cmp_out;
    std::string cmp_acc = "auto";
    cmpc->add_option("--earlier", cmp_a, "Earlier landmark CSV")->required()->check(CLI::ExistingFile);
    cmpc->add_option("--later", cmp_b, "Later landmark CSV")->required()->check(CLI::ExistingFile);
    cmpc->add_option("--out", cmp_out, "Report directory")->required();
    cmpc->add_option("--acceptance", cmp_acc, "Acceptance in mm, or auto for 3 sigma")->capture_default_str();

    // e2e
    auto* e2e = app.add_subcommand("e2e", "Train, evaluate and map on synthetic fields");
    fs::path e2e_out;
    E2EConfig e2e_cfg;
    FieldOptions e2e_field;
    TrainOptions e2e_train;
    ExtractOptions e2e_extract;
    MapOptions e2e_map;
    double e2e_min_ap = 0.90, e2e_max_mad = 2.0, e2e_min_matched = 0.95, e2e_max_error = 25.0;
    e2e->add_option("--out", e2e_out, "Output directory")->required();
    e2e->add_option("--train-images", e2e_cfg.train_images, "Training images")->check(CLI::PositiveNumber)->capture_default_str();
    e2e->add_option("--test-images", e2e_cfg.test_images, "Held-out test images")->check(CLI::PositiveNumber)->capture_default_str();
    e2e->add_option("--sigma", e2e_cfg.sigma_px, "Target likelihood spread (px)")->check(CLI::PositiveNumber)->capture_default_str();
    e2e->add_option("--ap-threshold", e2e_cfg.ap_threshold_px, "Match threshold for AP (px)")->check(CLI::PositiveNumber)->capture_default_str();
    e2e->add_option("--weed-death", e2e_cfg.weed_death_fraction, "Fraction of weeds removed before the second run")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    e2e->add_option("--min-ap", e2e_min_ap, "Required AP")->capture_default_str();
    e2e->add_option("--max-mad", e2e_max_mad, "Allowed MAD (px)")->capture_default_str();
    e2e->add_option("--min-matched", e2e_min_matched, "Required fraction of matched landmarks")->capture_default_str();
    e2e->add_option("--max-error", e2e_max_error, "Allowed mean matched error (mm)")->capture_default_str();
    e2e_field.add(e2e);
    e2e_train.add(e2e);
    e2e_extract.add(e2e);
    e2e_map.add(e2e);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }

    auto logger = [&](const std::string& s) { out.log(s); };
    int status = 0;
    try {
        if (*gen) {
            FieldConfig cfg;
            gen_field.apply(cfg);
            cfg.rng_seed = cfg.appearance_seed = cfg.sensor_seed = seed;
            const FieldTruth field = generate_field(cfg);
            fs::create_directories(gen_out / "annotations");
            for (std::size_t i = 0; i < field.poses.size(); ++i) {
                const View v = render_view(field, field.poses[i].pose, static_cast<int>(i));
                write_view_image(gen_out / "images", v.annotation.image_id, v.image);
                save_annotation(gen_out / "annotations" / (v.annotation.image_id + ".json"), v.annotation);
            }
            write_text(gen_out / "trajectory.csv", trajectory_to_csv(trajectory_records(field.sensors)));
            write_text(gen_out / "field_truth.json", field_truth_to_json(field));
            write_text(gen_out / "camera.json", camera_to_json(cfg).dump(2) + "\n");
            out.result = {{"views", field.poses.size()}, {"plants", field.plants.size()}, {"out", gen_out.string()}};
        } else if (*gt) {
            int n = 0;
            fs::create_directories(gt_out);
            for (const auto& stem : stems(gt_ann, ".json")) {
                const Annotation a = load_annotation(gt_ann / (stem + ".json"));
                validate(a, gt_width, gt_height);
                write_lkm1(gt_out / (stem + ".lkm1"), make_groundtruth(a, gt_width, gt_height, gt_sigma).likelihood);
                ++n;
            }
            out.result = {{"maps", n}, {"sigma_px", gt_sigma}};
        } else if (*tr) {
            std::vector<Sample> samples;
            int w = 0, h = 0, c = 0;
            for (const auto& stem : stems(tr_images, "_rgb.ppm")) {
                const Raster img = read_view_image(tr_images, stem);
                const Raster target = read_lkm1(tr_targets / (stem + ".lkm1"));
                if (target.width() != img.width() || target.height() != img.height()) {
                    throw Error("target " + stem + " does not match its image size");
                }
                w = img.width();
                h = img.height();
                c = img.channels();
                append_samples(samples, img, target, !tr_opts.no_augment);
            }
            out.log("training on " + std::to_string(samples.size()) + " samples");
            const TrainConfig tc = tr_opts.config(seed);
            const int every = std::max(1, tc.iterations / 10);
            auto res = train(build_network(c, h, w, default_architecture(), seed), samples, tc, [&](int it, double l) {
                if ((it + 1) % every == 0) out.log("iteration " + std::to_string(it + 1) + " loss " + fmt(l));
            });
            make_parent(tr_out);
            save_weights(tr_out, res.network);
            if (!tr_loss.empty()) {
                std::ostringstream s;
                s.precision(17);
                s << "iteration,loss\n";
                for (std::size_t i = 0; i < res.loss_history.size(); ++i) s << i + 1 << ',' << res.loss_history[i] << '\n';
                write_text(tr_loss, s.str());
            }
            out.result = {{"samples", samples.size()}, {"final_loss", res.loss_history.back()}, {"weights", tr_out.string()}};
        } else if (*inf) {
            const Network net = load_weights(inf_weights);
            int n = 0;
            for (const auto& stem : stems(inf_images, "_rgb.ppm")) {
                fs::create_directories(inf_out);
                write_lkm1(inf_out / (stem + ".lkm1"), infer(net, read_view_image(inf_images, stem)));
                ++n;
            }
            out.result = {{"maps", n}};
        } else if (*ex) {
            const ExtractConfig cfg = ex_opts.config();
            std::size_t total = 0;
            fs::create_directories(ex_out);
            for (const auto& stem : stems(ex_maps, ".lkm1")) {
                const auto dets = extract_seps(read_lkm1(ex_maps / (stem + ".lkm1")), cfg);
                total += dets.size();
                save_detections(ex_out / (stem + ".json"), dets);
            }
            out.result = {{"detections", total}};
        } else if (*ev) {
            const auto thresholds = parse_thresholds(ev_thresholds);
            std::vector<ImageEval> images;
            for (const auto& stem : stems(ev_ann, ".json")) {
                const fs::path det = ev_dets / (stem + ".json");
                if (!fs::exists(det)) throw Error("missing detections for " + stem);
                images.push_back({load_detections(det), annotation_seps(load_annotation(ev_ann / (stem + ".json")))});
            }
            std::vector<PrCurve> curves;
            json ap = json::object();
            for (double t : thresholds) {
                curves.push_back(pr_curve(images, t));
                ap[fmt(t)] = average_precision(curves.back());
                out.result["ap@" + fmt(t) + "px"] = ap[fmt(t)];
            }
            write_pr_reports(ev_out, curves);
            const auto mad = mean_accepted_distance(images, ev_acceptance);
            out.result["mad_px"] = mad.mad_px ? json(*mad.mad_px) : json(nullptr);
            out.result["accepted"] = mad.accepted;
            out.result["images"] = images.size();
            json report = out.result;
            report["ap"] = ap;
            write_text(ev_out / "eval.json", report.dump(2) + "\n");
        } else if (*mp) {
            const CameraFile cam = camera_from_file(mp_cam);
            const auto streams = streams_from_records(trajectory_from_csv(read_text(mp_traj)), FieldConfig{}.odometry);
            const auto poses = estimate_poses(streams);
            std::vector<FrameDetections> frames;
            for (const auto& stem : stems(mp_dets, ".json")) {
                const int k = view_index(stem);
                if (k < 0 || k >= static_cast<int>(poses.size())) throw Error("no pose for view " + stem);
                const auto dets = load_detections(mp_dets / (stem + ".json"));
                frames.push_back({poses[static_cast<std::size_t>(k)].pose,
                                  filter_for_mapping(dets, cam.image_width, cam.image_height, mp_opts.filter())});
            }
            LandmarkMap m = build_map(frames, cam.camera, mp_opts.merge_radius);
            m.run_id = mp_run_id;
            m.date_tag = mp_date;
            make_parent(mp_out);
            save_landmark_map(mp_out, m);
            out.result = {{"frames", frames.size()}, {"landmarks", m.landmarks.size()}};
        } else if (*cmpc) {
            Acceptance acc;
            if (cmp_acc != "auto") {
                try {
                    std::size_t used = 0;
                    acc = std::stod(cmp_acc, &used);
                    if (used != cmp_acc.size() || !(*acc > 0)) throw std::invalid_argument("");
                } catch (const std::exception&) {
                    std::cerr << "usage error: --acceptance must be 'auto' or a positive number of mm\n";
                    return 2;
                }
            }
            const auto cmp = compare_maps(load_landmark_map(cmp_a), load_landmark_map(cmp_b), acc);
            write_comparison(cmp_out, cmp);
            out.result = comparison_summary(cmp);
        } else if (*e2e) {
            e2e_cfg.seed = seed;
            e2e_field.apply(e2e_cfg.field);
            e2e_cfg.train = e2e_train.config(seed);
            e2e_cfg.augment = !e2e_train.no_augment;
            e2e_cfg.extract = e2e_extract.config();
            e2e_cfg.merge_radius_mm = e2e_map.merge_radius;
            e2e_cfg.map_filter = e2e_map.filter();

            const auto det = run_detection_benchmark(e2e_cfg, logger);
            fs::create_directories(e2e_out / "test" / "detections");
            fs::create_directories(e2e_out / "test" / "annotations");
            save_weights(e2e_out / "weights.sepn", det.network);
            for (std::size_t i = 0; i < det.test.size(); ++i) {
                const auto& id = det.test[i].annotation.image_id;
                save_detections(e2e_out / "test" / "detections" / (id + ".json"), det.detections[i]);
                save_annotation(e2e_out / "test" / "annotations" / (id + ".json"), det.test[i].annotation);
            }
            write_pr_reports(e2e_out / "test", {det.curve});

            const auto mb = run_mapping_benchmark(e2e_cfg, det.network, logger);
            write_text(e2e_out / "camera.json", camera_to_json(mb.earlier_field.config).dump(2) + "\n");
            write_mapping_run(e2e_out / "run-a", mb.earlier_field, mb.earlier);
            write_mapping_run(e2e_out / "run-b", mb.later_field, mb.later);
            write_comparison(e2e_out / "compare", mb.comparison);

            const double mad = det.mad.mad_px.value_or(INFINITY);
            const auto& c = mb.comparison;
            const bool det_ok = det.ap >= e2e_min_ap && mad <= e2e_max_mad;
            const bool map_ok = c.recall >= e2e_min_matched && c.mean_distance <= e2e_max_error;
            out.result = {{"ap", det.ap},
                          {"mad_px", det.mad.mad_px ? json(mad) : json(nullptr)},
                          {"detection", det_ok ? "PASS" : "FAIL"},
                          {"matched_fraction", c.recall},
                          {"mean_error_mm", c.mean_distance},
                          {"acceptance_mm", c.acceptance_mm},
                          {"mapping", map_ok ? "PASS" : "FAIL"},
                          {"comparison", comparison_summary(c)}};
            if (!out.as_json && !out.quiet) {
                std::printf("%s detection: AP@%gpx %.4f (>= %g), MAD %.3f px (<= %g)\n", det_ok ? "PASS" : "FAIL",
                            e2e_cfg.ap_threshold_px, det.ap, e2e_min_ap, mad, e2e_max_mad);
                std::printf("%s mapping: %d/%d landmarks matched (%.1f%%, >= %g%%), mean error %.2f mm (<= %g), acceptance %.2f mm\n",
                            map_ok ? "PASS" : "FAIL", c.matched, c.earlier_count, 100 * c.recall, 100 * e2e_min_matched,
                            c.mean_distance, e2e_max_error, c.acceptance_mm);
                return 0;
            }
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::cerr << "error: " << msg << '\n';
        return 1;
    }
    out.finish();
    return status;
}
