#include "sepl/extraction.hpp"

#include "sepl/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sepl {

std::vector<Detection> extract_seps(const Raster& likelihood, const ExtractConfig& config) {
    if (likelihood.empty()) throw Error("extract: empty likelihood map");
    if (likelihood.channels() != 1) throw Error("extract: expected a single-channel map");

    Raster clamped = likelihood;
    for (float& v : clamped.data()) v = std::clamp(v, 0.0f, 1.0f);

    float threshold = 0.0f;
    try {
        threshold = otsu_threshold(clamped, config.otsu_bins);
    } catch (const Error&) {
        return {};
    }
    const LabeledRegions labels =
        connected_components(threshold_mask(clamped, threshold), config.connectivity);

    std::vector<Detection> dets;
    for (const auto& region : labels.regions()) {
        if (static_cast<int>(region.size()) < config.min_region_area) continue;
        const Point2 c = weighted_centroid(region, clamped);
        double score = 0.0;
        for (const Pixel& p : region) {
            const double v = clamped.at(p.x, p.y);
            score = config.scoring == PeakScoring::RegionMax ? std::max(score, v) : score + v;
        }
        if (config.scoring == PeakScoring::RegionMean) score /= static_cast<double>(region.size());
        dets.push_back({c.x, c.y, score});
    }
    std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    return dets;
}

std::string detections_to_json(const std::vector<Detection>& dets) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& d : dets) j.push_back({{"x", d.x}, {"y", d.y}, {"confidence", d.confidence}});
    return j.dump(2) + "\n";
}

std::vector<Detection> detections_from_json(const std::string& text) {
    std::vector<Detection> out;
    try {
        for (const auto& d : nlohmann::json::parse(text)) {
            out.push_back({d.at("x").get<double>(), d.at("y").get<double>(),
                           d.at("confidence").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("detection JSON: ") + e.what());
    }
    return out;
}

std::string detections_to_csv(const std::vector<Detection>& dets) {
    std::ostringstream out;
    out << "x,y,confidence\n" << std::setprecision(17);
    for (const auto& d : dets) out << d.x << "," << d.y << "," << d.confidence << "\n";
    return out.str();
}

void save_detections(const std::filesystem::path& path, const std::vector<Detection>& dets) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << detections_to_json(dets);
}

std::vector<Detection> load_detections(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return detections_from_json(ss.str());
}

}  // namespace sepl
