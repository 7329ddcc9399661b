#include "sepl/annotation.hpp"

#include "sepl/error.hpp"
#include "sepl/groundtruth.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace sepl {

using nlohmann::json;

const char* to_string(Species s) { return s == Species::Crop ? "crop" : "weed"; }

Species species_from_string(const std::string& s) {
    if (s == "crop") return Species::Crop;
    if (s == "weed") return Species::Weed;
    throw FormatError("unknown species '" + s + "'");
}

Annotation drop_uncertain(const Annotation& a) {
    Annotation out;
    out.image_id = a.image_id;
    for (const auto& s : a.seps)
        if (!s.uncertain) out.seps.push_back(s);
    for (const auto& r : a.regions)
        if (!r.uncertain) out.regions.push_back(r);
    return out;
}

namespace {

bool inside(double x, double y, int width, int height) {
    return x >= 0.0 && y >= 0.0 && x < width && y < height;
}

}  // namespace

void validate(const Annotation& a, int width, int height) {
    for (const auto& s : a.seps) {
        if (!inside(s.x, s.y, width, height)) {
            throw Error("annotation " + a.image_id + ": SEP outside image bounds");
        }
    }
    for (const auto& r : a.regions) {
        for (const auto& p : r.polygon) {
            if (!inside(p.x, p.y, width, height)) {
                throw Error("annotation " + a.image_id + ": polygon vertex outside image bounds");
            }
        }
        if (r.polygon.size() < 3 || polygon_signed_area(r.polygon) == 0.0) {
            throw Error("annotation " + a.image_id + ": degenerate polygon");
        }
        if (!is_simple_polygon(r.polygon)) {
            throw Error("annotation " + a.image_id + ": self-intersecting polygon");
        }
    }
}

std::string annotation_to_json(const Annotation& a) {
    json j;
    j["image_id"] = a.image_id;
    j["seps"] = json::array();
    for (const auto& s : a.seps) {
        j["seps"].push_back({{"x", s.x}, {"y", s.y}, {"species", to_string(s.species)},
                             {"uncertain", s.uncertain}});
    }
    j["regions"] = json::array();
    for (const auto& r : a.regions) {
        json poly = json::array();
        for (const auto& p : r.polygon) poly.push_back({p.x, p.y});
        j["regions"].push_back(
            {{"polygon", poly}, {"species", to_string(r.species)}, {"uncertain", r.uncertain}});
    }
    return j.dump(2) + "\n";
}

Annotation annotation_from_json(const std::string& text) {
    Annotation a;
    try {
        const json j = json::parse(text);
        a.image_id = j.at("image_id").get<std::string>();
        for (const auto& s : j.value("seps", json::array())) {
            a.seps.push_back({s.at("x").get<double>(), s.at("y").get<double>(),
                              species_from_string(s.value("species", "crop")),
                              s.value("uncertain", false)});
        }
        for (const auto& r : j.value("regions", json::array())) {
            RegionAnnotation reg;
            for (const auto& p : r.at("polygon")) {
                reg.polygon.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            }
            reg.species = species_from_string(r.value("species", "weed"));
            reg.uncertain = r.value("uncertain", false);
            a.regions.push_back(std::move(reg));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("annotation JSON: ") + e.what());
    }
    return a;
}

void save_annotation(const std::filesystem::path& path, const Annotation& a) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << annotation_to_json(a);
}

Annotation load_annotation(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return drop_uncertain(annotation_from_json(ss.str()));
}

}  // namespace sepl
