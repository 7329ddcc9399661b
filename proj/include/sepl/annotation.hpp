#pragma once

// Per-image ground truth annotations.
//
// JSON layout (one file per image):
//   {"image_id": str,
//    "seps":    [{"x": f, "y": f, "species": "crop"|"weed", "uncertain": bool}],
//    "regions": [{"polygon": [[x, y], ...], "species": str, "uncertain": bool}]}
//
// Rosette plants are annotated by their stem emerging point, herbaceous plants
// by a polygon around the emergence region.

#include "sepl/raster.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sepl {

enum class Species { Crop, Weed };

const char* to_string(Species s);
Species species_from_string(const std::string& s);

struct SepAnnotation {
    double x = 0.0;
    double y = 0.0;
    Species species = Species::Crop;
    bool uncertain = false;
};

struct RegionAnnotation {
    std::vector<Point2> polygon;
    Species species = Species::Weed;
    bool uncertain = false;
};

struct Annotation {
    std::string image_id;
    std::vector<SepAnnotation> seps;
    std::vector<RegionAnnotation> regions;
};

/// Copy of `a` without the instances flagged as uncertain.
Annotation drop_uncertain(const Annotation& a);

/// Throws when a coordinate lies outside [0,width) x [0,height) or a polygon
/// is degenerate or self-intersecting.
void validate(const Annotation& a, int width, int height);

std::string annotation_to_json(const Annotation& a);
Annotation annotation_from_json(const std::string& text);

void save_annotation(const std::filesystem::path& path, const Annotation& a);
/// Reads an annotation file and drops uncertain instances.
Annotation load_annotation(const std::filesystem::path& path);

}  // namespace sepl
