#pragma once

// Likelihood map -> SEP detections: Otsu split into basins and peak regions,
// one detection per peak region at its likelihood-weighted center of mass.

#include "sepl/raster.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sepl {

struct Detection {
    double x = 0.0;
    double y = 0.0;
    double confidence = 0.0;
    friend bool operator==(const Detection&, const Detection&) = default;
};

enum class PeakScoring { RegionMean, RegionMax };

struct ExtractConfig {
    int otsu_bins = 256;
    Connectivity connectivity = Connectivity::Eight;
    int min_region_area = 3;  // smaller regions are treated as speckle
    PeakScoring scoring = PeakScoring::RegionMean;
};

/// Detections sorted by confidence (descending), ties by centroid (y, x).
/// A constant map has no peaks and yields an empty list.
std::vector<Detection> extract_seps(const Raster& likelihood, const ExtractConfig& config = {});

std::string detections_to_json(const std::vector<Detection>& dets);
std::vector<Detection> detections_from_json(const std::string& text);
std::string detections_to_csv(const std::vector<Detection>& dets);
void save_detections(const std::filesystem::path& path, const std::vector<Detection>& dets);
std::vector<Detection> load_detections(const std::filesystem::path& path);

}  // namespace sepl
