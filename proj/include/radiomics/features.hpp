#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "radiomics/fractal.hpp"
#include "radiomics/volume.hpp"

namespace radiomics {

// Ordered (lexicographic) name -> value map. A feature that could not be
// computed (empty sub-region, degenerate matrix) is present with an explicit
// missing marker rather than a silent NaN.
struct FeatureVector {
    std::map<std::string, std::optional<double>> entries;

    void set(const std::string& name, double value) { entries[name] = value; }
    void set_missing(const std::string& name) { entries[name] = std::nullopt; }
    std::size_t size() const { return entries.size(); }
};

// Symmetrized, normalized co-occurrence matrix accumulated over a set of
// 3D offsets; entries sum to 1.
struct CooccurrenceMatrix {
    int ng = 0;
    std::vector<double> p;  // ng x ng, row-major
    std::vector<Coord> offsets;

    double at(int i, int j) const {  // i, j are gray levels in [1, ng]
        return p[static_cast<std::size_t>(i - 1) * ng + (j - 1)];
    }
};

// The 13 unique 3D direction vectors at distance 1.
const std::vector<Coord>& gtsdm_offsets13();

std::map<std::string, double> histogram_features(const std::vector<double>& values);

CooccurrenceMatrix gtsdm_matrix(const QuantizedRegion& q, const std::vector<Coord>& offsets);
std::map<std::string, double> gtsdm_features(const QuantizedRegion& q,
                                             const std::vector<Coord>& offsets);

// Zones are maximal 26-connected components of equal gray level.
struct GlzsmZones {
    std::vector<std::pair<int, int>> zones;  // (gray level, size)
};
GlzsmZones glzsm_zones(const QuantizedRegion& q);
std::map<std::string, double> glzsm_features(const QuantizedRegion& q);

std::map<std::string, double> ngtdm_features(const QuantizedRegion& q);

std::map<std::string, double> volumetric_features(const Mask& mask);

enum class Axis { X, Y, Z };
std::map<std::string, double> spatial_features(const Mask& mask, Axis axis);

enum class FeatureModel { NFRF, MRF };
FeatureModel feature_model_from_name(const std::string& name);
const char* feature_model_name(FeatureModel m);

struct Study {
    // keys: T1, T1C, T2, FLAIR
    std::map<std::string, Volume> volumes;
    Mask mask;
};

struct FeatureConfig {
    int ng = 64;
    FractalOptions fractal;
    int threads = 1;
};

// Full per-study feature vector. NFRF: histogram stats on each sub-region
// (ET/ED/NCR/WT) plus GTSDM/GLZSM/NGTDM on the raw WT region per modality,
// plus volumetric and per-axis spatial shape features. MRF: NFRF plus the
// same families recomputed on the ptpsa/mbm/holder transforms (WT region).
// The emitted name set depends only on the model, never on the data.
FeatureVector extract_feature_vector(const Study& study, FeatureModel model,
                                     const FeatureConfig& config);

// The exact name set extract_feature_vector emits for a model.
std::vector<std::string> feature_names(FeatureModel model);

} // namespace radiomics
