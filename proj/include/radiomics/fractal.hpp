#pragma once

#include <string>
#include <vector>

#include "radiomics/volume.hpp"

namespace radiomics {

enum class TransformKind { Ptpsa, Mbm, Holder };

const char* transform_name(TransformKind k);

// Per-voxel scalar field on the same grid as the source volume:
// ptpsa holds a local fractal dimension in [2, 3]; mbm and holder hold local
// regularity exponents in [0, 1].
struct TransformedVolume {
    Volume values;
    TransformKind kind = TransformKind::Ptpsa;
};

// Axis-aligned voxel box, used to restrict the expensive per-voxel transforms
// to a region of interest. Window samples still read the full source volume
// (with edge replication at volume borders), so restricting the box does not
// change any computed value.
struct VoxelBox {
    int x0 = 0, y0 = 0, z0 = 0;
    int x1 = 0, y1 = 0, z1 = 0;  // inclusive
};

struct FractalOptions {
    int window = 9;                        // odd edge length of the local window
    std::vector<int> ptpsa_scales = {1, 2, 4};
    int mbm_max_lag = 4;
    std::vector<int> holder_radii = {1, 2, 3};
    int threads = 1;
};

// Local fractal dimension from triangular-prism surface areas measured on the
// voxel's axial window across the given cell sizes; the log-log area/scale
// slope gives FD = 2 - slope, clamped to [2, 3].
TransformedVolume ptpsa_transform(const Volume& volume, const FractalOptions& opt);

// Local Hurst exponent from the log-log scaling of mean squared intensity
// increments G(h) within the voxel's cubic window; H = slope/2 clamped to
// [0, 1]. Windows with G(h) = 0 for every lag map to H = 1.
TransformedVolume mbm_transform(const Volume& volume, const FractalOptions& opt);

// Local regularity from oscillation scaling: osc_r = max - min over the
// L-inf ball of radius r; h = slope of log(osc_r + eps) vs log r, clamped to
// [0, 1].
TransformedVolume holder_transform(const Volume& volume, const FractalOptions& opt);

// ROI variants used by the feature extractor; values inside the box equal the
// full-volume transform, voxels outside the box are left at 0.
TransformedVolume ptpsa_transform_roi(const Volume& volume, const FractalOptions& opt, const VoxelBox& roi);
TransformedVolume mbm_transform_roi(const Volume& volume, const FractalOptions& opt, const VoxelBox& roi);
TransformedVolume holder_transform_roi(const Volume& volume, const FractalOptions& opt, const VoxelBox& roi);

} // namespace radiomics
