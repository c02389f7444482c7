#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace radiomics {

// Tumor sub-region selectors. Mask labels follow the BraTS convention:
// 1 = NCR (necrosis), 2 = ED (edema), 4 = ET (enhancing tumor);
// WT (whole tumor) is the union {1, 2, 4}.
enum class Region { WT, ET, ED, NCR };

const char* region_name(Region r);
Region region_from_name(const std::string& name);

struct Dims {
    int nx = 0, ny = 0, nz = 0;
    bool operator==(const Dims&) const = default;
    std::size_t count() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
               static_cast<std::size_t>(nz);
    }
};

struct Spacing {
    double sx = 1.0, sy = 1.0, sz = 1.0;
    bool operator==(const Spacing&) const = default;
};

struct Coord {
    int x = 0, y = 0, z = 0;
    bool operator==(const Coord&) const = default;
};

// 3D scalar grid, row-major with x fastest: index = x + nx*(y + ny*z).
struct Volume {
    Dims dims;
    Spacing spacing;
    std::string modality;  // one of T1, T1C, T2, FLAIR
    std::vector<double> voxels;

    double at(int x, int y, int z) const {
        return voxels[static_cast<std::size_t>(x) +
                      static_cast<std::size_t>(dims.nx) *
                          (static_cast<std::size_t>(y) +
                           static_cast<std::size_t>(dims.ny) * static_cast<std::size_t>(z))];
    }
    double& at(int x, int y, int z) {
        return voxels[static_cast<std::size_t>(x) +
                      static_cast<std::size_t>(dims.nx) *
                          (static_cast<std::size_t>(y) +
                           static_cast<std::size_t>(dims.ny) * static_cast<std::size_t>(z))];
    }
    // Edge-replicated sampling: out-of-range coordinates clamp to the border.
    double at_clamped(int x, int y, int z) const;
};

// Segmentation labels on the same grid as a Volume.
struct Mask {
    Dims dims;
    Spacing spacing;
    std::vector<std::uint8_t> labels;

    std::uint8_t at(int x, int y, int z) const {
        return labels[static_cast<std::size_t>(x) +
                      static_cast<std::size_t>(dims.nx) *
                          (static_cast<std::size_t>(y) +
                           static_cast<std::size_t>(dims.ny) * static_cast<std::size_t>(z))];
    }
};

// Region voxels in deterministic row-major order.
struct RegionVoxels {
    std::vector<Coord> coords;
    std::vector<double> values;
    Region region = Region::WT;
};

// Region voxels binned to integer gray levels in [1, ng].
struct QuantizedRegion {
    std::vector<Coord> coords;
    std::vector<int> levels;
    int ng = 0;
    Region region = Region::WT;
};

void validate_volume(const Volume& v);
void validate_mask(const Mask& m);

// Sidecar + raw format. `path` may point at either the .json sidecar or the
// .raw payload; the partner file is derived by swapping the extension.
// NIfTI-1 files (.nii / .nii.gz) are dispatched to the NIfTI reader.
Volume load_volume(const std::string& path, const std::string& modality_hint = "");
Mask load_mask(const std::string& path);
// transform_tag, when nonempty, is recorded in the sidecar JSON.
void save_volume(const Volume& v, const std::string& path, const std::string& transform_tag = "");
void save_mask(const Mask& m, const std::string& path);

RegionVoxels extract_region(const Volume& volume, const Mask& mask, Region region);
bool region_label_matches(std::uint8_t label, Region region);

// Fixed-bin min-max quantization over the region's own range; a constant
// region maps every voxel to level 1.
QuantizedRegion quantize(const RegionVoxels& region, int ng);

} // namespace radiomics
