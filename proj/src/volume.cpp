#include "radiomics/volume.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "radiomics/errors.hpp"
#include "radiomics/nifti.hpp"

namespace radiomics {

namespace fs = std::filesystem;
using nlohmann::json;

const char* region_name(Region r) {
    switch (r) {
        case Region::WT: return "WT";
        case Region::ET: return "ET";
        case Region::ED: return "ED";
        case Region::NCR: return "NCR";
    }
    return "?";
}

Region region_from_name(const std::string& name) {
    if (name == "WT") return Region::WT;
    if (name == "ET") return Region::ET;
    if (name == "ED") return Region::ED;
    if (name == "NCR") return Region::NCR;
    throw data_error("unknown region '" + name + "' (expected WT, ET, ED or NCR)");
}

double Volume::at_clamped(int x, int y, int z) const {
    x = std::clamp(x, 0, dims.nx - 1);
    y = std::clamp(y, 0, dims.ny - 1);
    z = std::clamp(z, 0, dims.nz - 1);
    return at(x, y, z);
}

void validate_volume(const Volume& v) {
    if (v.dims.nx < 1 || v.dims.ny < 1 || v.dims.nz < 1)
        throw data_error("volume dims must be >= 1 in every axis");
    if (!(v.spacing.sx > 0.0) || !(v.spacing.sy > 0.0) || !(v.spacing.sz > 0.0))
        throw data_error("volume spacing must be > 0 in every axis");
    if (v.voxels.size() != v.dims.count())
        throw data_error("voxel count " + std::to_string(v.voxels.size()) +
                         " does not match dims product " + std::to_string(v.dims.count()));
    for (std::size_t i = 0; i < v.voxels.size(); ++i)
        if (!std::isfinite(v.voxels[i]))
            throw data_error("non-finite intensity at voxel index " + std::to_string(i));
    static const char* kModalities[] = {"T1", "T1C", "T2", "FLAIR"};
    bool ok = false;
    for (const char* m : kModalities) ok = ok || v.modality == m;
    if (!ok) throw data_error("unknown modality tag '" + v.modality + "'");
}

void validate_mask(const Mask& m) {
    if (m.dims.nx < 1 || m.dims.ny < 1 || m.dims.nz < 1)
        throw data_error("mask dims must be >= 1 in every axis");
    if (m.labels.size() != m.dims.count())
        throw data_error("mask label count does not match dims product");
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        const std::uint8_t l = m.labels[i];
        if (l != 0 && l != 1 && l != 2 && l != 4)
            throw data_error("mask label " + std::to_string(int(l)) + " at voxel index " +
                             std::to_string(i) + " is not one of {0,1,2,4}");
    }
}

namespace {

struct SidecarPaths {
    fs::path json_path;
    fs::path raw_path;
};

SidecarPaths sidecar_paths(const std::string& path) {
    fs::path p(path);
    const std::string ext = p.extension().string();
    SidecarPaths out;
    if (ext == ".json") {
        out.json_path = p;
        out.raw_path = p;
        out.raw_path.replace_extension(".raw");
    } else if (ext == ".raw") {
        out.raw_path = p;
        out.json_path = p;
        out.json_path.replace_extension(".json");
    } else {
        throw io_error("unsupported volume path '" + path +
                       "' (expected .json/.raw sidecar pair or .nii/.nii.gz)");
    }
    return out;
}

bool is_nifti_path(const std::string& path) {
    return path.size() >= 4 &&
           (path.ends_with(".nii") || path.ends_with(".nii.gz"));
}

struct SidecarHeader {
    Dims dims;
    Spacing spacing;
    std::string dtype;
    std::string modality;
    std::string transform;
};

SidecarHeader read_sidecar(const fs::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw io_error("cannot open sidecar '" + json_path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw io_error("malformed sidecar '" + json_path.string() + "': " + e.what());
    }
    SidecarHeader h;
    try {
        const auto& d = j.at("dims");
        const auto& s = j.at("spacing");
        if (d.size() != 3 || s.size() != 3) throw io_error("dims/spacing must have 3 entries");
        h.dims = {d[0].get<int>(), d[1].get<int>(), d[2].get<int>()};
        h.spacing = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
        h.dtype = j.at("dtype").get<std::string>();
        h.modality = j.value("modality", "");
        h.transform = j.value("transform", "");
    } catch (const json::exception& e) {
        throw io_error("malformed sidecar '" + json_path.string() + "': " + e.what());
    }
    return h;
}

std::vector<char> read_raw(const fs::path& raw_path) {
    std::ifstream in(raw_path, std::ios::binary);
    if (!in) throw io_error("cannot open raw payload '" + raw_path.string() + "'");
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

std::size_t dtype_size(const std::string& dtype) {
    if (dtype == "u8") return 1;
    if (dtype == "i16") return 2;
    if (dtype == "f32") return 4;
    if (dtype == "f64") return 8;
    throw io_error("unsupported dtype '" + dtype + "' (expected u8, i16, f32 or f64)");
}

// Raw payloads are little-endian; this codebase targets little-endian hosts.
template <typename T>
std::vector<double> decode_payload(const std::vector<char>& bytes) {
    std::vector<double> out(bytes.size() / sizeof(T));
    for (std::size_t i = 0; i < out.size(); ++i) {
        T v;
        std::memcpy(&v, bytes.data() + i * sizeof(T), sizeof(T));
        out[i] = static_cast<double>(v);
    }
    return out;
}

std::vector<double> decode_by_dtype(const std::string& dtype, const std::vector<char>& bytes) {
    if (dtype == "u8") return decode_payload<std::uint8_t>(bytes);
    if (dtype == "i16") return decode_payload<std::int16_t>(bytes);
    if (dtype == "f32") return decode_payload<float>(bytes);
    return decode_payload<double>(bytes);
}

} // namespace

Volume load_volume(const std::string& path, const std::string& modality_hint) {
    if (is_nifti_path(path)) {
        Volume v = load_nifti(path);
        v.modality = !modality_hint.empty() ? modality_hint : nifti_modality_from_filename(path);
        if (v.modality.empty())
            throw data_error("cannot determine modality for '" + path +
                             "' (use a _T1/_T1C/_T2/_FLAIR filename suffix)");
        validate_volume(v);
        return v;
    }
    const SidecarPaths sp = sidecar_paths(path);
    const SidecarHeader h = read_sidecar(sp.json_path);
    const std::vector<char> bytes = read_raw(sp.raw_path);
    const std::size_t expect = h.dims.count() * dtype_size(h.dtype);
    if (bytes.size() != expect)
        throw io_error("size mismatch in '" + sp.raw_path.string() + "': sidecar declares " +
                       std::to_string(h.dims.count()) + " voxels (" + std::to_string(expect) +
                       " bytes), payload has " + std::to_string(bytes.size()) + " bytes");
    Volume v;
    v.dims = h.dims;
    v.spacing = h.spacing;
    v.modality = !modality_hint.empty() ? modality_hint : h.modality;
    v.voxels = decode_by_dtype(h.dtype, bytes);
    validate_volume(v);
    return v;
}

Mask load_mask(const std::string& path) {
    if (is_nifti_path(path)) {
        Mask m = load_nifti_mask(path);
        validate_mask(m);
        return m;
    }
    const SidecarPaths sp = sidecar_paths(path);
    const SidecarHeader h = read_sidecar(sp.json_path);
    const std::vector<char> bytes = read_raw(sp.raw_path);
    const std::size_t expect = h.dims.count() * dtype_size(h.dtype);
    if (bytes.size() != expect)
        throw io_error("size mismatch in '" + sp.raw_path.string() + "': expected " +
                       std::to_string(expect) + " bytes, got " + std::to_string(bytes.size()));
    const std::vector<double> values = decode_by_dtype(h.dtype, bytes);
    Mask m;
    m.dims = h.dims;
    m.spacing = h.spacing;
    m.labels.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (!(v == 0.0 || v == 1.0 || v == 2.0 || v == 4.0))
            throw data_error("mask value " + std::to_string(v) + " at voxel index " +
                             std::to_string(i) + " is not one of {0,1,2,4}");
        m.labels[i] = static_cast<std::uint8_t>(v);
    }
    validate_mask(m);
    return m;
}

void save_volume(const Volume& v, const std::string& path, const std::string& transform_tag) {
    validate_volume(v);
    const SidecarPaths sp = sidecar_paths(path);
    json j;
    j["dims"] = {v.dims.nx, v.dims.ny, v.dims.nz};
    j["spacing"] = {v.spacing.sx, v.spacing.sy, v.spacing.sz};
    j["dtype"] = "f64";
    j["modality"] = v.modality;
    if (!transform_tag.empty()) j["transform"] = transform_tag;
    std::ofstream jo(sp.json_path);
    if (!jo) throw io_error("cannot write sidecar '" + sp.json_path.string() + "'");
    jo << j.dump(2) << "\n";
    std::ofstream ro(sp.raw_path, std::ios::binary);
    if (!ro) throw io_error("cannot write raw payload '" + sp.raw_path.string() + "'");
    ro.write(reinterpret_cast<const char*>(v.voxels.data()),
             static_cast<std::streamsize>(v.voxels.size() * sizeof(double)));
}

void save_mask(const Mask& m, const std::string& path) {
    validate_mask(m);
    const SidecarPaths sp = sidecar_paths(path);
    json j;
    j["dims"] = {m.dims.nx, m.dims.ny, m.dims.nz};
    j["spacing"] = {m.spacing.sx, m.spacing.sy, m.spacing.sz};
    j["dtype"] = "u8";
    std::ofstream jo(sp.json_path);
    if (!jo) throw io_error("cannot write sidecar '" + sp.json_path.string() + "'");
    jo << j.dump(2) << "\n";
    std::ofstream ro(sp.raw_path, std::ios::binary);
    if (!ro) throw io_error("cannot write raw payload '" + sp.raw_path.string() + "'");
    ro.write(reinterpret_cast<const char*>(m.labels.data()),
             static_cast<std::streamsize>(m.labels.size()));
}

bool region_label_matches(std::uint8_t label, Region region) {
    switch (region) {
        case Region::WT: return label == 1 || label == 2 || label == 4;
        case Region::ET: return label == 4;
        case Region::ED: return label == 2;
        case Region::NCR: return label == 1;
    }
    return false;
}

RegionVoxels extract_region(const Volume& volume, const Mask& mask, Region region) {
    if (!(volume.dims == mask.dims))
        throw data_error("volume dims do not match mask dims");
    RegionVoxels out;
    out.region = region;
    std::size_t idx = 0;
    for (int z = 0; z < volume.dims.nz; ++z)
        for (int y = 0; y < volume.dims.ny; ++y)
            for (int x = 0; x < volume.dims.nx; ++x, ++idx)
                if (region_label_matches(mask.labels[idx], region)) {
                    out.coords.push_back({x, y, z});
                    out.values.push_back(volume.voxels[idx]);
                }
    if (out.coords.empty())
        throw data_error(std::string("empty region ") + region_name(region));
    return out;
}

QuantizedRegion quantize(const RegionVoxels& region, int ng) {
    if (region.values.empty()) throw data_error("quantize: empty region");
    if (ng < 2) throw data_error("quantize: ng must be >= 2");
    const auto [mn_it, mx_it] = std::minmax_element(region.values.begin(), region.values.end());
    const double vmin = *mn_it, vmax = *mx_it;
    QuantizedRegion q;
    q.coords = region.coords;
    q.ng = ng;
    q.region = region.region;
    q.levels.resize(region.values.size());
    if (vmax == vmin) {
        std::fill(q.levels.begin(), q.levels.end(), 1);
        return q;
    }
    const double range = vmax - vmin;
    for (std::size_t i = 0; i < region.values.size(); ++i) {
        const int level =
            1 + static_cast<int>(std::floor(ng * (region.values[i] - vmin) / range));
        q.levels[i] = std::min(ng, level);
    }
    return q;
}

} // namespace radiomics
