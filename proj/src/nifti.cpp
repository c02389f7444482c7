#include "radiomics/nifti.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <vector>

#include "radiomics/errors.hpp"

namespace radiomics {

namespace {

constexpr int kHeaderSize = 348;
constexpr int kDtypeInt16 = 4;
constexpr int kDtypeFloat32 = 16;
constexpr int kDtypeFloat64 = 64;

template <typename T>
T read_le(const unsigned char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

std::vector<unsigned char> read_all_gz(const std::string& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw io_error("cannot open NIfTI file '" + path + "'");
    std::vector<unsigned char> data;
    unsigned char buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof(buf))) > 0)
        data.insert(data.end(), buf, buf + n);
    const bool bad = n < 0;
    gzclose(f);
    if (bad) throw io_error("decompression error reading '" + path + "'");
    return data;
}

struct NiftiImage {
    Dims dims;
    Spacing spacing;
    std::vector<double> values;
};

NiftiImage parse_nifti(const std::string& path) {
    const std::vector<unsigned char> data = read_all_gz(path);
    if (data.size() < kHeaderSize)
        throw io_error("malformed header: '" + path + "' is shorter than 348 bytes");
    const unsigned char* h = data.data();

    if (std::memcmp(h + 344, "n+1\0", 4) != 0)
        throw io_error("malformed header: missing NIfTI-1 magic \"n+1\" in '" + path + "'");

    const std::int16_t ndim = read_le<std::int16_t>(h + 40);
    if (ndim < 1 || ndim > 7)
        throw io_error("unsupported NIfTI file '" + path +
                       "' (dim[0] out of range; big-endian files are not supported)");
    int nx = read_le<std::int16_t>(h + 42);
    int ny = ndim >= 2 ? read_le<std::int16_t>(h + 44) : 1;
    int nz = ndim >= 3 ? read_le<std::int16_t>(h + 46) : 1;
    for (int d = 4; d <= ndim; ++d) {
        const std::int16_t extra = read_le<std::int16_t>(h + 40 + 2 * d);
        if (extra > 1)
            throw io_error("unsupported NIfTI file '" + path + "': more than 3 dimensions");
    }
    if (nx < 1 || ny < 1 || nz < 1)
        throw io_error("malformed header: non-positive dimensions in '" + path + "'");

    const std::int16_t datatype = read_le<std::int16_t>(h + 70);
    const float pdx = read_le<float>(h + 80);
    const float pdy = read_le<float>(h + 84);
    const float pdz = read_le<float>(h + 88);
    const float vox_offset = read_le<float>(h + 108);
    float scl_slope = read_le<float>(h + 112);
    const float scl_inter = read_le<float>(h + 116);
    if (scl_slope == 0.0f) scl_slope = 1.0f;

    std::size_t elem_size;
    switch (datatype) {
        case kDtypeInt16: elem_size = 2; break;
        case kDtypeFloat32: elem_size = 4; break;
        case kDtypeFloat64: elem_size = 8; break;
        default:
            throw io_error("unsupported NIfTI datatype code " + std::to_string(datatype) +
                           " in '" + path + "' (supported: int16, float32, float64)");
    }

    const std::size_t count =
        static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    const std::size_t offset = static_cast<std::size_t>(vox_offset);
    if (vox_offset < kHeaderSize || offset + count * elem_size > data.size())
        throw io_error("size mismatch in '" + path + "': header declares " + std::to_string(count) +
                       " voxels beyond the end of the file");

    NiftiImage img;
    img.dims = {nx, ny, nz};
    img.spacing = {pdx > 0 ? pdx : 1.0, pdy > 0 ? pdy : 1.0, pdz > 0 ? pdz : 1.0};
    img.values.resize(count);
    const unsigned char* p = data.data() + offset;
    for (std::size_t i = 0; i < count; ++i) {
        double raw;
        switch (datatype) {
            case kDtypeInt16: raw = read_le<std::int16_t>(p + 2 * i); break;
            case kDtypeFloat32: raw = read_le<float>(p + 4 * i); break;
            default: raw = read_le<double>(p + 8 * i); break;
        }
        const double v = double(scl_slope) * raw + double(scl_inter);
        if (!std::isfinite(v))
            throw data_error("non-finite intensity at voxel index " + std::to_string(i) +
                             " in '" + path + "'");
        img.values[i] = v;
    }
    return img;
}

} // namespace

Volume load_nifti(const std::string& path) {
    NiftiImage img = parse_nifti(path);
    Volume v;
    v.dims = img.dims;
    v.spacing = img.spacing;
    v.voxels = std::move(img.values);
    return v;
}

Mask load_nifti_mask(const std::string& path) {
    NiftiImage img = parse_nifti(path);
    Mask m;
    m.dims = img.dims;
    m.spacing = img.spacing;
    m.labels.resize(img.values.size());
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        const double v = img.values[i];
        if (!(v == 0.0 || v == 1.0 || v == 2.0 || v == 4.0))
            throw data_error("mask value " + std::to_string(v) + " at voxel index " +
                             std::to_string(i) + " is not one of {0,1,2,4}");
        m.labels[i] = static_cast<std::uint8_t>(v);
    }
    return m;
}

std::string nifti_modality_from_filename(const std::string& path) {
    std::string stem = std::filesystem::path(path).filename().string();
    // strip .nii / .nii.gz
    if (stem.ends_with(".gz")) stem.resize(stem.size() - 3);
    if (stem.ends_with(".nii")) stem.resize(stem.size() - 4);
    for (const char* mod : {"T1C", "FLAIR", "T2", "T1"}) {
        const std::string suffix = std::string("_") + mod;
        if (stem.size() >= suffix.size() &&
            stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0)
            return mod;
    }
    return "";
}

} // namespace radiomics
