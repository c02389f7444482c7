#include "radiomics/fractal.hpp"

#include <algorithm>
#include <cmath>

#include "radiomics/errors.hpp"
#include "radiomics/math_utils.hpp"
#include "radiomics/parallel.hpp"

namespace radiomics {

namespace {

constexpr double kHolderEps = 1e-12;

VoxelBox full_box(const Volume& v) {
    return {0, 0, 0, v.dims.nx - 1, v.dims.ny - 1, v.dims.nz - 1};
}

void check_window(const FractalOptions& opt) {
    if (opt.window < 5 || opt.window % 2 == 0)
        throw data_error("fractal window must be odd and >= 5");
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Area of the 3D triangle (a, b, c) via the cross product.
double triangle_area(double ax, double ay, double az, double bx, double by, double bz,
                     double cx, double cy, double cz) {
    const double ux = bx - ax, uy = by - ay, uz = bz - az;
    const double vx = cx - ax, vy = cy - ay, vz = cz - az;
    const double px = uy * vz - uz * vy;
    const double py = uz * vx - ux * vz;
    const double pz = ux * vy - uy * vx;
    return 0.5 * std::sqrt(px * px + py * py + pz * pz);
}

TransformedVolume make_output(const Volume& src, TransformKind kind) {
    TransformedVolume out;
    out.kind = kind;
    out.values.dims = src.dims;
    out.values.spacing = src.spacing;
    out.values.modality = src.modality;
    out.values.voxels.assign(src.dims.count(), 0.0);
    return out;
}

} // namespace

const char* transform_name(TransformKind k) {
    switch (k) {
        case TransformKind::Ptpsa: return "ptpsa";
        case TransformKind::Mbm: return "mbm";
        case TransformKind::Holder: return "holder";
    }
    return "?";
}

TransformedVolume ptpsa_transform_roi(const Volume& volume, const FractalOptions& opt,
                                      const VoxelBox& roi) {
    check_window(opt);
    if (opt.ptpsa_scales.size() < 2)
        throw data_error("ptpsa needs at least 2 scales (slope undefined otherwise)");
    for (std::size_t i = 0; i < opt.ptpsa_scales.size(); ++i) {
        if (opt.ptpsa_scales[i] < 1 || opt.ptpsa_scales[i] > opt.window - 1)
            throw data_error("ptpsa scales must lie in [1, window-1]");
        if (i > 0 && opt.ptpsa_scales[i] <= opt.ptpsa_scales[i - 1])
            throw data_error("ptpsa scales must be strictly increasing");
    }
    if (volume.dims.nx < opt.window || volume.dims.ny < opt.window)
        throw data_error("volume in-plane dims must be >= window for ptpsa");

    TransformedVolume out = make_output(volume, TransformKind::Ptpsa);
    const int half = opt.window / 2;
    const int w = opt.window;
    std::vector<double> log_s(opt.ptpsa_scales.size());
    for (std::size_t i = 0; i < log_s.size(); ++i)
        log_s[i] = std::log(static_cast<double>(opt.ptpsa_scales[i]));

    const std::size_t nz_roi = static_cast<std::size_t>(roi.z1 - roi.z0 + 1);
    parallel_for(nz_roi, opt.threads, [&](std::size_t zi) {
        const int z = roi.z0 + static_cast<int>(zi);
        std::vector<double> win(static_cast<std::size_t>(w) * w);
        std::vector<double> log_a(opt.ptpsa_scales.size());
        for (int y = roi.y0; y <= roi.y1; ++y) {
            for (int x = roi.x0; x <= roi.x1; ++x) {
                for (int wy = 0; wy < w; ++wy)
                    for (int wx = 0; wx < w; ++wx)
                        win[static_cast<std::size_t>(wy) * w + wx] =
                            volume.at_clamped(x - half + wx, y - half + wy, z);
                for (std::size_t si = 0; si < opt.ptpsa_scales.size(); ++si) {
                    const int s = opt.ptpsa_scales[si];
                    const int cells = (w - 1) / s;
                    double area = 0.0;
                    for (int cy = 0; cy < cells; ++cy) {
                        for (int cx = 0; cx < cells; ++cx) {
                            const int x0 = cx * s, y0 = cy * s;
                            const double c00 = win[static_cast<std::size_t>(y0) * w + x0];
                            const double c10 = win[static_cast<std::size_t>(y0) * w + x0 + s];
                            const double c01 = win[static_cast<std::size_t>(y0 + s) * w + x0];
                            const double c11 = win[static_cast<std::size_t>(y0 + s) * w + x0 + s];
                            const double cm = 0.25 * (c00 + c10 + c01 + c11);
                            const double xm = x0 + 0.5 * s, ym = y0 + 0.5 * s;
                            area += triangle_area(x0, y0, c00, x0 + s, y0, c10, xm, ym, cm);
                            area += triangle_area(x0 + s, y0, c10, x0 + s, y0 + s, c11, xm, ym, cm);
                            area += triangle_area(x0 + s, y0 + s, c11, x0, y0 + s, c01, xm, ym, cm);
                            area += triangle_area(x0, y0 + s, c01, x0, y0, c00, xm, ym, cm);
                        }
                    }
                    log_a[si] = std::log(area);
                }
                const double slope = least_squares_slope(log_s, log_a);
                out.values.at(x, y, z) = std::clamp(2.0 - slope, 2.0, 3.0);
            }
        }
    });
    return out;
}

TransformedVolume mbm_transform_roi(const Volume& volume, const FractalOptions& opt,
                                    const VoxelBox& roi) {
    if (opt.mbm_max_lag < 2) throw data_error("mbm max_lag must be >= 2");
    if (opt.window < 2 * opt.mbm_max_lag + 1)
        throw data_error("mbm window must be >= 2*max_lag + 1");
    if (opt.window % 2 == 0) throw data_error("fractal window must be odd");

    TransformedVolume out = make_output(volume, TransformKind::Mbm);
    const int half = opt.window / 2;
    const int w = opt.window;
    const int hmax = opt.mbm_max_lag;

    const std::size_t nz_roi = static_cast<std::size_t>(roi.z1 - roi.z0 + 1);
    parallel_for(nz_roi, opt.threads, [&](std::size_t zi) {
        const int z = roi.z0 + static_cast<int>(zi);
        std::vector<double> win(static_cast<std::size_t>(w) * w * w);
        std::vector<double> g(hmax), cnt(hmax);
        std::vector<double> lx, ly;
        for (int y = roi.y0; y <= roi.y1; ++y) {
            for (int x = roi.x0; x <= roi.x1; ++x) {
                for (int wz = 0; wz < w; ++wz)
                    for (int wy = 0; wy < w; ++wy)
                        for (int wx = 0; wx < w; ++wx)
                            win[(static_cast<std::size_t>(wz) * w + wy) * w + wx] =
                                volume.at_clamped(x - half + wx, y - half + wy, z - half + wz);
                // squared increments pooled over the three axes
                for (int h = 1; h <= hmax; ++h) {
                    double acc = 0.0;
                    double n = 0.0;
                    for (int a = 0; a < w; ++a) {
                        for (int b = 0; b < w; ++b) {
                            for (int p = 0; p + h < w; ++p) {
                                const double dx =
                                    win[(static_cast<std::size_t>(a) * w + b) * w + p + h] -
                                    win[(static_cast<std::size_t>(a) * w + b) * w + p];
                                const double dy =
                                    win[(static_cast<std::size_t>(a) * w + p + h) * w + b] -
                                    win[(static_cast<std::size_t>(a) * w + p) * w + b];
                                const double dz =
                                    win[(static_cast<std::size_t>(p + h) * w + a) * w + b] -
                                    win[(static_cast<std::size_t>(p) * w + a) * w + b];
                                acc += dx * dx + dy * dy + dz * dz;
                                n += 3.0;
                            }
                        }
                    }
                    g[h - 1] = acc;
                    cnt[h - 1] = n;
                }
                lx.clear();
                ly.clear();
                for (int h = 1; h <= hmax; ++h) {
                    if (g[h - 1] > 0.0) {
                        lx.push_back(std::log(static_cast<double>(h)));
                        ly.push_back(std::log(g[h - 1] / cnt[h - 1]));
                    }
                }
                double hurst;
                if (lx.empty()) {
                    hurst = 1.0;  // flat window: smoothest
                } else if (lx.size() == 1) {
                    hurst = 0.0;  // oscillation with no scaling structure
                } else {
                    hurst = clamp01(0.5 * least_squares_slope(lx, ly));
                }
                out.values.at(x, y, z) = hurst;
            }
        }
    });
    return out;
}

TransformedVolume holder_transform_roi(const Volume& volume, const FractalOptions& opt,
                                       const VoxelBox& roi) {
    if (opt.holder_radii.size() < 2) throw data_error("holder needs at least 2 radii");
    for (std::size_t i = 0; i < opt.holder_radii.size(); ++i) {
        if (opt.holder_radii[i] < 1) throw data_error("holder radii must be >= 1");
        if (i > 0 && opt.holder_radii[i] <= opt.holder_radii[i - 1])
            throw data_error("holder radii must be strictly increasing");
    }

    TransformedVolume out = make_output(volume, TransformKind::Holder);
    std::vector<double> log_r(opt.holder_radii.size());
    for (std::size_t i = 0; i < log_r.size(); ++i)
        log_r[i] = std::log(static_cast<double>(opt.holder_radii[i]));

    const std::size_t nz_roi = static_cast<std::size_t>(roi.z1 - roi.z0 + 1);
    parallel_for(nz_roi, opt.threads, [&](std::size_t zi) {
        const int z = roi.z0 + static_cast<int>(zi);
        std::vector<double> log_osc(opt.holder_radii.size());
        for (int y = roi.y0; y <= roi.y1; ++y) {
            for (int x = roi.x0; x <= roi.x1; ++x) {
                for (std::size_t ri = 0; ri < opt.holder_radii.size(); ++ri) {
                    const int r = opt.holder_radii[ri];
                    double mn = volume.at_clamped(x, y, z);
                    double mx = mn;
                    for (int dz = -r; dz <= r; ++dz)
                        for (int dy = -r; dy <= r; ++dy)
                            for (int dx = -r; dx <= r; ++dx) {
                                const double v = volume.at_clamped(x + dx, y + dy, z + dz);
                                mn = std::min(mn, v);
                                mx = std::max(mx, v);
                            }
                    log_osc[ri] = std::log(mx - mn + kHolderEps);
                }
                out.values.at(x, y, z) = clamp01(least_squares_slope(log_r, log_osc));
            }
        }
    });
    return out;
}

TransformedVolume ptpsa_transform(const Volume& volume, const FractalOptions& opt) {
    return ptpsa_transform_roi(volume, opt, full_box(volume));
}
TransformedVolume mbm_transform(const Volume& volume, const FractalOptions& opt) {
    return mbm_transform_roi(volume, opt, full_box(volume));
}
TransformedVolume holder_transform(const Volume& volume, const FractalOptions& opt) {
    return holder_transform_roi(volume, opt, full_box(volume));
}

} // namespace radiomics
