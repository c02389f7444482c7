#include "radiomics/features.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

#include "radiomics/errors.hpp"
#include "radiomics/math_utils.hpp"

namespace radiomics {

namespace {

constexpr double kLog2 = 0.69314718055994530941723212145818;
constexpr int kHistogramBins = 32;
constexpr double kNgtdmEps = 1e-12;

double log2_safe(double p) { return std::log(p) / kLog2; }

// 0*log(0) := 0
double plogp(double p) { return p > 0.0 ? p * log2_safe(p) : 0.0; }

const std::array<const char*, 10> kHistogramStats = {
    "energy", "entropy", "kurtosis", "max", "mean", "median", "min", "range", "skewness",
    "variance"};

const std::array<const char*, 16> kGtsdmNames = {
    "AngularSecondMoment", "ClusterProminence", "ClusterShade", "Contrast", "Correlation",
    "DifferenceEntropy", "DifferenceVariance", "Entropy", "InformationCorrelation1",
    "InformationCorrelation2", "InverseDifference", "InverseDifferenceMoment", "SumAverage",
    "SumEntropy", "SumVariance", "Variance"};

const std::array<const char*, 11> kGlzsmNames = {
    "GrayLevelNonUniformity", "HighGrayZoneEmphasis", "LargeZoneHighGrayEmphasis",
    "LargeZoneLowGrayEmphasis", "LargeZoneSizeEmphasis", "LowGrayZoneEmphasis",
    "SmallZoneEmphasis", "SmallZoneHighGrayEmphasis", "SmallZoneLowGrayEmphasis",
    "ZoneSizeNonUniformity", "ZoneSizePercentage"};

const std::array<const char*, 5> kNgtdmNames = {"Busyness", "Coarseness", "Complexity",
                                                "Contrast", "Strength"};

const std::array<const char*, 7> kVolumetricNames = {
    "ratio_ED_WT", "ratio_ET_WT", "ratio_NCR_WT", "vol_ED", "vol_ET", "vol_NCR", "vol_WT"};

const std::array<const char*, 9> kSpatialNames = {
    "area", "centroid_offset", "eccentricity", "extent", "major_axis_length",
    "minor_axis_length", "orientation", "perimeter", "solidity"};

const std::array<const char*, 4> kModalities = {"FLAIR", "T1", "T1C", "T2"};
const std::array<const char*, 3> kTransforms = {"holder", "mbm", "ptpsa"};
const std::array<Region, 4> kHistogramRegions = {Region::ED, Region::ET, Region::NCR, Region::WT};

// Dense lookup grid over the region's bounding box; 0 means not in region.
struct RegionGrid {
    int x0, y0, z0;
    int nx, ny, nz;
    std::vector<int> level;

    int at(int x, int y, int z) const {
        if (x < x0 || y < y0 || z < z0 || x >= x0 + nx || y >= y0 + ny || z >= z0 + nz) return 0;
        return level[static_cast<std::size_t>(x - x0) +
                     static_cast<std::size_t>(nx) *
                         (static_cast<std::size_t>(y - y0) +
                          static_cast<std::size_t>(ny) * static_cast<std::size_t>(z - z0))];
    }
};

RegionGrid build_grid(const QuantizedRegion& q) {
    RegionGrid g;
    g.x0 = g.y0 = g.z0 = 0;
    if (q.coords.empty()) throw data_error("empty quantized region");
    int x1 = q.coords[0].x, y1 = q.coords[0].y, z1 = q.coords[0].z;
    g.x0 = x1;
    g.y0 = y1;
    g.z0 = z1;
    for (const Coord& c : q.coords) {
        g.x0 = std::min(g.x0, c.x);
        g.y0 = std::min(g.y0, c.y);
        g.z0 = std::min(g.z0, c.z);
        x1 = std::max(x1, c.x);
        y1 = std::max(y1, c.y);
        z1 = std::max(z1, c.z);
    }
    g.nx = x1 - g.x0 + 1;
    g.ny = y1 - g.y0 + 1;
    g.nz = z1 - g.z0 + 1;
    g.level.assign(static_cast<std::size_t>(g.nx) * g.ny * g.nz, 0);
    for (std::size_t i = 0; i < q.coords.size(); ++i) {
        const Coord& c = q.coords[i];
        g.level[static_cast<std::size_t>(c.x - g.x0) +
                static_cast<std::size_t>(g.nx) *
                    (static_cast<std::size_t>(c.y - g.y0) +
                     static_cast<std::size_t>(g.ny) * static_cast<std::size_t>(c.z - g.z0))] =
            q.levels[i];
    }
    return g;
}

} // namespace

const std::vector<Coord>& gtsdm_offsets13() {
    static const std::vector<Coord> kOffsets = {
        {1, 0, 0}, {0, 1, 0},  {0, 0, 1},  {1, 1, 0},  {1, -1, 0},  {1, 0, 1},   {1, 0, -1},
        {0, 1, 1}, {0, 1, -1}, {1, 1, 1},  {1, 1, -1}, {1, -1, 1},  {-1, 1, 1}};
    return kOffsets;
}

std::map<std::string, double> histogram_features(const std::vector<double>& values) {
    if (values.empty()) throw data_error("histogram_features: empty region");
    const std::size_t n = values.size();
    const double m = mean(values);
    const double var = variance_population(values);

    double mn = values[0], mx = values[0];
    for (double v : values) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }

    double m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - m;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    // 0/0 := 0 for the standardized moments of a constant region
    const double skew = var > 0.0 ? m3 / std::pow(var, 1.5) : 0.0;
    const double kurt = var > 0.0 ? m4 / (var * var) : 0.0;

    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    const double median = n % 2 == 1 ? sorted[n / 2]
                                     : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    // entropy/energy over 32 equal-width bins spanning the region range
    std::array<double, kHistogramBins> bins{};
    if (mx > mn) {
        for (double v : values) {
            int b = static_cast<int>(std::floor(kHistogramBins * (v - mn) / (mx - mn)));
            b = std::min(b, kHistogramBins - 1);
            bins[static_cast<std::size_t>(b)] += 1.0;
        }
    } else {
        bins[0] = static_cast<double>(n);
    }
    double entropy = 0.0, energy = 0.0;
    for (double c : bins) {
        const double p = c / static_cast<double>(n);
        entropy -= plogp(p);
        energy += p * p;
    }

    return {{"energy", energy},  {"entropy", entropy}, {"kurtosis", kurt}, {"max", mx},
            {"mean", m},         {"median", median},   {"min", mn},        {"range", mx - mn},
            {"skewness", skew},  {"variance", var}};
}

CooccurrenceMatrix gtsdm_matrix(const QuantizedRegion& q, const std::vector<Coord>& offsets) {
    if (q.coords.empty()) throw data_error("gtsdm: empty region");
    if (offsets.empty()) throw data_error("gtsdm: empty offset set");
    const RegionGrid grid = build_grid(q);
    CooccurrenceMatrix mat;
    mat.ng = q.ng;
    mat.offsets = offsets;
    mat.p.assign(static_cast<std::size_t>(q.ng) * q.ng, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < q.coords.size(); ++i) {
        const Coord& c = q.coords[i];
        const int li = q.levels[i];
        for (const Coord& d : offsets) {
            const int lj = grid.at(c.x + d.x, c.y + d.y, c.z + d.z);
            if (lj == 0) continue;
            mat.p[static_cast<std::size_t>(li - 1) * q.ng + (lj - 1)] += 1.0;
            mat.p[static_cast<std::size_t>(lj - 1) * q.ng + (li - 1)] += 1.0;
            total += 2.0;
        }
    }
    if (total == 0.0) throw data_error("no co-occurrence pairs");
    for (double& v : mat.p) v /= total;
    return mat;
}

std::map<std::string, double> gtsdm_features(const QuantizedRegion& q,
                                             const std::vector<Coord>& offsets) {
    const CooccurrenceMatrix mat = gtsdm_matrix(q, offsets);
    const int ng = mat.ng;

    std::vector<double> px(ng, 0.0), py(ng, 0.0);
    std::vector<double> psum(2 * ng + 1, 0.0);   // p_{x+y}(k), k = 2..2*ng
    std::vector<double> pdiff(ng, 0.0);          // p_{x-y}(k), k = 0..ng-1
    for (int i = 1; i <= ng; ++i) {
        for (int j = 1; j <= ng; ++j) {
            const double p = mat.at(i, j);
            px[i - 1] += p;
            py[j - 1] += p;
            psum[static_cast<std::size_t>(i + j)] += p;
            pdiff[static_cast<std::size_t>(std::abs(i - j))] += p;
        }
    }

    double mu_x = 0.0, mu_y = 0.0;
    for (int i = 1; i <= ng; ++i) {
        mu_x += i * px[i - 1];
        mu_y += i * py[i - 1];
    }
    double sig_x = 0.0, sig_y = 0.0, hx = 0.0, hy = 0.0;
    for (int i = 1; i <= ng; ++i) {
        sig_x += (i - mu_x) * (i - mu_x) * px[i - 1];
        sig_y += (i - mu_y) * (i - mu_y) * py[i - 1];
        hx -= plogp(px[i - 1]);
        hy -= plogp(py[i - 1]);
    }
    sig_x = std::sqrt(sig_x);
    sig_y = std::sqrt(sig_y);

    double asm_ = 0.0, contrast = 0.0, corr_num = 0.0, variance = 0.0, inv_diff = 0.0,
           idm = 0.0, entropy = 0.0, shade = 0.0, prominence = 0.0, hxy1 = 0.0, hxy2 = 0.0;
    for (int i = 1; i <= ng; ++i) {
        for (int j = 1; j <= ng; ++j) {
            const double p = mat.at(i, j);
            asm_ += p * p;
            contrast += (i - j) * (i - j) * p;
            corr_num += i * j * p;
            variance += (i - mu_x) * (i - mu_x) * p;
            inv_diff += p / (1.0 + std::abs(i - j));
            idm += p / (1.0 + (i - j) * (i - j));
            entropy -= plogp(p);
            const double dev = i + j - mu_x - mu_y;
            shade += dev * dev * dev * p;
            prominence += dev * dev * dev * dev * p;
            const double pp = px[i - 1] * py[j - 1];
            if (pp > 0.0 && p > 0.0) hxy1 -= p * log2_safe(pp);
            hxy2 -= plogp(pp);
        }
    }
    const double correlation =
        (sig_x > 0.0 && sig_y > 0.0) ? (corr_num - mu_x * mu_y) / (sig_x * sig_y) : 0.0;

    double sum_avg = 0.0, sum_entropy = 0.0;
    for (int k = 2; k <= 2 * ng; ++k) {
        sum_avg += k * psum[static_cast<std::size_t>(k)];
        sum_entropy -= plogp(psum[static_cast<std::size_t>(k)]);
    }
    double sum_var = 0.0;
    for (int k = 2; k <= 2 * ng; ++k)
        sum_var += (k - sum_avg) * (k - sum_avg) * psum[static_cast<std::size_t>(k)];

    double mu_d = 0.0, diff_entropy = 0.0;
    for (int k = 0; k < ng; ++k) {
        mu_d += k * pdiff[static_cast<std::size_t>(k)];
        diff_entropy -= plogp(pdiff[static_cast<std::size_t>(k)]);
    }
    double diff_var = 0.0;
    for (int k = 0; k < ng; ++k)
        diff_var += (k - mu_d) * (k - mu_d) * pdiff[static_cast<std::size_t>(k)];

    const double hmax = std::max(hx, hy);
    const double ic1 = hmax > 0.0 ? (entropy - hxy1) / hmax : 0.0;
    const double ic2 = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - entropy))));

    return {{"AngularSecondMoment", asm_},
            {"ClusterProminence", prominence},
            {"ClusterShade", shade},
            {"Contrast", contrast},
            {"Correlation", correlation},
            {"DifferenceEntropy", diff_entropy},
            {"DifferenceVariance", diff_var},
            {"Entropy", entropy},
            {"InformationCorrelation1", ic1},
            {"InformationCorrelation2", ic2},
            {"InverseDifference", inv_diff},
            {"InverseDifferenceMoment", idm},
            {"SumAverage", sum_avg},
            {"SumEntropy", sum_entropy},
            {"SumVariance", sum_var},
            {"Variance", variance}};
}

GlzsmZones glzsm_zones(const QuantizedRegion& q) {
    if (q.coords.empty()) throw data_error("glzsm: empty region");
    const RegionGrid grid = build_grid(q);
    std::vector<char> visited(grid.level.size(), 0);
    GlzsmZones out;

    auto flat = [&](int x, int y, int z) {
        return static_cast<std::size_t>(x - grid.x0) +
               static_cast<std::size_t>(grid.nx) *
                   (static_cast<std::size_t>(y - grid.y0) +
                    static_cast<std::size_t>(grid.ny) * static_cast<std::size_t>(z - grid.z0));
    };

    for (const Coord& start : q.coords) {
        const std::size_t f0 = flat(start.x, start.y, start.z);
        if (visited[f0]) continue;
        const int level = grid.at(start.x, start.y, start.z);
        int size = 0;
        std::deque<Coord> queue{start};
        visited[f0] = 1;
        while (!queue.empty()) {
            const Coord c = queue.front();
            queue.pop_front();
            ++size;
            for (int dz = -1; dz <= 1; ++dz)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0 && dz == 0) continue;
                        const int nx = c.x + dx, ny = c.y + dy, nz = c.z + dz;
                        if (grid.at(nx, ny, nz) != level) continue;
                        const std::size_t f = flat(nx, ny, nz);
                        if (visited[f]) continue;
                        visited[f] = 1;
                        queue.push_back({nx, ny, nz});
                    }
        }
        out.zones.emplace_back(level, size);
    }
    return out;
}

std::map<std::string, double> glzsm_features(const QuantizedRegion& q) {
    const GlzsmZones zones = glzsm_zones(q);
    const double nz = static_cast<double>(zones.zones.size());
    const double np = static_cast<double>(q.coords.size());

    std::map<int, double> per_level;   // zone count per gray level
    std::map<int, double> per_size;    // zone count per zone size
    double sze = 0.0, lze = 0.0, lgze = 0.0, hgze = 0.0;
    double lzlge = 0.0, lzhge = 0.0, szlge = 0.0, szhge = 0.0;
    for (const auto& [g, s] : zones.zones) {
        const double gg = static_cast<double>(g) * g;
        const double ss = static_cast<double>(s) * s;
        per_level[g] += 1.0;
        per_size[s] += 1.0;
        sze += 1.0 / ss;
        lze += ss;
        lgze += 1.0 / gg;
        hgze += gg;
        lzlge += ss / gg;
        lzhge += ss * gg;
        szlge += 1.0 / (ss * gg);
        szhge += gg / ss;
    }
    double gln = 0.0, zsn = 0.0;
    for (const auto& [g, c] : per_level) gln += c * c;
    for (const auto& [s, c] : per_size) zsn += c * c;

    return {{"GrayLevelNonUniformity", gln / nz},
            {"HighGrayZoneEmphasis", hgze / nz},
            {"LargeZoneHighGrayEmphasis", lzhge / nz},
            {"LargeZoneLowGrayEmphasis", lzlge / nz},
            {"LargeZoneSizeEmphasis", lze / nz},
            {"LowGrayZoneEmphasis", lgze / nz},
            {"SmallZoneEmphasis", sze / nz},
            {"SmallZoneHighGrayEmphasis", szhge / nz},
            {"SmallZoneLowGrayEmphasis", szlge / nz},
            {"ZoneSizeNonUniformity", zsn / nz},
            {"ZoneSizePercentage", nz / np}};
}

std::map<std::string, double> ngtdm_features(const QuantizedRegion& q) {
    if (q.coords.empty()) throw data_error("ngtdm: empty region");
    const RegionGrid grid = build_grid(q);

    // s(g) = sum of |g - neighborhood average| over valid voxels of level g;
    // voxels with no in-region 26-neighbor are skipped.
    std::map<int, double> s_map, n_map;
    double n_valid = 0.0;
    for (std::size_t i = 0; i < q.coords.size(); ++i) {
        const Coord& c = q.coords[i];
        double sum = 0.0;
        int count = 0;
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0 && dz == 0) continue;
                    const int l = grid.at(c.x + dx, c.y + dy, c.z + dz);
                    if (l == 0) continue;
                    sum += l;
                    ++count;
                }
        if (count == 0) continue;
        const int g = q.levels[i];
        s_map[g] += std::abs(g - sum / count);
        n_map[g] += 1.0;
        n_valid += 1.0;
    }
    if (n_valid == 0.0) throw data_error("no valid NGTDM voxels");

    std::vector<int> levels;
    std::vector<double> p, s;
    double s_total = 0.0;
    for (const auto& [g, cnt] : n_map) {
        levels.push_back(g);
        p.push_back(cnt / n_valid);
        s.push_back(s_map[g]);
        s_total += s_map[g];
    }
    const std::size_t ngp = levels.size();

    const double coarseness = 1.0 / (kNgtdmEps + [&] {
        double acc = 0.0;
        for (std::size_t i = 0; i < ngp; ++i) acc += p[i] * s[i];
        return acc;
    }());

    double contrast = 0.0;
    if (ngp > 1) {
        double pair_term = 0.0;
        for (std::size_t i = 0; i < ngp; ++i)
            for (std::size_t j = 0; j < ngp; ++j) {
                const double d = levels[i] - levels[j];
                pair_term += p[i] * p[j] * d * d;
            }
        contrast = pair_term / (static_cast<double>(ngp) * (ngp - 1)) * (s_total / n_valid);
    }

    double busy_den = 0.0, busy_num = 0.0;
    for (std::size_t i = 0; i < ngp; ++i) {
        busy_num += p[i] * s[i];
        for (std::size_t j = 0; j < ngp; ++j)
            if (i != j) busy_den += std::abs(levels[i] * p[i] - levels[j] * p[j]);
    }
    const double busyness = busy_den > 0.0 ? busy_num / busy_den : 0.0;

    double complexity = 0.0, strength = 0.0;
    for (std::size_t i = 0; i < ngp; ++i)
        for (std::size_t j = 0; j < ngp; ++j) {
            if (i == j) continue;
            const double d = std::abs(static_cast<double>(levels[i]) - levels[j]);
            complexity += d * (p[i] * s[i] + p[j] * s[j]) / (n_valid * (p[i] + p[j]));
            strength += (p[i] + p[j]) * d * d;
        }
    strength /= (kNgtdmEps + s_total);

    return {{"Busyness", busyness},
            {"Coarseness", coarseness},
            {"Complexity", complexity},
            {"Contrast", contrast},
            {"Strength", strength}};
}

std::map<std::string, double> volumetric_features(const Mask& mask) {
    std::size_t n_et = 0, n_ed = 0, n_ncr = 0;
    for (std::uint8_t l : mask.labels) {
        if (l == 4) ++n_et;
        else if (l == 2) ++n_ed;
        else if (l == 1) ++n_ncr;
    }
    const std::size_t n_wt = n_et + n_ed + n_ncr;
    if (n_wt == 0) throw data_error("empty region WT");
    const double voxel_mm3 = mask.spacing.sx * mask.spacing.sy * mask.spacing.sz;
    const double wt = static_cast<double>(n_wt);
    return {{"ratio_ED_WT", static_cast<double>(n_ed) / wt},
            {"ratio_ET_WT", static_cast<double>(n_et) / wt},
            {"ratio_NCR_WT", static_cast<double>(n_ncr) / wt},
            {"vol_ED", n_ed * voxel_mm3},
            {"vol_ET", n_et * voxel_mm3},
            {"vol_NCR", n_ncr * voxel_mm3},
            {"vol_WT", n_wt * voxel_mm3}};
}

namespace {

// 2D convex hull (monotone chain) over the corner points of the region's
// pixel squares; returns twice the signed area via the shoelace formula.
double hull_area(const std::vector<std::pair<int, int>>& pixels) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(pixels.size() * 4);
    for (const auto& [u, v] : pixels) {
        pts.emplace_back(u, v);
        pts.emplace_back(u + 1, v);
        pts.emplace_back(u, v + 1);
        pts.emplace_back(u + 1, v + 1);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return 0.0;
    auto cross = [](const std::pair<double, double>& o, const std::pair<double, double>& a,
                    const std::pair<double, double>& b) {
        return (a.first - o.first) * (b.second - o.second) -
               (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<double, double>> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    double area2 = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        area2 += a.first * b.second - b.first * a.second;
    }
    return 0.5 * std::abs(area2);
}

} // namespace

std::map<std::string, double> spatial_features(const Mask& mask, Axis axis) {
    // cross-section with the largest WT area perpendicular to `axis`
    const int n_slices = axis == Axis::X ? mask.dims.nx : axis == Axis::Y ? mask.dims.ny
                                                                          : mask.dims.nz;
    auto wt_at = [&](int x, int y, int z) {
        const std::uint8_t l = mask.at(x, y, z);
        return l == 1 || l == 2 || l == 4;
    };
    auto slice_pixel = [&](int slice, int u, int v) {
        switch (axis) {
            case Axis::X: return wt_at(slice, u, v);
            case Axis::Y: return wt_at(u, slice, v);
            default: return wt_at(u, v, slice);
        }
    };
    const int nu = axis == Axis::X ? mask.dims.ny : mask.dims.nx;
    const int nv = axis == Axis::Z ? mask.dims.ny : mask.dims.nz;

    int best_slice = -1;
    long best_count = 0;
    for (int s = 0; s < n_slices; ++s) {
        long count = 0;
        for (int v = 0; v < nv; ++v)
            for (int u = 0; u < nu; ++u)
                if (slice_pixel(s, u, v)) ++count;
        if (count > best_count) {
            best_count = count;
            best_slice = s;
        }
    }
    if (best_slice < 0) throw data_error("empty region WT");

    std::vector<std::pair<int, int>> pixels;
    for (int v = 0; v < nv; ++v)
        for (int u = 0; u < nu; ++u)
            if (slice_pixel(best_slice, u, v)) pixels.emplace_back(u, v);

    const double area = static_cast<double>(pixels.size());

    double cu = 0.0, cv = 0.0;
    for (const auto& [u, v] : pixels) {
        cu += u;
        cv += v;
    }
    cu /= area;
    cv /= area;
    const double center_u = 0.5 * (nu - 1), center_v = 0.5 * (nv - 1);
    const double centroid_offset = std::hypot(cu - center_u, cv - center_v);

    double perimeter = 0.0;
    for (const auto& [u, v] : pixels) {
        if (u == 0 || !slice_pixel(best_slice, u - 1, v)) perimeter += 1.0;
        if (u == nu - 1 || !slice_pixel(best_slice, u + 1, v)) perimeter += 1.0;
        if (v == 0 || !slice_pixel(best_slice, u, v - 1)) perimeter += 1.0;
        if (v == nv - 1 || !slice_pixel(best_slice, u, v + 1)) perimeter += 1.0;
    }

    // ellipse of inertia from second-order central moments of pixel centers
    double m20 = 0.0, m02 = 0.0, m11 = 0.0;
    for (const auto& [u, v] : pixels) {
        m20 += (u - cu) * (u - cu);
        m02 += (v - cv) * (v - cv);
        m11 += (u - cu) * (v - cv);
    }
    m20 /= area;
    m02 /= area;
    m11 /= area;
    const double tr = 0.5 * (m20 + m02);
    const double det = std::sqrt(std::max(0.0, 0.25 * (m20 - m02) * (m20 - m02) + m11 * m11));
    const double lam_max = tr + det;
    const double lam_min = std::max(0.0, tr - det);
    const double major = 4.0 * std::sqrt(lam_max);
    const double minor = 4.0 * std::sqrt(lam_min);
    const double eccentricity = lam_max > 0.0 ? std::sqrt(1.0 - lam_min / lam_max) : 0.0;
    const double orientation = 0.5 * std::atan2(2.0 * m11, m20 - m02);

    int u0 = pixels[0].first, u1 = pixels[0].first;
    int v0 = pixels[0].second, v1 = pixels[0].second;
    for (const auto& [u, v] : pixels) {
        u0 = std::min(u0, u);
        u1 = std::max(u1, u);
        v0 = std::min(v0, v);
        v1 = std::max(v1, v);
    }
    const double extent =
        area / (static_cast<double>(u1 - u0 + 1) * static_cast<double>(v1 - v0 + 1));
    const double hull = hull_area(pixels);
    const double solidity = hull > 0.0 ? area / hull : 1.0;

    return {{"area", area},
            {"centroid_offset", centroid_offset},
            {"eccentricity", eccentricity},
            {"extent", extent},
            {"major_axis_length", major},
            {"minor_axis_length", minor},
            {"orientation", orientation},
            {"perimeter", perimeter},
            {"solidity", solidity}};
}

FeatureModel feature_model_from_name(const std::string& name) {
    if (name == "mrf" || name == "MRF") return FeatureModel::MRF;
    if (name == "nfrf" || name == "NFRF") return FeatureModel::NFRF;
    throw data_error("unknown feature model '" + name + "' (expected mrf or nfrf)");
}

const char* feature_model_name(FeatureModel m) {
    return m == FeatureModel::MRF ? "mrf" : "nfrf";
}

namespace {

template <typename Fn>
void emit_family(FeatureVector& fv, const std::string& prefix,
                 const std::vector<std::string>& names, Fn&& compute) {
    try {
        const std::map<std::string, double> values = compute();
        for (const auto& [k, v] : values) fv.set(prefix + k, v);
    } catch (const data_error&) {
        for (const std::string& k : names) fv.set_missing(prefix + k);
    }
}

template <std::size_t N>
std::vector<std::string> to_names(const std::array<const char*, N>& arr) {
    return std::vector<std::string>(arr.begin(), arr.end());
}

VoxelBox wt_bounding_box(const Mask& mask) {
    VoxelBox box{mask.dims.nx, mask.dims.ny, mask.dims.nz, -1, -1, -1};
    std::size_t idx = 0;
    for (int z = 0; z < mask.dims.nz; ++z)
        for (int y = 0; y < mask.dims.ny; ++y)
            for (int x = 0; x < mask.dims.nx; ++x, ++idx)
                if (mask.labels[idx] == 1 || mask.labels[idx] == 2 || mask.labels[idx] == 4) {
                    box.x0 = std::min(box.x0, x);
                    box.y0 = std::min(box.y0, y);
                    box.z0 = std::min(box.z0, z);
                    box.x1 = std::max(box.x1, x);
                    box.y1 = std::max(box.y1, y);
                    box.z1 = std::max(box.z1, z);
                }
    if (box.x1 < 0) throw data_error("empty region WT");
    return box;
}

} // namespace

FeatureVector extract_feature_vector(const Study& study, FeatureModel model,
                                     const FeatureConfig& config) {
    for (const char* mod : kModalities)
        if (!study.volumes.count(mod))
            throw data_error(std::string("missing modality ") + mod);
    for (const auto& [mod, vol] : study.volumes)
        if (!(vol.dims == study.mask.dims))
            throw data_error("volume dims for " + mod + " do not match mask dims");

    const VoxelBox wt_box = wt_bounding_box(study.mask);
    FeatureVector fv;

    const std::vector<std::string> hist_names = to_names(kHistogramStats);
    const std::vector<std::string> gtsdm_names = to_names(kGtsdmNames);
    const std::vector<std::string> glzsm_names = to_names(kGlzsmNames);
    const std::vector<std::string> ngtdm_names = to_names(kNgtdmNames);

    auto matrix_families = [&](const std::string& prefix, const Volume& source) {
        emit_family(fv, prefix + "GTSDM_", gtsdm_names, [&] {
            const RegionVoxels wt = extract_region(source, study.mask, Region::WT);
            return gtsdm_features(quantize(wt, config.ng), gtsdm_offsets13());
        });
        emit_family(fv, prefix + "GLZSM_", glzsm_names, [&] {
            const RegionVoxels wt = extract_region(source, study.mask, Region::WT);
            return glzsm_features(quantize(wt, config.ng));
        });
        emit_family(fv, prefix + "NGTDM_", ngtdm_names, [&] {
            const RegionVoxels wt = extract_region(source, study.mask, Region::WT);
            return ngtdm_features(quantize(wt, config.ng));
        });
    };

    for (const char* mod : kModalities) {
        const Volume& vol = study.volumes.at(mod);
        const std::string m(mod);

        for (Region region : kHistogramRegions) {
            const std::string prefix = m + "_Histogram_" + region_name(region) + "_";
            emit_family(fv, prefix, hist_names, [&] {
                return histogram_features(extract_region(vol, study.mask, region).values);
            });
        }
        matrix_families(m + "_", vol);

        if (model == FeatureModel::MRF) {
            FractalOptions fopt = config.fractal;
            fopt.threads = config.threads;
            for (const char* tname : kTransforms) {
                const std::string prefix = m + "_" + tname + "_";
                try {
                    TransformedVolume tv = [&] {
                        if (std::string(tname) == "ptpsa")
                            return ptpsa_transform_roi(vol, fopt, wt_box);
                        if (std::string(tname) == "mbm") return mbm_transform_roi(vol, fopt, wt_box);
                        return holder_transform_roi(vol, fopt, wt_box);
                    }();
                    emit_family(fv, prefix + "Histogram_WT_", hist_names, [&] {
                        return histogram_features(
                            extract_region(tv.values, study.mask, Region::WT).values);
                    });
                    matrix_families(prefix, tv.values);
                } catch (const data_error&) {
                    for (const std::string& k : hist_names)
                        fv.set_missing(prefix + "Histogram_WT_" + k);
                    for (const std::string& k : gtsdm_names) fv.set_missing(prefix + "GTSDM_" + k);
                    for (const std::string& k : glzsm_names) fv.set_missing(prefix + "GLZSM_" + k);
                    for (const std::string& k : ngtdm_names) fv.set_missing(prefix + "NGTDM_" + k);
                }
            }
        }
    }

    emit_family(fv, "volumetric_", to_names(kVolumetricNames),
                [&] { return volumetric_features(study.mask); });
    for (const auto& [axis, tag] :
         std::initializer_list<std::pair<Axis, const char*>>{
             {Axis::X, "x"}, {Axis::Y, "y"}, {Axis::Z, "z"}}) {
        emit_family(fv, std::string("spatial_") + tag + "_", to_names(kSpatialNames),
                    [&, axis = axis] { return spatial_features(study.mask, axis); });
    }
    return fv;
}

std::vector<std::string> feature_names(FeatureModel model) {
    std::vector<std::string> names;
    for (const char* mod : kModalities) {
        const std::string m(mod);
        for (Region region : kHistogramRegions)
            for (const char* s : kHistogramStats)
                names.push_back(m + "_Histogram_" + region_name(region) + "_" + s);
        for (const char* s : kGtsdmNames) names.push_back(m + "_GTSDM_" + s);
        for (const char* s : kGlzsmNames) names.push_back(m + "_GLZSM_" + s);
        for (const char* s : kNgtdmNames) names.push_back(m + "_NGTDM_" + s);
        if (model == FeatureModel::MRF) {
            for (const char* t : kTransforms) {
                for (const char* s : kHistogramStats)
                    names.push_back(m + "_" + t + "_Histogram_WT_" + s);
                for (const char* s : kGtsdmNames) names.push_back(m + "_" + t + "_GTSDM_" + s);
                for (const char* s : kGlzsmNames) names.push_back(m + "_" + t + "_GLZSM_" + s);
                for (const char* s : kNgtdmNames) names.push_back(m + "_" + t + "_NGTDM_" + s);
            }
        }
    }
    for (const char* s : kVolumetricNames) names.push_back(std::string("volumetric_") + s);
    for (const char* a : {"x", "y", "z"})
        for (const char* s : kSpatialNames)
            names.push_back(std::string("spatial_") + a + "_" + s);
    std::sort(names.begin(), names.end());
    return names;
}

} // namespace radiomics
