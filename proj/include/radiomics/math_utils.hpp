#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace radiomics {

double mean(const std::vector<double>& v);
// Population variance (divides by n).
double variance_population(const std::vector<double>& v);
// Sample variance (divides by n-1); 0 for n < 2.
double variance_sample(const std::vector<double>& v);

// Least-squares slope of y over x. If all y values are bit-identical the
// slope is exactly 0 (avoids rounding noise in the degenerate flat case,
// which several transform anchors rely on).
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

// Regularized incomplete beta I_x(a, b) via continued fraction.
double incomplete_beta(double a, double b, double x);

// Standard normal CDF.
double normal_cdf(double x);

// Two-sided p-value for a t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// Kendall's tau-a by pair counting (ties contribute 0). O(n^2).
double kendall_tau(const std::vector<double>& a, const std::vector<double>& b);

// FNV-1a over a byte string; used for config provenance hashes.
std::uint64_t fnv1a_hash(const std::string& s);

} // namespace radiomics
