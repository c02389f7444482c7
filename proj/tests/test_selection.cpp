#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "radiomics/errors.hpp"
#include "radiomics/math_utils.hpp"
#include "radiomics/rng.hpp"
#include "radiomics/selection.hpp"

using namespace radiomics;

namespace {

LabeledDataset make_dataset(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                            std::vector<std::string> names = {}) {
    LabeledDataset d;
    if (names.empty())
        for (std::size_t f = 0; f < x[0].size(); ++f) names.push_back("f" + std::to_string(f));
    d.feature_names = std::move(names);
    for (std::size_t i = 0; i < x.size(); ++i) {
        d.patient_ids.push_back("P" + std::to_string(i));
        d.labels.push_back(y[i]);
        d.time_days.push_back(0.0);
        d.censor.push_back(0);
        std::vector<std::optional<double>> row;
        for (double v : x[i]) row.emplace_back(v);
        d.rows.push_back(std::move(row));
    }
    return d;
}

// --- oracle: exact Mann-Whitney two-sided p by explicit combination walk ----
// Enumerates every way to choose the group-A positions among the pooled
// sorted sample (no ties assumed) and tallies the U statistic.
double mw_exact_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    const int total = n + m;
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());

    double u_obs = 0.0;
    for (double va : a)
        for (double vb : b)
            if (va > vb) u_obs += 1.0;
    const double nm = static_cast<double>(n) * m;
    const double lo = std::min(u_obs, nm - u_obs);
    const double hi = std::max(u_obs, nm - u_obs);

    std::vector<int> comb(static_cast<std::size_t>(n));
    std::iota(comb.begin(), comb.end(), 0);
    double extreme = 0.0, count = 0.0;
    while (true) {
        // U for this labeling: pairs (i in A, j in B) with pooled[i] > pooled[j]
        double u = 0.0;
        std::vector<char> in_a(static_cast<std::size_t>(total), 0);
        for (int i : comb) in_a[static_cast<std::size_t>(i)] = 1;
        for (int i = 0; i < total; ++i)
            if (in_a[static_cast<std::size_t>(i)])
                for (int j = 0; j < total; ++j)
                    if (!in_a[static_cast<std::size_t>(j)] && pooled[static_cast<std::size_t>(i)] >
                                                                  pooled[static_cast<std::size_t>(j)])
                        u += 1.0;
        count += 1.0;
        if (u <= lo || u >= hi) extreme += 1.0;
        // next combination
        int k = n - 1;
        while (k >= 0 && comb[static_cast<std::size_t>(k)] == total - n + k) --k;
        if (k < 0) break;
        ++comb[static_cast<std::size_t>(k)];
        for (int j = k + 1; j < n; ++j)
            comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
    return std::min(1.0, extreme / count);
}

// --- oracle: two-sided t p-value by Simpson quadrature of the t density ----
double t_pdf(double x, double df) {
    const double c = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                     0.5 * std::log(df * 3.14159265358979323846);
    return std::exp(c - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

double t_two_sided_oracle(double t, double df) {
    const double a = std::fabs(t);
    const double upper = a + 400.0;
    const int n = 200000;  // even
    const double h = (upper - a) / n;
    double s = t_pdf(a, df) + t_pdf(upper, df);
    for (int i = 1; i < n; ++i)
        s += t_pdf(a + i * h, df) * (i % 2 == 1 ? 4.0 : 2.0);
    return std::min(1.0, 2.0 * s * h / 3.0);
}

} // namespace

TEST_CASE("welch t: {1,2,3} vs {2,3,4} matches the closed form and the quadrature oracle") {
    const TestResult r = two_sample_test({1, 2, 3}, {2, 3, 4}, TestKind::Welch);
    CHECK(r.statistic == doctest::Approx(-1.2247448713915890).epsilon(1e-12));
    // Welch-Satterthwaite df = 4 for equal variances and sizes
    CHECK(r.p_value == doctest::Approx(t_two_sided_oracle(r.statistic, 4.0)).epsilon(1e-6));
    CHECK(r.p_value == doctest::Approx(0.2878).epsilon(1e-3));
}

TEST_CASE("welch t: identical groups give t = 0, p = 1") {
    const TestResult r = two_sample_test({1, 2, 3}, {1, 2, 3}, TestKind::Welch);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("welch t: both groups constant is the documented convention") {
    const TestResult r = two_sample_test({2, 2, 2}, {2, 2}, TestKind::Welch);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("welch t: random fixtures agree with the quadrature oracle") {
    Rng rng(555);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(3 + rng.uniform_int(10)), b(3 + rng.uniform_int(10));
        for (double& v : a) v = rng.normal();
        for (double& v : b) v = rng.normal() + 0.5;
        const TestResult r = two_sample_test(a, b, TestKind::Welch);
        const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
        const double va = variance_sample(a), vb = variance_sample(b);
        const double se2 = va / na + vb / nb;
        const double df =
            se2 * se2 / (va * va / (na * na * (na - 1)) + vb * vb / (nb * nb * (nb - 1)));
        CHECK(r.p_value == doctest::Approx(t_two_sided_oracle(r.statistic, df)).epsilon(1e-5));
    }
}

TEST_CASE("mann-whitney: {1,2,3} vs {4,5,6} exact p = 0.1") {
    const TestResult r = two_sample_test({1, 2, 3}, {4, 5, 6}, TestKind::MannWhitney);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("mann-whitney: exact path equals the enumeration oracle (property, n+m <= 10)") {
    Rng rng(777);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_int(5));
        const int m = 1 + static_cast<int>(rng.uniform_int(5));
        std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(m));
        // continuous draws: ties have probability zero
        for (double& v : a) v = rng.normal();
        for (double& v : b) v = rng.normal() + 0.3;
        const TestResult r = two_sample_test(a, b, TestKind::MannWhitney);
        CHECK(r.p_value == doctest::Approx(mw_exact_oracle(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("mann-whitney: group swap maps U to nm - U with the same p") {
    Rng rng(888);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> a(4 + rng.uniform_int(20)), b(4 + rng.uniform_int(20));
        for (double& v : a) v = rng.normal();
        for (double& v : b) v = rng.normal() + 0.2;
        const TestResult r1 = two_sample_test(a, b, TestKind::MannWhitney);
        const TestResult r2 = two_sample_test(b, a, TestKind::MannWhitney);
        const double nm = static_cast<double>(a.size()) * static_cast<double>(b.size());
        CHECK(r1.statistic + r2.statistic == doctest::Approx(nm).epsilon(1e-12));
        CHECK(r1.p_value == doctest::Approx(r2.p_value).epsilon(1e-12));
    }
}

TEST_CASE("welch t: group swap flips the statistic sign, same p") {
    const TestResult r1 = two_sample_test({1, 2, 3, 4}, {2, 3, 4, 6}, TestKind::Welch);
    const TestResult r2 = two_sample_test({2, 3, 4, 6}, {1, 2, 3, 4}, TestKind::Welch);
    CHECK(r1.statistic == doctest::Approx(-r2.statistic).epsilon(1e-12));
    CHECK(r1.p_value == doctest::Approx(r2.p_value).epsilon(1e-12));
}

TEST_CASE("two-sample tests: frozen reference values") {
    // values computed with an established statistics package and frozen
    {
        const TestResult r =
            two_sample_test({1.5, 2.25, 3.0, 9.75}, {2.0, 2.5}, TestKind::Welch);
        CHECK(r.statistic == doctest::Approx(0.978492109580163).epsilon(1e-12));
        CHECK(r.p_value == doctest::Approx(0.397835958975234).epsilon(1e-9));
    }
    {
        const TestResult r =
            two_sample_test({0.1, 0.2, 0.35, 0.5, 0.9}, {1.0, 1.1, 1.25}, TestKind::Welch);
        CHECK(r.statistic == doctest::Approx(-4.48031773262358).epsilon(1e-12));
        CHECK(r.p_value == doctest::Approx(0.00489937269605649).epsilon(1e-9));
    }
    {
        const TestResult r =
            two_sample_test({1.0, 3.5, 4.25, 8.0}, {2.0, 5.5, 7.75}, TestKind::MannWhitney);
        CHECK(r.statistic == 5.0);
        CHECK(r.p_value == doctest::Approx(0.857142857142857).epsilon(1e-12));
    }
    {
        const TestResult r = two_sample_test({10, 20}, {1, 2, 3, 30}, TestKind::MannWhitney);
        CHECK(r.statistic == 6.0);
        CHECK(r.p_value == doctest::Approx(0.533333333333333).epsilon(1e-12));
    }
    {
        // tie-corrected continuity-corrected normal approximation
        const std::vector<double> a = {1, 1, 2, 3, 3, 3, 4, 5, 6, 7,
                                       7, 8, 9, 9, 10, 11, 12, 12, 13, 14};
        const std::vector<double> b = {3, 4, 4, 5, 6, 6, 7, 8, 8, 9,
                                       10, 10, 11, 12, 13, 13, 14, 15, 16, 17};
        const TestResult r = two_sample_test(a, b, TestKind::MannWhitney);
        CHECK(r.statistic == 134.0);
        CHECK(r.p_value == doctest::Approx(0.0757962243180772).epsilon(1e-9));
    }
}

TEST_CASE("mann-whitney: disjoint ranges at 15 vs 143 are overwhelmingly significant") {
    std::vector<double> a, b;
    Rng rng(99);
    for (int i = 0; i < 15; ++i) a.push_back(rng.uniform());
    for (int i = 0; i < 143; ++i) b.push_back(2.0 + rng.uniform());
    const TestResult r = two_sample_test(a, b, TestKind::MannWhitney);
    CHECK(r.statistic == 0.0);  // U = 0: total separation
    CHECK(r.p_value < 1e-8);
}

TEST_CASE("significance_filter: identical-across-class features excluded, output sorted by p") {
    Rng rng(1234);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        const int label = i % 2;
        x.push_back({label ? 2.0 + rng.uniform() : rng.uniform(),  // strong separation
                     label ? 0.4 + rng.uniform() : rng.uniform(),  // weak separation
                     7.0});                                        // constant
        y.push_back(label);
    }
    const LabeledDataset d = make_dataset(x, y);
    const auto kept = significance_filter(d, {"f0", "f1", "f2"}, 0.05);
    REQUIRE(kept.size() >= 1);
    CHECK(kept[0].name == "f0");
    for (std::size_t i = 1; i < kept.size(); ++i)
        CHECK(kept[i - 1].result.p_value <= kept[i].result.p_value);
    for (const auto& ft : kept) CHECK(ft.name != "f2");
    // empty candidate list: empty result
    CHECK(significance_filter(d, {}, 0.05).empty());
}

TEST_CASE("rank_by_f1_importance: separating feature outranks pure noise") {
    Rng rng(4321);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        const int label = i % 2;
        x.push_back({label ? 1.0 : 0.0, rng.normal()});
        y.push_back(label);
    }
    const LabeledDataset d = make_dataset(x, y, {"separating", "noise"});
    const RankedFeatures ranked = rank_by_f1_importance(d, {}, 11);
    REQUIRE(ranked.ranked.size() == 2);
    CHECK(ranked.ranked[0].name == "separating");
    CHECK(ranked.ranked[0].score == 1.0);
    CHECK(ranked.ranked[1].score < 1.0);

    // noise-only model performs at chance level: F1 of the noise feature
    // alone is well below the separating feature alone
    const std::vector<std::vector<double>> dense = d.dense();
    const double f1_sep = cv_mean_f1(dense, y, {0}, {}, 11);
    const double f1_noise = cv_mean_f1(dense, y, {1}, {}, 11);
    CHECK(f1_sep > 0.95);
    CHECK(f1_noise < f1_sep - 0.2);
}

TEST_CASE("rank_by_f1_importance: duplicated top feature occupies ranks 1-2") {
    Rng rng(909);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 50; ++i) {
        const int label = i % 2;
        const double sig = label ? 1.0 : 0.0;
        x.push_back({sig, sig, rng.normal()});
        y.push_back(label);
    }
    const LabeledDataset d = make_dataset(x, y, {"sig_a", "sig_b", "noise"});
    const RankedFeatures ranked = rank_by_f1_importance(d, {}, 5);
    const bool dup_on_top = (ranked.ranked[0].name == "sig_a" && ranked.ranked[1].name == "sig_b") ||
                            (ranked.ranked[0].name == "sig_b" && ranked.ranked[1].name == "sig_a");
    CHECK(dup_on_top);
}

TEST_CASE("rank_by_f1_importance: all-constant features are degenerate data") {
    std::vector<std::vector<double>> x(10, {1.0, 2.0});
    std::vector<int> y(10, 0);
    for (int i = 0; i < 5; ++i) y[static_cast<std::size_t>(i)] = 1;
    const LabeledDataset d = make_dataset(x, y);
    CHECK_THROWS_WITH_AS(rank_by_f1_importance(d, {}, 1), doctest::Contains("degenerate"),
                         data_error);
}

TEST_CASE("rank_by_f1_importance: deterministic given seed and invariant to row order") {
    Rng rng(2468);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        const int label = i % 2;
        x.push_back({label + 0.3 * rng.normal(), rng.normal(), rng.normal()});
        y.push_back(label);
    }
    const LabeledDataset d = make_dataset(x, y);
    const RankedFeatures r1 = rank_by_f1_importance(d, {}, 33);
    const RankedFeatures r2 = rank_by_f1_importance(d, {}, 33);
    REQUIRE(r1.ranked.size() == r2.ranked.size());
    for (std::size_t i = 0; i < r1.ranked.size(); ++i) {
        CHECK(r1.ranked[i].name == r2.ranked[i].name);
        CHECK(r1.ranked[i].score == r2.ranked[i].score);
    }
    // permute rows
    std::vector<std::size_t> perm(d.n_rows());
    std::iota(perm.begin(), perm.end(), 0);
    Rng prng(1);
    prng.shuffle(perm);
    const LabeledDataset shuffled = d.select_rows(perm);
    const RankedFeatures r3 = rank_by_f1_importance(shuffled, {}, 33);
    for (std::size_t i = 0; i < r1.ranked.size(); ++i) {
        CHECK(r1.ranked[i].name == r3.ranked[i].name);
        CHECK(r1.ranked[i].score == r3.ranked[i].score);
    }
}

TEST_CASE("select_top: threshold, fallback, and brute-force agreement") {
    RankedFeatures ranked;
    ranked.ranked = {{"a", 1.0}, {"b", 0.9}, {"c", 0.3}};
    CHECK(select_top(ranked, 0.85) == std::vector<std::string>{"a", "b"});
    // all below threshold: top-1 fallback
    RankedFeatures low;
    low.ranked = {{"a", 0.5}, {"b", 0.2}};
    CHECK(select_top(low, 0.9) == std::vector<std::string>{"a"});

    // 30-feature synthetic ranking vs brute-force filter
    RankedFeatures many;
    for (int i = 0; i < 30; ++i)
        many.ranked.push_back({"f" + std::to_string(i), (30.0 - i) / 30.0});
    const std::vector<std::string> got = select_top(many, 0.80);
    std::vector<std::string> expected;
    for (const RankedFeature& rf : many.ranked)
        if (rf.score >= 0.80) expected.push_back(rf.name);
    CHECK(got == expected);

    CHECK_THROWS_AS(select_top(many, 0.0), data_error);
    CHECK_THROWS_AS(select_top(many, 1.5), data_error);
}
