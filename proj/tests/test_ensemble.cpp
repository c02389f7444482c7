#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "radiomics/ensemble.hpp"
#include "radiomics/errors.hpp"
#include "radiomics/rng.hpp"

using namespace radiomics;

namespace {

LabeledDataset make_dataset(const std::vector<std::vector<double>>& x, const std::vector<int>& y) {
    LabeledDataset d;
    for (std::size_t f = 0; f < x[0].size(); ++f) d.feature_names.push_back("f" + std::to_string(f));
    for (std::size_t i = 0; i < x.size(); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "P%04zu", i);
        d.patient_ids.push_back(buf);
        d.labels.push_back(y[i]);
        d.time_days.push_back(0.0);
        d.censor.push_back(0);
        std::vector<std::optional<double>> row;
        for (double v : x[i]) row.emplace_back(v);
        d.rows.push_back(std::move(row));
    }
    return d;
}

// majority label 1 with n1 rows, minority label 0 with n0 rows
LabeledDataset imbalanced_dataset(int n1, int n0, double separation, std::uint64_t seed,
                                  int features = 4) {
    Rng rng(seed);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < n1 + n0; ++i) {
        const int label = i < n1 ? 1 : 0;
        std::vector<double> row(static_cast<std::size_t>(features));
        for (std::size_t f = 0; f < row.size(); ++f)
            row[f] = (f < 2 ? (label ? 0.5 : -0.5) * separation : 0.0) + rng.normal();
        x.push_back(std::move(row));
        y.push_back(label);
    }
    return make_dataset(x, y);
}

// oracle: brute-force pair counting AUC
double auc_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] != 0) continue;
            den += 1.0;
            if (scores[i] > scores[j]) num += 1.0;
            else if (scores[i] == scores[j]) num += 0.5;
        }
    }
    return num / den;
}

} // namespace

TEST_CASE("balanced_subsets: 6 majority / 2 minority gives 3 subsets of 2+2") {
    const LabeledDataset d = imbalanced_dataset(6, 2, 1.0, 1);
    const auto subsets = balanced_subsets(d, 42);
    REQUIRE(subsets.size() == 3);
    for (const auto& s : subsets) {
        CHECK(s.majority_rows.size() == 2);
        CHECK(s.minority_rows.size() == 2);
    }
}

TEST_CASE("balanced_subsets: 143 vs 15 gives 10 subsets, last with 8 majority rows") {
    const LabeledDataset d = imbalanced_dataset(143, 15, 1.0, 2);
    const auto subsets = balanced_subsets(d, 7);
    REQUIRE(subsets.size() == 10);
    for (std::size_t i = 0; i < 9; ++i) CHECK(subsets[i].majority_rows.size() == 15);
    CHECK(subsets[9].majority_rows.size() == 8);
    for (const auto& s : subsets) CHECK(s.minority_rows.size() == 15);
}

TEST_CASE("balanced_subsets: equal classes give one subset equal to the data") {
    const LabeledDataset d = imbalanced_dataset(5, 5, 1.0, 3);
    const auto subsets = balanced_subsets(d, 7);
    REQUIRE(subsets.size() == 1);
    CHECK(subsets[0].all_rows().size() == 10);
}

TEST_CASE("balanced_subsets: single-class input is an error") {
    std::vector<std::vector<double>> x(5, {1.0});
    std::vector<int> y(5, 1);
    CHECK_THROWS_AS(balanced_subsets(make_dataset(x, y), 1), data_error);
}

TEST_CASE("balanced_subsets: partition properties hold for random size pairs (property)") {
    Rng rng(1001);
    for (int trial = 0; trial < 200; ++trial) {
        const int n0 = 1 + static_cast<int>(rng.uniform_int(20));
        const int n1 = n0 + static_cast<int>(rng.uniform_int(60));
        const LabeledDataset d = imbalanced_dataset(n1, n0, 0.5, 2000 + trial);
        const auto subsets = balanced_subsets(d, trial);
        const std::size_t expected =
            (static_cast<std::size_t>(n1) + n0 - 1) / static_cast<std::size_t>(n0);
        REQUIRE(subsets.size() == expected);

        std::multiset<std::size_t> majority_union;
        std::set<std::size_t> minority_expected;
        for (std::size_t i = 0; i < d.n_rows(); ++i)
            if (d.labels[i] == 0) minority_expected.insert(i);
        for (std::size_t si = 0; si < subsets.size(); ++si) {
            const auto& s = subsets[si];
            if (si + 1 < subsets.size()) CHECK(s.majority_rows.size() == static_cast<std::size_t>(n0));
            // every subset carries all minority rows
            CHECK(std::set<std::size_t>(s.minority_rows.begin(), s.minority_rows.end()) ==
                  minority_expected);
            for (std::size_t r : s.majority_rows) {
                CHECK(d.labels[r] == 1);
                majority_union.insert(r);
            }
        }
        // disjoint chunks covering the majority class exactly
        CHECK(majority_union.size() == static_cast<std::size_t>(n1));
        CHECK(std::set<std::size_t>(majority_union.begin(), majority_union.end()).size() ==
              static_cast<std::size_t>(n1));
    }
}

TEST_CASE("gbdt: zero trees predicts the class prevalence") {
    const LabeledDataset d = imbalanced_dataset(30, 10, 1.0, 4);
    GbdtParams params;
    params.trees = 0;
    const GbdtModel m = gbdt_train(d.dense(), d.labels, params, 1);
    CHECK(m.predict_probability({0.0, 0.0, 0.0, 0.0}) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("gbdt: separable 1D data orders the predictions") {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 10; ++i) {
        x.push_back({i < 5 ? 0.0 : 1.0});
        y.push_back(i < 5 ? 0 : 1);
    }
    GbdtParams params;
    params.trees = 10;
    params.max_depth = 1;
    const GbdtModel m = gbdt_train(x, y, params, 1);
    CHECK(m.predict_probability({0.0}) < 0.5);
    CHECK(m.predict_probability({1.0}) > 0.5);
}

TEST_CASE("gbdt: training log-loss is nonincreasing, verified independently") {
    const LabeledDataset d = imbalanced_dataset(60, 40, 1.2, 5, 2);
    GbdtParams params;
    params.trees = 50;
    params.max_depth = 3;
    const std::vector<std::vector<double>> x = d.dense();
    const GbdtModel m = gbdt_train(x, d.labels, params, 1);
    REQUIRE(m.train_logloss.size() == 50);
    for (std::size_t i = 1; i < m.train_logloss.size(); ++i)
        CHECK(m.train_logloss[i] <= m.train_logloss[i - 1] + 1e-15);

    // independent recompute: score each prefix of trees round by round
    for (std::size_t round : {std::size_t{0}, std::size_t{9}, std::size_t{49}}) {
        double loss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double score = m.init_score;
            for (std::size_t t = 0; t <= round; ++t)
                score += m.learning_rate * m.trees[t].predict(x[i]);
            const double p = std::clamp(1.0 / (1.0 + std::exp(-score)), 1e-15, 1.0 - 1e-15);
            loss -= d.labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
        }
        loss /= static_cast<double>(x.size());
        CHECK(loss == doctest::Approx(m.train_logloss[round]).epsilon(1e-9));
    }
}

TEST_CASE("gbdt: constant features degenerate to the prior") {
    std::vector<std::vector<double>> x(20, {3.0, 3.0});
    std::vector<int> y(20, 0);
    for (int i = 0; i < 8; ++i) y[static_cast<std::size_t>(i)] = 1;
    GbdtParams params;
    params.trees = 5;
    const GbdtModel m = gbdt_train(x, y, params, 1);
    CHECK(m.predict_probability({3.0, 3.0}) == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("evaluate: AUC fixture and tie rule") {
    const EvalResult r = evaluate({0.9, 0.8, 0.4, 0.3}, {1, 0, 1, 0});
    CHECK(r.auc == doctest::Approx(0.75).epsilon(1e-12));

    const EvalResult perfect = evaluate({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0});
    CHECK(perfect.auc == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(perfect.fpr == 0.0);

    const EvalResult ties = evaluate({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0});
    CHECK(ties.auc == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("evaluate: one-class labels raise on AUC") {
    CHECK_THROWS_AS(evaluate({0.1, 0.9}, {1, 1}), data_error);
}

TEST_CASE("evaluate: AUC equals brute-force pair counting on random fixtures (property)") {
    Rng rng(606);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.uniform_int(199);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool has0 = false, has1 = false;
        for (std::size_t i = 0; i < n; ++i) {
            // coarse grid so ties actually occur
            scores[i] = std::floor(rng.uniform() * 8.0) / 8.0;
            labels[i] = rng.uniform() < 0.5 ? 0 : 1;
            (labels[i] ? has1 : has0) = true;
        }
        if (!has0 || !has1) continue;
        const EvalResult r = evaluate(scores, labels);
        CHECK(r.auc == doctest::Approx(auc_oracle(scores, labels)).epsilon(1e-12));

        // confusion-matrix hand recompute
        int tp = 0, fp = 0, tn = 0, fn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool pos = scores[i] >= 0.5;
            if (pos && labels[i] == 1) ++tp;
            else if (pos) ++fp;
            else if (labels[i] == 0) ++tn;
            else ++fn;
        }
        CHECK(r.ppv == doctest::Approx(tp + fp > 0 ? double(tp) / (tp + fp) : 0.0).epsilon(1e-12));
        CHECK(r.fpr == doctest::Approx(fp + tn > 0 ? double(fp) / (fp + tn) : 0.0).epsilon(1e-12));
        CHECK(r.accuracy == doctest::Approx(100.0 * (tp + tn) / double(n)).epsilon(1e-12));
    }
}

TEST_CASE("train_ensemble: counting contract at i=1, n=2") {
    const LabeledDataset d = imbalanced_dataset(20, 20, 2.0, 6);
    TrainParams params;
    params.folds = 2;
    params.iterations = 1;
    params.gbdt.trees = 10;
    const auto [ensemble, metrics] = train_ensemble(d, params, 9);
    CHECK(metrics.auc_values.size() == 2);  // one evaluation per fold
    // balanced data: 1 subset per fold, 2 folds
    CHECK(ensemble.members.size() == 2);
}

TEST_CASE("train_ensemble: separable 10:1 imbalance reaches AUC > 0.95") {
    const LabeledDataset d = imbalanced_dataset(180, 18, 4.0, 7);
    TrainParams params;
    params.folds = 5;
    params.iterations = 2;
    params.gbdt.trees = 60;
    const auto [ensemble, metrics] = train_ensemble(d, params, 10);
    CHECK(metrics.auc.mean > 0.95);
}

TEST_CASE("train_ensemble: minority below fold count is an error") {
    const LabeledDataset d = imbalanced_dataset(30, 3, 1.0, 8);
    TrainParams params;
    params.folds = 5;
    CHECK_THROWS_WITH_AS(train_ensemble(d, params, 1), doctest::Contains("infeasible"),
                         data_error);
}

TEST_CASE("train_ensemble: bit-reproducible across thread counts") {
    const LabeledDataset d = imbalanced_dataset(60, 12, 2.0, 11);
    TrainParams p1;
    p1.folds = 3;
    p1.iterations = 4;
    p1.gbdt.trees = 20;
    TrainParams p4 = p1;
    p4.threads = 4;
    const auto [e1, m1] = train_ensemble(d, p1, 77);
    const auto [e4, m4] = train_ensemble(d, p4, 77);
    REQUIRE(m1.auc_values.size() == m4.auc_values.size());
    for (std::size_t i = 0; i < m1.auc_values.size(); ++i) {
        CHECK(m1.auc_values[i] == m4.auc_values[i]);
        CHECK(m1.accuracy_values[i] == m4.accuracy_values[i]);
        CHECK(m1.ppv_values[i] == m4.ppv_values[i]);
        CHECK(m1.fpr_values[i] == m4.fpr_values[i]);
    }
    CHECK(e1.members.size() == e4.members.size());
}

TEST_CASE("ensemble: identical members equal the single member; probabilities in [0,1]") {
    const LabeledDataset d = imbalanced_dataset(20, 10, 2.0, 12);
    GbdtParams params;
    params.trees = 20;
    const GbdtModel m = gbdt_train(d.dense(), d.labels, params, 1);
    Ensemble single;
    single.members.push_back({m, 0, 0, 0});
    Ensemble triple;
    for (int i = 0; i < 3; ++i) triple.members.push_back({m, 0, 0, i});
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x = {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
        const double p1 = single.predict_probability(x);
        const double p3 = triple.predict_probability(x);
        CHECK(p1 == doctest::Approx(p3).epsilon(1e-15));
        CHECK(p1 >= 0.0);
        CHECK(p1 <= 1.0);
    }
}

TEST_CASE("train_ensemble: smote and adasyn samplers produce one member per fold") {
    const LabeledDataset d = imbalanced_dataset(60, 12, 3.0, 19);
    TrainParams params;
    params.folds = 3;
    params.iterations = 2;
    params.gbdt.trees = 40;
    for (Sampler sampler : {Sampler::Smote, Sampler::Adasyn}) {
        const auto [ensemble, metrics] = train_ensemble(d, params, 5, sampler);
        CHECK(ensemble.members.size() == 6);  // iterations x folds, one model each
        CHECK(metrics.auc_values.size() == 6);
        CHECK(metrics.auc.mean > 0.8);
    }
}

TEST_CASE("smote: already balanced input is returned unchanged") {
    const LabeledDataset d = imbalanced_dataset(8, 8, 1.0, 13);
    const LabeledDataset out = smote_oversample(d, 5, 1);
    CHECK(out.n_rows() == d.n_rows());
}

TEST_CASE("smote: balances classes; synthetic points lie on neighbor segments") {
    const LabeledDataset d = imbalanced_dataset(40, 8, 1.0, 14, 2);
    const LabeledDataset out = smote_oversample(d, 2, 99);
    int n0 = 0, n1 = 0;
    for (int l : out.labels) (l == 1 ? n1 : n0) += 1;
    CHECK(n0 == n1);

    // collect original minority points
    std::vector<std::vector<double>> minority;
    for (std::size_t i = 0; i < d.n_rows(); ++i)
        if (d.labels[i] == 0) {
            std::vector<double> row;
            for (const auto& c : d.rows[i]) row.push_back(*c);
            minority.push_back(std::move(row));
        }
    // every synthetic point is a convex combination of two minority points
    for (std::size_t i = d.n_rows(); i < out.n_rows(); ++i) {
        std::vector<double> p;
        for (const auto& c : out.rows[i]) p.push_back(*c);
        CHECK(out.labels[i] == 0);
        bool on_some_segment = false;
        for (std::size_t a = 0; a < minority.size() && !on_some_segment; ++a) {
            for (std::size_t b = 0; b < minority.size() && !on_some_segment; ++b) {
                if (a == b) continue;
                // p = A + u (B - A): solve u from the first varying axis, check the rest
                double u = -1.0;
                bool ok = true;
                for (std::size_t c = 0; c < p.size(); ++c) {
                    const double den = minority[b][c] - minority[a][c];
                    if (std::fabs(den) < 1e-12) {
                        if (std::fabs(p[c] - minority[a][c]) > 1e-9) ok = false;
                        continue;
                    }
                    const double uc = (p[c] - minority[a][c]) / den;
                    if (u < 0.0) u = uc;
                    else if (std::fabs(uc - u) > 1e-9) ok = false;
                }
                if (ok && u >= -1e-12 && u <= 1.0 + 1e-12) on_some_segment = true;
            }
        }
        CHECK(on_some_segment);
    }
}

TEST_CASE("smote: identical minority points produce identical synthetics") {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 12; ++i) {
        x.push_back({static_cast<double>(i), 1.0});
        y.push_back(1);
    }
    for (int i = 0; i < 4; ++i) {
        x.push_back({5.0, 5.0});
        y.push_back(0);
    }
    const LabeledDataset out = smote_oversample(make_dataset(x, y), 3, 5);
    for (std::size_t i = x.size(); i < out.n_rows(); ++i) {
        CHECK(*out.rows[i][0] == 5.0);
        CHECK(*out.rows[i][1] == 5.0);
    }
}

TEST_CASE("smote/adasyn: minority below k+1 is an error") {
    const LabeledDataset d = imbalanced_dataset(20, 4, 1.0, 15);
    CHECK_THROWS_AS(smote_oversample(d, 5, 1), data_error);
    CHECK_THROWS_AS(adasyn_oversample(d, 5, 1), data_error);
}

TEST_CASE("adasyn: balances within rounding and targets boundary-dense regions") {
    const LabeledDataset d = imbalanced_dataset(60, 12, 1.5, 16, 2);
    const LabeledDataset out = adasyn_oversample(d, 5, 3);
    int n0 = 0, n1 = 0;
    for (int l : out.labels) (l == 1 ? n1 : n0) += 1;
    CHECK(std::abs(n0 - n1) <= 1);
    for (std::size_t i = d.n_rows(); i < out.n_rows(); ++i) CHECK(out.labels[i] == 0);
}
