#include "radiomics/selection.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "radiomics/errors.hpp"
#include "radiomics/math_utils.hpp"
#include "radiomics/rng.hpp"

namespace radiomics {

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gini = std::numeric_limits<double>::infinity();
};

double gini_of(int n0, int n1) {
    const double n = n0 + n1;
    if (n == 0.0) return 0.0;
    const double p0 = n0 / n, p1 = n1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

void grow(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
          const std::vector<std::size_t>& features, std::vector<int>& indices, int depth,
          const DecisionTreeParams& params, std::vector<DecisionTreeNode>& nodes, int node_id) {
    int n1 = 0;
    for (int i : indices) n1 += y[static_cast<std::size_t>(i)];
    const int n0 = static_cast<int>(indices.size()) - n1;
    DecisionTreeNode& self = nodes[static_cast<std::size_t>(node_id)];
    self.predicted = n1 >= n0 ? 1 : 0;

    if (depth >= params.max_depth || n0 == 0 || n1 == 0 ||
        static_cast<int>(indices.size()) < 2 * params.min_leaf)
        return;

    SplitChoice best;
    std::vector<std::pair<double, int>> order;
    for (std::size_t f : features) {
        order.clear();
        for (int i : indices)
            order.emplace_back(x[static_cast<std::size_t>(i)][f], y[static_cast<std::size_t>(i)]);
        std::sort(order.begin(), order.end());
        int left0 = 0, left1 = 0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            if (order[k].second == 1) ++left1; else ++left0;
            if (order[k].first == order[k + 1].first) continue;
            const int left_n = left0 + left1;
            const int right_n = static_cast<int>(order.size()) - left_n;
            if (left_n < params.min_leaf || right_n < params.min_leaf) continue;
            const int right1 = n1 - left1, right0 = n0 - left0;
            const double g = (left_n * gini_of(left0, left1) + right_n * gini_of(right0, right1)) /
                             static_cast<double>(order.size());
            if (g + 1e-12 < best.gini) {
                best.gini = g;
                best.feature = static_cast<int>(f);
                best.threshold = 0.5 * (order[k].first + order[k + 1].first);
            }
        }
    }
    if (best.feature < 0 || best.gini >= gini_of(n0, n1) - 1e-12) return;

    std::vector<int> left_idx, right_idx;
    for (int i : indices) {
        if (x[static_cast<std::size_t>(i)][static_cast<std::size_t>(best.feature)] <=
            best.threshold)
            left_idx.push_back(i);
        else
            right_idx.push_back(i);
    }
    const int left_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    const int right_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(node_id)].feature = best.feature;
    nodes[static_cast<std::size_t>(node_id)].threshold = best.threshold;
    nodes[static_cast<std::size_t>(node_id)].left = left_id;
    nodes[static_cast<std::size_t>(node_id)].right = right_id;
    grow(x, y, features, left_idx, depth + 1, params, nodes, left_id);
    grow(x, y, features, right_idx, depth + 1, params, nodes, right_id);
}

// Stratified fold assignment: indices of each class are shuffled and dealt
// round-robin. Rows are canonicalized by (patient id, label, time, features)
// first so the result does not depend on incoming row order.
std::vector<int> stratified_folds(const std::vector<int>& y, int folds,
                                  const std::vector<std::size_t>& canonical_order,
                                  std::uint64_t seed) {
    std::vector<std::size_t> class0, class1;
    for (std::size_t i : canonical_order)
        (y[i] == 1 ? class1 : class0).push_back(i);
    Rng rng(seed);
    rng.shuffle(class0);
    rng.shuffle(class1);
    std::vector<int> fold_of(y.size(), 0);
    int f = 0;
    for (std::size_t i : class0) fold_of[i] = f++ % folds;
    f = 0;
    for (std::size_t i : class1) fold_of[i] = f++ % folds;
    return fold_of;
}

double f1_score(int tp, int fp, int fn) {
    const double denom = 2.0 * tp + fp + fn;
    return denom > 0.0 ? 2.0 * tp / denom : 0.0;
}

} // namespace

int DecisionTree::predict(const std::vector<double>& x) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
        const DecisionTreeNode& n = nodes[static_cast<std::size_t>(id)];
        id = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(id)].predicted;
}

DecisionTree decision_tree_train(const std::vector<std::vector<double>>& x,
                                 const std::vector<int>& y, const DecisionTreeParams& params) {
    if (x.empty() || x.size() != y.size())
        throw data_error("decision tree: empty or inconsistent training data");
    DecisionTree tree;
    tree.nodes.emplace_back();
    std::vector<int> indices(x.size());
    std::iota(indices.begin(), indices.end(), 0);
    std::vector<std::size_t> features(x[0].size());
    std::iota(features.begin(), features.end(), 0);
    grow(x, y, features, indices, 0, params, tree.nodes, 0);
    return tree;
}

double cv_mean_f1(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                  const std::vector<std::size_t>& feature_subset, const ImportanceParams& params,
                  std::uint64_t seed) {
    std::vector<std::size_t> canonical(x.size());
    std::iota(canonical.begin(), canonical.end(), 0);
    const std::vector<int> fold_of = stratified_folds(y, params.cv_folds, canonical, seed);

    double f1_sum = 0.0;
    for (int fold = 0; fold < params.cv_folds; ++fold) {
        std::vector<std::vector<double>> xtr;
        std::vector<int> ytr;
        std::vector<std::size_t> test_rows;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (fold_of[i] == fold) {
                test_rows.push_back(i);
            } else {
                std::vector<double> row;
                row.reserve(feature_subset.size());
                for (std::size_t f : feature_subset) row.push_back(x[i][f]);
                xtr.push_back(std::move(row));
                ytr.push_back(y[i]);
            }
        }
        if (xtr.empty() || test_rows.empty()) continue;
        const DecisionTree tree = decision_tree_train(xtr, ytr, params.tree);
        int tp = 0, fp = 0, fn = 0;
        for (std::size_t i : test_rows) {
            std::vector<double> row;
            row.reserve(feature_subset.size());
            for (std::size_t f : feature_subset) row.push_back(x[i][f]);
            const int pred = tree.predict(row);
            if (pred == 1 && y[i] == 1) ++tp;
            else if (pred == 1 && y[i] == 0) ++fp;
            else if (pred == 0 && y[i] == 1) ++fn;
        }
        f1_sum += f1_score(tp, fp, fn);
    }
    return f1_sum / params.cv_folds;
}

RankedFeatures rank_by_f1_importance(const LabeledDataset& data, const ImportanceParams& params,
                                     std::uint64_t seed) {
    if (data.n_features() < 2) throw data_error("importance ranking needs >= 2 features");
    int n1 = 0;
    for (int l : data.labels) n1 += l;
    if (n1 == 0 || n1 == static_cast<int>(data.n_rows()))
        throw data_error("importance ranking needs both classes present");

    // Row-order invariance: work on rows sorted by (id, label, time, features).
    std::vector<std::size_t> order(data.n_rows());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (data.patient_ids[a] != data.patient_ids[b])
            return data.patient_ids[a] < data.patient_ids[b];
        if (data.labels[a] != data.labels[b]) return data.labels[a] < data.labels[b];
        if (data.time_days[a] != data.time_days[b]) return data.time_days[a] < data.time_days[b];
        return data.rows[a] < data.rows[b];
    });
    const LabeledDataset sorted = data.select_rows(order);
    const std::vector<std::vector<double>> x = sorted.dense();
    const std::vector<int>& y = sorted.labels;

    bool any_varying = false;
    for (std::size_t f = 0; f < sorted.n_features() && !any_varying; ++f)
        for (std::size_t i = 1; i < x.size(); ++i)
            if (x[i][f] != x[0][f]) {
                any_varying = true;
                break;
            }
    if (!any_varying) throw data_error("degenerate data: every feature is constant");

    std::vector<std::size_t> remaining(sorted.n_features());
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<std::size_t> eliminated;  // first = least important

    int stage = 0;
    while (remaining.size() > 1) {
        const std::uint64_t stage_seed = Rng::mix(seed, static_cast<std::uint64_t>(stage));
        std::vector<double> removal_f1(remaining.size());
        double best_f1 = -1.0;
        for (std::size_t pos = 0; pos < remaining.size(); ++pos) {
            std::vector<std::size_t> candidate;
            candidate.reserve(remaining.size() - 1);
            for (std::size_t q = 0; q < remaining.size(); ++q)
                if (q != pos) candidate.push_back(remaining[q]);
            removal_f1[pos] = cv_mean_f1(x, y, candidate, params, stage_seed);
            best_f1 = std::max(best_f1, removal_f1[pos]);
        }
        // Removal ties (common with redundant features) are broken by solo
        // predictive power: the tied feature that is weakest on its own goes.
        std::vector<std::size_t> tied;
        for (std::size_t pos = 0; pos < remaining.size(); ++pos)
            if (removal_f1[pos] >= best_f1 - 1e-12) tied.push_back(pos);
        std::size_t drop_pos = tied[0];
        if (tied.size() > 1) {
            double worst_solo = std::numeric_limits<double>::infinity();
            for (std::size_t pos : tied) {
                const double solo = cv_mean_f1(x, y, {remaining[pos]}, params, stage_seed);
                if (solo < worst_solo) {
                    worst_solo = solo;
                    drop_pos = pos;
                }
            }
        }
        eliminated.push_back(remaining[drop_pos]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(drop_pos));
        ++stage;
    }
    eliminated.push_back(remaining[0]);

    const std::size_t m = eliminated.size();
    RankedFeatures out;
    for (std::size_t r = 0; r < m; ++r) {
        // rank 1 = last survivor
        const std::size_t col = eliminated[m - 1 - r];
        out.ranked.push_back(
            {sorted.feature_names[col], static_cast<double>(m - r) / static_cast<double>(m)});
    }
    return out;
}

std::vector<std::string> select_top(const RankedFeatures& ranked, double threshold) {
    if (!(threshold > 0.0) || threshold > 1.0)
        throw data_error("selection threshold must lie in (0, 1]");
    if (ranked.ranked.empty()) throw data_error("select_top: empty ranking");
    std::vector<std::string> out;
    for (const RankedFeature& rf : ranked.ranked)
        if (rf.score >= threshold) out.push_back(rf.name);
    if (out.empty()) {
        std::cerr << "warning: no feature scored >= " << threshold
                  << "; keeping the top-ranked feature '" << ranked.ranked[0].name << "'\n";
        out.push_back(ranked.ranked[0].name);
    }
    return out;
}

namespace {

// Null distribution counts of the Mann-Whitney U statistic, N(u; n, m):
// arrangements of n group-A ranks among n+m with U == u.
// Recurrence: N(u; n, m) = N(u - m; n - 1, m) + N(u; n, m - 1).
double mw_null_count(int u, int n, int m, std::map<std::tuple<int, int, int>, double>& memo) {
    if (u < 0) return 0.0;
    if (n == 0) return u == 0 ? 1.0 : 0.0;
    if (m == 0) return u == 0 ? 1.0 : 0.0;
    const auto key = std::make_tuple(u, n, m);
    const auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const double v = mw_null_count(u - m, n - 1, m, memo) + mw_null_count(u, n, m - 1, memo);
    memo[key] = v;
    return v;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

} // namespace

TestResult two_sample_test(const std::vector<double>& group_a, const std::vector<double>& group_b,
                           TestKind kind) {
    for (double v : group_a)
        if (!std::isfinite(v)) throw data_error("two_sample_test: non-finite value in group A");
    for (double v : group_b)
        if (!std::isfinite(v)) throw data_error("two_sample_test: non-finite value in group B");

    TestResult res;
    res.kind = kind;

    if (kind == TestKind::Welch) {
        if (group_a.size() < 2 || group_b.size() < 2)
            throw data_error("Welch t-test needs >= 2 values per group");
        const double na = static_cast<double>(group_a.size());
        const double nb = static_cast<double>(group_b.size());
        const double ma = mean(group_a), mb = mean(group_b);
        const double va = variance_sample(group_a), vb = variance_sample(group_b);
        if (va == 0.0 && vb == 0.0) {
            res.statistic = 0.0;
            res.p_value = 1.0;  // both groups constant: no evidence either way
            return res;
        }
        const double se2 = va / na + vb / nb;
        res.statistic = (ma - mb) / std::sqrt(se2);
        const double df =
            se2 * se2 / (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
        res.p_value = student_t_two_sided_p(res.statistic, df);
        return res;
    }

    if (group_a.empty() || group_b.empty())
        throw data_error("Mann-Whitney test needs >= 1 value per group");
    const int n = static_cast<int>(group_a.size());
    const int m = static_cast<int>(group_b.size());

    double u_stat = 0.0;
    bool has_ties = false;
    for (double a : group_a)
        for (double b : group_b) {
            if (a > b) u_stat += 1.0;
            else if (a == b) {
                u_stat += 0.5;
                has_ties = true;
            }
        }
    {
        // ties within a group also preclude the exact path
        auto tied_within = [](const std::vector<double>& g) {
            std::vector<double> s(g);
            std::sort(s.begin(), s.end());
            return std::adjacent_find(s.begin(), s.end()) != s.end();
        };
        has_ties = has_ties || tied_within(group_a) || tied_within(group_b);
    }
    res.statistic = u_stat;
    const double nm = static_cast<double>(n) * m;

    if (n + m <= 12 && !has_ties) {
        std::map<std::tuple<int, int, int>, double> memo;
        const int u = static_cast<int>(u_stat);
        const int lo = std::min(u, static_cast<int>(nm) - u);
        const int hi = std::max(u, static_cast<int>(nm) - u);
        double count = 0.0;
        for (int k = 0; k <= lo; ++k) count += mw_null_count(k, n, m, memo);
        for (int k = hi; k <= static_cast<int>(nm); ++k) count += mw_null_count(k, n, m, memo);
        res.p_value = std::min(1.0, count / binomial(n + m, n));
        return res;
    }

    // Normal approximation with tie correction and continuity correction.
    std::vector<double> pooled(group_a);
    pooled.insert(pooled.end(), group_b.begin(), group_b.end());
    std::sort(pooled.begin(), pooled.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double big_n = static_cast<double>(n + m);
    const double var =
        nm * (big_n + 1.0) / 12.0 - nm * tie_term / (12.0 * big_n * (big_n - 1.0));
    if (var <= 0.0) {
        res.p_value = 1.0;  // all pooled values identical
        return res;
    }
    const double diff = std::abs(u_stat - nm / 2.0);
    const double z = std::max(0.0, diff - 0.5) / std::sqrt(var);
    res.p_value = 2.0 * (1.0 - normal_cdf(z));
    res.p_value = std::min(1.0, res.p_value);
    return res;
}

std::vector<FeatureTest> significance_filter(const LabeledDataset& data,
                                             const std::vector<std::string>& features,
                                             double alpha, TestKind kind) {
    int n1 = 0;
    for (int l : data.labels) n1 += l;
    if (n1 == 0 || n1 == static_cast<int>(data.n_rows()))
        throw data_error("significance_filter needs both classes present");

    std::vector<FeatureTest> kept;
    for (const std::string& name : features) {
        const std::size_t col = data.feature_index(name);
        std::vector<double> a, b;
        for (std::size_t i = 0; i < data.n_rows(); ++i) {
            if (!data.rows[i][col].has_value()) continue;
            (data.labels[i] == 1 ? a : b).push_back(*data.rows[i][col]);
        }
        if (a.empty() || b.empty()) continue;
        const TestResult r = two_sample_test(a, b, kind);
        if (r.p_value < alpha) kept.push_back({name, r});
    }
    std::stable_sort(kept.begin(), kept.end(), [](const FeatureTest& l, const FeatureTest& r) {
        return l.result.p_value < r.result.p_value;
    });
    return kept;
}

} // namespace radiomics
