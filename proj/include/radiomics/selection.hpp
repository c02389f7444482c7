#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radiomics/dataset.hpp"

namespace radiomics {

struct RankedFeature {
    std::string name;
    double score = 0.0;  // in (0, 1], nonincreasing down the ranking
};

struct RankedFeatures {
    std::vector<RankedFeature> ranked;
    double threshold_used = 0.0;
};

enum class TestKind { Welch, MannWhitney };

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    TestKind kind = TestKind::MannWhitney;
};

// Small CART classifier (gini impurity, axis-aligned splits) used by the
// importance ranking.
struct DecisionTreeParams {
    int max_depth = 3;
    int min_leaf = 2;
};

struct DecisionTreeNode {
    int feature = -1;          // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    int predicted = 0;
};

struct DecisionTree {
    std::vector<DecisionTreeNode> nodes;
    int predict(const std::vector<double>& x) const;
};

DecisionTree decision_tree_train(const std::vector<std::vector<double>>& x,
                                 const std::vector<int>& y, const DecisionTreeParams& params);

// Backward elimination: repeatedly evaluate cv-fold mean F1 with each single
// feature removed and permanently drop the feature whose removal costs the
// least; the reversed elimination order is the ranking. The score of the
// feature at rank r (1-based) among m features is (m - r + 1) / m, so the
// top feature always scores 1.
struct ImportanceParams {
    int cv_folds = 5;
    DecisionTreeParams tree;
};

RankedFeatures rank_by_f1_importance(const LabeledDataset& data, const ImportanceParams& params,
                                     std::uint64_t seed);

// Features scoring >= threshold, rank order preserved. Falls back to the
// single top feature (with a stderr warning) when nothing passes.
std::vector<std::string> select_top(const RankedFeatures& ranked, double threshold);

// Welch's two-sided t-test or two-sided Mann-Whitney U. Mann-Whitney uses the
// exact null distribution when n_a + n_b <= 12 and there are no ties, and the
// tie-corrected, continuity-corrected normal approximation otherwise.
TestResult two_sample_test(const std::vector<double>& group_a, const std::vector<double>& group_b,
                           TestKind kind);

struct FeatureTest {
    std::string name;
    TestResult result;
};

// Keeps features whose two-sided p < alpha, sorted ascending by p.
std::vector<FeatureTest> significance_filter(const LabeledDataset& data,
                                             const std::vector<std::string>& features,
                                             double alpha = 0.05,
                                             TestKind kind = TestKind::MannWhitney);

// Mean F1 (positive class = 1) of a decision tree under stratified cv-fold
// cross validation; exposed for the selection tests.
double cv_mean_f1(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                  const std::vector<std::size_t>& feature_subset, const ImportanceParams& params,
                  std::uint64_t seed);

} // namespace radiomics
