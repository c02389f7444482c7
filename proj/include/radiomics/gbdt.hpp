#pragma once

#include <cstdint>
#include <vector>

namespace radiomics {

struct GbdtParams {
    int trees = 200;
    int max_depth = 4;
    double learning_rate = 0.1;
    int min_leaf = 2;
};

struct GbdtNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;  // leaf value (Newton step), already line-search scaled
};

struct GbdtTree {
    std::vector<GbdtNode> nodes;
    double predict(const std::vector<double>& x) const;
};

// Logistic-loss gradient boosting. The initial score is the prior log-odds;
// each round fits the negative gradients with a greedy variance-reduction
// regression tree and Newton leaf values. A step-halving check after each
// round keeps the training log-loss nonincreasing; a tree that cannot improve
// the loss is dropped (all-zero leaves), so a constant-feature dataset
// degenerates to the prior.
struct GbdtModel {
    double init_score = 0.0;  // prior log-odds
    double learning_rate = 0.1;
    std::vector<GbdtTree> trees;
    std::vector<double> train_logloss;  // loss after each accepted round

    // P(y = 1 | x) = sigmoid(init + lr * sum of leaf values)
    double predict_probability(const std::vector<double>& x) const;
    double raw_score(const std::vector<double>& x) const;
};

// seed is reserved for stochastic variants (row/column subsampling); the
// default full-batch fit is deterministic and does not consume it.
GbdtModel gbdt_train(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     const GbdtParams& params, std::uint64_t seed);

double sigmoid(double z);

} // namespace radiomics
