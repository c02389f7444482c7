#include "radiomics/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "radiomics/errors.hpp"

namespace radiomics {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double GbdtTree::predict(const std::vector<double>& x) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
        const GbdtNode& n = nodes[static_cast<std::size_t>(id)];
        id = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(id)].value;
}

double GbdtModel::raw_score(const std::vector<double>& x) const {
    double s = init_score;
    for (const GbdtTree& t : trees) s += learning_rate * t.predict(x);
    return s;
}

double GbdtModel::predict_probability(const std::vector<double>& x) const {
    return sigmoid(raw_score(x));
}

namespace {

constexpr double kHessEps = 1e-12;

double logloss(const std::vector<int>& y, const std::vector<double>& score) {
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double p = sigmoid(score[i]);
        const double pc = std::clamp(p, 1e-15, 1.0 - 1e-15);
        loss -= y[i] == 1 ? std::log(pc) : std::log(1.0 - pc);
    }
    return loss / static_cast<double>(y.size());
}

struct NodeBuild {
    std::vector<int> rows;
    int depth = 0;
    int id = 0;
};

void build_tree(const std::vector<std::vector<double>>& x, const std::vector<double>& grad,
                const std::vector<double>& hess, const GbdtParams& params, GbdtTree& tree) {
    tree.nodes.emplace_back();
    std::vector<NodeBuild> stack;
    {
        NodeBuild root;
        root.rows.resize(x.size());
        std::iota(root.rows.begin(), root.rows.end(), 0);
        stack.push_back(std::move(root));
    }
    std::vector<std::pair<double, int>> order;
    while (!stack.empty()) {
        NodeBuild nb = std::move(stack.back());
        stack.pop_back();

        double g_sum = 0.0, h_sum = 0.0;
        for (int i : nb.rows) {
            g_sum += grad[static_cast<std::size_t>(i)];
            h_sum += hess[static_cast<std::size_t>(i)];
        }
        tree.nodes[static_cast<std::size_t>(nb.id)].value = -g_sum / (h_sum + kHessEps);

        if (nb.depth >= params.max_depth ||
            static_cast<int>(nb.rows.size()) < 2 * params.min_leaf)
            continue;

        const double parent_gain = g_sum * g_sum / (h_sum + kHessEps);
        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        const std::size_t n_features = x[0].size();
        for (std::size_t f = 0; f < n_features; ++f) {
            order.clear();
            for (int i : nb.rows) order.emplace_back(x[static_cast<std::size_t>(i)][f], i);
            std::sort(order.begin(), order.end());
            double gl = 0.0, hl = 0.0;
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                const int row = order[k].second;
                gl += grad[static_cast<std::size_t>(row)];
                hl += hess[static_cast<std::size_t>(row)];
                if (order[k].first == order[k + 1].first) continue;
                const int left_n = static_cast<int>(k) + 1;
                const int right_n = static_cast<int>(order.size()) - left_n;
                if (left_n < params.min_leaf || right_n < params.min_leaf) continue;
                const double gr = g_sum - gl, hr = h_sum - hl;
                const double gain =
                    gl * gl / (hl + kHessEps) + gr * gr / (hr + kHessEps) - parent_gain;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (order[k].first + order[k + 1].first);
                }
            }
        }
        if (best_feature < 0) continue;

        NodeBuild left, right;
        for (int i : nb.rows) {
            if (x[static_cast<std::size_t>(i)][static_cast<std::size_t>(best_feature)] <=
                best_threshold)
                left.rows.push_back(i);
            else
                right.rows.push_back(i);
        }
        left.depth = right.depth = nb.depth + 1;
        left.id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        right.id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        GbdtNode& self = tree.nodes[static_cast<std::size_t>(nb.id)];
        self.feature = best_feature;
        self.threshold = best_threshold;
        self.left = left.id;
        self.right = right.id;
        stack.push_back(std::move(left));
        stack.push_back(std::move(right));
    }
}

} // namespace

GbdtModel gbdt_train(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     const GbdtParams& params, std::uint64_t /*seed*/) {
    if (x.size() != y.size() || x.size() < 2)
        throw data_error("gbdt_train: need >= 2 rows with matching labels");
    int n1 = 0;
    for (int l : y) n1 += l;
    if (n1 == 0 || n1 == static_cast<int>(y.size()))
        throw data_error("gbdt_train: both classes must be present");

    GbdtModel model;
    model.learning_rate = params.learning_rate;
    const double prevalence = static_cast<double>(n1) / static_cast<double>(y.size());
    model.init_score = std::log(prevalence / (1.0 - prevalence));

    std::vector<double> score(y.size(), model.init_score);
    std::vector<double> grad(y.size()), hess(y.size());
    double current_loss = logloss(y, score);

    for (int round = 0; round < params.trees; ++round) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double p = sigmoid(score[i]);
            grad[i] = p - static_cast<double>(y[i]);
            hess[i] = p * (1.0 - p);
        }
        GbdtTree tree;
        build_tree(x, grad, hess, params, tree);

        // Step-halving guard: scale the tree until the training loss does not
        // increase; drop the tree if 30 halvings never help.
        std::vector<double> contribution(y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            contribution[i] = params.learning_rate * tree.predict(x[i]);
        double scale = 1.0;
        bool accepted = false;
        std::vector<double> trial(y.size());
        for (int attempt = 0; attempt < 30; ++attempt) {
            for (std::size_t i = 0; i < y.size(); ++i)
                trial[i] = score[i] + scale * contribution[i];
            const double trial_loss = logloss(y, trial);
            if (trial_loss <= current_loss) {
                current_loss = trial_loss;
                score = trial;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) {
            for (GbdtNode& n : tree.nodes) n.value = 0.0;
        } else if (scale != 1.0) {
            for (GbdtNode& n : tree.nodes) n.value *= scale;
        }
        model.trees.push_back(std::move(tree));
        model.train_logloss.push_back(current_loss);
    }
    return model;
}

} // namespace radiomics
