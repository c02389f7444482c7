#include "radiomics/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "radiomics/errors.hpp"
#include "radiomics/math_utils.hpp"
#include "radiomics/parallel.hpp"
#include "radiomics/rng.hpp"

namespace radiomics {

std::vector<std::size_t> BalancedSubset::all_rows() const {
    std::vector<std::size_t> rows(majority_rows);
    rows.insert(rows.end(), minority_rows.begin(), minority_rows.end());
    return rows;
}

namespace {

// Canonical row order (independent of incoming order) for seeded shuffles.
std::vector<std::size_t> canonical_order(const LabeledDataset& data) {
    std::vector<std::size_t> order(data.n_rows());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (data.patient_ids[a] != data.patient_ids[b])
            return data.patient_ids[a] < data.patient_ids[b];
        if (data.labels[a] != data.labels[b]) return data.labels[a] < data.labels[b];
        if (data.time_days[a] != data.time_days[b]) return data.time_days[a] < data.time_days[b];
        return data.rows[a] < data.rows[b];
    });
    return order;
}

} // namespace

std::vector<BalancedSubset> balanced_subsets(const LabeledDataset& data, std::uint64_t seed) {
    std::vector<std::size_t> class0, class1;
    for (std::size_t i : canonical_order(data))
        (data.labels[i] == 1 ? class1 : class0).push_back(i);
    if (class0.empty() || class1.empty())
        throw data_error("balanced_subsets: both classes must be present");

    // majority by size; label 1 wins ties
    std::vector<std::size_t>& majority = class1.size() >= class0.size() ? class1 : class0;
    std::vector<std::size_t>& minority = class1.size() >= class0.size() ? class0 : class1;

    Rng rng(seed);
    rng.shuffle(majority);

    const std::size_t chunk = minority.size();
    std::vector<BalancedSubset> subsets;
    for (std::size_t start = 0; start < majority.size(); start += chunk) {
        BalancedSubset s;
        const std::size_t end = std::min(majority.size(), start + chunk);
        s.majority_rows.assign(majority.begin() + static_cast<std::ptrdiff_t>(start),
                               majority.begin() + static_cast<std::ptrdiff_t>(end));
        s.minority_rows = minority;
        subsets.push_back(std::move(s));
    }
    return subsets;
}

double Ensemble::predict_probability(const std::vector<double>& x) const {
    if (members.empty()) throw data_error("empty ensemble");
    double sum = 0.0;
    for (const EnsembleMember& m : members) sum += m.model.predict_probability(x);
    return sum / static_cast<double>(members.size());
}

EvalResult evaluate(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw data_error("evaluate: scores and labels must be equal-length and nonempty");
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += static_cast<std::size_t>(l);
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw data_error("evaluate: AUC needs both classes present");

    // AUC via midranks: (sum of positive ranks - P(P+1)/2) / (P*N)
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(scores.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k) rank[order[k]] = midrank;
        i = j;
    }
    double pos_rank_sum = 0.0;
    for (std::size_t k = 0; k < labels.size(); ++k)
        if (labels[k] == 1) pos_rank_sum += rank[k];
    const double p = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    const double auc = (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * nn);

    int tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const bool predicted_pos = scores[k] >= 0.5;
        if (predicted_pos && labels[k] == 1) ++tp;
        else if (predicted_pos && labels[k] == 0) ++fp;
        else if (!predicted_pos && labels[k] == 0) ++tn;
        else ++fn;
    }
    EvalResult r;
    r.auc = auc;
    r.accuracy = 100.0 * static_cast<double>(tp + tn) / static_cast<double>(labels.size());
    r.ppv = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    r.fpr = (fp + tn) > 0 ? static_cast<double>(fp) / static_cast<double>(fp + tn) : 0.0;
    return r;
}

Sampler sampler_from_name(const std::string& name) {
    if (name == "rrs") return Sampler::RepeatedRandomSubsampling;
    if (name == "smote") return Sampler::Smote;
    if (name == "adasyn") return Sampler::Adasyn;
    throw data_error("unknown sampler '" + name + "' (expected rrs, smote or adasyn)");
}

const char* sampler_name(Sampler s) {
    switch (s) {
        case Sampler::RepeatedRandomSubsampling: return "rrs";
        case Sampler::Smote: return "smote";
        case Sampler::Adasyn: return "adasyn";
    }
    return "?";
}

namespace {

struct FoldEvaluation {
    EvalResult metrics;
    std::vector<EnsembleMember> members;
};

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    s.mean = mean(values);
    s.stddev = std::sqrt(variance_sample(values));
    return s;
}

std::vector<int> stratified_fold_assignment(const LabeledDataset& data, int folds,
                                            std::uint64_t seed) {
    std::vector<std::size_t> class0, class1;
    for (std::size_t i : canonical_order(data))
        (data.labels[i] == 1 ? class1 : class0).push_back(i);
    if (static_cast<int>(class0.size()) < folds || static_cast<int>(class1.size()) < folds)
        throw data_error("stratified " + std::to_string(folds) +
                         "-fold split infeasible: every class needs >= " + std::to_string(folds) +
                         " rows (have " + std::to_string(class0.size()) + " and " +
                         std::to_string(class1.size()) + ")");
    Rng rng(seed);
    rng.shuffle(class0);
    rng.shuffle(class1);
    std::vector<int> fold_of(data.n_rows(), 0);
    int f = 0;
    for (std::size_t i : class0) fold_of[i] = f++ % folds;
    f = 0;
    for (std::size_t i : class1) fold_of[i] = f++ % folds;
    return fold_of;
}

} // namespace

std::pair<Ensemble, Metrics> train_ensemble(const LabeledDataset& data, const TrainParams& params,
                                            std::uint64_t seed, Sampler sampler) {
    if (params.folds < 2) throw data_error("train_ensemble: folds must be >= 2");
    if (params.iterations < 1) throw data_error("train_ensemble: iterations must be >= 1");
    const std::vector<std::vector<double>> x_all = data.dense();

    const std::size_t n_eval = static_cast<std::size_t>(params.iterations) *
                               static_cast<std::size_t>(params.folds);
    std::vector<FoldEvaluation> evals(n_eval);

    parallel_for(static_cast<std::size_t>(params.iterations), params.threads, [&](std::size_t k) {
        const std::uint64_t iter_seed = Rng::mix(seed, k);
        const std::vector<int> fold_of =
            stratified_fold_assignment(data, params.folds, iter_seed);
        for (int fold = 0; fold < params.folds; ++fold) {
            std::vector<std::size_t> train_rows, test_rows;
            for (std::size_t i = 0; i < data.n_rows(); ++i)
                (fold_of[i] == fold ? test_rows : train_rows).push_back(i);
            const LabeledDataset train = data.select_rows(train_rows);
            const std::uint64_t fold_seed = Rng::mix(seed, k, static_cast<std::uint64_t>(fold));

            std::vector<EnsembleMember> members;
            if (sampler == Sampler::RepeatedRandomSubsampling) {
                const std::vector<BalancedSubset> subsets = balanced_subsets(train, fold_seed);
                for (std::size_t s = 0; s < subsets.size(); ++s) {
                    const std::vector<std::size_t> rows = subsets[s].all_rows();
                    std::vector<std::vector<double>> xs;
                    std::vector<int> ys;
                    xs.reserve(rows.size());
                    for (std::size_t i : rows) {
                        std::vector<double> row;
                        row.reserve(train.n_features());
                        for (const auto& c : train.rows[i]) row.push_back(*c);
                        xs.push_back(std::move(row));
                        ys.push_back(train.labels[i]);
                    }
                    EnsembleMember m;
                    m.model = gbdt_train(xs, ys, params.gbdt, Rng::mix(fold_seed, s));
                    m.iteration = static_cast<int>(k);
                    m.fold = fold;
                    m.subset = static_cast<int>(s);
                    members.push_back(std::move(m));
                }
            } else {
                const LabeledDataset balanced = sampler == Sampler::Smote
                                                    ? smote_oversample(train, 5, fold_seed)
                                                    : adasyn_oversample(train, 5, fold_seed);
                EnsembleMember m;
                m.model =
                    gbdt_train(balanced.dense(), balanced.labels, params.gbdt, fold_seed);
                m.iteration = static_cast<int>(k);
                m.fold = fold;
                m.subset = 0;
                members.push_back(std::move(m));
            }

            std::vector<double> scores;
            std::vector<int> labels;
            scores.reserve(test_rows.size());
            for (std::size_t i : test_rows) {
                double sum = 0.0;
                for (const EnsembleMember& m : members)
                    sum += m.model.predict_probability(x_all[i]);
                scores.push_back(sum / static_cast<double>(members.size()));
                labels.push_back(data.labels[i]);
            }
            FoldEvaluation& ev = evals[k * static_cast<std::size_t>(params.folds) +
                                       static_cast<std::size_t>(fold)];
            ev.metrics = evaluate(scores, labels);
            ev.members = std::move(members);
        }
    });

    Ensemble ensemble;
    ensemble.feature_names = data.feature_names;
    Metrics metrics;
    for (FoldEvaluation& ev : evals) {
        metrics.auc_values.push_back(ev.metrics.auc);
        metrics.accuracy_values.push_back(ev.metrics.accuracy);
        metrics.ppv_values.push_back(ev.metrics.ppv);
        metrics.fpr_values.push_back(ev.metrics.fpr);
        for (EnsembleMember& m : ev.members) ensemble.members.push_back(std::move(m));
    }
    metrics.auc = summarize(metrics.auc_values);
    metrics.accuracy = summarize(metrics.accuracy_values);
    metrics.ppv = summarize(metrics.ppv_values);
    metrics.fpr = summarize(metrics.fpr_values);
    return {std::move(ensemble), metrics};
}

namespace {

struct OversampleSetup {
    std::vector<std::size_t> minority;  // canonical-ordered row indices
    std::vector<std::size_t> majority;
    int minority_label = 0;
};

OversampleSetup oversample_setup(const LabeledDataset& data, int k) {
    OversampleSetup s;
    std::vector<std::size_t> class0, class1;
    for (std::size_t i : canonical_order(data))
        (data.labels[i] == 1 ? class1 : class0).push_back(i);
    if (class0.empty() || class1.empty())
        throw data_error("oversampling: both classes must be present");
    const bool label1_major = class1.size() >= class0.size();
    s.majority = label1_major ? class1 : class0;
    s.minority = label1_major ? class0 : class1;
    s.minority_label = label1_major ? 0 : 1;
    if (static_cast<int>(s.minority.size()) < k + 1)
        throw data_error("oversampling needs at least k+1 = " + std::to_string(k + 1) +
                         " minority rows (have " + std::to_string(s.minority.size()) + ")");
    return s;
}

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
}

// Indices (into `pool`) of the k nearest pool rows to x[self]; self excluded
// when present in pool. Ties break by pool position for determinism.
std::vector<std::size_t> k_nearest(const std::vector<std::vector<double>>& x,
                                   const std::vector<std::size_t>& pool, std::size_t self, int k) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(pool.size());
    for (std::size_t p = 0; p < pool.size(); ++p) {
        if (pool[p] == self) continue;
        dist.emplace_back(sq_distance(x[pool[p]], x[self]), p);
    }
    std::sort(dist.begin(), dist.end());
    std::vector<std::size_t> out;
    for (int i = 0; i < k && i < static_cast<int>(dist.size()); ++i)
        out.push_back(dist[static_cast<std::size_t>(i)].second);
    return out;
}

void append_synthetic(LabeledDataset& out, const std::vector<double>& row, int label,
                      std::size_t serial) {
    out.patient_ids.push_back("synth_" + std::to_string(serial));
    out.labels.push_back(label);
    out.time_days.push_back(0.0);
    out.censor.push_back(0);
    std::vector<std::optional<double>> cells;
    cells.reserve(row.size());
    for (double v : row) cells.emplace_back(v);
    out.rows.push_back(std::move(cells));
}

} // namespace

LabeledDataset smote_oversample(const LabeledDataset& data, int k, std::uint64_t seed) {
    const OversampleSetup s = oversample_setup(data, k);
    const std::size_t need = s.majority.size() - s.minority.size();
    LabeledDataset out = data;
    if (need == 0) return out;
    const std::vector<std::vector<double>> x = data.dense();

    std::vector<std::vector<std::size_t>> neighbors(s.minority.size());
    for (std::size_t i = 0; i < s.minority.size(); ++i)
        neighbors[i] = k_nearest(x, s.minority, s.minority[i], k);

    Rng rng(seed);
    for (std::size_t t = 0; t < need; ++t) {
        const std::size_t mi = t % s.minority.size();
        const std::size_t base = s.minority[mi];
        const std::vector<std::size_t>& nn = neighbors[mi];
        const std::size_t pick = nn[static_cast<std::size_t>(rng.uniform_int(nn.size()))];
        const std::size_t other = s.minority[pick];
        const double u = rng.uniform_open();
        std::vector<double> row(x[base].size());
        for (std::size_t c = 0; c < row.size(); ++c)
            row[c] = x[base][c] + u * (x[other][c] - x[base][c]);
        append_synthetic(out, row, s.minority_label, t);
    }
    out.validate();
    return out;
}

LabeledDataset adasyn_oversample(const LabeledDataset& data, int k, std::uint64_t seed) {
    const OversampleSetup s = oversample_setup(data, k);
    const std::size_t need = s.majority.size() - s.minority.size();
    LabeledDataset out = data;
    if (need == 0) return out;
    const std::vector<std::vector<double>> x = data.dense();

    std::vector<std::size_t> all_rows(data.n_rows());
    std::iota(all_rows.begin(), all_rows.end(), 0);

    // r_i = majority fraction among the k nearest neighbors in the full data
    std::vector<double> r(s.minority.size(), 0.0);
    double r_sum = 0.0;
    for (std::size_t i = 0; i < s.minority.size(); ++i) {
        const std::vector<std::size_t> nn = k_nearest(x, all_rows, s.minority[i], k);
        int n_major = 0;
        for (std::size_t p : nn)
            if (data.labels[all_rows[p]] != s.minority_label) ++n_major;
        r[i] = static_cast<double>(n_major) / static_cast<double>(nn.size());
        r_sum += r[i];
    }

    std::vector<std::size_t> counts(s.minority.size(), 0);
    if (r_sum == 0.0) {
        // perfectly separated classes: fall back to an even allocation
        for (std::size_t t = 0; t < need; ++t) ++counts[t % counts.size()];
    } else {
        std::size_t assigned = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            counts[i] = static_cast<std::size_t>(
                std::llround(r[i] / r_sum * static_cast<double>(need)));
            assigned += counts[i];
        }
        // rounding drift: trim or top up deterministically
        std::size_t i = 0;
        while (assigned > need) {
            if (counts[i % counts.size()] > 0) {
                --counts[i % counts.size()];
                --assigned;
            }
            ++i;
        }
        i = 0;
        while (assigned < need) {
            ++counts[i % counts.size()];
            ++assigned;
            ++i;
        }
    }

    std::vector<std::vector<std::size_t>> neighbors(s.minority.size());
    for (std::size_t i = 0; i < s.minority.size(); ++i)
        neighbors[i] = k_nearest(x, s.minority, s.minority[i], k);

    Rng rng(seed);
    std::size_t serial = 0;
    for (std::size_t mi = 0; mi < s.minority.size(); ++mi) {
        const std::size_t base = s.minority[mi];
        for (std::size_t t = 0; t < counts[mi]; ++t) {
            const std::vector<std::size_t>& nn = neighbors[mi];
            const std::size_t pick = nn[static_cast<std::size_t>(rng.uniform_int(nn.size()))];
            const std::size_t other = s.minority[pick];
            const double u = rng.uniform_open();
            std::vector<double> row(x[base].size());
            for (std::size_t c = 0; c < row.size(); ++c)
                row[c] = x[base][c] + u * (x[other][c] - x[base][c]);
            append_synthetic(out, row, s.minority_label, serial++);
        }
    }
    out.validate();
    return out;
}

} // namespace radiomics
