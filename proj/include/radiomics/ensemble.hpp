#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radiomics/dataset.hpp"
#include "radiomics/gbdt.hpp"

namespace radiomics {

// One balanced training subset: a disjoint chunk of the majority class joined
// with every minority row.
struct BalancedSubset {
    std::vector<std::size_t> majority_rows;  // indices into the source dataset
    std::vector<std::size_t> minority_rows;
    std::vector<std::size_t> all_rows() const;
};

// The majority class is shuffled by seed and split into ceil(|N1|/|N0|)
// chunks of size |N0| (the last may be smaller); each chunk is joined with
// all minority rows. The chunks cover the majority class exactly.
std::vector<BalancedSubset> balanced_subsets(const LabeledDataset& data, std::uint64_t seed);

struct EnsembleMember {
    GbdtModel model;
    int iteration = 0;
    int fold = 0;
    int subset = 0;
};

// Aggregation is the unweighted mean of member probabilities.
struct Ensemble {
    std::vector<EnsembleMember> members;
    std::vector<std::string> feature_names;
    double predict_probability(const std::vector<double>& x) const;
};

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;
};

struct Metrics {
    MetricSummary auc;
    MetricSummary accuracy;  // percent
    MetricSummary ppv;
    MetricSummary fpr;
    std::vector<double> auc_values;  // one per (iteration, fold) evaluation
    std::vector<double> accuracy_values;
    std::vector<double> ppv_values;
    std::vector<double> fpr_values;
};

struct EvalResult {
    double auc = 0.0;
    double accuracy = 0.0;  // percent
    double ppv = 0.0;
    double fpr = 0.0;
};

// AUC by the midrank formula (ties count half); accuracy/ppv/fpr from the
// confusion matrix at threshold 0.5.
EvalResult evaluate(const std::vector<double>& scores, const std::vector<int>& labels);

struct TrainParams {
    int folds = 5;
    int iterations = 25;
    GbdtParams gbdt;
    int threads = 1;
};

enum class Sampler { RepeatedRandomSubsampling, Smote, Adasyn };
Sampler sampler_from_name(const std::string& name);
const char* sampler_name(Sampler s);

// Repeated stratified n-fold cross validation: per iteration, per held-out
// fold, the training folds are balanced (per the sampler) and one GBDT is
// trained per balanced subset; the fold prediction is the mean member
// probability. Metrics aggregate over all (iteration, fold) evaluations.
std::pair<Ensemble, Metrics> train_ensemble(const LabeledDataset& data, const TrainParams& params,
                                            std::uint64_t seed,
                                            Sampler sampler = Sampler::RepeatedRandomSubsampling);

// Classic SMOTE: synthetic minority rows by convex interpolation toward one
// of the k nearest minority neighbors until the classes balance.
LabeledDataset smote_oversample(const LabeledDataset& data, int k, std::uint64_t seed);

// ADASYN: per-minority generation counts proportional to the local majority
// fraction among the k nearest neighbors in the full dataset, then
// SMOTE-style interpolation.
LabeledDataset adasyn_oversample(const LabeledDataset& data, int k, std::uint64_t seed);

} // namespace radiomics
