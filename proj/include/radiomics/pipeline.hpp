#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "radiomics/dataset.hpp"
#include "radiomics/ensemble.hpp"
#include "radiomics/features.hpp"
#include "radiomics/selection.hpp"
#include "radiomics/survival.hpp"

namespace radiomics {

struct PipelineConfig {
    std::uint64_t seed = 42;
    int threads = 1;

    // ingestion
    std::string volume_dir;
    std::string mask_dir;
    std::string clinical_csv;

    // extraction
    FeatureModel model = FeatureModel::MRF;
    int ng = 64;
    FractalOptions fractal;

    // selection
    double importance_threshold_mrf = 0.85;
    double importance_threshold_nfrf = 0.80;
    int importance_cv = 5;
    // Backward elimination is quadratic in the feature count; larger sets are
    // first reduced to this many candidates by a univariate screen.
    int importance_max_candidates = 64;
    double significance_alpha = 0.05;

    // ensemble
    int folds = 5;
    int iterations = 25;
    GbdtParams gbdt;
    Sampler sampler = Sampler::RepeatedRandomSubsampling;

    // survival
    std::vector<double> alpha_grid = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0, 18.0, 24.0};
    int survival_folds = 5;
    double survival_p_threshold = 0.05;
    int permutations = 2000;
    std::vector<int> top_k = {3, 5, 7, 10};

    double importance_threshold() const {
        return model == FeatureModel::MRF ? importance_threshold_mrf : importance_threshold_nfrf;
    }
};

// `key = value` lines, '#' comments; unknown keys are rejected.
void apply_config_file(PipelineConfig& config, const std::string& path);
// Canonical serialization of the semantic config (thread count excluded) and
// its hash, embedded in every report for provenance.
std::string config_canonical_string(const PipelineConfig& config);
std::string config_hash(const PipelineConfig& config);

struct ExtractSummary {
    int processed = 0;
    int skipped = 0;
    std::vector<std::string> warnings;
};

// One feature-CSV row per patient listed in the clinical CSV; per-patient
// failures are warnings, zero successes is an error.
ExtractSummary cmd_extract(const PipelineConfig& config, const std::string& out_csv);

// Selection (univariate screen, F1 backward elimination, importance
// threshold, significance filter) followed by repeated sub-sampling ensemble
// training; writes report JSON.
void cmd_classify(const PipelineConfig& config, const std::string& features_csv,
                  const std::string& out_report);

// Full survival pipeline: cross-validated c-index over the alpha grid,
// feature selection at the best alpha, prognostic-index split, dependent and
// independent survival curves, permutation separation test, and top-k
// dead/alive classification. Writes report.json plus curve CSVs to out_dir.
void cmd_survival(const PipelineConfig& config, const std::string& features_csv,
                  const std::string& out_dir);

struct SynthClassificationParams {
    int n_major = 143;
    int n_minor = 15;
    int n_features = 30;
    int n_signal = 5;
    double separation = 3.0;
    bool emit_volumes = false;  // volumes+masks instead of a feature CSV
    int volume_dim = 32;
};

struct SynthSurvivalParams {
    int n = 300;
    int n_features = 30;
    int n_signal = 3;
    double tau = 0.8;   // Clayton dependence of (T, U)
    double beta = 1.0;  // planted T-margin coefficient magnitude
};

void cmd_synth_classification(const PipelineConfig& config, const SynthClassificationParams& p,
                              const std::string& out_dir);
void cmd_synth_survival(const PipelineConfig& config, const SynthSurvivalParams& p,
                        const std::string& out_dir);

// Runs classify and/or survival on a feature CSV (whichever its columns
// support) and writes an index.json inventory.
void cmd_report(const PipelineConfig& config, const std::string& features_csv,
                const std::string& out_dir);

// Building blocks shared with the tests.
LabeledDataset synth_classification_dataset(const SynthClassificationParams& p,
                                            std::uint64_t seed);
struct SynthSurvivalResult {
    LabeledDataset dataset;
    std::vector<double> latent_t;
    std::vector<double> latent_u;
};
SynthSurvivalResult synth_survival_dataset(const SynthSurvivalParams& p, std::uint64_t seed);

struct SelectionOutcome {
    RankedFeatures ranked;
    std::vector<std::string> after_threshold;
    std::vector<FeatureTest> significant;
    std::vector<std::string> final_features;
    std::vector<std::string> warnings;
};
SelectionOutcome run_selection(const LabeledDataset& data, const PipelineConfig& config);

SurvivalDataset survival_dataset_from_labeled(const LabeledDataset& data);

} // namespace radiomics
