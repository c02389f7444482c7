#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "radiomics/rng.hpp"

namespace radiomics {

// Clayton dependence: Kendall's tau = alpha / (alpha + 2).
double clayton_tau(double alpha);
double clayton_alpha(double tau);

struct CopulaParams {
    double alpha = 0.0;
    double tau = 0.0;
};
CopulaParams copula_params_from_alpha(double alpha);

// Nonincreasing right-continuous step function with S(0) = 1; `times` holds
// the sorted distinct event times.
struct SurvivalCurve {
    std::vector<double> times;
    std::vector<double> survival;
    double eval(double t) const;
};

// Product-limit estimator; at tied times events precede censorings.
SurvivalCurve kaplan_meier(const std::vector<double>& time, const std::vector<int>& event);

// Archimedean copula-graphic estimator with the Clayton generator
// phi(t) = (t^-alpha - 1)/alpha (phi = -log t at alpha = 0); reduces exactly
// to Kaplan-Meier at alpha = 0.
SurvivalCurve copula_graphic(const std::vector<double>& time, const std::vector<int>& event,
                             double alpha);

// Survival rows with a shared feature matrix (row-major).
struct SurvivalDataset {
    std::vector<std::string> ids;
    std::vector<double> time;
    std::vector<int> event;  // 1 = death observed, 0 = censored
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> x;

    std::size_t n() const { return time.size(); }
    std::vector<double> column(std::size_t c) const;
};

struct CoxFit {
    std::string feature;
    double beta = 0.0;
    double se = 0.0;
    double p_value = 1.0;
    double alpha = 0.0;
    // (log lambda_T, log k_T, beta, log lambda_U, log k_U, gamma)
    std::array<double, 6> params{};
};

struct CoxFitOptions {
    int max_iterations = 500;
    double gradient_tol = 1e-6;
};

// Joint log-likelihood of the Weibull-margin Clayton model at the given
// parameter vector; exposed for the finite-difference gradient checks.
double dependent_cox_loglik(const std::vector<double>& time, const std::vector<int>& event,
                            const std::vector<double>& x, double alpha,
                            const std::array<double, 6>& params);
std::array<double, 6> dependent_cox_gradient(const std::vector<double>& time,
                                             const std::vector<int>& event,
                                             const std::vector<double>& x, double alpha,
                                             const std::array<double, 6>& params);

// Maximum-likelihood fit of the dependent-censoring model with Weibull
// margins S_T(t|x) = exp(-lambda_T t^k_T e^{beta x}) (and the U analogue)
// joined by the Clayton copula at `alpha`. At alpha = 0 the likelihood
// factorizes and each margin is fit independently. beta is the T-margin
// coefficient; the standard error comes from the observed information.
CoxFit fit_dependent_cox(const std::vector<double>& time, const std::vector<int>& event,
                         const std::vector<double>& x, double alpha,
                         const std::string& feature_name = "",
                         const CoxFitOptions& options = {});

// Univariate fits on standardized features; keeps p < p_threshold, sorted
// ascending by p. Zero-variance features are skipped.
std::vector<CoxFit> select_survival_features(const SurvivalDataset& data, double alpha,
                                             double p_threshold = 0.05,
                                             const CoxFitOptions& options = {});

struct PrognosticTerm {
    std::string feature;
    double beta = 0.0;
    double mean = 0.0;
    double sd = 1.0;
};

// PI(x) = sum of beta_j * standardized x_j; high PI = poor prognosis.
struct PrognosticModel {
    std::vector<PrognosticTerm> terms;
    double pi_threshold = 0.0;  // median PI of the fitting cohort
};

PrognosticModel build_prognostic_model(const SurvivalDataset& data,
                                       const std::vector<CoxFit>& fits, std::size_t top_k);

double prognostic_index(const PrognosticModel& model, const std::vector<std::string>& names,
                        const std::vector<double>& row);

// Harrell's concordance: pairs (i, j) with y_i < y_j and event_i = 1 are
// comparable; concordant when pi_i > pi_j; PI ties count 0.5.
double c_index(const std::vector<double>& time, const std::vector<int>& event,
               const std::vector<double>& pi);

struct CvCIndexResult {
    std::vector<std::pair<double, double>> curve;  // (alpha, mean held-out c-index)
    double best_alpha = 0.0;
};

// Per alpha: per fold, select features and fit on the training split, then
// score the held-out split; smallest alpha wins ties of the mean c-index.
CvCIndexResult cv_c_index(const SurvivalDataset& data, const std::vector<double>& alpha_grid,
                          int folds, double p_threshold, std::uint64_t seed, int threads = 1,
                          const CoxFitOptions& options = {});

struct SeparationResult {
    double statistic = 0.0;  // mean |S_good - S_poor| over the pooled event grid
    double p_value = 1.0;
    std::vector<int> poor_group;  // observed split: 1 = poor (PI above median)
    SurvivalCurve good_curve;
    SurvivalCurve poor_curve;
};

// Median-PI split, copula-graphic curves per group at `alpha`, and a
// permutation test that reshuffles the group labels preserving sizes.
// p = (1 + #{permuted >= observed}) / (1 + n_permutations).
SeparationResult curve_separation(const std::vector<double>& time, const std::vector<int>& event,
                                  const std::vector<double>& pi, double alpha, int n_permutations,
                                  std::uint64_t seed, int threads = 1);

// One Clayton-dependent pair of survival quantiles in log space:
// returns (log u, log v) with (u, v) ~ C_alpha via the conditional inverse.
std::pair<double, double> sample_clayton_pair(Rng& rng, double alpha);

} // namespace radiomics
