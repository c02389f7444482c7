#include "radiomics/survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "radiomics/errors.hpp"
#include "radiomics/math_utils.hpp"
#include "radiomics/parallel.hpp"

namespace radiomics {

double clayton_tau(double alpha) {
    if (alpha < 0.0) throw data_error("clayton_tau: alpha must be >= 0");
    return alpha / (alpha + 2.0);
}

double clayton_alpha(double tau) {
    if (tau < 0.0 || tau >= 1.0) throw data_error("clayton_alpha: tau must lie in [0, 1)");
    return 2.0 * tau / (1.0 - tau);
}

CopulaParams copula_params_from_alpha(double alpha) {
    return {alpha, clayton_tau(alpha)};
}

double SurvivalCurve::eval(double t) const {
    // right-continuous step function, S = 1 before the first event time
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 1.0;
    return survival[static_cast<std::size_t>(it - times.begin()) - 1];
}

namespace {

void check_records(const std::vector<double>& time, const std::vector<int>& event) {
    if (time.empty() || time.size() != event.size())
        throw data_error("survival records must be nonempty with matching time/event lengths");
    for (std::size_t i = 0; i < time.size(); ++i) {
        if (!(time[i] > 0.0) || !std::isfinite(time[i]))
            throw data_error("survival time must be > 0 (record " + std::to_string(i) + ")");
        if (event[i] != 0 && event[i] != 1)
            throw data_error("event indicator must be 0 or 1 (record " + std::to_string(i) + ")");
    }
}

// Sorted record order with events before censorings at tied times.
std::vector<std::size_t> survival_order(const std::vector<double>& time,
                                        const std::vector<int>& event) {
    std::vector<std::size_t> order(time.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (time[a] != time[b]) return time[a] < time[b];
        return event[a] > event[b];
    });
    return order;
}

} // namespace

SurvivalCurve kaplan_meier(const std::vector<double>& time, const std::vector<int>& event) {
    check_records(time, event);
    const std::vector<std::size_t> order = survival_order(time, event);
    const std::size_t n = time.size();

    SurvivalCurve curve;
    double s = 1.0;
    std::size_t i = 0;
    while (i < n) {
        const double t = time[order[i]];
        std::size_t at_risk = n - i;
        std::size_t deaths = 0;
        std::size_t j = i;
        while (j < n && time[order[j]] == t) {
            deaths += static_cast<std::size_t>(event[order[j]]);
            ++j;
        }
        if (deaths > 0) {
            s *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
            curve.times.push_back(t);
            curve.survival.push_back(std::max(0.0, s));
        }
        i = j;
    }
    return curve;
}

namespace {

// Clayton generator phi(s) = (s^-alpha - 1)/alpha, phi(s) = -log s at alpha=0.
double clayton_phi(double s, double alpha) {
    if (s <= 0.0) return std::numeric_limits<double>::infinity();
    if (alpha == 0.0) return -std::log(s);
    return std::expm1(-alpha * std::log(s)) / alpha;
}

double clayton_phi_inverse(double v, double alpha) {
    if (std::isinf(v)) return 0.0;
    if (alpha == 0.0) return std::exp(-v);
    return std::pow(1.0 + alpha * v, -1.0 / alpha);
}

} // namespace

SurvivalCurve copula_graphic(const std::vector<double>& time, const std::vector<int>& event,
                             double alpha) {
    check_records(time, event);
    if (alpha < 0.0) throw data_error("copula_graphic: alpha must be >= 0");
    const std::vector<std::size_t> order = survival_order(time, event);
    const std::size_t n = time.size();
    const double dn = static_cast<double>(n);

    SurvivalCurve curve;
    double acc = 0.0;  // running sum of phi(pi(y_i)) - phi(pi(y_i^-)) over events
    double last_s = 1.0;
    std::size_t i = 0;
    while (i < n) {
        const double t = time[order[i]];
        bool any_event = false;
        std::size_t j = i;
        while (j < n && time[order[j]] == t) {
            const std::size_t remaining_before = n - j;  // records with y >= t not yet passed
            if (event[order[j]] == 1) {
                const double pi_before = static_cast<double>(remaining_before) / dn;
                const double pi_after = static_cast<double>(remaining_before - 1) / dn;
                acc += clayton_phi(pi_after, alpha) - clayton_phi(pi_before, alpha);
                any_event = true;
            }
            ++j;
        }
        if (any_event) {
            double s = clayton_phi_inverse(acc, alpha);
            s = std::min(s, last_s);  // forced nonincreasing
            s = std::clamp(s, 0.0, 1.0);
            curve.times.push_back(t);
            curve.survival.push_back(s);
            last_s = s;
        }
        i = j;
    }
    return curve;
}

std::vector<double> SurvivalDataset::column(std::size_t c) const {
    std::vector<double> out;
    out.reserve(x.size());
    for (const auto& row : x) out.push_back(row[c]);
    return out;
}

// ---------------------------------------------------------------------------
// Dependent-censoring likelihood (Weibull margins, Clayton copula)
//
// Cumulative hazards: L_T = lambda_T y^{k_T} e^{beta x}, L_U analogous.
// With u = exp(-L_T), v = exp(-L_U) and A = e^{alpha L_T} + e^{alpha L_U} - 1:
//   event:  l = log k_T - log y + log L_T + alpha L_T - (1 + 1/alpha) log A
//   censor: l = log k_U - log y + log L_U + alpha L_U - (1 + 1/alpha) log A
// which reduce at alpha = 0 to log f_T + log S_U and log f_U + log S_T.
// ---------------------------------------------------------------------------

namespace {

constexpr double kLogHazardCap = 690.0;  // exp() overflow guard

struct RecordTerms {
    double log_lam_t, lam_t;  // cumulative hazards at y
    double log_lam_u, lam_u;
    double w_t, w_u;          // e^{alpha L}/A
    double log_a;
    bool valid;
};

RecordTerms record_terms(double y, double xv, double alpha, const std::array<double, 6>& p) {
    RecordTerms t{};
    const double log_y = std::log(y);
    const double k_t = std::exp(p[1]);
    const double k_u = std::exp(p[4]);
    t.log_lam_t = p[0] + k_t * log_y + p[2] * xv;
    t.log_lam_u = p[3] + k_u * log_y + p[5] * xv;
    if (t.log_lam_t > kLogHazardCap || t.log_lam_u > kLogHazardCap ||
        !std::isfinite(t.log_lam_t) || !std::isfinite(t.log_lam_u)) {
        t.valid = false;
        return t;
    }
    t.lam_t = std::exp(t.log_lam_t);
    t.lam_u = std::exp(t.log_lam_u);
    if (alpha == 0.0) {
        t.w_t = 1.0;
        t.w_u = 1.0;
        t.log_a = 0.0;
    } else {
        const double at = alpha * t.lam_t;
        const double au = alpha * t.lam_u;
        const double mx = std::max(at, au);
        t.log_a = mx + std::log(std::exp(at - mx) + std::exp(au - mx) - std::exp(-mx));
        t.w_t = std::exp(at - t.log_a);
        t.w_u = std::exp(au - t.log_a);
    }
    t.valid = true;
    return t;
}

} // namespace

double dependent_cox_loglik(const std::vector<double>& time, const std::vector<int>& event,
                            const std::vector<double>& x, double alpha,
                            const std::array<double, 6>& p) {
    double ll = 0.0;
    for (std::size_t i = 0; i < time.size(); ++i) {
        const RecordTerms t = record_terms(time[i], x[i], alpha, p);
        if (!t.valid) return -std::numeric_limits<double>::infinity();
        const double log_y = std::log(time[i]);
        if (event[i] == 1) {
            ll += p[1] - log_y + t.log_lam_t;
            if (alpha == 0.0)
                ll += -t.lam_t - t.lam_u;
            else
                ll += alpha * t.lam_t - (1.0 + 1.0 / alpha) * t.log_a;
        } else {
            ll += p[4] - log_y + t.log_lam_u;
            if (alpha == 0.0)
                ll += -t.lam_u - t.lam_t;
            else
                ll += alpha * t.lam_u - (1.0 + 1.0 / alpha) * t.log_a;
        }
        if (!std::isfinite(ll)) return -std::numeric_limits<double>::infinity();
    }
    return ll;
}

std::array<double, 6> dependent_cox_gradient(const std::vector<double>& time,
                                             const std::vector<int>& event,
                                             const std::vector<double>& x, double alpha,
                                             const std::array<double, 6>& p) {
    std::array<double, 6> g{};
    const double k_t = std::exp(p[1]);
    const double k_u = std::exp(p[4]);
    for (std::size_t i = 0; i < time.size(); ++i) {
        const RecordTerms t = record_terms(time[i], x[i], alpha, p);
        if (!t.valid) throw numeric_error("dependent_cox_gradient: parameters out of range");
        const double log_y = std::log(time[i]);
        // (dl/dL) * L for the observed margin is 1 + (alpha - (alpha+1) w) L,
        // written without the 1/L factor so an underflowing L stays finite
        if (event[i] == 1) {
            const double own = 1.0 + (alpha - (alpha + 1.0) * t.w_t) * t.lam_t;
            const double other = -(alpha + 1.0) * t.w_u * t.lam_u;
            g[0] += own;
            g[1] += own * k_t * log_y + 1.0;
            g[2] += own * x[i];
            g[3] += other;
            g[4] += other * k_u * log_y;
            g[5] += other * x[i];
        } else {
            const double own = 1.0 + (alpha - (alpha + 1.0) * t.w_u) * t.lam_u;
            const double other = -(alpha + 1.0) * t.w_t * t.lam_t;
            g[3] += own;
            g[4] += own * k_u * log_y + 1.0;
            g[5] += own * x[i];
            g[0] += other;
            g[1] += other * k_t * log_y;
            g[2] += other * x[i];
        }
    }
    return g;
}

namespace {

// Dense symmetric solve via Gaussian elimination with partial pivoting.
// Returns false when the system is singular.
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& out) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (std::fabs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    out.assign(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t c = r + 1; c < n; ++c) s -= a[r][c] * out[c];
        out[r] = s / a[r][r];
    }
    return true;
}

bool invert_matrix(const std::vector<std::vector<double>>& a,
                   std::vector<std::vector<double>>& inv) {
    const std::size_t n = a.size();
    inv.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<double> e(n, 0.0), sol;
        e[col] = 1.0;
        if (!solve_linear(a, e, sol)) return false;
        for (std::size_t r = 0; r < n; ++r) inv[r][col] = sol[r];
    }
    return true;
}

// Generic damped-Newton maximizer over a subset of the 6 parameters.
// Hessian by central differences of the analytic gradient; Levenberg damping
// plus backtracking keep every accepted step an improvement.
struct NewtonProblem {
    const std::vector<double>& time;
    const std::vector<int>& event;
    const std::vector<double>& x;
    double alpha;
    std::vector<int> active;  // indices into the 6-vector
};

struct NewtonResult {
    std::array<double, 6> params;
    std::vector<std::vector<double>> info;  // observed information of active block
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
};

NewtonResult newton_maximize(const NewtonProblem& prob, std::array<double, 6> params,
                             const CoxFitOptions& options) {
    const std::size_t m = prob.active.size();
    auto loglik = [&](const std::array<double, 6>& p) {
        return dependent_cox_loglik(prob.time, prob.event, prob.x, prob.alpha, p);
    };
    auto grad_active = [&](const std::array<double, 6>& p) {
        const std::array<double, 6> g =
            dependent_cox_gradient(prob.time, prob.event, prob.x, prob.alpha, p);
        std::vector<double> out(m);
        for (std::size_t i = 0; i < m; ++i) out[i] = g[static_cast<std::size_t>(prob.active[i])];
        return out;
    };
    auto hessian_active = [&](const std::array<double, 6>& p) {
        std::vector<std::vector<double>> h(m, std::vector<double>(m, 0.0));
        for (std::size_t j = 0; j < m; ++j) {
            const int pj = prob.active[j];
            const double step =
                1e-5 * (1.0 + std::fabs(p[static_cast<std::size_t>(pj)]));
            std::array<double, 6> hi = p, lo = p;
            hi[static_cast<std::size_t>(pj)] += step;
            lo[static_cast<std::size_t>(pj)] -= step;
            const std::vector<double> gh = grad_active(hi);
            const std::vector<double> gl = grad_active(lo);
            for (std::size_t i = 0; i < m; ++i) h[i][j] = (gh[i] - gl[i]) / (2.0 * step);
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                const double v = 0.5 * (h[i][j] + h[j][i]);
                h[i][j] = h[j][i] = v;
            }
        return h;
    };

    NewtonResult res;
    double ll = loglik(params);
    if (!std::isfinite(ll)) throw numeric_error("dependent-cox fit: invalid starting point");

    // The attainable gradient norm is limited by round-off in the likelihood
    // sum, which grows with |ll|; the tolerance tracks that floor.
    auto converged_at = [&](double gnorm) {
        return gnorm < std::max(options.gradient_tol, 1e-9 * (1.0 + std::fabs(ll)));
    };

    // Levenberg-Marquardt damping carried across iterations: far from the
    // optimum -H need not be positive definite and the undamped Newton
    // direction can point downhill, so mu adapts instead of restarting.
    double mu = -1.0;  // initialized from the Hessian scale on first use
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        res.iterations = iter + 1;
        const std::vector<double> g = grad_active(params);
        double gnorm = 0.0;
        for (double v : g) gnorm = std::max(gnorm, std::fabs(v));
        if (converged_at(gnorm)) {
            res.converged = true;
            break;
        }
        const std::vector<std::vector<double>> h = hessian_active(params);
        double diag_scale = 1.0;
        for (std::size_t i = 0; i < m; ++i) diag_scale = std::max(diag_scale, std::fabs(h[i][i]));
        if (mu < 0.0) mu = 1e-4 * diag_scale;

        bool stepped = false;
        for (int attempt = 0; attempt < 60 && !stepped; ++attempt) {
            std::vector<std::vector<double>> b(m, std::vector<double>(m, 0.0));
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) b[i][j] = -h[i][j] + (i == j ? mu : 0.0);
            std::vector<double> step;
            if (solve_linear(b, g, step)) {
                double ascent = 0.0;
                for (std::size_t i = 0; i < m; ++i) ascent += g[i] * step[i];
                if (ascent > 0.0) {
                    double scale = 1.0;
                    for (int bt = 0; bt < 8 && !stepped; ++bt) {
                        std::array<double, 6> trial = params;
                        for (std::size_t i = 0; i < m; ++i)
                            trial[static_cast<std::size_t>(prob.active[i])] += scale * step[i];
                        const double trial_ll = loglik(trial);
                        if (std::isfinite(trial_ll) && trial_ll > ll) {
                            params = trial;
                            ll = trial_ll;
                            stepped = true;
                            mu = std::max(mu / 10.0, 1e-12 * diag_scale);
                        }
                        scale *= 0.5;
                    }
                }
            }
            if (!stepped) mu *= 10.0;
        }
        if (!stepped) break;  // stalled: polish phase below
    }

    if (!res.converged) {
        // Stalled: likelihood improvements are below round-off while the
        // gradient may still be above tolerance. Pure Newton steps accepted
        // on gradient-norm decrease push |g| to its rounding floor even when
        // loglik changes are unresolvable.
        std::vector<double> g = grad_active(params);
        auto norm_of = [](const std::vector<double>& v) {
            double n = 0.0;
            for (double e : v) n = std::max(n, std::fabs(e));
            return n;
        };
        double gnorm = norm_of(g);
        for (int polish = 0; polish < 12 && !converged_at(gnorm); ++polish) {
            const std::vector<std::vector<double>> h = hessian_active(params);
            double diag_scale = 1.0;
            for (std::size_t i = 0; i < m; ++i)
                diag_scale = std::max(diag_scale, std::fabs(h[i][i]));
            std::vector<std::vector<double>> b(m, std::vector<double>(m, 0.0));
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    b[i][j] = -h[i][j] + (i == j ? 1e-12 * diag_scale : 0.0);
            std::vector<double> step;
            if (!solve_linear(b, g, step)) break;
            std::array<double, 6> trial = params;
            for (std::size_t i = 0; i < m; ++i)
                trial[static_cast<std::size_t>(prob.active[i])] += step[i];
            if (!std::isfinite(loglik(trial))) break;
            std::vector<double> g_trial;
            try {
                g_trial = [&] {
                    const std::array<double, 6> gt =
                        dependent_cox_gradient(prob.time, prob.event, prob.x, prob.alpha, trial);
                    std::vector<double> out(m);
                    for (std::size_t i = 0; i < m; ++i)
                        out[i] = gt[static_cast<std::size_t>(prob.active[i])];
                    return out;
                }();
            } catch (const numeric_error&) {
                break;
            }
            if (norm_of(g_trial) >= gnorm) break;
            params = trial;
            g = std::move(g_trial);
            gnorm = norm_of(g);
        }
        ll = loglik(params);
        res.converged = converged_at(gnorm);
    }
    res.params = params;
    res.loglik = ll;
    const std::vector<std::vector<double>> h = hessian_active(params);
    res.info.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) res.info[i][j] = -h[i][j];
    return res;
}

std::array<double, 6> crude_start(const std::vector<double>& time, const std::vector<int>& event) {
    double exposure = 0.0;
    double n_event = 0.0, n_censor = 0.0;
    for (std::size_t i = 0; i < time.size(); ++i) {
        exposure += time[i];
        if (event[i] == 1) n_event += 1.0; else n_censor += 1.0;
    }
    std::array<double, 6> p{};
    p[0] = std::log(std::max(n_event, 0.5) / exposure);
    p[1] = 0.0;  // k_T = 1
    p[2] = 0.0;
    p[3] = std::log(std::max(n_censor, 0.5) / exposure);
    p[4] = 0.0;
    p[5] = 0.0;
    return p;
}

std::string format_params(const std::array<double, 6>& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i)
        s += (i ? ", " : "") + std::to_string(p[i]);
    return s + ")";
}

} // namespace

CoxFit fit_dependent_cox(const std::vector<double>& time, const std::vector<int>& event,
                         const std::vector<double>& x, double alpha,
                         const std::string& feature_name, const CoxFitOptions& options) {
    check_records(time, event);
    if (x.size() != time.size()) throw data_error("fit_dependent_cox: feature length mismatch");
    if (alpha < 0.0) throw data_error("fit_dependent_cox: alpha must be >= 0");
    if (variance_population(x) == 0.0)
        throw data_error("fit_dependent_cox: zero-variance feature" +
                         (feature_name.empty() ? "" : " '" + feature_name + "'"));
    int n_event = 0, n_censor = 0;
    for (int e : event) (e == 1 ? n_event : n_censor) += 1;
    if (n_event == 0) throw data_error("fit_dependent_cox: no observed events");
    if (alpha > 0.0 && n_censor == 0)
        throw data_error("fit_dependent_cox: alpha > 0 needs at least one censored record");

    CoxFit fit;
    fit.feature = feature_name;
    fit.alpha = alpha;

    std::array<double, 6> params = crude_start(time, event);

    // T margin alone (the likelihood at alpha = 0 factorizes).
    NewtonProblem t_prob{time, event, x, 0.0, {0, 1, 2}};
    NewtonResult t_res = newton_maximize(t_prob, params, options);
    if (!t_res.converged)
        throw numeric_error("dependent-cox T-margin fit did not converge after " +
                            std::to_string(options.max_iterations) +
                            " iterations; last iterate " + format_params(t_res.params));
    params = t_res.params;

    if (n_censor > 0) {
        NewtonProblem u_prob{time, event, x, 0.0, {3, 4, 5}};
        NewtonResult u_res = newton_maximize(u_prob, params, options);
        if (!u_res.converged)
            throw numeric_error("dependent-cox U-margin fit did not converge after " +
                                std::to_string(options.max_iterations) +
                                " iterations; last iterate " + format_params(u_res.params));
        params = u_res.params;
    }

    if (alpha == 0.0) {
        fit.params = params;
        fit.beta = params[2];
        std::vector<std::vector<double>> cov;
        if (!invert_matrix(t_res.info, cov) || cov[2][2] <= 0.0)
            throw numeric_error("dependent-cox fit: singular observed information");
        fit.se = std::sqrt(cov[2][2]);
        fit.p_value = 2.0 * (1.0 - normal_cdf(std::fabs(fit.beta / fit.se)));
        return fit;
    }

    NewtonProblem joint{time, event, x, alpha, {0, 1, 2, 3, 4, 5}};
    NewtonResult res = newton_maximize(joint, params, options);
    if (!res.converged)
        throw numeric_error("dependent-cox joint fit did not converge after " +
                            std::to_string(options.max_iterations) + " iterations; last iterate " +
                            format_params(res.params));
    fit.params = res.params;
    fit.beta = res.params[2];
    std::vector<std::vector<double>> cov;
    if (!invert_matrix(res.info, cov) || cov[2][2] <= 0.0)
        throw numeric_error("dependent-cox fit: singular observed information");
    fit.se = std::sqrt(cov[2][2]);
    fit.p_value = 2.0 * (1.0 - normal_cdf(std::fabs(fit.beta / fit.se)));
    return fit;
}

namespace {

struct Standardized {
    std::vector<double> values;
    double mean = 0.0;
    double sd = 1.0;
    bool constant = false;
};

Standardized standardize(const std::vector<double>& v) {
    Standardized s;
    s.mean = mean(v);
    const double var = variance_population(v);
    if (var == 0.0) {
        s.constant = true;
        return s;
    }
    s.sd = std::sqrt(var);
    s.values.reserve(v.size());
    for (double e : v) s.values.push_back((e - s.mean) / s.sd);
    return s;
}

} // namespace

std::vector<CoxFit> select_survival_features(const SurvivalDataset& data, double alpha,
                                             double p_threshold, const CoxFitOptions& options) {
    std::vector<CoxFit> kept;
    for (std::size_t c = 0; c < data.feature_names.size(); ++c) {
        const Standardized s = standardize(data.column(c));
        if (s.constant) continue;
        CoxFit fit;
        try {
            fit = fit_dependent_cox(data.time, data.event, s.values, alpha,
                                    data.feature_names[c], options);
        } catch (const numeric_error&) {
            continue;  // a feature the optimizer cannot fit is simply not selected
        }
        if (fit.p_value < p_threshold) kept.push_back(std::move(fit));
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const CoxFit& a, const CoxFit& b) { return a.p_value < b.p_value; });
    return kept;
}

PrognosticModel build_prognostic_model(const SurvivalDataset& data,
                                       const std::vector<CoxFit>& fits, std::size_t top_k) {
    PrognosticModel model;
    for (std::size_t i = 0; i < fits.size() && i < top_k; ++i) {
        const std::size_t c = std::find(data.feature_names.begin(), data.feature_names.end(),
                                        fits[i].feature) -
                              data.feature_names.begin();
        if (c == data.feature_names.size())
            throw data_error("prognostic model: feature '" + fits[i].feature +
                             "' not present in the dataset");
        const Standardized s = standardize(data.column(c));
        model.terms.push_back({fits[i].feature, fits[i].beta, s.mean, s.sd});
    }
    std::vector<double> pis;
    pis.reserve(data.n());
    for (std::size_t i = 0; i < data.n(); ++i)
        pis.push_back(prognostic_index(model, data.feature_names, data.x[i]));
    std::vector<double> sorted(pis);
    std::sort(sorted.begin(), sorted.end());
    model.pi_threshold = sorted.empty() ? 0.0 : sorted[(sorted.size() - 1) / 2];
    return model;
}

double prognostic_index(const PrognosticModel& model, const std::vector<std::string>& names,
                        const std::vector<double>& row) {
    double pi = 0.0;
    for (const PrognosticTerm& term : model.terms) {
        const auto it = std::find(names.begin(), names.end(), term.feature);
        if (it == names.end())
            throw data_error("prognostic_index: missing feature '" + term.feature + "'");
        const double v = row[static_cast<std::size_t>(it - names.begin())];
        pi += term.beta * (v - term.mean) / term.sd;
    }
    return pi;
}

double c_index(const std::vector<double>& time, const std::vector<int>& event,
               const std::vector<double>& pi) {
    check_records(time, event);
    if (pi.size() != time.size()) throw data_error("c_index: pi length mismatch");
    double comparable = 0.0, score = 0.0;
    for (std::size_t i = 0; i < time.size(); ++i) {
        if (event[i] != 1) continue;
        for (std::size_t j = 0; j < time.size(); ++j) {
            if (time[i] >= time[j]) continue;  // comparable: y_i < y_j, event_i = 1
            comparable += 1.0;
            if (pi[i] > pi[j]) score += 1.0;
            else if (pi[i] == pi[j]) score += 0.5;
        }
    }
    if (comparable == 0.0) throw data_error("c_index: no comparable pairs");
    return score / comparable;
}

namespace {

std::vector<int> event_stratified_folds(const SurvivalDataset& data, int folds,
                                        std::uint64_t seed) {
    std::vector<std::size_t> order(data.n());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (data.time[a] != data.time[b]) return data.time[a] < data.time[b];
        if (data.event[a] != data.event[b]) return data.event[a] < data.event[b];
        return data.x[a] < data.x[b];
    });
    std::vector<std::size_t> deaths, censored;
    for (std::size_t i : order) (data.event[i] == 1 ? deaths : censored).push_back(i);
    Rng rng(seed);
    rng.shuffle(deaths);
    rng.shuffle(censored);
    std::vector<int> fold_of(data.n(), 0);
    int f = 0;
    for (std::size_t i : deaths) fold_of[i] = f++ % folds;
    f = 0;
    for (std::size_t i : censored) fold_of[i] = f++ % folds;
    return fold_of;
}

SurvivalDataset subset_rows(const SurvivalDataset& data, const std::vector<std::size_t>& rows) {
    SurvivalDataset out;
    out.feature_names = data.feature_names;
    for (std::size_t i : rows) {
        if (!data.ids.empty()) out.ids.push_back(data.ids[i]);
        out.time.push_back(data.time[i]);
        out.event.push_back(data.event[i]);
        out.x.push_back(data.x[i]);
    }
    return out;
}

} // namespace

CvCIndexResult cv_c_index(const SurvivalDataset& data, const std::vector<double>& alpha_grid,
                          int folds, double p_threshold, std::uint64_t seed, int threads,
                          const CoxFitOptions& options) {
    if (alpha_grid.empty()) throw data_error("cv_c_index: empty alpha grid");
    if (folds < 2) throw data_error("cv_c_index: folds must be >= 2");
    int n_event = 0;
    for (int e : data.event) n_event += e;
    if (n_event < folds || static_cast<int>(data.n()) - n_event < folds)
        throw data_error("cv_c_index: " + std::to_string(folds) +
                         "-fold split infeasible with " + std::to_string(n_event) + " events / " +
                         std::to_string(data.n() - static_cast<std::size_t>(n_event)) +
                         " censored records");

    const std::vector<int> fold_of = event_stratified_folds(data, folds, seed);
    std::vector<std::vector<std::size_t>> train_rows(static_cast<std::size_t>(folds));
    std::vector<std::vector<std::size_t>> test_rows(static_cast<std::size_t>(folds));
    for (std::size_t i = 0; i < data.n(); ++i)
        for (int f = 0; f < folds; ++f)
            (fold_of[i] == f ? test_rows : train_rows)[static_cast<std::size_t>(f)].push_back(i);

    const std::size_t tasks = alpha_grid.size() * static_cast<std::size_t>(folds);
    std::vector<double> fold_c(tasks, 0.0);
    parallel_for(tasks, threads, [&](std::size_t task) {
        const std::size_t ai = task / static_cast<std::size_t>(folds);
        const std::size_t f = task % static_cast<std::size_t>(folds);
        const double alpha = alpha_grid[ai];
        const SurvivalDataset train = subset_rows(data, train_rows[f]);
        const SurvivalDataset test = subset_rows(data, test_rows[f]);
        const std::vector<CoxFit> fits =
            select_survival_features(train, alpha, p_threshold, options);
        const PrognosticModel model = build_prognostic_model(train, fits, fits.size());
        std::vector<double> pi;
        pi.reserve(test.n());
        for (std::size_t i = 0; i < test.n(); ++i)
            pi.push_back(prognostic_index(model, test.feature_names, test.x[i]));
        fold_c[task] = c_index(test.time, test.event, pi);
    });

    CvCIndexResult res;
    double best = -1.0;
    for (std::size_t ai = 0; ai < alpha_grid.size(); ++ai) {
        double sum = 0.0;
        for (int f = 0; f < folds; ++f)
            sum += fold_c[ai * static_cast<std::size_t>(folds) + static_cast<std::size_t>(f)];
        const double mean_c = sum / folds;
        res.curve.emplace_back(alpha_grid[ai], mean_c);
        if (mean_c > best) {  // strict: smallest alpha wins ties
            best = mean_c;
            res.best_alpha = alpha_grid[ai];
        }
    }
    return res;
}

namespace {

double separation_statistic(const std::vector<double>& time, const std::vector<int>& event,
                            const std::vector<int>& poor, double alpha,
                            const std::vector<double>& grid) {
    std::vector<double> tg, tp;
    std::vector<int> eg, ep;
    for (std::size_t i = 0; i < time.size(); ++i) {
        if (poor[i] == 1) {
            tp.push_back(time[i]);
            ep.push_back(event[i]);
        } else {
            tg.push_back(time[i]);
            eg.push_back(event[i]);
        }
    }
    const SurvivalCurve good = copula_graphic(tg, eg, alpha);
    const SurvivalCurve bad = copula_graphic(tp, ep, alpha);
    double acc = 0.0;
    for (double t : grid) acc += std::fabs(good.eval(t) - bad.eval(t));
    return acc / static_cast<double>(grid.size());
}

} // namespace

SeparationResult curve_separation(const std::vector<double>& time, const std::vector<int>& event,
                                  const std::vector<double>& pi, double alpha, int n_permutations,
                                  std::uint64_t seed, int threads) {
    check_records(time, event);
    if (pi.size() != time.size()) throw data_error("curve_separation: pi length mismatch");
    if (n_permutations < 1) throw data_error("curve_separation: n_permutations must be >= 1");

    std::vector<double> sorted_pi(pi);
    std::sort(sorted_pi.begin(), sorted_pi.end());
    if (sorted_pi.front() == sorted_pi.back())
        throw data_error("curve_separation: degenerate group (all PI values identical)");
    const double median = sorted_pi[(sorted_pi.size() - 1) / 2];

    std::vector<int> poor(pi.size(), 0);
    std::size_t n_poor = 0;
    for (std::size_t i = 0; i < pi.size(); ++i)
        if (pi[i] > median) {
            poor[i] = 1;
            ++n_poor;
        }
    const std::size_t n_good = pi.size() - n_poor;
    if (n_poor < 2 || n_good < 2)
        throw data_error("curve_separation: needs >= 2 records per group after the median split");

    std::vector<double> grid;
    for (std::size_t i = 0; i < time.size(); ++i)
        if (event[i] == 1) grid.push_back(time[i]);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty()) throw data_error("curve_separation: no observed events");

    SeparationResult res;
    res.poor_group = poor;
    res.statistic = separation_statistic(time, event, poor, alpha, grid);
    {
        std::vector<double> tg, tp;
        std::vector<int> eg, ep;
        for (std::size_t i = 0; i < time.size(); ++i) {
            if (poor[i] == 1) {
                tp.push_back(time[i]);
                ep.push_back(event[i]);
            } else {
                tg.push_back(time[i]);
                eg.push_back(event[i]);
            }
        }
        res.good_curve = copula_graphic(tg, eg, alpha);
        res.poor_curve = copula_graphic(tp, ep, alpha);
    }

    std::vector<int> exceed(static_cast<std::size_t>(n_permutations), 0);
    parallel_for(static_cast<std::size_t>(n_permutations), threads, [&](std::size_t p) {
        Rng rng(Rng::mix(seed, p));
        std::vector<int> labels(poor);
        rng.shuffle(labels);
        const double stat = separation_statistic(time, event, labels, alpha, grid);
        exceed[p] = stat >= res.statistic ? 1 : 0;
    });
    int count = 0;
    for (int e : exceed) count += e;
    res.p_value = (1.0 + count) / (1.0 + n_permutations);
    return res;
}

std::pair<double, double> sample_clayton_pair(Rng& rng, double alpha) {
    const double log_u = std::log(rng.uniform_open());
    const double w = rng.uniform_open();
    if (alpha == 0.0) return {log_u, std::log(w)};
    // conditional inverse: v = [u^-a (w^{-a/(a+1)} - 1) + 1]^{-1/a}, in logs
    const double c = alpha / (alpha + 1.0);
    const double t1 = -alpha * log_u;                       // log u^-a
    const double t2 = std::log(std::expm1(-c * std::log(w)));  // log (w^-c - 1)
    const double s = t1 + t2;
    // log(exp(s) + 1) computed stably
    const double log_sum = s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    return {log_u, -log_sum / alpha};
}

} // namespace radiomics
