#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "seqsel/gibbs.hpp"
#include "seqsel/hmm.hpp"

namespace seqsel {

// Conditional log-likelihoods, one row per posterior draw: (s, t) holds
// log p(y_t | y_<t, theta^(s)). Variance-based consumers require S >= 2
// (S >= 4 for the autocorrelation machinery); the container itself allows
// any S >= 1 so shape plumbing stays testable.
struct LogLikMatrix {
    std::size_t S = 0;
    std::size_t n = 0;
    std::vector<double> values;  // S x n row-major

    double operator()(std::size_t s, std::size_t t) const { return values[s * n + t]; }
    double& operator()(std::size_t s, std::size_t t) { return values[s * n + t]; }
};

struct CriterionReport {
    double waic = 0.0;
    double p_waic = 0.0;
    double loo = 0.0;
    double ccwaic = 0.0;
    double p_cc_naive = 0.0;
    double p_cc_corr = 0.0;
    double tau = 1.0;
    double n_eff = 0.0;
    double lppd = 0.0;

    // Flat JSON object with exactly these nine fields, full double precision.
    std::string to_json() const;
};

struct WaicResult {
    double waic = 0.0;
    double p_waic = 0.0;
    double lppd = 0.0;
};

struct AutocorrResult {
    double tau = 1.0;      // clamped to [1, S/2]
    double tau_raw = 1.0;  // pre-clamp value, useful for diagnostics
    double n_eff = 0.0;    // S / tau, in [2, S]
    std::vector<double> rho;  // autocorrelations actually computed (lags 1..)
};

struct VarianceDecomposition {
    double sum_var = 0.0;        // sum over t of Var_s[l_{s,t}]
    double twice_sum_cov = 0.0;  // 2 * sum over i<j of Cov_s[l_{s,i}, l_{s,j}]
};

// Stable log of the mean of exp(x): max-shifted so a constant input returns
// that constant exactly. The backbone of lppd and the LOO weights.
double log_mean_exp(const double* x, std::size_t count);
double log_mean_exp(const std::vector<double>& x);

LogLikMatrix build_loglik_matrix(const PosteriorDraws& draws, const ObservationSeq& obs);

// lppd = sum_t log mean_s exp(l_{s,t}); p_waic = sum_t Var_s[l_{s,t}]
// (divisor S-1); waic = -2 (lppd - p_waic).
WaicResult compute_waic(const LogLikMatrix& m);

// Importance-sampling leave-one-out on the conditional log-likelihoods:
// elpd_t = -log mean_s exp(-l_{s,t}), returned as -2 sum_t elpd_t.
double compute_loo(const LogLikMatrix& m);

// L^(s) = sum_t l_{s,t}.
std::vector<double> joint_loglik_per_draw(const LogLikMatrix& m);

// Sample variance (divisor S-1) of the per-draw joint log-likelihoods.
double naive_pcc(const std::vector<double>& L);

// Integrated autocorrelation time of the chain series L^(1..S): biased (1/S)
// autocovariances, tau = 1 + 2 sum rho_k truncated at the first lag with
// |rho_k| < 2/sqrt(S) (that lag excluded), lag cap S/4, then clamped to
// [1, S/2]. A zero-variance series yields (tau=1, n_eff=S) by convention.
AutocorrResult autocorr_time(const std::vector<double>& L);

// (n_eff / (n_eff - 1)) * p_naive.
double corrected_pcc(double p_naive, double n_eff);

// Full report: shared lppd, WAIC and LOO, then the covariance-corrected
// penalty with its chain-autocorrelation bias correction.
CriterionReport compute_ccwaic(const LogLikMatrix& m);

// Honest pairwise accounting of Var_s[L] = sum of column variances plus twice
// the upper-triangle column covariances.
VarianceDecomposition variance_decomposition(const LogLikMatrix& m);

// Block leave-future-out diagnostic with window size k: for each t > k the
// predictive density of y_t given only the k preceding observations, averaged
// over draws, summed and returned on the deviance scale (-2x).
struct BlfoOptions {
    enum class Init {
        Stationary,   // stationary distribution of each draw's A
        InitialDist,  // each draw's pi
        Uniform,
    };
    Init init = Init::Stationary;
};

struct BlfoStats {
    std::size_t uniform_fallbacks = 0;  // draws whose A had no unique stationary dist
};

double blfo_diagnostic(const PosteriorDraws& draws, const ObservationSeq& obs, std::size_t k,
                       const BlfoOptions& options = {}, BlfoStats* stats = nullptr);

namespace detail {

// Solves pi A = pi, sum pi = 1. Returns false when the linear system is
// singular to working precision (no unique stationary distribution).
bool stationary_distribution(const HmmParams& params, std::vector<double>& out);

}  // namespace detail

}  // namespace seqsel
