#pragma once

#include <cstddef>
#include <vector>

#include "seqsel/dist.hpp"

namespace seqsel {

using ObservationSeq = std::vector<double>;

// One parameter draw theta = (pi, A, mu, sigma) for a K-state Gaussian HMM.
// A is row-major K x K with stochastic rows.
struct HmmParams {
    std::size_t K = 0;
    std::vector<double> pi;
    std::vector<double> A;
    std::vector<double> mu;
    std::vector<double> sigma;

    double a(std::size_t i, std::size_t j) const { return A[i * K + j]; }
    double& a(std::size_t i, std::size_t j) { return A[i * K + j]; }

    // Checks shapes, simplex constraints (1e-9), and sigma > 0.
    void validate() const;
};

struct FilterOutput {
    std::vector<double> cond_loglik;  // l_t = log p(y_t | y_<t, theta)
    std::vector<double> final_alpha;  // filtered state probabilities at t = n
};

// Full filtering pass: filtered state probabilities after every step, needed
// by the backward-sampling move of the Gibbs sampler.
struct FilterTrace {
    std::vector<double> cond_loglik;
    std::vector<double> alphas;  // n x K row-major, alphas[t*K + j] = alpha_t(j)
};

struct GeneratedSeq {
    std::vector<std::size_t> states;
    ObservationSeq obs;
};

// states[0] ~ pi, states[t] ~ A[states[t-1], .], obs[t] ~ N(mu[z], sigma[z]^2).
GeneratedSeq generate_sequence(const HmmParams& params, std::size_t T, RngState& rng);

// Scaled forward recursion: predict from alpha_{t-1} and A, emit, normalize.
// The first state carries distribution pi, so l_1 conditions on nothing.
// Throws numerical_error naming t if the predictive density underflows to zero.
FilterOutput forward_conditional_loglik(const HmmParams& params, const ObservationSeq& obs);

FilterTrace forward_filter_trace(const HmmParams& params, const ObservationSeq& obs);

// Sum of the filter's conditional log-likelihoods.
double joint_loglik(const HmmParams& params, const ObservationSeq& obs);

// Exact marginal log-likelihood by enumerating all K^n hidden paths through
// log-sum-exp. Test oracle; guarded to K^n <= 1e7.
double brute_force_loglik(const HmmParams& params, const ObservationSeq& obs);

namespace detail {

// One filter step: advances alpha (length K) through predict/emit/normalize
// for observation y and returns log p(y | history). apply_transition is false
// on the first observation, where alpha already holds the state distribution.
// Shared by the main filter and the windowed predictive evaluation.
double filter_step(const HmmParams& params, std::vector<double>& alpha, double y,
                   std::size_t t_for_error, bool apply_transition);

}  // namespace detail

}  // namespace seqsel
