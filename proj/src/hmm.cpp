#include "seqsel/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "seqsel/errors.hpp"

namespace seqsel {

void HmmParams::validate() const {
    if (K < 1) throw std::domain_error("HmmParams: K must be >= 1");
    if (pi.size() != K || mu.size() != K || sigma.size() != K)
        throw std::domain_error("HmmParams: pi/mu/sigma must have length K");
    if (A.size() != K * K) throw std::domain_error("HmmParams: A must be K x K");
    constexpr double tol = 1e-9;
    double psum = 0.0;
    for (double p : pi) {
        if (!(p >= 0.0)) throw std::domain_error("HmmParams: pi entries must be >= 0");
        psum += p;
    }
    if (std::abs(psum - 1.0) > tol) throw std::domain_error("HmmParams: pi must sum to 1");
    for (std::size_t i = 0; i < K; ++i) {
        double rsum = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
            double v = A[i * K + j];
            if (!(v >= 0.0)) throw std::domain_error("HmmParams: A entries must be >= 0");
            rsum += v;
        }
        if (std::abs(rsum - 1.0) > tol)
            throw std::domain_error("HmmParams: A row " + std::to_string(i) + " must sum to 1");
    }
    for (double s : sigma)
        if (!(s > 0.0)) throw std::domain_error("HmmParams: sigma must be > 0");
}

GeneratedSeq generate_sequence(const HmmParams& params, std::size_t T, RngState& rng) {
    params.validate();
    if (T == 0) throw std::domain_error("generate_sequence: T must be >= 1");
    GeneratedSeq out;
    out.states.resize(T);
    out.obs.resize(T);
    std::vector<double> row(params.K);
    out.states[0] = sample_categorical(rng, params.pi);
    for (std::size_t t = 1; t < T; ++t) {
        std::size_t prev = out.states[t - 1];
        for (std::size_t j = 0; j < params.K; ++j) row[j] = params.a(prev, j);
        out.states[t] = sample_categorical(rng, row);
    }
    for (std::size_t t = 0; t < T; ++t) {
        std::size_t z = out.states[t];
        out.obs[t] = params.mu[z] + params.sigma[z] * sample_normal(rng);
    }
    return out;
}

namespace detail {

double filter_step(const HmmParams& params, std::vector<double>& alpha, double y,
                   std::size_t t_for_error, bool apply_transition) {
    const std::size_t K = params.K;
    // Predicted state probabilities for this step.
    std::vector<double> pred(K);
    if (apply_transition) {
        for (std::size_t j = 0; j < K; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < K; ++i) acc += alpha[i] * params.a(i, j);
            pred[j] = acc;
        }
    } else {
        pred = alpha;
    }
    // Emission log-densities, with the per-step max factored out so the
    // marginal survives in scaled space even far in the distribution tails.
    std::vector<double> logeta(K);
    double cmax = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < K; ++j) {
        logeta[j] = normal_logpdf(y, params.mu[j], params.sigma[j]);
        if (logeta[j] > cmax) cmax = logeta[j];
    }
    double marginal = 0.0;  // = p(y_t | y_<t) * exp(-cmax)
    for (std::size_t j = 0; j < K; ++j) {
        alpha[j] = std::exp(logeta[j] - cmax) * pred[j];
        marginal += alpha[j];
    }
    if (!(marginal > 0.0) || !std::isfinite(cmax))
        throw numerical_error("forward filter: p(y_t | y_<t) underflowed to 0 at t = " +
                              std::to_string(t_for_error));
    double inv = 1.0 / marginal;
    for (std::size_t j = 0; j < K; ++j) alpha[j] *= inv;
    return cmax + std::log(marginal);
}

}  // namespace detail

FilterOutput forward_conditional_loglik(const HmmParams& params, const ObservationSeq& obs) {
    params.validate();
    const std::size_t n = obs.size();
    if (n == 0) throw std::domain_error("forward_conditional_loglik: empty observation sequence");
    FilterOutput out;
    out.cond_loglik.resize(n);
    std::vector<double> alpha = params.pi;
    for (std::size_t t = 0; t < n; ++t)
        out.cond_loglik[t] = detail::filter_step(params, alpha, obs[t], t + 1, t > 0);
    out.final_alpha = std::move(alpha);
    return out;
}

FilterTrace forward_filter_trace(const HmmParams& params, const ObservationSeq& obs) {
    params.validate();
    const std::size_t n = obs.size();
    if (n == 0) throw std::domain_error("forward_filter_trace: empty observation sequence");
    FilterTrace out;
    out.cond_loglik.resize(n);
    out.alphas.resize(n * params.K);
    std::vector<double> alpha = params.pi;
    for (std::size_t t = 0; t < n; ++t) {
        out.cond_loglik[t] = detail::filter_step(params, alpha, obs[t], t + 1, t > 0);
        std::copy(alpha.begin(), alpha.end(), out.alphas.begin() + t * params.K);
    }
    return out;
}

double joint_loglik(const HmmParams& params, const ObservationSeq& obs) {
    FilterOutput f = forward_conditional_loglik(params, obs);
    double total = 0.0;
    for (double l : f.cond_loglik) total += l;
    return total;
}

double brute_force_loglik(const HmmParams& params, const ObservationSeq& obs) {
    params.validate();
    const std::size_t n = obs.size();
    const std::size_t K = params.K;
    if (n == 0) throw std::domain_error("brute_force_loglik: empty observation sequence");
    double paths = std::pow(static_cast<double>(K), static_cast<double>(n));
    if (paths > 1e7) throw std::length_error("brute_force_loglik: K^n exceeds 1e7");

    std::vector<std::size_t> z(n, 0);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> logw;
    logw.reserve(static_cast<std::size_t>(paths));
    for (;;) {
        double lw = std::log(params.pi[z[0]]) + normal_logpdf(obs[0], params.mu[z[0]], params.sigma[z[0]]);
        for (std::size_t t = 1; t < n; ++t)
            lw += std::log(params.a(z[t - 1], z[t])) +
                  normal_logpdf(obs[t], params.mu[z[t]], params.sigma[z[t]]);
        logw.push_back(lw);
        if (lw > best) best = lw;
        // Next path in odometer order.
        std::size_t t = 0;
        while (t < n && ++z[t] == K) z[t++] = 0;
        if (t == n) break;
    }
    if (!std::isfinite(best)) return -std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (double lw : logw) acc += std::exp(lw - best);
    return best + std::log(acc);
}

}  // namespace seqsel
