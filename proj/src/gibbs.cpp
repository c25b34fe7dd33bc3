#include "seqsel/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "seqsel/errors.hpp"

namespace seqsel {

void PriorSpec::validate() const {
    if (!(dirichlet_conc > 0.0)) throw std::domain_error("PriorSpec: dirichlet_conc must be > 0");
    if (!(mean_scale > 0.0)) throw std::domain_error("PriorSpec: mean_scale must be > 0");
    if (!(ig_shape > 0.0)) throw std::domain_error("PriorSpec: ig_shape must be > 0");
    if (!(ig_rate > 0.0)) throw std::domain_error("PriorSpec: ig_rate must be > 0");
}

PriorSpec PriorSpec::weakly_informative(const ObservationSeq& obs) {
    if (obs.empty()) throw std::domain_error("PriorSpec::weakly_informative: empty observations");
    double mean = std::accumulate(obs.begin(), obs.end(), 0.0) / static_cast<double>(obs.size());
    double ss = 0.0;
    for (double y : obs) ss += (y - mean) * (y - mean);
    double sd = obs.size() > 1 ? std::sqrt(ss / static_cast<double>(obs.size() - 1)) : 0.0;
    if (!(sd > 0.0)) sd = 1.0;  // constant series: keep the prior proper
    PriorSpec prior;
    prior.mean_loc = mean;
    prior.mean_scale = 10.0 * sd;
    return prior;
}

namespace {

// Deterministic start: rank observations and cut into K equal-size groups, so
// every state is occupied whenever n >= K.
std::vector<std::size_t> quantile_bin_states(const ObservationSeq& obs, std::size_t K) {
    const std::size_t n = obs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return obs[a] < obs[b]; });
    std::vector<std::size_t> states(n);
    for (std::size_t r = 0; r < n; ++r) states[order[r]] = r * K / n;
    return states;
}

std::vector<double> dirichlet_posterior_row(RngState& rng, double conc,
                                            const std::vector<double>& counts) {
    std::vector<double> alpha(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) alpha[i] = conc + counts[i];
    return sample_dirichlet(rng, alpha);
}

}  // namespace

namespace detail {

void draw_theta_given_states(const ObservationSeq& obs, const std::vector<std::size_t>& states,
                             const PriorSpec& prior, HmmParams& params, RngState& rng) {
    const std::size_t K = params.K;
    const std::size_t n = obs.size();

    // pi | z: Dirichlet with the first state's indicator added.
    std::vector<double> first_count(K, 0.0);
    first_count[states[0]] += 1.0;
    params.pi = dirichlet_posterior_row(rng, prior.dirichlet_conc, first_count);

    // A | z: each row from its transition counts.
    std::vector<double> trans(K * K, 0.0);
    for (std::size_t t = 1; t < n; ++t) trans[states[t - 1] * K + states[t]] += 1.0;
    for (std::size_t i = 0; i < K; ++i) {
        std::vector<double> row(trans.begin() + i * K, trans.begin() + (i + 1) * K);
        std::vector<double> drawn = dirichlet_posterior_row(rng, prior.dirichlet_conc, row);
        std::copy(drawn.begin(), drawn.end(), params.A.begin() + i * K);
    }

    std::vector<double> count(K, 0.0), sum(K, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        count[states[t]] += 1.0;
        sum[states[t]] += obs[t];
    }

    // mu_k | sigma_k^2, z, y: Normal conjugate (empty state -> prior draw).
    const double prior_prec = 1.0 / (prior.mean_scale * prior.mean_scale);
    for (std::size_t k = 0; k < K; ++k) {
        double var = params.sigma[k] * params.sigma[k];
        double prec = prior_prec + count[k] / var;
        double mean = (prior.mean_loc * prior_prec + sum[k] / var) / prec;
        params.mu[k] = mean + sample_normal(rng) / std::sqrt(prec);
    }

    // sigma_k^2 | mu_k, z, y: InvGamma conjugate with the freshly drawn mean.
    for (std::size_t k = 0; k < K; ++k) {
        double ss = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            if (states[t] != k) continue;
            double d = obs[t] - params.mu[k];
            ss += d * d;
        }
        double shape = prior.ig_shape + 0.5 * count[k];
        double rate = prior.ig_rate + 0.5 * ss;
        params.sigma[k] = std::sqrt(sample_inverse_gamma(rng, shape, rate));
    }
}

std::vector<std::size_t> backward_sample_states(const HmmParams& params, const FilterTrace& trace,
                                                RngState& rng) {
    const std::size_t K = params.K;
    const std::size_t n = trace.cond_loglik.size();
    std::vector<std::size_t> states(n);
    std::vector<double> w(K);

    std::copy(trace.alphas.begin() + (n - 1) * K, trace.alphas.begin() + n * K, w.begin());
    states[n - 1] = sample_categorical(rng, w);

    for (std::size_t t = n - 1; t-- > 0;) {
        double wsum = 0.0;
        for (std::size_t i = 0; i < K; ++i) {
            w[i] = trace.alphas[t * K + i] * params.a(i, states[t + 1]);
            wsum += w[i];
        }
        if (!(wsum > 0.0))
            throw numerical_error("backward sampling: zero-mass conditional at t = " +
                                  std::to_string(t + 1));
        for (std::size_t i = 0; i < K; ++i) w[i] /= wsum;
        states[t] = sample_categorical(rng, w);
    }
    return states;
}

}  // namespace detail

PosteriorDraws gibbs_fit(const ObservationSeq& obs, std::size_t K, const PriorSpec& prior,
                         std::size_t n_iter, std::size_t burn_in, RngState& rng,
                         std::size_t chain_id) {
    prior.validate();
    const std::size_t n = obs.size();
    if (K < 2) throw std::domain_error("gibbs_fit: K must be >= 2");
    if (n < K) throw std::domain_error("gibbs_fit: need at least K observations");
    if (burn_in >= n_iter) throw std::domain_error("gibbs_fit: burn_in must be < n_iter");
    if (n_iter - burn_in < 2) throw std::domain_error("gibbs_fit: need at least 2 retained draws");
    for (double y : obs)
        if (!std::isfinite(y)) throw std::domain_error("gibbs_fit: observations must be finite");

    std::vector<std::size_t> states = quantile_bin_states(obs, K);

    // Start theta at per-bin moments so the first conjugate sweep is sensible,
    // then immediately redraw everything from the full conditionals.
    HmmParams params;
    params.K = K;
    params.pi.assign(K, 1.0 / static_cast<double>(K));
    params.A.assign(K * K, 1.0 / static_cast<double>(K));
    params.mu.assign(K, 0.0);
    params.sigma.assign(K, 1.0);
    {
        std::vector<double> count(K, 0.0), sum(K, 0.0), ss(K, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            count[states[t]] += 1.0;
            sum[states[t]] += obs[t];
        }
        for (std::size_t k = 0; k < K; ++k) params.mu[k] = sum[k] / count[k];
        for (std::size_t t = 0; t < n; ++t) {
            double d = obs[t] - params.mu[states[t]];
            ss[states[t]] += d * d;
        }
        for (std::size_t k = 0; k < K; ++k) {
            double sd = count[k] > 1.0 ? std::sqrt(ss[k] / (count[k] - 1.0)) : 0.0;
            params.sigma[k] = sd > 1e-8 ? sd : 1.0;
        }
    }
    detail::draw_theta_given_states(obs, states, prior, params, rng);

    PosteriorDraws out;
    out.K = K;
    out.n_iter = n_iter;
    out.burn_in = burn_in;
    out.seed = rng.seed();
    out.chain_id = chain_id;
    out.draws.reserve(n_iter - burn_in);

    for (std::size_t iter = 0; iter < n_iter; ++iter) {
        FilterTrace trace = forward_filter_trace(params, obs);
        states = detail::backward_sample_states(params, trace, rng);
        detail::draw_theta_given_states(obs, states, prior, params, rng);
        if (iter >= burn_in) out.draws.push_back(params);
    }
    return out;
}

HmmParams relabel_draw(const HmmParams& params) {
    const std::size_t K = params.K;
    std::vector<std::size_t> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
        if (params.mu[a] != params.mu[b]) return params.mu[a] < params.mu[b];
        if (params.sigma[a] != params.sigma[b]) return params.sigma[a] < params.sigma[b];
        return a < b;
    });
    HmmParams out;
    out.K = K;
    out.pi.resize(K);
    out.A.resize(K * K);
    out.mu.resize(K);
    out.sigma.resize(K);
    for (std::size_t i = 0; i < K; ++i) {
        out.pi[i] = params.pi[perm[i]];
        out.mu[i] = params.mu[perm[i]];
        out.sigma[i] = params.sigma[perm[i]];
        for (std::size_t j = 0; j < K; ++j) out.a(i, j) = params.a(perm[i], perm[j]);
    }
    return out;
}

PosteriorDraws relabel(const PosteriorDraws& draws) {
    PosteriorDraws out = draws;
    for (HmmParams& d : out.draws) d = relabel_draw(d);
    return out;
}

}  // namespace seqsel
