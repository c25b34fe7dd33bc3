#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "seqsel/criteria.hpp"
#include "seqsel/errors.hpp"
#include "seqsel/gibbs.hpp"
#include "seqsel/hmm.hpp"

using namespace seqsel;

namespace {

HmmParams sticky_two_state() {
    HmmParams p;
    p.K = 2;
    p.pi = {1.0, 0.0};
    p.A = {0.95, 0.05, 0.05, 0.95};
    p.mu = {-2.0, 2.0};
    p.sigma = {0.5, 1.0};
    return p;
}

}  // namespace

TEST_CASE("weakly informative prior centers on the sample") {
    ObservationSeq obs = {1.0, 2.0, 3.0, 4.0};
    PriorSpec prior = PriorSpec::weakly_informative(obs);
    CHECK(prior.mean_loc == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(prior.mean_scale == doctest::Approx(12.909944487358056).epsilon(1e-12));
    CHECK(prior.dirichlet_conc == 1.0);
    CHECK(prior.ig_shape == 1.0);
    CHECK(prior.ig_rate == 1.0);
    CHECK_NOTHROW(prior.validate());

    PriorSpec bad;
    bad.ig_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("gibbs_fit rejects unusable setups") {
    ObservationSeq obs = {0.1, 0.2, 0.3, 0.4, 0.5};
    PriorSpec prior;
    RngState rng(1);
    CHECK_THROWS_AS(gibbs_fit(obs, 1, prior, 10, 5, rng), std::domain_error);
    CHECK_THROWS_AS(gibbs_fit(obs, 6, prior, 10, 5, rng), std::domain_error);
    CHECK_THROWS_AS(gibbs_fit(obs, 2, prior, 10, 10, rng), std::domain_error);
    CHECK_THROWS_AS(gibbs_fit(obs, 2, prior, 10, 9, rng), std::domain_error);
    ObservationSeq nan_obs = obs;
    nan_obs[2] = std::nan("");
    CHECK_THROWS_AS(gibbs_fit(nan_obs, 2, prior, 10, 5, rng), std::domain_error);
}

TEST_CASE("retained draw count and bookkeeping") {
    RngState data_rng(11);
    GeneratedSeq seq = generate_sequence(sticky_two_state(), 40, data_rng);
    PriorSpec prior = PriorSpec::weakly_informative(seq.obs);
    RngState rng(12);
    PosteriorDraws d = gibbs_fit(seq.obs, 2, prior, 40, 15, rng, 3);
    CHECK(d.draws.size() == 25);
    CHECK(d.K == 2);
    CHECK(d.n_iter == 40);
    CHECK(d.burn_in == 15);
    CHECK(d.chain_id == 3);
    for (const HmmParams& p : d.draws) {
        CHECK_NOTHROW(p.validate());
        for (double s : p.sigma) CHECK(s > 0.0);
    }
}

TEST_CASE("same seed reproduces the chain bit for bit") {
    RngState data_rng(21);
    GeneratedSeq seq = generate_sequence(sticky_two_state(), 60, data_rng);
    PriorSpec prior = PriorSpec::weakly_informative(seq.obs);
    RngState r1(99), r2(99);
    PosteriorDraws a = gibbs_fit(seq.obs, 2, prior, 50, 20, r1);
    PosteriorDraws b = gibbs_fit(seq.obs, 2, prior, 50, 20, r2);
    REQUIRE(a.draws.size() == b.draws.size());
    for (std::size_t s = 0; s < a.draws.size(); ++s) {
        CHECK(a.draws[s].pi == b.draws[s].pi);
        CHECK(a.draws[s].A == b.draws[s].A);
        CHECK(a.draws[s].mu == b.draws[s].mu);
        CHECK(a.draws[s].sigma == b.draws[s].sigma);
    }
    RngState r3(100);
    PosteriorDraws c = gibbs_fit(seq.obs, 2, prior, 50, 20, r3);
    CHECK(a.draws[0].mu != c.draws[0].mu);
}

TEST_CASE("posterior concentrates near well-separated truth") {
    HmmParams truth = sticky_two_state();
    RngState data_rng(31);
    GeneratedSeq seq = generate_sequence(truth, 250, data_rng);
    PriorSpec prior = PriorSpec::weakly_informative(seq.obs);
    RngState rng(32);
    PosteriorDraws d = relabel(gibbs_fit(seq.obs, 2, prior, 1000, 500, rng));
    double m0 = 0.0, m1 = 0.0;
    for (const HmmParams& p : d.draws) {
        m0 += p.mu[0];
        m1 += p.mu[1];
    }
    m0 /= static_cast<double>(d.draws.size());
    m1 /= static_cast<double>(d.draws.size());
    CHECK(std::abs(m0 - (-2.0)) < 0.3);
    CHECK(std::abs(m1 - 2.0) < 0.3);
}

TEST_CASE("conjugate mean update matches its closed form with states frozen") {
    HmmParams truth = sticky_two_state();
    RngState data_rng(41);
    GeneratedSeq seq = generate_sequence(truth, 120, data_rng);
    PriorSpec prior;
    prior.mean_loc = 0.0;
    prior.mean_scale = 10.0;

    // closed-form posterior mean of mu_k given z at the true sigma
    std::vector<double> count(2, 0.0), sum(2, 0.0);
    for (std::size_t t = 0; t < seq.obs.size(); ++t) {
        count[seq.states[t]] += 1.0;
        sum[seq.states[t]] += seq.obs[t];
    }
    const double prior_prec = 1.0 / (10.0 * 10.0);
    std::vector<double> closed(2);
    for (std::size_t k = 0; k < 2; ++k) {
        double prec = prior_prec + count[k] / (truth.sigma[k] * truth.sigma[k]);
        closed[k] = (prior_prec * 0.0 + sum[k] / (truth.sigma[k] * truth.sigma[k])) / prec;
    }

    // run the sweep with z fixed at the generating states
    HmmParams params = truth;
    RngState rng(42);
    const std::size_t S = 2000;
    std::vector<std::vector<double>> chain(2);
    for (std::size_t s = 0; s < S; ++s) {
        detail::draw_theta_given_states(seq.obs, seq.states, prior, params, rng);
        chain[0].push_back(params.mu[0]);
        chain[1].push_back(params.mu[1]);
    }
    for (std::size_t k = 0; k < 2; ++k) {
        double mean = 0.0;
        for (double v : chain[k]) mean += v;
        mean /= static_cast<double>(S);
        double var = 0.0;
        for (double v : chain[k]) var += (v - mean) * (v - mean);
        var /= static_cast<double>(S - 1);
        AutocorrResult ac = autocorr_time(chain[k]);
        double se = std::sqrt(var * ac.tau / static_cast<double>(S));
        CHECK(std::abs(mean - closed[k]) < 3.0 * se + 1e-6);
    }
}

TEST_CASE("relabeling sorts states by mean and preserves the likelihood") {
    HmmParams p;
    p.K = 3;
    p.pi = {0.5, 0.3, 0.2};
    p.A = {0.6, 0.3, 0.1, 0.2, 0.7, 0.1, 0.1, 0.2, 0.7};
    p.mu = {3.0, -3.0, 0.0};
    p.sigma = {1.0, 2.0, 0.5};
    HmmParams q = relabel_draw(p);
    // sorted order: state 1 (-3), state 2 (0), state 0 (3)
    CHECK(q.mu == std::vector<double>{-3.0, 0.0, 3.0});
    CHECK(q.sigma == std::vector<double>{2.0, 0.5, 1.0});
    CHECK(q.pi == std::vector<double>{0.3, 0.2, 0.5});
    CHECK(q.a(0, 0) == 0.7);  // old (1,1)
    CHECK(q.a(0, 1) == 0.1);  // old (1,2)
    CHECK(q.a(0, 2) == 0.2);  // old (1,0)
    CHECK(q.a(2, 0) == 0.3);  // old (0,1)

    HmmParams sorted = q;
    CHECK(relabel_draw(sorted).mu == q.mu);  // idempotent once sorted

    ObservationSeq y = {0.4, -2.5, 1.1, 0.0, 2.9};
    CHECK(joint_loglik(p, y) == doctest::Approx(joint_loglik(q, y)).epsilon(1e-12));
}

TEST_CASE("empty states draw from the prior without breaking") {
    ObservationSeq obs = {-1.0, -0.9, 1.1, 0.8, -1.2, 1.0, 0.9, -1.1};
    // states never visit 2; the sweep must still produce valid parameters
    std::vector<std::size_t> z = {0, 0, 1, 1, 0, 1, 1, 0};
    PriorSpec prior;
    HmmParams params;
    params.K = 3;
    params.pi = {0.4, 0.4, 0.2};
    params.A = {0.8, 0.1, 0.1, 0.1, 0.8, 0.1, 0.1, 0.1, 0.8};
    params.mu = {-1.0, 1.0, 0.0};
    params.sigma = {1.0, 1.0, 1.0};
    RngState rng(51);
    for (int rep = 0; rep < 200; ++rep) {
        detail::draw_theta_given_states(obs, z, prior, params, rng);
        CHECK_NOTHROW(params.validate());
        for (double s : params.sigma) {
            CHECK(s > 0.0);
            CHECK(std::isfinite(s));
        }
        for (double m : params.mu) CHECK(std::isfinite(m));
    }

    // a full fit where K exceeds the number of occupied clusters also holds up
    RngState rng2(52);
    PosteriorDraws d = gibbs_fit(obs, 4, PriorSpec::weakly_informative(obs), 60, 30, rng2);
    for (const HmmParams& p : d.draws) CHECK_NOTHROW(p.validate());
}
