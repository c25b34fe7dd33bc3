#pragma once

#include <cstdint>
#include <vector>

#include "seqsel/hmm.hpp"

namespace seqsel {

// Hyperparameters: symmetric Dirichlet on pi and on each row of A, Normal on
// each emission mean, InvGamma on each emission variance.
struct PriorSpec {
    double dirichlet_conc = 1.0;
    double mean_loc = 0.0;
    double mean_scale = 10.0;
    double ig_shape = 1.0;
    double ig_rate = 1.0;

    void validate() const;

    // Centers the mean prior at the sample mean with sd 10x the sample sd.
    static PriorSpec weakly_informative(const ObservationSeq& obs);
};

struct PosteriorDraws {
    std::vector<HmmParams> draws;  // S = n_iter - burn_in retained draws
    std::size_t K = 0;
    std::size_t n_iter = 0;
    std::size_t burn_in = 0;
    std::uint64_t seed = 0;
    std::size_t chain_id = 0;
};

// Block Gibbs sampler: latent states by forward-filter backward-sampling,
// then conjugate updates for pi, the rows of A, each mu_k, each sigma_k^2.
// States are initialized by quantile-binning the observations into K groups.
// Empty states fall back to prior draws through the conjugate formulas.
PosteriorDraws gibbs_fit(const ObservationSeq& obs, std::size_t K, const PriorSpec& prior,
                         std::size_t n_iter, std::size_t burn_in, RngState& rng,
                         std::size_t chain_id = 0);

// Sorts each draw's states by ascending mu (ties: ascending sigma, then
// original index) and permutes pi, A, sigma consistently. Reporting aid only;
// leaves every draw's likelihood unchanged.
PosteriorDraws relabel(const PosteriorDraws& draws);
HmmParams relabel_draw(const HmmParams& params);

namespace detail {

// One conjugate parameter sweep with the state sequence held fixed:
// pi | z, A | z, mu_k | sigma_k^2, z, y, then sigma_k^2 | mu_k, z, y.
// The mu update reads sigma from params as passed in.
void draw_theta_given_states(const ObservationSeq& obs, const std::vector<std::size_t>& states,
                             const PriorSpec& prior, HmmParams& params, RngState& rng);

// Backward pass of the block state update: samples z_n from the final filtered
// probabilities, then z_t | z_{t+1} proportional to alpha_t(i) * A(i, z_{t+1}).
std::vector<std::size_t> backward_sample_states(const HmmParams& params, const FilterTrace& trace,
                                                RngState& rng);

}  // namespace detail

}  // namespace seqsel
