#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace seqsel {

// Seeded draw stream. The same seed yields a bit-identical sequence of draws
// across runs on the same build. Independent streams for parallel chains are
// obtained through derive(), which mixes (seed, stream, tag) so that chains
// never share generator state.
class RngState {
public:
    explicit RngState(std::uint64_t seed);

    static RngState derive(std::uint64_t seed, std::uint64_t stream, std::string_view tag);

    std::uint64_t seed() const { return seed_; }

    // Uniform on [0, 1) with 53 random bits.
    double next_uniform();
    // Uniform on (0, 1]; safe as a log() argument.
    double next_uniform_pos();

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

// log N(x; mean, sd^2). Throws std::domain_error for sd <= 0.
double normal_logpdf(double x, double mean, double sd);

// log InvGamma(x; shape, rate), density proportional to
// x^(-shape-1) exp(-rate/x). Throws std::domain_error on bad parameters.
double inverse_gamma_logpdf(double x, double shape, double rate);

double sample_normal(RngState& rng, double mean = 0.0, double sd = 1.0);

// Gamma with density proportional to x^(shape-1) exp(-rate x).
double sample_gamma(RngState& rng, double shape, double rate);

// 1 / Gamma(shape, rate); density proportional to x^(-shape-1) exp(-rate/x),
// so the prior InvGamma(alpha, beta) has mean beta/(alpha-1) for alpha > 1.
double sample_inverse_gamma(RngState& rng, double shape, double rate);

// Normalized Gamma draws; components sum to 1 within 1e-12.
std::vector<double> sample_dirichlet(RngState& rng, const std::vector<double>& alpha);

// probs must lie on the simplex (entries >= 0, sum within 1e-9 of 1).
std::size_t sample_categorical(RngState& rng, const std::vector<double>& probs);

}  // namespace seqsel
