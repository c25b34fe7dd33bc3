#include "seqsel/dist.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace seqsel {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2*pi)

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

RngState::RngState(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    gen_.seed(splitmix64(s));
}

RngState RngState::derive(std::uint64_t seed, std::uint64_t stream, std::string_view tag) {
    std::uint64_t s = seed;
    std::uint64_t mixed = splitmix64(s);
    s = mixed ^ stream;
    mixed = splitmix64(s);
    s = mixed ^ fnv1a(tag);
    mixed = splitmix64(s);
    return RngState(mixed);
}

double RngState::next_uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double RngState::next_uniform_pos() {
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
}

double normal_logpdf(double x, double mean, double sd) {
    if (!(sd > 0.0)) {
        throw std::domain_error("normal_logpdf: sd must be positive, got " + std::to_string(sd));
    }
    const double z = (x - mean) / sd;
    return -kHalfLog2Pi - std::log(sd) - 0.5 * z * z;
}

double inverse_gamma_logpdf(double x, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw std::domain_error("inverse_gamma_logpdf: shape and rate must be positive");
    }
    if (!(x > 0.0)) {
        throw std::domain_error("inverse_gamma_logpdf: support is x > 0");
    }
    return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double sample_normal(RngState& rng, double mean, double sd) {
    if (!(sd > 0.0)) {
        throw std::domain_error("sample_normal: sd must be positive, got " + std::to_string(sd));
    }
    // Box-Muller, one fresh pair of uniforms per draw. No cached spare, so the
    // draw sequence depends only on the call sequence.
    const double u1 = rng.next_uniform_pos();
    const double u2 = rng.next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
}

double sample_gamma(RngState& rng, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw std::domain_error("sample_gamma: shape and rate must be positive");
    }
    // Marsaglia-Tsang squeeze; shape < 1 handled by the boost
    // Gamma(shape) = Gamma(shape + 1) * U^(1/shape).
    double boost = 1.0;
    double a = shape;
    if (a < 1.0) {
        boost = std::pow(rng.next_uniform_pos(), 1.0 / a);
        a += 1.0;
    }
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = sample_normal(rng, 0.0, 1.0);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.next_uniform_pos();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return boost * d * v / rate;
        }
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return boost * d * v / rate;
        }
    }
}

double sample_inverse_gamma(RngState& rng, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw std::domain_error("sample_inverse_gamma: shape and rate must be positive");
    }
    double g = 0.0;
    do {
        g = sample_gamma(rng, shape, rate);
    } while (g == 0.0);
    return 1.0 / g;
}

std::vector<double> sample_dirichlet(RngState& rng, const std::vector<double>& alpha) {
    if (alpha.empty()) {
        throw std::domain_error("sample_dirichlet: alpha must be non-empty");
    }
    for (double a : alpha) {
        if (!(a > 0.0)) {
            throw std::domain_error("sample_dirichlet: all alpha entries must be positive");
        }
    }
    std::vector<double> out(alpha.size());
    double sum = 0.0;
    do {
        sum = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            out[i] = sample_gamma(rng, alpha[i], 1.0);
            sum += out[i];
        }
    } while (sum == 0.0);
    for (double& v : out) v /= sum;
    // absorb rounding from the division
    double s2 = 0.0;
    for (double v : out) s2 += v;
    for (double& v : out) v /= s2;
    return out;
}

std::size_t sample_categorical(RngState& rng, const std::vector<double>& probs) {
    if (probs.empty()) {
        throw std::domain_error("sample_categorical: probs must be non-empty");
    }
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) {
            throw std::domain_error("sample_categorical: negative probability entry");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::domain_error("sample_categorical: probabilities sum to " + std::to_string(sum) +
                                ", not 1");
    }
    const double u = rng.next_uniform();
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) last_positive = i;
        cum += probs[i];
        if (u < cum) return i;
    }
    // u fell into the rounding slack past the last bucket
    return last_positive;
}

}  // namespace seqsel
