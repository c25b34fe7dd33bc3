#include "seqsel/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "seqsel/errors.hpp"
#include "seqsel/io.hpp"

namespace seqsel {

double log_mean_exp(const double* x, std::size_t count) {
    if (count == 0) throw std::domain_error("log_mean_exp: empty input");
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i) m = std::max(m, x[i]);
    if (!std::isfinite(m)) return m;  // all -inf, or a stray inf/nan propagates
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) acc += std::exp(x[i] - m);
    return m + std::log(acc / static_cast<double>(count));
}

double log_mean_exp(const std::vector<double>& x) { return log_mean_exp(x.data(), x.size()); }

std::string CriterionReport::to_json() const {
    std::string out = "{\n";
    out += "  \"waic\": " + fmt17(waic) + ",\n";
    out += "  \"p_waic\": " + fmt17(p_waic) + ",\n";
    out += "  \"loo\": " + fmt17(loo) + ",\n";
    out += "  \"ccwaic\": " + fmt17(ccwaic) + ",\n";
    out += "  \"p_cc_naive\": " + fmt17(p_cc_naive) + ",\n";
    out += "  \"p_cc_corr\": " + fmt17(p_cc_corr) + ",\n";
    out += "  \"tau\": " + fmt17(tau) + ",\n";
    out += "  \"n_eff\": " + fmt17(n_eff) + ",\n";
    out += "  \"lppd\": " + fmt17(lppd) + "\n";
    out += "}";
    return out;
}

LogLikMatrix build_loglik_matrix(const PosteriorDraws& draws, const ObservationSeq& obs) {
    if (draws.draws.empty()) throw std::domain_error("build_loglik_matrix: no draws");
    if (obs.empty()) throw std::domain_error("build_loglik_matrix: empty observations");
    LogLikMatrix m;
    m.S = draws.draws.size();
    m.n = obs.size();
    m.values.resize(m.S * m.n);
    for (std::size_t s = 0; s < m.S; ++s) {
        try {
            FilterOutput f = forward_conditional_loglik(draws.draws[s], obs);
            std::copy(f.cond_loglik.begin(), f.cond_loglik.end(), m.values.begin() + s * m.n);
        } catch (const numerical_error& e) {
            throw numerical_error("draw " + std::to_string(s + 1) + ": " + e.what());
        }
    }
    for (double v : m.values)
        if (!std::isfinite(v))
            throw numerical_error("build_loglik_matrix: non-finite log-likelihood entry");
    return m;
}

namespace {

void require_shape(const LogLikMatrix& m, std::size_t min_s, const char* who) {
    if (m.n == 0 || m.values.size() != m.S * m.n)
        throw std::domain_error(std::string(who) + ": malformed matrix");
    if (m.S < min_s)
        throw std::domain_error(std::string(who) + ": need at least " + std::to_string(min_s) +
                                " draws, have " + std::to_string(m.S));
}

// Welford over one column; exact zero for a constant column.
double column_variance(const LogLikMatrix& m, std::size_t t) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t s = 0; s < m.S; ++s) {
        double x = m(s, t);
        double d = x - mean;
        mean += d / static_cast<double>(s + 1);
        m2 += d * (x - mean);
    }
    return m2 / static_cast<double>(m.S - 1);
}

}  // namespace

WaicResult compute_waic(const LogLikMatrix& m) {
    require_shape(m, 2, "compute_waic");
    WaicResult out;
    std::vector<double> col(m.S);
    for (std::size_t t = 0; t < m.n; ++t) {
        for (std::size_t s = 0; s < m.S; ++s) col[s] = m(s, t);
        out.lppd += log_mean_exp(col);
        out.p_waic += column_variance(m, t);
    }
    out.waic = -2.0 * (out.lppd - out.p_waic);
    return out;
}

double compute_loo(const LogLikMatrix& m) {
    require_shape(m, 2, "compute_loo");
    double total = 0.0;
    std::vector<double> neg(m.S);
    for (std::size_t t = 0; t < m.n; ++t) {
        for (std::size_t s = 0; s < m.S; ++s) neg[s] = -m(s, t);
        total += -log_mean_exp(neg);  // elpd_t = log S - logsumexp_s(-l_{s,t})
    }
    return -2.0 * total;
}

std::vector<double> joint_loglik_per_draw(const LogLikMatrix& m) {
    require_shape(m, 1, "joint_loglik_per_draw");
    std::vector<double> L(m.S, 0.0);
    for (std::size_t s = 0; s < m.S; ++s)
        for (std::size_t t = 0; t < m.n; ++t) L[s] += m(s, t);
    return L;
}

double naive_pcc(const std::vector<double>& L) {
    if (L.size() < 2) throw std::domain_error("naive_pcc: need at least 2 draws");
    double mean = 0.0, m2 = 0.0;
    for (std::size_t s = 0; s < L.size(); ++s) {
        double d = L[s] - mean;
        mean += d / static_cast<double>(s + 1);
        m2 += d * (L[s] - mean);
    }
    return m2 / static_cast<double>(L.size() - 1);
}

AutocorrResult autocorr_time(const std::vector<double>& L) {
    const std::size_t S = L.size();
    if (S < 4) throw std::domain_error("autocorr_time: need at least 4 draws");
    AutocorrResult out;

    double mean = 0.0;
    for (double v : L) mean += v;
    mean /= static_cast<double>(S);
    std::vector<double> d(S);
    for (std::size_t s = 0; s < S; ++s) d[s] = L[s] - mean;

    double c0 = 0.0;
    for (double v : d) c0 += v * v;
    c0 /= static_cast<double>(S);

    if (!(c0 > 0.0)) {  // constant chain: no autocorrelation by convention
        out.tau = out.tau_raw = 1.0;
        out.n_eff = static_cast<double>(S);
        return out;
    }

    const double cutoff = 2.0 / std::sqrt(static_cast<double>(S));
    const std::size_t lag_cap = S / 4;
    double rho_sum = 0.0;
    for (std::size_t k = 1; k <= lag_cap; ++k) {
        double ck = 0.0;
        for (std::size_t s = 0; s + k < S; ++s) ck += d[s] * d[s + k];
        ck /= static_cast<double>(S);
        double rho = ck / c0;
        out.rho.push_back(rho);
        if (std::abs(rho) < cutoff) break;  // truncation lag itself excluded
        rho_sum += rho;
    }

    out.tau_raw = 1.0 + 2.0 * rho_sum;
    out.tau = std::clamp(out.tau_raw, 1.0, static_cast<double>(S) / 2.0);
    out.n_eff = static_cast<double>(S) / out.tau;
    return out;
}

double corrected_pcc(double p_naive, double n_eff) {
    if (!(n_eff > 1.0)) throw std::domain_error("corrected_pcc: n_eff must be > 1");
    if (p_naive < 0.0) throw std::domain_error("corrected_pcc: negative variance estimate");
    return (n_eff / (n_eff - 1.0)) * p_naive;
}

CriterionReport compute_ccwaic(const LogLikMatrix& m) {
    require_shape(m, 4, "compute_ccwaic");
    CriterionReport r;

    WaicResult w = compute_waic(m);
    r.lppd = w.lppd;
    r.p_waic = w.p_waic;
    r.waic = w.waic;
    r.loo = compute_loo(m);

    std::vector<double> L = joint_loglik_per_draw(m);
    r.p_cc_naive = naive_pcc(L);
    AutocorrResult ac = autocorr_time(L);
    r.tau = ac.tau;
    r.n_eff = ac.n_eff;
    r.p_cc_corr = corrected_pcc(r.p_cc_naive, r.n_eff);
    r.ccwaic = -2.0 * (r.lppd - r.p_cc_corr);
    return r;
}

VarianceDecomposition variance_decomposition(const LogLikMatrix& m) {
    require_shape(m, 2, "variance_decomposition");
    VarianceDecomposition out;

    std::vector<double> mean(m.n, 0.0);
    for (std::size_t s = 0; s < m.S; ++s)
        for (std::size_t t = 0; t < m.n; ++t) mean[t] += m(s, t);
    for (double& v : mean) v /= static_cast<double>(m.S);

    // Centered copy so the pairwise pass is a straight dot product.
    std::vector<double> c(m.values);
    for (std::size_t s = 0; s < m.S; ++s)
        for (std::size_t t = 0; t < m.n; ++t) c[s * m.n + t] -= mean[t];

    const double denom = static_cast<double>(m.S - 1);
    for (std::size_t t = 0; t < m.n; ++t) {
        double acc = 0.0;
        for (std::size_t s = 0; s < m.S; ++s) acc += c[s * m.n + t] * c[s * m.n + t];
        out.sum_var += acc / denom;
    }
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = i + 1; j < m.n; ++j) {
            double acc = 0.0;
            for (std::size_t s = 0; s < m.S; ++s) acc += c[s * m.n + i] * c[s * m.n + j];
            out.twice_sum_cov += 2.0 * (acc / denom);
        }
    }
    return out;
}

namespace detail {

bool stationary_distribution(const HmmParams& params, std::vector<double>& out) {
    const std::size_t K = params.K;
    if (K == 1) {
        out.assign(1, 1.0);
        return true;
    }
    // Solve (A^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    std::vector<double> M(K * K);
    std::vector<double> rhs(K, 0.0);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j)
            M[i * K + j] = params.a(j, i) - (i == j ? 1.0 : 0.0);
    for (std::size_t j = 0; j < K; ++j) M[(K - 1) * K + j] = 1.0;
    rhs[K - 1] = 1.0;

    // Gaussian elimination with partial pivoting.
    for (std::size_t col = 0; col < K; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < K; ++r)
            if (std::abs(M[r * K + col]) > std::abs(M[piv * K + col])) piv = r;
        if (std::abs(M[piv * K + col]) < 1e-12) return false;
        if (piv != col) {
            for (std::size_t j = 0; j < K; ++j) std::swap(M[piv * K + j], M[col * K + j]);
            std::swap(rhs[piv], rhs[col]);
        }
        for (std::size_t r = col + 1; r < K; ++r) {
            double f = M[r * K + col] / M[col * K + col];
            if (f == 0.0) continue;
            for (std::size_t j = col; j < K; ++j) M[r * K + j] -= f * M[col * K + j];
            rhs[r] -= f * rhs[col];
        }
    }
    out.assign(K, 0.0);
    for (std::size_t r = K; r-- > 0;) {
        double acc = rhs[r];
        for (std::size_t j = r + 1; j < K; ++j) acc -= M[r * K + j] * out[j];
        out[r] = acc / M[r * K + r];
    }
    double total = 0.0;
    for (double& v : out) {
        if (v < 0.0) {
            if (v < -1e-9) return false;  // numerically invalid solution
            v = 0.0;
        }
        total += v;
    }
    if (!(total > 0.0) || !std::isfinite(total)) return false;
    for (double& v : out) v /= total;
    return true;
}

}  // namespace detail

double blfo_diagnostic(const PosteriorDraws& draws, const ObservationSeq& obs, std::size_t k,
                       const BlfoOptions& options, BlfoStats* stats) {
    const std::size_t n = obs.size();
    const std::size_t S = draws.draws.size();
    if (S == 0) throw std::domain_error("blfo_diagnostic: no draws");
    if (k < 1) throw std::domain_error("blfo_diagnostic: block size must be >= 1");
    if (k >= n) throw std::domain_error("blfo_diagnostic: block size must be < n");
    if (stats) stats->uniform_fallbacks = 0;

    // lp(s, t) = log p(y_t | y_{t-k..t-1}, theta^(s)) for t in [k, n).
    const std::size_t cols = n - k;
    std::vector<double> lp(S * cols);
    std::vector<double> init, alpha;
    for (std::size_t s = 0; s < S; ++s) {
        const HmmParams& p = draws.draws[s];
        switch (options.init) {
            case BlfoOptions::Init::InitialDist:
                init = p.pi;
                break;
            case BlfoOptions::Init::Uniform:
                init.assign(p.K, 1.0 / static_cast<double>(p.K));
                break;
            case BlfoOptions::Init::Stationary:
                if (!detail::stationary_distribution(p, init)) {
                    init.assign(p.K, 1.0 / static_cast<double>(p.K));
                    if (stats) ++stats->uniform_fallbacks;
                }
                break;
        }
        for (std::size_t t = k; t < n; ++t) {
            alpha = init;
            for (std::size_t u = t - k; u < t; ++u)
                detail::filter_step(p, alpha, obs[u], u + 1, u > t - k);
            lp[s * cols + (t - k)] = detail::filter_step(p, alpha, obs[t], t + 1, true);
        }
    }

    double total = 0.0;
    std::vector<double> col(S);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t s = 0; s < S; ++s) col[s] = lp[s * cols + c];
        total += log_mean_exp(col);
    }
    return -2.0 * total;
}

}  // namespace seqsel
