#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqsel/criteria.hpp"
#include "seqsel/dist.hpp"
#include "seqsel/errors.hpp"
#include "seqsel/gibbs.hpp"
#include "seqsel/hmm.hpp"
#include "seqsel/io.hpp"
#include "seqsel/simharness.hpp"

#ifndef SEQSEL_DATA_DIR
#define SEQSEL_DATA_DIR "data"
#endif

namespace {

constexpr const char* kVersion = "0.1.0";

using seqsel::ConfigMap;

struct Flags {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> chains, iters, burnin, T, replications;
    std::optional<int> case_id;
    std::optional<std::string> dependence, k_list, out_dir, config, data;
    bool dry_run = false;
};

void put(ConfigMap& cfg, const std::string& key, const std::string& v) { cfg[key] = v; }

template <typename T>
void overlay(ConfigMap& cfg, const std::string& key, const std::optional<T>& v) {
    if (!v) return;
    if constexpr (std::is_same_v<T, std::string>)
        cfg[key] = *v;
    else
        cfg[key] = std::to_string(*v);
}

// defaults < config file < explicit flags; unknown file keys are rejected so
// a typo cannot silently fall back to a default.
ConfigMap merge_config(ConfigMap defaults, const std::optional<std::string>& config_path,
                       const std::function<void(ConfigMap&)>& apply_flags) {
    if (config_path) {
        ConfigMap file = seqsel::read_config_file(*config_path);
        for (const auto& [k, v] : file) {
            if (!defaults.count(k))
                throw seqsel::config_error("unknown config key '" + k + "' in " + *config_path);
            defaults[k] = v;
        }
    }
    apply_flags(defaults);
    return defaults;
}

std::uint64_t cfg_u64(const ConfigMap& cfg, const std::string& key) {
    const std::string& s = cfg.at(key);
    char* end = nullptr;
    unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw seqsel::config_error(key + ": expected a non-negative integer, got '" + s + "'");
    return v;
}

std::size_t cfg_size(const ConfigMap& cfg, const std::string& key, std::size_t min_value = 0) {
    std::uint64_t v = cfg_u64(cfg, key);
    if (v < min_value)
        throw seqsel::config_error(key + " must be >= " + std::to_string(min_value));
    return static_cast<std::size_t>(v);
}

std::vector<std::size_t> parse_k_list(const std::string& s) {
    std::vector<std::size_t> ks;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!item.empty()) {
            char* end = nullptr;
            unsigned long v = std::strtoul(item.c_str(), &end, 10);
            if (end == item.c_str() || *end != '\0' || v < 2)
                throw seqsel::config_error("k_list: expected integers >= 2, got '" + item + "'");
            ks.push_back(v);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    if (ks.empty()) throw seqsel::config_error("k_list: empty");
    return ks;
}

std::filesystem::path prepare_out_dir(const ConfigMap& cfg) {
    std::filesystem::path dir = cfg.at("out_dir");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw seqsel::data_error("cannot create output directory " + dir.string());
    return dir;
}

void finish_manifest(const std::filesystem::path& dir, const std::string& command,
                     const ConfigMap& cfg, const std::string& started,
                     const std::vector<std::string>& outputs) {
    seqsel::RunManifest m;
    m.command = command;
    m.config = cfg;
    m.seed = cfg_u64(cfg, "seed");
    m.version = kVersion;
    m.started = started;
    m.finished = seqsel::iso8601_utc_now();
    m.outputs = outputs;
    seqsel::write_manifest((dir / "manifest.json").string(), m);
}

std::string indent_block(const std::string& block, const std::string& pad) {
    std::string out;
    out.reserve(block.size() + 64);
    for (char c : block) {
        out += c;
        if (c == '\n') out += pad;
    }
    return out;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Flags& flags) {
    ConfigMap defaults;
    put(defaults, "case", "2");
    put(defaults, "dependence", "high");
    put(defaults, "T", "100");
    put(defaults, "seed", "1");
    put(defaults, "out_dir", "out");
    ConfigMap cfg = merge_config(defaults, flags.config, [&](ConfigMap& c) {
        overlay(c, "case", flags.case_id);
        overlay(c, "dependence", flags.dependence);
        overlay(c, "T", flags.T);
        overlay(c, "seed", flags.seed);
        overlay(c, "out_dir", flags.out_dir);
    });

    int case_id = static_cast<int>(cfg_u64(cfg, "case"));
    seqsel::Dependence dep = seqsel::dependence_from_string(cfg.at("dependence"));
    std::size_t T = cfg_size(cfg, "T", 1);
    std::uint64_t seed = cfg_u64(cfg, "seed");

    std::string started = seqsel::iso8601_utc_now();
    seqsel::HmmParams truth = seqsel::case_params(case_id, dep);
    seqsel::RngState rng = seqsel::RngState::derive(
        seed, 0,
        "simulate case=" + std::to_string(case_id) + " dep=" + to_string(dep) +
            " T=" + std::to_string(T));
    seqsel::GeneratedSeq seq = seqsel::generate_sequence(truth, T, rng);

    std::string csv = "t,y,z_true\n";
    for (std::size_t t = 0; t < T; ++t)
        csv += std::to_string(t + 1) + "," + seqsel::fmt17(seq.obs[t]) + "," +
               std::to_string(seq.states[t] + 1) + "\n";

    std::filesystem::path dir = prepare_out_dir(cfg);
    seqsel::write_text_file((dir / "data.csv").string(), csv);
    finish_manifest(dir, "simulate", cfg, started, {"data.csv"});
    std::printf("wrote %s (%zu observations)\n", (dir / "data.csv").string().c_str(), T);
    return 0;
}

// ------------------------------------------------------------------ select

struct FitSummary {
    std::size_t K = 0;
    std::vector<seqsel::CriterionReport> chain_reports;
    std::vector<seqsel::HmmParams> chain_mean_params;  // posterior means, relabeled
    double mean_ccwaic = 0.0, mean_waic = 0.0, mean_loo = 0.0;
};

struct SelectionOutcome {
    std::vector<FitSummary> fits;  // ascending K
    std::size_t failed_chains = 0;
    std::size_t argmin_ccwaic = 0, argmin_waic = 0, argmin_loo = 0;
    std::size_t n_obs = 0;
    std::size_t draws_per_chain = 0;
};

seqsel::HmmParams posterior_mean_params(const seqsel::PosteriorDraws& relabeled) {
    const std::size_t K = relabeled.K;
    seqsel::HmmParams mean;
    mean.K = K;
    mean.pi.assign(K, 0.0);
    mean.A.assign(K * K, 0.0);
    mean.mu.assign(K, 0.0);
    mean.sigma.assign(K, 0.0);
    for (const seqsel::HmmParams& d : relabeled.draws) {
        for (std::size_t i = 0; i < K; ++i) {
            mean.pi[i] += d.pi[i];
            mean.mu[i] += d.mu[i];
            mean.sigma[i] += d.sigma[i];
            for (std::size_t j = 0; j < K; ++j) mean.a(i, j) += d.a(i, j);
        }
    }
    double inv = 1.0 / static_cast<double>(relabeled.draws.size());
    for (std::size_t i = 0; i < K; ++i) {
        mean.pi[i] *= inv;
        mean.mu[i] *= inv;
        mean.sigma[i] *= inv;
        for (std::size_t j = 0; j < K; ++j) mean.a(i, j) *= inv;
    }
    return mean;
}

SelectionOutcome run_selection(const seqsel::ObservationSeq& obs,
                               const std::vector<std::size_t>& ks, std::size_t chains,
                               seqsel::GibbsConfig gibbs, std::uint64_t seed) {
    seqsel::PriorSpec prior = seqsel::PriorSpec::weakly_informative(obs);
    SelectionOutcome out;
    out.n_obs = obs.size();
    out.draws_per_chain = gibbs.n_iter - gibbs.burn_in;
    for (std::size_t K : ks) {
        FitSummary fit;
        fit.K = K;
        for (std::size_t chain = 0; chain < chains; ++chain) {
            seqsel::RngState rng = seqsel::RngState::derive(
                seed, chain, "select fit K=" + std::to_string(K));
            try {
                seqsel::PosteriorDraws draws =
                    seqsel::gibbs_fit(obs, K, prior, gibbs.n_iter, gibbs.burn_in, rng, chain);
                seqsel::LogLikMatrix m = seqsel::build_loglik_matrix(draws, obs);
                fit.chain_reports.push_back(seqsel::compute_ccwaic(m));
                fit.chain_mean_params.push_back(posterior_mean_params(seqsel::relabel(draws)));
            } catch (const seqsel::numerical_error&) {
                ++out.failed_chains;
            }
        }
        if (fit.chain_reports.empty())
            throw seqsel::numerical_error("all chains failed for K = " + std::to_string(K));
        double inv = 1.0 / static_cast<double>(fit.chain_reports.size());
        for (const seqsel::CriterionReport& r : fit.chain_reports) {
            fit.mean_ccwaic += r.ccwaic * inv;
            fit.mean_waic += r.waic * inv;
            fit.mean_loo += r.loo * inv;
        }
        out.fits.push_back(std::move(fit));
    }
    double best_cc = std::numeric_limits<double>::infinity();
    double best_waic = best_cc, best_loo = best_cc;
    for (const FitSummary& fit : out.fits) {  // ascending K: strict < keeps smaller K on ties
        if (fit.mean_ccwaic < best_cc) { best_cc = fit.mean_ccwaic; out.argmin_ccwaic = fit.K; }
        if (fit.mean_waic < best_waic) { best_waic = fit.mean_waic; out.argmin_waic = fit.K; }
        if (fit.mean_loo < best_loo) { best_loo = fit.mean_loo; out.argmin_loo = fit.K; }
    }
    return out;
}

std::string selection_report_json(const SelectionOutcome& outcome) {
    std::string out = "[\n";
    for (std::size_t i = 0; i < outcome.fits.size(); ++i) {
        const FitSummary& fit = outcome.fits[i];
        out += "  {\n    \"K\": " + std::to_string(fit.K) + ",\n    \"chains\": [\n";
        for (std::size_t c = 0; c < fit.chain_reports.size(); ++c) {
            out += "      " + indent_block(fit.chain_reports[c].to_json(), "      ");
            out += c + 1 < fit.chain_reports.size() ? ",\n" : "\n";
        }
        out += "    ]\n  }";
        out += i + 1 < outcome.fits.size() ? ",\n" : "\n";
    }
    out += "]\n";
    return out;
}

std::string selection_summary_text(const SelectionOutcome& outcome,
                                   const seqsel::GibbsConfig& gibbs, std::size_t chains) {
    char buf[256];
    std::string out = "model selection over K in {";
    for (std::size_t i = 0; i < outcome.fits.size(); ++i)
        out += (i ? ", " : "") + std::to_string(outcome.fits[i].K);
    out += "}; chains per K: " + std::to_string(chains) + "\n";
    std::snprintf(buf, sizeof(buf),
                  "observations: %zu; draws per chain: %zu (%zu iterations, %zu burn-in)\n",
                  outcome.n_obs, outcome.draws_per_chain, gibbs.n_iter, gibbs.burn_in);
    out += buf;
    out += "failed chains: " + std::to_string(outcome.failed_chains) + "\n\n";
    out += "mean criterion values across chains (deviance scale, smaller is better)\n";
    std::snprintf(buf, sizeof(buf), "%-6s%-26s%-26s%-26s\n", "K", "ccwaic", "waic", "loo");
    out += buf;
    for (const FitSummary& fit : outcome.fits) {
        std::snprintf(buf, sizeof(buf), "%-6zu%-26s%-26s%-26s\n", fit.K,
                      seqsel::fmt17(fit.mean_ccwaic).c_str(), seqsel::fmt17(fit.mean_waic).c_str(),
                      seqsel::fmt17(fit.mean_loo).c_str());
        out += buf;
    }
    out += "\nargmin (ties broken toward smaller K)\n";
    out += "ccwaic: K = " + std::to_string(outcome.argmin_ccwaic) + "\n";
    out += "waic:   K = " + std::to_string(outcome.argmin_waic) + "\n";
    out += "loo:    K = " + std::to_string(outcome.argmin_loo) + "\n";
    return out;
}

int cmd_select(const Flags& flags) {
    ConfigMap defaults;
    put(defaults, "data", "");
    put(defaults, "k_list", "2,3,4,5");
    put(defaults, "chains", "1");
    put(defaults, "iters", "1000");
    put(defaults, "burnin", "500");
    put(defaults, "seed", "1");
    put(defaults, "out_dir", "out");
    ConfigMap cfg = merge_config(defaults, flags.config, [&](ConfigMap& c) {
        overlay(c, "data", flags.data);
        overlay(c, "k_list", flags.k_list);
        overlay(c, "chains", flags.chains);
        overlay(c, "iters", flags.iters);
        overlay(c, "burnin", flags.burnin);
        overlay(c, "seed", flags.seed);
        overlay(c, "out_dir", flags.out_dir);
    });

    if (cfg.at("data").empty())
        throw seqsel::config_error("select: --data <csv> is required");
    std::vector<std::size_t> ks = parse_k_list(cfg.at("k_list"));
    std::size_t chains = cfg_size(cfg, "chains", 1);
    seqsel::GibbsConfig gibbs;
    gibbs.n_iter = cfg_size(cfg, "iters", 2);
    gibbs.burn_in = cfg_size(cfg, "burnin", 0);
    std::uint64_t seed = cfg_u64(cfg, "seed");

    std::string started = seqsel::iso8601_utc_now();
    seqsel::ObservationSeq obs = seqsel::read_observation_csv(cfg.at("data"));
    if (obs.size() < ks.back())
        throw std::domain_error("select: need at least max(k_list) = " +
                                std::to_string(ks.back()) + " observations, have " +
                                std::to_string(obs.size()));

    SelectionOutcome outcome = run_selection(obs, ks, chains, gibbs, seed);

    std::filesystem::path dir = prepare_out_dir(cfg);
    seqsel::write_text_file((dir / "report.json").string(), selection_report_json(outcome));
    seqsel::write_text_file((dir / "summary.txt").string(),
                            selection_summary_text(outcome, gibbs, chains));
    finish_manifest(dir, "select", cfg, started, {"report.json", "summary.txt"});
    std::printf("ccwaic argmin: K = %zu (report in %s)\n", outcome.argmin_ccwaic,
                dir.string().c_str());
    return 0;
}

// ---------------------------------------------------------------- faithful

int cmd_faithful(const Flags& flags) {
    ConfigMap defaults;
    put(defaults, "data", std::string(SEQSEL_DATA_DIR) + "/old_faithful_waiting.csv");
    put(defaults, "k_list", "2,3,4,5,6");
    put(defaults, "chains", "1");
    put(defaults, "iters", "1000");
    put(defaults, "burnin", "500");
    put(defaults, "seed", "1");
    put(defaults, "out_dir", "out");
    ConfigMap cfg = merge_config(defaults, flags.config, [&](ConfigMap& c) {
        overlay(c, "data", flags.data);
        overlay(c, "k_list", flags.k_list);
        overlay(c, "chains", flags.chains);
        overlay(c, "iters", flags.iters);
        overlay(c, "burnin", flags.burnin);
        overlay(c, "seed", flags.seed);
        overlay(c, "out_dir", flags.out_dir);
    });

    std::vector<std::size_t> ks = parse_k_list(cfg.at("k_list"));
    std::size_t chains = cfg_size(cfg, "chains", 1);
    seqsel::GibbsConfig gibbs;
    gibbs.n_iter = cfg_size(cfg, "iters", 2);
    gibbs.burn_in = cfg_size(cfg, "burnin", 0);
    std::uint64_t seed = cfg_u64(cfg, "seed");

    std::string started = seqsel::iso8601_utc_now();
    if (!std::filesystem::exists(cfg.at("data")))
        throw seqsel::data_error("bundled dataset not found: " + cfg.at("data"));
    seqsel::ObservationSeq obs = seqsel::read_observation_csv(cfg.at("data"));

    SelectionOutcome outcome = run_selection(obs, ks, chains, gibbs, seed);

    // Histogram of the raw series, width-5 bins covering the data range.
    double lo = *std::min_element(obs.begin(), obs.end());
    double hi = *std::max_element(obs.begin(), obs.end());
    double left = std::floor(lo / 5.0) * 5.0;
    double right = std::ceil(hi / 5.0) * 5.0;
    if (right <= left) right = left + 5.0;
    std::size_t n_bins = static_cast<std::size_t>(std::lround((right - left) / 5.0));
    std::vector<std::size_t> counts(n_bins, 0);
    for (double y : obs) {
        std::size_t b = static_cast<std::size_t>((y - left) / 5.0);
        if (b >= n_bins) b = n_bins - 1;  // right edge closes the last bin
        ++counts[b];
    }
    std::string hist = "bin_left,bin_right,count\n";
    for (std::size_t b = 0; b < n_bins; ++b)
        hist += seqsel::fmt17(left + 5.0 * static_cast<double>(b)) + "," +
                seqsel::fmt17(left + 5.0 * static_cast<double>(b + 1)) + "," +
                std::to_string(counts[b]) + "\n";

    // Per-state Gaussian curves for the ccwaic-selected model, weighted by the
    // stationary distribution of the posterior-mean transition matrix.
    const FitSummary* selected = nullptr;
    for (const FitSummary& fit : outcome.fits)
        if (fit.K == outcome.argmin_ccwaic) selected = &fit;
    const seqsel::HmmParams& mean_params = selected->chain_mean_params.front();
    std::vector<double> weights;
    if (!seqsel::detail::stationary_distribution(mean_params, weights))
        weights.assign(mean_params.K, 1.0 / static_cast<double>(mean_params.K));
    std::string curves = "x,state,weight,density,weighted_density\n";
    for (double x = left; x <= right + 1e-9; x += 0.5) {
        for (std::size_t k = 0; k < mean_params.K; ++k) {
            double pdf = std::exp(seqsel::normal_logpdf(x, mean_params.mu[k], mean_params.sigma[k]));
            curves += seqsel::fmt17(x) + "," + std::to_string(k + 1) + "," +
                      seqsel::fmt17(weights[k]) + "," + seqsel::fmt17(pdf) + "," +
                      seqsel::fmt17(weights[k] * pdf) + "\n";
        }
    }

    std::string summary = selection_summary_text(outcome, gibbs, chains);
    summary += "\nselected model (ccwaic): K = " + std::to_string(outcome.argmin_ccwaic) + "\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-7s%-26s%-26s%-26s\n", "state", "weight", "mean", "sd");
    summary += buf;
    for (std::size_t k = 0; k < mean_params.K; ++k) {
        std::snprintf(buf, sizeof(buf), "%-7zu%-26s%-26s%-26s\n", k + 1,
                      seqsel::fmt17(weights[k]).c_str(), seqsel::fmt17(mean_params.mu[k]).c_str(),
                      seqsel::fmt17(mean_params.sigma[k]).c_str());
        summary += buf;
    }

    std::filesystem::path dir = prepare_out_dir(cfg);
    seqsel::write_text_file((dir / "report.json").string(), selection_report_json(outcome));
    seqsel::write_text_file((dir / "summary.txt").string(), summary);
    seqsel::write_text_file((dir / "histogram.csv").string(), hist);
    seqsel::write_text_file((dir / "density_curves.csv").string(), curves);
    finish_manifest(dir, "faithful", cfg, started,
                    {"report.json", "summary.txt", "histogram.csv", "density_curves.csv"});
    std::printf("ccwaic argmin: K = %zu (report in %s)\n", outcome.argmin_ccwaic,
                dir.string().c_str());
    return 0;
}

// --------------------------------------------------------- reproduce-tables

int cmd_reproduce_tables(const Flags& flags) {
    ConfigMap defaults;
    put(defaults, "case", "all");
    put(defaults, "dependence", "all");
    put(defaults, "T", "all");
    put(defaults, "k_list", "2,3,4,5");
    put(defaults, "replications", "20");
    put(defaults, "chains", "2");
    put(defaults, "iters", "1000");
    put(defaults, "burnin", "500");
    put(defaults, "seed", "1");
    put(defaults, "out_dir", "out");
    ConfigMap cfg = merge_config(defaults, flags.config, [&](ConfigMap& c) {
        if (flags.case_id) c["case"] = std::to_string(*flags.case_id);
        overlay(c, "dependence", flags.dependence);
        overlay(c, "T", flags.T);
        overlay(c, "k_list", flags.k_list);
        overlay(c, "replications", flags.replications);
        overlay(c, "chains", flags.chains);
        overlay(c, "iters", flags.iters);
        overlay(c, "burnin", flags.burnin);
        overlay(c, "seed", flags.seed);
        overlay(c, "out_dir", flags.out_dir);
    });

    seqsel::HarnessConfig hc;
    if (cfg.at("case") != "all") {
        ConfigMap one{{"case", cfg.at("case")}};
        hc.cases = {static_cast<int>(cfg_u64(one, "case"))};
    }
    if (cfg.at("dependence") != "all")
        hc.dependences = {seqsel::dependence_from_string(cfg.at("dependence"))};
    if (cfg.at("T") != "all") {
        ConfigMap one{{"T", cfg.at("T")}};
        hc.lengths = {cfg_size(one, "T", 10)};
    }
    hc.candidate_Ks = parse_k_list(cfg.at("k_list"));
    hc.n_replications = cfg_size(cfg, "replications", 1);
    hc.n_chains = cfg_size(cfg, "chains", 1);
    hc.gibbs.n_iter = cfg_size(cfg, "iters", 2);
    hc.gibbs.burn_in = cfg_size(cfg, "burnin", 0);
    hc.base_seed = cfg_u64(cfg, "seed");
    if (hc.gibbs.burn_in >= hc.gibbs.n_iter)
        throw seqsel::config_error("burnin must be smaller than iters");

    std::vector<seqsel::Scenario> scenarios = seqsel::build_scenarios(hc);

    if (flags.dry_run) {
        std::printf("planned grid (%zu scenarios, %zu replications x %zu chains each):\n",
                    scenarios.size(), hc.n_replications, hc.n_chains);
        for (const seqsel::Scenario& sc : scenarios)
            std::printf("  case %d  %-6s  T=%zu  K_true=%zu\n", sc.case_id,
                        to_string(sc.dependence).c_str(), sc.T, sc.k_true);
        return 0;
    }

    std::string started = seqsel::iso8601_utc_now();
    std::size_t total = 0;
    for (const seqsel::Scenario& sc : scenarios) total += sc.n_replications;
    std::size_t done = 0;
    seqsel::HarnessRun run = seqsel::run_scenarios(
        scenarios, [&](const seqsel::Scenario& sc, std::size_t rep) {
            ++done;
            std::fprintf(stderr, "[%zu/%zu] case %d %s T=%zu rep %zu\n", done, total, sc.case_id,
                         to_string(sc.dependence).c_str(), sc.T, rep + 1);
        });

    std::filesystem::path dir = prepare_out_dir(cfg);
    seqsel::write_text_file((dir / "accuracy_table.csv").string(), run.table.to_csv());
    std::string text = run.table.to_text();
    text += "failed chains: " + std::to_string(run.failed_chains) + "\n";
    seqsel::write_text_file((dir / "accuracy_table.txt").string(), text);
    finish_manifest(dir, "reproduce-tables", cfg, started,
                    {"accuracy_table.csv", "accuracy_table.txt"});
    std::printf("accuracy table in %s (failed chains: %zu)\n", dir.string().c_str(),
                run.failed_chains);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model selection for Gaussian hidden Markov models on sequential data"};
    app.require_subcommand(1);

    Flags sim_flags, sel_flags, faith_flags, rep_flags;

    CLI::App* sim = app.add_subcommand("simulate", "Generate a sequence from a benchmark truth");
    sim->add_option("--case", sim_flags.case_id, "benchmark case (1: 3 states, 2: 2 states)");
    sim->add_option("--dependence", sim_flags.dependence, "low|medium|high");
    sim->add_option("--T", sim_flags.T, "sequence length");
    sim->add_option("--seed", sim_flags.seed, "random seed");
    sim->add_option("--out-dir", sim_flags.out_dir, "output directory");
    sim->add_option("--config", sim_flags.config, "config file or previous manifest.json");

    CLI::App* sel = app.add_subcommand("select", "Fit candidate models to a CSV and rank them");
    sel->add_option("--data", sel_flags.data, "single-column observation CSV");
    sel->add_option("--k-list", sel_flags.k_list, "comma-separated state counts (default 2,3,4,5)");
    sel->add_option("--chains", sel_flags.chains, "chains per candidate K");
    sel->add_option("--iters", sel_flags.iters, "sampler iterations");
    sel->add_option("--burnin", sel_flags.burnin, "burn-in iterations");
    sel->add_option("--seed", sel_flags.seed, "random seed");
    sel->add_option("--out-dir", sel_flags.out_dir, "output directory");
    sel->add_option("--config", sel_flags.config, "config file or previous manifest.json");

    CLI::App* faith = app.add_subcommand("faithful", "Run selection on the bundled geyser data");
    faith->add_option("--data", faith_flags.data, "override the bundled CSV");
    faith->add_option("--k-list", faith_flags.k_list, "state counts (default 2,3,4,5,6)");
    faith->add_option("--chains", faith_flags.chains, "chains per candidate K");
    faith->add_option("--iters", faith_flags.iters, "sampler iterations");
    faith->add_option("--burnin", faith_flags.burnin, "burn-in iterations");
    faith->add_option("--seed", faith_flags.seed, "random seed");
    faith->add_option("--out-dir", faith_flags.out_dir, "output directory");
    faith->add_option("--config", faith_flags.config, "config file or previous manifest.json");

    CLI::App* rep = app.add_subcommand("reproduce-tables",
                                       "Run the simulation grid and tabulate selection accuracy");
    rep->add_option("--case", rep_flags.case_id, "1, 2 (default: both)");
    rep->add_option("--dependence", rep_flags.dependence, "low|medium|high (default: all)");
    rep->add_option("--T", rep_flags.T, "sequence length (default: 100, 250, 500)");
    rep->add_option("--k-list", rep_flags.k_list, "candidate state counts");
    rep->add_option("--replications", rep_flags.replications, "datasets per scenario");
    rep->add_option("--chains", rep_flags.chains, "chains per candidate K");
    rep->add_option("--iters", rep_flags.iters, "sampler iterations");
    rep->add_option("--burnin", rep_flags.burnin, "burn-in iterations");
    rep->add_option("--seed", rep_flags.seed, "base random seed");
    rep->add_option("--out-dir", rep_flags.out_dir, "output directory");
    rep->add_option("--config", rep_flags.config, "config file or previous manifest.json");
    rep->add_flag("--dry-run", rep_flags.dry_run, "print the planned grid and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_flags);
        if (sel->parsed()) return cmd_select(sel_flags);
        if (faith->parsed()) return cmd_faithful(faith_flags);
        if (rep->parsed()) return cmd_reproduce_tables(rep_flags);
        return 2;
    } catch (const seqsel::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const seqsel::data_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const seqsel::numerical_error& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
