#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seqsel/criteria.hpp"
#include "seqsel/gibbs.hpp"
#include "seqsel/hmm.hpp"

namespace seqsel {

enum class Dependence { Low, Medium, High };

std::string to_string(Dependence dep);
Dependence dependence_from_string(const std::string& name);  // config_error on unknown

struct GibbsConfig {
    std::size_t n_iter = 1000;
    std::size_t burn_in = 500;
};

// One cell of the simulation grid: a generating truth plus the fitting and
// replication protocol applied to it.
struct Scenario {
    int case_id = 2;  // case 1: K_true = 3, case 2: K_true = 2
    std::size_t k_true = 2;
    Dependence dependence = Dependence::High;
    std::size_t T = 100;
    HmmParams true_params;
    std::vector<std::size_t> candidate_Ks{2, 3, 4, 5};
    std::size_t n_replications = 20;
    std::size_t n_chains = 2;
    GibbsConfig gibbs;
    std::uint64_t base_seed = 1;
};

// Generating truth for a (case, dependence) cell; the case fixes K, mu,
// sigma, pi and the dependence level picks the transition matrix.
HmmParams case_params(int case_id, Dependence dep);

struct HarnessConfig {
    std::vector<int> cases{1, 2};
    std::vector<Dependence> dependences{Dependence::Low, Dependence::Medium, Dependence::High};
    std::vector<std::size_t> lengths{100, 250, 500};
    std::vector<std::size_t> candidate_Ks{2, 3, 4, 5};
    std::size_t n_replications = 20;
    std::size_t n_chains = 2;
    GibbsConfig gibbs;
    std::uint64_t base_seed = 1;
};

// Cross product of cases x dependence levels x lengths (full default grid:
// 18 scenarios).
std::vector<Scenario> build_scenarios(const HarnessConfig& config);

// Which K each criterion picked for one chain (argmin, ties to smaller K).
struct ChainSelection {
    std::size_t ccwaic_K = 0;
    std::size_t waic_K = 0;
    std::size_t loo_K = 0;
};

struct ReplicationResult {
    std::vector<ChainSelection> chains;  // only chains whose every fit succeeded
    std::size_t failed_chains = 0;
};

// Generates one dataset from the scenario truth and fits every candidate K
// with every chain. A chain that fails numerically on any K is dropped from
// the tallies and counted.
ReplicationResult run_replication(const Scenario& sc, std::size_t rep_index);

struct AccuracyRow {
    int case_id = 0;
    Dependence dependence = Dependence::Low;
    std::size_t T = 0;
    std::size_t K = 0;
    std::string criterion;
    double mean_pct = 0.0;
    double sd_pct = 0.0;
};

struct AccuracyTable {
    std::vector<AccuracyRow> rows;

    std::string to_csv() const;   // case,dependence,T,K,criterion,mean_pct,sd_pct
    std::string to_text() const;  // grouped human-readable rendering
};

// Per-replication selection frequencies reduced to mean and sd percentages
// for each (criterion, K).
AccuracyTable aggregate_accuracy(const Scenario& sc, const std::vector<ReplicationResult>& reps);

struct HarnessRun {
    AccuracyTable table;
    std::size_t failed_chains = 0;
};

// Runs every replication of every scenario on a worker pool (size capped by
// SEQSEL_THREADS). Results are independent of the thread schedule: each task
// derives its own generator stream from (base_seed, scenario, replication).
HarnessRun run_scenarios(const std::vector<Scenario>& scenarios,
                         const std::function<void(const Scenario&, std::size_t)>& on_progress = {});

}  // namespace seqsel
