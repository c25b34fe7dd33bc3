#include "seqsel/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "seqsel/errors.hpp"
#include "seqsel/io.hpp"

namespace seqsel {

std::string to_string(Dependence dep) {
    switch (dep) {
        case Dependence::Low: return "low";
        case Dependence::Medium: return "medium";
        case Dependence::High: return "high";
    }
    return "?";
}

Dependence dependence_from_string(const std::string& name) {
    if (name == "low") return Dependence::Low;
    if (name == "medium" || name == "med") return Dependence::Medium;
    if (name == "high") return Dependence::High;
    throw config_error("unknown dependence level '" + name + "' (use low|medium|high)");
}

HmmParams case_params(int case_id, Dependence dep) {
    HmmParams p;
    if (case_id == 1) {
        p.K = 3;
        p.mu = {-3.0, 0.0, 3.0};
        p.sigma = {0.5, 0.8, 1.5};
        p.pi = {1.0, 0.0, 0.0};
        double diag = 0.0, off = 0.0;
        switch (dep) {
            case Dependence::High: diag = 0.90; off = 0.05; break;
            case Dependence::Medium: diag = 0.60; off = 0.20; break;
            case Dependence::Low: diag = 0.34; off = 0.33; break;
        }
        p.A.assign(9, off);
        for (std::size_t i = 0; i < 3; ++i) p.a(i, i) = diag;
    } else if (case_id == 2) {
        p.K = 2;
        p.mu = {-2.0, 2.0};
        p.sigma = {0.5, 1.0};
        p.pi = {1.0, 0.0};
        double diag = 0.0;
        switch (dep) {
            case Dependence::High: diag = 0.95; break;
            case Dependence::Medium: diag = 0.70; break;
            case Dependence::Low: diag = 0.50; break;
        }
        p.A = {diag, 1.0 - diag, 1.0 - diag, diag};
    } else {
        throw config_error("unknown case " + std::to_string(case_id) + " (use 1 or 2)");
    }
    p.validate();
    return p;
}

std::vector<Scenario> build_scenarios(const HarnessConfig& config) {
    if (config.cases.empty() || config.dependences.empty() || config.lengths.empty())
        throw config_error("build_scenarios: empty scenario grid");
    if (config.candidate_Ks.empty()) throw config_error("build_scenarios: empty candidate K set");
    if (config.n_replications < 1) throw config_error("build_scenarios: need >= 1 replication");
    if (config.n_chains < 1) throw config_error("build_scenarios: need >= 1 chain");

    std::vector<Scenario> out;
    for (int case_id : config.cases) {
        for (Dependence dep : config.dependences) {
            for (std::size_t T : config.lengths) {
                Scenario sc;
                sc.case_id = case_id;
                sc.dependence = dep;
                sc.T = T;
                sc.true_params = case_params(case_id, dep);
                sc.k_true = sc.true_params.K;
                sc.candidate_Ks = config.candidate_Ks;
                std::sort(sc.candidate_Ks.begin(), sc.candidate_Ks.end());
                sc.n_replications = config.n_replications;
                sc.n_chains = config.n_chains;
                sc.gibbs = config.gibbs;
                sc.base_seed = config.base_seed;
                out.push_back(std::move(sc));
            }
        }
    }
    return out;
}

namespace {

std::string scenario_tag(const Scenario& sc) {
    return "case=" + std::to_string(sc.case_id) + " dep=" + to_string(sc.dependence) +
           " T=" + std::to_string(sc.T);
}

struct CriterionBest {
    double value = std::numeric_limits<double>::infinity();
    std::size_t K = 0;
};

void consider(CriterionBest& best, double value, std::size_t K) {
    // Candidate Ks arrive ascending, so strict improvement = ties to smaller K.
    if (value < best.value) {
        best.value = value;
        best.K = K;
    }
}

}  // namespace

ReplicationResult run_replication(const Scenario& sc, std::size_t rep_index) {
    RngState data_rng = RngState::derive(sc.base_seed, rep_index, scenario_tag(sc) + " data");
    GeneratedSeq seq = generate_sequence(sc.true_params, sc.T, data_rng);
    PriorSpec prior = PriorSpec::weakly_informative(seq.obs);

    ReplicationResult out;
    for (std::size_t chain = 0; chain < sc.n_chains; ++chain) {
        CriterionBest best_cc, best_waic, best_loo;
        bool ok = true;
        for (std::size_t K : sc.candidate_Ks) {
            RngState rng = RngState::derive(
                sc.base_seed, rep_index,
                scenario_tag(sc) + " fit K=" + std::to_string(K) + " chain=" + std::to_string(chain));
            try {
                PosteriorDraws draws = gibbs_fit(seq.obs, K, prior, sc.gibbs.n_iter,
                                                 sc.gibbs.burn_in, rng, chain);
                LogLikMatrix m = build_loglik_matrix(draws, seq.obs);
                CriterionReport r = compute_ccwaic(m);
                consider(best_cc, r.ccwaic, K);
                consider(best_waic, r.waic, K);
                consider(best_loo, r.loo, K);
            } catch (const numerical_error&) {
                ok = false;
                break;
            }
        }
        if (ok) {
            out.chains.push_back({best_cc.K, best_waic.K, best_loo.K});
        } else {
            ++out.failed_chains;
        }
    }
    return out;
}

AccuracyTable aggregate_accuracy(const Scenario& sc, const std::vector<ReplicationResult>& reps) {
    if (reps.empty()) throw std::domain_error("aggregate_accuracy: no replications");
    AccuracyTable table;
    const char* names[] = {"ccwaic", "waic", "loo"};
    for (const char* criterion : names) {
        for (std::size_t K : sc.candidate_Ks) {
            std::vector<double> freqs;
            for (const ReplicationResult& rep : reps) {
                if (rep.chains.empty()) continue;
                std::size_t hits = 0;
                for (const ChainSelection& sel : rep.chains) {
                    std::size_t picked = criterion == std::string("ccwaic") ? sel.ccwaic_K
                                       : criterion == std::string("waic")   ? sel.waic_K
                                                                            : sel.loo_K;
                    if (picked == K) ++hits;
                }
                freqs.push_back(100.0 * static_cast<double>(hits) /
                                static_cast<double>(rep.chains.size()));
            }
            AccuracyRow row;
            row.case_id = sc.case_id;
            row.dependence = sc.dependence;
            row.T = sc.T;
            row.K = K;
            row.criterion = criterion;
            if (freqs.empty()) {
                row.mean_pct = row.sd_pct = std::numeric_limits<double>::quiet_NaN();
            } else {
                double mean = 0.0;
                for (double f : freqs) mean += f;
                mean /= static_cast<double>(freqs.size());
                double ss = 0.0;
                for (double f : freqs) ss += (f - mean) * (f - mean);
                row.mean_pct = mean;
                row.sd_pct = freqs.size() > 1
                                 ? std::sqrt(ss / static_cast<double>(freqs.size() - 1))
                                 : 0.0;
            }
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

std::string AccuracyTable::to_csv() const {
    std::string out = "case,dependence,T,K,criterion,mean_pct,sd_pct\n";
    for (const AccuracyRow& r : rows) {
        out += std::to_string(r.case_id) + "," + to_string(r.dependence) + "," +
               std::to_string(r.T) + "," + std::to_string(r.K) + "," + r.criterion + "," +
               fmt17(r.mean_pct) + "," + fmt17(r.sd_pct) + "\n";
    }
    return out;
}

std::string AccuracyTable::to_text() const {
    std::string out;
    std::string last_group;
    // rows arrive grouped by scenario, criterion-major; render K x criterion blocks
    for (std::size_t i = 0; i < rows.size();) {
        const AccuracyRow& head = rows[i];
        std::string group = "Case " + std::to_string(head.case_id) + ", " +
                            to_string(head.dependence) + " dependence, T = " +
                            std::to_string(head.T);
        // Collect this scenario's rows (same case/dep/T).
        std::size_t j = i;
        while (j < rows.size() && rows[j].case_id == head.case_id &&
               rows[j].dependence == head.dependence && rows[j].T == head.T)
            ++j;
        out += group + "\n";
        char buf[128];
        std::snprintf(buf, sizeof(buf), "  %-4s %22s %22s %22s\n", "K", "ccwaic", "waic", "loo");
        out += buf;
        std::vector<std::size_t> ks;
        for (std::size_t r = i; r < j; ++r)
            if (std::find(ks.begin(), ks.end(), rows[r].K) == ks.end()) ks.push_back(rows[r].K);
        std::sort(ks.begin(), ks.end());
        for (std::size_t K : ks) {
            std::string line;
            std::snprintf(buf, sizeof(buf), "  %-4zu", K);
            line += buf;
            for (const char* criterion : {"ccwaic", "waic", "loo"}) {
                double mean = std::numeric_limits<double>::quiet_NaN(), sd = mean;
                for (std::size_t r = i; r < j; ++r) {
                    if (rows[r].K == K && rows[r].criterion == criterion) {
                        mean = rows[r].mean_pct;
                        sd = rows[r].sd_pct;
                    }
                }
                std::snprintf(buf, sizeof(buf), "        %6.1f +- %5.1f", mean, sd);
                line += buf;
            }
            out += line + "\n";
        }
        out += "\n";
        i = j;
    }
    (void)last_group;
    return out;
}

HarnessRun run_scenarios(const std::vector<Scenario>& scenarios,
                         const std::function<void(const Scenario&, std::size_t)>& on_progress) {
    if (scenarios.empty()) throw std::domain_error("run_scenarios: no scenarios");

    struct Task {
        std::size_t scenario;
        std::size_t rep;
    };
    std::vector<Task> tasks;
    std::vector<std::vector<ReplicationResult>> results(scenarios.size());
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        results[s].resize(scenarios[s].n_replications);
        for (std::size_t r = 0; r < scenarios[s].n_replications; ++r) tasks.push_back({s, r});
    }

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr first_error;
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            try {
                results[task.scenario][task.rep] =
                    run_replication(scenarios[task.scenario], task.rep);
                if (on_progress) {
                    std::lock_guard<std::mutex> lock(mu);
                    on_progress(scenarios[task.scenario], task.rep);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::size_t n_threads = std::min(worker_thread_count(), tasks.size());
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    HarnessRun run;
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        AccuracyTable part = aggregate_accuracy(scenarios[s], results[s]);
        run.table.rows.insert(run.table.rows.end(), part.rows.begin(), part.rows.end());
        for (const ReplicationResult& rep : results[s]) run.failed_chains += rep.failed_chains;
    }
    return run;
}

}  // namespace seqsel
