#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "seqsel/errors.hpp"
#include "seqsel/io.hpp"
#include "seqsel/simharness.hpp"

using namespace seqsel;

#ifndef SEQSEL_TEST_DIR
#define SEQSEL_TEST_DIR "."
#endif

namespace {

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

}  // namespace

TEST_CASE("dependence labels round-trip") {
    CHECK(to_string(Dependence::Low) == "low");
    CHECK(to_string(Dependence::Medium) == "medium");
    CHECK(to_string(Dependence::High) == "high");
    CHECK(dependence_from_string("low") == Dependence::Low);
    CHECK(dependence_from_string("medium") == Dependence::Medium);
    CHECK(dependence_from_string("high") == Dependence::High);
    CHECK_THROWS_AS(dependence_from_string("extreme"), config_error);
}

TEST_CASE("benchmark truths match the transcription fixture") {
    ConfigMap fx = read_config_file(std::string(SEQSEL_TEST_DIR) + "/benchmark_truths.txt");
    const char* levels[] = {"low", "medium", "high"};
    const Dependence deps[] = {Dependence::Low, Dependence::Medium, Dependence::High};
    for (int case_id = 1; case_id <= 2; ++case_id) {
        std::string base = "case" + std::to_string(case_id) + ".";
        std::size_t K = static_cast<std::size_t>(std::stoul(fx.at(base + "k")));
        std::vector<double> mu = split_doubles(fx.at(base + "mu"));
        std::vector<double> sigma = split_doubles(fx.at(base + "sigma"));
        std::vector<double> pi = split_doubles(fx.at(base + "pi"));
        for (int d = 0; d < 3; ++d) {
            HmmParams p = case_params(case_id, deps[d]);
            REQUIRE(p.K == K);
            for (std::size_t k = 0; k < K; ++k) {
                CHECK(p.mu[k] == mu[k]);
                CHECK(p.sigma[k] == sigma[k]);
                CHECK(p.pi[k] == pi[k]);
            }
            double diag = std::stod(fx.at(base + levels[d] + ".diag"));
            double off;
            if (fx.count(base + levels[d] + ".off"))
                off = std::stod(fx.at(base + levels[d] + ".off"));
            else
                off = 1.0 - diag;
            for (std::size_t i = 0; i < K; ++i)
                for (std::size_t j = 0; j < K; ++j)
                    CHECK(p.a(i, j) == doctest::Approx(i == j ? diag : off).epsilon(1e-15));
            CHECK_NOTHROW(p.validate());
        }
    }
    CHECK_THROWS_AS(case_params(3, Dependence::Low), config_error);
}

TEST_CASE("scenario grid construction") {
    HarnessConfig cfg;
    std::vector<Scenario> all = build_scenarios(cfg);
    CHECK(all.size() == 18);
    std::size_t case1 = 0;
    for (const Scenario& sc : all) {
        if (sc.case_id == 1) {
            ++case1;
            CHECK(sc.k_true == 3);
        } else {
            CHECK(sc.k_true == 2);
        }
        CHECK(sc.candidate_Ks == std::vector<std::size_t>{2, 3, 4, 5});
        CHECK(sc.n_replications == 20);
        CHECK(sc.n_chains == 2);
        CHECK_NOTHROW(sc.true_params.validate());
    }
    CHECK(case1 == 9);

    HarnessConfig narrow;
    narrow.cases = {2};
    narrow.dependences = {Dependence::High};
    narrow.lengths = {100, 250};
    std::vector<Scenario> two = build_scenarios(narrow);
    REQUIRE(two.size() == 2);
    CHECK(two[0].T == 100);
    CHECK(two[1].T == 250);
    CHECK(two[0].k_true == 2);

    HarnessConfig bad;
    bad.cases.clear();
    CHECK_THROWS_AS(build_scenarios(bad), config_error);
    bad = HarnessConfig{};
    bad.candidate_Ks.clear();
    CHECK_THROWS_AS(build_scenarios(bad), config_error);
    bad = HarnessConfig{};
    bad.n_chains = 0;
    CHECK_THROWS_AS(build_scenarios(bad), config_error);
}

TEST_CASE("single-candidate replication selects it trivially") {
    Scenario sc;
    sc.case_id = 2;
    sc.k_true = 2;
    sc.dependence = Dependence::High;
    sc.T = 60;
    sc.true_params = case_params(2, Dependence::High);
    sc.candidate_Ks = {2};
    sc.n_chains = 2;
    sc.gibbs = {60, 30};
    sc.base_seed = 5;
    ReplicationResult rr = run_replication(sc, 0);
    CHECK(rr.chains.size() + rr.failed_chains == 2);
    REQUIRE(!rr.chains.empty());
    for (const ChainSelection& c : rr.chains) {
        CHECK(c.ccwaic_K == 2);
        CHECK(c.waic_K == 2);
        CHECK(c.loo_K == 2);
    }

    // same scenario and replication index reproduce the same tallies
    ReplicationResult again = run_replication(sc, 0);
    CHECK(again.chains.size() == rr.chains.size());
    CHECK(again.failed_chains == rr.failed_chains);
}

TEST_CASE("accuracy aggregation from synthetic selections") {
    Scenario sc;
    sc.case_id = 2;
    sc.k_true = 2;
    sc.dependence = Dependence::High;
    sc.T = 100;
    sc.true_params = case_params(2, Dependence::High);
    sc.candidate_Ks = {2, 3};

    SUBCASE("two replications splitting between the candidates") {
        ReplicationResult a, b;
        a.chains = {{2, 2, 2}};
        b.chains = {{3, 3, 3}};
        AccuracyTable t = aggregate_accuracy(sc, {a, b});
        REQUIRE(t.rows.size() == 6);  // 3 criteria x 2 candidate K
        for (const AccuracyRow& row : t.rows) {
            CHECK(row.case_id == 2);
            CHECK(row.T == 100);
            CHECK(row.mean_pct == doctest::Approx(50.0).epsilon(1e-12));
            CHECK(row.sd_pct == doctest::Approx(70.71067811865476).epsilon(1e-12));
        }
    }
    SUBCASE("one replication with split chains") {
        ReplicationResult a;
        a.chains = {{2, 2, 2}, {3, 2, 2}};
        AccuracyTable t = aggregate_accuracy(sc, {a});
        double cc2 = -1.0, cc3 = -1.0, waic2 = -1.0;
        for (const AccuracyRow& row : t.rows) {
            if (row.criterion == "ccwaic" && row.K == 2) cc2 = row.mean_pct;
            if (row.criterion == "ccwaic" && row.K == 3) cc3 = row.mean_pct;
            if (row.criterion == "waic" && row.K == 2) waic2 = row.mean_pct;
        }
        CHECK(cc2 == doctest::Approx(50.0).epsilon(1e-12));
        CHECK(cc3 == doctest::Approx(50.0).epsilon(1e-12));
        CHECK(waic2 == doctest::Approx(100.0).epsilon(1e-12));
    }
    SUBCASE("per-criterion percentages sum to one hundred") {
        ReplicationResult a, b, c;
        a.chains = {{2, 3, 2}, {2, 2, 2}};
        b.chains = {{3, 3, 3}};
        c.chains = {{2, 2, 3}, {3, 2, 2}};
        AccuracyTable t = aggregate_accuracy(sc, {a, b, c});
        for (const char* crit : {"ccwaic", "waic", "loo"}) {
            double total = 0.0;
            for (const AccuracyRow& row : t.rows)
                if (row.criterion == crit) total += row.mean_pct;
            CHECK(total == doctest::Approx(100.0).epsilon(0.005));
        }
    }
    SUBCASE("no valid chains anywhere yields NaN cells") {
        ReplicationResult a;
        a.failed_chains = 2;
        AccuracyTable t = aggregate_accuracy(sc, {a});
        for (const AccuracyRow& row : t.rows) CHECK(std::isnan(row.mean_pct));
    }
    CHECK_THROWS_AS(aggregate_accuracy(sc, {}), std::domain_error);
}

TEST_CASE("accuracy table rendering") {
    Scenario sc;
    sc.case_id = 1;
    sc.k_true = 3;
    sc.dependence = Dependence::Medium;
    sc.T = 250;
    sc.true_params = case_params(1, Dependence::Medium);
    sc.candidate_Ks = {2, 3};
    ReplicationResult a;
    a.chains = {{3, 3, 3}};
    AccuracyTable t = aggregate_accuracy(sc, {a});
    std::string csv = t.to_csv();
    CHECK(csv.find("case,dependence,T,K,criterion,mean_pct,sd_pct") == 0);
    std::size_t lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == 7);  // header + 6 rows
    CHECK(csv.find("1,medium,250,3,ccwaic,") != std::string::npos);
    std::string text = t.to_text();
    CHECK(text.find("Case 1") != std::string::npos);
    CHECK(text.find("medium") != std::string::npos);
}

TEST_CASE("scenario runner is deterministic across thread counts") {
    Scenario sc;
    sc.case_id = 2;
    sc.k_true = 2;
    sc.dependence = Dependence::High;
    sc.T = 50;
    sc.true_params = case_params(2, Dependence::High);
    sc.candidate_Ks = {2};
    sc.n_replications = 2;
    sc.n_chains = 1;
    sc.gibbs = {50, 25};
    sc.base_seed = 11;
    std::vector<Scenario> list = {sc};

    setenv("SEQSEL_THREADS", "1", 1);
    HarnessRun serial = run_scenarios(list);
    setenv("SEQSEL_THREADS", "2", 1);
    HarnessRun pooled = run_scenarios(list);
    unsetenv("SEQSEL_THREADS");
    CHECK(serial.table.to_csv() == pooled.table.to_csv());
    CHECK(serial.failed_chains == pooled.failed_chains);

    std::size_t progress_calls = 0;
    HarnessRun again = run_scenarios(list, [&](const Scenario&, std::size_t) { ++progress_calls; });
    CHECK(progress_calls == 2);
    CHECK(again.table.to_csv() == serial.table.to_csv());

    CHECK_THROWS_AS(run_scenarios({}), std::domain_error);
}
