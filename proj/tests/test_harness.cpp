#include <cmath>

#include "doctest.h"
#include "opbm/errors.hpp"
#include "opbm/golden.hpp"
#include "opbm/harness.hpp"
#include "opbm/oracle.hpp"
#include "opbm/report.hpp"
#include "opbm/transport.hpp"
#include "test_oracles.hpp"

using namespace opbm;

TEST_CASE("simulation is deterministic per seed") {
  const auto& g = golden_example().instance;
  auto a = simulate(g, Policy::dispatch, 1, 5);
  auto b = simulate(g, Policy::dispatch, 1, 5);
  CHECK(a.values == b.values);
  auto c = simulate(g, Policy::dispatch, 200, 5);
  auto d = simulate(g, Policy::dispatch, 200, 5);
  CHECK(c.values == d.values);
}

TEST_CASE("policies share arrival sequences under common random numbers") {
  const auto& g = golden_example().instance;
  auto flow = solve_tpp(g);
  auto a = run_trials(g, &flow, Policy::dispatch, 300, 11, 2, true);
  auto b = run_trials(g, nullptr, Policy::greedy, 300, 11, 2, true);
  auto c = run_trials(g, nullptr, Policy::uniform, 300, 11, 2, true);
  CHECK(a.opt == b.opt);  // per-trial optima depend only on the sequences
  CHECK(a.opt == c.opt);
}

TEST_CASE("dispatch sample mean agrees with the exact DP within 3 SE") {
  const auto& g = golden_example().instance;
  auto flow = solve_tpp(g);
  auto exact = exact_dispatch_expectation(g, flow);
  auto sim = simulate(g, Policy::dispatch, 20000, 0);
  CHECK(std::abs(sim.mean - exact.value) <= 3.0 * sim.se);
}

TEST_CASE("uniform policy mean matches tree enumeration within 3 SE") {
  auto g = generate_lower_bound_instance(2, Rational(1, 2));
  double exact = testing::uniform_expectation_by_tree(g);
  auto sim = simulate(g, Policy::uniform, 20000, 1);
  CHECK(std::abs(sim.mean - exact) <= 3.0 * sim.se);
}

TEST_CASE("constant utilities give ratio exactly 1") {
  ExpectationGraph g;
  g.n = 4;
  g.k = 2;
  g.denominator = 3;
  g.numerators = {1, 2};
  g.utilities.assign(8, 1.0);
  auto est = estimate_ratio(g, Policy::dispatch, 500, 3);
  CHECK(est.ratio == 1.0);
  CHECK(est.alg_mean == est.opt_mean);
}

TEST_CASE("zero-utility instances have an undefined ratio") {
  ExpectationGraph g;
  g.n = 2;
  g.k = 2;
  g.denominator = 2;
  g.numerators = {1, 1};
  g.utilities.assign(4, 0.0);
  CHECK_THROWS_AS(estimate_ratio(g, Policy::dispatch, 100, 0), Error);
}

TEST_CASE("worked-example ratio clears the half bound") {
  const auto& g = golden_example().instance;
  auto est = estimate_ratio(g, Policy::dispatch, 20000, 0);
  CHECK(est.ratio >= 0.5 - (est.ratio - est.ci_lo));
  CHECK(est.opt_mean <= tpp_upper_bound(g) + 3.0 * est.opt_se);
}

TEST_CASE("baselines never beat the per-trial optimum") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto g = generate_random_instance(5, 3, 7.0, 6, seed);
    auto greedy = run_trials(g, nullptr, Policy::greedy, 400, seed, 2, true);
    auto uniform = run_trials(g, nullptr, Policy::uniform, 400, seed, 2, true);
    for (int i = 0; i < 400; ++i) {
      CHECK(greedy.alg[i] <= greedy.opt[i] + 1e-9);
      CHECK(uniform.alg[i] <= uniform.opt[i] + 1e-9);
    }
  }
}

TEST_CASE("lemma checks pass on the worked example") {
  const auto& g = golden_example().instance;
  auto report = check_lemmas(g, 50000, 0);
  CHECK(report.checks.size() == 4);
  for (const auto& c : report.checks) {
    INFO(c.name, ": ", c.detail);
    CHECK(c.pass);
  }
  CHECK(report.all_pass());
}

TEST_CASE("single-worker availability check is trivially exact") {
  ExpectationGraph g;
  g.n = 1;
  g.k = 1;
  g.denominator = 1;
  g.numerators = {1};
  g.utilities = {2.0};
  auto report = check_lemmas(g, 2000, 0);
  CHECK(report.all_pass());
}

TEST_CASE("distorted flow is caught by the preferred-worker check") {
  const auto& g = golden_example().instance;
  auto flow = solve_tpp(g);
  // Shift mass inside a column: keeps scaled demands, breaks unit row sums.
  auto broken = flow;
  auto move = [&](int from_w, int to_w, int j, std::int64_t amount) {
    broken.numerators[static_cast<std::size_t>(from_w) * broken.k + j] -= amount;
    broken.numerators[static_cast<std::size_t>(to_w) * broken.k + j] += amount;
  };
  move(3, 0, 0, 5);  // worker 4's type-1 mass moves to worker 1
  auto report = check_lemmas_with_flow(g, broken, 30000, 0);
  CHECK(!report.checks[0].pass);
  CHECK(!report.all_pass());
}

TEST_CASE("exact half-competitiveness on random instances") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    int n = 2 + static_cast<int>(seed % 7);
    int k = 1 + static_cast<int>(seed % 5);
    auto g = generate_random_instance(n, k, 9.0, k + 4, seed * 13 + 1);
    auto flow = solve_tpp(g);
    double dispatch = exact_dispatch_expectation(g, flow).value;
    double opt = exact_opt_expectation(g).value;
    CHECK(dispatch >= 0.5 * flow.objective - 1e-9);
    CHECK(dispatch >= 0.5 * opt - 1e-9);
    CHECK(opt <= flow.objective + 1e-9);
  }
}

TEST_CASE("sweep analytic columns evaluate the closed forms") {
  CHECK(lower_bound_opt_closed_form(100, Rational(1, 10)) ==
        doctest::Approx(9.520785288629108).epsilon(1e-12));
  CHECK(lower_bound_alg_upper_bound(100, Rational(1, 10)) ==
        doctest::Approx(5.05).epsilon(1e-12));
  CHECK(lower_bound_ratio_limit(Rational(1, 50)) ==
        doctest::Approx(0.5050166665555553).epsilon(1e-12));
}

TEST_CASE("small sweep respects the online upper bound") {
  auto rows = lower_bound_sweep({20}, {Rational(1, 5), Rational(1, 10)}, 4000, 0, 2);
  CHECK(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.estimate.alg_mean <= row.alg_upper_bound + 3.0 * row.estimate.alg_se);
    CHECK(row.estimate.ratio > 0.5);
  }
  CHECK(rows[0].estimate.ratio > rows[1].estimate.ratio);
  CHECK_THROWS_AS(lower_bound_sweep({}, {Rational(1, 2)}, 10, 0), std::invalid_argument);
}

TEST_CASE("replication replay reproduces simulated trials exactly") {
  const auto& g = golden_example().instance;
  auto flow = solve_tpp(g);
  for (Policy policy : {Policy::dispatch, Policy::greedy, Policy::uniform}) {
    auto values = run_trials(g, &flow, policy, 50, 21, 2, false);
    for (std::int64_t i : {0, 7, 49}) {
      auto replay = replication_run(g, &flow, policy, 21, i);
      CHECK(replay.matching.value == values.alg[static_cast<std::size_t>(i)]);
      CHECK(validate_matching(g, replication_sequence(g, 21, i), replay.matching).empty());
    }
  }
}

TEST_CASE("report emitters format floats to 12 significant digits") {
  CHECK(report::fmt(8.0) == "8");
  CHECK(report::fmt(1.0 / 3.0) == "0.333333333333");
  CHECK(report::fmt(9.520785288629108) == "9.52078528863");
}
