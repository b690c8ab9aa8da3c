#include <cmath>

#include "doctest.h"
#include "opbm/errors.hpp"
#include "opbm/golden.hpp"
#include "opbm/min_cost_flow.hpp"
#include "opbm/transport.hpp"
#include "test_oracles.hpp"

using namespace opbm;

TEST_CASE("worked example solves to objective 8 exactly") {
  auto flow = solve_tpp(golden_example().instance);
  CHECK(flow.objective == 8.0);
  CHECK(check_flow_feasibility(golden_example().instance, flow).empty());
  CHECK(tpp_upper_bound(golden_example().instance) == 8.0);
}

TEST_CASE("single-edge problem ships everything") {
  ExpectationGraph g;
  g.n = 1;
  g.k = 1;
  g.denominator = 1;
  g.numerators = {1};
  g.utilities = {5.0};
  auto flow = solve_tpp(g);
  CHECK(flow.numerator(0, 0) == 1);
  CHECK(flow.objective == 5.0);
}

TEST_CASE("lower-bound instances match the enumeration oracle") {
  auto g3 = generate_lower_bound_instance(3, Rational(3, 4));
  double oracle3 = testing::enumerate_tpp_max(g3);
  CHECK(oracle3 == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(solve_tpp(g3).objective == doctest::Approx(oracle3).epsilon(1e-12));

  auto g2 = generate_lower_bound_instance(2, Rational(1, 2));
  double oracle2 = testing::enumerate_tpp_max(g2);
  CHECK(oracle2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(solve_tpp(g2).objective == doctest::Approx(oracle2).epsilon(1e-12));
}

TEST_CASE("random instances match the enumeration oracle") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    int n = 1 + static_cast<int>(seed % 4);
    int k = 1 + static_cast<int>((seed / 4) % 3);
    int den = k + static_cast<int>(seed % (7 - k));
    auto g = generate_random_instance(n, k, 10.0, den, seed);
    auto flow = solve_tpp(g);
    double oracle = testing::enumerate_tpp_max(g);
    CHECK(std::abs(flow.objective - oracle) < 1e-9);
    CHECK(check_flow_feasibility(g, flow).empty());
  }
}

TEST_CASE("row and column sums are exact integers") {
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    auto g = generate_random_instance(4, 3, 3.0, 6, seed);
    auto flow = solve_tpp(g);
    for (int w = 0; w < g.n; ++w) {
      std::int64_t row = 0;
      for (int j = 0; j < g.k; ++j) row += flow.numerator(w, j);
      CHECK(row == g.denominator);
    }
    for (int j = 0; j < g.k; ++j) {
      std::int64_t col = 0;
      for (int w = 0; w < g.n; ++w) col += flow.numerator(w, j);
      CHECK(col == static_cast<std::int64_t>(g.n) * g.numerators[j]);
    }
  }
}

TEST_CASE("adding a constant to every utility adds n*c to the objective") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto g = generate_random_instance(4, 3, 8.0, 6, seed);
    double before = solve_tpp(g).objective;
    const double c = 1.75;
    auto shifted = g;
    for (auto& u : shifted.utilities) u += c;
    double after = solve_tpp(shifted).objective;
    CHECK(after == doctest::Approx(before + g.n * c).epsilon(1e-12));
  }
}

TEST_CASE("dual certificate holds for the returned potentials") {
  auto g = golden_example().instance;
  auto flow = solve_tpp(g);
  std::vector<double> scaled_util = g.utilities;
  CHECK(mcf::check_certificate(g.n, g.k, scaled_util, flow.numerators, flow.worker_potentials,
                               flow.type_potentials, 1e-9 * 3.0));
  // A perturbed dual must fail somewhere.
  auto broken = flow.worker_potentials;
  broken[0] -= 1.0;
  CHECK(!mcf::check_certificate(g.n, g.k, scaled_util, flow.numerators, broken,
                                flow.type_potentials, 1e-9 * 3.0));
}

TEST_CASE("solver is deterministic") {
  auto g = generate_random_instance(4, 3, 10.0, 6, 99);
  auto a = solve_tpp(g);
  auto b = solve_tpp(g);
  CHECK(a.numerators == b.numerators);
  CHECK(a.objective == b.objective);
}

TEST_CASE("capacity bound rejects oversized scaled problems") {
  auto g = generate_random_instance(3, 2, 1.0, 100, 0);
  TransportLimits limits;
  limits.max_total_supply = 200;  // n*D = 300
  CHECK_THROWS_AS(solve_tpp(g, limits), CapacityError);
}

TEST_CASE("invalid instances are rejected") {
  auto g = golden_example().instance;
  g.numerators = {5, 3, 1};
  CHECK_THROWS_AS(solve_tpp(g), ValidationError);
}

TEST_CASE("flow JSON round-trips") {
  auto flow = solve_tpp(golden_example().instance);
  auto back = flow_from_json(flow_to_json(flow));
  CHECK(back.numerators == flow.numerators);
  CHECK(back.denominator == flow.denominator);
  CHECK(back.objective == flow.objective);
  CHECK_THROWS_AS(flow_from_json("{}"), ParseError);
}

TEST_CASE("feasibility check flags distorted flows") {
  auto g = golden_example().instance;
  auto flow = solve_tpp(g);
  auto broken = flow;
  broken.numerators[0] += 1;
  CHECK(!check_flow_feasibility(g, broken).empty());
}
