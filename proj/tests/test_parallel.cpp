// Thread-count invariance: every parallel kernel must produce bit-identical
// results for any jobs value, and the serial references must agree.

#include "doctest.h"
#include "opbm/golden.hpp"
#include "opbm/harness.hpp"
#include "opbm/oracle.hpp"
#include "opbm/transport.hpp"

using namespace opbm;

TEST_CASE("trial kernel is bit-identical across thread counts") {
  auto g = generate_lower_bound_instance(24, Rational(1, 4));
  auto flow = solve_tpp(g);
  auto reference = run_trials_serial(g, &flow, Policy::dispatch, 3000, 17, true);
  for (int jobs : {1, 2, 4}) {
    auto parallel = run_trials(g, &flow, Policy::dispatch, 3000, 17, jobs, true);
    CHECK(parallel.alg == reference.alg);
    CHECK(parallel.opt == reference.opt);
  }
}

TEST_CASE("dispatch DP kernel is bit-identical across thread counts") {
  auto g = generate_random_instance(12, 3, 5.0, 7, 9);
  auto flow = solve_tpp(g);
  auto one = exact_dispatch_expectation(g, flow, 1);
  for (int jobs : {2, 4}) {
    auto many = exact_dispatch_expectation(g, flow, jobs);
    CHECK(many.value == one.value);
    CHECK(many.availability == one.availability);
    CHECK(*many.edge_probabilities == *one.edge_probabilities);
  }
}

TEST_CASE("E[OPT] enumeration kernel is bit-identical across thread counts") {
  auto g = generate_random_instance(30, 4, 6.0, 8, 2);
  auto one = exact_opt_expectation(g, 1);
  for (int jobs : {2, 4}) {
    auto many = exact_opt_expectation(g, jobs);
    CHECK(many.value == one.value);
    CHECK(many.state_count == one.state_count);
  }
}

TEST_CASE("lemma tallies are bit-identical across thread counts") {
  const auto& g = golden_example().instance;
  auto one = check_lemmas(g, 6000, 4, 1);
  auto two = check_lemmas(g, 6000, 4, 2);
  REQUIRE(one.checks.size() == two.checks.size());
  for (std::size_t i = 0; i < one.checks.size(); ++i) {
    CHECK(one.checks[i].pass == two.checks[i].pass);
    CHECK(one.checks[i].worst == two.checks[i].worst);
    CHECK(one.checks[i].detail == two.checks[i].detail);
  }
}
