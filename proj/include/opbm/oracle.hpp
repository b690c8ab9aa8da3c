#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opbm/instance.hpp"
#include "opbm/transport.hpp"

namespace opbm {

/// Exact expectation computed by enumeration or dynamic programming; values
/// are exact up to binary64 rounding of the underlying rational arithmetic.
struct ExactExpectation {
  double value = 0.0;
  std::optional<std::vector<double>> edge_probabilities;  // n*k, P(worker w serves type j)
  std::vector<double> availability;  // n*n, P(worker w still available at step t); DP only
  std::int64_t state_count = 0;

  double edge_probability(int n_cols, int w, int j) const {
    return (*edge_probabilities)[static_cast<std::size_t>(w) * n_cols + j];
  }
};

struct OracleLimits {
  int max_dp_workers = 20;               // subset DP state space 2^n
  std::int64_t max_count_vectors = 1'000'000;
  int max_enumeration_workers = 400;     // keeps multinomial factors inside binary64 range
};

/// Maximum-weight perfect matching between the n workers and the n arrived
/// jobs. The realization graph is complete bipartite, so a perfect matching
/// always exists; the job side collapses to types with multiplicities and the
/// value depends only on those counts.
Matching max_weight_perfect_matching(const ExpectationGraph& g, const ArrivalSequence& seq);

/// Optimal offline value for a realization given only its type counts.
/// Equivalent to max_weight_perfect_matching(...).value but solved on the
/// positive-utility edges only, which keeps per-trial cost low in the
/// simulation harness.
double opt_value_for_counts(const ExpectationGraph& g, const std::vector<std::int64_t>& counts);

/// Exact law of the dispatcher: dynamic program over (step, available set).
/// From a state with available set S, an arrival of type j assigns worker
/// w in S with probability q_j(w) + (sum of q_j over busy workers)/|S| where
/// q_j(w) = flow(w,j)/r_j. Returns the expected matching value, the exact
/// edge probabilities P(I_wj = 1), and the availability marginals.
///
/// The OpenMP kernel pulls each state from its predecessors in a fixed order
/// and merges fixed-size chunk partials sequentially, so results are
/// bit-identical for any thread count. `jobs` <= 0 uses all hardware threads.
ExactExpectation exact_dispatch_expectation(const ExpectationGraph& g, const FlowSolution& flow,
                                            int jobs = 0, const OracleLimits& limits = {});

/// Plain push-based serial implementation kept as a reference for testing the
/// parallel kernel (summation order differs, so agreement is to 1e-12, not
/// bit-exact).
ExactExpectation exact_dispatch_expectation_serial(const ExpectationGraph& g,
                                                   const FlowSolution& flow,
                                                   const OracleLimits& limits = {});

/// Exact E[OPT]: enumerates all arrival-count vectors, weights each by its
/// multinomial probability, and solves the per-class transportation problem.
/// Exploits exchangeability: the offline optimum depends only on type counts.
/// Same determinism contract as exact_dispatch_expectation.
ExactExpectation exact_opt_expectation(const ExpectationGraph& g, int jobs = 0,
                                       const OracleLimits& limits = {});

/// Serial reference for the parallel enumeration.
ExactExpectation exact_opt_expectation_serial(const ExpectationGraph& g,
                                              const OracleLimits& limits = {});

std::string exact_to_json(const ExactExpectation& e, int n, int k, bool include_edges);

/// Exact-rational subset DP (capacity-guarded): every probability is an exact
/// rational, so the availability invariant and the per-edge lower bound can
/// be checked with equality rather than tolerances.
struct RationalDpReport {
  std::string value;              // exact expected value, "num/den"
  double value_double = 0.0;
  bool availability_uniform = false;  // P(w in AW_t) == (n-t+1)/n for all w,t
  bool edge_bound_holds = false;      // P(I_wj) >= flow(w,j)/2 for all w,j
  std::int64_t state_count = 0;
};

RationalDpReport exact_dispatch_expectation_rational(const ExpectationGraph& g,
                                                     const FlowSolution& flow,
                                                     int max_workers = 10);

}  // namespace opbm
