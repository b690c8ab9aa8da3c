#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opbm/instance.hpp"

namespace opbm {

/// Exact rational optimal flow for the offline transportation problem on the
/// expectation graph: worker supply 1, type demand r_j. Stored as integer
/// numerators over the instance denominator, so row sums are exactly D and
/// column sums are exactly n * numerators[j].
struct FlowSolution {
  int n = 0;
  int k = 0;
  std::int64_t denominator = 1;
  std::vector<std::int64_t> numerators;  // n*k, flow(w,j) = numerators / denominator
  double objective = 0.0;
  std::vector<double> worker_potentials;  // dual certificate: alpha_w + beta_j >= u_wj
  std::vector<double> type_potentials;

  std::int64_t numerator(int w, int j) const {
    return numerators[static_cast<std::size_t>(w) * k + j];
  }
  double flow(int w, int j) const {
    return static_cast<double>(numerator(w, j)) / static_cast<double>(denominator);
  }
};

struct TransportLimits {
  std::int64_t max_total_supply = 100'000'000;  // n * D of the scaled problem
};

/// Solves the fractional transportation problem exactly by scaling: each
/// worker supplies D integer units and type j demands n*numerators[j] units;
/// the scaled polytope is integral, so an integral optimum divided by D is an
/// exact rational optimum. Optimality is certified by dual potentials with
/// complementary slackness within 1e-9 (relative to the largest utility).
FlowSolution solve_tpp(const ExpectationGraph& g, const TransportLimits& limits = {});

/// Objective of solve_tpp; bounds the expected offline optimum from above.
double tpp_upper_bound(const ExpectationGraph& g, const TransportLimits& limits = {});

/// Exact feasibility check in integer arithmetic (zero tolerance) plus the
/// 1e-12-relative objective recomputation check.
std::vector<Violation> check_flow_feasibility(const ExpectationGraph& g, const FlowSolution& f);

std::string flow_to_json(const FlowSolution& f);
FlowSolution flow_from_json(const std::string& text);

}  // namespace opbm
