#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opbm/dispatch.hpp"
#include "opbm/instance.hpp"
#include "opbm/rational.hpp"
#include "opbm/transport.hpp"

namespace opbm {

enum class Policy { dispatch, greedy, uniform };

Policy parse_policy(const std::string& name);
std::string policy_name(Policy p);

/// Per-trial matching values, plus the paired offline optima when requested.
/// Replication i always sees the arrival sequence derived from
/// (master_seed, i) regardless of policy or thread count, so different
/// policies are compared under common random numbers and results are
/// bit-identical for any `jobs` value (slot-per-replication writes, fixed
/// reduction order downstream).
struct TrialValues {
  std::vector<double> alg;
  std::vector<double> opt;  // empty unless requested
};

/// OpenMP kernel; `jobs` <= 0 uses all hardware threads.
TrialValues run_trials(const ExpectationGraph& g, const FlowSolution* flow, Policy policy,
                       std::int64_t trials, std::uint64_t master_seed, int jobs,
                       bool with_opt);

/// Serial reference implementation kept for testing the kernel; produces
/// bit-identical output.
TrialValues run_trials_serial(const ExpectationGraph& g, const FlowSolution* flow, Policy policy,
                              std::int64_t trials, std::uint64_t master_seed, bool with_opt);

/// The arrival sequence replication i sees for this master seed.
ArrivalSequence replication_sequence(const ExpectationGraph& g, std::uint64_t master_seed,
                                     std::int64_t replication);

/// Replays one replication of run_trials with full trace: identical sequence,
/// identical policy randomness, identical matching value.
RunResult replication_run(const ExpectationGraph& g, const FlowSolution* flow, Policy policy,
                          std::uint64_t master_seed, std::int64_t replication);

struct SimulationResult {
  std::vector<double> values;
  double mean = 0.0;
  double se = 0.0;
  std::int64_t trials = 0;
  std::uint64_t master_seed = 0;
};

/// Runs `trials` independent replications of the policy. For the dispatch
/// policy the transportation problem is solved once up front.
SimulationResult simulate(const ExpectationGraph& g, Policy policy, std::int64_t trials,
                          std::uint64_t master_seed, int jobs = 0);

/// Paired Monte Carlo estimate of the competitive ratio: ratio of means (not
/// mean of ratios) with a delta-method 95% confidence interval computed from
/// the per-trial covariance.
struct RatioEstimate {
  double alg_mean = 0.0;
  double opt_mean = 0.0;
  double alg_se = 0.0;
  double opt_se = 0.0;
  double ratio = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::int64_t trials = 0;
  std::uint64_t master_seed = 0;
};

RatioEstimate estimate_ratio(const ExpectationGraph& g, Policy policy, std::int64_t trials,
                             std::uint64_t master_seed, int jobs = 0);

/// One distributional invariant of the dispatcher, checked empirically and,
/// where an exact route exists, exactly.
struct LemmaCheck {
  std::string name;
  bool pass = false;
  double worst = 0.0;      // worst observed deviation or bound margin
  double tolerance = 0.0;  // the acceptance band the worst value is held to
  std::string detail;
};

struct LemmaReport {
  std::vector<LemmaCheck> checks;
  std::int64_t trials = 0;
  std::uint64_t master_seed = 0;

  bool all_pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }
};

/// Empirical checks of the four dispatcher invariants (uniform preferred
/// worker, uniform assignment among available workers, uniform availability,
/// per-edge probability lower bound), combined with the exact subset-DP
/// routes. Limited to n <= 20 (availability sets are tallied exactly).
LemmaReport check_lemmas(const ExpectationGraph& g, std::int64_t trials,
                         std::uint64_t master_seed, int jobs = 0);

/// Same checks against a caller-supplied flow; distorted flows serve as
/// negative controls.
LemmaReport check_lemmas_with_flow(const ExpectationGraph& g, const FlowSolution& flow,
                                   std::int64_t trials, std::uint64_t master_seed, int jobs = 0);

/// One cell of the lower-bound family sweep: the estimated dispatch ratio on
/// generate_lower_bound_instance(n, p) next to the closed-form columns
/// E[OPT] = n(1-(1-p/n)^n), the online upper bound p(n+1)/2, and the
/// large-n ratio limit p / (2(1 - e^-p)).
struct SweepRow {
  int n = 0;
  std::string p_label;
  double p = 0.0;
  RatioEstimate estimate;
  double opt_closed_form = 0.0;
  double alg_upper_bound = 0.0;
  double ratio_limit = 0.0;
};

std::vector<SweepRow> lower_bound_sweep(const std::vector<int>& n_values,
                                        const std::vector<Rational>& p_values,
                                        std::int64_t trials, std::uint64_t master_seed,
                                        int jobs = 0);

double lower_bound_opt_closed_form(int n, const Rational& p);
double lower_bound_alg_upper_bound(int n, const Rational& p);
double lower_bound_ratio_limit(const Rational& p);

}  // namespace opbm
