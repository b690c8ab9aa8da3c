#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opbm/instance.hpp"
#include "opbm/rng.hpp"
#include "opbm/transport.hpp"

namespace opbm {

/// Per-step record of an online assignment. Indices are 0-based in memory
/// and 1-based in serialized form.
struct AssignmentEvent {
  int t = 0;           // 1-based time step
  int job_type = 0;    // arriving type
  int preferred = 0;   // sampled preferred worker
  bool preferred_available = false;
  int assigned = 0;    // worker actually matched
  double utility = 0.0;

  bool operator==(const AssignmentEvent&) const = default;
};

/// Injected randomness for one step: a preferred worker and the fallback
/// worker to use when the preferred one is busy. Reproduces written-out
/// traces without touching the random stream.
struct ForcedDraw {
  int preferred = 0;
  int fallback = 0;
};

/// Exact integer sampling weights for the preferred-worker draw, shared
/// read-only across concurrent trials. For type j the per-worker masses are
/// the flow numerators with column total n*numerators[j], so the draw is a
/// uniform integer against cumulative integer weights; no floating-point
/// cumulative sums. Row sums are deliberately not checked here so that
/// distorted flows can be fed to the statistical harness as negative
/// controls; column totals must match the scaled demands.
struct DispatchTables {
  std::vector<std::vector<std::int64_t>> cum;  // per type: cumulative numerators over workers
  std::vector<std::int64_t> total;             // per type: n * numerators[j]

  static DispatchTables build(const ExpectationGraph& g, const FlowSolution& flow);
};

/// Online dispatcher: samples a preferred worker proportionally to the
/// optimal offline flow for the arriving type and falls back to a uniformly
/// random available worker when the preferred one is busy.
///
/// Single-owner mutable state; concurrent runs each construct their own.
class Dispatcher {
 public:
  Dispatcher(const ExpectationGraph& g, const FlowSolution& flow, std::uint64_t seed);
  /// Shares prebuilt sampling tables; the tables must outlive the dispatcher.
  Dispatcher(const ExpectationGraph& g, const DispatchTables& tables, std::uint64_t seed);

  /// Consumes exactly two stream ticks per step (preferred draw, fallback
  /// draw) whether or not the fallback is used, keeping streams aligned
  /// across policies under common random numbers.
  AssignmentEvent step(int job_type);

  /// Same transition, with injected draws; consumes no randomness.
  AssignmentEvent step_forced(int job_type, const ForcedDraw& draw);

  int next_step() const { return t_; }
  const std::vector<int>& available() const { return available_; }
  std::uint64_t rng_counter() const { return stream_.counter(); }

 private:
  AssignmentEvent apply(int job_type, int preferred, std::uint64_t fallback_rank,
                        std::optional<int> forced_fallback);

  const ExpectationGraph* g_;
  std::optional<DispatchTables> owned_;
  const DispatchTables* tables_;
  std::vector<int> available_;  // ascending order
  int t_ = 1;
  rng::Stream stream_;
};

struct RunResult {
  Matching matching;
  std::vector<AssignmentEvent> events;
};

RunResult run_dispatch(const ExpectationGraph& g, const FlowSolution& flow, std::uint64_t seed,
                       const ArrivalSequence& seq);
RunResult run_dispatch_forced(const ExpectationGraph& g, const FlowSolution& flow,
                              const ArrivalSequence& seq, const std::vector<ForcedDraw>& draws);

/// Matching value only, no trace storage; the harness hot path.
double run_dispatch_value(const ExpectationGraph& g, const DispatchTables& tables,
                          std::uint64_t seed, const ArrivalSequence& seq);

/// Baseline: assign the highest-utility available worker, ties to the lowest
/// index. Deterministic.
RunResult run_greedy(const ExpectationGraph& g, const ArrivalSequence& seq);

/// Baseline: assign a uniformly random available worker. Consumes two stream
/// ticks per step like the dispatcher, using the second for its draw.
RunResult run_uniform(const ExpectationGraph& g, std::uint64_t seed, const ArrivalSequence& seq);

/// One event per line, 1-based indices.
std::string event_to_json_line(const AssignmentEvent& e);

}  // namespace opbm
