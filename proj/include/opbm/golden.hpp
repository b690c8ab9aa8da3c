#pragma once

#include <string>

#include "opbm/dispatch.hpp"
#include "opbm/instance.hpp"
#include "opbm/transport.hpp"

namespace opbm {

/// Built-in worked example: five workers, three job types, expected arrival
/// counts (2.5, 1.5, 1), a known optimal flow of value 8, the arrival
/// realization (3, 1, 2, 2, 3), and the written-out trace it produces when
/// the random draws are pinned (preferred workers 4, 2, 3, 5, 4; the last
/// preferred worker is busy and worker 1 is the fallback). The resulting
/// matching has value 6 while the offline optimum on the same realization
/// has value 8.
struct GoldenExample {
  ExpectationGraph instance;
  FlowSolution flow;
  ArrivalSequence arrivals;
  std::vector<ForcedDraw> draws;
  std::vector<AssignmentEvent> expected_events;
  double expected_tpp = 8.0;
  double expected_dispatch_value = 6.0;
  double expected_opt_value = 8.0;
};

const GoldenExample& golden_example();

struct GoldenOutcome {
  bool ok = true;
  std::string diff;  // human-readable mismatch description, empty when ok
  RunResult run;
  double tpp = 0.0;
  double opt = 0.0;
};

/// Re-runs the example end to end: validates the embedded instance and flow,
/// solves the transportation problem, replays the pinned trace, and solves
/// the offline optimum. Any exact mismatch is reported in `diff`.
GoldenOutcome reproduce_golden(const GoldenExample& example = golden_example());

}  // namespace opbm
