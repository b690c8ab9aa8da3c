#include "opbm/golden.hpp"

#include <sstream>

#include "opbm/numeric.hpp"
#include "opbm/oracle.hpp"

namespace opbm {

namespace {

GoldenExample build() {
  GoldenExample ex;
  auto& g = ex.instance;
  g.n = 5;
  g.k = 3;
  g.denominator = 10;
  g.numerators = {5, 3, 2};
  g.utilities = {
      2, 0, 0,  // worker 1
      1, 1, 0,  // worker 2
      0, 3, 0,  // worker 3
      1, 0, 1,  // worker 4
      0, 1, 1,  // worker 5
  };

  auto& f = ex.flow;
  f.n = 5;
  f.k = 3;
  f.denominator = 10;
  f.numerators = {
      10, 0,  0,
      10, 0,  0,
      0,  10, 0,
      5,  0,  5,
      0,  5,  5,
  };
  f.objective = 8.0;

  ex.arrivals.types = {2, 0, 1, 1, 2};
  ex.draws = {{3, 0}, {1, 0}, {2, 0}, {4, 0}, {3, 0}};
  ex.expected_events = {
      {1, 2, 3, true, 3, 1.0},
      {2, 0, 1, true, 1, 1.0},
      {3, 1, 2, true, 2, 3.0},
      {4, 1, 4, true, 4, 1.0},
      {5, 2, 3, false, 0, 0.0},
  };
  return ex;
}

std::string describe(const AssignmentEvent& e) {
  std::ostringstream os;
  os << "t=" << e.t << " type=" << e.job_type + 1 << " preferred=" << e.preferred + 1
     << (e.preferred_available ? " (available)" : " (busy)") << " assigned=" << e.assigned + 1
     << " utility=" << e.utility;
  return os.str();
}

}  // namespace

const GoldenExample& golden_example() {
  static const GoldenExample ex = build();
  return ex;
}

GoldenOutcome reproduce_golden(const GoldenExample& ex) {
  GoldenOutcome out;
  std::ostringstream diff;

  auto violations = validate(ex.instance);
  if (!is_valid(violations)) {
    for (const auto& v : violations) diff << "instance " << v.str() << "\n";
  }
  auto flow_violations = check_flow_feasibility(ex.instance, ex.flow);
  for (const auto& v : flow_violations) diff << "embedded flow " << v.str() << "\n";

  out.tpp = solve_tpp(ex.instance).objective;
  if (out.tpp != ex.expected_tpp) {
    diff << "transportation objective " << out.tpp << " != " << ex.expected_tpp << "\n";
  }

  KahanSum embedded;
  for (int w = 0; w < ex.flow.n; ++w) {
    for (int j = 0; j < ex.flow.k; ++j) {
      embedded.add(ex.instance.utility(w, j) * static_cast<double>(ex.flow.numerator(w, j)));
    }
  }
  if (embedded.value() / static_cast<double>(ex.flow.denominator) != ex.expected_tpp) {
    diff << "embedded flow is not optimal\n";
  }

  try {
    out.run = run_dispatch_forced(ex.instance, ex.flow, ex.arrivals, ex.draws);
    if (out.run.events != ex.expected_events) {
      for (std::size_t i = 0; i < out.run.events.size(); ++i) {
        if (i >= ex.expected_events.size() || !(out.run.events[i] == ex.expected_events[i])) {
          diff << "event " << i + 1 << ": got " << describe(out.run.events[i]);
          if (i < ex.expected_events.size()) diff << ", want " << describe(ex.expected_events[i]);
          diff << "\n";
        }
      }
    }
    if (out.run.matching.value != ex.expected_dispatch_value) {
      diff << "dispatch value " << out.run.matching.value << " != " << ex.expected_dispatch_value
           << "\n";
    }
  } catch (const std::exception& e) {
    diff << "pinned trace failed to run: " << e.what() << "\n";
  }

  out.opt = max_weight_perfect_matching(ex.instance, ex.arrivals).value;
  if (out.opt != ex.expected_opt_value) {
    diff << "offline optimum " << out.opt << " != " << ex.expected_opt_value << "\n";
  }

  out.diff = diff.str();
  out.ok = out.diff.empty();
  return out;
}

}  // namespace opbm
