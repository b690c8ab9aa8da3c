#pragma once

#include <string>
#include <utility>
#include <vector>

#include "opbm/harness.hpp"

namespace opbm::report {

/// Fixed 12-significant-digit rendering; every float in a primary output file
/// goes through this so reruns are byte-identical.
std::string fmt(double v);

/// Provenance header: the command and the flags that define the estimand.
/// Execution details (thread count) are deliberately excluded so outputs are
/// byte-identical for any --jobs value.
struct Meta {
  std::string command;
  std::vector<std::pair<std::string, std::string>> fields;
};

std::string simulation_csv(const Meta& meta, const SimulationResult& r, bool per_trial);
std::string simulation_json(const Meta& meta, const SimulationResult& r, bool per_trial);

std::string ratio_csv(const Meta& meta, const RatioEstimate& r);
std::string ratio_json(const Meta& meta, const RatioEstimate& r);

std::string lemmas_csv(const Meta& meta, const LemmaReport& r);
std::string lemmas_json(const Meta& meta, const LemmaReport& r);

std::string sweep_csv(const Meta& meta, const std::vector<SweepRow>& rows);
std::string sweep_json(const Meta& meta, const std::vector<SweepRow>& rows);

/// Output of the exact-evaluation command: the three quantities tied together
/// by the half-competitiveness chain, plus the per-inequality outcomes.
struct ExactSummary {
  double tpp = 0.0;
  double dispatch_value = 0.0;
  double opt_value = 0.0;
  bool dispatch_ge_half_tpp = false;
  bool tpp_ge_opt = false;
  bool dispatch_ge_half_opt = false;
  std::int64_t dp_states = 0;
  std::int64_t opt_states = 0;
};

std::string exact_csv(const Meta& meta, const ExactSummary& s);
std::string exact_json(const Meta& meta, const ExactSummary& s);

}  // namespace opbm::report
