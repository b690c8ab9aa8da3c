#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "opbm/rational.hpp"
#include "opbm/rng.hpp"

namespace opbm {

enum class Severity { error, warning };

struct Violation {
  Severity severity = Severity::error;
  std::string where;    // field or cell, 1-based indices
  std::string message;

  std::string str() const {
    return (severity == Severity::error ? "error: " : "warning: ") + where + ": " + message;
  }
};

/// A problem instance: n workers, k job types, a utility for every pair, and
/// an exact arrival distribution stored as integer numerators over a shared
/// positive denominator. Immutable by convention once built; safe to share
/// across threads.
struct ExpectationGraph {
  int n = 0;
  int k = 0;
  std::int64_t denominator = 1;
  std::vector<std::int64_t> numerators;  // size k; p_j = numerators[j] / denominator
  std::vector<double> utilities;         // n*k, row-major by worker

  double utility(int w, int j) const { return utilities[static_cast<std::size_t>(w) * k + j]; }
  double& utility(int w, int j) { return utilities[static_cast<std::size_t>(w) * k + j]; }
  double probability(int j) const {
    return static_cast<double>(numerators[j]) / static_cast<double>(denominator);
  }
  /// Expected number of arrivals of type j over the whole horizon (n draws).
  double expected_count(int j) const { return static_cast<double>(n) * probability(j); }
};

/// Returns every invariant violation; zero-probability job types produce a
/// warning-level note (they are allowed but never sampled). The instance is
/// usable iff no error-severity entry is present.
std::vector<Violation> validate(const ExpectationGraph& g);

inline bool is_valid(const std::vector<Violation>& vs) {
  for (const auto& v : vs) {
    if (v.severity == Severity::error) return false;
  }
  return true;
}

/// Throws ValidationError when validate(g) contains errors.
void require_valid(const ExpectationGraph& g);

/// Family with k = n+1: unit utility on the diagonal, a zero-utility dummy
/// type arriving with probability 1-p, and each of the n real types arriving
/// with probability p/n. Rejects p outside (0,1).
ExpectationGraph generate_lower_bound_instance(int n, const Rational& p);

/// Deterministic fuzz-test instance: utilities uniform in [0, utility_bound],
/// probabilities a uniformly random composition of `denominator` into k
/// positive parts. Requires denominator >= k >= 1.
ExpectationGraph generate_random_instance(int n, int k, double utility_bound,
                                          std::int64_t denominator, std::uint64_t seed);

std::string instance_to_json(const ExpectationGraph& g);
ExpectationGraph instance_from_json(const std::string& text);
void save_instance(const ExpectationGraph& g, const std::filesystem::path& path);
ExpectationGraph load_instance(const std::filesystem::path& path);

/// Job types arriving at t = 1..n, 0-based type indices.
struct ArrivalSequence {
  std::vector<int> types;
};

/// Throws std::invalid_argument unless the sequence has length n and every
/// entry is a valid type index with positive arrival probability.
void require_valid_sequence(const ExpectationGraph& g, const ArrivalSequence& seq);

/// Draws n i.i.d. types using exact integer cumulative weights over the
/// shared denominator. Consumes one stream tick per arrival.
ArrivalSequence sample_sequence(const ExpectationGraph& g, rng::Stream& stream);

/// Arrival counts per type for a sequence.
std::vector<std::int64_t> type_counts(const ExpectationGraph& g, const ArrivalSequence& seq);

/// A perfect matching between workers and the arrived jobs: assignment maps
/// time step t -> worker index.
struct Matching {
  std::vector<int> assignment;
  double value = 0.0;
};

double matching_value(const ExpectationGraph& g, const ArrivalSequence& seq,
                      const std::vector<int>& assignment);

/// Checks the perfect-matching shape and that value matches the recomputed
/// edge sum within 1e-12 relative tolerance.
std::vector<Violation> validate_matching(const ExpectationGraph& g, const ArrivalSequence& seq,
                                         const Matching& m);

}  // namespace opbm
