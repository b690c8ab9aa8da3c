// Independent brute-force references used only by tests: feasible-point
// enumeration for the transportation problem, permutation search for the
// offline matching, raw-sequence enumeration for E[OPT], and full tree
// expansion of the dispatcher's probability space. None of these share code
// with the implementations they check.
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "opbm/instance.hpp"
#include "opbm/transport.hpp"

namespace opbm::testing {

// Max objective over every integral feasible point of the scaled
// transportation polytope (row sums D, column sums n*numerators[j]); the
// vertices are integral, so this dominates every vertex.
inline double enumerate_tpp_max(const ExpectationGraph& g) {
  const int n = g.n, k = g.k;
  std::vector<std::int64_t> col_rem(k);
  for (int j = 0; j < k; ++j) col_rem[j] = static_cast<std::int64_t>(n) * g.numerators[j];
  double best = -1.0;
  std::vector<std::int64_t> row(k, 0);

  auto fill_row = [&](auto&& self, int w, int j, std::int64_t rem, double value) -> void {
    if (j == k - 1) {
      if (rem > col_rem[j]) return;
      col_rem[j] -= rem;
      double v = value + static_cast<double>(rem) * g.utility(w, j);
      if (w + 1 == n) {
        best = std::max(best, v);
      } else {
        self(self, w + 1, 0, g.denominator, v);
      }
      col_rem[j] += rem;
      return;
    }
    for (std::int64_t part = 0; part <= std::min(rem, col_rem[j]); ++part) {
      col_rem[j] -= part;
      self(self, w, j + 1, rem - part, value + static_cast<double>(part) * g.utility(w, j));
      col_rem[j] += part;
    }
  };
  fill_row(fill_row, 0, 0, g.denominator, 0.0);
  return best / static_cast<double>(g.denominator);
}

// Max matching value over all n! worker permutations.
inline double best_matching_bruteforce(const ExpectationGraph& g, const ArrivalSequence& seq) {
  std::vector<int> perm(g.n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1.0;
  do {
    double v = 0.0;
    for (int t = 0; t < g.n; ++t) v += g.utility(perm[t], seq.types[t]);
    best = std::max(best, v);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// E[OPT] over all k^n raw arrival sequences, each valued by the permutation
// search above. Exponential; n <= 4.
inline double exact_opt_by_sequences(const ExpectationGraph& g) {
  double total = 0.0;
  ArrivalSequence seq;
  seq.types.assign(g.n, 0);
  auto rec = [&](auto&& self, int t, double prob) -> void {
    if (prob == 0.0) return;
    if (t == g.n) {
      total += prob * best_matching_bruteforce(g, seq);
      return;
    }
    for (int j = 0; j < g.k; ++j) {
      seq.types[t] = j;
      self(self, t + 1, prob * g.probability(j));
    }
  };
  rec(rec, 0, 1.0);
  return total;
}

// Expected dispatcher value by expanding the full probability tree: arrival
// type, preferred draw, and (when the preferred worker is busy) the uniform
// fallback draw. Memoized on the available set; n <= 3 keeps it instant.
inline double dispatch_expectation_by_tree(const ExpectationGraph& g, const FlowSolution& flow) {
  const int n = g.n;
  std::map<std::uint32_t, double> memo;

  auto value_of = [&](auto&& self, std::uint32_t mask) -> double {
    if (mask == 0) return 0.0;
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    const int m = std::popcount(mask);
    double expect = 0.0;
    for (int j = 0; j < g.k; ++j) {
      if (g.numerators[j] == 0) continue;
      const double pj = g.probability(j);
      const double total = static_cast<double>(n) * static_cast<double>(g.numerators[j]);
      for (int pref = 0; pref < n; ++pref) {
        const double q = static_cast<double>(flow.numerator(pref, j)) / total;
        if (q == 0.0) continue;
        if (mask & (1u << pref)) {
          expect += pj * q * (g.utility(pref, j) + self(self, mask & ~(1u << pref)));
        } else {
          for (int w = 0; w < n; ++w) {
            if (!(mask & (1u << w))) continue;
            expect += pj * q / m * (g.utility(w, j) + self(self, mask & ~(1u << w)));
          }
        }
      }
    }
    memo[mask] = expect;
    return expect;
  };
  return value_of(value_of, (1u << n) - 1u);
}

// Expected value of the uniform baseline by the same tree expansion.
inline double uniform_expectation_by_tree(const ExpectationGraph& g) {
  const int n = g.n;
  std::map<std::uint32_t, double> memo;
  auto value_of = [&](auto&& self, std::uint32_t mask) -> double {
    if (mask == 0) return 0.0;
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    const int m = std::popcount(mask);
    double expect = 0.0;
    for (int j = 0; j < g.k; ++j) {
      if (g.numerators[j] == 0) continue;
      for (int w = 0; w < n; ++w) {
        if (!(mask & (1u << w))) continue;
        expect += g.probability(j) / m * (g.utility(w, j) + self(self, mask & ~(1u << w)));
      }
    }
    memo[mask] = expect;
    return expect;
  };
  return value_of(value_of, (1u << n) - 1u);
}

}  // namespace opbm::testing
