#include <boost/multiprecision/cpp_int.hpp>

#include <bit>
#include <vector>

#include "opbm/errors.hpp"
#include "opbm/oracle.hpp"

namespace opbm {

namespace {

using BigRat = boost::multiprecision::cpp_rational;

}  // namespace

RationalDpReport exact_dispatch_expectation_rational(const ExpectationGraph& g,
                                                     const FlowSolution& flow, int max_workers) {
  require_valid(g);
  if (g.n > max_workers) {
    throw CapacityError("rational subset DP limited to n <= " + std::to_string(max_workers));
  }
  if (flow.n != g.n || flow.k != g.k) {
    throw std::invalid_argument("flow dimensions do not match instance");
  }

  const int n = g.n;
  const int k = g.k;
  std::vector<int> active;
  std::vector<std::int64_t> total(k);
  for (int j = 0; j < k; ++j) {
    total[j] = static_cast<std::int64_t>(n) * g.numerators[j];
    std::int64_t got = 0;
    for (int w = 0; w < n; ++w) got += flow.numerator(w, j);
    if (got != total[j]) {
      throw std::invalid_argument("flow column " + std::to_string(j + 1) +
                                  " does not match scaled demand");
    }
    if (g.numerators[j] > 0) active.push_back(j);
  }

  const std::size_t states = std::size_t{1} << n;
  std::vector<BigRat> pi(states, BigRat(0));
  pi[states - 1] = 1;
  std::vector<BigRat> edge(static_cast<std::size_t>(n) * k, BigRat(0));
  std::vector<BigRat> avail(static_cast<std::size_t>(n) * n, BigRat(0));

  std::vector<std::vector<std::uint32_t>> layers(n + 1);
  for (std::uint32_t mask = 0; mask < states; ++mask) {
    layers[std::popcount(mask)].push_back(mask);
  }

  for (int m = n; m >= 1; --m) {
    const int t = n - m + 1;
    for (std::uint32_t mask : layers[m]) {
      const BigRat& mass = pi[mask];
      for (std::uint32_t bits = mask; bits;) {
        int w = std::countr_zero(bits);
        bits &= bits - 1;
        avail[static_cast<std::size_t>(w) * n + (t - 1)] += mass;
      }
      if (mass == 0) continue;
      for (int j : active) {
        const BigRat pj(g.numerators[j], g.denominator);
        std::int64_t inside = 0;
        for (std::uint32_t bits = mask; bits;) {
          int w = std::countr_zero(bits);
          bits &= bits - 1;
          inside += flow.numerator(w, j);
        }
        const BigRat leak(total[j] - inside, total[j] * static_cast<std::int64_t>(m));
        for (std::uint32_t bits = mask; bits;) {
          int w = std::countr_zero(bits);
          bits &= bits - 1;
          BigRat q(flow.numerator(w, j), total[j]);
          BigRat prob = mass * pj * (q + leak);
          edge[static_cast<std::size_t>(w) * k + j] += prob;
          pi[mask & ~(1u << w)] += prob;
        }
      }
    }
  }

  RationalDpReport out;
  out.state_count = static_cast<std::int64_t>(states);
  BigRat value(0);
  out.edge_bound_holds = true;
  for (int w = 0; w < n; ++w) {
    for (int j = 0; j < k; ++j) {
      const BigRat& pr = edge[static_cast<std::size_t>(w) * k + j];
      // Utilities are binary64; exact dyadic rationals keep the value exact.
      value += pr * BigRat(g.utility(w, j));
      BigRat half_flow(flow.numerator(w, j), 2 * flow.denominator);
      if (pr < half_flow) out.edge_bound_holds = false;
    }
  }
  out.availability_uniform = true;
  for (int w = 0; w < n; ++w) {
    for (int t = 1; t <= n; ++t) {
      if (avail[static_cast<std::size_t>(w) * n + (t - 1)] != BigRat(n - t + 1, n)) {
        out.availability_uniform = false;
      }
    }
  }
  out.value = value.str();
  out.value_double = static_cast<double>(value);
  return out;
}

}  // namespace opbm
