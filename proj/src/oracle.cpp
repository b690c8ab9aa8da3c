#include "opbm/oracle.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>

#include "json.hpp"
#include "opbm/errors.hpp"
#include "opbm/min_cost_flow.hpp"
#include "opbm/numeric.hpp"

namespace opbm {

namespace {

int thread_count(int jobs) { return jobs > 0 ? jobs : omp_get_max_threads(); }

}  // namespace

Matching max_weight_perfect_matching(const ExpectationGraph& g, const ArrivalSequence& seq) {
  require_valid_sequence(g, seq);
  auto counts = type_counts(g, seq);

  std::vector<int> arrived;  // ascending type indices with positive count
  for (int j = 0; j < g.k; ++j) {
    if (counts[j] > 0) arrived.push_back(j);
  }
  const int cols = static_cast<int>(arrived.size());
  std::vector<double> util(static_cast<std::size_t>(g.n) * cols);
  std::vector<std::int64_t> demand(cols);
  for (int c = 0; c < cols; ++c) {
    demand[c] = counts[arrived[c]];
    for (int w = 0; w < g.n; ++w) {
      util[static_cast<std::size_t>(w) * cols + c] = g.utility(w, arrived[c]);
    }
  }
  std::vector<std::int64_t> supply(g.n, 1);
  auto res = mcf::solve_transport_max(g.n, cols, util, supply, demand);

  // Integral unit supplies give 0/1 flows; expand type flows to time steps.
  std::vector<int> col_of(g.k, -1);
  for (int c = 0; c < cols; ++c) col_of[arrived[c]] = c;
  std::vector<std::deque<int>> pool(cols);
  for (int w = 0; w < g.n; ++w) {
    for (int c = 0; c < cols; ++c) {
      if (res.flow[static_cast<std::size_t>(w) * cols + c] > 0) pool[c].push_back(w);
    }
  }
  Matching m;
  m.assignment.resize(g.n);
  for (int t = 0; t < g.n; ++t) {
    auto& q = pool[col_of[seq.types[t]]];
    m.assignment[t] = q.front();
    q.pop_front();
  }
  m.value = matching_value(g, seq, m.assignment);
  return m;
}

double opt_value_for_counts(const ExpectationGraph& g, const std::vector<std::int64_t>& counts) {
  // Only positive-utility edges can contribute; the zero-utility remainder of
  // a partial shipment always extends to a perfect matching on the complete
  // realization graph without changing the value.
  std::vector<mcf::SparseArc> arcs;
  for (int j = 0; j < g.k; ++j) {
    if (counts[j] <= 0) continue;
    for (int w = 0; w < g.n; ++w) {
      double u = g.utility(w, j);
      if (u > 0.0) arcs.push_back({w, j, u});
    }
  }
  if (arcs.empty()) return 0.0;
  std::vector<std::int64_t> supply(g.n, 1);
  return mcf::max_profit_value(g.n, g.k, arcs, supply, counts);
}

// ---------------------------------------------------------------------------
// Subset DP over available-worker sets. A state is the set S of available
// workers; since exactly one worker leaves per step, S is reached exactly at
// step t = n - |S| + 1. Transition mass uses exact integer column sums of
// the flow so the "preferred worker busy" leak never goes negative.
// ---------------------------------------------------------------------------

namespace {

struct DpInputs {
  int n = 0;
  int k = 0;
  std::vector<int> active;            // types with positive probability
  std::vector<double> p;              // arrival probability per type
  std::vector<std::int64_t> x;        // flow numerators, k*n (transposed: type-major)
  std::vector<std::int64_t> total;    // per type: n * numerators[j]
};

DpInputs make_dp_inputs(const ExpectationGraph& g, const FlowSolution& flow,
                        const OracleLimits& limits) {
  require_valid(g);
  if (g.n > limits.max_dp_workers) {
    throw CapacityError("subset DP limited to n <= " + std::to_string(limits.max_dp_workers) +
                        " workers, got n = " + std::to_string(g.n));
  }
  if (flow.n != g.n || flow.k != g.k ||
      flow.numerators.size() != static_cast<std::size_t>(g.n) * g.k) {
    throw std::invalid_argument("flow dimensions do not match instance");
  }
  DpInputs in;
  in.n = g.n;
  in.k = g.k;
  in.p.resize(g.k);
  in.total.resize(g.k);
  in.x.assign(static_cast<std::size_t>(g.k) * g.n, 0);
  for (int j = 0; j < g.k; ++j) {
    in.p[j] = g.probability(j);
    std::int64_t want = static_cast<std::int64_t>(g.n) * g.numerators[j];
    in.total[j] = want;
    std::int64_t got = 0;
    for (int w = 0; w < g.n; ++w) {
      std::int64_t v = flow.numerator(w, j);
      if (v < 0) throw std::invalid_argument("flow has negative entries");
      in.x[static_cast<std::size_t>(j) * g.n + w] = v;
      got += v;
    }
    if (got != want) {
      throw std::invalid_argument("flow column " + std::to_string(j + 1) +
                                  " does not match scaled demand");
    }
    if (g.numerators[j] > 0) in.active.push_back(j);
  }
  return in;
}

std::vector<std::vector<std::uint32_t>> masks_by_popcount(int n) {
  std::vector<std::vector<std::uint32_t>> layers(n + 1);
  const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1u);
  for (std::uint32_t mask = 0;; ++mask) {
    layers[std::popcount(mask)].push_back(mask);
    if (mask == full) break;
  }
  return layers;
}

}  // namespace

ExactExpectation exact_dispatch_expectation_serial(const ExpectationGraph& g,
                                                   const FlowSolution& flow,
                                                   const OracleLimits& limits) {
  const DpInputs in = make_dp_inputs(g, flow, limits);
  const int n = in.n;
  const auto layers = masks_by_popcount(n);
  const std::size_t states = std::size_t{1} << n;

  std::vector<double> pi(states, 0.0);
  pi[states - 1] = 1.0;
  std::vector<KahanSum> edge(static_cast<std::size_t>(n) * in.k);
  std::vector<KahanSum> avail(static_cast<std::size_t>(n) * n);

  std::vector<double> assign_prob(n);
  for (int m = n; m >= 1; --m) {
    const int t = n - m + 1;
    for (std::uint32_t mask : layers[m]) {
      const double mass = pi[mask];
      for (std::uint32_t bits = mask; bits;) {
        int w = std::countr_zero(bits);
        bits &= bits - 1;
        avail[static_cast<std::size_t>(w) * n + (t - 1)].add(mass);
      }
      if (mass == 0.0) continue;
      std::fill(assign_prob.begin(), assign_prob.end(), 0.0);
      for (int j : in.active) {
        const std::int64_t* xj = &in.x[static_cast<std::size_t>(j) * n];
        const double tot = static_cast<double>(in.total[j]);
        std::int64_t inside = 0;
        for (std::uint32_t bits = mask; bits;) {
          int w = std::countr_zero(bits);
          bits &= bits - 1;
          inside += xj[w];
        }
        const double leak = static_cast<double>(in.total[j] - inside) / (tot * m);
        for (std::uint32_t bits = mask; bits;) {
          int w = std::countr_zero(bits);
          bits &= bits - 1;
          const double prob_wj = in.p[j] * (static_cast<double>(xj[w]) / tot + leak);
          assign_prob[w] += prob_wj;
          edge[static_cast<std::size_t>(w) * in.k + j].add(mass * prob_wj);
        }
      }
      for (std::uint32_t bits = mask; bits;) {
        int w = std::countr_zero(bits);
        bits &= bits - 1;
        pi[mask & ~(1u << w)] += mass * assign_prob[w];
      }
    }
  }

  ExactExpectation out;
  out.state_count = static_cast<std::int64_t>(states);
  out.edge_probabilities.emplace(static_cast<std::size_t>(n) * in.k);
  KahanSum value;
  for (int w = 0; w < n; ++w) {
    for (int j = 0; j < in.k; ++j) {
      double pr = edge[static_cast<std::size_t>(w) * in.k + j].value();
      (*out.edge_probabilities)[static_cast<std::size_t>(w) * in.k + j] = pr;
      value.add(g.utility(w, j) * pr);
    }
  }
  out.value = value.value();
  out.availability.resize(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < out.availability.size(); ++i) {
    out.availability[i] = avail[i].value();
  }
  return out;
}

ExactExpectation exact_dispatch_expectation(const ExpectationGraph& g, const FlowSolution& flow,
                                            int jobs, const OracleLimits& limits) {
  const DpInputs in = make_dp_inputs(g, flow, limits);
  const int n = in.n;
  const int k = in.k;
  const auto layers = masks_by_popcount(n);
  const std::size_t states = std::size_t{1} << n;
  const int threads = thread_count(jobs);

  std::vector<double> pi(states, 0.0);
  pi[states - 1] = 1.0;
  std::vector<KahanSum> edge(static_cast<std::size_t>(n) * k);
  std::vector<KahanSum> avail(static_cast<std::size_t>(n) * n);

  constexpr std::size_t kChunk = 2048;  // fixed: chunk boundaries never depend on thread count

  // The full-set layer is the start state; record its availability column.
  for (int w = 0; w < n; ++w) avail[static_cast<std::size_t>(w) * n + 0].add(1.0);

  std::vector<std::vector<double>> chunk_edge;
  for (int m = n - 1; m >= 0; --m) {
    const auto& targets = layers[m];
    const std::size_t chunks = (targets.size() + kChunk - 1) / kChunk;
    chunk_edge.assign(chunks, {});

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(chunks); ++ci) {
      std::vector<double> local(static_cast<std::size_t>(n) * k, 0.0);
      std::vector<std::int64_t> inside_target(k);
      const std::size_t lo = static_cast<std::size_t>(ci) * kChunk;
      const std::size_t hi = std::min(lo + kChunk, targets.size());
      for (std::size_t idx = lo; idx < hi; ++idx) {
        const std::uint32_t target = targets[idx];
        for (int j : in.active) {
          const std::int64_t* xj = &in.x[static_cast<std::size_t>(j) * n];
          std::int64_t inside = 0;
          for (std::uint32_t bits = target; bits;) {
            int w = std::countr_zero(bits);
            bits &= bits - 1;
            inside += xj[w];
          }
          inside_target[j] = inside;
        }
        const int src_size = m + 1;
        double acc = 0.0;
        for (int w = 0; w < n; ++w) {
          if (target & (1u << w)) continue;
          const std::uint32_t source = target | (1u << w);
          const double mass = pi[source];
          if (mass == 0.0) continue;
          double assign_prob = 0.0;
          for (int j : in.active) {
            const std::int64_t xwj = in.x[static_cast<std::size_t>(j) * n + w];
            const double tot = static_cast<double>(in.total[j]);
            const std::int64_t outside = in.total[j] - inside_target[j] - xwj;
            const double prob_wj =
                in.p[j] * (static_cast<double>(xwj) / tot +
                           static_cast<double>(outside) / (tot * src_size));
            assign_prob += prob_wj;
            local[static_cast<std::size_t>(w) * k + j] += mass * prob_wj;
          }
          acc += mass * assign_prob;
        }
        pi[target] = acc;
      }
      chunk_edge[ci] = std::move(local);
    }

    // Ordered merge keeps the reduction independent of the thread count.
    for (std::size_t ci = 0; ci < chunks; ++ci) {
      const auto& local = chunk_edge[ci];
      for (std::size_t cell = 0; cell < local.size(); ++cell) edge[cell].add(local[cell]);
    }
    if (m >= 1) {
      const int t = n - m + 1;
      for (std::uint32_t mask : targets) {
        const double mass = pi[mask];
        for (std::uint32_t bits = mask; bits;) {
          int w = std::countr_zero(bits);
          bits &= bits - 1;
          avail[static_cast<std::size_t>(w) * n + (t - 1)].add(mass);
        }
      }
    }
  }

  ExactExpectation out;
  out.state_count = static_cast<std::int64_t>(states);
  out.edge_probabilities.emplace(static_cast<std::size_t>(n) * k);
  KahanSum value;
  for (int w = 0; w < n; ++w) {
    for (int j = 0; j < k; ++j) {
      double pr = edge[static_cast<std::size_t>(w) * k + j].value();
      (*out.edge_probabilities)[static_cast<std::size_t>(w) * k + j] = pr;
      value.add(g.utility(w, j) * pr);
    }
  }
  out.value = value.value();
  out.availability.resize(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < out.availability.size(); ++i) {
    out.availability[i] = avail[i].value();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact E[OPT] by enumeration of arrival-count vectors.
// ---------------------------------------------------------------------------

namespace {

std::int64_t count_vector_total(int n, int k, std::int64_t cap) {
  // C(n+k-1, k-1), bailing out once past cap.
  __int128 c = 1;
  for (int i = 1; i <= k - 1; ++i) {
    c = c * (n + i) / i;  // exact: product of i consecutive integers over i!
    if (c > cap * 4) return cap + 1;
  }
  return c > cap ? cap + 1 : static_cast<std::int64_t>(c);
}

void enumerate_compositions(int n, int k, std::vector<std::int32_t>& out) {
  // Lexicographic by leading coordinate; deterministic order matters for the
  // fixed-chunk reductions.
  std::vector<std::int32_t> cur(k, 0);
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == k - 1) {
      cur[pos] = remaining;
      out.insert(out.end(), cur.begin(), cur.end());
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      cur[pos] = c;
      self(self, pos + 1, remaining - c);
    }
  };
  rec(rec, 0, n);
}

// Multinomial probability of a count vector, computed as interleaved
// binomial-times-power factors so every partial product stays inside
// binary64 range (each completed type leaves a marginal probability <= 1).
double multinomial_probability(const ExpectationGraph& g, const std::int32_t* counts) {
  double prob = 1.0;
  int remaining = g.n;
  for (int j = 0; j < g.k; ++j) {
    const int c = counts[j];
    if (c == 0) continue;
    const double pj = g.probability(j);
    for (int i = 0; i < c; ++i) {
      prob *= pj * static_cast<double>(remaining - i) / static_cast<double>(i + 1);
    }
    remaining -= c;
  }
  return prob;
}

struct OptEnumeration {
  std::vector<std::int32_t> rows;  // flat, k per row
  std::int64_t row_count = 0;
};

OptEnumeration prepare_opt_enumeration(const ExpectationGraph& g, const OracleLimits& limits) {
  require_valid(g);
  if (g.n > limits.max_enumeration_workers) {
    throw CapacityError("count-vector enumeration limited to n <= " +
                        std::to_string(limits.max_enumeration_workers));
  }
  std::int64_t total = count_vector_total(g.n, g.k, limits.max_count_vectors);
  if (total > limits.max_count_vectors) {
    throw CapacityError("count-vector space exceeds " +
                        std::to_string(limits.max_count_vectors) + " states");
  }
  OptEnumeration e;
  e.row_count = total;
  e.rows.reserve(static_cast<std::size_t>(total) * g.k);
  enumerate_compositions(g.n, g.k, e.rows);
  return e;
}

double weighted_opt_term(const ExpectationGraph& g, const std::int32_t* counts,
                         std::vector<std::int64_t>& scratch) {
  double weight = multinomial_probability(g, counts);
  if (weight == 0.0) return 0.0;
  for (int j = 0; j < g.k; ++j) scratch[j] = counts[j];
  return weight * opt_value_for_counts(g, scratch);
}

}  // namespace

ExactExpectation exact_opt_expectation_serial(const ExpectationGraph& g,
                                              const OracleLimits& limits) {
  auto e = prepare_opt_enumeration(g, limits);
  KahanSum value;
  std::vector<std::int64_t> scratch(g.k);
  for (std::int64_t r = 0; r < e.row_count; ++r) {
    value.add(weighted_opt_term(g, &e.rows[static_cast<std::size_t>(r) * g.k], scratch));
  }
  ExactExpectation out;
  out.value = value.value();
  out.state_count = e.row_count;
  return out;
}

ExactExpectation exact_opt_expectation(const ExpectationGraph& g, int jobs,
                                       const OracleLimits& limits) {
  auto e = prepare_opt_enumeration(g, limits);
  const int threads = thread_count(jobs);
  constexpr std::int64_t kChunk = 512;  // fixed chunking for thread-count independence
  const std::int64_t chunks = (e.row_count + kChunk - 1) / kChunk;
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t ci = 0; ci < chunks; ++ci) {
    std::vector<std::int64_t> scratch(g.k);
    KahanSum local;
    const std::int64_t lo = ci * kChunk;
    const std::int64_t hi = std::min(lo + kChunk, e.row_count);
    for (std::int64_t r = lo; r < hi; ++r) {
      local.add(weighted_opt_term(g, &e.rows[static_cast<std::size_t>(r) * g.k], scratch));
    }
    partial[static_cast<std::size_t>(ci)] = local.value();
  }

  KahanSum value;
  for (double v : partial) value.add(v);
  ExactExpectation out;
  out.value = value.value();
  out.state_count = e.row_count;
  return out;
}

std::string exact_to_json(const ExactExpectation& e, int n, int k, bool include_edges) {
  nlohmann::ordered_json j;
  j["value"] = e.value;
  j["state_count"] = e.state_count;
  if (include_edges && e.edge_probabilities) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int w = 0; w < n; ++w) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (int t = 0; t < k; ++t) {
        row.push_back((*e.edge_probabilities)[static_cast<std::size_t>(w) * k + t]);
      }
      rows.push_back(std::move(row));
    }
    j["edge_probabilities"] = std::move(rows);
  }
  return j.dump(2) + "\n";
}

}  // namespace opbm
