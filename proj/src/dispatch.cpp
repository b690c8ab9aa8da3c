#include "opbm/dispatch.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"
#include "opbm/errors.hpp"
#include "opbm/numeric.hpp"

namespace opbm {

DispatchTables DispatchTables::build(const ExpectationGraph& g, const FlowSolution& flow) {
  if (flow.n != g.n || flow.k != g.k ||
      flow.numerators.size() != static_cast<std::size_t>(g.n) * g.k) {
    throw std::invalid_argument("flow dimensions do not match instance");
  }
  DispatchTables t;
  t.cum.resize(g.k);
  t.total.resize(g.k);
  for (int j = 0; j < g.k; ++j) {
    std::int64_t want = static_cast<std::int64_t>(g.n) * g.numerators[j];
    t.cum[j].resize(g.n);
    std::int64_t run = 0;
    for (int w = 0; w < g.n; ++w) {
      std::int64_t x = flow.numerator(w, j);
      if (x < 0) throw std::invalid_argument("flow has negative entries");
      run += x;
      t.cum[j][w] = run;
    }
    if (run != want) {
      throw std::invalid_argument("flow column " + std::to_string(j + 1) + " total " +
                                  std::to_string(run) + " does not match scaled demand " +
                                  std::to_string(want));
    }
    t.total[j] = run;
  }
  return t;
}

Dispatcher::Dispatcher(const ExpectationGraph& g, const FlowSolution& flow, std::uint64_t seed)
    : g_(&g), owned_(DispatchTables::build(g, flow)), tables_(&*owned_),
      stream_(rng::Stream::child(seed, rng::Domain::policy, 0)) {
  available_.resize(g.n);
  for (int w = 0; w < g.n; ++w) available_[w] = w;
}

Dispatcher::Dispatcher(const ExpectationGraph& g, const DispatchTables& tables, std::uint64_t seed)
    : g_(&g), tables_(&tables), stream_(rng::Stream::child(seed, rng::Domain::policy, 0)) {
  available_.resize(g.n);
  for (int w = 0; w < g.n; ++w) available_[w] = w;
}

AssignmentEvent Dispatcher::step(int job_type) {
  if (t_ > g_->n) {
    throw std::out_of_range("arrival sequence exhausted: all " + std::to_string(g_->n) +
                            " workers are assigned");
  }
  if (job_type < 0 || job_type >= g_->k || g_->numerators[job_type] == 0) {
    // Rejected before any draw so the stream position is untouched.
    throw std::invalid_argument("invalid arrival: type " + std::to_string(job_type + 1) +
                                " has zero probability or is out of range");
  }
  std::uint64_t pick = stream_.uniform_below(static_cast<std::uint64_t>(tables_->total[job_type]));
  const auto& cum = tables_->cum[job_type];
  int preferred = static_cast<int>(
      std::upper_bound(cum.begin(), cum.end(), static_cast<std::int64_t>(pick)) - cum.begin());
  std::uint64_t fallback_rank = stream_.uniform_below(available_.size());
  return apply(job_type, preferred, fallback_rank, std::nullopt);
}

AssignmentEvent Dispatcher::step_forced(int job_type, const ForcedDraw& draw) {
  if (t_ > g_->n) throw std::out_of_range("arrival sequence exhausted");
  if (job_type < 0 || job_type >= g_->k || g_->numerators[job_type] == 0) {
    throw std::invalid_argument("invalid arrival: type " + std::to_string(job_type + 1));
  }
  return apply(job_type, draw.preferred, 0, draw.fallback);
}

AssignmentEvent Dispatcher::apply(int job_type, int preferred, std::uint64_t fallback_rank,
                                  std::optional<int> forced_fallback) {
  auto it = std::lower_bound(available_.begin(), available_.end(), preferred);
  bool preferred_available = it != available_.end() && *it == preferred;

  int assigned;
  if (preferred_available) {
    assigned = preferred;
    available_.erase(it);
  } else if (forced_fallback) {
    auto fit = std::lower_bound(available_.begin(), available_.end(), *forced_fallback);
    if (fit == available_.end() || *fit != *forced_fallback) {
      throw std::invalid_argument("forced fallback worker " +
                                  std::to_string(*forced_fallback + 1) + " is not available");
    }
    assigned = *forced_fallback;
    available_.erase(fit);
  } else {
    auto fit = available_.begin() + static_cast<std::ptrdiff_t>(fallback_rank);
    assigned = *fit;
    available_.erase(fit);
  }

  AssignmentEvent e;
  e.t = t_++;
  e.job_type = job_type;
  e.preferred = preferred;
  e.preferred_available = preferred_available;
  e.assigned = assigned;
  e.utility = g_->utility(assigned, job_type);
  return e;
}

namespace {

RunResult finish(const ExpectationGraph& g, const ArrivalSequence& seq,
                 std::vector<AssignmentEvent> events) {
  RunResult out;
  out.events = std::move(events);
  out.matching.assignment.resize(g.n);
  for (const auto& e : out.events) out.matching.assignment[e.t - 1] = e.assigned;
  out.matching.value = matching_value(g, seq, out.matching.assignment);
  return out;
}

}  // namespace

RunResult run_dispatch(const ExpectationGraph& g, const FlowSolution& flow, std::uint64_t seed,
                       const ArrivalSequence& seq) {
  require_valid_sequence(g, seq);
  Dispatcher d(g, flow, seed);
  std::vector<AssignmentEvent> events;
  events.reserve(g.n);
  for (int j : seq.types) events.push_back(d.step(j));
  return finish(g, seq, std::move(events));
}

RunResult run_dispatch_forced(const ExpectationGraph& g, const FlowSolution& flow,
                              const ArrivalSequence& seq, const std::vector<ForcedDraw>& draws) {
  require_valid_sequence(g, seq);
  if (draws.size() != seq.types.size()) {
    throw std::invalid_argument("need one forced draw per arrival");
  }
  Dispatcher d(g, flow, 0);
  std::vector<AssignmentEvent> events;
  events.reserve(g.n);
  for (int t = 0; t < g.n; ++t) events.push_back(d.step_forced(seq.types[t], draws[t]));
  return finish(g, seq, std::move(events));
}

double run_dispatch_value(const ExpectationGraph& g, const DispatchTables& tables,
                          std::uint64_t seed, const ArrivalSequence& seq) {
  Dispatcher d(g, tables, seed);
  KahanSum total;
  for (int j : seq.types) total.add(d.step(j).utility);
  return total.value();
}

RunResult run_greedy(const ExpectationGraph& g, const ArrivalSequence& seq) {
  require_valid_sequence(g, seq);
  std::vector<int> available(g.n);
  for (int w = 0; w < g.n; ++w) available[w] = w;
  std::vector<AssignmentEvent> events;
  events.reserve(g.n);
  for (int t = 0; t < g.n; ++t) {
    int j = seq.types[t];
    std::size_t best = 0;
    for (std::size_t i = 1; i < available.size(); ++i) {
      if (g.utility(available[i], j) > g.utility(available[best], j)) best = i;
    }
    int w = available[best];
    available.erase(available.begin() + static_cast<std::ptrdiff_t>(best));
    events.push_back({t + 1, j, w, true, w, g.utility(w, j)});
  }
  return finish(g, seq, std::move(events));
}

RunResult run_uniform(const ExpectationGraph& g, std::uint64_t seed, const ArrivalSequence& seq) {
  require_valid_sequence(g, seq);
  auto stream = rng::Stream::child(seed, rng::Domain::policy, 0);
  std::vector<int> available(g.n);
  for (int w = 0; w < g.n; ++w) available[w] = w;
  std::vector<AssignmentEvent> events;
  events.reserve(g.n);
  for (int t = 0; t < g.n; ++t) {
    int j = seq.types[t];
    stream.next_u64();  // keep tick parity with the dispatcher's preferred draw
    std::uint64_t rank = stream.uniform_below(available.size());
    int w = available[static_cast<std::ptrdiff_t>(rank)];
    available.erase(available.begin() + static_cast<std::ptrdiff_t>(rank));
    events.push_back({t + 1, j, w, true, w, g.utility(w, j)});
  }
  return finish(g, seq, std::move(events));
}

std::string event_to_json_line(const AssignmentEvent& e) {
  nlohmann::ordered_json j;
  j["t"] = e.t;
  j["job_type"] = e.job_type + 1;
  j["preferred"] = e.preferred + 1;
  j["preferred_available"] = e.preferred_available;
  j["assigned"] = e.assigned + 1;
  j["utility"] = e.utility;
  return j.dump();
}

}  // namespace opbm
