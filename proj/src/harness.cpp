#include "opbm/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>

#include "opbm/dispatch.hpp"
#include "opbm/errors.hpp"
#include "opbm/numeric.hpp"
#include "opbm/oracle.hpp"

namespace opbm {

namespace {

int thread_count(int jobs) { return jobs > 0 ? jobs : omp_get_max_threads(); }

std::uint64_t policy_seed(std::uint64_t master_seed, std::int64_t replication) {
  // The dispatcher re-derives its own policy-domain stream from this value;
  // what matters is that it is a deterministic function of (seed, rep) and
  // distinct from the arrival stream.
  return rng::derive(master_seed, static_cast<std::uint64_t>(replication) * 2 + 1);
}

double one_trial(const ExpectationGraph& g, const DispatchTables* tables, Policy policy,
                 std::uint64_t master_seed, std::int64_t rep, const ArrivalSequence& seq) {
  switch (policy) {
    case Policy::dispatch:
      return run_dispatch_value(g, *tables, policy_seed(master_seed, rep), seq);
    case Policy::greedy:
      return run_greedy(g, seq).matching.value;
    case Policy::uniform:
      return run_uniform(g, policy_seed(master_seed, rep), seq).matching.value;
  }
  return 0.0;
}

}  // namespace

Policy parse_policy(const std::string& name) {
  if (name == "dispatch") return Policy::dispatch;
  if (name == "greedy") return Policy::greedy;
  if (name == "uniform") return Policy::uniform;
  throw std::invalid_argument("unknown policy \"" + name +
                              "\" (expected dispatch, greedy, or uniform)");
}

std::string policy_name(Policy p) {
  switch (p) {
    case Policy::dispatch: return "dispatch";
    case Policy::greedy: return "greedy";
    case Policy::uniform: return "uniform";
  }
  return "?";
}

TrialValues run_trials(const ExpectationGraph& g, const FlowSolution* flow, Policy policy,
                       std::int64_t trials, std::uint64_t master_seed, int jobs, bool with_opt) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  require_valid(g);
  DispatchTables tables;
  if (policy == Policy::dispatch) {
    if (flow == nullptr) throw std::invalid_argument("dispatch policy needs a flow solution");
    tables = DispatchTables::build(g, *flow);
  }
  TrialValues out;
  out.alg.resize(static_cast<std::size_t>(trials));
  if (with_opt) out.opt.resize(static_cast<std::size_t>(trials));
  const int threads = thread_count(jobs);

#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::int64_t i = 0; i < trials; ++i) {
    auto arrival_stream = rng::Stream::child(master_seed, rng::Domain::arrivals, static_cast<std::uint64_t>(i));
    ArrivalSequence seq = sample_sequence(g, arrival_stream);
    out.alg[static_cast<std::size_t>(i)] = one_trial(g, &tables, policy, master_seed, i, seq);
    if (with_opt) {
      out.opt[static_cast<std::size_t>(i)] = opt_value_for_counts(g, type_counts(g, seq));
    }
  }
  return out;
}

TrialValues run_trials_serial(const ExpectationGraph& g, const FlowSolution* flow, Policy policy,
                              std::int64_t trials, std::uint64_t master_seed, bool with_opt) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  require_valid(g);
  DispatchTables tables;
  if (policy == Policy::dispatch) {
    if (flow == nullptr) throw std::invalid_argument("dispatch policy needs a flow solution");
    tables = DispatchTables::build(g, *flow);
  }
  TrialValues out;
  out.alg.resize(static_cast<std::size_t>(trials));
  if (with_opt) out.opt.resize(static_cast<std::size_t>(trials));
  for (std::int64_t i = 0; i < trials; ++i) {
    auto arrival_stream = rng::Stream::child(master_seed, rng::Domain::arrivals, static_cast<std::uint64_t>(i));
    ArrivalSequence seq = sample_sequence(g, arrival_stream);
    out.alg[static_cast<std::size_t>(i)] = one_trial(g, &tables, policy, master_seed, i, seq);
    if (with_opt) {
      out.opt[static_cast<std::size_t>(i)] = opt_value_for_counts(g, type_counts(g, seq));
    }
  }
  return out;
}

ArrivalSequence replication_sequence(const ExpectationGraph& g, std::uint64_t master_seed,
                                     std::int64_t replication) {
  auto stream =
      rng::Stream::child(master_seed, rng::Domain::arrivals, static_cast<std::uint64_t>(replication));
  return sample_sequence(g, stream);
}

RunResult replication_run(const ExpectationGraph& g, const FlowSolution* flow, Policy policy,
                          std::uint64_t master_seed, std::int64_t replication) {
  require_valid(g);
  ArrivalSequence seq = replication_sequence(g, master_seed, replication);
  switch (policy) {
    case Policy::dispatch:
      if (flow == nullptr) throw std::invalid_argument("dispatch policy needs a flow solution");
      return run_dispatch(g, *flow, policy_seed(master_seed, replication), seq);
    case Policy::greedy:
      return run_greedy(g, seq);
    case Policy::uniform:
      return run_uniform(g, policy_seed(master_seed, replication), seq);
  }
  throw std::invalid_argument("unknown policy");
}

SimulationResult simulate(const ExpectationGraph& g, Policy policy, std::int64_t trials,
                          std::uint64_t master_seed, int jobs) {
  FlowSolution flow;
  const FlowSolution* flow_ptr = nullptr;
  if (policy == Policy::dispatch) {
    flow = solve_tpp(g);
    flow_ptr = &flow;
  }
  SimulationResult out;
  out.values = run_trials(g, flow_ptr, policy, trials, master_seed, jobs, false).alg;
  auto stats = mean_and_se(out.values);
  out.mean = stats.mean;
  out.se = stats.se;
  out.trials = trials;
  out.master_seed = master_seed;
  return out;
}

RatioEstimate estimate_ratio(const ExpectationGraph& g, Policy policy, std::int64_t trials,
                             std::uint64_t master_seed, int jobs) {
  FlowSolution flow;
  const FlowSolution* flow_ptr = nullptr;
  if (policy == Policy::dispatch) {
    flow = solve_tpp(g);
    flow_ptr = &flow;
  }
  auto values = run_trials(g, flow_ptr, policy, trials, master_seed, jobs, true);

  RatioEstimate est;
  est.trials = trials;
  est.master_seed = master_seed;
  auto alg = mean_and_se(values.alg);
  auto opt = mean_and_se(values.opt);
  est.alg_mean = alg.mean;
  est.alg_se = alg.se;
  est.opt_mean = opt.mean;
  est.opt_se = opt.se;
  if (est.opt_mean == 0.0) {
    throw Error("competitive ratio undefined: mean offline optimum is zero");
  }
  est.ratio = est.alg_mean / est.opt_mean;

  if (trials >= 2) {
    const auto m = static_cast<double>(trials);
    double var_alg = alg.se * alg.se * m;
    double var_opt = opt.se * opt.se * m;
    double cov = sample_cov(values.alg, values.opt, alg.mean, opt.mean);
    double var_ratio =
        (var_alg - 2.0 * est.ratio * cov + est.ratio * est.ratio * var_opt) /
        (est.opt_mean * est.opt_mean * m);
    double se_ratio = std::sqrt(std::max(0.0, var_ratio));
    est.ci_lo = est.ratio - 1.96 * se_ratio;
    est.ci_hi = est.ratio + 1.96 * se_ratio;
  } else {
    est.ci_lo = est.ci_hi = est.ratio;
  }
  return est;
}

// ---------------------------------------------------------------------------
// Lemma checks: integer tallies over simulated runs, merged chunk-wise
// (integer addition commutes, so any merge order is bit-identical), plus the
// exact subset-DP routes.
// ---------------------------------------------------------------------------

namespace {

struct Tally {
  std::vector<std::int64_t> preferred;  // n
  std::vector<std::int64_t> avail;      // n*n: (w, t-1)
  std::vector<std::int64_t> edge;       // n*k
  std::map<std::uint64_t, std::vector<std::int64_t>> buckets;  // (t<<32|mask) -> counts, [n]=total

  explicit Tally(int n, int k)
      : preferred(n, 0), avail(static_cast<std::size_t>(n) * n, 0),
        edge(static_cast<std::size_t>(n) * k, 0) {}

  void merge(const Tally& o) {
    for (std::size_t i = 0; i < preferred.size(); ++i) preferred[i] += o.preferred[i];
    for (std::size_t i = 0; i < avail.size(); ++i) avail[i] += o.avail[i];
    for (std::size_t i = 0; i < edge.size(); ++i) edge[i] += o.edge[i];
    for (const auto& [key, counts] : o.buckets) {
      auto& mine = buckets[key];
      if (mine.empty()) mine.assign(counts.size(), 0);
      for (std::size_t i = 0; i < counts.size(); ++i) mine[i] += counts[i];
    }
  }
};

void tally_one_run(const ExpectationGraph& g, const DispatchTables& tables,
                   std::uint64_t master_seed, std::int64_t rep, Tally& tally) {
  auto arrival_stream = rng::Stream::child(master_seed, rng::Domain::arrivals, static_cast<std::uint64_t>(rep));
  ArrivalSequence seq = sample_sequence(g, arrival_stream);
  Dispatcher d(g, tables, policy_seed(master_seed, rep));
  const int n = g.n;
  for (int t = 1; t <= n; ++t) {
    std::uint32_t mask = 0;
    for (int w : d.available()) {
      mask |= 1u << w;
      tally.avail[static_cast<std::size_t>(w) * n + (t - 1)]++;
    }
    AssignmentEvent e = d.step(seq.types[t - 1]);
    tally.preferred[e.preferred]++;
    tally.edge[static_cast<std::size_t>(e.assigned) * g.k + e.job_type]++;
    auto& bucket = tally.buckets[(static_cast<std::uint64_t>(t) << 32) | mask];
    if (bucket.empty()) bucket.assign(static_cast<std::size_t>(n) + 1, 0);
    bucket[static_cast<std::size_t>(e.assigned)]++;
    bucket[static_cast<std::size_t>(n)]++;
  }
}

LemmaReport build_report(const ExpectationGraph& g, const FlowSolution& flow, const Tally& tally,
                         std::int64_t trials, std::uint64_t master_seed, int jobs) {
  const int n = g.n;
  LemmaReport report;
  report.trials = trials;
  report.master_seed = master_seed;

  ExactExpectation dp;
  bool have_dp = false;
  std::string dp_error;
  try {
    dp = exact_dispatch_expectation(g, flow, jobs);
    have_dp = true;
  } catch (const std::exception& e) {
    dp_error = e.what();
  }

  // Uniform preferred worker: exact route is the unit row sums of the flow;
  // empirical route is the pooled preferred-draw frequency per worker.
  {
    LemmaCheck c;
    c.name = "preferred_uniform";
    c.tolerance = 0.005;
    bool rows_exact = true;
    for (int w = 0; w < n; ++w) {
      std::int64_t row = 0;
      for (int j = 0; j < g.k; ++j) row += flow.numerator(w, j);
      if (row != flow.denominator) rows_exact = false;
    }
    const double steps = static_cast<double>(trials) * n;
    double worst = 0.0;
    for (int w = 0; w < n; ++w) {
      double freq = static_cast<double>(tally.preferred[w]) / steps;
      worst = std::max(worst, std::abs(freq - 1.0 / n));
    }
    c.worst = worst;
    c.pass = rows_exact && worst <= c.tolerance;
    std::ostringstream os;
    os << "worst |freq - 1/n| = " << worst << " over " << steps << " draws; exact unit row sums "
       << (rows_exact ? "hold" : "violated");
    c.detail = os.str();
    report.checks.push_back(std::move(c));
  }

  // Uniform assignment among available workers, conditioned on the exact
  // available set observed at each step.
  {
    LemmaCheck c;
    c.name = "assignment_uniform";
    c.tolerance = 3.0;  // z-score units
    double worst_z = 0.0;
    std::int64_t used_buckets = 0;
    for (const auto& [key, counts] : tally.buckets) {
      const auto mask = static_cast<std::uint32_t>(key & 0xffffffffu);
      const std::int64_t total = counts[static_cast<std::size_t>(n)];
      if (total < 50) continue;
      ++used_buckets;
      const int m = std::popcount(mask);
      const double expect = 1.0 / m;
      if (m == 1) continue;  // frequency is exactly 1; nothing to test
      const double se = std::sqrt(expect * (1.0 - expect) / static_cast<double>(total));
      for (int w = 0; w < n; ++w) {
        if (!(mask & (1u << w))) continue;
        double freq = static_cast<double>(counts[static_cast<std::size_t>(w)]) /
                      static_cast<double>(total);
        worst_z = std::max(worst_z, std::abs(freq - expect) / se);
      }
    }
    c.worst = worst_z;
    c.pass = worst_z <= c.tolerance;
    std::ostringstream os;
    os << "worst |freq - 1/m| = " << worst_z << " binomial SE across " << used_buckets
       << " (step, available-set) buckets";
    c.detail = os.str();
    report.checks.push_back(std::move(c));
  }

  // Uniform availability: P(w available at step t) = (n-t+1)/n.
  {
    LemmaCheck c;
    c.name = "availability_uniform";
    c.tolerance = 0.01;
    double worst = 0.0;
    for (int w = 0; w < n; ++w) {
      for (int t = 1; t <= n; ++t) {
        double freq = static_cast<double>(tally.avail[static_cast<std::size_t>(w) * n + (t - 1)]) /
                      static_cast<double>(trials);
        worst = std::max(worst, std::abs(freq - static_cast<double>(n - t + 1) / n));
      }
    }
    double worst_exact = 0.0;
    if (have_dp) {
      for (int w = 0; w < n; ++w) {
        for (int t = 1; t <= n; ++t) {
          double v = dp.availability[static_cast<std::size_t>(w) * n + (t - 1)];
          worst_exact = std::max(worst_exact, std::abs(v - static_cast<double>(n - t + 1) / n));
        }
      }
    }
    c.worst = worst;
    c.pass = worst <= c.tolerance && (!have_dp || worst_exact <= 1e-9) && dp_error.empty();
    std::ostringstream os;
    os << "worst empirical deviation = " << worst;
    if (have_dp) {
      os << "; worst exact-DP deviation = " << worst_exact << " (tol 1e-9)";
    } else {
      os << "; exact DP unavailable: " << dp_error;
    }
    c.detail = os.str();
    report.checks.push_back(std::move(c));
  }

  // Per-edge lower bound: P(I_wj = 1) >= flow(w,j)/2.
  {
    LemmaCheck c;
    c.name = "edge_bound";
    c.tolerance = 0.0;  // margins must stay non-negative
    double worst_margin = 0.0;  // positive means a violated bound
    for (int w = 0; w < n; ++w) {
      for (int j = 0; j < g.k; ++j) {
        if (flow.numerator(w, j) <= 0) continue;
        double f = flow.flow(w, j);
        double phat = static_cast<double>(tally.edge[static_cast<std::size_t>(w) * g.k + j]) /
                      static_cast<double>(trials);
        double se = std::sqrt(std::max(phat * (1.0 - phat), 0.0) / static_cast<double>(trials));
        worst_margin = std::max(worst_margin, 0.5 * f - phat - 3.0 * se);
      }
    }
    double worst_exact = 0.0;
    if (have_dp) {
      for (int w = 0; w < n; ++w) {
        for (int j = 0; j < g.k; ++j) {
          if (flow.numerator(w, j) <= 0) continue;
          double bound = 0.5 * flow.flow(w, j);
          double pr = dp.edge_probability(g.k, w, j);
          worst_exact = std::max(worst_exact, bound - pr);
        }
      }
    }
    c.worst = worst_margin;
    c.pass = worst_margin <= 0.0 && (!have_dp || worst_exact <= 1e-9) && dp_error.empty();
    std::ostringstream os;
    os << "worst empirical margin (f/2 - freq - 3se) = " << worst_margin;
    if (have_dp) os << "; worst exact-DP margin = " << worst_exact << " (tol 1e-9)";
    c.detail = os.str();
    report.checks.push_back(std::move(c));
  }

  return report;
}

}  // namespace

LemmaReport check_lemmas_with_flow(const ExpectationGraph& g, const FlowSolution& flow,
                                   std::int64_t trials, std::uint64_t master_seed, int jobs) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  require_valid(g);
  if (g.n > 20) {
    throw CapacityError("lemma checks tally exact availability sets; limited to n <= 20");
  }
  DispatchTables tables = DispatchTables::build(g, flow);

  const int threads = thread_count(jobs);
  constexpr std::int64_t kChunk = 4096;
  const std::int64_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<Tally> partial(static_cast<std::size_t>(chunks), Tally(g.n, g.k));

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t ci = 0; ci < chunks; ++ci) {
    auto& tally = partial[static_cast<std::size_t>(ci)];
    const std::int64_t lo = ci * kChunk;
    const std::int64_t hi = std::min(lo + kChunk, trials);
    for (std::int64_t rep = lo; rep < hi; ++rep) {
      tally_one_run(g, tables, master_seed, rep, tally);
    }
  }

  Tally total(g.n, g.k);
  for (const auto& t : partial) total.merge(t);
  return build_report(g, flow, total, trials, master_seed, jobs);
}

LemmaReport check_lemmas(const ExpectationGraph& g, std::int64_t trials,
                         std::uint64_t master_seed, int jobs) {
  FlowSolution flow = solve_tpp(g);
  return check_lemmas_with_flow(g, flow, trials, master_seed, jobs);
}

// ---------------------------------------------------------------------------
// Lower-bound family sweep.
// ---------------------------------------------------------------------------

double lower_bound_opt_closed_form(int n, const Rational& p) {
  // n * (1 - (1 - p/n)^n): each real type is collected with probability
  // 1 - (1 - p/n)^n independently across types.
  double base = 1.0 - p.to_double() / static_cast<double>(n);
  return static_cast<double>(n) * (1.0 - std::pow(base, n));
}

double lower_bound_alg_upper_bound(int n, const Rational& p) {
  return 0.5 * p.to_double() * static_cast<double>(n + 1);
}

double lower_bound_ratio_limit(const Rational& p) {
  double pd = p.to_double();
  return 0.5 * pd / (1.0 - std::exp(-pd));
}

std::vector<SweepRow> lower_bound_sweep(const std::vector<int>& n_values,
                                        const std::vector<Rational>& p_values,
                                        std::int64_t trials, std::uint64_t master_seed,
                                        int jobs) {
  if (n_values.empty() || p_values.empty()) {
    throw std::invalid_argument("sweep needs at least one n and one p");
  }
  std::vector<SweepRow> rows;
  for (int n : n_values) {
    for (const auto& p : p_values) {
      SweepRow row;
      row.n = n;
      row.p_label = p.str();
      row.p = p.to_double();
      ExpectationGraph g = generate_lower_bound_instance(n, p);
      row.estimate = estimate_ratio(g, Policy::dispatch, trials, master_seed, jobs);
      row.opt_closed_form = lower_bound_opt_closed_form(n, p);
      row.alg_upper_bound = lower_bound_alg_upper_bound(n, p);
      row.ratio_limit = lower_bound_ratio_limit(p);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace opbm
