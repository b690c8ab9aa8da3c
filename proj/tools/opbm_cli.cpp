// Command-line front end: instances, the offline transportation solver, the
// online dispatcher, exact oracles, and the Monte Carlo harness wired into
// reproducible experiments. All randomness is derived from --seed; reruns
// with equal flags produce byte-identical output files for any --jobs value.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "opbm/dispatch.hpp"
#include "opbm/errors.hpp"
#include "opbm/golden.hpp"
#include "opbm/harness.hpp"
#include "opbm/instance.hpp"
#include "opbm/oracle.hpp"
#include "opbm/rational.hpp"
#include "opbm/report.hpp"
#include "opbm/transport.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitStatFailure = 4;

struct Common {
  std::string instance_path;
  std::string gen_lb;      // "n,p"
  std::string gen_random;  // "n,k,utility_bound,denominator,seed"
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string out;
  int jobs = 0;
};

void add_instance_source(CLI::App* cmd, Common& c) {
  cmd->add_option("--instance", c.instance_path, "instance JSON file");
  cmd->add_option("--gen-lb", c.gen_lb,
                  "inline lower-bound instance \"n,p\" (p as a/b or decimal)");
  cmd->add_option("--gen-random", c.gen_random,
                  "inline random instance \"n,k,utility_bound,denominator,seed\"");
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "master seed; equal seeds reproduce runs exactly")
      ->default_val(0);
  cmd->add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->default_val("csv");
  cmd->add_option("--out", c.out, "output file (stdout when omitted)");
  cmd->add_option("--jobs", c.jobs, "worker threads, 0 = all; never changes results")
      ->default_val(0);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  return parts;
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw opbm::ParseError("bad " + what + ": \"" + s + "\"");
  }
}

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_int(part, what));
  return out;
}

std::vector<opbm::Rational> parse_rational_list(const std::string& s) {
  std::vector<opbm::Rational> out;
  for (const auto& part : split(s, ',')) out.push_back(opbm::Rational::parse(part));
  return out;
}

opbm::ExpectationGraph instance_from_source(const Common& c, std::string& label) {
  int sources = !c.instance_path.empty() + !c.gen_lb.empty() + !c.gen_random.empty();
  if (sources != 1) {
    throw std::invalid_argument(
        "exactly one instance source required: --instance, --gen-lb, or --gen-random");
  }
  if (!c.instance_path.empty()) {
    label = c.instance_path;
    return opbm::load_instance(c.instance_path);
  }
  if (!c.gen_lb.empty()) {
    auto parts = split(c.gen_lb, ',');
    if (parts.size() != 2) throw opbm::ParseError("--gen-lb expects \"n,p\"");
    label = "lb:" + c.gen_lb;
    return opbm::generate_lower_bound_instance(parse_int(parts[0], "n"),
                                               opbm::Rational::parse(parts[1]));
  }
  auto parts = split(c.gen_random, ',');
  if (parts.size() != 5) {
    throw opbm::ParseError("--gen-random expects \"n,k,utility_bound,denominator,seed\"");
  }
  label = "random:" + c.gen_random;
  return opbm::generate_random_instance(
      parse_int(parts[0], "n"), parse_int(parts[1], "k"), std::stod(parts[2]),
      parse_int(parts[3], "denominator"), static_cast<std::uint64_t>(std::stoull(parts[4])));
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(c.out, std::ios::binary);
  if (!out) throw opbm::Error("cannot open " + c.out + " for writing");
  out << text;
}

opbm::report::Meta make_meta(const std::string& command, const Common& c,
                             const std::string& label,
                             std::vector<std::pair<std::string, std::string>> extra = {}) {
  opbm::report::Meta meta;
  meta.command = command;
  if (!label.empty()) meta.fields.push_back({"instance", label});
  meta.fields.push_back({"seed", std::to_string(c.seed)});
  for (auto& kv : extra) meta.fields.push_back(std::move(kv));
  return meta;
}

// ---------------------------------------------------------------------------

int cmd_solve(const Common& c) {
  std::string label;
  auto g = instance_from_source(c, label);
  auto flow = opbm::solve_tpp(g);
  if (c.format == "json") {
    emit(c, opbm::flow_to_json(flow));
  } else {
    std::ostringstream os;
    os << "# command=solve instance=" << label << "\n";
    os << "objective," << opbm::report::fmt(flow.objective) << "\n";
    os << "w,j,flow_numerator,flow_denominator\n";
    for (int w = 0; w < flow.n; ++w) {
      for (int j = 0; j < flow.k; ++j) {
        if (flow.numerator(w, j) == 0) continue;
        os << w + 1 << "," << j + 1 << "," << flow.numerator(w, j) << "," << flow.denominator
           << "\n";
      }
    }
    emit(c, os.str());
  }
  return kExitOk;
}

int cmd_gen(const Common& c) {
  std::string label;
  auto g = instance_from_source(c, label);
  emit(c, opbm::instance_to_json(g));
  return kExitOk;
}

int cmd_run(const Common& c, const std::string& policy_name, const std::string& sequence_text,
            std::int64_t replication) {
  std::string label;
  auto g = instance_from_source(c, label);
  auto policy = opbm::parse_policy(policy_name);

  opbm::RunResult run;
  if (sequence_text.empty()) {
    // Replays exactly the trial `replication` of the simulation harness.
    opbm::FlowSolution flow;
    const opbm::FlowSolution* flow_ptr = nullptr;
    if (policy == opbm::Policy::dispatch) {
      flow = opbm::solve_tpp(g);
      flow_ptr = &flow;
    }
    run = opbm::replication_run(g, flow_ptr, policy, c.seed, replication);
  } else {
    opbm::ArrivalSequence seq;
    for (int t : parse_int_list(sequence_text, "sequence entry")) seq.types.push_back(t - 1);
    opbm::require_valid_sequence(g, seq);
    switch (policy) {
      case opbm::Policy::dispatch: {
        auto flow = opbm::solve_tpp(g);
        run = opbm::run_dispatch(g, flow, c.seed, seq);
        break;
      }
      case opbm::Policy::greedy:
        run = opbm::run_greedy(g, seq);
        break;
      case opbm::Policy::uniform:
        run = opbm::run_uniform(g, c.seed, seq);
        break;
    }
  }

  std::ostringstream os;
  if (c.format == "json") {
    for (const auto& e : run.events) os << opbm::event_to_json_line(e) << "\n";
  } else {
    os << "# command=run instance=" << label << " policy=" << policy_name
       << " seed=" << c.seed << "\n";
    os << "t,job_type,preferred,preferred_available,assigned,utility\n";
    for (const auto& e : run.events) {
      os << e.t << "," << e.job_type + 1 << "," << e.preferred + 1 << ","
         << (e.preferred_available ? 1 : 0) << "," << e.assigned + 1 << ","
         << opbm::report::fmt(e.utility) << "\n";
    }
    os << "value," << opbm::report::fmt(run.matching.value) << "\n";
  }
  emit(c, os.str());
  return kExitOk;
}

int cmd_simulate(const Common& c, const std::string& policy_name, std::int64_t trials,
                 bool per_trial) {
  std::string label;
  auto g = instance_from_source(c, label);
  auto policy = opbm::parse_policy(policy_name);
  auto result = opbm::simulate(g, policy, trials, c.seed, c.jobs);
  auto meta = make_meta("simulate", c, label,
                        {{"policy", policy_name}, {"trials", std::to_string(trials)}});
  emit(c, c.format == "json" ? opbm::report::simulation_json(meta, result, per_trial)
                             : opbm::report::simulation_csv(meta, result, per_trial));
  return kExitOk;
}

int cmd_exact(const Common& c, bool edge_probs, bool rational) {
  std::string label;
  auto g = instance_from_source(c, label);
  auto flow = opbm::solve_tpp(g);
  auto dp = opbm::exact_dispatch_expectation(g, flow, c.jobs);
  auto opt = opbm::exact_opt_expectation(g, c.jobs);

  opbm::report::ExactSummary s;
  s.tpp = flow.objective;
  s.dispatch_value = dp.value;
  s.opt_value = opt.value;
  s.dp_states = dp.state_count;
  s.opt_states = opt.state_count;
  const double slack = 1e-9;
  s.dispatch_ge_half_tpp = s.dispatch_value >= 0.5 * s.tpp - slack;
  s.tpp_ge_opt = s.tpp >= s.opt_value - slack;
  s.dispatch_ge_half_opt = s.dispatch_value >= 0.5 * s.opt_value - slack;

  auto meta = make_meta("exact", c, label);
  std::ostringstream os;
  os << (c.format == "json" ? opbm::report::exact_json(meta, s)
                            : opbm::report::exact_csv(meta, s));
  if (edge_probs) {
    os << opbm::exact_to_json(dp, g.n, g.k, true);
  }
  if (rational) {
    auto r = opbm::exact_dispatch_expectation_rational(g, flow);
    os << "exact_dispatch_expectation," << r.value << "\n";
    os << "availability_uniform," << (r.availability_uniform ? "PASS" : "FAIL") << "\n";
    os << "edge_bound_holds," << (r.edge_bound_holds ? "PASS" : "FAIL") << "\n";
  }
  emit(c, os.str());
  return kExitOk;
}

int cmd_lemmas(const Common& c, std::int64_t trials) {
  std::string label;
  auto g = instance_from_source(c, label);
  auto report = opbm::check_lemmas(g, trials, c.seed, c.jobs);
  auto meta = make_meta("lemmas", c, label, {{"trials", std::to_string(trials)}});
  emit(c, c.format == "json" ? opbm::report::lemmas_json(meta, report)
                             : opbm::report::lemmas_csv(meta, report));
  return report.all_pass() ? kExitOk : kExitStatFailure;
}

int cmd_lowerbound(const Common& c, const std::string& n_list, const std::string& p_list,
                   std::int64_t trials) {
  auto ns = parse_int_list(n_list, "n");
  auto ps = parse_rational_list(p_list);
  auto rows = opbm::lower_bound_sweep(ns, ps, trials, c.seed, c.jobs);
  auto meta = make_meta("lowerbound", c, "",
                        {{"n", n_list}, {"p", p_list}, {"trials", std::to_string(trials)}});
  emit(c, c.format == "json" ? opbm::report::sweep_json(meta, rows)
                             : opbm::report::sweep_csv(meta, rows));
  return kExitOk;
}

int cmd_reproduce_example(const Common& c) {
  auto outcome = opbm::reproduce_golden();
  std::ostringstream os;
  if (c.format == "json") {
    for (const auto& e : outcome.run.events) os << opbm::event_to_json_line(e) << "\n";
  } else {
    os << "# command=reproduce-example\n";
    os << "t,job_type,preferred,preferred_available,assigned,utility\n";
    for (const auto& e : outcome.run.events) {
      os << e.t << "," << e.job_type + 1 << "," << e.preferred + 1 << ","
         << (e.preferred_available ? 1 : 0) << "," << e.assigned + 1 << ","
         << opbm::report::fmt(e.utility) << "\n";
    }
    os << "tpp," << opbm::report::fmt(outcome.tpp) << "\n";
    os << "dispatch_value," << opbm::report::fmt(outcome.run.matching.value) << "\n";
    os << "opt_value," << opbm::report::fmt(outcome.opt) << "\n";
    os << "result," << (outcome.ok ? "PASS" : "FAIL") << "\n";
  }
  emit(c, os.str());
  if (!outcome.ok) {
    std::cerr << outcome.diff;
    return kExitMismatch;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Online perfect bipartite matching with i.i.d. arrivals: offline "
      "transportation solver, flow-guided online dispatcher, exact oracles, "
      "and a Monte Carlo verification harness"};
  app.require_subcommand(1);

  Common c;
  std::string policy = "dispatch";
  std::string sequence_text;
  std::int64_t replication = 0;
  std::int64_t trials = 100000;
  bool per_trial = false;
  bool edge_probs = false;
  bool rational = false;
  std::string n_list, p_list;

  auto* solve = app.add_subcommand("solve", "solve the offline transportation problem; "
                                            "csv: objective then nonzero flow entries");
  add_instance_source(solve, c);
  add_common(solve, c);

  auto* gen = app.add_subcommand("gen", "generate an instance file");
  add_instance_source(gen, c);
  add_common(gen, c);

  auto* run = app.add_subcommand("run", "run one policy over one arrival sequence; "
                                        "json: one trace event per line");
  add_instance_source(run, c);
  add_common(run, c);
  run->add_option("--policy", policy, "dispatch | greedy | uniform")->default_val("dispatch");
  run->add_option("--sequence", sequence_text, "comma-separated 1-based job types (sampled "
                                               "from --seed when omitted)");
  run->add_option("--replication", replication,
                  "which simulate trial to replay when --sequence is omitted")
      ->default_val(0);

  auto* simulate = app.add_subcommand(
      "simulate", "Monte Carlo replications; csv columns: trials,mean,se (+ trial,value rows "
                  "with --per-trial)");
  add_instance_source(simulate, c);
  add_common(simulate, c);
  simulate->add_option("--policy", policy)->default_val("dispatch");
  simulate->add_option("--trials", trials)->default_val(100000);
  simulate->add_flag("--per-trial", per_trial, "append per-trial values");

  auto* exact = app.add_subcommand(
      "exact", "exact expected values: tpp, dispatch_expectation, opt_expectation, and the "
               "half-competitiveness chain checks");
  add_instance_source(exact, c);
  add_common(exact, c);
  exact->add_flag("--edge-probs", edge_probs, "append the exact edge-probability matrix (JSON)");
  exact->add_flag("--rational", rational,
                  "append the exact-rational evaluation (n <= 10): value and invariant checks");

  auto* lemmas = app.add_subcommand(
      "lemmas", "statistical + exact checks of the dispatcher invariants; csv columns: "
                "check,result,worst,tolerance,detail; exit 4 on failure");
  add_instance_source(lemmas, c);
  add_common(lemmas, c);
  lemmas->add_option("--trials", trials)->default_val(200000);

  auto* lowerbound = app.add_subcommand(
      "lowerbound", "ratio sweep over the diagonal lower-bound family; csv columns: n,p,trials,"
                    "alg_mean,alg_se,opt_mean,opt_se,ratio,ci_lo,ci_hi,opt_closed_form,"
                    "alg_upper_bound,ratio_limit");
  add_common(lowerbound, c);
  lowerbound->add_option("--n", n_list, "comma-separated worker counts")->required();
  lowerbound->add_option("--p", p_list, "comma-separated arrival masses (a/b or decimal)")
      ->required();
  lowerbound->add_option("--trials", trials)->default_val(100000);

  auto* reproduce = app.add_subcommand(
      "reproduce-example", "replay the built-in worked example and verify it exactly; exit 1 "
                           "with a diff on mismatch");
  add_common(reproduce, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (solve->parsed()) return cmd_solve(c);
    if (gen->parsed()) return cmd_gen(c);
    if (run->parsed()) return cmd_run(c, policy, sequence_text, replication);
    if (simulate->parsed()) return cmd_simulate(c, policy, trials, per_trial);
    if (exact->parsed()) return cmd_exact(c, edge_probs, rational);
    if (lemmas->parsed()) return cmd_lemmas(c, trials);
    if (lowerbound->parsed()) return cmd_lowerbound(c, n_list, p_list, trials);
    if (reproduce->parsed()) return cmd_reproduce_example(c);
  } catch (const opbm::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const opbm::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const opbm::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
