#include "opbm/report.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace opbm::report {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

std::string comment_line(const Meta& meta) {
  std::ostringstream os;
  os << "# command=" << meta.command;
  for (const auto& [k, v] : meta.fields) os << " " << k << "=" << v;
  os << "\n";
  return os.str();
}

nlohmann::ordered_json meta_json(const Meta& meta) {
  nlohmann::ordered_json j;
  j["command"] = meta.command;
  for (const auto& [k, v] : meta.fields) j[k] = v;
  return j;
}

}  // namespace

std::string simulation_csv(const Meta& meta, const SimulationResult& r, bool per_trial) {
  std::ostringstream os;
  os << comment_line(meta);
  os << "trials,mean,se\n";
  os << r.trials << "," << fmt(r.mean) << "," << fmt(r.se) << "\n";
  if (per_trial) {
    os << "trial,value\n";
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      os << i << "," << fmt(r.values[i]) << "\n";
    }
  }
  return os.str();
}

std::string simulation_json(const Meta& meta, const SimulationResult& r, bool per_trial) {
  nlohmann::ordered_json j;
  j["meta"] = meta_json(meta);
  j["trials"] = r.trials;
  j["mean"] = r.mean;
  j["se"] = r.se;
  if (per_trial) j["values"] = r.values;
  return j.dump(2) + "\n";
}

std::string ratio_csv(const Meta& meta, const RatioEstimate& r) {
  std::ostringstream os;
  os << comment_line(meta);
  os << "trials,alg_mean,alg_se,opt_mean,opt_se,ratio,ci_lo,ci_hi\n";
  os << r.trials << "," << fmt(r.alg_mean) << "," << fmt(r.alg_se) << "," << fmt(r.opt_mean)
     << "," << fmt(r.opt_se) << "," << fmt(r.ratio) << "," << fmt(r.ci_lo) << ","
     << fmt(r.ci_hi) << "\n";
  return os.str();
}

std::string ratio_json(const Meta& meta, const RatioEstimate& r) {
  nlohmann::ordered_json j;
  j["meta"] = meta_json(meta);
  j["trials"] = r.trials;
  j["alg_mean"] = r.alg_mean;
  j["alg_se"] = r.alg_se;
  j["opt_mean"] = r.opt_mean;
  j["opt_se"] = r.opt_se;
  j["ratio"] = r.ratio;
  j["ci_lo"] = r.ci_lo;
  j["ci_hi"] = r.ci_hi;
  return j.dump(2) + "\n";
}

std::string lemmas_csv(const Meta& meta, const LemmaReport& r) {
  std::ostringstream os;
  os << comment_line(meta);
  os << "check,result,worst,tolerance,detail\n";
  for (const auto& c : r.checks) {
    os << c.name << "," << (c.pass ? "PASS" : "FAIL") << "," << fmt(c.worst) << ","
       << fmt(c.tolerance) << ",\"" << c.detail << "\"\n";
  }
  return os.str();
}

std::string lemmas_json(const Meta& meta, const LemmaReport& r) {
  nlohmann::ordered_json j;
  j["meta"] = meta_json(meta);
  j["trials"] = r.trials;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    nlohmann::ordered_json cj;
    cj["check"] = c.name;
    cj["result"] = c.pass ? "PASS" : "FAIL";
    cj["worst"] = c.worst;
    cj["tolerance"] = c.tolerance;
    cj["detail"] = c.detail;
    checks.push_back(std::move(cj));
  }
  j["checks"] = std::move(checks);
  j["all_pass"] = r.all_pass();
  return j.dump(2) + "\n";
}

std::string sweep_csv(const Meta& meta, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << comment_line(meta);
  os << "n,p,trials,alg_mean,alg_se,opt_mean,opt_se,ratio,ci_lo,ci_hi,"
        "opt_closed_form,alg_upper_bound,ratio_limit\n";
  for (const auto& r : rows) {
    os << r.n << "," << r.p_label << "," << r.estimate.trials << "," << fmt(r.estimate.alg_mean)
       << "," << fmt(r.estimate.alg_se) << "," << fmt(r.estimate.opt_mean) << ","
       << fmt(r.estimate.opt_se) << "," << fmt(r.estimate.ratio) << "," << fmt(r.estimate.ci_lo)
       << "," << fmt(r.estimate.ci_hi) << "," << fmt(r.opt_closed_form) << ","
       << fmt(r.alg_upper_bound) << "," << fmt(r.ratio_limit) << "\n";
  }
  return os.str();
}

std::string sweep_json(const Meta& meta, const std::vector<SweepRow>& rows) {
  nlohmann::ordered_json j;
  j["meta"] = meta_json(meta);
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json rj;
    rj["n"] = r.n;
    rj["p"] = r.p_label;
    rj["trials"] = r.estimate.trials;
    rj["alg_mean"] = r.estimate.alg_mean;
    rj["alg_se"] = r.estimate.alg_se;
    rj["opt_mean"] = r.estimate.opt_mean;
    rj["opt_se"] = r.estimate.opt_se;
    rj["ratio"] = r.estimate.ratio;
    rj["ci_lo"] = r.estimate.ci_lo;
    rj["ci_hi"] = r.estimate.ci_hi;
    rj["opt_closed_form"] = r.opt_closed_form;
    rj["alg_upper_bound"] = r.alg_upper_bound;
    rj["ratio_limit"] = r.ratio_limit;
    arr.push_back(std::move(rj));
  }
  j["rows"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string exact_csv(const Meta& meta, const ExactSummary& s) {
  std::ostringstream os;
  os << comment_line(meta);
  os << "quantity,value\n";
  os << "tpp," << fmt(s.tpp) << "\n";
  os << "dispatch_expectation," << fmt(s.dispatch_value) << "\n";
  os << "opt_expectation," << fmt(s.opt_value) << "\n";
  os << "check,result\n";
  os << "dispatch_ge_half_tpp," << (s.dispatch_ge_half_tpp ? "PASS" : "FAIL") << "\n";
  os << "tpp_ge_opt," << (s.tpp_ge_opt ? "PASS" : "FAIL") << "\n";
  os << "dispatch_ge_half_opt," << (s.dispatch_ge_half_opt ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::string exact_json(const Meta& meta, const ExactSummary& s) {
  nlohmann::ordered_json j;
  j["meta"] = meta_json(meta);
  j["tpp"] = s.tpp;
  j["dispatch_expectation"] = s.dispatch_value;
  j["opt_expectation"] = s.opt_value;
  j["dp_states"] = s.dp_states;
  j["opt_states"] = s.opt_states;
  j["dispatch_ge_half_tpp"] = s.dispatch_ge_half_tpp;
  j["tpp_ge_opt"] = s.tpp_ge_opt;
  j["dispatch_ge_half_opt"] = s.dispatch_ge_half_opt;
  return j.dump(2) + "\n";
}

}  // namespace opbm::report
