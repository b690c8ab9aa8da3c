#include "opbm/transport.hpp"

#include <cmath>

#include "json.hpp"
#include "opbm/errors.hpp"
#include "opbm/min_cost_flow.hpp"
#include "opbm/numeric.hpp"

namespace opbm {

FlowSolution solve_tpp(const ExpectationGraph& g, const TransportLimits& limits) {
  require_valid(g);
  const std::int64_t total_supply = static_cast<std::int64_t>(g.n) * g.denominator;
  if (g.denominator > limits.max_total_supply / g.n) {
    throw CapacityError("scaled transportation supply n*D = " + std::to_string(g.n) + "*" +
                        std::to_string(g.denominator) + " exceeds limit " +
                        std::to_string(limits.max_total_supply));
  }

  std::vector<std::int64_t> supply(g.n, g.denominator);
  std::vector<std::int64_t> demand(g.k);
  for (int j = 0; j < g.k; ++j) demand[j] = static_cast<std::int64_t>(g.n) * g.numerators[j];

  auto res = mcf::solve_transport_max(g.n, g.k, g.utilities, supply, demand);
  if (res.shipped != total_supply) throw Error("transportation solve did not ship all supply");

  FlowSolution f;
  f.n = g.n;
  f.k = g.k;
  f.denominator = g.denominator;
  f.numerators = std::move(res.flow);
  f.worker_potentials = std::move(res.row_potentials);
  f.type_potentials = std::move(res.col_potentials);
  f.objective = res.objective / static_cast<double>(g.denominator);

  // Integral conservation must hold exactly; anything else is a solver bug.
  for (int w = 0; w < g.n; ++w) {
    std::int64_t row = 0;
    for (int j = 0; j < g.k; ++j) row += f.numerator(w, j);
    if (row != g.denominator) throw Error("flow row sum mismatch");
  }
  for (int j = 0; j < g.k; ++j) {
    std::int64_t col = 0;
    for (int w = 0; w < g.n; ++w) col += f.numerator(w, j);
    if (col != demand[j]) throw Error("flow column sum mismatch");
  }
  return f;
}

double tpp_upper_bound(const ExpectationGraph& g, const TransportLimits& limits) {
  return solve_tpp(g, limits).objective;
}

std::vector<Violation> check_flow_feasibility(const ExpectationGraph& g, const FlowSolution& f) {
  std::vector<Violation> out;
  if (f.n != g.n || f.k != g.k || f.denominator != g.denominator ||
      f.numerators.size() != static_cast<std::size_t>(g.n) * g.k) {
    out.push_back({Severity::error, "flow", "dimension or denominator mismatch with instance"});
    return out;
  }
  for (const auto& x : f.numerators) {
    if (x < 0) {
      out.push_back({Severity::error, "flow", "negative flow entry"});
      return out;
    }
  }
  for (int w = 0; w < g.n; ++w) {
    std::int64_t row = 0;
    for (int j = 0; j < g.k; ++j) row += f.numerator(w, j);
    if (row != g.denominator) {
      out.push_back({Severity::error, "flow row " + std::to_string(w + 1),
                     "sums to " + std::to_string(row) + "/" + std::to_string(g.denominator) +
                         ", expected exactly 1"});
    }
  }
  for (int j = 0; j < g.k; ++j) {
    std::int64_t col = 0;
    for (int w = 0; w < g.n; ++w) col += f.numerator(w, j);
    std::int64_t want = static_cast<std::int64_t>(g.n) * g.numerators[j];
    if (col != want) {
      out.push_back({Severity::error, "flow column " + std::to_string(j + 1),
                     "sums to " + std::to_string(col) + ", expected " + std::to_string(want)});
    }
  }
  KahanSum acc;
  for (int w = 0; w < g.n; ++w) {
    for (int j = 0; j < g.k; ++j) {
      acc.add(g.utility(w, j) * static_cast<double>(f.numerator(w, j)));
    }
  }
  double recomputed = acc.value() / static_cast<double>(f.denominator);
  double scale = std::max({1.0, std::abs(recomputed), std::abs(f.objective)});
  if (std::abs(recomputed - f.objective) > 1e-12 * scale) {
    out.push_back({Severity::error, "objective",
                   "stored " + std::to_string(f.objective) + " differs from recomputed " +
                       std::to_string(recomputed)});
  }
  return out;
}

std::string flow_to_json(const FlowSolution& f) {
  nlohmann::ordered_json j;
  j["objective"] = f.objective;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int w = 0; w < f.n; ++w) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int jt = 0; jt < f.k; ++jt) row.push_back(f.numerator(w, jt));
    rows.push_back(std::move(row));
  }
  j["flow_numerators"] = std::move(rows);
  j["flow_denominator"] = f.denominator;
  return j.dump(2) + "\n";
}

FlowSolution flow_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("flow JSON: ") + e.what());
  }
  FlowSolution f;
  if (!j.contains("objective") || !j["objective"].is_number()) {
    throw ParseError("flow JSON: missing numeric field \"objective\"");
  }
  f.objective = j["objective"].get<double>();
  if (!j.contains("flow_denominator") || !j["flow_denominator"].is_number_integer()) {
    throw ParseError("flow JSON: missing integer field \"flow_denominator\"");
  }
  f.denominator = j["flow_denominator"].get<std::int64_t>();
  if (!j.contains("flow_numerators") || !j["flow_numerators"].is_array()) {
    throw ParseError("flow JSON: missing array field \"flow_numerators\"");
  }
  const auto& rows = j["flow_numerators"];
  f.n = static_cast<int>(rows.size());
  for (const auto& row : rows) {
    if (!row.is_array()) throw ParseError("flow JSON: \"flow_numerators\" rows must be arrays");
    if (f.k == 0) f.k = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != f.k) {
      throw ParseError("flow JSON: ragged \"flow_numerators\" rows");
    }
    for (const auto& v : row) {
      if (!v.is_number_integer()) throw ParseError("flow JSON: numerators must be integers");
      f.numerators.push_back(v.get<std::int64_t>());
    }
  }
  return f;
}

}  // namespace opbm
