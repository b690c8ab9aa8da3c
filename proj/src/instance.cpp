#include "opbm/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "opbm/errors.hpp"
#include "opbm/numeric.hpp"

namespace opbm {

namespace {

std::string cell(int w, int j) {
  return "utilities[" + std::to_string(w + 1) + "][" + std::to_string(j + 1) + "]";
}

}  // namespace

std::vector<Violation> validate(const ExpectationGraph& g) {
  std::vector<Violation> out;
  if (g.n < 1) out.push_back({Severity::error, "n", "must be >= 1, got " + std::to_string(g.n)});
  if (g.k < 1) out.push_back({Severity::error, "k", "must be >= 1, got " + std::to_string(g.k)});
  if (g.denominator < 1) {
    out.push_back({Severity::error, "denominator",
                   "must be >= 1, got " + std::to_string(g.denominator)});
  }
  if (g.n < 1 || g.k < 1) return out;

  if (static_cast<int>(g.numerators.size()) != g.k) {
    out.push_back({Severity::error, "numerators",
                   "expected " + std::to_string(g.k) + " entries, got " +
                       std::to_string(g.numerators.size())});
  } else if (g.denominator >= 1) {
    std::int64_t sum = 0;
    for (int j = 0; j < g.k; ++j) {
      if (g.numerators[j] < 0) {
        out.push_back({Severity::error, "numerators[" + std::to_string(j + 1) + "]",
                       "negative numerator " + std::to_string(g.numerators[j])});
      }
      sum += g.numerators[j];
      if (g.numerators[j] == 0) {
        out.push_back({Severity::warning, "numerators[" + std::to_string(j + 1) + "]",
                       "job type has zero probability; it is excluded from sampling"});
      }
    }
    if (sum != g.denominator) {
      out.push_back({Severity::error, "probabilities",
                     "distribution sum is " + std::to_string(sum) + "/" +
                         std::to_string(g.denominator) + ", expected exactly 1"});
    }
  }

  if (g.utilities.size() != static_cast<std::size_t>(g.n) * g.k) {
    out.push_back({Severity::error, "utilities",
                   "expected " + std::to_string(g.n) + "x" + std::to_string(g.k) +
                       " matrix, got " + std::to_string(g.utilities.size()) + " entries"});
    return out;
  }
  for (int w = 0; w < g.n; ++w) {
    for (int j = 0; j < g.k; ++j) {
      double u = g.utility(w, j);
      if (!std::isfinite(u)) {
        out.push_back({Severity::error, cell(w, j), "utility is not finite"});
      } else if (u < 0.0) {
        out.push_back({Severity::error, cell(w, j),
                       "negative utility " + std::to_string(u)});
      }
    }
  }
  return out;
}

void require_valid(const ExpectationGraph& g) {
  auto vs = validate(g);
  if (is_valid(vs)) return;
  std::vector<std::string> msgs;
  for (const auto& v : vs) {
    if (v.severity == Severity::error) msgs.push_back(v.where + ": " + v.message);
  }
  std::string joined;
  for (const auto& m : msgs) joined += "\n  " + m;
  throw ValidationError("invalid instance:" + joined, std::move(msgs));
}

ExpectationGraph generate_lower_bound_instance(int n, const Rational& p) {
  if (n < 1) throw std::invalid_argument("lower-bound instance needs n >= 1");
  if (p <= Rational(0) || p >= Rational(1)) {
    throw std::invalid_argument("lower-bound instance needs p strictly inside (0,1), got " +
                                p.str());
  }
  ExpectationGraph g;
  g.n = n;
  g.k = n + 1;
  if (p.den() > INT64_MAX / n) throw CapacityError("lower-bound denominator overflow");
  g.denominator = p.den() * n;
  g.numerators.assign(g.k, p.num());              // types 1..n: p/n each
  g.numerators[n] = (p.den() - p.num()) * n;      // dummy type: 1-p
  g.utilities.assign(static_cast<std::size_t>(g.n) * g.k, 0.0);
  for (int w = 0; w < n; ++w) g.utility(w, w) = 1.0;
  return g;
}

ExpectationGraph generate_random_instance(int n, int k, double utility_bound,
                                          std::int64_t denominator, std::uint64_t seed) {
  if (n < 1 || k < 1) throw std::invalid_argument("instance needs n >= 1 and k >= 1");
  if (!(utility_bound > 0.0)) throw std::invalid_argument("utility bound must be positive");
  if (denominator < 1) {
    throw std::invalid_argument("denominator must be >= 1, got " + std::to_string(denominator));
  }
  if (denominator < k) {
    throw std::invalid_argument("denominator " + std::to_string(denominator) +
                                " too small for " + std::to_string(k) + " positive parts");
  }
  ExpectationGraph g;
  g.n = n;
  g.k = k;
  g.denominator = denominator;

  auto stream = rng::Stream::child(seed, rng::Domain::generator, 0);
  g.utilities.resize(static_cast<std::size_t>(n) * k);
  for (auto& u : g.utilities) u = stream.uniform01() * utility_bound;

  // Uniform composition of D into k positive parts: k-1 distinct cut points
  // in {1..D-1} via Floyd's sampling, then consecutive differences.
  std::set<std::int64_t> cuts;
  const std::int64_t universe = denominator - 1;
  for (std::int64_t i = universe - (k - 1) + 1; i <= universe; ++i) {
    std::int64_t t = static_cast<std::int64_t>(stream.uniform_below(static_cast<std::uint64_t>(i))) + 1;
    if (!cuts.insert(t).second) cuts.insert(i);
  }
  g.numerators.clear();
  std::int64_t prev = 0;
  for (std::int64_t c : cuts) {
    g.numerators.push_back(c - prev);
    prev = c;
  }
  g.numerators.push_back(denominator - prev);
  return g;
}

std::string instance_to_json(const ExpectationGraph& g) {
  nlohmann::ordered_json j;
  j["n"] = g.n;
  j["k"] = g.k;
  j["denominator"] = g.denominator;
  j["numerators"] = g.numerators;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int w = 0; w < g.n; ++w) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int jt = 0; jt < g.k; ++jt) row.push_back(g.utility(w, jt));
    rows.push_back(std::move(row));
  }
  j["utilities"] = std::move(rows);
  return j.dump(2) + "\n";
}

namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw ParseError(std::string("missing field \"") + name + "\"");
  return *it;
}

template <typename T>
T number_field(const nlohmann::json& j, const char* name) {
  const auto& f = field(j, name);
  if (!f.is_number()) throw ParseError(std::string("field \"") + name + "\" must be a number");
  return f.get<T>();
}

}  // namespace

ExpectationGraph instance_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("instance JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("instance JSON: top level must be an object");

  ExpectationGraph g;
  g.n = number_field<int>(j, "n");
  g.k = number_field<int>(j, "k");
  g.denominator = number_field<std::int64_t>(j, "denominator");

  const auto& nums = field(j, "numerators");
  if (!nums.is_array()) throw ParseError("field \"numerators\" must be an array");
  for (const auto& v : nums) {
    if (!v.is_number_integer()) throw ParseError("field \"numerators\" must hold integers");
    g.numerators.push_back(v.get<std::int64_t>());
  }
  if (g.k >= 1 && static_cast<int>(g.numerators.size()) != g.k) {
    throw ParseError("field \"numerators\": expected " + std::to_string(g.k) +
                     " entries, got " + std::to_string(g.numerators.size()));
  }

  const auto& rows = field(j, "utilities");
  if (!rows.is_array()) throw ParseError("field \"utilities\" must be an array of rows");
  if (g.n >= 1 && static_cast<int>(rows.size()) != g.n) {
    throw ParseError("field \"utilities\": expected " + std::to_string(g.n) +
                     " rows, got " + std::to_string(rows.size()));
  }
  int r = 0;
  for (const auto& row : rows) {
    ++r;
    if (!row.is_array() || (g.k >= 1 && static_cast<int>(row.size()) != g.k)) {
      throw ParseError("field \"utilities\" row " + std::to_string(r) + ": expected " +
                       std::to_string(g.k) + " entries");
    }
    for (const auto& v : row) {
      if (!v.is_number()) {
        throw ParseError("field \"utilities\" row " + std::to_string(r) +
                         ": entries must be numbers");
      }
      g.utilities.push_back(v.get<double>());
    }
  }
  require_valid(g);
  return g;
}

void save_instance(const ExpectationGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << instance_to_json(g);
}

ExpectationGraph load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

void require_valid_sequence(const ExpectationGraph& g, const ArrivalSequence& seq) {
  if (static_cast<int>(seq.types.size()) != g.n) {
    throw std::invalid_argument("arrival sequence length " + std::to_string(seq.types.size()) +
                                " does not match n=" + std::to_string(g.n));
  }
  for (int t = 0; t < g.n; ++t) {
    int j = seq.types[t];
    if (j < 0 || j >= g.k) {
      throw std::invalid_argument("arrival " + std::to_string(t + 1) + " has invalid type index " +
                                  std::to_string(j + 1));
    }
    if (g.numerators[j] == 0) {
      throw std::invalid_argument("arrival " + std::to_string(t + 1) + " has type " +
                                  std::to_string(j + 1) + " with zero probability");
    }
  }
}

ArrivalSequence sample_sequence(const ExpectationGraph& g, rng::Stream& stream) {
  std::vector<std::int64_t> cum(g.k);
  std::int64_t run = 0;
  for (int j = 0; j < g.k; ++j) {
    run += g.numerators[j];
    cum[j] = run;
  }
  ArrivalSequence seq;
  seq.types.resize(g.n);
  for (int t = 0; t < g.n; ++t) {
    auto r = static_cast<std::int64_t>(stream.uniform_below(static_cast<std::uint64_t>(g.denominator)));
    int j = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), r) - cum.begin());
    seq.types[t] = j;
  }
  return seq;
}

std::vector<std::int64_t> type_counts(const ExpectationGraph& g, const ArrivalSequence& seq) {
  std::vector<std::int64_t> counts(g.k, 0);
  for (int j : seq.types) counts[j]++;
  return counts;
}

double matching_value(const ExpectationGraph& g, const ArrivalSequence& seq,
                      const std::vector<int>& assignment) {
  KahanSum acc;
  for (std::size_t t = 0; t < assignment.size(); ++t) {
    acc.add(g.utility(assignment[t], seq.types[t]));
  }
  return acc.value();
}

std::vector<Violation> validate_matching(const ExpectationGraph& g, const ArrivalSequence& seq,
                                         const Matching& m) {
  std::vector<Violation> out;
  if (static_cast<int>(m.assignment.size()) != g.n) {
    out.push_back({Severity::error, "assignment",
                   "expected " + std::to_string(g.n) + " entries"});
    return out;
  }
  std::vector<int> seen(g.n, 0);
  for (int t = 0; t < g.n; ++t) {
    int w = m.assignment[t];
    if (w < 0 || w >= g.n) {
      out.push_back({Severity::error, "assignment[" + std::to_string(t + 1) + "]",
                     "invalid worker index " + std::to_string(w + 1)});
      return out;
    }
    if (seen[w]++) {
      out.push_back({Severity::error, "assignment[" + std::to_string(t + 1) + "]",
                     "worker " + std::to_string(w + 1) + " assigned twice"});
    }
  }
  double recomputed = matching_value(g, seq, m.assignment);
  double scale = std::max({1.0, std::abs(recomputed), std::abs(m.value)});
  if (std::abs(recomputed - m.value) > 1e-12 * scale) {
    out.push_back({Severity::error, "value",
                   "stored value " + std::to_string(m.value) + " differs from recomputed " +
                       std::to_string(recomputed)});
  }
  return out;
}

}  // namespace opbm
