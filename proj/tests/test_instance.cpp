#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "opbm/errors.hpp"
#include "opbm/golden.hpp"
#include "opbm/instance.hpp"

using namespace opbm;

namespace {

bool mentions(const std::vector<Violation>& vs, const std::string& needle) {
  for (const auto& v : vs) {
    if (v.str().find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("validation accepts the worked example") {
  CHECK(validate(golden_example().instance).empty());
}

TEST_CASE("validation reports the distribution sum") {
  auto g = golden_example().instance;
  g.numerators = {5, 3, 1};  // 9/10
  auto vs = validate(g);
  CHECK(!is_valid(vs));
  CHECK(mentions(vs, "9/10"));
  CHECK(mentions(vs, "probabilities"));
}

TEST_CASE("validation names a negative utility cell") {
  auto g = golden_example().instance;
  g.utility(0, 0) = -1.0;
  auto vs = validate(g);
  CHECK(!is_valid(vs));
  CHECK(mentions(vs, "utilities[1][1]"));
}

TEST_CASE("zero-probability types warn but stay valid") {
  ExpectationGraph g;
  g.n = 1;
  g.k = 2;
  g.denominator = 2;
  g.numerators = {2, 0};
  g.utilities = {1.0, 5.0};
  auto vs = validate(g);
  CHECK(is_valid(vs));
  CHECK(vs.size() == 1);
  CHECK(vs[0].severity == Severity::warning);
}

TEST_CASE("lower-bound family has the stated shape") {
  auto g = generate_lower_bound_instance(2, Rational(1, 2));
  CHECK(g.k == 3);
  CHECK(g.denominator == 4);
  CHECK(g.numerators == std::vector<std::int64_t>{1, 1, 2});
  CHECK(g.utilities == std::vector<double>{1, 0, 0, 0, 1, 0});
  CHECK(validate(g).empty());

  auto g1 = generate_lower_bound_instance(1, Rational(1, 2));
  CHECK(g1.k == 2);
  CHECK(g1.numerators == std::vector<std::int64_t>{1, 1});
  CHECK(g1.utilities == std::vector<double>{1, 0});

  CHECK_THROWS_AS(generate_lower_bound_instance(2, Rational(1)), std::invalid_argument);
  CHECK_THROWS_AS(generate_lower_bound_instance(2, Rational(0)), std::invalid_argument);
  CHECK_THROWS_AS(generate_lower_bound_instance(2, Rational(3, 2)), std::invalid_argument);
}

TEST_CASE("lower-bound utilities: n diagonal ones, zero dummy column") {
  for (int n : {1, 3, 6}) {
    auto g = generate_lower_bound_instance(n, Rational(2, 7));
    int ones = 0;
    for (int w = 0; w < g.n; ++w) {
      for (int j = 0; j < g.k; ++j) {
        if (g.utility(w, j) == 1.0) {
          ++ones;
          CHECK(w == j);
        } else {
          CHECK(g.utility(w, j) == 0.0);
        }
      }
      CHECK(g.utility(w, n) == 0.0);
    }
    CHECK(ones == n);
  }
}

TEST_CASE("random instances are deterministic and valid") {
  auto a = generate_random_instance(3, 2, 10.0, 10, 7);
  auto b = generate_random_instance(3, 2, 10.0, 10, 7);
  CHECK(a.utilities == b.utilities);
  CHECK(a.numerators == b.numerators);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = generate_random_instance(4, 3, 5.0, 6 + static_cast<int>(seed % 5), seed);
    CHECK(validate(g).empty());  // positive parts: not even warnings
  }

  auto tiny = generate_random_instance(1, 1, 5.0, 1, 0);
  CHECK(tiny.numerators == std::vector<std::int64_t>{1});
  CHECK(tiny.utilities[0] >= 0.0);
  CHECK(tiny.utilities[0] <= 5.0);

  CHECK_THROWS_AS(generate_random_instance(2, 3, 1.0, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(generate_random_instance(2, 3, 1.0, 2, 0), std::invalid_argument);
}

TEST_CASE("save/load round-trip is the identity") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "opbm_instance_test";
  fs::create_directories(dir);

  auto roundtrip = [&](const ExpectationGraph& g, const char* name) {
    auto path = dir / name;
    save_instance(g, path);
    auto back = load_instance(path);
    CHECK(back.n == g.n);
    CHECK(back.k == g.k);
    CHECK(back.denominator == g.denominator);
    CHECK(back.numerators == g.numerators);
    CHECK(back.utilities == g.utilities);
  };
  roundtrip(golden_example().instance, "fig.json");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    roundtrip(generate_random_instance(5, 4, 100.0, 9, seed), "rand.json");
  }
  fs::remove_all(dir);
}

TEST_CASE("loading accepts any key order") {
  auto g = instance_from_json(R"({"utilities": [[1.0, 0.0]], "numerators": [1, 1],
                                  "denominator": 2, "k": 2, "n": 1})");
  CHECK(g.n == 1);
  CHECK(g.probability(1) == 0.5);
}

TEST_CASE("malformed and invalid files raise distinct errors") {
  CHECK_THROWS_AS(instance_from_json("{"), ParseError);
  CHECK_THROWS_AS(instance_from_json("[]"), ParseError);
  // missing utilities row
  CHECK_THROWS_AS(
      instance_from_json(
          R"({"n": 2, "k": 1, "denominator": 1, "numerators": [1], "utilities": [[1.0]]})"),
      ParseError);
  // probabilities summing to 2
  CHECK_THROWS_AS(
      instance_from_json(
          R"({"n": 1, "k": 2, "denominator": 1, "numerators": [1, 1], "utilities": [[1.0, 2.0]]})"),
      ValidationError);
  CHECK_THROWS_AS(load_instance("does_not_exist.json"), ParseError);
}

TEST_CASE("sequence sampling only emits positive-probability types") {
  ExpectationGraph g;
  g.n = 50;
  g.k = 3;
  g.denominator = 4;
  g.numerators = {1, 0, 3};
  g.utilities.assign(150, 1.0);
  auto stream = rng::Stream::child(3, rng::Domain::arrivals, 0);
  for (int rep = 0; rep < 40; ++rep) {
    auto seq = sample_sequence(g, stream);
    require_valid_sequence(g, seq);
    for (int t : seq.types) CHECK(t != 1);
  }
}

TEST_CASE("sequence validation rejects bad entries") {
  const auto& g = golden_example().instance;
  ArrivalSequence bad_len{{0, 1}};
  CHECK_THROWS_AS(require_valid_sequence(g, bad_len), std::invalid_argument);
  ArrivalSequence bad_type{{0, 1, 2, 3, 0}};
  CHECK_THROWS_AS(require_valid_sequence(g, bad_type), std::invalid_argument);
}

TEST_CASE("matching validation catches duplicates and wrong values") {
  const auto& ex = golden_example();
  Matching m;
  m.assignment = {3, 1, 2, 4, 0};
  m.value = 6.0;
  CHECK(validate_matching(ex.instance, ex.arrivals, m).empty());

  Matching dup = m;
  dup.assignment[1] = 3;
  CHECK(!validate_matching(ex.instance, ex.arrivals, dup).empty());

  Matching off = m;
  off.value = 6.5;
  CHECK(!validate_matching(ex.instance, ex.arrivals, off).empty());
}
