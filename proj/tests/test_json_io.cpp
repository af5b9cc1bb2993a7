#include <doctest.h>

#include "rq/json_io.hpp"

#include <cstdio>
#include <fstream>

using namespace rq;

namespace {

const char* kSingle = R"({
  "variant": "SINGLE_EXP",
  "lambda1": 1.0, "lambda2": 2.2,
  "service": {"kind": "exponential", "mu": 5.0},
  "mu1_star": 8.0, "mu2_star": 10.0, "xi": 0.1
})";

const char* kBatch = R"({
  "variant": "BATCH_GENERAL",
  "lambda": 0.12, "p1": 0.6,
  "batch": {"kind": "explicit", "pmf": [[1,0,0.5],[0,1,0.3],[1,1,0.2]]},
  "service": {"kind": "hyperexp", "probs": [0.4,0.6], "rates": [3.0,9.0]},
  "mu1_star": 8.0, "mu2_star": 10.0, "xi": 0.1
})";

}  // namespace

TEST_CASE("parse and serialize round-trip") {
  for (const char* text : {kSingle, kBatch}) {
    const ModelSpec m = parse_model(text);
    const ModelSpec m2 = parse_model(model_to_json(m));
    CHECK(m2.variant == m.variant);
    CHECK(m2.lambda == m.lambda);
    CHECK(m2.mu1_star == m.mu1_star);
    CHECK(m2.mu2_star == m.mu2_star);
    CHECK(m2.xi == m.xi);
    CHECK(m2.service.mean() == doctest::Approx(m.service.mean()));
    CHECK(m2.gbar1 == doctest::Approx(m.gbar1));
    CHECK(m2.gbar2 == doctest::Approx(m.gbar2));
  }
}

TEST_CASE("unknown and missing keys are rejected") {
  CHECK_THROWS_AS(parse_model(R"({"variant": "SINGLE_EXP", "lambda1": 1.0,
    "lambda2": 2.2, "service": {"kind": "exponential", "mu": 5.0},
    "mu1_star": 8.0, "mu2_star": 10.0, "xi": 0.1, "bogus": 1})"),
                  JsonError);
  CHECK_THROWS_AS(parse_model(R"({"variant": "SINGLE_EXP", "lambda1": 1.0,
    "service": {"kind": "exponential", "mu": 5.0},
    "mu1_star": 8.0, "mu2_star": 10.0, "xi": 0.1})"),
                  JsonError);
  CHECK_THROWS_AS(parse_model("not json"), JsonError);
  CHECK_THROWS_AS(parse_model(R"({"variant": "SINGLE_EXP", "lambda1": 1.0,
    "lambda2": 2.2, "service": {"kind": "pareto", "a": 2.0},
    "mu1_star": 8.0, "mu2_star": 10.0, "xi": 0.1})"),
                  JsonError);
}

TEST_CASE("semantic validation still applies after parsing") {
  CHECK_THROWS(parse_model(R"({"variant": "SINGLE_EXP", "lambda1": 1.0,
    "lambda2": 2.2, "service": {"kind": "exponential", "mu": 5.0},
    "mu1_star": 8.0, "mu2_star": 10.0, "xi": 1.7})"));
}

TEST_CASE("content hash is stable and content-sensitive") {
  const char* p1 = "hash_probe_a.json";
  const char* p2 = "hash_probe_b.json";
  { std::ofstream(p1) << "abc"; }
  { std::ofstream(p2) << "abd"; }
  CHECK(content_hash(p1) == content_hash(p1));
  CHECK(content_hash(p1) != content_hash(p2));
  // FNV-1a reference value for "abc"
  CHECK(content_hash(p1) == "e71fa2190541574b");
  std::remove(p1);
  std::remove(p2);
  CHECK_THROWS_AS(content_hash("does_not_exist.json"), JsonError);
}
