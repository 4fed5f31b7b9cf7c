#include "extcalc/suites.hpp"

#include <regex>
#include <string>

#include "doctest.h"
#include "extcalc/errors.hpp"

using namespace extcalc;

namespace {

// wall time is the one intentionally nondeterministic field
std::string strip_wall(const std::string& json) {
  return std::regex_replace(json,
                            std::regex("\"wall_seconds\": [^,\\n]*"),
                            "\"wall_seconds\": 0");
}

} // namespace

TEST_CASE("every registered suite passes a short seeded run") {
  for (const std::string& name : suite_names()) {
    CAPTURE(name);
    SuiteConfig cfg;
    cfg.suite_name = name;
    cfg.seed = 7;
    cfg.trials = 3;
    const RunReport rep = run_suite(cfg);
    CHECK(rep.suite_name == name);
    CHECK(rep.seed == 7);
    CHECK(rep.trials == 3);
    REQUIRE(!rep.cases.empty());
    for (const CaseResult& c : rep.cases) {
      CAPTURE(c.name);
      CAPTURE(c.note);
      CHECK(c.pass);
    }
    CHECK(rep.all_pass);
    CHECK(rep.max_residual < 1e-4);  // loosest bound any suite checks
    CHECK(rep.wall_seconds >= 0.0);
  }
}

TEST_CASE("unknown suites and bad configs are usage errors") {
  SuiteConfig cfg;
  cfg.suite_name = "bogus";
  cfg.trials = 1;
  CHECK_THROWS_AS(run_suite(cfg), UnknownSuite);

  cfg.suite_name = "stenger";
  cfg.trials = 0;
  CHECK_THROWS_AS(run_suite(cfg), PreconditionViolated);
}

TEST_CASE("math-level breakage becomes failed cases, not a panic") {
  // an impossible contraction threshold makes every admissibility check
  // throw; the suite must demote those to per-case diagnostics
  SuiteConfig cfg;
  cfg.suite_name = "nudelman";
  cfg.seed = 3;
  cfg.trials = 1;
  cfg.tol.eq_tol = -1.0;
  const RunReport rep = run_suite(cfg);
  CHECK_FALSE(rep.all_pass);
  REQUIRE(!rep.cases.empty());
  for (const CaseResult& c : rep.cases) {
    CHECK_FALSE(c.pass);
    CHECK(c.note.rfind("exception: ", 0) == 0);
  }
}

TEST_CASE("identical configs produce byte-identical reports modulo wall time") {
  SuiteConfig cfg;
  cfg.suite_name = "stenger";
  cfg.seed = 42;
  cfg.trials = 2;

  const RunReport a = run_suite(cfg);
  const RunReport b = run_suite(cfg);
  REQUIRE(a.cases.size() == b.cases.size());
  for (std::size_t k = 0; k < a.cases.size(); ++k) {
    CHECK(a.cases[k].name == b.cases[k].name);
    CHECK(a.cases[k].pass == b.cases[k].pass);
    CHECK(a.cases[k].residual == b.cases[k].residual);
    CHECK(a.cases[k].note == b.cases[k].note);
  }
  CHECK(a.max_residual == b.max_residual);
  CHECK(strip_wall(report_to_json(a)) == strip_wall(report_to_json(b)));

  // a different seed changes the draws (sanity check on the plumbing)
  SuiteConfig other = cfg;
  other.seed = 43;
  const RunReport c = run_suite(other);
  CHECK(strip_wall(report_to_json(a)) != strip_wall(report_to_json(c)));
}

TEST_CASE("json report carries the schema and all cases") {
  SuiteConfig cfg;
  cfg.suite_name = "aug06a";
  cfg.seed = 1;
  cfg.trials = 1;
  const RunReport rep = run_suite(cfg);
  const std::string json = report_to_json(rep);
  CHECK(json.find("\"schema_version\": 1") != std::string::npos);
  CHECK(json.find("\"suite\": \"aug06a\"") != std::string::npos);
  CHECK(json.find("\"all_pass\": true") != std::string::npos);
  for (const CaseResult& c : rep.cases)
    CHECK(json.find("\"" + c.name + "\"") != std::string::npos);
  CHECK(json.back() == '\n');
}
