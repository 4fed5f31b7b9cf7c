#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "extcalc/matkit.hpp"

namespace extcalc {

/// Configuration of one verification-suite run.  The name selects the
/// family of checks, the seed fixes every random draw, trials scales the
/// number of randomized instances.  A report is a deterministic function
/// of this struct (wall time aside).
struct SuiteConfig {
  std::string suite_name;
  std::uint64_t seed = 0;
  int trials = 1;
  TolerancePolicy tol{};
};

/// One named check inside a suite.  residual is the worst residual the
/// case observed (0 when the case is purely boolean); note carries
/// diagnostics -- trial/check counts on success, the first failing
/// assertion or the error text when an exception was demoted to a
/// failed case.
struct CaseResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  std::string note;
};

struct RunReport {
  std::string suite_name;
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<CaseResult> cases;
  double max_residual = 0.0;
  bool all_pass = false;
  double wall_seconds = 0.0;
};

/// All known suite names, in canonical order.
const std::vector<std::string>& suite_names();

/// Runs the named suite.  Math-level failures (broken identities,
/// exceptions thrown by the library mid-case) become failed cases with
/// diagnostics; only configuration errors throw: UnknownSuite for an
/// unrecognized name, PreconditionViolated for trials < 1.
RunReport run_suite(const SuiteConfig& config);

/// JSON text of a report, schema_version field included.  Byte-identical
/// across runs with the same config except for the wall_seconds field.
std::string report_to_json(const RunReport& report);

} // namespace extcalc
