#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "subgeo/rates.hpp"
#include "subgeo/report.hpp"
#include "subgeo/scenario.hpp"

namespace subgeo {

struct PipelineOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<int> jobs;
  bool quiet = false;
};

struct StageOutcome {
  std::string name;
  std::string status = "skipped";  // pass | fail | error | skipped
  std::string message;
  std::vector<CheckReport> reports;
  /// Informational reports that are expected to fail and do not gate.
  std::vector<CheckReport> expected_failures;
};

struct PipelineResult {
  int exit_code = 0;  // 0 all pass, 1 a check failed
  std::vector<StageOutcome> stages;
  nlohmann::json summary;

  const StageOutcome* stage(const std::string& name) const;
};

/// Assumption grid, 10^4 submultiplicative pairs, 10^4 scaling samples,
/// round trip on [1, 1e6] and the derivative identity.
std::vector<CheckReport> rate_checks(const RateProfile& p, std::uint64_t seed);

/// Writes summary.json and rate_checks.csv. ConfigError propagates (exit 2).
PipelineResult run_validate_rate(const Scenario& s, const PipelineOptions& o);

/// Drift, rate checks, psi from V with Condition 2, calibration and hitting
/// moments over C, psi from hitting with Condition 2, the step bounds, and
/// the convergence curve. Stages after a failure are skipped. Writes
/// summary.json, rate_checks.csv, drift_certificate.csv,
/// hitting_estimates.csv and tv_curve.csv (tv_curve_shift.csv with a
/// truncation rerun). ConfigError propagates (exit 2).
PipelineResult run_pipeline(const Scenario& s, const PipelineOptions& o);

nlohmann::json report_json(const CheckReport& r);

}  // namespace subgeo
