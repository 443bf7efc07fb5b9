#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "subgeo/models.hpp"
#include "subgeo/rates.hpp"

namespace subgeo {

/// `rate` block. kind: polynomial | log_smoothed | custom.
struct RateSpec {
  std::string kind = "polynomial";
  std::optional<double> alpha = 0.5;  // unset: certified by the drift stage
  double scale = 1.0;
  InverseMethod method = InverseMethod::ClosedForm;
  bool method_given = false;
  // custom: either a named function or a table
  std::string function;
  std::vector<double> table_x, table_phi, table_dphi;
};

struct ConvergenceSpec {
  bool enabled = true;
  std::size_t x0 = 0;
  std::vector<double> times;
  double burn_in = 1.0;
  std::size_t window = 5;
  std::optional<std::pair<double, double>> fit_range;
  double margin = 0.2;
  std::string shift_model;  // empty: no truncation rerun
  double shift_tolerance = 1e-3;
};

/// A pipeline run, read from JSON (schema in docs/scenario.md).
struct Scenario {
  std::string id;
  std::string model;  // registry spec, or a CSV path prefixed "csv:"
  RateSpec rate;

  std::vector<double> v_values;   // tabulated V, or
  std::optional<double> v_power;  // V(n) = (n+1)^p

  std::optional<std::vector<std::size_t>> target;  // unset: automatic
  std::optional<std::size_t> max_state;
  double drift_tolerance = 1e-9;

  double c2_t_max = 20.0;
  std::size_t c2_t_points = 201;
  double c2_dt = 0.025;

  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  double horizon_cap = 1e4;
  std::optional<double> r;  // unset: calibrate
  double censor_threshold = 1e-3;
  int jobs = 1;

  std::size_t psi_paths = 20000;
  double psi_t_max = 20.0;
  std::size_t psi_t_points = 201;
  std::size_t psi_extra_states = 2;

  double delta = 1.0;
  ConvergenceSpec convergence;

  std::filesystem::path base_dir;
};

/// Throws ConfigError on anything malformed or out of range.
Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// Throws ConfigError if the rate still needs a certified alpha.
RateProfile make_profile(const RateSpec& spec);
RateProfile make_profile(const RateSpec& spec, double alpha);

Ctmc scenario_chain(const Scenario& s);
Ctmc scenario_chain(const std::string& spec, const std::filesystem::path& base_dir);

}  // namespace subgeo
