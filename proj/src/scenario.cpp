#include "subgeo/scenario.hpp"

#include <cmath>
#include <fstream>

#include "subgeo/errors.hpp"
#include "subgeo/numerics.hpp"
#include "subgeo/registry.hpp"

namespace subgeo {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(where, "must be finite");
  return v;
}

double positive(const json& j, const std::string& where) {
  const double v = number(j, where);
  if (!(v > 0.0)) bad(where, "must be > 0");
  return v;
}

std::size_t count(const json& j, const std::string& where, std::size_t min = 0) {
  if (!j.is_number_integer() && !(j.is_number() && std::floor(j.get<double>()) == j.get<double>()))
    bad(where, "expected an integer");
  const double v = j.get<double>();
  if (v < static_cast<double>(min)) bad(where, "must be >= " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) bad(where, "unknown key '" + k + "'");
  }
}

InverseMethod parse_method(const std::string& s) {
  if (s == "closed_form") return InverseMethod::ClosedForm;
  if (s == "ode") return InverseMethod::OdeIntegrate;
  if (s == "bisect") return InverseMethod::BisectOnQuadrature;
  bad("rate.inverse", "expected closed_form, ode or bisect, got '" + s + "'");
}

RateSpec parse_rate(const json& j) {
  only_keys(j, "rate", {"kind", "alpha", "scale", "inverse", "function", "table"});
  RateSpec r;
  if (!j.contains("kind")) bad("rate", "missing 'kind'");
  r.kind = j.at("kind").get<std::string>();
  if (r.kind == "polynomial") {
    if (j.contains("alpha")) {
      const auto& a = j.at("alpha");
      if (a.is_string()) {
        if (a.get<std::string>() != "certified") bad("rate.alpha", "a number or \"certified\"");
        r.alpha.reset();
      } else {
        r.alpha = number(a, "rate.alpha");
        if (!(*r.alpha > 0.0 && *r.alpha < 1.0)) bad("rate.alpha", "must lie in (0, 1)");
      }
    }
    if (j.contains("scale")) r.scale = positive(j.at("scale"), "rate.scale");
  } else if (r.kind == "log_smoothed") {
    r.alpha.reset();
  } else if (r.kind == "custom") {
    r.alpha.reset();
    if (j.contains("function")) {
      r.function = j.at("function").get<std::string>();
      if (r.function != "identity" && r.function != "sqrt")
        bad("rate.function", "known functions are identity and sqrt");
    } else if (j.contains("table")) {
      const auto& t = j.at("table");
      only_keys(t, "rate.table", {"x", "phi", "dphi"});
      r.table_x = numbers(t.at("x"), "rate.table.x");
      r.table_phi = numbers(t.at("phi"), "rate.table.phi");
      r.table_dphi = numbers(t.at("dphi"), "rate.table.dphi");
    } else {
      bad("rate", "custom rates need 'function' or 'table'");
    }
  } else {
    bad("rate.kind", "expected polynomial, log_smoothed or custom, got '" + r.kind + "'");
  }
  if (j.contains("inverse")) {
    r.method = parse_method(j.at("inverse").get<std::string>());
    r.method_given = true;
    if (r.method == InverseMethod::ClosedForm && r.kind != "polynomial")
      bad("rate.inverse", "closed_form needs a polynomial rate");
  }
  return r;
}

std::vector<double> parse_times(const json& j, const std::string& where) {
  std::vector<double> t;
  if (j.is_array()) {
    t = numbers(j, where);
  } else {
    only_keys(j, where, {"log", "linear"});
    const bool log = j.contains("log");
    const auto v = numbers(log ? j.at("log") : j.at("linear"), where);
    if (v.size() != 3) bad(where, "expected [lo, hi, count]");
    const auto n = count(json(v[2]), where + " count", 2);
    if (!(v[1] > v[0]) || v[0] < 0.0 || (log && !(v[0] > 0.0))) bad(where, "bad range");
    t = log ? numerics::logspace(v[0], v[1], n) : numerics::linspace(v[0], v[1], n);
  }
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] < 0.0 || (k && !(t[k] > t[k - 1]))) bad(where, "times must be >= 0 and increasing");
  if (t.empty()) bad(where, "no times");
  return t;
}

ConvergenceSpec parse_convergence(const json& j) {
  ConvergenceSpec c;
  if (j.is_boolean()) {
    c.enabled = j.get<bool>();
    if (c.enabled) bad("convergence", "needs settings (times at least)");
    return c;
  }
  only_keys(j, "convergence", {"x0", "times", "burn_in", "window", "fit_range", "margin",
                               "shift_model", "shift_tolerance"});
  if (j.contains("x0")) c.x0 = count(j.at("x0"), "convergence.x0");
  if (!j.contains("times")) bad("convergence", "missing 'times'");
  c.times = parse_times(j.at("times"), "convergence.times");
  if (j.contains("burn_in")) c.burn_in = number(j.at("burn_in"), "convergence.burn_in");
  if (j.contains("window")) c.window = count(j.at("window"), "convergence.window", 1);
  if (j.contains("fit_range")) {
    const auto v = numbers(j.at("fit_range"), "convergence.fit_range");
    if (v.size() != 2 || !(v[0] > 0.0) || !(v[1] > v[0])) bad("convergence.fit_range", "[lo, hi]");
    c.fit_range = std::pair{v[0], v[1]};
  }
  if (j.contains("margin")) c.margin = number(j.at("margin"), "convergence.margin");
  if (j.contains("shift_model")) c.shift_model = j.at("shift_model").get<std::string>();
  if (j.contains("shift_tolerance"))
    c.shift_tolerance = positive(j.at("shift_tolerance"), "convergence.shift_tolerance");
  return c;
}

}  // namespace

Scenario parse_scenario(const json& j, const std::filesystem::path& base_dir) {
  try {
    only_keys(j, "scenario", {"id", "model", "rate", "lyapunov", "target", "drift", "condition2",
                              "estimator", "psi_hitting", "delta", "convergence", "jobs"});
    Scenario s;
    s.base_dir = base_dir;
    if (!j.contains("id") || !j.contains("rate")) bad("scenario", "'id' and 'rate' are required");
    s.id = j.at("id").get<std::string>();
    if (j.contains("model")) s.model = j.at("model").get<std::string>();
    s.rate = parse_rate(j.at("rate"));

    if (j.contains("lyapunov")) {
      const auto& v = j.at("lyapunov");
      only_keys(v, "lyapunov", {"values", "power"});
      if (v.contains("values")) {
        s.v_values = numbers(v.at("values"), "lyapunov.values");
        for (double x : s.v_values)
          if (!(x >= 1.0)) bad("lyapunov.values", "V must be >= 1");
      } else if (v.contains("power")) {
        s.v_power = number(v.at("power"), "lyapunov.power");
        if (*s.v_power < 0.0) bad("lyapunov.power", "must be >= 0 so that V >= 1");
      } else {
        bad("lyapunov", "needs 'values' or 'power'");
      }
    }

    if (j.contains("target")) {
      const auto& t = j.at("target");
      if (t.is_string()) {
        if (t.get<std::string>() != "auto") bad("target", "a state list or \"auto\"");
      } else {
        std::vector<std::size_t> states;
        for (std::size_t i = 0; i < t.size(); ++i)
          states.push_back(count(t[i], "target[" + std::to_string(i) + "]"));
        if (states.empty()) bad("target", "empty state list");
        s.target = states;
      }
    }
    if (j.contains("drift")) {
      const auto& d = j.at("drift");
      only_keys(d, "drift", {"max_state", "tolerance"});
      if (d.contains("max_state")) s.max_state = count(d.at("max_state"), "drift.max_state");
      if (d.contains("tolerance")) s.drift_tolerance = positive(d.at("tolerance"), "drift.tolerance");
    }
    if (j.contains("condition2")) {
      const auto& c = j.at("condition2");
      only_keys(c, "condition2", {"t_max", "t_points", "dt"});
      if (c.contains("t_max")) s.c2_t_max = positive(c.at("t_max"), "condition2.t_max");
      if (c.contains("t_points")) s.c2_t_points = count(c.at("t_points"), "condition2.t_points", 2);
      if (c.contains("dt")) s.c2_dt = positive(c.at("dt"), "condition2.dt");
    }
    if (j.contains("estimator")) {
      const auto& e = j.at("estimator");
      only_keys(e, "estimator", {"n_paths", "seed", "horizon_cap", "r", "censor_threshold"});
      if (e.contains("n_paths")) s.n_paths = count(e.at("n_paths"), "estimator.n_paths", 100);
      if (e.contains("seed")) {
        if (!e.at("seed").is_number_unsigned()) bad("estimator.seed", "expected an unsigned integer");
        s.seed = e.at("seed").get<std::uint64_t>();
      }
      if (e.contains("horizon_cap"))
        s.horizon_cap = positive(e.at("horizon_cap"), "estimator.horizon_cap");
      if (e.contains("r")) {
        const auto& r = e.at("r");
        if (r.is_string()) {
          if (r.get<std::string>() != "calibrate") bad("estimator.r", "a number or \"calibrate\"");
        } else {
          s.r = positive(r, "estimator.r");
        }
      }
      if (e.contains("censor_threshold")) {
        s.censor_threshold = number(e.at("censor_threshold"), "estimator.censor_threshold");
        if (s.censor_threshold < 0.0 || s.censor_threshold > 1.0)
          bad("estimator.censor_threshold", "must lie in [0, 1]");
      }
    }
    if (j.contains("psi_hitting")) {
      const auto& h = j.at("psi_hitting");
      only_keys(h, "psi_hitting", {"n_paths", "t_max", "t_points", "extra_states"});
      if (h.contains("n_paths")) s.psi_paths = count(h.at("n_paths"), "psi_hitting.n_paths", 2);
      if (h.contains("t_max")) s.psi_t_max = positive(h.at("t_max"), "psi_hitting.t_max");
      if (h.contains("t_points")) s.psi_t_points = count(h.at("t_points"), "psi_hitting.t_points", 2);
      if (h.contains("extra_states"))
        s.psi_extra_states = count(h.at("extra_states"), "psi_hitting.extra_states");
    }
    if (j.contains("delta")) s.delta = positive(j.at("delta"), "delta");
    if (j.contains("jobs")) s.jobs = static_cast<int>(count(j.at("jobs"), "jobs", 1));
    if (j.contains("convergence")) s.convergence = parse_convergence(j.at("convergence"));
    else s.convergence.enabled = false;
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("scenario '" + path.string() + "': " + e.what());
  }
  return parse_scenario(j, path.parent_path());
}

RateProfile make_profile(const RateSpec& spec) {
  if (spec.kind == "polynomial" && !spec.alpha)
    throw ConfigError("rate.alpha is \"certified\" and has not been certified yet");
  return make_profile(spec, spec.alpha.value_or(0.5));
}

RateProfile make_profile(const RateSpec& spec, double alpha) {
  try {
    RateFunction f = RateFunction::log_smoothed();
    if (spec.kind == "polynomial") {
      f = RateFunction::polynomial(alpha, spec.scale);
    } else if (spec.kind == "custom") {
      if (spec.function == "identity")
        f = RateFunction::custom("identity", [](double x) { return x; }, [](double) { return 1.0; });
      else if (spec.function == "sqrt")
        f = RateFunction::custom("sqrt", [](double x) { return std::sqrt(x); },
                                 [](double x) { return 0.5 / std::sqrt(x); });
      else
        f = RateFunction::tabulated(spec.table_x, spec.table_phi, spec.table_dphi);
    }
    return spec.method_given ? RateProfile(f, spec.method) : RateProfile(f);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("rate: ") + e.what());
  }
}

Ctmc scenario_chain(const std::string& spec, const std::filesystem::path& base_dir) {
  if (spec.rfind("csv:", 0) == 0) {
    std::filesystem::path p = spec.substr(4);
    if (p.is_relative()) p = base_dir / p;
    return load_ctmc_csv(p.string());
  }
  auto m = make_model(spec);
  if (!std::holds_alternative<Ctmc>(m))
    throw ConfigError("model '" + spec + "': the pipeline runs on chains only");
  return std::get<Ctmc>(std::move(m));
}

Ctmc scenario_chain(const Scenario& s) {
  if (s.model.empty()) throw ConfigError("scenario '" + s.id + "' has no 'model'");
  return scenario_chain(s.model, s.base_dir);
}

}  // namespace subgeo
