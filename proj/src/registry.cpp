#include "subgeo/registry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "subgeo/errors.hpp"

namespace subgeo {

namespace {

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<double> split_numbers(const std::string& line) {
  std::vector<double> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::size_t used = 0;
    const std::string s = cell.substr(b);
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ConfigError("rate-matrix CSV: cannot parse '" + s + "'");
    }
    if (s.find_first_not_of(" \t\r", used) != std::string::npos)
      throw ConfigError("rate-matrix CSV: trailing text in '" + s + "'");
    out.push_back(v);
  }
  return out;
}

std::size_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e7)
    throw ConfigError(std::string(what) + " must be a positive integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

Ctmc two_state_symmetric() {
  const std::vector<double> q{-1.0, 1.0, 1.0, -1.0};
  return Ctmc::from_dense(q, 2, "two_state_symmetric");
}

Ctmc absorbing() {
  const std::vector<double> q{0.0};
  return Ctmc::from_dense(q, 1, "absorbing");
}

Ctmc birth_death(std::size_t n, const std::function<double(std::size_t)>& up,
                 const std::function<double(std::size_t)>& down, std::string name) {
  const std::size_t size = n + 1;
  std::vector<double> q(size * size, 0.0);
  for (std::size_t i = 0; i < size; ++i) {
    double out = 0.0;
    if (i < n) out += q[i * size + i + 1] = up(i);
    if (i > 0) out += q[i * size + i - 1] = down(i);
    q[i * size + i] = -out;
  }
  Ctmc m = Ctmc::from_dense(q, size, std::move(name));
  m.truncation = n;
  return m;
}

Ctmc bd_geometric(double lambda, double mu, std::size_t n_max) {
  if (!(lambda > 0.0) || !(mu > 0.0)) throw ConfigError("bd_geometric: rates must be > 0");
  return birth_death(
      n_max, [=](std::size_t) { return lambda; }, [=](std::size_t) { return mu; },
      "bd_geometric(" + fmt_num(lambda) + "," + fmt_num(mu) + "," + std::to_string(n_max) + ")");
}

Ctmc bd_polynomial(double c, std::size_t n_max) {
  if (!(c > 0.0)) throw ConfigError("bd_polynomial: c must be > 0");
  return birth_death(
      n_max, [](std::size_t) { return 1.0; },
      [=](std::size_t n) { return 1.0 + c / static_cast<double>(n); },
      "bd_polynomial(" + fmt_num(c) + "," + std::to_string(n_max) + ")");
}

Diffusion1d ou(double theta, double lo, double hi, double step) {
  if (!(theta > 0.0)) throw ConfigError("ou: theta must be > 0");
  Diffusion1d d;
  d.drift = [theta](double x) { return -theta * x; };
  d.sigma = [](double) { return std::sqrt(2.0); };
  d.lo = lo;
  d.hi = hi;
  d.step = step;
  d.name = "ou(" + fmt_num(theta) + ")";
  return d;
}

Diffusion1d heavy_tail_langevin(double beta, double lo, double hi, double step) {
  if (!(beta > 0.0)) throw ConfigError("heavy_tail_langevin: beta must be > 0");
  Diffusion1d d;
  d.drift = [beta](double x) { return -beta * x * std::pow(1.0 + x * x, 0.5 * beta - 1.0); };
  d.sigma = [](double) { return std::sqrt(2.0); };
  d.lo = lo;
  d.hi = hi;
  d.step = step;
  d.name = "heavy_tail_langevin(" + fmt_num(beta) + ")";
  return d;
}

Model make_model(const std::string& name, const std::vector<double>& args) {
  auto want = [&](std::size_t n) {
    if (args.size() != n)
      throw ConfigError(name + " expects " + std::to_string(n) + " parameter(s), got " +
                        std::to_string(args.size()));
  };
  if (name == "two_state_symmetric") {
    want(0);
    return two_state_symmetric();
  }
  if (name == "absorbing") {
    want(0);
    return absorbing();
  }
  if (name == "bd_geometric") {
    want(3);
    return bd_geometric(args[0], args[1], as_count(args[2], "bd_geometric: N"));
  }
  if (name == "bd_polynomial") {
    want(2);
    return bd_polynomial(args[0], as_count(args[1], "bd_polynomial: N"));
  }
  if (name == "ou") {
    want(1);
    return ou(args[0]);
  }
  if (name == "heavy_tail_langevin") {
    want(1);
    return heavy_tail_langevin(args[0]);
  }
  throw ConfigError("unknown model '" + name + "'");
}

Model make_model(const std::string& spec) {
  const auto open = spec.find('(');
  if (open == std::string::npos) return make_model(spec, {});
  if (spec.back() != ')') throw ConfigError("model spec '" + spec + "' is missing ')'");
  const std::string inner = spec.substr(open + 1, spec.size() - open - 2);
  return make_model(spec.substr(0, open), inner.empty() ? std::vector<double>{}
                                                        : split_numbers(inner));
}

Ctmc load_ctmc_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open rate-matrix CSV '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("rate-matrix CSV '" + path + "' is empty");
  std::size_t n = 0;
  {
    std::string h;
    for (char ch : header)
      if (ch != ' ' && ch != '\t' && ch != '\r') h += ch;
    std::string digits = h;
    if (!h.empty() && (h[0] == 'n' || h[0] == 'N')) {
      digits = h.substr(1);
      if (!digits.empty() && (digits[0] == '=' || digits[0] == ',' || digits[0] == ':'))
        digits = digits.substr(1);
    }
    if (!digits.empty()) {
      const auto v = split_numbers(digits);
      if (v.size() != 1) throw ConfigError("rate-matrix CSV: bad header '" + header + "'");
      n = as_count(v[0], "rate-matrix CSV: n");
    }
  }
  std::vector<double> q;
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto row = split_numbers(line);
    if (n == 0) n = row.size();
    if (row.size() != n)
      throw ConfigError("rate-matrix CSV: row " + std::to_string(rows) + " has " +
                        std::to_string(row.size()) + " values, expected " + std::to_string(n));
    q.insert(q.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows != n)
    throw ConfigError("rate-matrix CSV: expected " + std::to_string(n) + " rows, got " +
                      std::to_string(rows));
  try {
    return Ctmc::from_dense(q, n, "csv:" + path);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("rate-matrix CSV: ") + e.what());
  }
}

std::string model_id(const Model& m) {
  if (const auto* c = std::get_if<Ctmc>(&m)) return c->name();
  return std::get<Diffusion1d>(m).name;
}

}  // namespace subgeo
