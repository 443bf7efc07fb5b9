#include "subgeo/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "subgeo/errors.hpp"

namespace subgeo {

// ------------------------------------------------------------------- Ctmc

Ctmc Ctmc::from_dense(std::span<const double> q, std::size_t n, std::string name) {
  if (n == 0) throw DimensionError("Ctmc: need at least one state");
  if (q.size() != n * n) throw DimensionError("Ctmc: rate matrix is not n x n");
  Ctmc m;
  m.name_ = std::move(name);
  m.offsets_.assign(1, 0);
  m.exit_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0, out = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = q[i * n + j];
      if (!std::isfinite(v)) throw std::invalid_argument("Ctmc: non-finite rate");
      row += v;
      if (i == j) continue;
      if (v < 0.0) throw std::invalid_argument("Ctmc: negative off-diagonal rate");
      if (v > 0.0) {
        m.edges_.push_back({j, v});
        out += v;
      }
    }
    if (std::abs(row) > 1e-12 * std::max(1.0, out))
      throw std::invalid_argument("Ctmc: row " + std::to_string(i) + " does not sum to 0");
    m.exit_[i] = out;
    m.max_exit_ = std::max(m.max_exit_, out);
    m.offsets_.push_back(m.edges_.size());
  }
  return m;
}

double Ctmc::rate(std::size_t i, std::size_t j) const {
  if (i >= size() || j >= size()) throw DimensionError("Ctmc::rate: index out of range");
  if (i == j) return -exit_[i];
  for (const auto& e : transitions(i))
    if (e.to == j) return e.rate;
  return 0.0;
}

std::vector<double> Ctmc::dense() const {
  const std::size_t n = size();
  std::vector<double> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    q[i * n + i] = -exit_[i];
    for (const auto& e : transitions(i)) q[i * n + e.to] = e.rate;
  }
  return q;
}

std::size_t Ctmc::jump_target(std::size_t i, double u) const {
  const auto tr = transitions(i);
  double acc = 0.0;
  const double target = u * exit_[i];
  for (const auto& e : tr) {
    acc += e.rate;
    if (target < acc) return e.to;
  }
  return tr.back().to;
}

// -------------------------------------------------------------- Diffusion

double Diffusion1d::reflect(double x) const {
  if (!std::isfinite(x)) throw std::runtime_error("diffusion step produced a non-finite value");
  for (int i = 0; i < 8 && (x < lo || x > hi); ++i) x = x < lo ? 2 * lo - x : 2 * hi - x;
  return std::clamp(x, lo, hi);
}

double Diffusion1d::euler_step(double x, double dt, double z) const {
  return reflect(x + drift(x) * dt + sigma(x) * std::sqrt(dt) * z);
}

// ------------------------------------------------------------- TargetSet

TargetSet TargetSet::states(std::size_t n, std::span<const std::size_t> members) {
  std::vector<char> m(n, 0);
  for (auto i : members) {
    if (i >= n) throw DimensionError("TargetSet: state index out of range");
    m[i] = 1;
  }
  return mask(std::move(m));
}

TargetSet TargetSet::mask(std::vector<char> m) {
  TargetSet c;
  c.mask_ = std::move(m);
  return c;
}

TargetSet TargetSet::interval(double a, double b) {
  if (!(a <= b)) throw std::invalid_argument("TargetSet: interval needs a <= b");
  TargetSet c;
  c.a_ = a;
  c.b_ = b;
  return c;
}

std::size_t TargetSet::size() const {
  if (!mask_) return 0;
  return static_cast<std::size_t>(std::count(mask_->begin(), mask_->end(), 1));
}

std::vector<std::size_t> TargetSet::members() const {
  std::vector<std::size_t> out;
  if (!mask_) return out;
  for (std::size_t i = 0; i < mask_->size(); ++i)
    if ((*mask_)[i]) out.push_back(i);
  return out;
}

bool TargetSet::empty() const { return mask_ ? size() == 0 : false; }

std::string TargetSet::describe() const {
  if (!mask_) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "[%.17g,%.17g]", a_, b_);
    return buf;
  }
  std::string s = "{";
  for (auto i : members()) s += (s.size() > 1 ? "," : "") + std::to_string(i);
  return s + "}";
}

// ------------------------------------------------------------ Trajectory

double Trajectory::occupation(const TargetSet& c, double t) const {
  t = std::min(t, horizon);
  double occ = 0.0;
  if (kind == Kind::Jump) {
    for (std::size_t k = 0; k < states.size() && times[k] < t; ++k) {
      const double end = k + 1 < times.size() ? std::min(times[k + 1], t) : t;
      if (c.contains(states[k])) occ += end - times[k];
    }
    return occ;
  }
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const double s = static_cast<double>(k) * dt;
    if (s >= t) break;
    if (c.contains(positions[k])) occ += std::min(dt, t - s);
  }
  return occ;
}

std::size_t Trajectory::state_at(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  return states[static_cast<std::size_t>(it - times.begin()) - 1];
}

// ------------------------------------------------------------- operators

std::vector<double> generator_apply(const Ctmc& m, std::span<const double> f) {
  if (f.size() != m.size()) throw DimensionError("generator_apply: f has the wrong length");
  std::vector<double> out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    double acc = 0.0;
    for (const auto& e : m.transitions(i)) acc += e.rate * (f[e.to] - f[i]);
    out[i] = acc;
  }
  return out;
}

double generator_apply_diffusion(const Diffusion1d& m, const std::function<double(double)>& f,
                                 double x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("generator_apply_diffusion: h must be > 0");
  if (x - h < m.lo || x + h > m.hi)
    throw DomainError("generator_apply_diffusion: stencil leaves the domain");
  const double fp = f(x + h), f0 = f(x), fm = f(x - h);
  const double s = m.sigma(x);
  return m.drift(x) * (fp - fm) / (2 * h) + 0.5 * s * s * (fp - 2 * f0 + fm) / (h * h);
}

Trajectory sample_path(const Ctmc& m, std::size_t x0, double horizon, Stream& rng) {
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_path: horizon must be > 0");
  if (x0 >= m.size()) throw DimensionError("sample_path: x0 out of range");
  Trajectory p;
  p.kind = Trajectory::Kind::Jump;
  p.horizon = horizon;
  p.times.push_back(0.0);
  p.states.push_back(x0);
  double t = 0.0;
  std::size_t x = x0;
  while (m.exit_rate(x) > 0.0) {
    t += rng.exponential() / m.exit_rate(x);
    if (t >= horizon) break;
    x = m.jump_target(x, rng.uniform());
    p.times.push_back(t);
    p.states.push_back(x);
  }
  return p;
}

Trajectory sample_path(const Diffusion1d& m, double x0, double horizon, Stream& rng) {
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_path: horizon must be > 0");
  if (x0 < m.lo || x0 > m.hi) throw DomainError("sample_path: x0 outside the domain");
  Trajectory p;
  p.kind = Trajectory::Kind::Grid;
  p.horizon = horizon;
  p.dt = m.step;
  const auto n = static_cast<std::size_t>(std::ceil(horizon / m.step - 1e-9));
  p.positions.reserve(n + 1);
  double x = x0;
  p.positions.push_back(x);
  for (std::size_t k = 0; k < n; ++k) {
    x = m.euler_step(x, m.step, rng.normal());
    p.positions.push_back(x);
  }
  return p;
}

// ------------------------------------------------------------ stationary

std::vector<double> stationary_distribution(const Ctmc& m) {
  const std::size_t n = m.size();
  if (n == 1) return {1.0};
  std::vector<double> a = m.dense();
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
  for (std::size_t k = n - 1; k > 0; --k) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += at(k, j);
    if (!(s > 0.0))
      throw SingularityError("stationary_distribution: state " + std::to_string(k) +
                             " cannot reach the lower states (chain not irreducible)");
    for (std::size_t i = 0; i < k; ++i) at(i, k) /= s;
    for (std::size_t i = 0; i < k; ++i) {
      const double aik = at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < k; ++j)
        if (i != j) at(i, j) += aik * at(k, j);
    }
  }
  std::vector<double> pi(n, 0.0);
  pi[0] = 1.0;
  for (std::size_t k = 1; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += pi[i] * at(i, k);
    pi[k] = acc;
  }
  double total = 0.0;
  for (double v : pi) total += v;
  for (double& v : pi) v /= total;

  // Residual of pi Q.
  std::vector<double> r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] -= pi[i] * m.exit_rate(i);
    for (const auto& e : m.transitions(i)) r[e.to] += pi[i] * e.rate;
  }
  double worst = 0.0;
  for (double v : r) worst = std::max(worst, std::abs(v));
  if (!(worst <= 1e-10))
    throw SingularityError("stationary_distribution: residual " + std::to_string(worst) +
                           " exceeds 1e-10");
  return pi;
}

// ------------------------------------------------------- uniformization

PoissonWeights poisson_weights(double mean, double epsilon) {
  PoissonWeights pw;
  if (mean == 0.0) {
    pw.weights = {1.0};
    return pw;
  }
  const auto mode = static_cast<std::size_t>(std::floor(mean));
  // Unnormalized, 1 at the mode; tails are cut once a geometric bound on the
  // remaining mass falls below epsilon/2 of the running total.
  std::vector<double> right{1.0};
  double total = 1.0;
  for (std::size_t k = mode;; ++k) {
    const double w = right.back() * mean / static_cast<double>(k + 1);
    right.push_back(w);
    total += w;
    const double r = mean / static_cast<double>(k + 2);
    if (r < 1.0 && w * r / (1.0 - r) <= 0.25 * epsilon * total) break;
  }
  std::vector<double> left;
  double w = 1.0;
  for (std::size_t k = mode; k > 0; --k) {
    w *= static_cast<double>(k) / mean;
    left.push_back(w);
    total += w;
    const double r = static_cast<double>(k - 1) / mean;
    if (w * r / (1.0 - r) <= 0.25 * epsilon * total) break;
  }
  pw.first = mode - left.size();
  pw.weights.assign(left.rbegin(), left.rend());
  pw.weights.insert(pw.weights.end(), right.begin(), right.end());
  for (double& v : pw.weights) v /= total;
  return pw;
}

std::vector<double> propagate(const Ctmc& m, std::span<const double> p0, double t,
                              const UniformizationOptions& opts) {
  if (p0.size() != m.size()) throw DimensionError("propagate: p0 has the wrong length");
  if (!(t >= 0.0)) throw DomainError("propagate: t must be >= 0");
  std::vector<double> v(p0.begin(), p0.end());
  const double lambda = m.max_exit_rate();
  if (t == 0.0 || lambda == 0.0) return v;
  if (lambda * t > opts.max_rate_time) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "uniformization rate*time %.6g exceeds the cap %.6g; split the interval",
                  lambda * t, opts.max_rate_time);
    throw OverflowGuardError(buf);
  }
  const auto pw = poisson_weights(lambda * t, opts.epsilon);
  const std::size_t n = m.size();
  std::vector<double> out(n, 0.0), next(n);
  const std::size_t last = pw.first + pw.weights.size();
  for (std::size_t k = 0; k < last; ++k) {
    if (k >= pw.first) {
      const double wk = pw.weights[k - pw.first];
      for (std::size_t i = 0; i < n; ++i) out[i] += wk * v[i];
    }
    if (k + 1 == last) break;
    // v <- v (I + Q / lambda)
    for (std::size_t i = 0; i < n; ++i) next[i] = v[i] * (1.0 - m.exit_rate(i) / lambda);
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] == 0.0) continue;
      const double vi = v[i] / lambda;
      for (const auto& e : m.transitions(i)) next[e.to] += vi * e.rate;
    }
    v.swap(next);
  }
  // Put back the truncated Poisson mass.
  double total = 0.0, mass = 0.0;
  for (double x : out) total += x;
  for (double x : p0) mass += x;
  if (total != 0.0)
    for (double& x : out) x *= mass / total;
  return out;
}

std::vector<double> transient_distribution(const Ctmc& m, std::size_t x0, double t,
                                           const UniformizationOptions& opts) {
  if (x0 >= m.size()) throw DimensionError("transient_distribution: x0 out of range");
  std::vector<double> p0(m.size(), 0.0);
  p0[x0] = 1.0;
  return propagate(m, p0, t, opts);
}

}  // namespace subgeo
