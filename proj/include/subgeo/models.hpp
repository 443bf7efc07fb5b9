#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "subgeo/rng.hpp"

namespace subgeo {

struct Transition {
  std::size_t to;
  double rate;
};

/// Finite continuous-time Markov chain stored as a sparse Q-matrix.
class Ctmc {
 public:
  /// Row-major dense Q. Off-diagonals must be >= 0 and rows must sum to 0
  /// within 1e-12; the diagonal is recomputed from the off-diagonals.
  static Ctmc from_dense(std::span<const double> q, std::size_t n, std::string name = {});

  std::size_t size() const { return exit_.size(); }
  double rate(std::size_t i, std::size_t j) const;
  double exit_rate(std::size_t i) const { return exit_[i]; }
  double max_exit_rate() const { return max_exit_; }
  std::span<const Transition> transitions(std::size_t i) const {
    return {edges_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::vector<double> dense() const;

  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }
  std::vector<std::string> labels;
  /// Truncation level for chains cut from a countable one (0 when exact).
  std::size_t truncation = 0;

  /// Destination of a jump out of i, picked from uniform u in (0,1).
  std::size_t jump_target(std::size_t i, double u) const;

 private:
  std::string name_;
  std::vector<std::size_t> offsets_;
  std::vector<Transition> edges_;
  std::vector<double> exit_;
  double max_exit_ = 0.0;
};

/// dX = b(X) dt + sigma(X) dW on [lo, hi] with reflection at both ends.
struct Diffusion1d {
  std::function<double(double)> drift;
  std::function<double(double)> sigma;
  double lo = -10.0;
  double hi = 10.0;
  double step = 1e-2;
  std::string name;

  double reflect(double x) const;
  /// One Euler-Maruyama step of size dt with standard normal z, reflected.
  double euler_step(double x, double dt, double z) const;
};

using Model = std::variant<Ctmc, Diffusion1d>;

/// The set C: a state mask for chains or a closed interval for diffusions.
class TargetSet {
 public:
  static TargetSet states(std::size_t n, std::span<const std::size_t> members);
  static TargetSet mask(std::vector<char> m);
  static TargetSet interval(double a, double b);

  bool is_interval() const { return !mask_; }
  bool contains(std::size_t i) const { return (*mask_)[i] != 0; }
  bool contains(double x) const { return x >= a_ && x <= b_; }
  std::size_t size() const;  // member count (chains)
  std::vector<std::size_t> members() const;
  double lo() const { return a_; }
  double hi() const { return b_; }
  bool empty() const;
  std::string describe() const;

 private:
  std::optional<std::vector<char>> mask_;
  double a_ = 0.0, b_ = 0.0;
};

/// A sampled path on [0, horizon].
struct Trajectory {
  enum class Kind { Jump, Grid } kind = Kind::Jump;
  double horizon = 0.0;
  // Jump: states[k] is held on [times[k], times[k+1]) (last one up to horizon).
  std::vector<double> times;
  std::vector<std::size_t> states;
  // Grid: positions[k] at k * dt.
  double dt = 0.0;
  std::vector<double> positions;

  /// int_0^t 1_C(X_s) ds. Exact for jump paths, left-endpoint for grids.
  double occupation(const TargetSet& c, double t) const;
  std::size_t state_at(double t) const;
};

/// (Lf)(x) = sum_y q(x,y) (f(y) - f(x)).
std::vector<double> generator_apply(const Ctmc& m, std::span<const double> f);

/// b f' + (sigma^2/2) f'' by central differences; DomainError when x +- h
/// leaves the domain.
double generator_apply_diffusion(const Diffusion1d& m, const std::function<double(double)>& f,
                                 double x, double h);

Trajectory sample_path(const Ctmc& m, std::size_t x0, double horizon, Stream& rng);
Trajectory sample_path(const Diffusion1d& m, double x0, double horizon, Stream& rng);

/// pi Q = 0 by the Grassmann-Taksar-Heyman elimination.
std::vector<double> stationary_distribution(const Ctmc& m);

struct UniformizationOptions {
  double epsilon = 1e-12;  // Poisson truncation mass
  double max_rate_time = 1e5;
};

/// p0 e^{tQ} by uniformization.
std::vector<double> propagate(const Ctmc& m, std::span<const double> p0, double t,
                              const UniformizationOptions& opts = {});
/// Row x0 of e^{tQ}.
std::vector<double> transient_distribution(const Ctmc& m, std::size_t x0, double t,
                                           const UniformizationOptions& opts = {});

/// Truncated Poisson(mean) weights; `first` is the index of weights[0].
struct PoissonWeights {
  std::size_t first = 0;
  std::vector<double> weights;
};
PoissonWeights poisson_weights(double mean, double epsilon);

}  // namespace subgeo
