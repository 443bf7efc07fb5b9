#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "subgeo/models.hpp"

namespace subgeo {

// Bundled models. All chains have a single communicating class by
// construction (except `absorbing`, which has one state).

/// Q = [[-1, 1], [1, -1]].
Ctmc two_state_symmetric();
/// One state, no transitions.
Ctmc absorbing();
/// Birth-death chain on {0..n} with up/down rates; the top state has no
/// up-jump (reflecting truncation), state 0 no down-jump.
Ctmc birth_death(std::size_t n, const std::function<double(std::size_t)>& up,
                 const std::function<double(std::size_t)>& down, std::string name);
/// q(n,n+1) = lambda, q(n,n-1) = mu on {0..N}.
Ctmc bd_geometric(double lambda, double mu, std::size_t n_max);
/// q(n,n+1) = 1, q(n,n-1) = 1 + c/n on {0..N}.
Ctmc bd_polynomial(double c, std::size_t n_max);

/// b(x) = -theta x, sigma = sqrt(2).
Diffusion1d ou(double theta, double lo = -10.0, double hi = 10.0, double step = 1e-2);
/// b(x) = -d/dx (1+x^2)^{beta/2}, sigma = sqrt(2).
Diffusion1d heavy_tail_langevin(double beta, double lo = -50.0, double hi = 50.0,
                                double step = 1e-2);

/// Parse "name(arg,...)" against the registry.
Model make_model(const std::string& spec);
Model make_model(const std::string& name, const std::vector<double>& args);

/// Rate-matrix CSV: a header line carrying n ("n", "n=3" or "n,3"; the bare
/// "n" form takes n from the first data row's width), then n rows of n values.
Ctmc load_ctmc_csv(const std::string& path);

std::string model_id(const Model& m);

}  // namespace subgeo
