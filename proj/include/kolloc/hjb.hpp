#pragma once

#include "kolloc/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kolloc {

/// Control problem (d_t + Delta)V - |grad V|^2 = 0 on [0, T] with terminal
/// data V(., T) = g, solved backward along Brownian sample paths: each time
/// slice poses a minimum-norm problem whose constraints tie the value and
/// gradient at the current states to the already-computed next slice.
struct HjbConfig {
  int d = 100;
  double T = 1.0;
  int n_steps = 20;
  int J = 2000;  // path count
  Point x0;      // empty means the origin of R^d
  double sigma = 100.0;
  double nugget = 1e-3;
  std::uint64_t seed = 0;
  int lto_iters = 2;  // linearization sweeps per backward step

  // Overriding terminal data (both or neither); the default is
  // g(x) = log(1/2 + |x|^2 / 2).
  ScalarField terminal;
  std::function<Eigen::VectorXd(const Point&)> terminal_gradient;
};

/// J forward paths of dX = sqrt(2) dW from x0, with the standard-normal
/// increments retained: states[n+1] = states[n] + sqrt(2 dt) increments[n].
struct PathBundle {
  std::vector<Eigen::MatrixXd> states;      // n_steps + 1 entries, J x d
  std::vector<Eigen::MatrixXd> increments;  // n_steps entries, J x d
};

/// One backward slice: the linearized minimum-norm solution plus its value
/// and gradient at every path state of the slice.
struct HjbStep {
  Solution solution;
  Eigen::VectorXd values;     // per path
  Eigen::MatrixXd gradients;  // J x d
  double residual = 0.0;      // l2 norm of the nonlinear constraint defects
};

struct HjbStepDiag {
  int step = 0;
  double residual = 0.0;
  double value_at_x0 = 0.0;
};

struct HjbRun {
  double value_at_x0 = 0.0;
  std::vector<HjbStepDiag> diagnostics;  // earliest slice first
};

struct ColeHopfEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

double hjb_terminal(const Point& x);
Eigen::VectorXd hjb_terminal_gradient(const Point& x);

/// Euler-Maruyama simulation, one decorrelated RNG stream per path, so the
/// bundle is deterministic in cfg.seed regardless of thread count.
PathBundle simulate_paths(const HjbConfig& cfg);

/// Solves the slice problem at the given states: constraints
///   u(X_j) + dt |grad u(X_j)|^2 + sqrt(2 dt) grad u(X_j) . xi_j = target_j
/// by cfg.lto_iters linearization sweeps starting from init_gradients
/// (the time-continuity warm start).  Functionals that come out exactly
/// identical are collapsed to one constraint with the targets averaged.
HjbStep backward_step(const HjbConfig& cfg, const Eigen::MatrixXd& states,
                      const Eigen::MatrixXd& xi,
                      const Eigen::VectorXd& targets,
                      const Eigen::MatrixXd& init_gradients);

/// Full backward sweep from the terminal slice; returns V(x0, 0) and the
/// per-slice diagnostics.
HjbRun solve_hjb(const HjbConfig& cfg);

/// Monte Carlo evaluation of the closed-form solution
///   V(x, t) = -log E[ exp(-g(x + sqrt(2) W_{T-t})) ]
/// at (x0, 0), with the standard error mapped through the logarithm.
ColeHopfEstimate cole_hopf_reference(const HjbConfig& cfg, int mc_samples,
                                     std::uint64_t seed);

void write_hjb_diagnostics_csv(const std::string& path, const HjbRun& run);

}  // namespace kolloc
