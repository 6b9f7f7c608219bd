#pragma once

#include "kolloc/kernels.hpp"
#include "kolloc/problems.hpp"

namespace kolloc {

enum class SolverVariant { lto, gn_eliminate, gn_relaxed };

struct SolverConfig {
  SolverVariant variant = SolverVariant::lto;
  double nugget_eta = 1e-10;
  int max_iters = 8;
  double step_size = 1.0;        // in (0, 1]
  double convergence_tol = 1e-10;  // relative iterate change; 0 runs all
  double beta_relax = 1e-6;        // gn_relaxed penalty parameter
  bool backtracking = false;       // halve the step when the residual grows
};

/// Representer-form solution u(s) = sum_j c_j [delta_s (x) phi_j] k with
/// the factorization kept for norm queries and warm restarts.
struct Solution {
  KernelSpec kernel;
  std::vector<DualFunctional> functionals;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd targets;
  std::vector<double> iterate_history;  // residual norms per outer iteration
  Eigen::LLT<Eigen::MatrixXd> factorization;
  double nugget_used = 0.0;
};

/// Minimum-norm function matching [phi_j, u] = z_j: assembles the Gram
/// matrix, adds eta times its diagonal (escalating once by 100 if the
/// Cholesky factorization fails), and solves for the coefficients.
Solution solve_min_norm(const KernelSpec& k,
                        const std::vector<DualFunctional>& phis,
                        const Eigen::VectorXd& targets, double eta);

/// Linearize-then-optimize: from the zero function, repeatedly linearize
/// the PDE at the current channel values and solve the resulting linear
/// minimum-norm problem (an M x M system per iteration).
Solution solve_lto(const PdeProblem& prob, const CollocationSet& colloc,
                   const KernelSpec& k, const SolverConfig& cfg);

/// Gauss-Newton on the full functional-value vector z with the constraint
/// relaxed by a beta^2 penalty; each step solves the M x M system
/// (J K J^T + beta^2 I) via the Woodbury form of the normal equations.
Solution solve_gn_relaxed(const PdeProblem& prob, const CollocationSet& colloc,
                          const KernelSpec& k, const SolverConfig& cfg);

/// Gauss-Newton after eliminating the designated second-order channel
/// (and the boundary values) through the constraints; iterates on the
/// remaining channel values w.  Requires the combiner to be affine with
/// unit weight in the eliminated channel, which holds for every built-in.
Solution solve_gn_eliminate(const PdeProblem& prob,
                            const CollocationSet& colloc, const KernelSpec& k,
                            const SolverConfig& cfg);

/// Dispatch on cfg.variant.
Solution solve(const PdeProblem& prob, const CollocationSet& colloc,
               const KernelSpec& k, const SolverConfig& cfg);

/// Representer evaluation at each row of pts.
Eigen::VectorXd evaluate(const Solution& sol, const Eigen::MatrixXd& pts);

/// Nugget-regularized RKHS norm sqrt(z^T (K + eta diag K)^{-1} z).
double rkhs_norm(const Solution& sol);

}  // namespace kolloc
