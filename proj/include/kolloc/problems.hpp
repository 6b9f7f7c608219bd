#pragma once

#include "kolloc/functionals.hpp"
#include "kolloc/geometry.hpp"

#include <string>
#include <vector>

namespace kolloc {

/// One linear operator channel c_q(s) L_q with L_q a differential monomial.
struct PdeOp {
  DiffMonomial mono;
  ScalarField coeff;
};

/// Nonlinear map of the operator-channel values with its gradient.
struct Combiner {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  bool affine = false;
};

/// PDE in operator form: P(t_1, .., t_Q)(s) = f(s) in the interior,
/// B(..) = g on the boundary, with t_q = c_q(s) (L_q u)(s).
struct PdeProblem {
  std::string name;
  Domain domain;
  std::vector<PdeOp> interior_ops;
  std::vector<PdeOp> boundary_ops;
  Combiner combiner_P;
  Combiner combiner_B;
  ScalarField f;
  ScalarField g;
  ScalarField true_solution;    // empty when no closed form is known
  int interior_lap_channel = -1;  // second-order channel, used by elimination
};

/// Channel values at each collocation point, one row per point.
struct OperatorValues {
  Eigen::MatrixXd interior;
  Eigen::MatrixXd boundary;
};

/// One functional and one target per collocation point: the linear
/// minimum-norm problem solved in each outer iteration.
struct LinearizationSystem {
  std::vector<DualFunctional> functionals;  // interior rows, then boundary
  Eigen::VectorXd targets;
};

/// -div(A grad u) + u^3 = f on the unit ball, A = exp(sin(sum cos x_j)),
/// manufactured solution u* = exp(sin(beta sum cos x_j)).
PdeProblem make_nonlinear_elliptic(int d, double beta);

/// -div(exp(a) grad u) + 1 + tanh(beta_tau u) = f on the unit ball,
/// a = sin(sum cos x_j), manufactured u* = exp(sin(2 sum cos x_j)).
PdeProblem make_darcy_tanh(int d, double beta_tau);

/// -d/dx(A(x, theta) du/dx) = x on [0,1] x [0,1]^{p+1}, u = 0 at x in
/// {0,1}, with A = 2 + theta_0 + sum_j theta_j j^{-k} sin(pi x + j).
/// No closed-form solution; a dense 1-d reference lives in the harness.
PdeProblem make_parametric_darcy(int p, double k_decay);

/// Raw channel functionals phi_{m,q} = delta_{s_m} o (c_q(s_m) L_q),
/// interior points first, Q channels contiguous per point.
std::vector<DualFunctional> measurement_functionals(const PdeProblem& prob,
                                                    const CollocationSet& colloc);

/// Reshapes a flat vector in measurement_functionals order.
OperatorValues unpack_op_values(const PdeProblem& prob,
                                const CollocationSet& colloc,
                                const Eigen::VectorXd& flat);

/// Linearized constraints at the current channel values: functionals from
/// the combiner gradients, targets z_m = data - P(t_m) + grad P(t_m).t_m.
LinearizationSystem linearize(const PdeProblem& prob,
                              const CollocationSet& colloc,
                              const OperatorValues& current);

/// Pointwise constraint violation P(t_m) - f(s_m) (interior rows), then
/// B(t_m) - g(s_m) (boundary rows).
Eigen::VectorXd residual(const PdeProblem& prob, const CollocationSet& colloc,
                         const OperatorValues& values);

/// Channel values of a closed-form field via Richardson-extrapolated
/// central differences.  Validation path, never used in solves.
OperatorValues op_values_of_field(const PdeProblem& prob,
                                  const CollocationSet& colloc,
                                  const ScalarField& u, double step = 1e-2);

}  // namespace kolloc
