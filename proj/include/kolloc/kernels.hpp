#pragma once

#include "kolloc/functionals.hpp"

#include <Eigen/Dense>

#include <vector>

namespace kolloc {

enum class KernelFamily { gaussian, matern, inverse_quadratic };

/// Radial kernel k(x, y) = g(rho) on the weighted anisotropic squared
/// distance rho = sum_i w_i (x_i - y_i)^2 / sigma_i^2.
///
/// Families:
///   gaussian           g(rho) = exp(-rho / 2)
///   matern             half-integer nu in {5/2, 7/2, 9/2}, g a polynomial
///                      in t = sqrt(2 nu rho) times exp(-t)
///   inverse_quadratic  g(rho) = 1 / (1 + rho / (2 dim))
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  int dim = 0;
  Eigen::VectorXd lengthscales;
  Eigen::VectorXd weights;
  int matern_m = 0;  // nu = matern_m + 1/2

  static KernelSpec gaussian(int dim, double sigma);
  static KernelSpec gaussian(int dim, Eigen::VectorXd sigmas);
  static KernelSpec matern(int dim, double nu, double sigma);
  static KernelSpec matern(int dim, double nu, Eigen::VectorXd sigmas);
  static KernelSpec inverse_quadratic(int dim, double sigma);

  /// Copy with per-coordinate weights (size dim, nonnegative).
  KernelSpec with_weights(Eigen::VectorXd w) const;

  /// Largest supported total mixed derivative order of eval_pair.
  /// Unlimited (reported as a large constant) for gaussian and
  /// inverse_quadratic; 2 * floor(nu) for matern.
  int derivative_budget() const;

  /// Per-coordinate factors a_i = w_i / sigma_i^2, cached.
  const Eigen::VectorXd& scale_factors() const { return a_; }

  double squared_distance(const Point& x, const Point& y) const;

  Eigen::VectorXd a_;  // filled by the factories

 private:
  void finalize();
};

/// Derivatives of the radial profile, g[k] = d^k g / d rho^k.
struct RadialDerivs {
  double g[5] = {0, 0, 0, 0, 0};
};

RadialDerivs radial_derivs(const KernelSpec& k, double rho, int order);

/// Plain kernel value.
double eval(const KernelSpec& k, const Point& x, const Point& y);

/// Pairing [F (x) G] k of two dual functionals, F acting on the first
/// argument and G on the second.  Throws on dimension mismatch or when
/// order(F) + order(G) exceeds the family's derivative budget.
double eval_pair(const KernelSpec& k, const DualFunctional& F,
                 const DualFunctional& G);

/// Gram matrix K_ij = [phi_i (x) phi_j] k.  Entries are computed on the
/// upper triangle and mirrored; assembly is OpenMP parallel over entries.
Eigen::MatrixXd gram(const KernelSpec& k,
                     const std::vector<DualFunctional>& phis);

/// Serial reference assembly, kept for testing and benchmarks; must agree
/// with gram() bit for bit.
Eigen::MatrixXd gram_serial(const KernelSpec& k,
                            const std::vector<DualFunctional>& phis);

/// Rectangular pairing matrix A_ij = [rows_i (x) cols_j] k.
Eigen::MatrixXd functional_matrix(const KernelSpec& k,
                                  const std::vector<DualFunctional>& rows,
                                  const std::vector<DualFunctional>& cols);

/// Row vector [delta_x (x) phi_j] k used by the representer formula.
Eigen::VectorXd cross_row(const KernelSpec& k, const Point& x,
                          const std::vector<DualFunctional>& phis);

/// Stacked cross rows for many evaluation points (rows of pts), OpenMP
/// parallel over points.
Eigen::MatrixXd cross_matrix(const KernelSpec& k, const Eigen::MatrixXd& pts,
                             const std::vector<DualFunctional>& phis);
Eigen::MatrixXd cross_matrix_serial(const KernelSpec& k,
                                    const Eigen::MatrixXd& pts,
                                    const std::vector<DualFunctional>& phis);

/// Value and gradient in x of u(x) = sum_j c_j [delta_x (x) phi_j] k.
/// Shares the radial evaluation between the value and all gradient
/// components, which keeps the cost at O(dim) per functional.
void eval_with_gradient(const KernelSpec& k, const Point& x,
                        const std::vector<DualFunctional>& phis,
                        const Eigen::VectorXd& coeffs, double* value,
                        Eigen::VectorXd* grad);

}  // namespace kolloc
