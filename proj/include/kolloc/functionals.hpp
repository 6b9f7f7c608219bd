#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace kolloc {

using Point = Eigen::VectorXd;
using ScalarField = std::function<double(const Point&)>;

/// Differential monomial acting at a point: identity, d/ds_i,
/// d^2/(ds_i ds_j), or a Laplacian restricted to a coordinate subset.
struct DiffMonomial {
  enum class Kind { identity, partial, second_partial, laplacian };

  Kind kind = Kind::identity;
  int i = -1;
  int j = -1;
  std::vector<int> subset;  // laplacian coordinates, kept sorted

  static DiffMonomial identity();
  static DiffMonomial partial(int i);
  static DiffMonomial second_partial(int i, int j);
  static DiffMonomial laplacian(int dim);  // full Laplacian in dim coordinates
  static DiffMonomial laplacian_over(std::vector<int> subset);

  /// Total derivative order (0, 1 or 2).
  int order() const;

  /// Largest coordinate index referenced, -1 for the identity.
  int max_index() const;
};

/// Bounded linear functional F(u) = sum_k c_k (D_k u)(location), the
/// building block of collocation constraints.
struct DualFunctional {
  struct Term {
    double coeff = 0.0;
    DiffMonomial mono;
  };

  Point location;
  std::vector<Term> terms;
};

/// Builds a functional from parallel coefficient/monomial lists.
/// Zero coefficients are kept; the lists must be nonempty and equal length.
DualFunctional combine(const std::vector<double>& coeffs,
                       const std::vector<DiffMonomial>& monos,
                       const Point& location);

/// Throws std::invalid_argument on malformed functionals (no terms,
/// non-finite coefficients, indices outside the location dimension).
void validate(const DualFunctional& f);

/// Max derivative order over terms.
int order(const DualFunctional& f);

/// Applies F to a scalar field with second-order central differences.
double apply_fd(const DualFunctional& f, const ScalarField& v, double step);

/// Central-difference application of a single monomial.
double apply_fd(const DiffMonomial& m, const Point& s, const ScalarField& v,
                double step);

}  // namespace kolloc
