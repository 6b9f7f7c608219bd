#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>

namespace kolloc {

enum class DomainShape { unit_ball, box, product };

/// Sampling domain: the unit ball in R^d, an axis-aligned box, or the
/// product of a spatial domain with a parameter box (boundary taken as
/// boundary-of-spatial times the whole parameter box).
struct Domain {
  DomainShape shape = DomainShape::box;
  int dim = 0;
  Eigen::VectorXd lo, hi;  // box bounds; parameter bounds for products
  std::shared_ptr<const Domain> spatial;  // product only

  static Domain unit_ball(int d);
  static Domain box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
  static Domain unit_box(int d);
  static Domain product(const Domain& spatial_dom,
                        const Eigen::VectorXd& theta_lo,
                        const Eigen::VectorXd& theta_hi);

  bool contains_interior(const Eigen::VectorXd& x) const;
  bool on_boundary(const Eigen::VectorXd& x, double tol = 1e-12) const;
};

/// Interior/boundary collocation points, one point per row.
struct CollocationSet {
  Eigen::MatrixXd interior_points;
  Eigen::MatrixXd boundary_points;
  uint64_t seed = 0;
};

/// M i.i.d. points uniform w.r.t. volume measure, deterministic per seed.
Eigen::MatrixXd sample_interior(const Domain& dom, int M, uint64_t seed);

/// M i.i.d. points uniform w.r.t. surface measure (the two endpoints for a
/// 1-d ball, area-weighted faces for boxes, boundary-of-spatial times
/// parameter box for products).
Eigen::MatrixXd sample_boundary(const Domain& dom, int M, uint64_t seed);

/// Interior and boundary samples drawn from decorrelated streams of one
/// seed, validated against the domain predicates.
CollocationSet sample_collocation(const Domain& dom, int M_interior,
                                  int M_boundary, uint64_t seed);

/// Monte Carlo fill distance: max over probe draws of the distance to the
/// nearest point.  Probes are drawn in the interior, or on the boundary
/// when on_boundary is set.  Probing is OpenMP parallel (max-reduction is
/// exact); the serial variant must agree bit for bit.
double fill_distance_estimate(const Eigen::MatrixXd& points, const Domain& dom,
                              int probes, uint64_t seed,
                              bool on_boundary = false);
double fill_distance_estimate_serial(const Eigen::MatrixXd& points,
                                     const Domain& dom, int probes,
                                     uint64_t seed, bool on_boundary = false);

/// One point per row, coordinates as decimal text.
void write_points_csv(const std::string& path, const Eigen::MatrixXd& points);

}  // namespace kolloc
