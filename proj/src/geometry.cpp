#include "kolloc/geometry.hpp"

#include "kolloc/rng.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace kolloc {

namespace {

void check_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (lo.size() == 0 || lo.size() != hi.size())
    throw std::invalid_argument("domain: bad box bounds");
  for (int i = 0; i < lo.size(); ++i)
    if (!(lo(i) < hi(i))) throw std::invalid_argument("domain: lo < hi required");
}

}  // namespace

Domain Domain::unit_ball(int d) {
  if (d < 1) throw std::invalid_argument("domain: d >= 1 required");
  Domain dom;
  dom.shape = DomainShape::unit_ball;
  dom.dim = d;
  return dom;
}

Domain Domain::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  check_bounds(lo, hi);
  Domain dom;
  dom.shape = DomainShape::box;
  dom.dim = (int)lo.size();
  dom.lo = lo;
  dom.hi = hi;
  return dom;
}

Domain Domain::unit_box(int d) {
  return box(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
}

Domain Domain::product(const Domain& spatial_dom,
                       const Eigen::VectorXd& theta_lo,
                       const Eigen::VectorXd& theta_hi) {
  if (spatial_dom.shape == DomainShape::product)
    throw std::invalid_argument("domain: nested products not supported");
  check_bounds(theta_lo, theta_hi);
  Domain dom;
  dom.shape = DomainShape::product;
  dom.dim = spatial_dom.dim + (int)theta_lo.size();
  dom.lo = theta_lo;
  dom.hi = theta_hi;
  dom.spatial = std::make_shared<Domain>(spatial_dom);
  return dom;
}

bool Domain::contains_interior(const Eigen::VectorXd& x) const {
  if (x.size() != dim) return false;
  switch (shape) {
    case DomainShape::unit_ball:
      return x.norm() < 1.0;
    case DomainShape::box:
      for (int i = 0; i < dim; ++i)
        if (!(x(i) > lo(i) && x(i) < hi(i))) return false;
      return true;
    case DomainShape::product: {
      int ds = spatial->dim;
      if (!spatial->contains_interior(x.head(ds))) return false;
      for (int i = 0; i < lo.size(); ++i) {
        double t = x(ds + i);
        if (!(t >= lo(i) && t <= hi(i))) return false;
      }
      return true;
    }
  }
  return false;
}

bool Domain::on_boundary(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != dim) return false;
  switch (shape) {
    case DomainShape::unit_ball:
      return std::abs(x.norm() - 1.0) <= tol;
    case DomainShape::box: {
      bool face = false;
      for (int i = 0; i < dim; ++i) {
        if (x(i) < lo(i) - tol || x(i) > hi(i) + tol) return false;
        if (std::abs(x(i) - lo(i)) <= tol || std::abs(x(i) - hi(i)) <= tol)
          face = true;
      }
      return face;
    }
    case DomainShape::product: {
      int ds = spatial->dim;
      if (!spatial->on_boundary(x.head(ds), tol)) return false;
      for (int i = 0; i < lo.size(); ++i) {
        double t = x(ds + i);
        if (t < lo(i) - tol || t > hi(i) + tol) return false;
      }
      return true;
    }
  }
  return false;
}

namespace {

void fill_interior_row(const Domain& dom, std::mt19937_64& gen,
                       Eigen::Ref<Eigen::VectorXd> row) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  switch (dom.shape) {
    case DomainShape::unit_ball: {
      Eigen::VectorXd z(dom.dim);
      for (int i = 0; i < dom.dim; ++i) z(i) = gauss(gen);
      double nrm = z.norm();
      while (nrm == 0.0) {
        for (int i = 0; i < dom.dim; ++i) z(i) = gauss(gen);
        nrm = z.norm();
      }
      double r = std::pow(unit(gen), 1.0 / dom.dim);
      row = (r / nrm) * z;
      break;
    }
    case DomainShape::box:
      for (int i = 0; i < dom.dim; ++i)
        row(i) = dom.lo(i) + (dom.hi(i) - dom.lo(i)) * unit(gen);
      break;
    case DomainShape::product: {
      int ds = dom.spatial->dim;
      fill_interior_row(*dom.spatial, gen, row.head(ds));
      for (int i = 0; i < dom.lo.size(); ++i)
        row(ds + i) = dom.lo(i) + (dom.hi(i) - dom.lo(i)) * unit(gen);
      break;
    }
  }
}

void fill_boundary_row(const Domain& dom, std::mt19937_64& gen,
                       Eigen::Ref<Eigen::VectorXd> row) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  switch (dom.shape) {
    case DomainShape::unit_ball: {
      if (dom.dim == 1) {
        row(0) = unit(gen) < 0.5 ? -1.0 : 1.0;
        break;
      }
      Eigen::VectorXd z(dom.dim);
      double nrm = 0.0;
      do {
        for (int i = 0; i < dom.dim; ++i) z(i) = gauss(gen);
        nrm = z.norm();
      } while (nrm == 0.0);
      row = z / nrm;
      break;
    }
    case DomainShape::box: {
      // Pick a face with probability proportional to its area, then a
      // uniform point on it.
      Eigen::VectorXd len = dom.hi - dom.lo;
      Eigen::VectorXd area(dom.dim);
      for (int i = 0; i < dom.dim; ++i) {
        double a = 1.0;
        for (int j = 0; j < dom.dim; ++j)
          if (j != i) a *= len(j);
        area(i) = a;
      }
      double pick = unit(gen) * area.sum();
      int axis = 0;
      while (axis + 1 < dom.dim && pick > area(axis)) {
        pick -= area(axis);
        ++axis;
      }
      bool high = unit(gen) < 0.5;
      for (int i = 0; i < dom.dim; ++i)
        row(i) = dom.lo(i) + len(i) * unit(gen);
      row(axis) = high ? dom.hi(axis) : dom.lo(axis);
      break;
    }
    case DomainShape::product: {
      int ds = dom.spatial->dim;
      fill_boundary_row(*dom.spatial, gen, row.head(ds));
      for (int i = 0; i < dom.lo.size(); ++i)
        row(ds + i) = dom.lo(i) + (dom.hi(i) - dom.lo(i)) * unit(gen);
      break;
    }
  }
}

}  // namespace

Eigen::MatrixXd sample_interior(const Domain& dom, int M, uint64_t seed) {
  if (M < 1) throw std::invalid_argument("sample_interior: M >= 1 required");
  Eigen::MatrixXd pts(M, dom.dim);
  auto gen = make_engine(seed, 0);
  Eigen::VectorXd buf(dom.dim);
  for (int m = 0; m < M; ++m) {
    fill_interior_row(dom, gen, buf);
    pts.row(m) = buf.transpose();
  }
  return pts;
}

Eigen::MatrixXd sample_boundary(const Domain& dom, int M, uint64_t seed) {
  if (M < 1) throw std::invalid_argument("sample_boundary: M >= 1 required");
  Eigen::MatrixXd pts(M, dom.dim);
  auto gen = make_engine(seed, 1);
  Eigen::VectorXd buf(dom.dim);
  for (int m = 0; m < M; ++m) {
    fill_boundary_row(dom, gen, buf);
    pts.row(m) = buf.transpose();
  }
  return pts;
}

CollocationSet sample_collocation(const Domain& dom, int M_interior,
                                  int M_boundary, uint64_t seed) {
  CollocationSet set;
  set.seed = seed;
  set.interior_points = sample_interior(dom, M_interior, seed);
  set.boundary_points = sample_boundary(dom, M_boundary, seed);
  for (int m = 0; m < M_interior; ++m)
    if (!dom.contains_interior(set.interior_points.row(m).transpose()))
      throw std::runtime_error("sample_collocation: interior point escaped");
  for (int m = 0; m < M_boundary; ++m)
    if (!dom.on_boundary(set.boundary_points.row(m).transpose()))
      throw std::runtime_error("sample_collocation: boundary point off surface");
  return set;
}

namespace {

double fill_distance_impl(const Eigen::MatrixXd& points, const Domain& dom,
                          int probes, uint64_t seed, bool on_boundary,
                          bool parallel) {
  if (points.rows() == 0)
    throw std::invalid_argument("fill_distance_estimate: empty point set");
  if (probes < 1)
    throw std::invalid_argument("fill_distance_estimate: probes >= 1 required");
  Eigen::MatrixXd probe_pts = on_boundary
                                  ? sample_boundary(dom, probes, seed)
                                  : sample_interior(dom, probes, seed);
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst) if (parallel)
  for (int p = 0; p < probes; ++p) {
    double best = (points.rowwise() - probe_pts.row(p)).rowwise().squaredNorm().minCoeff();
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

}  // namespace

double fill_distance_estimate(const Eigen::MatrixXd& points, const Domain& dom,
                              int probes, uint64_t seed, bool on_boundary) {
  return fill_distance_impl(points, dom, probes, seed, on_boundary, true);
}

double fill_distance_estimate_serial(const Eigen::MatrixXd& points,
                                     const Domain& dom, int probes,
                                     uint64_t seed, bool on_boundary) {
  return fill_distance_impl(points, dom, probes, seed, on_boundary, false);
}

void write_points_csv(const std::string& path, const Eigen::MatrixXd& points) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_points_csv: cannot open " + path);
  out.precision(17);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      if (j) out << ',';
      out << points(i, j);
    }
    out << '\n';
  }
}

}  // namespace kolloc
