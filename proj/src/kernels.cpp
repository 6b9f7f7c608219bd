#include "kolloc/kernels.hpp"

#include "pairing_detail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kolloc {

namespace {

// Floor for the singular 1/t factors of the matern derivatives.  The
// monomials multiplying those terms vanish at least as fast as t^2, so
// flooring t keeps every product finite and exact in the t -> 0 limit
// without a branch.
constexpr double kTFloor = 1e-75;

void check_sigmas(const Eigen::VectorXd& s) {
  for (int i = 0; i < s.size(); ++i)
    if (!(s(i) > 0.0) || !std::isfinite(s(i)))
      throw std::invalid_argument("kernel: lengthscales must be positive");
}

}  // namespace

void KernelSpec::finalize() {
  if (dim <= 0) throw std::invalid_argument("kernel: dim must be positive");
  if (lengthscales.size() != dim)
    throw std::invalid_argument("kernel: lengthscale size mismatch");
  check_sigmas(lengthscales);
  if (weights.size() == 0) weights = Eigen::VectorXd::Ones(dim);
  if (weights.size() != dim)
    throw std::invalid_argument("kernel: weight size mismatch");
  for (int i = 0; i < dim; ++i)
    if (!(weights(i) >= 0.0) || !std::isfinite(weights(i)))
      throw std::invalid_argument("kernel: weights must be nonnegative");
  a_ = weights.array() / lengthscales.array().square();
}

KernelSpec KernelSpec::gaussian(int dim, double sigma) {
  return gaussian(dim, Eigen::VectorXd::Constant(dim, sigma));
}

KernelSpec KernelSpec::gaussian(int dim, Eigen::VectorXd sigmas) {
  KernelSpec k;
  k.family = KernelFamily::gaussian;
  k.dim = dim;
  k.lengthscales = std::move(sigmas);
  k.finalize();
  return k;
}

KernelSpec KernelSpec::matern(int dim, double nu, double sigma) {
  return matern(dim, nu, Eigen::VectorXd::Constant(dim, sigma));
}

KernelSpec KernelSpec::matern(int dim, double nu, Eigen::VectorXd sigmas) {
  KernelSpec k;
  k.family = KernelFamily::matern;
  k.dim = dim;
  k.lengthscales = std::move(sigmas);
  const double m = nu - 0.5;
  const int mi = static_cast<int>(std::lround(m));
  if (std::abs(m - mi) > 1e-12 || mi < 2 || mi > 4)
    throw std::invalid_argument("matern: nu must be one of 5/2, 7/2, 9/2");
  k.matern_m = mi;
  k.finalize();
  return k;
}

KernelSpec KernelSpec::inverse_quadratic(int dim, double sigma) {
  KernelSpec k;
  k.family = KernelFamily::inverse_quadratic;
  k.dim = dim;
  k.lengthscales = Eigen::VectorXd::Constant(dim, sigma);
  k.finalize();
  return k;
}

KernelSpec KernelSpec::with_weights(Eigen::VectorXd w) const {
  KernelSpec k = *this;
  k.weights = std::move(w);
  k.finalize();
  return k;
}

int KernelSpec::derivative_budget() const {
  switch (family) {
    case KernelFamily::gaussian:
    case KernelFamily::inverse_quadratic:
      return std::numeric_limits<int>::max();
    case KernelFamily::matern:
      return 2 * matern_m;
  }
  return 0;
}

double KernelSpec::squared_distance(const Point& x, const Point& y) const {
  if (x.size() != dim || y.size() != dim)
    throw std::invalid_argument("kernel: point dimension mismatch");
  double rho = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = x(i) - y(i);
    rho += a_(i) * d * d;
  }
  return rho;
}

RadialDerivs radial_derivs(const KernelSpec& k, double rho, int order) {
  RadialDerivs r;
  switch (k.family) {
    case KernelFamily::gaussian: {
      const double e = std::exp(-0.5 * rho);
      double c = 1.0;
      for (int n = 0; n <= order; ++n) {
        r.g[n] = c * e;
        c *= -0.5;
      }
      return r;
    }
    case KernelFamily::inverse_quadratic: {
      const double c = 1.0 / (2.0 * k.dim);
      const double u = 1.0 / (1.0 + c * rho);
      double f = 1.0, p = u;
      for (int n = 0; n <= order; ++n) {
        r.g[n] = f * p;
        f *= -c * (n + 1);
        p *= u;
      }
      return r;
    }
    case KernelFamily::matern:
      break;
  }

  const double nu2 = 2.0 * (k.matern_m + 0.5);  // 2 nu = 5, 7 or 9
  const double t = std::sqrt(nu2 * rho);
  const double ts = std::max(t, kTFloor);
  const double E = std::exp(-t);
  switch (k.matern_m) {
    case 2:
      r.g[0] = (1.0 + t + t * t / 3.0) * E;
      if (order >= 1) r.g[1] = -(5.0 / 6.0) * (1.0 + t) * E;
      if (order >= 2) r.g[2] = (25.0 / 12.0) * E;
      if (order >= 3) r.g[3] = -(125.0 / 24.0) * E / ts;
      if (order >= 4) r.g[4] = (625.0 / 48.0) * (t + 1.0) * E / (ts * ts * ts);
      break;
    case 3:
      r.g[0] = (1.0 + t + 0.4 * t * t + t * t * t / 15.0) * E;
      if (order >= 1) r.g[1] = -(7.0 / 30.0) * (3.0 + 3.0 * t + t * t) * E;
      if (order >= 2) r.g[2] = (49.0 / 60.0) * (1.0 + t) * E;
      if (order >= 3) r.g[3] = -(343.0 / 120.0) * E;
      if (order >= 4) r.g[4] = (2401.0 / 240.0) * E / ts;
      break;
    case 4: {
      const double t2 = t * t;
      r.g[0] = (1.0 + t + 3.0 * t2 / 7.0 + 2.0 * t2 * t / 21.0 + t2 * t2 / 105.0) * E;
      if (order >= 1) r.g[1] = -(3.0 / 70.0) * (15.0 + 15.0 * t + 6.0 * t2 + t2 * t) * E;
      if (order >= 2) r.g[2] = (27.0 / 140.0) * (3.0 + 3.0 * t + t2) * E;
      if (order >= 3) r.g[3] = -(243.0 / 280.0) * (1.0 + t) * E;
      if (order >= 4) r.g[4] = (2187.0 / 560.0) * E;
      break;
    }
    default:
      throw std::logic_error("matern: unsupported order");
  }
  return r;
}

double eval(const KernelSpec& k, const Point& x, const Point& y) {
  return radial_derivs(k, k.squared_distance(x, y), 0).g[0];
}

namespace {

void check_budget(const KernelSpec& k, int order_sum) {
  if (order_sum > k.derivative_budget())
    throw std::invalid_argument(
        "eval_pair: derivative order exceeds the kernel family's budget");
}

int max_pair_order(const std::vector<detail::Packed>& ps) {
  int m1 = 0, m2 = 0;  // two largest orders
  for (const auto& p : ps) {
    if (p.ord >= m1) {
      m2 = m1;
      m1 = p.ord;
    } else {
      m2 = std::max(m2, p.ord);
    }
  }
  return ps.size() > 1 ? m1 + m2 : 2 * m1;
}

}  // namespace

double eval_pair(const KernelSpec& k, const DualFunctional& F,
                 const DualFunctional& G) {
  const detail::Packed pf = detail::pack(k, F);
  const detail::Packed pg = detail::pack(k, G);
  check_budget(k, pf.ord + pg.ord);
  std::vector<double> qbuf(k.dim);
  const detail::PairCtx ctx =
      detail::build_ctx(k, pf.loc, pg.loc, pf.ord + pg.ord, qbuf.data());
  return detail::contract(ctx, pf, pg);
}

namespace {

Eigen::MatrixXd gram_impl(const KernelSpec& k,
                          const std::vector<DualFunctional>& phis,
                          bool parallel) {
  const int n = static_cast<int>(phis.size());
  if (n == 0) throw std::invalid_argument("gram: empty functional set");
  const std::vector<detail::Packed> ps = detail::pack_all(k, phis);
  const int maxord = max_pair_order(ps);
  check_budget(k, maxord);
  Eigen::MatrixXd K(n, n);

#pragma omp parallel if (parallel)
  {
    std::vector<double> qbuf(k.dim);
#pragma omp for schedule(dynamic, 8)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const detail::PairCtx ctx = detail::build_ctx(
            k, ps[i].loc, ps[j].loc, ps[i].ord + ps[j].ord, qbuf.data());
        K(i, j) = detail::contract(ctx, ps[i], ps[j]);
      }
  }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) K(j, i) = K(i, j);
  return K;
}

}  // namespace

Eigen::MatrixXd gram(const KernelSpec& k,
                     const std::vector<DualFunctional>& phis) {
  return gram_impl(k, phis, true);
}

Eigen::MatrixXd gram_serial(const KernelSpec& k,
                            const std::vector<DualFunctional>& phis) {
  return gram_impl(k, phis, false);
}

Eigen::MatrixXd functional_matrix(const KernelSpec& k,
                                  const std::vector<DualFunctional>& rows,
                                  const std::vector<DualFunctional>& cols) {
  const int nr = static_cast<int>(rows.size());
  const int nc = static_cast<int>(cols.size());
  if (nr == 0 || nc == 0)
    throw std::invalid_argument("functional_matrix: empty functional set");
  const std::vector<detail::Packed> pr = detail::pack_all(k, rows);
  const std::vector<detail::Packed> pc = detail::pack_all(k, cols);
  int mr = 0, mc = 0;
  for (const auto& p : pr) mr = std::max(mr, p.ord);
  for (const auto& p : pc) mc = std::max(mc, p.ord);
  check_budget(k, mr + mc);
  Eigen::MatrixXd A(nr, nc);

#pragma omp parallel
  {
    std::vector<double> qbuf(k.dim);
#pragma omp for schedule(dynamic, 8)
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nc; ++j) {
        const detail::PairCtx ctx = detail::build_ctx(
            k, pr[i].loc, pc[j].loc, pr[i].ord + pc[j].ord, qbuf.data());
        A(i, j) = detail::contract(ctx, pr[i], pc[j]);
      }
  }
  return A;
}

namespace {

Eigen::MatrixXd cross_matrix_impl(const KernelSpec& k,
                                  const Eigen::MatrixXd& pts,
                                  const std::vector<DualFunctional>& phis,
                                  bool parallel) {
  if (pts.cols() != k.dim)
    throw std::invalid_argument("cross_matrix: point dimension mismatch");
  const int np = static_cast<int>(pts.rows());
  const int n = static_cast<int>(phis.size());
  if (n == 0) throw std::invalid_argument("cross_matrix: empty functional set");
  const std::vector<detail::Packed> ps = detail::pack_all(k, phis);
  int mo = 0;
  for (const auto& p : ps) mo = std::max(mo, p.ord);
  check_budget(k, mo);

  detail::Packed pe;  // delta_x, location rebound per row
  pe.c0 = 1.0;
  pe.has_id = true;
  Eigen::MatrixXd A(np, n);

#pragma omp parallel if (parallel) firstprivate(pe)
  {
    std::vector<double> qbuf(k.dim);
    Eigen::VectorXd x(k.dim);
#pragma omp for schedule(static)
    for (int i = 0; i < np; ++i) {
      x = pts.row(i).transpose();
      pe.loc = x.data();
      for (int j = 0; j < n; ++j) {
        const detail::PairCtx ctx =
            detail::build_ctx(k, pe.loc, ps[j].loc, ps[j].ord, qbuf.data());
        A(i, j) = detail::contract(ctx, pe, ps[j]);
      }
    }
  }
  return A;
}

}  // namespace

Eigen::MatrixXd cross_matrix(const KernelSpec& k, const Eigen::MatrixXd& pts,
                             const std::vector<DualFunctional>& phis) {
  return cross_matrix_impl(k, pts, phis, true);
}

Eigen::MatrixXd cross_matrix_serial(const KernelSpec& k,
                                    const Eigen::MatrixXd& pts,
                                    const std::vector<DualFunctional>& phis) {
  return cross_matrix_impl(k, pts, phis, false);
}

Eigen::VectorXd cross_row(const KernelSpec& k, const Point& x,
                          const std::vector<DualFunctional>& phis) {
  Eigen::MatrixXd pts(1, k.dim);
  pts.row(0) = x.transpose();
  return cross_matrix_impl(k, pts, phis, false).row(0).transpose();
}

void eval_with_gradient(const KernelSpec& k, const Point& x,
                        const std::vector<DualFunctional>& phis,
                        const Eigen::VectorXd& coeffs, double* value,
                        Eigen::VectorXd* grad) {
  if (static_cast<int>(phis.size()) != coeffs.size())
    throw std::invalid_argument("eval_with_gradient: coefficient size mismatch");
  if (x.size() != k.dim)
    throw std::invalid_argument("eval_with_gradient: point dimension mismatch");
  const std::vector<detail::Packed> ps = detail::pack_all(k, phis);
  int mo = 0;
  for (const auto& p : ps) mo = std::max(mo, p.ord);
  check_budget(k, mo + 1);

  std::vector<double> qbuf(k.dim);
  double val = 0.0;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(k.dim);
  for (size_t j = 0; j < ps.size(); ++j) {
    const detail::PairCtx ctx =
        detail::build_ctx(k, x.data(), ps[j].loc, ps[j].ord + 1, qbuf.data());
    detail::accumulate_value_grad(ctx, ps[j], coeffs(static_cast<int>(j)), &val,
                                  g.data());
  }
  *value = val;
  if (grad) *grad = g;
}

}  // namespace kolloc
