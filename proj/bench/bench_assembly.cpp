#include "kolloc/kernels.hpp"
#include "kolloc/problems.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace kolloc;

namespace {

template <class Body>
double best_seconds(Body&& body, int reps) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double par, double ser, double max_diff) {
  std::printf("%-16s %10.3fs %10.3fs %8.2fx %12.3e\n", name, par, ser,
              ser / par, max_diff);
}

}  // namespace

int main() {
  const int d = 3;
  const int M_interior = 800;
  const int M_boundary = 160;
  const int reps = 3;

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled at build time\n");
#endif

  PdeProblem prob = make_nonlinear_elliptic(d, 1.0);
  KernelSpec kern = KernelSpec::matern(d, 3.5, 0.25 * std::sqrt(double(d)));
  CollocationSet colloc =
      sample_collocation(prob.domain, M_interior, M_boundary, 7);

  OperatorValues zero;
  zero.interior = Eigen::MatrixXd::Zero(
      M_interior, Eigen::Index(prob.interior_ops.size()));
  zero.boundary = Eigen::MatrixXd::Zero(
      M_boundary, Eigen::Index(prob.boundary_ops.size()));
  LinearizationSystem sys = linearize(prob, colloc, zero);

  std::printf(
      "%zu functionals (%d interior + %d boundary), matern nu=7/2, d=%d, "
      "best of %d runs\n\n",
      sys.functionals.size(), M_interior, M_boundary, d, reps);
  std::printf("%-16s %11s %11s %9s %12s\n", "assembly", "parallel", "serial",
              "speedup", "max |diff|");

  Eigen::MatrixXd G = gram(kern, sys.functionals);
  Eigen::MatrixXd Gs = gram_serial(kern, sys.functionals);
  const double g_par = best_seconds([&] { G = gram(kern, sys.functionals); },
                                    reps);
  const double g_ser =
      best_seconds([&] { Gs = gram_serial(kern, sys.functionals); }, reps);
  report("gram", g_par, g_ser, (G - Gs).cwiseAbs().maxCoeff());

  const Eigen::MatrixXd pts = sample_interior(prob.domain, 2000, 11);
  Eigen::MatrixXd C = cross_matrix(kern, pts, sys.functionals);
  Eigen::MatrixXd Cs = cross_matrix_serial(kern, pts, sys.functionals);
  const double c_par = best_seconds(
      [&] { C = cross_matrix(kern, pts, sys.functionals); }, reps);
  const double c_ser = best_seconds(
      [&] { Cs = cross_matrix_serial(kern, pts, sys.functionals); }, reps);
  report("cross_matrix", c_par, c_ser, (C - Cs).cwiseAbs().maxCoeff());

  const int probes = 200000;
  double fd = fill_distance_estimate(colloc.interior_points, prob.domain,
                                     probes, 13);
  double fds = fill_distance_estimate_serial(colloc.interior_points,
                                             prob.domain, probes, 13);
  const double f_par = best_seconds(
      [&] {
        fd = fill_distance_estimate(colloc.interior_points, prob.domain,
                                    probes, 13);
      },
      reps);
  const double f_ser = best_seconds(
      [&] {
        fds = fill_distance_estimate_serial(colloc.interior_points,
                                            prob.domain, probes, 13);
      },
      reps);
  report("fill_distance", f_par, f_ser, std::abs(fd - fds));

  return 0;
}
