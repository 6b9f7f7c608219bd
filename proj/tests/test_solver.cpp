#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kolloc/solver.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

using namespace kolloc;
using namespace kolloc::testing;

namespace {

std::vector<DualFunctional> identity_functionals(const Eigen::MatrixXd& pts) {
  std::vector<DualFunctional> phis;
  for (int m = 0; m < pts.rows(); ++m)
    phis.push_back(point_eval(pts.row(m).transpose()));
  return phis;
}

double rms_error(const Solution& sol, const ScalarField& truth,
                 const Eigen::MatrixXd& pts) {
  Eigen::VectorXd u = evaluate(sol, pts);
  double acc = 0.0;
  for (int m = 0; m < pts.rows(); ++m) {
    double e = u(m) - truth(pts.row(m).transpose());
    acc += e * e;
  }
  return std::sqrt(acc / pts.rows());
}

OperatorValues values_at_collocation(const PdeProblem& prob,
                                     const CollocationSet& colloc,
                                     const Solution& sol) {
  auto meas = measurement_functionals(prob, colloc);
  Eigen::VectorXd flat =
      functional_matrix(sol.kernel, meas, sol.functionals) * sol.coefficients;
  return unpack_op_values(prob, colloc, flat);
}

}  // namespace

TEST_CASE("single constraint interpolation and norm") {
  auto k = KernelSpec::gaussian(2, 1.0);
  Point s(2);
  s << 0.3, -0.4;
  Eigen::VectorXd y(1);
  y << 2.0;
  auto sol = solve_min_norm(k, {point_eval(s)}, y, 1e-10);
  CHECK(sol.nugget_used == 1e-10);

  Eigen::MatrixXd at(1, 2);
  at << 0.3, -0.4;
  CHECK(std::abs(evaluate(sol, at)(0) - 2.0) < 1e-8);
  CHECK(rkhs_norm(sol) ==
        doctest::Approx(2.0 / std::sqrt(1.0 + 1e-10)).epsilon(1e-12));

  Eigen::MatrixXd far(1, 2);
  far << 40.0, 40.0;
  CHECK(std::abs(evaluate(sol, far)(0)) < 1e-10);

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  auto sol0 = solve_min_norm(k, {point_eval(s)}, zero, 1e-10);
  CHECK(rkhs_norm(sol0) == 0.0);
}

TEST_CASE("evaluate matches a dense reassembly") {
  Rng rng(8);
  auto k = KernelSpec::matern(2, 3.5, 0.9);
  Eigen::MatrixXd centers(6, 2);
  for (int m = 0; m < 6; ++m)
    centers.row(m) = rng.point(2, 0.0, 1.0).transpose();
  auto phis = identity_functionals(centers);
  Eigen::VectorXd y(6);
  for (int m = 0; m < 6; ++m) y(m) = rng.uniform(-1.0, 1.0);
  auto sol = solve_min_norm(k, phis, y, 1e-10);

  Eigen::MatrixXd test(10, 2);
  for (int m = 0; m < 10; ++m)
    test.row(m) = rng.point(2, 0.0, 1.0).transpose();
  Eigen::VectorXd got = evaluate(sol, test);
  for (int m = 0; m < 10; ++m) {
    double direct = 0.0;
    for (int j = 0; j < 6; ++j)
      direct += sol.coefficients(j) *
                eval_pair(k, point_eval(test.row(m).transpose()), phis[j]);
    CHECK(rel_err(got(m), direct, 1e-8) < 1e-13);
  }
}

TEST_CASE("rkhs norm agrees with a dense inverse") {
  Rng rng(9);
  auto k = KernelSpec::inverse_quadratic(3, 0.8);
  Eigen::MatrixXd centers(5, 3);
  for (int m = 0; m < 5; ++m)
    centers.row(m) = rng.point(3, 0.0, 1.0).transpose();
  auto phis = identity_functionals(centers);
  Eigen::VectorXd y(5);
  for (int m = 0; m < 5; ++m) y(m) = rng.uniform(-2.0, 2.0);
  auto sol = solve_min_norm(k, phis, y, 1e-10);

  Eigen::MatrixXd K = gram(k, phis);
  Eigen::MatrixXd Kn = K;
  Kn.diagonal() += 1e-10 * K.diagonal();
  double direct = std::sqrt(y.dot(Kn.inverse() * y));
  CHECK(rel_err(rkhs_norm(sol), direct, 1e-8) < 1e-10);
}

TEST_CASE("interpolants never exceed the generator norm") {
  Rng rng(2025);
  int families = 0;
  for (const auto& fam :
       {KernelSpec::gaussian(2, 1.0), KernelSpec::matern(2, 2.5, 1.0),
        KernelSpec::matern(2, 3.5, 1.0), KernelSpec::matern(2, 4.5, 1.0),
        KernelSpec::inverse_quadratic(2, 1.0)}) {
    ++families;
    for (int trial = 0; trial < 20; ++trial) {
      int M = 10 + rng.index(16);
      int E = 3 + rng.index(6);
      Eigen::MatrixXd centers(M + E, 2);
      for (int m = 0; m < M + E; ++m)
        centers.row(m) = rng.point(2, 0.0, 1.0).transpose();
      Eigen::VectorXd c(M + E);
      for (int m = 0; m < M + E; ++m) c(m) = rng.uniform(-1.0, 1.0);

      auto all_phis = identity_functionals(centers);
      Eigen::MatrixXd G = gram(fam, all_phis);
      double star_norm = std::sqrt(std::max(0.0, c.dot(G * c)));
      Eigen::VectorXd y = (G * c).head(M);

      auto sub = identity_functionals(centers.topRows(M));
      auto sol = solve_min_norm(fam, sub, y, 1e-10);
      CHECK(rkhs_norm(sol) <= star_norm + 1e-6);
    }
  }
  CHECK(families == 5);
}

TEST_CASE("lto solves a linear problem in one iteration") {
  auto prob = make_parametric_darcy(2, 3.0);
  auto colloc = sample_collocation(prob.domain, 80, 20, 300);
  auto k = KernelSpec::gaussian(prob.domain.dim, 0.5);

  SolverConfig one, two;
  one.max_iters = 1;
  two.max_iters = 2;
  auto sol1 = solve_lto(prob, colloc, k, one);
  auto sol2 = solve_lto(prob, colloc, k, two);

  auto test = sample_interior(prob.domain, 50, 301);
  Eigen::VectorXd u1 = evaluate(sol1, test);
  Eigen::VectorXd u2 = evaluate(sol2, test);
  CHECK((u1 - u2).lpNorm<Eigen::Infinity>() <=
        1e-10 * (1.0 + u1.lpNorm<Eigen::Infinity>()));

  // Early stop on stagnation.
  SolverConfig tol;
  tol.max_iters = 5;
  tol.convergence_tol = 1e-9;
  auto sol_tol = solve_lto(prob, colloc, k, tol);
  CHECK(sol_tol.iterate_history.size() == 2);

  // Linear constraint satisfaction at the collocation set.
  auto vals = values_at_collocation(prob, colloc, sol2);
  CHECK(residual(prob, colloc, vals).lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("lto drives the elliptic residual down") {
  auto prob = make_nonlinear_elliptic(2, 1.0);
  auto colloc = sample_collocation(prob.domain, 1000, 200, 310);
  auto k = KernelSpec::matern(2, 3.5, 0.25 * std::sqrt(2.0));
  SolverConfig cfg;
  auto sol = solve_lto(prob, colloc, k, cfg);
  // Quadratic tail: several refinements happen before any early stop.
  REQUIRE(sol.iterate_history.size() >= 4);

  auto vals = values_at_collocation(prob, colloc, sol);
  Eigen::VectorXd r = residual(prob, colloc, vals);
  CHECK(r.head(1000).lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("finer collocation improves the elliptic error") {
  auto prob = make_nonlinear_elliptic(2, 1.0);
  auto k = KernelSpec::matern(2, 3.5, 0.25 * std::sqrt(2.0));
  SolverConfig cfg;
  auto test = sample_interior(prob.domain, 400, 999);

  auto coarse = sample_collocation(prob.domain, 150, 30, 320);
  auto fine = sample_collocation(prob.domain, 600, 120, 321);
  double e_coarse =
      rms_error(solve_lto(prob, coarse, k, cfg), prob.true_solution, test);
  double e_fine =
      rms_error(solve_lto(prob, fine, k, cfg), prob.true_solution, test);
  CHECK(e_fine < e_coarse);
}

TEST_CASE("relaxed gauss-newton tracks lto on a linear problem") {
  auto prob = make_parametric_darcy(2, 3.0);
  auto colloc = sample_collocation(prob.domain, 80, 20, 330);
  auto k = KernelSpec::gaussian(prob.domain.dim, 0.5);

  SolverConfig cfg;
  auto lto_sol = solve_lto(prob, colloc, k, cfg);
  SolverConfig gn = cfg;
  gn.variant = SolverVariant::gn_relaxed;
  gn.beta_relax = 1e-6;
  auto gn_sol = solve_gn_relaxed(prob, colloc, k, gn);

  auto test = sample_interior(prob.domain, 100, 331);
  Eigen::VectorXd a = evaluate(lto_sol, test);
  Eigen::VectorXd b = evaluate(gn_sol, test);
  CHECK((a - b).lpNorm<Eigen::Infinity>() <=
        1e-4 * (1.0 + a.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("relaxed gauss-newton residual decreases on the cubic problem") {
  auto prob = make_nonlinear_elliptic(2, 1.0);
  auto colloc = sample_collocation(prob.domain, 150, 30, 340);
  auto k = KernelSpec::matern(2, 3.5, 0.4);
  SolverConfig cfg;
  cfg.variant = SolverVariant::gn_relaxed;
  cfg.beta_relax = 1e-6;
  cfg.max_iters = 3;
  cfg.convergence_tol = 0.0;
  auto sol = solve_gn_relaxed(prob, colloc, k, cfg);
  REQUIRE(sol.iterate_history.size() == 3);
  CHECK(sol.iterate_history[1] <= sol.iterate_history[0]);
  CHECK(sol.iterate_history[2] <= sol.iterate_history[1]);
}

TEST_CASE("eliminated gauss-newton agrees with lto") {
  SolverConfig cfg;

  auto lin = make_parametric_darcy(2, 3.0);
  auto lin_colloc = sample_collocation(lin.domain, 60, 15, 350);
  auto lin_k = KernelSpec::gaussian(lin.domain.dim, 0.5);
  auto a = solve_lto(lin, lin_colloc, lin_k, cfg);
  SolverConfig el = cfg;
  el.variant = SolverVariant::gn_eliminate;
  auto b = solve_gn_eliminate(lin, lin_colloc, lin_k, el);
  auto lin_test = sample_interior(lin.domain, 60, 351);
  Eigen::VectorXd ua = evaluate(a, lin_test);
  Eigen::VectorXd ub = evaluate(b, lin_test);
  CHECK((ua - ub).lpNorm<Eigen::Infinity>() <=
        1e-6 * (1.0 + ua.lpNorm<Eigen::Infinity>()));

  auto ell = make_nonlinear_elliptic(2, 1.0);
  auto ell_colloc = sample_collocation(ell.domain, 120, 30, 352);
  auto ell_k = KernelSpec::matern(2, 3.5, 0.4);
  SolverConfig more = cfg;
  more.max_iters = 6;
  auto c = solve_lto(ell, ell_colloc, ell_k, more);
  SolverConfig more_el = more;
  more_el.variant = SolverVariant::gn_eliminate;
  auto d = solve_gn_eliminate(ell, ell_colloc, ell_k, more_el);
  auto ell_test = sample_interior(ell.domain, 60, 353);
  Eigen::VectorXd uc = evaluate(c, ell_test);
  Eigen::VectorXd ud = evaluate(d, ell_test);
  CHECK((uc - ud).lpNorm<Eigen::Infinity>() <=
        1e-4 * (1.0 + uc.lpNorm<Eigen::Infinity>()));

  auto noel = lin;
  noel.interior_lap_channel = -1;
  CHECK_THROWS_AS(solve_gn_eliminate(noel, lin_colloc, lin_k, el),
                  std::invalid_argument);
}

TEST_CASE("one-constraint elimination is the hand-built minimum norm") {
  auto prob = make_parametric_darcy(1, 3.0);
  CollocationSet colloc;
  colloc.interior_points.resize(1, prob.domain.dim);
  colloc.interior_points << 0.4, 0.3, 0.7;
  colloc.boundary_points.resize(0, prob.domain.dim);

  auto k = KernelSpec::gaussian(prob.domain.dim, 0.7);
  SolverConfig cfg;
  cfg.variant = SolverVariant::gn_eliminate;
  auto sol = solve_gn_eliminate(prob, colloc, k, cfg);

  Point s = colloc.interior_points.row(0).transpose();
  auto combined = combine({prob.interior_ops[0].coeff(s),
                           prob.interior_ops[1].coeff(s)},
                          {prob.interior_ops[0].mono,
                           prob.interior_ops[1].mono},
                          s);
  Eigen::VectorXd y(1);
  y << prob.f(s);
  auto direct = solve_min_norm(k, {combined}, y, 1e-10);

  auto test = sample_interior(prob.domain, 20, 361);
  Eigen::VectorXd a = evaluate(sol, test);
  Eigen::VectorXd b = evaluate(direct, test);
  CHECK((a - b).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("collocation order does not matter") {
  auto prob = make_nonlinear_elliptic(2, 1.0);
  auto colloc = sample_collocation(prob.domain, 60, 20, 370);
  CollocationSet flipped = colloc;
  flipped.interior_points = colloc.interior_points.colwise().reverse().eval();
  auto k = KernelSpec::matern(2, 4.5, 0.5);
  SolverConfig cfg;
  auto a = solve_lto(prob, colloc, k, cfg);
  auto b = solve_lto(prob, flipped, k, cfg);
  auto test = sample_interior(prob.domain, 20, 371);
  CHECK((evaluate(a, test) - evaluate(b, test)).lpNorm<Eigen::Infinity>() <
        1e-10);
}

TEST_CASE("three iterations never end worse than one") {
  SolverConfig cfg;
  cfg.max_iters = 3;
  cfg.convergence_tol = 0.0;
  auto k = KernelSpec::matern(2, 3.5, 0.4);
  for (auto* make : {&make_nonlinear_elliptic, &make_darcy_tanh}) {
    auto prob = make(2, 1.0);
    auto colloc = sample_collocation(prob.domain, 150, 30, 380);
    auto sol = solve_lto(prob, colloc, k, cfg);
    REQUIRE(sol.iterate_history.size() == 3);
    CHECK(sol.iterate_history[2] <= sol.iterate_history[0]);
  }
}

TEST_CASE("dispatch routes by variant") {
  auto prob = make_parametric_darcy(1, 3.0);
  auto colloc = sample_collocation(prob.domain, 30, 10, 390);
  auto k = KernelSpec::gaussian(prob.domain.dim, 0.6);
  SolverConfig cfg;
  cfg.variant = SolverVariant::gn_relaxed;
  auto via_dispatch = solve(prob, colloc, k, cfg);
  auto direct = solve_gn_relaxed(prob, colloc, k, cfg);
  CHECK((via_dispatch.coefficients - direct.coefficients).norm() == 0.0);

  Eigen::VectorXd bad_y(3);
  bad_y << 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(
      solve_min_norm(k, identity_functionals(colloc.interior_points), bad_y,
                     1e-10),
      std::invalid_argument);
  Eigen::VectorXd y1(30);
  y1.setOnes();
  CHECK_THROWS_AS(
      solve_min_norm(k, identity_functionals(colloc.interior_points), y1, 0.0),
      std::invalid_argument);
}
