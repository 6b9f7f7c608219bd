#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kolloc/harness.hpp"

#include "oracles.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

using namespace kolloc;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(bool(in));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("kolloc_harness_" + tag);
  std::filesystem::remove_all(dir);
  return dir.string();
}

const DimensionFit& fit_for(const ConvergenceReport& rep,
                            const std::string& label, int d) {
  for (const DimensionFit& f : rep.fits)
    if (f.label == label && f.d == d) return f;
  REQUIRE(false);
  return rep.fits.front();
}

}  // namespace

TEST_CASE("fit_slope recovers exact power laws") {
  std::vector<double> xs = {1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<double> ones(xs.size(), 3.7);

  SlopeFit linear = fit_slope(xs, xs);
  CHECK(linear.slope == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(linear.std_error == doctest::Approx(0.0).epsilon(1e-12));

  SlopeFit flat = fit_slope(xs, ones);
  CHECK(flat.slope == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(std::exp(flat.intercept) == doctest::Approx(3.7).epsilon(1e-14));
}

TEST_CASE("fit_slope matches a hand-computed least squares line") {
  // log points (0,0), (1,3), (2,5): slope 5/2, intercept 1/6,
  // SSR 1/6, slope standard error sqrt(1/12).
  std::vector<double> xs = {1.0, std::exp(1.0), std::exp(2.0)};
  std::vector<double> ys = {1.0, std::exp(3.0), std::exp(5.0)};
  SlopeFit fit = fit_slope(xs, ys);
  CHECK(fit.slope == doctest::Approx(2.5).epsilon(1e-13));
  CHECK(fit.intercept == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(fit.std_error == doctest::Approx(std::sqrt(1.0 / 12.0)).epsilon(1e-12));
  CHECK(fit.points == 3);
}

TEST_CASE("fit_slope survives multiplicative noise") {
  std::vector<double> xs, ys;
  double wiggle[8] = {0.01, -0.008, 0.006, -0.01, 0.009, -0.004, 0.01, -0.007};
  for (int i = 0; i < 8; ++i) {
    double x = std::pow(2.0, i);
    xs.push_back(x);
    ys.push_back(3.0 * std::pow(x, -2.5) * (1.0 + wiggle[i]));
  }
  SlopeFit fit = fit_slope(xs, ys);
  CHECK(std::abs(fit.slope - (-2.5)) < 0.1);
  CHECK(fit.std_error < 0.05);
}

TEST_CASE("fit_slope rejects bad input") {
  std::vector<double> xs = {1.0, 2.0};
  CHECK_THROWS_AS(fit_slope({1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope(xs, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope({1.0, -2.0}, xs), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope(xs, {0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope({2.0, 2.0}, xs), std::invalid_argument);
}

TEST_CASE("median handles odd, even, and empty inputs") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(median({7.0}) == 7.0);
  CHECK_THROWS_AS(median({}), std::invalid_argument);
}

TEST_CASE("fit_report reproduces synthetic power-law rows exactly") {
  std::vector<ConvergenceCell> rows;
  for (int M : {250, 500, 1000, 2000}) {
    for (int r = 0; r < 3; ++r) {
      ConvergenceCell c;
      c.d = 2;
      c.M = M;
      c.seed = r;
      c.l2_error = 3.0 * std::pow(double(M), -1.5);
      c.node_error = 0.0;
      c.fill_distance = std::pow(double(M), -0.5);
      rows.push_back(c);
    }
  }
  // A failed cell with absurd numbers must not perturb the fit.
  ConvergenceCell bad = rows.front();
  bad.l2_error = 1e9;
  bad.status = "cholesky failed";
  rows.push_back(bad);

  auto fits = fit_report(rows);
  REQUIRE(fits.size() == 1);
  CHECK(std::abs(fits[0].error_vs_M.slope - (-1.5)) < 1e-12);
  CHECK(std::abs(fits[0].fill_vs_M.slope - (-0.5)) < 1e-12);
  CHECK(std::abs(fits[0].error_vs_h.slope - 3.0) < 1e-12);
  CHECK(fits[0].counts == std::vector<int>{250, 500, 1000, 2000});
}

TEST_CASE("fit_report skips error fits when no errors were measured") {
  std::vector<ConvergenceCell> rows;
  for (int M : {100, 200}) {
    ConvergenceCell c;
    c.d = 1;
    c.M = M;
    c.fill_distance = 1.0 / M;
    rows.push_back(c);
  }
  auto fits = fit_report(rows);
  REQUIRE(fits.size() == 1);
  CHECK(fits[0].fill_vs_M.points == 2);
  CHECK(fits[0].error_vs_M.points == 0);
  CHECK(fits[0].error_vs_h.points == 0);
}

TEST_CASE("reference solver is exact for constant coefficients") {
  Eigen::VectorXd theta(2);
  theta << -1.0, 0.0;  // A = 2 + theta_0 = 1
  Eigen::VectorXd u = reference_darcy_1d(theta, 1024, 2.0);
  REQUIRE(u.size() == 1025);
  CHECK(u(0) == 0.0);
  CHECK(u(1024) == 0.0);
  double worst = 0.0;
  for (int i = 0; i <= 1024; ++i) {
    double x = i / 1024.0;
    worst = std::max(worst, std::abs(u(i) - (x - x * x * x) / 6.0));
  }
  CHECK(worst < 1e-6);

  theta << 0.0, 0.0;  // A = 2
  Eigen::VectorXd u2 = reference_darcy_1d(theta, 64, 2.0);
  CHECK(u2(32) == doctest::Approx((0.5 - 0.125) / 12.0).epsilon(1e-12));
}

TEST_CASE("reference solver converges at second order") {
  testing::Rng rng(42);
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXd theta(4);
    for (int i = 0; i < 4; ++i) theta(i) = rng.uniform(0.0, 1.0);
    Eigen::VectorXd ua = reference_darcy_1d(theta, 128, 2.0);
    Eigen::VectorXd ub = reference_darcy_1d(theta, 256, 2.0);
    Eigen::VectorXd uc = reference_darcy_1d(theta, 512, 2.0);
    // Successive grid-doubling differences contract by the order: for an
    // O(h^2) scheme, |u_h - u_{h/2}| / |u_{h/2} - u_{h/4}| -> 4.
    double da = 0.0, db = 0.0;
    for (int i = 0; i <= 128; ++i) {
      da += std::pow(ua(i) - ub(2 * i), 2);
      db += std::pow(ub(2 * i) - uc(4 * i), 2);
    }
    double ratio = std::sqrt(da / db);
    CHECK(ratio > 3.6);
    CHECK(ratio < 4.4);
  }
}

TEST_CASE("reference evaluation is self-consistent across grids") {
  testing::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd theta(3);
    for (int i = 0; i < 3; ++i) theta(i) = rng.uniform(0.0, 1.0);
    double x = rng.uniform(0.0, 1.0);
    double coarse = reference_darcy_eval(theta, x, 512, 2.0);
    double fine = reference_darcy_eval(theta, x, 1024, 2.0);
    CHECK(std::abs(coarse - fine) < 1e-5);
  }
  CHECK_THROWS_AS(reference_darcy_1d(Eigen::VectorXd::Ones(2), 8, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(reference_darcy_1d(Eigen::VectorXd(), 64, 2.0),
                  std::invalid_argument);
}

TEST_CASE("experiment config json round trip and hashing") {
  ExperimentConfig cfg;
  cfg.problem = "darcy_tanh";
  cfg.beta = 2.5;
  cfg.kernel = "gaussian";
  cfg.dims = {2, 3, 4};
  cfg.interior_counts = {100, 200};
  cfg.boundary_ratio = 10;
  cfg.base_seed = 99;
  cfg.solver.variant = SolverVariant::gn_relaxed;
  cfg.solver.beta_relax = 1e-4;
  cfg.output_dir = "/tmp/somewhere";

  ExperimentConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.problem == cfg.problem);
  CHECK(back.beta == cfg.beta);
  CHECK(back.kernel == cfg.kernel);
  CHECK(back.dims == cfg.dims);
  CHECK(back.interior_counts == cfg.interior_counts);
  CHECK(back.boundary_ratio == cfg.boundary_ratio);
  CHECK(back.base_seed == cfg.base_seed);
  CHECK(back.solver.variant == SolverVariant::gn_relaxed);
  CHECK(back.solver.beta_relax == cfg.solver.beta_relax);
  CHECK(back.output_dir == cfg.output_dir);
  CHECK(config_hash(back) == config_hash(cfg));

  back.beta = 2.6;
  CHECK(config_hash(back) != config_hash(cfg));

  // Partial configs keep defaults; malformed text is rejected.
  ExperimentConfig partial = config_from_json("{\"nu\": 4.5}");
  CHECK(partial.nu == 4.5);
  CHECK(partial.problem == ExperimentConfig{}.problem);
  CHECK_THROWS_AS(config_from_json("{nope"), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json("{\"solver\": {\"variant\": \"bogus\"}}"),
                  std::invalid_argument);
}

TEST_CASE("experiment builders validate their names") {
  ExperimentConfig cfg;
  CHECK(experiment_problem(cfg, 2).name == "nonlinear_elliptic");
  cfg.problem = "warp drive";
  CHECK_THROWS_AS(experiment_problem(cfg, 2), std::invalid_argument);
  cfg.kernel = "bessel";
  CHECK_THROWS_AS(experiment_kernel(cfg, 2), std::invalid_argument);

  ExperimentConfig bad;
  bad.dims = {};
  CHECK_THROWS_AS(run_filldist_study(bad), std::invalid_argument);
  bad = ExperimentConfig{};
  bad.boundary_ratio = 0;
  CHECK_THROWS_AS(run_filldist_study(bad), std::invalid_argument);
  bad = ExperimentConfig{};
  bad.interior_counts = {100, 0};
  CHECK_THROWS_AS(run_filldist_study(bad), std::invalid_argument);
}

TEST_CASE("parametric kernels differ only by the decay weights") {
  ExperimentConfig cfg;
  cfg.sigma_x = 0.3;
  cfg.sigma_theta = 0.8;
  cfg.k_decay = 2.0;
  const int p = 3;

  KernelSpec vanilla = param_vanilla_kernel(cfg, p);
  KernelSpec adapted = param_adapted_kernel(cfg, p);

  Point a = Point::Zero(p + 2), b = Point::Zero(p + 2);
  b(p + 1) = 0.7;  // move only the most strongly damped coordinate
  CHECK(eval(adapted, a, b) > eval(vanilla, a, b));
  b.setZero();
  b(0) = 0.2;  // spatial moves are weighted identically
  CHECK(eval(adapted, a, b) == doctest::Approx(eval(vanilla, a, b)).epsilon(1e-15));

  cfg.k_decay = 0.0;  // degenerate decay: the kernels coincide
  KernelSpec v0 = param_vanilla_kernel(cfg, p);
  KernelSpec a0 = param_adapted_kernel(cfg, p);
  testing::Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    Point x = rng.point(p + 2, -1.0, 1.0), y = rng.point(p + 2, -1.0, 1.0);
    CHECK(eval(v0, x, y) == eval(a0, x, y));
  }
}

TEST_CASE("convergence run recovers an interpolated field at the nodes") {
  ExperimentConfig cfg;
  cfg.problem = "interpolation";
  cfg.kernel = "matern";
  cfg.nu = 3.5;
  cfg.dims = {2};
  cfg.interior_counts = {120};
  cfg.replications = 2;
  cfg.test_points = 200;
  cfg.fill_probes = 500;
  cfg.base_seed = 5;

  ConvergenceReport rep = run_convergence(cfg);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.failed_cells == 0);
  for (const ConvergenceCell& c : rep.rows) {
    CHECK(c.ok());
    CHECK(c.node_error < 1e-6);
    CHECK(c.l2_error < 0.5);  // off-node error is approximation, not recovery
    CHECK(c.fill_distance > 0.0);
  }
}

TEST_CASE("convergence run improves with the ladder and writes artifacts") {
  ExperimentConfig cfg;
  cfg.problem = "elliptic";
  cfg.beta = 1.0;
  cfg.kernel = "matern";
  cfg.nu = 3.5;
  cfg.sigma_scale = 0.25;
  cfg.dims = {2};
  cfg.interior_counts = {150, 300, 600};
  cfg.boundary_ratio = 5;
  cfg.replications = 3;
  cfg.test_points = 500;
  cfg.fill_probes = 2000;
  cfg.base_seed = 11;
  cfg.output_dir = temp_dir("conv");

  ConvergenceReport rep = run_convergence(cfg);
  REQUIRE(rep.rows.size() == 9);
  CHECK(rep.failed_cells == 0);

  const DimensionFit& fit = fit_for(rep, "nonlinear_elliptic", 2);
  REQUIRE(fit.counts.size() == 3);
  CHECK(fit.median_error[0] > fit.median_error[1]);
  CHECK(fit.median_error[1] > fit.median_error[2]);
  CHECK(fit.error_vs_M.slope < -0.5);
  CHECK(fit.fill_vs_M.slope < 0.0);
  CHECK(fit.error_vs_h.slope > 0.0);

  // Artifacts: rows round-trip through the CSV, and refitting the parsed
  // rows reproduces every reported slope bit for bit.
  auto dir = std::filesystem::path(cfg.output_dir);
  REQUIRE(std::filesystem::exists(dir / "report.csv"));
  REQUIRE(std::filesystem::exists(dir / "slopes.csv"));
  REQUIRE(std::filesystem::exists(dir / "manifest.json"));

  auto rows = read_report_csv((dir / "report.csv").string());
  REQUIRE(rows.size() == rep.rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].label == rep.rows[i].label);
    CHECK(rows[i].d == rep.rows[i].d);
    CHECK(rows[i].M == rep.rows[i].M);
    CHECK(rows[i].seed == rep.rows[i].seed);
    CHECK(rows[i].l2_error == rep.rows[i].l2_error);
    CHECK(rows[i].fill_distance == rep.rows[i].fill_distance);
    CHECK(rows[i].status == rep.rows[i].status);
  }
  auto refits = fit_report(rows);
  REQUIRE(refits.size() == rep.fits.size());
  CHECK(refits[0].error_vs_M.slope == rep.fits[0].error_vs_M.slope);
  CHECK(refits[0].error_vs_h.slope == rep.fits[0].error_vs_h.slope);
  CHECK(refits[0].fill_vs_M.slope == rep.fits[0].fill_vs_M.slope);
  CHECK(refits[0].error_vs_M.std_error == rep.fits[0].error_vs_M.std_error);

  const std::string manifest = slurp((dir / "manifest.json").string());
  CHECK(manifest.find("config_hash") != std::string::npos);
  CHECK(manifest.find("runtime_seconds") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("identical configs reproduce the csv artifacts byte for byte") {
  ExperimentConfig cfg;
  cfg.problem = "interpolation";
  cfg.kernel = "matern";
  cfg.dims = {2};
  cfg.interior_counts = {60, 120};
  cfg.replications = 2;
  cfg.test_points = 100;
  cfg.fill_probes = 300;
  cfg.base_seed = 21;

  cfg.output_dir = temp_dir("det_a");
  run_convergence(cfg);
  std::string report_a = slurp(cfg.output_dir + "/report.csv");
  std::string slopes_a = slurp(cfg.output_dir + "/slopes.csv");
  std::filesystem::remove_all(cfg.output_dir);

  cfg.output_dir = temp_dir("det_b");
  run_convergence(cfg);
  CHECK(report_a == slurp(cfg.output_dir + "/report.csv"));
  CHECK(slopes_a == slurp(cfg.output_dir + "/slopes.csv"));
  std::filesystem::remove_all(cfg.output_dir);
}

TEST_CASE("failed cells survive the csv and manifest round trip") {
  ConvergenceReport rep;
  rep.config.output_dir = temp_dir("fail");
  ConvergenceCell good;
  good.d = 2;
  good.M = 100;
  good.seed = 1;
  good.l2_error = 0.25;
  good.node_error = 0.003;
  good.fill_distance = 0.2;
  ConvergenceCell bad = good;
  bad.seed = 2;
  bad.l2_error = std::numeric_limits<double>::quiet_NaN();
  bad.node_error = std::numeric_limits<double>::quiet_NaN();
  bad.status = "cholesky failed; nugget escalation exhausted";
  rep.rows = {good, bad};
  rep.failed_cells = 1;

  std::filesystem::create_directories(rep.config.output_dir);
  auto dir = std::filesystem::path(rep.config.output_dir);
  write_report_csv((dir / "report.csv").string(), rep);
  write_manifest((dir / "manifest.json").string(), rep);

  auto rows = read_report_csv((dir / "report.csv").string());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].ok());
  CHECK(!rows[1].ok());
  CHECK(rows[1].status == bad.status);
  CHECK(std::isnan(rows[1].l2_error));
  // One surviving ladder count: the group keeps its medians, fits nothing.
  auto refits = fit_report(rows);
  REQUIRE(refits.size() == 1);
  CHECK(refits[0].counts == std::vector<int>{100});
  CHECK(refits[0].median_error[0] == 0.25);
  CHECK(refits[0].error_vs_M.points == 0);
  CHECK(refits[0].fill_vs_M.points == 0);

  const std::string manifest = slurp((dir / "manifest.json").string());
  CHECK(manifest.find("cholesky failed") != std::string::npos);
  CHECK(manifest.find("\"failed_cells\": 1") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("parametric study pairs vanilla and adapted kernels") {
  ExperimentConfig cfg;
  cfg.k_decay = 2.0;
  cfg.sigma_x = 0.2;
  cfg.sigma_theta = 1.0;
  cfg.dims = {2};
  cfg.interior_counts = {100, 200};
  cfg.boundary_ratio = 10;
  cfg.replications = 2;
  cfg.test_points = 300;
  cfg.fill_probes = 500;
  cfg.base_seed = 17;

  ConvergenceReport rep = run_param_darcy(cfg);
  REQUIRE(rep.rows.size() == 8);  // 2 counts x 2 reps x 2 kernels
  CHECK(rep.failed_cells == 0);
  for (const ConvergenceCell& c : rep.rows) {
    CHECK(c.ok());
    CHECK(c.l2_error < 0.1);
  }
  // Paired rows share the draw, so everything but the solve matches.
  for (size_t i = 0; i + 1 < rep.rows.size(); i += 2) {
    CHECK(rep.rows[i].label == "vanilla");
    CHECK(rep.rows[i + 1].label == "adapted");
    CHECK(rep.rows[i].seed == rep.rows[i + 1].seed);
    CHECK(rep.rows[i].fill_distance == rep.rows[i + 1].fill_distance);
  }
  CHECK(fit_for(rep, "vanilla", 2).counts.size() == 2);
  CHECK(fit_for(rep, "adapted", 2).counts.size() == 2);
}

TEST_CASE("degenerate decay makes the parametric kernels coincide") {
  ExperimentConfig cfg;
  cfg.k_decay = 0.0;
  cfg.dims = {2};
  cfg.interior_counts = {80};
  cfg.boundary_ratio = 10;
  cfg.replications = 2;
  cfg.test_points = 150;
  cfg.fill_probes = 300;
  cfg.base_seed = 29;

  ConvergenceReport rep = run_param_darcy(cfg);
  REQUIRE(rep.rows.size() == 4);
  for (size_t i = 0; i + 1 < rep.rows.size(); i += 2)
    CHECK(rep.rows[i].l2_error == rep.rows[i + 1].l2_error);
}

TEST_CASE("fill-distance study recovers the one-dimensional rate") {
  ExperimentConfig cfg;
  cfg.dims = {1};
  cfg.interior_counts = {512, 1024, 2048, 4096, 8192};
  cfg.replications = 5;
  cfg.fill_probes = 4000;
  cfg.base_seed = 33;

  ConvergenceReport rep = run_filldist_study(cfg);
  REQUIRE(rep.rows.size() == 25);
  for (const ConvergenceCell& c : rep.rows) {
    CHECK(c.ok());
    CHECK(std::isnan(c.l2_error));
    CHECK(c.fill_distance > 0.0);
  }
  const DimensionFit& fit = fit_for(rep, "filldist", 1);
  CHECK(fit.error_vs_M.points == 0);
  CHECK(std::abs(fit.fill_vs_M.slope - (-1.0)) < 0.15);
}
