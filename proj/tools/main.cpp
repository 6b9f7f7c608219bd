#include "kolloc/harness.hpp"
#include "kolloc/hjb.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace kolloc;

namespace {

ExperimentConfig load_config_arg(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) {
        std::fprintf(stderr, "cannot open config file %s\n", argv[i + 1]);
        std::exit(1);
      }
      std::stringstream ss;
      ss << in.rdbuf();
      return config_from_json(ss.str());
    }
  }
  return ExperimentConfig{};
}

void add_experiment_flags(CLI::App* cmd, ExperimentConfig& cfg,
                          std::string& variant) {
  cmd->add_option("--config", "JSON config file; flags override its values")
      ->expected(1);
  cmd->add_option("--problem", cfg.problem,
                  "elliptic | darcy_tanh | parametric_darcy | interpolation")
      ->capture_default_str();
  cmd->add_option("--beta", cfg.beta, "manufactured-solution frequency")
      ->capture_default_str();
  cmd->add_option("--k-decay", cfg.k_decay, "parametric coefficient decay")
      ->capture_default_str();
  cmd->add_option("--kernel", cfg.kernel,
                  "gaussian | matern | inverse_quadratic")
      ->capture_default_str();
  cmd->add_option("--nu", cfg.nu, "matern smoothness")->capture_default_str();
  cmd->add_option("--sigma-scale", cfg.sigma_scale,
                  "lengthscale = sigma-scale * sqrt(d)")
      ->capture_default_str();
  cmd->add_option("--sigma-x", cfg.sigma_x, "parametric spatial lengthscale")
      ->capture_default_str();
  cmd->add_option("--sigma-theta", cfg.sigma_theta,
                  "parametric base theta lengthscale")
      ->capture_default_str();
  cmd->add_option("--dims", cfg.dims, "dimension list (parameter counts p)")
      ->capture_default_str();
  cmd->add_option("--counts", cfg.interior_counts,
                  "interior collocation ladder")
      ->capture_default_str();
  cmd->add_option("--boundary-ratio", cfg.boundary_ratio,
                  "M_boundary = M_interior / ratio")
      ->capture_default_str();
  cmd->add_option("--reps", cfg.replications, "replications per cell")
      ->capture_default_str();
  cmd->add_option("--test-points", cfg.test_points, "test cloud size")
      ->capture_default_str();
  cmd->add_option("--fill-probes", cfg.fill_probes,
                  "fill-distance probe count")
      ->capture_default_str();
  cmd->add_option("--reference-grid", cfg.reference_grid,
                  "1-d reference grid resolution")
      ->capture_default_str();
  cmd->add_option("--seed", cfg.base_seed, "base seed")->capture_default_str();
  cmd->add_option("--out", cfg.output_dir, "output directory for CSV artifacts")
      ->capture_default_str();
  cmd->add_flag("--paper-scale", cfg.paper_scale,
                "use the paper-scale ladders unless overridden");

  cmd->add_option("--solver", variant, "lto | gn_relaxed | gn_eliminate")
      ->capture_default_str();
  cmd->add_option("--max-iters", cfg.solver.max_iters, "outer iterations")
      ->capture_default_str();
  cmd->add_option("--nugget", cfg.solver.nugget_eta, "relative nugget")
      ->capture_default_str();
  cmd->add_option("--tol", cfg.solver.convergence_tol,
                  "relative iterate-change stop; 0 runs all iterations")
      ->capture_default_str();
  cmd->add_option("--beta-relax", cfg.solver.beta_relax,
                  "relaxed Gauss-Newton penalty")
      ->capture_default_str();
}

void apply_paper_scale(const CLI::App* cmd, ExperimentConfig& cfg) {
  if (!cfg.paper_scale) return;
  if (!cmd->count("--counts")) cfg.interior_counts = {1000, 2000, 4000, 8000};
  if (!cmd->count("--dims")) cfg.dims = {2, 3, 4, 5, 6};
  if (!cmd->count("--reps")) cfg.replications = 10;
}

void print_fits(const ConvergenceReport& rep) {
  for (const DimensionFit& f : rep.fits) {
    std::printf("%s d=%d:\n", f.label.empty() ? "(study)" : f.label.c_str(),
                f.d);
    for (size_t i = 0; i < f.counts.size(); ++i)
      std::printf("  M=%-6d median_error=%-12.4e median_fill=%.4e\n",
                  f.counts[i], f.median_error[i], f.median_fill[i]);
    if (f.error_vs_M.points >= 2)
      std::printf("  error vs M: slope %+.3f (se %.3f)\n", f.error_vs_M.slope,
                  f.error_vs_M.std_error);
    if (f.error_vs_h.points >= 2)
      std::printf("  error vs h: slope %+.3f (se %.3f)\n", f.error_vs_h.slope,
                  f.error_vs_h.std_error);
    if (f.fill_vs_M.points >= 2)
      std::printf("  fill  vs M: slope %+.3f (se %.3f)\n", f.fill_vs_M.slope,
                  f.fill_vs_M.std_error);
  }
  if (rep.failed_cells)
    std::printf("failed cells: %d (see manifest)\n", rep.failed_cells);
  std::printf("wall time: %.1fs\n", rep.wall_seconds);
}

int finish(const ConvergenceReport& rep) {
  print_fits(rep);
  return rep.failed_cells ? 1 : 0;
}

int run_solve(const ExperimentConfig& cfg, int d, int M) {
  PdeProblem prob = experiment_problem(cfg, d);
  KernelSpec kern = cfg.problem == "parametric_darcy"
                        ? param_vanilla_kernel(cfg, d)
                        : experiment_kernel(cfg, prob.domain.dim);
  const int Mb = std::max(1, M / cfg.boundary_ratio);
  CollocationSet colloc =
      sample_collocation(prob.domain, M, Mb, cfg.base_seed);
  Solution sol = solve(prob, colloc, kern, cfg.solver);

  Eigen::MatrixXd test_pts =
      sample_interior(prob.domain, cfg.test_points, cfg.base_seed + 1);
  Eigen::VectorXd truth(test_pts.rows());
  if (cfg.problem == "parametric_darcy") {
    for (Eigen::Index i = 0; i < test_pts.rows(); ++i)
      truth(i) =
          reference_darcy_eval(test_pts.row(i).tail(d + 1).transpose(),
                               test_pts(i, 0), cfg.reference_grid, cfg.k_decay);
  } else {
    for (Eigen::Index i = 0; i < test_pts.rows(); ++i)
      truth(i) = prob.true_solution(test_pts.row(i).transpose());
  }
  const double err =
      std::sqrt((evaluate(sol, test_pts) - truth).squaredNorm() /
                double(test_pts.rows()));
  std::printf("problem %s d=%d M=%d: L2 test error %.6e\n",
              cfg.problem.c_str(), d, M, err);
  std::printf("outer residuals:");
  for (double r : sol.iterate_history) std::printf(" %.3e", r);
  std::printf("\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel collocation experiment driver"};
  app.require_subcommand(1);

  ExperimentConfig cfg = load_config_arg(argc, argv);
  std::string variant = solver_variant_name(cfg.solver.variant);

  CLI::App* solve_cmd =
      app.add_subcommand("solve", "solve one instance, print error/residual");
  int solve_d = 2, solve_M = 500;
  add_experiment_flags(solve_cmd, cfg, variant);
  solve_cmd->add_option("--d", solve_d, "dimension (parameter count p)")
      ->capture_default_str();
  solve_cmd->add_option("--M", solve_M, "interior points")
      ->capture_default_str();

  CLI::App* conv_cmd =
      app.add_subcommand("convergence", "manufactured-solution ladder study");
  add_experiment_flags(conv_cmd, cfg, variant);

  CLI::App* param_cmd = app.add_subcommand(
      "param-darcy", "vanilla vs adapted kernels on the parametric problem");
  add_experiment_flags(param_cmd, cfg, variant);

  CLI::App* fill_cmd =
      app.add_subcommand("filldist", "fill-distance scaling study");
  add_experiment_flags(fill_cmd, cfg, variant);

  CLI::App* hjb_cmd =
      app.add_subcommand("hjb", "backward SDE solve of the HJB equation");
  HjbConfig hjb;
  int cole_hopf_samples = 0;
  std::string hjb_out;
  hjb_cmd->add_option("--d", hjb.d, "dimension")->capture_default_str();
  hjb_cmd->add_option("--horizon", hjb.T, "terminal time")
      ->capture_default_str();
  hjb_cmd->add_option("--steps", hjb.n_steps, "time steps")
      ->capture_default_str();
  hjb_cmd->add_option("--paths", hjb.J, "sample paths")->capture_default_str();
  hjb_cmd->add_option("--sigma", hjb.sigma, "inverse-quadratic lengthscale")
      ->capture_default_str();
  hjb_cmd->add_option("--nugget", hjb.nugget, "relative nugget")
      ->capture_default_str();
  hjb_cmd->add_option("--seed", hjb.seed, "path seed")->capture_default_str();
  hjb_cmd->add_option("--lto-iters", hjb.lto_iters,
                      "linearization sweeps per backward step")
      ->capture_default_str();
  hjb_cmd->add_option("--cole-hopf", cole_hopf_samples,
                      "also print the Cole-Hopf Monte Carlo reference");
  hjb_cmd->add_option("--out", hjb_out, "per-step diagnostics CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.solver.variant = solver_variant_from_name(variant);

    if (solve_cmd->parsed()) return run_solve(cfg, solve_d, solve_M);

    if (conv_cmd->parsed()) {
      apply_paper_scale(conv_cmd, cfg);
      return finish(run_convergence(cfg));
    }
    if (param_cmd->parsed()) {
      apply_paper_scale(param_cmd, cfg);
      if (!param_cmd->count("--boundary-ratio")) cfg.boundary_ratio = 10;
      if (!param_cmd->count("--dims")) cfg.dims = {2, 3};
      return finish(run_param_darcy(cfg));
    }
    if (fill_cmd->parsed()) {
      if (!fill_cmd->count("--dims")) cfg.dims = {1, 2, 3};
      if (!fill_cmd->count("--counts"))
        cfg.interior_counts = {64, 128, 256, 512, 1024, 2048, 4096};
      ConvergenceReport rep = run_filldist_study(cfg);
      print_fits(rep);
      for (const DimensionFit& f : rep.fits)
        std::printf("d=%d: fill slope %+.3f vs -1/d = %+.3f\n", f.d,
                    f.fill_vs_M.slope, -1.0 / f.d);
      return rep.failed_cells ? 1 : 0;
    }
    if (hjb_cmd->parsed()) {
      HjbRun run = solve_hjb(hjb);
      std::printf("V(x0, 0) = %.6f\n", run.value_at_x0);
      if (!hjb_out.empty()) {
        write_hjb_diagnostics_csv(hjb_out, run);
        std::printf("diagnostics -> %s\n", hjb_out.c_str());
      }
      if (cole_hopf_samples > 0) {
        ColeHopfEstimate ref =
            cole_hopf_reference(hjb, cole_hopf_samples, hjb.seed + 1);
        std::printf("Cole-Hopf reference = %.6f (se %.2e), rel diff %.4f%%\n",
                    ref.value, ref.standard_error,
                    100.0 * std::abs(run.value_at_x0 - ref.value) /
                        std::abs(ref.value));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
