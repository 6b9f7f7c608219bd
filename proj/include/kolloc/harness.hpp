#pragma once

#include "kolloc/problems.hpp"
#include "kolloc/solver.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace kolloc {

/// One experiment description: problem family, kernel, point ladders,
/// replication counts, and output location.  Serializes to JSON so runs
/// are reproducible from a config file alone.
struct ExperimentConfig {
  std::string problem = "elliptic";  // elliptic | darcy_tanh |
                                     // parametric_darcy | interpolation
  double beta = 1.0;                 // manufactured-solution frequency
  double k_decay = 2.0;              // parametric coefficient decay exponent

  std::string kernel = "matern";     // gaussian | matern | inverse_quadratic
  double nu = 3.5;
  double sigma_scale = 0.25;         // lengthscale = sigma_scale * sqrt(d)
  double sigma_x = 0.2;              // parametric runs: spatial lengthscale
  double sigma_theta = 1.0;          // parametric runs: base theta lengthscale

  std::vector<int> dims = {2};       // dimensions d (parameter counts p for
                                     // parametric runs)
  std::vector<int> interior_counts = {250, 500, 1000, 2000};
  int boundary_ratio = 5;            // M_boundary = M_interior / ratio
  int replications = 5;
  int test_points = 1000;
  int fill_probes = 4000;
  int reference_grid = 1024;         // 1-d reference resolution
  uint64_t base_seed = 1;
  SolverConfig solver;
  std::string output_dir;            // empty: keep the report in memory only
  bool paper_scale = false;          // bookkeeping flag recorded in manifests
};

/// One (kernel-label, d, M, seed) cell of a study.  Errors are
/// root-mean-square over uniform points: l2_error on an independent test
/// cloud, node_error at the interior collocation nodes themselves.
struct ConvergenceCell {
  std::string label;  // kernel variant; empty for single-kernel studies
  int d = 0;
  int M = 0;          // interior collocation count
  uint64_t seed = 0;
  double l2_error = std::numeric_limits<double>::quiet_NaN();
  double node_error = std::numeric_limits<double>::quiet_NaN();
  double fill_distance = std::numeric_limits<double>::quiet_NaN();
  double runtime_seconds = 0.0;  // manifest only, never written to CSV
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

/// Ordinary least squares line through (log x, log y).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;  // standard error of the slope
  int points = 0;          // 0 when the fit was not attempted
};

/// Per-dimension aggregation: medians over replications at each ladder
/// count, and the three log-log slopes derived from them.
struct DimensionFit {
  std::string label;
  int d = 0;
  std::vector<int> counts;           // ladder entries with at least one
                                     // successful cell, ascending
  std::vector<double> median_error;  // aligned with counts; NaN when the
                                     // study measures no error
  std::vector<double> median_fill;
  SlopeFit error_vs_M;
  SlopeFit error_vs_h;
  SlopeFit fill_vs_M;
};

struct ConvergenceReport {
  ExperimentConfig config;
  std::vector<ConvergenceCell> rows;
  std::vector<DimensionFit> fits;
  int failed_cells = 0;
  double wall_seconds = 0.0;
};

/// Least squares on (log xs, log ys); throws std::invalid_argument on
/// fewer than two points, mismatched lengths, or non-positive entries.
SlopeFit fit_slope(const std::vector<double>& xs, const std::vector<double>& ys);

/// Median of v; the midpoint average for even lengths.  Throws on empty.
double median(std::vector<double> v);

/// Medians and slope fits per (label, d) group, skipping failed cells and
/// ladder counts without any successful cell.  Error slopes are fitted
/// only when every surviving median error is positive and finite.
std::vector<DimensionFit> fit_report(const std::vector<ConvergenceCell>& rows);

/// Problem and kernel builders shared by the studies and the CLI.
PdeProblem experiment_problem(const ExperimentConfig& cfg, int d);
KernelSpec experiment_kernel(const ExperimentConfig& cfg, int d);

/// Parametric-run kernels on the (x, theta) product domain: the vanilla
/// anisotropic Gaussian, and the same kernel with coordinate weights
/// j^{-2 k_decay} matching the decay of the coefficient field.
KernelSpec param_vanilla_kernel(const ExperimentConfig& cfg, int p);
KernelSpec param_adapted_kernel(const ExperimentConfig& cfg, int p);

/// Manufactured-solution convergence study over cfg.dims and
/// cfg.interior_counts: sample, solve, measure test error and fill
/// distance, aggregate, fit slopes.  Solver failures are recorded in the
/// cell status and excluded from the fits.  When cfg.output_dir is
/// nonempty writes report.csv, slopes.csv, and manifest.json.
ConvergenceReport run_convergence(const ExperimentConfig& cfg);

/// Parametric Darcy study over parameter counts cfg.dims: each cell is
/// solved with the vanilla and the adapted kernel on identical point
/// draws, with test error measured against the dense 1-d reference.
ConvergenceReport run_param_darcy(const ExperimentConfig& cfg);

/// Fill-distance scaling study: no solves, error columns stay NaN, and
/// the fill-vs-M slope per dimension is the quantity of interest.
ConvergenceReport run_filldist_study(const ExperimentConfig& cfg);

/// Dense second-order finite-difference solution of the two-point problem
/// -(A(x, theta) u')' = x, u(0) = u(1) = 0 on grid_n + 1 uniform nodes,
/// with A = 2 + theta_0 + sum_j theta_j j^{-k_decay} sin(pi x + j).
/// Requires grid_n >= 16.
Eigen::VectorXd reference_darcy_1d(const Eigen::VectorXd& theta, int grid_n,
                                   double k_decay);

/// reference_darcy_1d evaluated at x in [0, 1] by linear interpolation.
double reference_darcy_eval(const Eigen::VectorXd& theta, double x, int grid_n,
                            double k_decay);

/// Solver-variant names as used by config files and the CLI.
const char* solver_variant_name(SolverVariant v);
SolverVariant solver_variant_from_name(const std::string& name);

/// JSON round trip and the FNV-1a hash of the canonical serialization.
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
uint64_t config_hash(const ExperimentConfig& cfg);

/// CSV artifacts.  Cell rows hold data only (no timings), so identical
/// config and seed reproduce them byte for byte; timings and per-cell
/// status live in the manifest.
void write_report_csv(const std::string& path, const ConvergenceReport& rep);
void write_slopes_csv(const std::string& path, const ConvergenceReport& rep);
void write_manifest(const std::string& path, const ConvergenceReport& rep);
std::vector<ConvergenceCell> read_report_csv(const std::string& path);

}  // namespace kolloc
