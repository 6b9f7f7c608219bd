#include "kolloc/harness.hpp"

#include "kolloc/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace kolloc {

namespace {

using json = nlohmann::json;
using steady = std::chrono::steady_clock;

double seconds_since(steady::time_point t0) {
  return std::chrono::duration<double>(steady::now() - t0).count();
}

double rms(const Eigen::VectorXd& v) {
  return std::sqrt(v.squaredNorm() / double(v.size()));
}

Eigen::VectorXd field_at_rows(const ScalarField& f, const Eigen::MatrixXd& pts) {
  Eigen::VectorXd out(pts.rows());
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    out(i) = f(pts.row(i).transpose());
  return out;
}

std::string sanitize_status(std::string s) {
  for (char& c : s) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

void validate_experiment(const ExperimentConfig& cfg) {
  if (cfg.dims.empty()) throw std::invalid_argument("experiment: dims is empty");
  for (int d : cfg.dims)
    if (d < 1) throw std::invalid_argument("experiment: dims must be >= 1");
  if (cfg.interior_counts.empty())
    throw std::invalid_argument("experiment: interior_counts is empty");
  for (int M : cfg.interior_counts)
    if (M < 1) throw std::invalid_argument("experiment: counts must be >= 1");
  if (cfg.boundary_ratio < 1)
    throw std::invalid_argument("experiment: boundary_ratio must be >= 1");
  if (cfg.replications < 1)
    throw std::invalid_argument("experiment: replications must be >= 1");
  if (cfg.test_points < 1)
    throw std::invalid_argument("experiment: test_points must be >= 1");
  if (cfg.fill_probes < 1)
    throw std::invalid_argument("experiment: fill_probes must be >= 1");
  if (cfg.reference_grid < 16)
    throw std::invalid_argument("experiment: reference_grid must be >= 16");
}

uint64_t cell_seed(const ExperimentConfig& cfg, int d, int M, int r) {
  return mix_seed(mix_seed(mix_seed(cfg.base_seed, uint64_t(d)), uint64_t(M)),
                  uint64_t(r));
}

uint64_t test_cloud_seed(const ExperimentConfig& cfg, int d) {
  return mix_seed(mix_seed(cfg.base_seed, 0x7e57), uint64_t(d));
}

uint64_t probe_cloud_seed(const ExperimentConfig& cfg, int d) {
  return mix_seed(mix_seed(cfg.base_seed, 0xf111), uint64_t(d));
}

PdeProblem make_interpolation_problem(int d, double beta) {
  PdeProblem prob;
  prob.name = "interpolation";
  prob.domain = Domain::unit_ball(d);

  auto star = [beta](const Point& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += std::cos(x(i));
    return std::exp(std::sin(beta * s));
  };

  auto one = [](const Point&) { return 1.0; };
  prob.interior_ops = {{DiffMonomial::identity(), one}};
  prob.boundary_ops = {{DiffMonomial::identity(), one}};

  Combiner ident;
  ident.value = [](const Eigen::VectorXd& t) { return t.sum(); };
  ident.gradient = [](const Eigen::VectorXd& t) {
    return Eigen::VectorXd::Ones(t.size()).eval();
  };
  ident.affine = true;
  prob.combiner_P = ident;
  prob.combiner_B = ident;

  prob.f = star;
  prob.g = star;
  prob.true_solution = star;
  return prob;
}

void emit_outputs(const ConvergenceReport& rep) {
  if (rep.config.output_dir.empty()) return;
  std::filesystem::create_directories(rep.config.output_dir);
  std::filesystem::path dir(rep.config.output_dir);
  write_report_csv((dir / "report.csv").string(), rep);
  write_slopes_csv((dir / "slopes.csv").string(), rep);
  write_manifest((dir / "manifest.json").string(), rep);
}

SlopeFit try_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  try {
    return fit_slope(xs, ys);
  } catch (const std::invalid_argument&) {
    return SlopeFit{};
  }
}

}  // namespace

const char* solver_variant_name(SolverVariant v) {
  switch (v) {
    case SolverVariant::lto: return "lto";
    case SolverVariant::gn_eliminate: return "gn_eliminate";
    case SolverVariant::gn_relaxed: return "gn_relaxed";
  }
  throw std::invalid_argument("solver_variant_name: unknown variant");
}

SolverVariant solver_variant_from_name(const std::string& name) {
  if (name == "lto") return SolverVariant::lto;
  if (name == "gn_eliminate") return SolverVariant::gn_eliminate;
  if (name == "gn_relaxed") return SolverVariant::gn_relaxed;
  throw std::invalid_argument("solver variant: unknown name " + name);
}

SlopeFit fit_slope(const std::vector<double>& xs,
                   const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("fit_slope: length mismatch");
  if (xs.size() < 2)
    throw std::invalid_argument("fit_slope: need at least two points");
  const int n = int(xs.size());
  std::vector<double> lx(n), ly(n);
  for (int i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !std::isfinite(xs[i]) || !(ys[i] > 0.0) ||
        !std::isfinite(ys[i]))
      throw std::invalid_argument("fit_slope: inputs must be positive finite");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0)
    throw std::invalid_argument("fit_slope: abscissae are all equal");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (int i = 0; i < n; ++i) {
    double r = ly[i] - fit.intercept - fit.slope * lx[i];
    ssr += r * r;
  }
  fit.std_error = n > 2 ? std::sqrt(ssr / double(n - 2) / sxx) : 0.0;
  fit.points = n;
  return fit;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty input");
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<DimensionFit> fit_report(const std::vector<ConvergenceCell>& rows) {
  std::map<std::pair<std::string, int>, std::map<int, std::vector<const ConvergenceCell*>>>
      groups;
  for (const ConvergenceCell& c : rows)
    if (c.ok()) groups[{c.label, c.d}][c.M].push_back(&c);

  std::vector<DimensionFit> fits;
  for (const auto& [key, ladder] : groups) {
    DimensionFit fit;
    fit.label = key.first;
    fit.d = key.second;
    for (const auto& [M, cells] : ladder) {
      std::vector<double> errs, fills;
      bool have_error = true;
      for (const ConvergenceCell* c : cells) {
        if (std::isnan(c->l2_error)) have_error = false;
        errs.push_back(c->l2_error);
        fills.push_back(c->fill_distance);
      }
      fit.counts.push_back(M);
      fit.median_error.push_back(
          have_error ? median(errs) : std::numeric_limits<double>::quiet_NaN());
      fit.median_fill.push_back(median(fills));
    }
    std::vector<double> ms(fit.counts.begin(), fit.counts.end());
    fit.fill_vs_M = try_fit(ms, fit.median_fill);
    fit.error_vs_M = try_fit(ms, fit.median_error);
    fit.error_vs_h = try_fit(fit.median_fill, fit.median_error);
    fits.push_back(std::move(fit));
  }
  return fits;
}

PdeProblem experiment_problem(const ExperimentConfig& cfg, int d) {
  if (cfg.problem == "elliptic") return make_nonlinear_elliptic(d, cfg.beta);
  if (cfg.problem == "darcy_tanh") return make_darcy_tanh(d, cfg.beta);
  if (cfg.problem == "parametric_darcy")
    return make_parametric_darcy(d, cfg.k_decay);
  if (cfg.problem == "interpolation")
    return make_interpolation_problem(d, cfg.beta);
  throw std::invalid_argument("experiment_problem: unknown problem " +
                              cfg.problem);
}

KernelSpec experiment_kernel(const ExperimentConfig& cfg, int d) {
  const double sigma = cfg.sigma_scale * std::sqrt(double(d));
  if (cfg.kernel == "gaussian") return KernelSpec::gaussian(d, sigma);
  if (cfg.kernel == "matern") return KernelSpec::matern(d, cfg.nu, sigma);
  if (cfg.kernel == "inverse_quadratic")
    return KernelSpec::inverse_quadratic(d, sigma);
  throw std::invalid_argument("experiment_kernel: unknown kernel " +
                              cfg.kernel);
}

KernelSpec param_vanilla_kernel(const ExperimentConfig& cfg, int p) {
  if (p < 1) throw std::invalid_argument("param kernel: p >= 1");
  const int dim = p + 2;
  Eigen::VectorXd sig(dim);
  sig(0) = cfg.sigma_x;
  sig.tail(p + 1).setConstant(cfg.sigma_theta * std::sqrt(double(p + 1)));
  return KernelSpec::gaussian(dim, sig);
}

KernelSpec param_adapted_kernel(const ExperimentConfig& cfg, int p) {
  Eigen::VectorXd w(p + 2);
  w(0) = 1.0;
  w(1) = 1.0;  // theta_0 enters the coefficient field undamped
  for (int j = 1; j <= p; ++j) w(1 + j) = std::pow(j, -2.0 * cfg.k_decay);
  return param_vanilla_kernel(cfg, p).with_weights(w);
}

ConvergenceReport run_convergence(const ExperimentConfig& cfg) {
  validate_experiment(cfg);
  const auto t_start = steady::now();
  ConvergenceReport rep;
  rep.config = cfg;

  for (int d : cfg.dims) {
    PdeProblem prob = experiment_problem(cfg, d);
    if (!prob.true_solution)
      throw std::invalid_argument(
          "run_convergence: problem has no closed-form solution; use "
          "run_param_darcy");
    KernelSpec kern = experiment_kernel(cfg, prob.domain.dim);

    Eigen::MatrixXd test_pts =
        sample_interior(prob.domain, cfg.test_points, test_cloud_seed(cfg, d));
    Eigen::VectorXd test_truth = field_at_rows(prob.true_solution, test_pts);
    const uint64_t probe_seed = probe_cloud_seed(cfg, d);

    for (int M : cfg.interior_counts) {
      const int Mb = std::max(1, M / cfg.boundary_ratio);
      for (int r = 0; r < cfg.replications; ++r) {
        ConvergenceCell cell;
        cell.label = prob.name;
        cell.d = d;
        cell.M = M;
        cell.seed = cell_seed(cfg, d, M, r);

        CollocationSet colloc =
            sample_collocation(prob.domain, M, Mb, cell.seed);
        cell.fill_distance = fill_distance_estimate(
            colloc.interior_points, prob.domain, cfg.fill_probes, probe_seed);

        const auto t0 = steady::now();
        try {
          Solution sol = solve(prob, colloc, kern, cfg.solver);
          cell.l2_error = rms(evaluate(sol, test_pts) - test_truth);
          cell.node_error =
              rms(evaluate(sol, colloc.interior_points) -
                  field_at_rows(prob.true_solution, colloc.interior_points));
        } catch (const std::exception& e) {
          cell.status = sanitize_status(e.what());
        }
        cell.runtime_seconds = seconds_since(t0);
        rep.rows.push_back(std::move(cell));
      }
    }
  }

  rep.fits = fit_report(rep.rows);
  for (const ConvergenceCell& c : rep.rows)
    if (!c.ok()) ++rep.failed_cells;
  rep.wall_seconds = seconds_since(t_start);
  emit_outputs(rep);
  return rep;
}

ConvergenceReport run_param_darcy(const ExperimentConfig& cfg) {
  validate_experiment(cfg);
  const auto t_start = steady::now();
  ConvergenceReport rep;
  rep.config = cfg;
  rep.config.problem = "parametric_darcy";

  for (int p : cfg.dims) {
    PdeProblem prob = make_parametric_darcy(p, cfg.k_decay);
    const std::pair<std::string, KernelSpec> kernels[] = {
        {"vanilla", param_vanilla_kernel(cfg, p)},
        {"adapted", param_adapted_kernel(cfg, p)}};

    auto reference = [&](const Eigen::MatrixXd& pts) {
      Eigen::VectorXd out(pts.rows());
      for (Eigen::Index i = 0; i < pts.rows(); ++i)
        out(i) = reference_darcy_eval(pts.row(i).tail(p + 1).transpose(),
                                      pts(i, 0), cfg.reference_grid,
                                      cfg.k_decay);
      return out;
    };

    Eigen::MatrixXd test_pts =
        sample_interior(prob.domain, cfg.test_points, test_cloud_seed(cfg, p));
    Eigen::VectorXd test_truth = reference(test_pts);
    const uint64_t probe_seed = probe_cloud_seed(cfg, p);

    for (int M : cfg.interior_counts) {
      const int Mb = std::max(1, M / cfg.boundary_ratio);
      for (int r = 0; r < cfg.replications; ++r) {
        const uint64_t seed = cell_seed(cfg, p, M, r);
        CollocationSet colloc = sample_collocation(prob.domain, M, Mb, seed);
        const double fill = fill_distance_estimate(
            colloc.interior_points, prob.domain, cfg.fill_probes, probe_seed);
        Eigen::VectorXd node_truth = reference(colloc.interior_points);

        for (const auto& [label, kern] : kernels) {
          ConvergenceCell cell;
          cell.label = label;
          cell.d = p;
          cell.M = M;
          cell.seed = seed;
          cell.fill_distance = fill;

          const auto t0 = steady::now();
          try {
            Solution sol = solve(prob, colloc, kern, cfg.solver);
            cell.l2_error = rms(evaluate(sol, test_pts) - test_truth);
            cell.node_error =
                rms(evaluate(sol, colloc.interior_points) - node_truth);
          } catch (const std::exception& e) {
            cell.status = sanitize_status(e.what());
          }
          cell.runtime_seconds = seconds_since(t0);
          rep.rows.push_back(std::move(cell));
        }
      }
    }
  }

  rep.fits = fit_report(rep.rows);
  for (const ConvergenceCell& c : rep.rows)
    if (!c.ok()) ++rep.failed_cells;
  rep.wall_seconds = seconds_since(t_start);
  emit_outputs(rep);
  return rep;
}

ConvergenceReport run_filldist_study(const ExperimentConfig& cfg) {
  validate_experiment(cfg);
  const auto t_start = steady::now();
  ConvergenceReport rep;
  rep.config = cfg;

  for (int d : cfg.dims) {
    Domain dom = Domain::unit_ball(d);
    const uint64_t probe_seed = probe_cloud_seed(cfg, d);
    for (int M : cfg.interior_counts) {
      for (int r = 0; r < cfg.replications; ++r) {
        ConvergenceCell cell;
        cell.label = "filldist";
        cell.d = d;
        cell.M = M;
        cell.seed = cell_seed(cfg, d, M, r);
        const auto t0 = steady::now();
        Eigen::MatrixXd pts = sample_interior(dom, M, cell.seed);
        cell.fill_distance =
            fill_distance_estimate(pts, dom, cfg.fill_probes, probe_seed);
        cell.runtime_seconds = seconds_since(t0);
        rep.rows.push_back(std::move(cell));
      }
    }
  }

  rep.fits = fit_report(rep.rows);
  rep.wall_seconds = seconds_since(t_start);
  emit_outputs(rep);
  return rep;
}

Eigen::VectorXd reference_darcy_1d(const Eigen::VectorXd& theta, int grid_n,
                                   double k_decay) {
  if (grid_n < 16)
    throw std::invalid_argument("reference_darcy_1d: grid_n must be >= 16");
  if (theta.size() < 1)
    throw std::invalid_argument("reference_darcy_1d: theta is empty");
  const int p = int(theta.size()) - 1;

  auto A = [&](double x) {
    double a = 2.0 + theta(0);
    for (int j = 1; j <= p; ++j)
      a += theta(j) * std::pow(j, -k_decay) * std::sin(M_PI * x + j);
    return a;
  };

  const int n = grid_n;
  const double h = 1.0 / n;
  // Conservative flux stencil on interior nodes i = 1..n-1:
  //   -[A_{i+1/2}(u_{i+1} - u_i) - A_{i-1/2}(u_i - u_{i-1})] = h^2 x_i
  Eigen::VectorXd sub(n - 1), diag(n - 1), sup(n - 1), rhs(n - 1);
  for (int i = 1; i < n; ++i) {
    const double a_lo = A((i - 0.5) * h);
    const double a_hi = A((i + 0.5) * h);
    sub(i - 1) = -a_lo;
    diag(i - 1) = a_lo + a_hi;
    sup(i - 1) = -a_hi;
    rhs(i - 1) = h * h * (i * h);
  }

  // Thomas sweep; pivots stay positive while A does.
  for (int i = 1; i < n - 1; ++i) {
    if (!(diag(i - 1) > 0.0))
      throw std::runtime_error("reference_darcy_1d: singular system");
    const double w = sub(i) / diag(i - 1);
    diag(i) -= w * sup(i - 1);
    rhs(i) -= w * rhs(i - 1);
  }
  if (!(diag(n - 2) > 0.0))
    throw std::runtime_error("reference_darcy_1d: singular system");

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n + 1);
  u(n - 1) = rhs(n - 2) / diag(n - 2);
  for (int i = n - 2; i >= 1; --i)
    u(i) = (rhs(i - 1) - sup(i - 1) * u(i + 1)) / diag(i - 1);
  return u;
}

double reference_darcy_eval(const Eigen::VectorXd& theta, double x, int grid_n,
                            double k_decay) {
  Eigen::VectorXd u = reference_darcy_1d(theta, grid_n, k_decay);
  const double t = std::clamp(x, 0.0, 1.0) * grid_n;
  const int i = std::min(int(t), grid_n - 1);
  const double frac = t - i;
  return (1.0 - frac) * u(i) + frac * u(i + 1);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["problem"] = cfg.problem;
  j["beta"] = cfg.beta;
  j["k_decay"] = cfg.k_decay;
  j["kernel"] = cfg.kernel;
  j["nu"] = cfg.nu;
  j["sigma_scale"] = cfg.sigma_scale;
  j["sigma_x"] = cfg.sigma_x;
  j["sigma_theta"] = cfg.sigma_theta;
  j["dims"] = cfg.dims;
  j["interior_counts"] = cfg.interior_counts;
  j["boundary_ratio"] = cfg.boundary_ratio;
  j["replications"] = cfg.replications;
  j["test_points"] = cfg.test_points;
  j["fill_probes"] = cfg.fill_probes;
  j["reference_grid"] = cfg.reference_grid;
  j["base_seed"] = cfg.base_seed;
  j["output_dir"] = cfg.output_dir;
  j["paper_scale"] = cfg.paper_scale;
  json s;
  s["variant"] = solver_variant_name(cfg.solver.variant);
  s["nugget_eta"] = cfg.solver.nugget_eta;
  s["max_iters"] = cfg.solver.max_iters;
  s["step_size"] = cfg.solver.step_size;
  s["convergence_tol"] = cfg.solver.convergence_tol;
  s["beta_relax"] = cfg.solver.beta_relax;
  s["backtracking"] = cfg.solver.backtracking;
  j["solver"] = s;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config_from_json: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.problem = j.value("problem", cfg.problem);
  cfg.beta = j.value("beta", cfg.beta);
  cfg.k_decay = j.value("k_decay", cfg.k_decay);
  cfg.kernel = j.value("kernel", cfg.kernel);
  cfg.nu = j.value("nu", cfg.nu);
  cfg.sigma_scale = j.value("sigma_scale", cfg.sigma_scale);
  cfg.sigma_x = j.value("sigma_x", cfg.sigma_x);
  cfg.sigma_theta = j.value("sigma_theta", cfg.sigma_theta);
  cfg.dims = j.value("dims", cfg.dims);
  cfg.interior_counts = j.value("interior_counts", cfg.interior_counts);
  cfg.boundary_ratio = j.value("boundary_ratio", cfg.boundary_ratio);
  cfg.replications = j.value("replications", cfg.replications);
  cfg.test_points = j.value("test_points", cfg.test_points);
  cfg.fill_probes = j.value("fill_probes", cfg.fill_probes);
  cfg.reference_grid = j.value("reference_grid", cfg.reference_grid);
  cfg.base_seed = j.value("base_seed", cfg.base_seed);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.paper_scale = j.value("paper_scale", cfg.paper_scale);
  if (j.contains("solver")) {
    const json& s = j["solver"];
    cfg.solver.variant = solver_variant_from_name(
        s.value("variant", std::string(solver_variant_name(cfg.solver.variant))));
    cfg.solver.nugget_eta = s.value("nugget_eta", cfg.solver.nugget_eta);
    cfg.solver.max_iters = s.value("max_iters", cfg.solver.max_iters);
    cfg.solver.step_size = s.value("step_size", cfg.solver.step_size);
    cfg.solver.convergence_tol =
        s.value("convergence_tol", cfg.solver.convergence_tol);
    cfg.solver.beta_relax = s.value("beta_relax", cfg.solver.beta_relax);
    cfg.solver.backtracking = s.value("backtracking", cfg.solver.backtracking);
  }
  return cfg;
}

uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string text = config_to_json(cfg);
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void write_report_csv(const std::string& path, const ConvergenceReport& rep) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_report_csv: cannot open " + path);
  out.precision(17);
  out << "label,d,M,seed,l2_error,node_error,fill_distance,status\n";
  for (const ConvergenceCell& c : rep.rows)
    out << c.label << ',' << c.d << ',' << c.M << ',' << c.seed << ','
        << c.l2_error << ',' << c.node_error << ',' << c.fill_distance << ','
        << c.status << '\n';
}

void write_slopes_csv(const std::string& path, const ConvergenceReport& rep) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_slopes_csv: cannot open " + path);
  out.precision(17);
  out << "label,d,metric,slope,intercept,std_error,points\n";
  for (const DimensionFit& f : rep.fits) {
    const std::pair<const char*, const SlopeFit*> metrics[] = {
        {"error_vs_M", &f.error_vs_M},
        {"error_vs_h", &f.error_vs_h},
        {"fill_vs_M", &f.fill_vs_M}};
    for (const auto& [name, fit] : metrics) {
      if (fit->points < 2) continue;
      out << f.label << ',' << f.d << ',' << name << ',' << fit->slope << ','
          << fit->intercept << ',' << fit->std_error << ',' << fit->points
          << '\n';
    }
  }
}

void write_manifest(const std::string& path, const ConvergenceReport& rep) {
  json j;
  j["config"] = json::parse(config_to_json(rep.config));
  char hex[19];
  std::snprintf(hex, sizeof hex, "0x%016llx",
                static_cast<unsigned long long>(config_hash(rep.config)));
  j["config_hash"] = hex;
  j["failed_cells"] = rep.failed_cells;
  j["wall_seconds"] = rep.wall_seconds;
  j["outputs"] = {"report.csv", "slopes.csv"};
  json cells = json::array();
  for (const ConvergenceCell& c : rep.rows) {
    json e;
    e["label"] = c.label;
    e["d"] = c.d;
    e["M"] = c.M;
    e["seed"] = c.seed;
    e["status"] = c.status;
    e["runtime_seconds"] = c.runtime_seconds;
    cells.push_back(std::move(e));
  }
  j["cells"] = std::move(cells);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
  out << j.dump(2) << '\n';
}

std::vector<ConvergenceCell> read_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_report_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_report_csv: empty file " + path);
  std::vector<ConvergenceCell> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8)
      throw std::runtime_error("read_report_csv: malformed row: " + line);
    ConvergenceCell c;
    c.label = fields[0];
    c.d = std::stoi(fields[1]);
    c.M = std::stoi(fields[2]);
    c.seed = std::stoull(fields[3]);
    c.l2_error = std::stod(fields[4]);
    c.node_error = std::stod(fields[5]);
    c.fill_distance = std::stod(fields[6]);
    c.status = fields[7];
    rows.push_back(std::move(c));
  }
  return rows;
}

}  // namespace kolloc
