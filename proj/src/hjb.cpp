#include "kolloc/hjb.hpp"

#include "kolloc/rng.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace kolloc {

namespace {

void validate_config(const HjbConfig& cfg) {
  if (cfg.d < 1) throw std::invalid_argument("hjb: d >= 1 required");
  if (!(cfg.T > 0.0)) throw std::invalid_argument("hjb: T > 0 required");
  if (cfg.n_steps < 1) throw std::invalid_argument("hjb: n_steps >= 1 required");
  if (cfg.J < 2) throw std::invalid_argument("hjb: J >= 2 required");
  if (!(cfg.sigma > 0.0)) throw std::invalid_argument("hjb: sigma > 0 required");
  if (!(cfg.nugget > 0.0)) throw std::invalid_argument("hjb: nugget > 0 required");
  if (cfg.lto_iters < 1)
    throw std::invalid_argument("hjb: lto_iters >= 1 required");
  if (cfg.x0.size() != 0 && cfg.x0.size() != cfg.d)
    throw std::invalid_argument("hjb: x0 dimension mismatch");
  if (bool(cfg.terminal) != bool(cfg.terminal_gradient))
    throw std::invalid_argument(
        "hjb: terminal and terminal_gradient must be overridden together");
}

Point start_point(const HjbConfig& cfg) {
  if (cfg.x0.size() == cfg.d) return cfg.x0;
  return Point::Zero(cfg.d);
}

ScalarField terminal_of(const HjbConfig& cfg) {
  if (cfg.terminal) return cfg.terminal;
  return [](const Point& x) { return hjb_terminal(x); };
}

std::function<Eigen::VectorXd(const Point&)> terminal_gradient_of(
    const HjbConfig& cfg) {
  if (cfg.terminal_gradient) return cfg.terminal_gradient;
  return [](const Point& x) { return hjb_terminal_gradient(x); };
}

// Key for exact-duplicate detection: the raw bytes of the location and of
// the (identity, d partials) coefficient vector.
std::string functional_key(const Point& loc, double c0,
                           const Eigen::VectorXd& c) {
  std::string key;
  key.resize(sizeof(double) * (loc.size() + 1 + c.size()));
  char* out = key.data();
  std::memcpy(out, loc.data(), sizeof(double) * loc.size());
  out += sizeof(double) * loc.size();
  std::memcpy(out, &c0, sizeof(double));
  out += sizeof(double);
  std::memcpy(out, c.data(), sizeof(double) * c.size());
  return key;
}

}  // namespace

double hjb_terminal(const Point& x) {
  return std::log(0.5 + 0.5 * x.squaredNorm());
}

Eigen::VectorXd hjb_terminal_gradient(const Point& x) {
  return 2.0 * x / (1.0 + x.squaredNorm());
}

PathBundle simulate_paths(const HjbConfig& cfg) {
  validate_config(cfg);
  const int J = cfg.J, d = cfg.d, N = cfg.n_steps;
  const double dt = cfg.T / N;
  const double step = std::sqrt(2.0 * dt);
  const Point x0 = start_point(cfg);

  PathBundle bundle;
  bundle.states.assign(N + 1, Eigen::MatrixXd(J, d));
  bundle.increments.assign(N, Eigen::MatrixXd(J, d));
  bundle.states[0] = x0.transpose().replicate(J, 1);

#pragma omp parallel for schedule(static)
  for (int j = 0; j < J; ++j) {
    auto gen = make_engine(cfg.seed, (std::uint64_t)j);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int n = 0; n < N; ++n) {
      for (int i = 0; i < d; ++i) {
        const double xi = normal(gen);
        bundle.increments[n](j, i) = xi;
        bundle.states[n + 1](j, i) = bundle.states[n](j, i) + step * xi;
      }
    }
  }
  return bundle;
}

HjbStep backward_step(const HjbConfig& cfg, const Eigen::MatrixXd& states,
                      const Eigen::MatrixXd& xi,
                      const Eigen::VectorXd& targets,
                      const Eigen::MatrixXd& init_gradients) {
  validate_config(cfg);
  const int J = (int)states.rows(), d = cfg.d;
  if (states.cols() != d || xi.rows() != J || xi.cols() != d ||
      targets.size() != J || init_gradients.rows() != J ||
      init_gradients.cols() != d)
    throw std::invalid_argument("backward_step: shape mismatch");

  const double dt = cfg.T / cfg.n_steps;
  const double root = std::sqrt(2.0 * dt);
  auto k = KernelSpec::inverse_quadratic(d, cfg.sigma);

  std::vector<DiffMonomial> monos;
  monos.reserve(d + 1);
  monos.push_back(DiffMonomial::identity());
  for (int i = 0; i < d; ++i) monos.push_back(DiffMonomial::partial(i));

  HjbStep out;
  out.values = Eigen::VectorXd::Zero(J);
  out.gradients = init_gradients;

  for (int sweep = 0; sweep < cfg.lto_iters; ++sweep) {
    // Duplicate functionals collapse to one constraint; slot[j] maps the
    // path to its constraint.
    std::vector<DualFunctional> phis;
    std::vector<double> zsum;
    std::vector<int> zcount;
    std::unordered_map<std::string, int> seen;
    for (int j = 0; j < J; ++j) {
      Eigen::VectorXd cj =
          2.0 * dt * out.gradients.row(j).transpose() +
          root * xi.row(j).transpose();
      const double zj =
          targets(j) + dt * out.gradients.row(j).squaredNorm();
      const Point loc = states.row(j).transpose();
      auto key = functional_key(loc, 1.0, cj);
      auto [it, inserted] = seen.emplace(key, (int)phis.size());
      if (inserted) {
        std::vector<double> coeffs(d + 1);
        coeffs[0] = 1.0;
        for (int i = 0; i < d; ++i) coeffs[1 + i] = cj(i);
        phis.push_back(combine(coeffs, monos, loc));
        zsum.push_back(zj);
        zcount.push_back(1);
      } else {
        zsum[it->second] += zj;
        zcount[it->second] += 1;
      }
    }
    Eigen::VectorXd z((int)phis.size());
    for (int m = 0; m < z.size(); ++m) z(m) = zsum[m] / zcount[m];

    out.solution = solve_min_norm(k, phis, z, cfg.nugget);

#pragma omp parallel for schedule(static)
    for (int j = 0; j < J; ++j) {
      double v;
      Eigen::VectorXd g;
      eval_with_gradient(k, states.row(j).transpose(), out.solution.functionals,
                         out.solution.coefficients, &v, &g);
      out.values(j) = v;
      out.gradients.row(j) = g.transpose();
    }
  }

  double acc = 0.0;
  for (int j = 0; j < J; ++j) {
    const double r = out.values(j) + dt * out.gradients.row(j).squaredNorm() +
                     root * out.gradients.row(j).dot(xi.row(j)) - targets(j);
    acc += r * r;
  }
  out.residual = std::sqrt(acc);
  return out;
}

HjbRun solve_hjb(const HjbConfig& cfg) {
  validate_config(cfg);
  const int J = cfg.J, N = cfg.n_steps;
  auto g = terminal_of(cfg);
  auto grad_g = terminal_gradient_of(cfg);

  PathBundle paths = simulate_paths(cfg);

  Eigen::VectorXd targets(J);
  for (int j = 0; j < J; ++j)
    targets(j) = g(paths.states[N].row(j).transpose());

  Eigen::MatrixXd warm(J, cfg.d);
  for (int j = 0; j < J; ++j)
    warm.row(j) = grad_g(paths.states[N - 1].row(j).transpose()).transpose();

  HjbRun run;
  run.diagnostics.resize(N);
  Eigen::MatrixXd x0_row = start_point(cfg).transpose();
  for (int n = N - 1; n >= 0; --n) {
    HjbStep step = backward_step(cfg, paths.states[n], paths.increments[n],
                                 targets, warm);
    run.diagnostics[n] = {n, step.residual,
                          evaluate(step.solution, x0_row)(0)};
    if (n > 0) {
      targets = step.values;
#pragma omp parallel for schedule(static)
      for (int j = 0; j < J; ++j) {
        double v;
        Eigen::VectorXd gr;
        eval_with_gradient(step.solution.kernel,
                           paths.states[n - 1].row(j).transpose(),
                           step.solution.functionals,
                           step.solution.coefficients, &v, &gr);
        warm.row(j) = gr.transpose();
      }
    } else {
      run.value_at_x0 = run.diagnostics[0].value_at_x0;
    }
  }
  return run;
}

ColeHopfEstimate cole_hopf_reference(const HjbConfig& cfg, int mc_samples,
                                     std::uint64_t seed) {
  if (cfg.d < 1) throw std::invalid_argument("hjb: d >= 1 required");
  if (cfg.T < 0.0) throw std::invalid_argument("hjb: T >= 0 required");
  if (bool(cfg.terminal) != bool(cfg.terminal_gradient))
    throw std::invalid_argument(
        "hjb: terminal and terminal_gradient must be overridden together");
  auto g = terminal_of(cfg);
  const Point x0 = start_point(cfg);
  if (cfg.T == 0.0) return {g(x0), 0.0};
  if (mc_samples < 1000)
    throw std::invalid_argument("cole_hopf_reference: mc_samples >= 1000");

  const double step = std::sqrt(2.0 * cfg.T);
  auto gen = make_engine(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Welford accumulation of exp(-g(x0 + sqrt(2T) Z)).
  double mean = 0.0, m2 = 0.0;
  Point y(cfg.d);
  for (int s = 0; s < mc_samples; ++s) {
    for (int i = 0; i < cfg.d; ++i) y(i) = x0(i) + step * normal(gen);
    const double w = std::exp(-g(y));
    const double delta = w - mean;
    mean += delta / (s + 1);
    m2 += delta * (w - mean);
  }
  const double var = m2 / (mc_samples - 1);
  const double se_mean = std::sqrt(var / mc_samples);
  return {-std::log(mean), se_mean / mean};
}

void write_hjb_diagnostics_csv(const std::string& path, const HjbRun& run) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "step,residual,value_at_x0\n";
  char buf[96];
  for (const auto& d : run.diagnostics) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", d.step, d.residual,
                  d.value_at_x0);
    out << buf;
  }
}

}  // namespace kolloc
