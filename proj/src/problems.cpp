#include "kolloc/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace kolloc {

namespace {

// The family exp(sin(beta sum_j cos x_j)) supplies every closed form the
// built-in problems need: the elliptic solution (any beta), both
// diffusion fields (beta = 1) and the tanh-problem solution (beta = 2).
double sum_cos(const Point& x) {
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) s += std::cos(x(i));
  return s;
}

double sum_sin2(const Point& x) {
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    double si = std::sin(x(i));
    s += si * si;
  }
  return s;
}

double exp_sin_val(double beta, const Point& x) {
  return std::exp(std::sin(beta * sum_cos(x)));
}

double exp_sin_dx(double beta, const Point& x, int i) {
  double w = beta * sum_cos(x);
  return -beta * std::sin(x(i)) * std::cos(w) * std::exp(std::sin(w));
}

double exp_sin_lap(double beta, const Point& x) {
  double G = sum_cos(x);
  double w = beta * G;
  double cw = std::cos(w), sw = std::sin(w);
  double v = std::exp(sw);
  return v * (beta * beta * (cw * cw - sw) * sum_sin2(x) - beta * cw * G);
}

Combiner dirichlet_combiner() {
  Combiner B;
  B.value = [](const Eigen::VectorXd& t) { return t(0); };
  B.gradient = [](const Eigen::VectorXd& t) {
    return Eigen::VectorXd::Ones(t.size()).eval();
  };
  B.affine = true;
  return B;
}

// Divergence-form interior channels: identity, d weighted partials, then
// the weighted Laplacian.  diff_beta selects the diffusion field
// exp(sin(beta sum cos)).
std::vector<PdeOp> divergence_form_ops(int d, double diff_beta) {
  std::vector<PdeOp> ops;
  ops.push_back({DiffMonomial::identity(), [](const Point&) { return 1.0; }});
  for (int i = 0; i < d; ++i)
    ops.push_back({DiffMonomial::partial(i), [diff_beta, i](const Point& x) {
                     return -exp_sin_dx(diff_beta, x, i);
                   }});
  ops.push_back({DiffMonomial::laplacian(d), [diff_beta](const Point& x) {
                   return -exp_sin_val(diff_beta, x);
                 }});
  return ops;
}

double fd_mono_richardson(const DiffMonomial& mono, const Point& s,
                          const ScalarField& u, double step) {
  const double a1 = apply_fd(mono, s, u, step);
  const double a2 = apply_fd(mono, s, u, step / 2.0);
  const double a3 = apply_fd(mono, s, u, step / 4.0);
  const double r1 = (4.0 * a2 - a1) / 3.0;
  const double r2 = (4.0 * a3 - a2) / 3.0;
  return (16.0 * r2 - r1) / 15.0;
}

// Construction-time guard: coefficients finite on a random sample and,
// when a solution is shipped, its interior residual below 1e-8.
void validate_problem(const PdeProblem& prob) {
  CollocationSet colloc = sample_collocation(prob.domain, 100, 20, 987654321ull);
  for (int m = 0; m < colloc.interior_points.rows(); ++m) {
    Point s = colloc.interior_points.row(m).transpose();
    for (const auto& op : prob.interior_ops)
      if (!std::isfinite(op.coeff(s)))
        throw std::runtime_error(prob.name + ": non-finite coefficient");
  }
  if (!prob.true_solution) return;
  OperatorValues vals =
      op_values_of_field(prob, colloc, prob.true_solution, 1e-2);
  Eigen::VectorXd r = residual(prob, colloc, vals);
  double worst = r.cwiseAbs().maxCoeff();
  if (worst >= 1e-8)
    throw std::runtime_error(prob.name +
                             ": manufactured solution residual " +
                             std::to_string(worst));
}

}  // namespace

PdeProblem make_nonlinear_elliptic(int d, double beta) {
  if (d < 1) throw std::invalid_argument("make_nonlinear_elliptic: d >= 1");
  PdeProblem prob;
  prob.name = "nonlinear_elliptic";
  prob.domain = Domain::unit_ball(d);
  prob.interior_ops = divergence_form_ops(d, 1.0);
  prob.interior_lap_channel = d + 1;
  prob.boundary_ops = {
      {DiffMonomial::identity(), [](const Point&) { return 1.0; }}};

  prob.combiner_P.value = [](const Eigen::VectorXd& t) {
    return t(0) * t(0) * t(0) + t.tail(t.size() - 1).sum();
  };
  prob.combiner_P.gradient = [](const Eigen::VectorXd& t) {
    Eigen::VectorXd g = Eigen::VectorXd::Ones(t.size());
    g(0) = 3.0 * t(0) * t(0);
    return g;
  };
  prob.combiner_B = dirichlet_combiner();

  prob.true_solution = [beta](const Point& x) { return exp_sin_val(beta, x); };
  prob.f = [beta, d](const Point& x) {
    double A = exp_sin_val(1.0, x);
    double u = exp_sin_val(beta, x);
    double grad_dot = 0.0;
    for (int i = 0; i < d; ++i)
      grad_dot += exp_sin_dx(1.0, x, i) * exp_sin_dx(beta, x, i);
    return -A * exp_sin_lap(beta, x) - grad_dot + u * u * u;
  };
  prob.g = prob.true_solution;

  validate_problem(prob);
  return prob;
}

PdeProblem make_darcy_tanh(int d, double beta_tau) {
  if (d < 1) throw std::invalid_argument("make_darcy_tanh: d >= 1");
  PdeProblem prob;
  prob.name = "darcy_tanh";
  prob.domain = Domain::unit_ball(d);
  prob.interior_ops = divergence_form_ops(d, 1.0);
  prob.interior_lap_channel = d + 1;
  prob.boundary_ops = {
      {DiffMonomial::identity(), [](const Point&) { return 1.0; }}};

  prob.combiner_P.value = [beta_tau](const Eigen::VectorXd& t) {
    return 1.0 + std::tanh(beta_tau * t(0)) + t.tail(t.size() - 1).sum();
  };
  prob.combiner_P.gradient = [beta_tau](const Eigen::VectorXd& t) {
    Eigen::VectorXd g = Eigen::VectorXd::Ones(t.size());
    double c = std::cosh(beta_tau * t(0));
    g(0) = beta_tau / (c * c);
    return g;
  };
  prob.combiner_B = dirichlet_combiner();

  prob.true_solution = [](const Point& x) { return exp_sin_val(2.0, x); };
  prob.f = [beta_tau, d](const Point& x) {
    double A = exp_sin_val(1.0, x);
    double u = exp_sin_val(2.0, x);
    double grad_dot = 0.0;
    for (int i = 0; i < d; ++i)
      grad_dot += exp_sin_dx(1.0, x, i) * exp_sin_dx(2.0, x, i);
    return -A * exp_sin_lap(2.0, x) - grad_dot + 1.0 + std::tanh(beta_tau * u);
  };
  prob.g = prob.true_solution;

  validate_problem(prob);
  return prob;
}

PdeProblem make_parametric_darcy(int p, double k_decay) {
  if (p < 1) throw std::invalid_argument("make_parametric_darcy: p >= 1");
  PdeProblem prob;
  prob.name = "parametric_darcy";
  prob.domain = Domain::product(Domain::unit_box(1),
                                Eigen::VectorXd::Zero(p + 1),
                                Eigen::VectorXd::Ones(p + 1));

  auto diffusion = [p, k_decay](const Point& s) {
    double A = 2.0 + s(1);
    for (int j = 1; j <= p; ++j)
      A += s(1 + j) * std::pow(j, -k_decay) * std::sin(M_PI * s(0) + j);
    return A;
  };
  auto diffusion_dx = [p, k_decay](const Point& s) {
    double dA = 0.0;
    for (int j = 1; j <= p; ++j)
      dA += s(1 + j) * std::pow(j, -k_decay) * M_PI *
            std::cos(M_PI * s(0) + j);
    return dA;
  };

  prob.interior_ops = {
      {DiffMonomial::partial(0),
       [diffusion_dx](const Point& s) { return -diffusion_dx(s); }},
      {DiffMonomial::second_partial(0, 0),
       [diffusion](const Point& s) { return -diffusion(s); }}};
  prob.interior_lap_channel = 1;
  prob.boundary_ops = {
      {DiffMonomial::identity(), [](const Point&) { return 1.0; }}};

  prob.combiner_P.value = [](const Eigen::VectorXd& t) { return t.sum(); };
  prob.combiner_P.gradient = [](const Eigen::VectorXd& t) {
    return Eigen::VectorXd::Ones(t.size()).eval();
  };
  prob.combiner_P.affine = true;
  prob.combiner_B = dirichlet_combiner();

  prob.f = [](const Point& s) { return s(0); };
  prob.g = [](const Point&) { return 0.0; };

  validate_problem(prob);
  return prob;
}

std::vector<DualFunctional> measurement_functionals(
    const PdeProblem& prob, const CollocationSet& colloc) {
  std::vector<DualFunctional> phis;
  phis.reserve(colloc.interior_points.rows() * prob.interior_ops.size() +
               colloc.boundary_points.rows() * prob.boundary_ops.size());
  for (int m = 0; m < colloc.interior_points.rows(); ++m) {
    Point s = colloc.interior_points.row(m).transpose();
    for (const auto& op : prob.interior_ops)
      phis.push_back(combine({op.coeff(s)}, {op.mono}, s));
  }
  for (int m = 0; m < colloc.boundary_points.rows(); ++m) {
    Point s = colloc.boundary_points.row(m).transpose();
    for (const auto& op : prob.boundary_ops)
      phis.push_back(combine({op.coeff(s)}, {op.mono}, s));
  }
  return phis;
}

OperatorValues unpack_op_values(const PdeProblem& prob,
                                const CollocationSet& colloc,
                                const Eigen::VectorXd& flat) {
  const int Mi = (int)colloc.interior_points.rows();
  const int Mb = (int)colloc.boundary_points.rows();
  const int Qi = (int)prob.interior_ops.size();
  const int Qb = (int)prob.boundary_ops.size();
  if (flat.size() != Mi * Qi + Mb * Qb)
    throw std::invalid_argument("unpack_op_values: size mismatch");
  OperatorValues vals;
  vals.interior.resize(Mi, Qi);
  vals.boundary.resize(Mb, Qb);
  for (int m = 0; m < Mi; ++m)
    vals.interior.row(m) = flat.segment(m * Qi, Qi).transpose();
  for (int m = 0; m < Mb; ++m)
    vals.boundary.row(m) = flat.segment(Mi * Qi + m * Qb, Qb).transpose();
  return vals;
}

LinearizationSystem linearize(const PdeProblem& prob,
                              const CollocationSet& colloc,
                              const OperatorValues& current) {
  const int Mi = (int)colloc.interior_points.rows();
  const int Mb = (int)colloc.boundary_points.rows();
  if (current.interior.rows() != Mi ||
      current.interior.cols() != (Eigen::Index)prob.interior_ops.size() ||
      current.boundary.rows() != Mb ||
      current.boundary.cols() != (Eigen::Index)prob.boundary_ops.size())
    throw std::invalid_argument("linearize: value shape mismatch");

  LinearizationSystem sys;
  sys.functionals.reserve(Mi + Mb);
  sys.targets.resize(Mi + Mb);
  for (int m = 0; m < Mi; ++m) {
    Point s = colloc.interior_points.row(m).transpose();
    Eigen::VectorXd t = current.interior.row(m).transpose();
    Eigen::VectorXd gp = prob.combiner_P.gradient(t);
    std::vector<double> coeffs((size_t)gp.size());
    std::vector<DiffMonomial> monos((size_t)gp.size());
    for (int q = 0; q < gp.size(); ++q) {
      coeffs[q] = gp(q) * prob.interior_ops[q].coeff(s);
      monos[q] = prob.interior_ops[q].mono;
    }
    sys.functionals.push_back(combine(coeffs, monos, s));
    sys.targets(m) = prob.f(s) - prob.combiner_P.value(t) + gp.dot(t);
  }
  for (int m = 0; m < Mb; ++m) {
    Point s = colloc.boundary_points.row(m).transpose();
    Eigen::VectorXd t = current.boundary.row(m).transpose();
    Eigen::VectorXd gb = prob.combiner_B.gradient(t);
    std::vector<double> coeffs((size_t)gb.size());
    std::vector<DiffMonomial> monos((size_t)gb.size());
    for (int q = 0; q < gb.size(); ++q) {
      coeffs[q] = gb(q) * prob.boundary_ops[q].coeff(s);
      monos[q] = prob.boundary_ops[q].mono;
    }
    sys.functionals.push_back(combine(coeffs, monos, s));
    sys.targets(Mi + m) = prob.g(s) - prob.combiner_B.value(t) + gb.dot(t);
  }
  return sys;
}

Eigen::VectorXd residual(const PdeProblem& prob, const CollocationSet& colloc,
                         const OperatorValues& values) {
  const int Mi = (int)colloc.interior_points.rows();
  const int Mb = (int)colloc.boundary_points.rows();
  Eigen::VectorXd r(Mi + Mb);
  for (int m = 0; m < Mi; ++m) {
    Point s = colloc.interior_points.row(m).transpose();
    r(m) = prob.combiner_P.value(values.interior.row(m).transpose()) -
           prob.f(s);
  }
  for (int m = 0; m < Mb; ++m) {
    Point s = colloc.boundary_points.row(m).transpose();
    r(Mi + m) =
        prob.combiner_B.value(values.boundary.row(m).transpose()) - prob.g(s);
  }
  return r;
}

OperatorValues op_values_of_field(const PdeProblem& prob,
                                  const CollocationSet& colloc,
                                  const ScalarField& u, double step) {
  const int Mi = (int)colloc.interior_points.rows();
  const int Mb = (int)colloc.boundary_points.rows();
  OperatorValues vals;
  vals.interior.resize(Mi, prob.interior_ops.size());
  vals.boundary.resize(Mb, prob.boundary_ops.size());
  for (int m = 0; m < Mi; ++m) {
    Point s = colloc.interior_points.row(m).transpose();
    for (size_t q = 0; q < prob.interior_ops.size(); ++q) {
      const auto& op = prob.interior_ops[q];
      double raw = op.mono.order() == 0
                       ? u(s)
                       : fd_mono_richardson(op.mono, s, u, step);
      vals.interior(m, (int)q) = op.coeff(s) * raw;
    }
  }
  for (int m = 0; m < Mb; ++m) {
    Point s = colloc.boundary_points.row(m).transpose();
    for (size_t q = 0; q < prob.boundary_ops.size(); ++q) {
      const auto& op = prob.boundary_ops[q];
      double raw = op.mono.order() == 0
                       ? u(s)
                       : fd_mono_richardson(op.mono, s, u, step);
      vals.boundary(m, (int)q) = op.coeff(s) * raw;
    }
  }
  return vals;
}

}  // namespace kolloc
