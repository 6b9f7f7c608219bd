#include "kolloc/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace kolloc {

namespace {

double iterate_change(const Eigen::VectorXd& now, const Eigen::VectorXd& prev) {
  return (now - prev).lpNorm<Eigen::Infinity>() /
         (1.0 + now.lpNorm<Eigen::Infinity>());
}

// Interior-then-boundary constraint rows evaluated from flat channel
// values, reused by every variant's history bookkeeping.
double residual_norm(const PdeProblem& prob, const CollocationSet& colloc,
                     const OperatorValues& vals) {
  return residual(prob, colloc, vals).norm();
}

}  // namespace

Solution solve_min_norm(const KernelSpec& k,
                        const std::vector<DualFunctional>& phis,
                        const Eigen::VectorXd& targets, double eta) {
  if ((Eigen::Index)phis.size() != targets.size())
    throw std::invalid_argument("solve_min_norm: size mismatch");
  if (!(eta > 0.0))
    throw std::invalid_argument("solve_min_norm: eta > 0 required");

  Eigen::MatrixXd K = gram(k, phis);
  Solution sol;
  sol.kernel = k;
  sol.functionals = phis;
  sol.targets = targets;
  sol.nugget_used = eta;

  Eigen::MatrixXd Kn = K;
  Kn.diagonal() += eta * K.diagonal();
  sol.factorization.compute(Kn);
  if (sol.factorization.info() != Eigen::Success) {
    sol.nugget_used = 100.0 * eta;
    Kn = K;
    Kn.diagonal() += sol.nugget_used * K.diagonal();
    sol.factorization.compute(Kn);
    if (sol.factorization.info() != Eigen::Success)
      throw std::runtime_error(
          "solve_min_norm: Cholesky failed after nugget escalation (n=" +
          std::to_string(phis.size()) +
          ", diag max=" + std::to_string(K.diagonal().maxCoeff()) + ")");
  }
  sol.coefficients = sol.factorization.solve(targets);
  return sol;
}

Solution solve_lto(const PdeProblem& prob, const CollocationSet& colloc,
                   const KernelSpec& k, const SolverConfig& cfg) {
  const int Mi = (int)colloc.interior_points.rows();
  const int Mb = (int)colloc.boundary_points.rows();
  const int Qi = (int)prob.interior_ops.size();
  const int Qb = (int)prob.boundary_ops.size();

  auto meas = measurement_functionals(prob, colloc);
  OperatorValues cur;
  cur.interior = Eigen::MatrixXd::Zero(Mi, Qi);
  cur.boundary = Eigen::MatrixXd::Zero(Mb, Qb);
  Eigen::VectorXd prev_flat = Eigen::VectorXd::Zero((int)meas.size());

  Solution sol;
  std::vector<double> history;
  double prev_res = residual_norm(prob, colloc, cur);
  for (int it = 0; it < cfg.max_iters; ++it) {
    LinearizationSystem sys = linearize(prob, colloc, cur);
    sol = solve_min_norm(k, sys.functionals, sys.targets, cfg.nugget_eta);

    Eigen::MatrixXd A = functional_matrix(k, meas, sys.functionals);
    Eigen::VectorXd flat = A * sol.coefficients;
    OperatorValues next = unpack_op_values(prob, colloc, flat);
    double res = residual_norm(prob, colloc, next);

    double alpha = cfg.step_size;
    if (cfg.backtracking) {
      for (int half = 0; half < 4 && res > prev_res; ++half) {
        alpha *= 0.5;
        Eigen::VectorXd damped = prev_flat + alpha * (flat - prev_flat);
        next = unpack_op_values(prob, colloc, damped);
        res = residual_norm(prob, colloc, next);
        flat = damped;
      }
    } else if (alpha != 1.0) {
      flat = prev_flat + alpha * (flat - prev_flat);
      next = unpack_op_values(prob, colloc, flat);
      res = residual_norm(prob, colloc, next);
    }

    history.push_back(res);
    double change = iterate_change(flat, prev_flat);
    cur = next;
    prev_flat = flat;
    prev_res = res;
    if (cfg.convergence_tol > 0.0 && change < cfg.convergence_tol) break;
  }
  sol.iterate_history = history;
  return sol;
}

namespace {

// Per-row sparse Jacobian of the constraint map F: row m touches the Q
// contiguous z-entries of its own point block with the combiner gradient
// as weights.
struct ConstraintRows {
  int n = 0;                          // z dimension
  std::vector<int> offset;            // first z index per row
  std::vector<Eigen::VectorXd> grad;  // weights per row
};

ConstraintRows constraint_rows(const PdeProblem& prob,
                               const CollocationSet& colloc,
                               const Eigen::VectorXd& z) {
  const int Mi = (int)colloc.interior_points.rows();
  const int Mb = (int)colloc.boundary_points.rows();
  const int Qi = (int)prob.interior_ops.size();
  const int Qb = (int)prob.boundary_ops.size();
  ConstraintRows rows;
  rows.n = Mi * Qi + Mb * Qb;
  rows.offset.resize(Mi + Mb);
  rows.grad.resize(Mi + Mb);
  for (int m = 0; m < Mi; ++m) {
    rows.offset[m] = m * Qi;
    rows.grad[m] = prob.combiner_P.gradient(z.segment(m * Qi, Qi));
  }
  for (int m = 0; m < Mb; ++m) {
    rows.offset[Mi + m] = Mi * Qi + m * Qb;
    rows.grad[Mi + m] = prob.combiner_B.gradient(z.segment(Mi * Qi + m * Qb, Qb));
  }
  return rows;
}

Eigen::VectorXd constraint_values(const PdeProblem& prob,
                                  const CollocationSet& colloc,
                                  const Eigen::VectorXd& z) {
  return residual(prob, colloc, unpack_op_values(prob, colloc, z));
}

Eigen::VectorXd apply_jt(const ConstraintRows& rows, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(rows.n);
  for (size_t m = 0; m < rows.grad.size(); ++m)
    out.segment(rows.offset[m], rows.grad[m].size()) += v((int)m) * rows.grad[m];
  return out;
}

Eigen::VectorXd apply_j(const ConstraintRows& rows, const Eigen::VectorXd& v) {
  Eigen::VectorXd out((int)rows.grad.size());
  for (size_t m = 0; m < rows.grad.size(); ++m)
    out((int)m) =
        rows.grad[m].dot(v.segment(rows.offset[m], rows.grad[m].size()));
  return out;
}

}  // namespace

Solution solve_gn_relaxed(const PdeProblem& prob, const CollocationSet& colloc,
                          const KernelSpec& k, const SolverConfig& cfg) {
  if (!(cfg.beta_relax > 0.0))
    throw std::invalid_argument("solve_gn_relaxed: beta_relax > 0 required");
  auto phis = measurement_functionals(prob, colloc);
  const int n = (int)phis.size();
  const int mrows =
      (int)(colloc.interior_points.rows() + colloc.boundary_points.rows());

  Eigen::MatrixXd K = gram(k, phis);
  Eigen::MatrixXd Kn = K;
  Kn.diagonal() += cfg.nugget_eta * K.diagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(Kn);
  double used = cfg.nugget_eta;
  if (llt.info() != Eigen::Success) {
    used = 100.0 * cfg.nugget_eta;
    Kn = K;
    Kn.diagonal() += used * K.diagonal();
    llt.compute(Kn);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("solve_gn_relaxed: Cholesky failed");
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  std::vector<double> history;
  for (int it = 0; it < cfg.max_iters; ++it) {
    ConstraintRows rows = constraint_rows(prob, colloc, z);
    Eigen::VectorXd misfit = constraint_values(prob, colloc, z);  // F(z) - y
    Eigen::VectorXd rhs = apply_j(rows, z) - misfit;              // y - F + Jz

    // K J^T and J K J^T through the per-row sparsity.
    Eigen::MatrixXd KJt(n, mrows);
    for (int m = 0; m < mrows; ++m)
      KJt.col(m).noalias() =
          K.middleCols(rows.offset[m], rows.grad[m].size()) * rows.grad[m];
    Eigen::MatrixXd S(mrows, mrows);
    for (int m = 0; m < mrows; ++m)
      S.col(m) = apply_j(rows, KJt.col(m));
    S.diagonal().array() += cfg.beta_relax * cfg.beta_relax;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("solve_gn_relaxed: inner system failed");
    Eigen::VectorXd z_new = KJt * ldlt.solve(rhs);

    double alpha = cfg.step_size;
    Eigen::VectorXd stepped = z + alpha * (z_new - z);
    if (cfg.backtracking) {
      double base = misfit.norm();
      for (int half = 0; half < 4; ++half) {
        if (constraint_values(prob, colloc, stepped).norm() <= base) break;
        alpha *= 0.5;
        stepped = z + alpha * (z_new - z);
      }
    }
    double change = iterate_change(stepped, z);
    z = stepped;
    history.push_back(constraint_values(prob, colloc, z).norm());
    if (cfg.convergence_tol > 0.0 && change < cfg.convergence_tol) break;
  }

  Solution sol;
  sol.kernel = k;
  sol.functionals = std::move(phis);
  sol.targets = z;
  sol.factorization = llt;
  sol.nugget_used = used;
  sol.coefficients = llt.solve(z);
  sol.iterate_history = history;
  return sol;
}

Solution solve_gn_eliminate(const PdeProblem& prob,
                            const CollocationSet& colloc, const KernelSpec& k,
                            const SolverConfig& cfg) {
  if (prob.interior_lap_channel < 0)
    throw std::invalid_argument(
        "solve_gn_eliminate: problem exposes no elimination channel");
  const int Mi = (int)colloc.interior_points.rows();
  const int Mb = (int)colloc.boundary_points.rows();
  const int Qi = (int)prob.interior_ops.size();
  const int Qb = (int)prob.boundary_ops.size();
  const int lap = prob.interior_lap_channel;
  const int nw = Mi * (Qi - 1);
  const int n = Mi * Qi + Mb * Qb;

  auto phis = measurement_functionals(prob, colloc);
  Eigen::MatrixXd K = gram(k, phis);
  Eigen::MatrixXd Kn = K;
  Kn.diagonal() += cfg.nugget_eta * K.diagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(Kn);
  double used = cfg.nugget_eta;
  if (llt.info() != Eigen::Success) {
    used = 100.0 * cfg.nugget_eta;
    Kn = K;
    Kn.diagonal() += used * K.diagonal();
    llt.compute(Kn);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("solve_gn_eliminate: Cholesky failed");
  }

  // w holds the non-eliminated interior channels; boundary values are
  // pinned to g by their (affine, unit-weight) constraints.
  Eigen::VectorXd f_int(Mi), g_bdy(Mb);
  for (int m = 0; m < Mi; ++m)
    f_int(m) = prob.f(colloc.interior_points.row(m).transpose());
  for (int m = 0; m < Mb; ++m)
    g_bdy(m) = prob.g(colloc.boundary_points.row(m).transpose());

  auto expand = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd z(n);
    for (int m = 0; m < Mi; ++m) {
      Eigen::VectorXd t(Qi);
      int c = 0;
      for (int q = 0; q < Qi; ++q)
        if (q != lap) t(q) = w(m * (Qi - 1) + c++);
      t(lap) = 0.0;
      t(lap) = f_int(m) - prob.combiner_P.value(t);
      z.segment(m * Qi, Qi) = t;
    }
    for (int m = 0; m < Mb; ++m) {
      Eigen::VectorXd t = Eigen::VectorXd::Zero(Qb);
      double b0 = prob.combiner_B.value(t);
      // Affine single-channel boundary: B(t) = g pins the value channel.
      t(0) = (g_bdy(m) - b0) / prob.combiner_B.gradient(t)(0);
      z.segment(Mi * Qi + m * Qb, Qb) = t;
    }
    return z;
  };

  Eigen::VectorXd w = Eigen::VectorXd::Zero(nw);
  std::vector<double> history;
  Eigen::VectorXd z = expand(w);
  for (int it = 0; it < cfg.max_iters; ++it) {
    // dz/dw: identity on own channel, -dP/dt_q on the eliminated row.
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, nw);
    for (int m = 0; m < Mi; ++m) {
      Eigen::VectorXd gp =
          prob.combiner_P.gradient(z.segment(m * Qi, Qi));
      int c = 0;
      for (int q = 0; q < Qi; ++q) {
        if (q == lap) continue;
        int col = m * (Qi - 1) + c++;
        Z(m * Qi + q, col) = 1.0;
        Z(m * Qi + lap, col) = -gp(q);
      }
    }
    Eigen::MatrixXd KiZ = llt.solve(Z);
    Eigen::MatrixXd H = Z.transpose() * KiZ;
    Eigen::VectorXd rhs = -(KiZ.transpose() * z);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("solve_gn_eliminate: inner system failed");
    Eigen::VectorXd dw = ldlt.solve(rhs);

    Eigen::VectorXd w_new = w + cfg.step_size * dw;
    Eigen::VectorXd z_new = expand(w_new);
    double change = iterate_change(w_new, w);
    w = w_new;
    z = z_new;
    history.push_back(std::sqrt(std::max(0.0, z.dot(llt.solve(z)))));
    if (cfg.convergence_tol > 0.0 && change < cfg.convergence_tol) break;
  }

  Solution sol;
  sol.kernel = k;
  sol.functionals = std::move(phis);
  sol.targets = z;
  sol.factorization = llt;
  sol.nugget_used = used;
  sol.coefficients = llt.solve(z);
  sol.iterate_history = history;
  return sol;
}

Solution solve(const PdeProblem& prob, const CollocationSet& colloc,
               const KernelSpec& k, const SolverConfig& cfg) {
  switch (cfg.variant) {
    case SolverVariant::lto:
      return solve_lto(prob, colloc, k, cfg);
    case SolverVariant::gn_relaxed:
      return solve_gn_relaxed(prob, colloc, k, cfg);
    case SolverVariant::gn_eliminate:
      return solve_gn_eliminate(prob, colloc, k, cfg);
  }
  throw std::invalid_argument("solve: unknown variant");
}

Eigen::VectorXd evaluate(const Solution& sol, const Eigen::MatrixXd& pts) {
  return cross_matrix(sol.kernel, pts, sol.functionals) * sol.coefficients;
}

double rkhs_norm(const Solution& sol) {
  return std::sqrt(std::max(0.0, sol.targets.dot(sol.coefficients)));
}

}  // namespace kolloc
