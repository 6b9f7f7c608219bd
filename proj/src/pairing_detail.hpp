#pragma once

// Internal pairing machinery shared by the kernel assemblers and the
// solver/HJB hot loops.  Not installed; include only from src/.
//
// Every radial kernel here is k(x, y) = g(rho) with
//   rho = sum_i a_i D_i^2,   a_i = w_i / sigma_i^2,   D = x - y.
// Writing q_i = a_i D_i, mixed derivatives of k reduce to contractions of
// pure D-derivative tensors of g(rho) against the monomial coefficients,
// with a sign (-1)^(order of the y-side block).  The contractions below
// are expressed through the radial derivatives G_k = d^k g / d rho^k and
// the scalars
//   f1 = sum_i v_i q_i          (gradient coefficient dot)
//   e_S = sum_{i in S} q_i^2    (Laplacian subset)
//   sa_S = sum_{i in S} a_i
// so a full pairing costs O(dim) regardless of how many coordinates the
// gradient blocks touch.

#include "kolloc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kolloc::detail {

struct SecTerm {
  int i = 0, j = 0;  // i <= j
  double c = 0.0;
};

struct LapTerm {
  const std::vector<int>* subset = nullptr;  // sorted, owned by the functional
  double c = 0.0;
  double sa = 0.0;  // sum of a_i over the subset
};

struct Packed {
  const double* loc = nullptr;
  double c0 = 0.0;
  bool has_id = false;
  Eigen::VectorXd grad;  // zero-size when no partial terms
  std::vector<SecTerm> sec;
  std::vector<LapTerm> lap;
  int ord = 0;
};

inline Packed pack(const KernelSpec& k, const DualFunctional& f) {
  validate(f);
  if (static_cast<int>(f.location.size()) != k.dim)
    throw std::invalid_argument("pack: functional/kernel dimension mismatch");
  Packed p;
  p.loc = f.location.data();
  const Eigen::VectorXd& a = k.scale_factors();
  for (const auto& t : f.terms) {
    switch (t.mono.kind) {
      case DiffMonomial::Kind::identity:
        p.c0 += t.coeff;
        p.has_id = true;
        break;
      case DiffMonomial::Kind::partial:
        if (p.grad.size() == 0) p.grad = Eigen::VectorXd::Zero(k.dim);
        p.grad(t.mono.i) += t.coeff;
        break;
      case DiffMonomial::Kind::second_partial:
        p.sec.push_back({t.mono.i, t.mono.j, t.coeff});
        break;
      case DiffMonomial::Kind::laplacian: {
        double sa = 0.0;
        for (int idx : t.mono.subset) sa += a(idx);
        p.lap.push_back({&t.mono.subset, t.coeff, sa});
        break;
      }
    }
    p.ord = std::max(p.ord, t.mono.order());
  }
  return p;
}

inline std::vector<Packed> pack_all(const KernelSpec& k,
                                    const std::vector<DualFunctional>& fs) {
  std::vector<Packed> out;
  out.reserve(fs.size());
  for (const auto& f : fs) out.push_back(pack(k, f));
  return out;
}

/// Per-pair context: D, q = a o D, rho and the radial derivatives.
struct PairCtx {
  int d = 0;
  const double* a = nullptr;
  const double* q = nullptr;
  RadialDerivs R;
};

/// qbuf must have room for dim doubles.
inline PairCtx build_ctx(const KernelSpec& k, const double* x, const double* y,
                         int radial_order, double* qbuf) {
  PairCtx c;
  c.d = k.dim;
  c.a = k.scale_factors().data();
  c.q = qbuf;
  double rho = 0.0;
  for (int i = 0; i < c.d; ++i) {
    const double Di = x[i] - y[i];
    const double qi = c.a[i] * Di;
    qbuf[i] = qi;
    rho += qi * Di;
  }
  c.R = radial_derivs(k, rho, radial_order);
  return c;
}

inline double lap_e(const PairCtx& c, const LapTerm& l) {
  double e = 0.0;
  for (int idx : *l.subset) e += c.q[idx] * c.q[idx];
  return e;
}

// sum over the subset of v_l a_l q_l
inline double lap_mq(const PairCtx& c, const LapTerm& l,
                     const Eigen::VectorXd& v) {
  double m = 0.0;
  for (int idx : *l.subset) m += v(idx) * c.a[idx] * c.q[idx];
  return m;
}

/// Pairing of two packed functionals sharing the context built from their
/// locations (F on the x side, G on the y side).
inline double contract(const PairCtx& c, const Packed& F, const Packed& G) {
  const double* q = c.q;
  const double* a = c.a;
  const double G0 = c.R.g[0], G1 = c.R.g[1], G2 = c.R.g[2], G3 = c.R.g[3],
               G4 = c.R.g[4];
  double acc = 0.0;

  const bool fg = F.grad.size() > 0;
  const bool gg = G.grad.size() > 0;
  double f1 = 0.0, g1 = 0.0, w = 0.0;
  if (fg || gg) {
    const double* vf = fg ? F.grad.data() : nullptr;
    const double* vg = gg ? G.grad.data() : nullptr;
    for (int i = 0; i < c.d; ++i) {
      if (fg) f1 += vf[i] * q[i];
      if (gg) g1 += vg[i] * q[i];
      if (fg && gg) w += vf[i] * vg[i] * a[i];
    }
  }

  if (F.has_id) {
    if (G.has_id) acc += F.c0 * G.c0 * G0;
    if (gg) acc -= 2.0 * F.c0 * G1 * g1;
    for (const auto& s : G.sec)
      acc += F.c0 * s.c *
             (4.0 * G2 * q[s.i] * q[s.j] + (s.i == s.j ? 2.0 * G1 * a[s.i] : 0.0));
    for (const auto& l : G.lap)
      acc += F.c0 * l.c * (4.0 * G2 * lap_e(c, l) + 2.0 * G1 * l.sa);
  }

  if (fg) {
    if (G.has_id) acc += 2.0 * G.c0 * G1 * f1;
    if (gg) acc -= 4.0 * G2 * f1 * g1 + 2.0 * G1 * w;
    for (const auto& s : G.sec) {
      double t = 8.0 * G3 * f1 * q[s.i] * q[s.j] +
                 4.0 * G2 * (F.grad(s.i) * a[s.i] * q[s.j] +
                             F.grad(s.j) * a[s.j] * q[s.i]);
      if (s.i == s.j) t += 4.0 * G2 * a[s.i] * f1;
      acc += s.c * t;
    }
    for (const auto& l : G.lap) {
      const double e = lap_e(c, l);
      acc += l.c * (8.0 * G3 * f1 * e +
                    4.0 * G2 * (2.0 * lap_mq(c, l, F.grad) + l.sa * f1));
    }
  }

  for (const auto& s : F.sec) {
    const double qq = q[s.i] * q[s.j];
    const bool diag = s.i == s.j;
    if (G.has_id)
      acc += G.c0 * s.c * (4.0 * G2 * qq + (diag ? 2.0 * G1 * a[s.i] : 0.0));
    if (gg) {
      double t = 8.0 * G3 * qq * g1 +
                 4.0 * G2 * (a[s.i] * G.grad(s.i) * q[s.j] +
                             a[s.j] * G.grad(s.j) * q[s.i]);
      if (diag) t += 4.0 * G2 * a[s.i] * g1;
      acc -= s.c * t;
    }
    for (const auto& s2 : G.sec) {
      // T4 contraction of second partials (i,j) and (l,m)
      const int i = s.i, j = s.j, l = s2.i, m = s2.j;
      double t = 16.0 * G4 * qq * q[l] * q[m];
      double t3 = 0.0;
      if (i == j) t3 += a[i] * q[l] * q[m];
      if (i == l) t3 += a[i] * q[j] * q[m];
      if (i == m) t3 += a[i] * q[j] * q[l];
      if (j == l) t3 += a[j] * q[i] * q[m];
      if (j == m) t3 += a[j] * q[i] * q[l];
      if (l == m) t3 += a[l] * q[i] * q[j];
      t += 8.0 * G3 * t3;
      double t2 = 0.0;
      if (i == j && l == m) t2 += a[i] * a[l];
      if (i == l && j == m) t2 += a[i] * a[j];
      if (i == m && j == l) t2 += a[i] * a[j];
      t += 4.0 * G2 * t2;
      acc += s.c * s2.c * t;
    }
    for (const auto& l2 : G.lap) {
      const double e = lap_e(c, l2);
      const bool i_in = std::binary_search(l2.subset->begin(), l2.subset->end(), s.i);
      const bool j_in = std::binary_search(l2.subset->begin(), l2.subset->end(), s.j);
      double t = 16.0 * G4 * qq * e;
      double t3 = (i_in ? 2.0 * a[s.i] : 0.0) + (j_in ? 2.0 * a[s.j] : 0.0);
      t3 = t3 * qq + l2.sa * qq;
      if (diag) t3 += a[s.i] * e;
      t += 8.0 * G3 * t3;
      double t2 = 0.0;
      if (diag) {
        t2 += a[s.i] * l2.sa;
        if (i_in) t2 += 2.0 * a[s.i] * a[s.i];
      }
      t += 4.0 * G2 * t2;
      acc += s.c * l2.c * t;
    }
  }

  for (const auto& l : F.lap) {
    const double e = lap_e(c, l);
    if (G.has_id) acc += G.c0 * l.c * (4.0 * G2 * e + 2.0 * G1 * l.sa);
    if (gg)
      acc -= l.c * (8.0 * G3 * g1 * e +
                    4.0 * G2 * (2.0 * lap_mq(c, l, G.grad) + l.sa * g1));
    for (const auto& s2 : G.sec) {
      const double qq = q[s2.i] * q[s2.j];
      const bool diag = s2.i == s2.j;
      const bool i_in = std::binary_search(l.subset->begin(), l.subset->end(), s2.i);
      const bool j_in = std::binary_search(l.subset->begin(), l.subset->end(), s2.j);
      double t = 16.0 * G4 * qq * e;
      double t3 = (i_in ? 2.0 * a[s2.i] : 0.0) + (j_in ? 2.0 * a[s2.j] : 0.0);
      t3 = t3 * qq + l.sa * qq;
      if (diag) t3 += a[s2.i] * e;
      t += 8.0 * G3 * t3;
      double t2 = 0.0;
      if (diag) {
        t2 += a[s2.i] * l.sa;
        if (i_in) t2 += 2.0 * a[s2.i] * a[s2.i];
      }
      t += 4.0 * G2 * t2;
      acc += l.c * s2.c * t;
    }
    for (const auto& l2 : G.lap) {
      const double e2 = lap_e(c, l2);
      double qa3 = 0.0, a2 = 0.0;  // intersection sums
      const auto& A = *l.subset;
      const auto& B = *l2.subset;
      for (size_t ia = 0, ib = 0; ia < A.size() && ib < B.size();) {
        if (A[ia] < B[ib]) {
          ++ia;
        } else if (B[ib] < A[ia]) {
          ++ib;
        } else {
          const int idx = A[ia];
          qa3 += a[idx] * q[idx] * q[idx];
          a2 += a[idx] * a[idx];
          ++ia;
          ++ib;
        }
      }
      acc += l.c * l2.c *
             (16.0 * G4 * e * e2 +
              8.0 * G3 * (l.sa * e2 + l2.sa * e + 4.0 * qa3) +
              4.0 * G2 * (l.sa * l2.sa + 2.0 * a2));
    }
  }

  return acc;
}

/// Value and x-gradient of the pairing [delta_x (x) G] k for a point
/// evaluation on the x side.  grad must be sized dim and zeroed by the
/// caller; contributions are accumulated scaled by coeff.
inline void accumulate_value_grad(const PairCtx& c, const Packed& G,
                                  double coeff, double* value, double* grad) {
  const double* q = c.q;
  const double* a = c.a;
  const double G0 = c.R.g[0], G1 = c.R.g[1], G2 = c.R.g[2], G3 = c.R.g[3];

  double val = 0.0;
  if (G.has_id) {
    val += G.c0 * G0;
    const double s = coeff * 2.0 * G.c0 * G1;
    for (int i = 0; i < c.d; ++i) grad[i] += s * q[i];
  }
  if (G.grad.size() > 0) {
    const double* v = G.grad.data();
    double g1 = 0.0;
    for (int i = 0; i < c.d; ++i) g1 += v[i] * q[i];
    val -= 2.0 * G1 * g1;
    const double s = coeff * 4.0 * G2 * g1;
    for (int i = 0; i < c.d; ++i)
      grad[i] -= s * q[i] + coeff * 2.0 * G1 * a[i] * v[i];
  }
  for (const auto& s2 : G.sec) {
    const double qq = q[s2.i] * q[s2.j];
    const bool diag = s2.i == s2.j;
    val += s2.c * (4.0 * G2 * qq + (diag ? 2.0 * G1 * a[s2.i] : 0.0));
    const double s8 = coeff * s2.c * 8.0 * G3 * qq;
    const double sd = diag ? coeff * s2.c * 4.0 * G2 * a[s2.i] : 0.0;
    if (s8 != 0.0 || sd != 0.0)
      for (int i = 0; i < c.d; ++i) grad[i] += (s8 + sd) * q[i];
    grad[s2.i] += coeff * s2.c * 4.0 * G2 * a[s2.i] * q[s2.j];
    grad[s2.j] += coeff * s2.c * 4.0 * G2 * a[s2.j] * q[s2.i];
  }
  for (const auto& l : G.lap) {
    const double e = lap_e(c, l);
    val += l.c * (4.0 * G2 * e + 2.0 * G1 * l.sa);
    const double s = coeff * l.c * (8.0 * G3 * e + 4.0 * G2 * l.sa);
    for (int i = 0; i < c.d; ++i) grad[i] += s * q[i];
    for (int idx : *l.subset)
      grad[idx] += coeff * l.c * 8.0 * G2 * a[idx] * q[idx];
  }
  *value += coeff * val;
}

}  // namespace kolloc::detail
