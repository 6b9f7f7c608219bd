#include "kolloc/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kolloc {

DiffMonomial DiffMonomial::identity() { return {}; }

DiffMonomial DiffMonomial::partial(int i) {
  if (i < 0) throw std::invalid_argument("partial: negative coordinate index");
  DiffMonomial m;
  m.kind = Kind::partial;
  m.i = i;
  return m;
}

DiffMonomial DiffMonomial::second_partial(int i, int j) {
  if (i < 0 || j < 0)
    throw std::invalid_argument("second_partial: negative coordinate index");
  DiffMonomial m;
  m.kind = Kind::second_partial;
  m.i = std::min(i, j);
  m.j = std::max(i, j);
  return m;
}

DiffMonomial DiffMonomial::laplacian(int dim) {
  if (dim <= 0) throw std::invalid_argument("laplacian: dim must be positive");
  std::vector<int> s(dim);
  for (int k = 0; k < dim; ++k) s[k] = k;
  return laplacian_over(std::move(s));
}

DiffMonomial DiffMonomial::laplacian_over(std::vector<int> subset) {
  if (subset.empty())
    throw std::invalid_argument("laplacian_over: empty coordinate subset");
  std::sort(subset.begin(), subset.end());
  if (subset.front() < 0)
    throw std::invalid_argument("laplacian_over: negative coordinate index");
  if (std::adjacent_find(subset.begin(), subset.end()) != subset.end())
    throw std::invalid_argument("laplacian_over: duplicate coordinate index");
  DiffMonomial m;
  m.kind = Kind::laplacian;
  m.subset = std::move(subset);
  return m;
}

int DiffMonomial::order() const {
  switch (kind) {
    case Kind::identity: return 0;
    case Kind::partial: return 1;
    case Kind::second_partial: return 2;
    case Kind::laplacian: return 2;
  }
  return 0;
}

int DiffMonomial::max_index() const {
  switch (kind) {
    case Kind::identity: return -1;
    case Kind::partial: return i;
    case Kind::second_partial: return j;
    case Kind::laplacian: return subset.back();
  }
  return -1;
}

DualFunctional combine(const std::vector<double>& coeffs,
                       const std::vector<DiffMonomial>& monos,
                       const Point& location) {
  if (coeffs.size() != monos.size())
    throw std::invalid_argument("combine: coefficient/monomial length mismatch");
  DualFunctional f;
  f.location = location;
  f.terms.reserve(coeffs.size());
  for (size_t k = 0; k < coeffs.size(); ++k)
    f.terms.push_back({coeffs[k], monos[k]});
  validate(f);
  return f;
}

void validate(const DualFunctional& f) {
  if (f.terms.empty())
    throw std::invalid_argument("functional: needs at least one term");
  if (f.location.size() == 0)
    throw std::invalid_argument("functional: empty location");
  const int d = static_cast<int>(f.location.size());
  for (const auto& t : f.terms) {
    if (!std::isfinite(t.coeff))
      throw std::invalid_argument("functional: non-finite coefficient");
    if (t.mono.max_index() >= d)
      throw std::invalid_argument("functional: coordinate index out of range");
  }
}

int order(const DualFunctional& f) {
  int o = 0;
  for (const auto& t : f.terms) o = std::max(o, t.mono.order());
  return o;
}

double apply_fd(const DiffMonomial& m, const Point& s, const ScalarField& v,
                double step) {
  if (step <= 0.0) throw std::invalid_argument("apply_fd: step must be positive");
  const double h = step;
  Point p = s;
  switch (m.kind) {
    case DiffMonomial::Kind::identity:
      return v(s);
    case DiffMonomial::Kind::partial: {
      p(m.i) = s(m.i) + h;
      const double up = v(p);
      p(m.i) = s(m.i) - h;
      const double um = v(p);
      return (up - um) / (2.0 * h);
    }
    case DiffMonomial::Kind::second_partial: {
      if (m.i == m.j) {
        p(m.i) = s(m.i) + h;
        const double up = v(p);
        p(m.i) = s(m.i) - h;
        const double um = v(p);
        return (up - 2.0 * v(s) + um) / (h * h);
      }
      double acc = 0.0;
      for (int si = -1; si <= 1; si += 2)
        for (int sj = -1; sj <= 1; sj += 2) {
          p = s;
          p(m.i) += si * h;
          p(m.j) += sj * h;
          acc += si * sj * v(p);
        }
      return acc / (4.0 * h * h);
    }
    case DiffMonomial::Kind::laplacian: {
      double acc = 0.0;
      const double u0 = v(s);
      for (int idx : m.subset) {
        p = s;
        p(idx) = s(idx) + h;
        const double up = v(p);
        p(idx) = s(idx) - h;
        const double um = v(p);
        acc += (up - 2.0 * u0 + um) / (h * h);
      }
      return acc;
    }
  }
  return 0.0;
}

double apply_fd(const DualFunctional& f, const ScalarField& v, double step) {
  validate(f);
  double acc = 0.0;
  for (const auto& t : f.terms)
    acc += t.coeff * apply_fd(t.mono, f.location, v, step);
  return acc;
}

}  // namespace kolloc
