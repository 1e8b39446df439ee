#include "grade2/polar_polynomial.hpp"

#include <cmath>

namespace grade2 {

namespace {

using Series = PolarPolynomial::Series;
using cd = std::complex<double>;

Series trimmed(const Series& h) {
  Eigen::Index n = h.size();
  while (n > 0 && h[n - 1] == cd(0.0)) --n;
  return h.head(n);
}

// d/ds of a Chebyshev series in t = 2s - 1.
Series deriv_s(const Series& c) {
  const Eigen::Index K = c.size() - 1;
  if (K <= 0) return Series();
  Series d = Series::Zero(K + 2);
  for (Eigen::Index k = K; k >= 1; --k) d[k - 1] = d[k + 1] + 2.0 * double(k) * c[k];
  d[0] *= 0.5;
  return Series(2.0 * d.head(K));
}

// s h with s = (1 + t) / 2.
Series mul_s(const Series& c) {
  const Eigen::Index n = c.size();
  if (n == 0) return Series();
  Series out = Series::Zero(n + 1);
  out.head(n) += 0.5 * c;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == 0) {
      out[1] += 0.5 * c[0];
    } else {
      out[k + 1] += 0.25 * c[k];
      out[k - 1] += 0.25 * c[k];
    }
  }
  return out;
}

Series add(const Series& a, const Series& b) {
  Series out = Series::Zero(std::max(a.size(), b.size()));
  out.head(a.size()) += a;
  out.head(b.size()) += b;
  return out;
}

// Polynomial quotient of a Chebyshev series in x by x (remainder dropped).
Series divide_by_x(const Series& a) {
  const Eigen::Index K = a.size() - 1;
  if (K <= 0) return Series();
  Series b = Series::Zero(K + 1);  // b[K] stays zero, used as padding
  for (Eigen::Index j = K; j >= 2; --j) b[j - 1] = 2.0 * a[j] - (j + 1 <= K ? b[j + 1] : cd(0.0));
  b[0] = a[1] - (K >= 2 ? 0.5 * b[2] : cd(0.0));
  return b.head(K);
}

cd clenshaw(const Series& c, double t) {
  cd b1 = 0.0, b2 = 0.0;
  for (Eigen::Index k = c.size() - 1; k >= 1; --k) {
    const cd b0 = 2.0 * t * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return (c.size() > 0 ? c[0] : cd(0.0)) + t * b1 - b2;
}

}  // namespace

PolarPolynomial PolarPolynomial::monomial(int m, int k, std::complex<double> coef) {
  PolarPolynomial out;
  Series h = Series::Zero(k + 1);
  h[k] = coef;
  out.add_term(m, h);
  return out;
}

void PolarPolynomial::add_term(int p, const Series& h) {
  const Series t = trimmed(h);
  if (t.size() == 0) return;
  auto it = terms_.find(p);
  if (it == terms_.end()) {
    terms_.emplace(p, t);
    return;
  }
  it->second = trimmed(add(it->second, t));
  if (it->second.size() == 0) terms_.erase(it);
}

PolarPolynomial& PolarPolynomial::operator+=(const PolarPolynomial& o) {
  for (const auto& [p, h] : o.terms_) add_term(p, h);
  return *this;
}

PolarPolynomial& PolarPolynomial::operator*=(std::complex<double> s) {
  if (s == cd(0.0)) {
    terms_.clear();
    return *this;
  }
  for (auto& [p, h] : terms_) h *= s;
  return *this;
}

PolarPolynomial PolarPolynomial::dz() const {
  PolarPolynomial out;
  for (const auto& [p, h] : terms_) {
    const Series dh = deriv_s(h);
    if (p >= 1)
      out.add_term(p - 1, add(double(p) * h, mul_s(dh)));
    else
      out.add_term(p - 1, dh);
  }
  return out;
}

PolarPolynomial PolarPolynomial::dzbar() const {
  PolarPolynomial out;
  for (const auto& [p, h] : terms_) {
    const Series dh = deriv_s(h);
    if (p >= 0)
      out.add_term(p + 1, dh);
    else
      out.add_term(p + 1, add(double(-p) * h, mul_s(dh)));
  }
  return out;
}

PolarPolynomial PolarPolynomial::dx1() const { return dz() + dzbar(); }

PolarPolynomial PolarPolynomial::dx2() const { return cd(0.0, 1.0) * (dz() - dzbar()); }

PolarPolynomial PolarPolynomial::laplacian() const { return cd(4.0) * dzbar().dz(); }

ScalarField PolarPolynomial::sample(const DiskGrid& grid) const {
  ScalarField out = ScalarField::zeros(grid.size());
  const auto& r = grid.radial_nodes();
  const auto& theta = grid.angles();
  const int nr = grid.n_radial();
  const int L = grid.n_angular();
  Eigen::VectorXd cp(L), sp(L);
  for (const auto& [p, h] : terms_) {
    for (int k = 0; k < L; ++k) {
      cp[k] = std::cos(p * theta[k]);
      sp[k] = std::sin(p * theta[k]);
    }
    for (int j = 0; j < nr; ++j) {
      const cd v = clenshaw(h, 2.0 * r[j] * r[j] - 1.0) * std::pow(r[j], std::abs(p));
      const Eigen::Index base = grid.index(j, 0);
      out.values.segment(base, L) += v.real() * cp - v.imag() * sp;
    }
  }
  return out;
}

PolarPolynomial PolarPolynomial::from_nodal(const DiskGrid& grid, const ScalarField& f, double chop_tol) {
  SpectralField s = grid.to_spectral(f);
  const double scale = s.coefficients.cwiseAbs().maxCoeff();
  if (scale == 0.0) return PolarPolynomial();
  s.coefficients = (s.coefficients.array().abs() < chop_tol * scale).select(0.0, s.coefficients);

  const int nr = grid.n_radial();
  const int L = grid.n_angular();
  const int K = 2 * nr - 1;
  PolarPolynomial out;
  for (int m = 0; m <= L / 2; ++m) {
    const int q = m % 2;
    Series g = Series::Zero(K + 1);
    for (int l = 0; l < nr; ++l) {
      cd v;
      if (m == 0)
        v = s.coefficients(l, 0);
      else if (m == L / 2)
        v = s.coefficients(l, L - 1);
      else
        v = cd(s.coefficients(l, 2 * m - 1), -s.coefficients(l, 2 * m));
      g[2 * l + q] = v;
    }
    g = trimmed(g);
    for (int d = 0; d < m && g.size() > 0; ++d) g = trimmed(divide_by_x(g));
    if (g.size() == 0) continue;
    Series h = Series::Zero((g.size() + 1) / 2);
    for (Eigen::Index l = 0; 2 * l < g.size(); ++l) h[l] = g[2 * l];
    out.add_term(m, h);
  }
  return out;
}

}  // namespace grade2
