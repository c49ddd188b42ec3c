#pragma once

#include <lagflow/field.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

/// Fourier-multiplier differential operators on the periodic grid.
///
/// All operators act on half-plane spectra. First derivatives use the
/// Nyquist-zeroed wavenumbers of Grid::d1/d2; even-order operators use the
/// true |k|^2.
namespace lagflow {

namespace detail {
inline Complex i_times(double k, Complex z) { return {-k * z.imag(), k * z.real()}; }
}  // namespace detail

inline VectorSpectrum grad(const ScalarSpectrum& f) {
  const Grid& g = f.grid();
  VectorSpectrum out(f.grid_ptr());
  for (int r = 0; r < g.n(); ++r)
    for (int c = 0; c < g.spectral_cols(); ++c) {
      const Complex v = f.at(0, r, c);
      out.at(0, r, c) = detail::i_times(g.d1(c), v);
      out.at(1, r, c) = detail::i_times(g.d2(r), v);
    }
  return out;
}

inline ScalarSpectrum div(const VectorSpectrum& u) {
  const Grid& g = u.grid();
  ScalarSpectrum out(u.grid_ptr());
  for (int r = 0; r < g.n(); ++r)
    for (int c = 0; c < g.spectral_cols(); ++c)
      out.at(0, r, c) = detail::i_times(g.d1(c), u.at(0, r, c)) + detail::i_times(g.d2(r), u.at(1, r, c));
  return out;
}

/// curl2d(u) = d1 u2 - d2 u1.
inline ScalarSpectrum curl2d(const VectorSpectrum& u) {
  const Grid& g = u.grid();
  ScalarSpectrum out(u.grid_ptr());
  for (int r = 0; r < g.n(); ++r)
    for (int c = 0; c < g.spectral_cols(); ++c)
      out.at(0, r, c) = detail::i_times(g.d1(c), u.at(1, r, c)) - detail::i_times(g.d2(r), u.at(0, r, c));
  return out;
}

/// Row-wise divergence of a matrix field: (div M)_i = d_j M_ij.
inline VectorSpectrum div_rows(const MatrixSpectrum& m) {
  const Grid& g = m.grid();
  VectorSpectrum out(m.grid_ptr());
  for (int r = 0; r < g.n(); ++r)
    for (int c = 0; c < g.spectral_cols(); ++c) {
      out.at(0, r, c) = detail::i_times(g.d1(c), m.at(0, r, c)) + detail::i_times(g.d2(r), m.at(1, r, c));
      out.at(1, r, c) = detail::i_times(g.d1(c), m.at(2, r, c)) + detail::i_times(g.d2(r), m.at(3, r, c));
    }
  return out;
}

/// Velocity gradient, entry ij = d u_i / d x_j, stored (11, 12, 21, 22).
inline MatrixSpectrum gradient_matrix(const VectorSpectrum& u) {
  const Grid& g = u.grid();
  MatrixSpectrum out(u.grid_ptr());
  for (int r = 0; r < g.n(); ++r)
    for (int c = 0; c < g.spectral_cols(); ++c) {
      for (std::size_t i = 0; i < 2; ++i) {
        out.at(2 * i, r, c) = detail::i_times(g.d1(c), u.at(i, r, c));
        out.at(2 * i + 1, r, c) = detail::i_times(g.d2(r), u.at(i, r, c));
      }
    }
  return out;
}

template <std::size_t N>
SpectralField<N> laplacian(SpectralField<N> f) {
  const Grid& g = f.grid();
  return std::move(f.scale_modes([&g](int r, int c) { return -g.k_squared(r, c); }));
}

/// Zero-mean inverse Laplacian: laplacian(result) = f - mean(f).
template <std::size_t N>
SpectralField<N> inv_laplacian(SpectralField<N> f) {
  const Grid& g = f.grid();
  return std::move(f.scale_modes([&g](int r, int c) {
    const double k2 = g.k_squared(r, c);
    return k2 == 0.0 ? 0.0 : -1.0 / k2;
  }));
}

/// (1 - alpha Laplacian) applied componentwise.
template <std::size_t N>
SpectralField<N> helmholtz(SpectralField<N> f, double alpha) {
  const Grid& g = f.grid();
  return std::move(f.scale_modes([&](int r, int c) { return 1.0 + alpha * g.k_squared(r, c); }));
}

/// (1 - alpha Laplacian)^{-1} applied componentwise. Requires alpha > 0.
template <std::size_t N>
SpectralField<N> helmholtz_inv(SpectralField<N> f, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("helmholtz_inv: alpha must be > 0, got " + std::to_string(alpha));
  const Grid& g = f.grid();
  return std::move(f.scale_modes([&](int r, int c) { return 1.0 / (1.0 + alpha * g.k_squared(r, c)); }));
}

/// L2-orthogonal projection onto divergence-free fields, (I - k k^T / |k|^2)
/// per mode.
inline VectorSpectrum leray_project(VectorSpectrum u) {
  const Grid& g = u.grid();
  for (int r = 0; r < g.n(); ++r)
    for (int c = 0; c < g.spectral_cols(); ++c) {
      const double a = g.d1(c);
      const double b = g.d2(r);
      const double kk = a * a + b * b;
      if (kk == 0.0) continue;
      Complex& u1 = u.at(0, r, c);
      Complex& u2 = u.at(1, r, c);
      const Complex kdotu = (a * u1 + b * u2) / kk;
      u1 -= a * kdotu;
      u2 -= b * kdotu;
    }
  return u;
}

/// Inverse of the vector operator (1 - alpha (Laplacian + grad div)), whose
/// symbol is (1 + alpha |k|^2) I + alpha k k^T. On divergence-free input it
/// agrees with helmholtz_inv.
inline VectorSpectrum stokes_operator_inv(VectorSpectrum u, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("stokes_operator_inv: alpha must be > 0");
  const Grid& g = u.grid();
  for (int r = 0; r < g.n(); ++r)
    for (int c = 0; c < g.spectral_cols(); ++c) {
      const double a = g.d1(c);
      const double b = g.d2(r);
      const double diag = 1.0 + alpha * g.k_squared(r, c);
      Complex& u1 = u.at(0, r, c);
      Complex& u2 = u.at(1, r, c);
      // Sherman-Morrison on diag*I + alpha k k^T.
      const Complex kdotu = a * u1 + b * u2;
      const Complex corr = alpha * kdotu / (diag + alpha * (a * a + b * b));
      u1 = (u1 - a * corr) / diag;
      u2 = (u2 - b * corr) / diag;
    }
  return u;
}

/// u = grad-perp of the stream function, grad-perp = (-d2, d1), with
/// Laplacian(psi) = omega - mean(omega). The removed mean is reported
/// through removed_mean when non-null.
inline VectorSpectrum velocity_from_vorticity(const ScalarSpectrum& omega, double* removed_mean = nullptr) {
  if (removed_mean) *removed_mean = omega.mean();
  const ScalarSpectrum psi = inv_laplacian(omega);
  const VectorSpectrum dpsi = grad(psi);
  VectorSpectrum u(omega.grid_ptr());
  for (std::size_t p = 0; p < u[0].size(); ++p) {
    u[0][p] = -dpsi[1][p];
    u[1][p] = dpsi[0][p];
  }
  return u;
}

/// L2 inner product over the torus, by Parseval.
template <std::size_t N>
double inner_product(const SpectralField<N>& a, const SpectralField<N>& b) {
  const Grid& g = a.grid();
  double sum = 0.0;
  for (std::size_t comp = 0; comp < N; ++comp)
    for (int r = 0; r < g.n(); ++r)
      for (int c = 0; c < g.spectral_cols(); ++c)
        sum += g.multiplicity(c) * std::real(a.at(comp, r, c) * std::conj(b.at(comp, r, c)));
  return g.length() * g.length() * sum;
}

/// (sum_k (1 + |k|^2)^s |uhat_k|^2)^{1/2} scaled so that s = 0 gives the L2
/// norm over the torus. Vector fields sum over components.
template <std::size_t N>
double sobolev_norm(const SpectralField<N>& f, double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("sobolev_norm: s must be >= 0");
  const Grid& g = f.grid();
  double sum = 0.0;
  for (int r = 0; r < g.n(); ++r)
    for (int c = 0; c < g.spectral_cols(); ++c) {
      double amp = 0.0;
      for (std::size_t comp = 0; comp < N; ++comp) amp += std::norm(f.at(comp, r, c));
      if (amp == 0.0) continue;
      sum += g.multiplicity(c) * std::pow(1.0 + g.k_squared(r, c), s) * amp;
    }
  return g.length() * std::sqrt(sum);
}

/// Pointwise product, transformed and truncated by the 2/3 rule.
inline ScalarSpectrum dealiased_product(std::span<const double> a, std::span<const double> b, const GridPtr& grid) {
  ScalarField prod(grid);
  auto out = prod[0];
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = a[p] * b[p];
  auto spec = to_spectral(prod);
  spec.dealias();
  return spec;
}

/// Upper bound on max |div u| from the coefficient moduli; needs no transform.
inline double divergence_bound(const VectorSpectrum& u) {
  const Grid& g = u.grid();
  double sum = 0.0;
  for (int r = 0; r < g.n(); ++r)
    for (int c = 0; c < g.spectral_cols(); ++c)
      sum += g.multiplicity(c) * std::abs(g.d1(c) * u.at(0, r, c) + g.d2(r) * u.at(1, r, c));
  return sum;
}

// Physical-representation convenience overloads.
inline VectorSpectrum grad(const ScalarField& f) { return grad(to_spectral(f)); }
inline ScalarSpectrum div(const VectorField& u) { return div(to_spectral(u)); }
inline ScalarSpectrum curl2d(const VectorField& u) { return curl2d(to_spectral(u)); }
template <std::size_t N>
SpectralField<N> laplacian(const PhysicalField<N>& f) {
  return laplacian(to_spectral(f));
}
inline VectorSpectrum leray_project(const VectorField& u) { return leray_project(to_spectral(u)); }
template <std::size_t N>
double sobolev_norm(const PhysicalField<N>& f, double s) {
  return sobolev_norm(to_spectral(f), s);
}

}  // namespace lagflow
