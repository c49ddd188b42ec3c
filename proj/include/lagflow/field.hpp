#pragma once

#include <lagflow/grid.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

namespace lagflow {

/// Real samples of an N-component field at the grid nodes.
template <std::size_t N>
class PhysicalField {
 public:
  static constexpr std::size_t components = N;

  explicit PhysicalField(GridPtr grid) : grid_(std::move(grid)) {
    for (auto& c : data_) c.assign(grid_->physical_size(), 0.0);
  }

  /// Samples f at every node. f returns a double (N == 1) or an
  /// std::array<double, N>.
  template <typename F>
  static PhysicalField sample(GridPtr grid, F&& f) {
    PhysicalField out(std::move(grid));
    const Grid& g = *out.grid_;
    for (int j = 0; j < g.n(); ++j) {
      for (int i = 0; i < g.n(); ++i) {
        const std::size_t idx = g.physical_index(i, j);
        if constexpr (N == 1 && std::convertible_to<std::invoke_result_t<F, double, double>, double>) {
          out.data_[0][idx] = f(g.node(i), g.node(j));
        } else {
          const auto v = f(g.node(i), g.node(j));
          for (std::size_t c = 0; c < N; ++c) out.data_[c][idx] = v[c];
        }
      }
    }
    return out;
  }

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }

  std::span<double> operator[](std::size_t c) { return data_[c]; }
  std::span<const double> operator[](std::size_t c) const { return data_[c]; }

  double& at(std::size_t c, int i, int j) { return data_[c][grid_->physical_index(i, j)]; }
  double at(std::size_t c, int i, int j) const { return data_[c][grid_->physical_index(i, j)]; }

  bool all_finite() const {
    for (const auto& c : data_) {
      if (!std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); })) return false;
    }
    return true;
  }

  /// Max over nodes of the pointwise Euclidean norm across components.
  double max_norm() const {
    double m = 0.0;
    for (std::size_t p = 0; p < grid_->physical_size(); ++p) {
      double s = 0.0;
      for (const auto& c : data_) s += c[p] * c[p];
      m = std::max(m, s);
    }
    return std::sqrt(m);
  }

  PhysicalField& operator+=(const PhysicalField& o) {
    for (std::size_t c = 0; c < N; ++c)
      for (std::size_t p = 0; p < data_[c].size(); ++p) data_[c][p] += o.data_[c][p];
    return *this;
  }
  PhysicalField& operator-=(const PhysicalField& o) {
    for (std::size_t c = 0; c < N; ++c)
      for (std::size_t p = 0; p < data_[c].size(); ++p) data_[c][p] -= o.data_[c][p];
    return *this;
  }
  PhysicalField& operator*=(double a) {
    for (auto& c : data_)
      for (auto& v : c) v *= a;
    return *this;
  }
  friend PhysicalField operator+(PhysicalField a, const PhysicalField& b) { return a += b; }
  friend PhysicalField operator-(PhysicalField a, const PhysicalField& b) { return a -= b; }
  friend PhysicalField operator*(double s, PhysicalField a) { return a *= s; }

 private:
  GridPtr grid_;
  std::array<std::vector<double>, N> data_;
};

/// Half-plane Fourier coefficients of a real N-component field.
template <std::size_t N>
class SpectralField {
 public:
  static constexpr std::size_t components = N;

  explicit SpectralField(GridPtr grid) : grid_(std::move(grid)) {
    for (auto& c : data_) c.assign(grid_->spectral_size(), Complex{});
  }

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }

  std::span<Complex> operator[](std::size_t c) { return data_[c]; }
  std::span<const Complex> operator[](std::size_t c) const { return data_[c]; }

  Complex& at(std::size_t c, int row, int col) { return data_[c][grid_->spectral_index(row, col)]; }
  Complex at(std::size_t c, int row, int col) const {
    return data_[c][grid_->spectral_index(row, col)];
  }

  /// Coefficient of exp(i(k1 x + k2 y)) for any wavenumber in the centred
  /// range, reconstructing the missing half-plane by conjugate symmetry.
  Complex coefficient(std::size_t c, int k1, int k2) const {
    const Grid& g = *grid_;
    const int half = g.n() / 2;
    if (k1 < -half || k1 >= half || k2 < -half || k2 >= half) return {};
    if (k1 >= 0) return at(c, g.row_of(k2), k1);
    const int mk2 = k2 == -half ? -half : -k2;
    return std::conj(at(c, g.row_of(mk2), -k1));
  }

  /// Mean value of component c over the torus.
  double mean(std::size_t c = 0) const { return data_[c][0].real(); }

  void zero_mean() {
    for (auto& c : data_) c[0] = Complex{};
  }

  /// Applies the 2/3-rule truncation in place.
  SpectralField& dealias() {
    const Grid& g = *grid_;
    for (int r = 0; r < g.n(); ++r)
      for (int col = 0; col < g.spectral_cols(); ++col)
        if (!g.retained(r, col))
          for (auto& c : data_) c[g.spectral_index(r, col)] = Complex{};
    return *this;
  }

  /// Applies a real per-mode multiplier m(row, col) to every component.
  template <typename F>
  SpectralField& scale_modes(F&& m) {
    const Grid& g = *grid_;
    for (int r = 0; r < g.n(); ++r)
      for (int col = 0; col < g.spectral_cols(); ++col) {
        const double f = m(r, col);
        for (auto& c : data_) c[g.spectral_index(r, col)] *= f;
      }
    return *this;
  }

  bool all_finite() const {
    for (const auto& c : data_)
      for (const auto& v : c)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

  /// Largest coefficient modulus, over all components.
  double max_abs() const {
    double m = 0.0;
    for (const auto& c : data_)
      for (const auto& v : c) m = std::max(m, std::abs(v));
    return m;
  }

  SpectralField& operator+=(const SpectralField& o) {
    for (std::size_t c = 0; c < N; ++c)
      for (std::size_t p = 0; p < data_[c].size(); ++p) data_[c][p] += o.data_[c][p];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    for (std::size_t c = 0; c < N; ++c)
      for (std::size_t p = 0; p < data_[c].size(); ++p) data_[c][p] -= o.data_[c][p];
    return *this;
  }
  SpectralField& operator*=(double a) {
    for (auto& c : data_)
      for (auto& v : c) v *= a;
    return *this;
  }
  /// this += a * o
  SpectralField& axpy(double a, const SpectralField& o) {
    for (std::size_t c = 0; c < N; ++c)
      for (std::size_t p = 0; p < data_[c].size(); ++p) data_[c][p] += a * o.data_[c][p];
    return *this;
  }
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

 private:
  GridPtr grid_;
  std::array<std::vector<Complex>, N> data_;
};

using ScalarField = PhysicalField<1>;
using VectorField = PhysicalField<2>;
/// Matrix field, components (11, 12, 21, 22); entry ij is d u_i / d x_j.
using MatrixField = PhysicalField<4>;
using ScalarSpectrum = SpectralField<1>;
using VectorSpectrum = SpectralField<2>;
using MatrixSpectrum = SpectralField<4>;

template <std::size_t N>
SpectralField<N> to_spectral(const PhysicalField<N>& f) {
  if (!f.all_finite()) throw std::domain_error("to_spectral: field has non-finite samples");
  SpectralField<N> out(f.grid_ptr());
  for (std::size_t c = 0; c < N; ++c) f.grid().forward(f[c].data(), out[c].data());
  return out;
}

template <std::size_t N>
PhysicalField<N> to_physical(const SpectralField<N>& f) {
  if (!f.all_finite()) throw std::domain_error("to_physical: field has non-finite coefficients");
  PhysicalField<N> out(f.grid_ptr());
  for (std::size_t c = 0; c < N; ++c) f.grid().inverse(f[c].data(), out[c].data());
  return out;
}

/// Transform to the other representation.
template <std::size_t N>
SpectralField<N> transform(const PhysicalField<N>& f) {
  return to_spectral(f);
}
template <std::size_t N>
PhysicalField<N> transform(const SpectralField<N>& f) {
  return to_physical(f);
}

template <std::size_t N>
SpectralField<N> as_spectral(const SpectralField<N>& f) {
  return f;
}
template <std::size_t N>
SpectralField<N> as_spectral(const PhysicalField<N>& f) {
  return to_spectral(f);
}

/// Assembles a multi-component spectrum from scalar spectra.
template <typename... S>
SpectralField<sizeof...(S)> stack(const S&... parts) {
  const auto& first = std::get<0>(std::tie(parts...));
  SpectralField<sizeof...(S)> out(first.grid_ptr());
  std::size_t c = 0;
  ((std::ranges::copy(parts[0], out[c].begin()), ++c), ...);
  return out;
}

template <std::size_t N>
SpectralField<1> component(const SpectralField<N>& f, std::size_t c) {
  SpectralField<1> out(f.grid_ptr());
  std::ranges::copy(f[c], out[0].begin());
  return out;
}

template <std::size_t N>
PhysicalField<1> component(const PhysicalField<N>& f, std::size_t c) {
  PhysicalField<1> out(f.grid_ptr());
  std::ranges::copy(f[c], out[0].begin());
  return out;
}

}  // namespace lagflow
