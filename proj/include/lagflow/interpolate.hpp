#pragma once

#include <lagflow/field.hpp>

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace lagflow {

using Vec2 = std::array<double, 2>;

/// Maps a coordinate into [0, 2pi).
inline double wrap_periodic(double x) {
  double w = x - kTwoPi * std::floor(x / kTwoPi);
  return w >= kTwoPi ? 0.0 : w;
}

namespace detail {
struct SplineStencil {
  int i0;
  std::array<double, 4> w;
};

// Uniform cubic B-spline weights for nodes i0-1 .. i0+2.
inline SplineStencil spline_stencil(double x, const Grid& g) {
  const double s = wrap_periodic(x) / g.spacing();
  double fl = std::floor(s);
  double t = s - fl;
  int i0 = static_cast<int>(fl);
  if (i0 >= g.n()) {
    i0 -= g.n();
  }
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double omt = 1.0 - t;
  return {i0,
          {omt * omt * omt / 6.0, (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
           (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0, t3 / 6.0}};
}

inline int wrap_index(int i, int n) { return ((i % n) + n) % n; }
}  // namespace detail

/// Periodic bicubic interpolant: a C^2 tensor-product cubic B-spline that
/// matches the field at every node. The interpolation prefilter is applied
/// in spectral space by dividing out the B-spline symbol (4 + 2 cos kh) / 6
/// on each axis.
template <std::size_t N>
class PeriodicSpline {
 public:
  explicit PeriodicSpline(const SpectralField<N>& f) : grid_(f.grid_ptr()) {
    const Grid& g = *grid_;
    SpectralField<N> pre = f;
    const double h = g.spacing();
    pre.scale_modes([&](int r, int c) {
      const double b1 = (4.0 + 2.0 * std::cos(g.k1(c) * h)) / 6.0;
      const double b2 = (4.0 + 2.0 * std::cos(g.k2(r) * h)) / 6.0;
      return 1.0 / (b1 * b2);
    });
    for (std::size_t c = 0; c < N; ++c) {
      coeffs_[c].resize(g.physical_size());
      g.inverse(pre[c].data(), coeffs_[c].data());
    }
  }

  explicit PeriodicSpline(const PhysicalField<N>& f) : PeriodicSpline(to_spectral(f)) {}

  const Grid& grid() const { return *grid_; }

  std::array<double, N> operator()(double x, double y) const {
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw std::domain_error("interpolate: non-finite point coordinate");
    }
    const Grid& g = *grid_;
    const auto sx = detail::spline_stencil(x, g);
    const auto sy = detail::spline_stencil(y, g);
    const int n = g.n();
    std::array<int, 4> ix;
    for (int a = 0; a < 4; ++a) ix[a] = detail::wrap_index(sx.i0 - 1 + a, n);
    std::array<double, N> out{};
    for (int b = 0; b < 4; ++b) {
      const std::size_t row = static_cast<std::size_t>(detail::wrap_index(sy.i0 - 1 + b, n)) * n;
      for (std::size_t c = 0; c < N; ++c) {
        const double* line = coeffs_[c].data() + row;
        const double acc =
            sx.w[0] * line[ix[0]] + sx.w[1] * line[ix[1]] + sx.w[2] * line[ix[2]] + sx.w[3] * line[ix[3]];
        out[c] += sy.w[b] * acc;
      }
    }
    return out;
  }

 private:
  GridPtr grid_;
  std::array<std::vector<double>, N> coeffs_;
};

/// Interpolates a physical field at arbitrary points (wrapped periodically).
template <std::size_t N>
std::vector<std::array<double, N>> interpolate(const PhysicalField<N>& f, std::span<const Vec2> points) {
  const PeriodicSpline<N> spline(f);
  std::vector<std::array<double, N>> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(spline(p[0], p[1]));
  return out;
}

/// Exact trigonometric evaluation of the spectral series at one point.
/// O(n^2) per point; used as an interpolation oracle on small grids.
template <std::size_t N>
std::array<double, N> evaluate_trig(const SpectralField<N>& f, double x, double y) {
  const Grid& g = f.grid();
  std::vector<Complex> ex(g.spectral_cols()), ey(g.n());
  for (int c = 0; c < g.spectral_cols(); ++c) ex[c] = g.multiplicity(c) * std::polar(1.0, g.k1(c) * x);
  for (int r = 0; r < g.n(); ++r) ey[r] = std::polar(1.0, g.k2(r) * y);
  std::array<double, N> out{};
  for (std::size_t comp = 0; comp < N; ++comp) {
    double acc = 0.0;
    for (int r = 0; r < g.n(); ++r) {
      Complex row = 0.0;
      for (int c = 0; c < g.spectral_cols(); ++c) row += f.at(comp, r, c) * ex[c];
      acc += std::real(row * ey[r]);
    }
    out[comp] = acc;
  }
  return out;
}

}  // namespace lagflow
