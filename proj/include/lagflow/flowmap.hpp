#pragma once

#include <lagflow/interpolate.hpp>
#include <lagflow/operators.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lagflow {

/// 2x2 matrix, row-major (11, 12, 21, 22).
using Mat2 = std::array<double, 4>;

inline constexpr Mat2 kIdentity2{1.0, 0.0, 0.0, 1.0};

inline Mat2 matmul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
          a[2] * b[1] + a[3] * b[3]};
}

inline double det(const Mat2& a) { return a[0] * a[3] - a[1] * a[2]; }

/// Lagrangian flow map on an m x m lattice of particles: unwrapped positions
/// eta, tangent maps T = d eta / dx and independently integrated inverse
/// tangents Tinv. Particle (i, j) starts at (2 pi i / m, 2 pi j / m) and is
/// stored at index j*m + i.
struct FlowMap {
  int m = 0;
  double t = 0.0;
  std::vector<Vec2> positions;
  std::vector<Mat2> tangent;
  std::vector<Mat2> inverse_tangent;
  // Low-order bits of eta lost to rounding in the step update (compensated
  // summation); eta is positions + position_carry to within one rounding.
  std::vector<Vec2> position_carry;

  std::size_t size() const { return positions.size(); }
  Vec2 lattice_point(std::size_t p) const {
    const double h = kTwoPi / m;
    return {h * static_cast<double>(p % m), h * static_cast<double>(p / m)};
  }
};

inline FlowMap init_flow_map(int m) {
  if (m < 2) throw std::invalid_argument("flow map needs m >= 2 particles per axis, got " + std::to_string(m));
  FlowMap fm;
  fm.m = m;
  const std::size_t count = static_cast<std::size_t>(m) * m;
  fm.positions.resize(count);
  for (std::size_t p = 0; p < count; ++p) fm.positions[p] = fm.lattice_point(p);
  fm.tangent.assign(count, kIdentity2);
  fm.inverse_tangent.assign(count, kIdentity2);
  fm.position_carry.assign(count, Vec2{0.0, 0.0});
  return fm;
}

/// Velocity and velocity gradient prepared for evaluation at particle
/// positions. Components: u1, u2, then grad u as (11, 12, 21, 22).
class SampledVelocity {
 public:
  explicit SampledVelocity(const VectorSpectrum& u) : spline_(stack_with_gradient(u, gradient_matrix(u))) {}

  SampledVelocity(const VectorField& u, const MatrixField& grad_u)
      : spline_(stack_with_gradient(to_spectral(u), to_spectral(grad_u))) {}

  std::array<double, 6> operator()(const Vec2& x) const { return spline_(x[0], x[1]); }

 private:
  static SpectralField<6> stack_with_gradient(const VectorSpectrum& u, const MatrixSpectrum& a) {
    SpectralField<6> out(u.grid_ptr());
    for (std::size_t c = 0; c < 2; ++c) std::ranges::copy(u[c], out[c].begin());
    for (std::size_t c = 0; c < 4; ++c) std::ranges::copy(a[c], out[c + 2].begin());
    return out;
  }

  PeriodicSpline<6> spline_;
};

/// Time derivatives of (eta, T, Tinv).
struct FlowDerivative {
  std::vector<Vec2> positions;
  std::vector<Mat2> tangent;
  std::vector<Mat2> inverse_tangent;
};

/// d eta = u(eta), dT = grad u(eta) T, dTinv = -Tinv grad u(eta).
inline FlowDerivative flow_rhs(const FlowMap& fm, const SampledVelocity& velocity) {
  FlowDerivative d;
  const std::size_t count = fm.size();
  d.positions.resize(count);
  d.tangent.resize(count);
  d.inverse_tangent.resize(count);
  for (std::size_t p = 0; p < count; ++p) {
    const Vec2& x = fm.positions[p];
    if (!std::isfinite(x[0]) || !std::isfinite(x[1])) {
      throw std::domain_error("flow_rhs: non-finite particle position at index " + std::to_string(p));
    }
    const auto s = velocity(x);
    const Mat2 grad_u{s[2], s[3], s[4], s[5]};
    d.positions[p] = {s[0], s[1]};
    d.tangent[p] = matmul(grad_u, fm.tangent[p]);
    const Mat2 g = matmul(fm.inverse_tangent[p], grad_u);
    d.inverse_tangent[p] = {-g[0], -g[1], -g[2], -g[3]};
  }
  return d;
}

namespace detail {
inline FlowMap advance(const FlowMap& fm, const FlowDerivative& d, double h) {
  FlowMap out = fm;
  for (std::size_t p = 0; p < fm.size(); ++p) {
    for (int a = 0; a < 2; ++a) out.positions[p][a] += h * d.positions[p][a];
    for (int a = 0; a < 4; ++a) {
      out.tangent[p][a] += h * d.tangent[p][a];
      out.inverse_tangent[p][a] += h * d.inverse_tangent[p][a];
    }
  }
  out.t += h;
  return out;
}
}  // namespace detail

/// Classical RK4 step of (eta, T, Tinv). stages holds the velocity at the
/// four RK stage times t, t + dt/2, t + dt/2, t + dt, as produced by the
/// field integrator, so the coupled system stays fourth order.
inline FlowMap step_flow(const FlowMap& fm, std::span<const SampledVelocity> stages, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_flow: dt must be > 0");
  if (stages.size() != 4) throw std::invalid_argument("step_flow: exactly four stage velocities are required");
  const FlowDerivative k1 = flow_rhs(fm, stages[0]);
  const FlowDerivative k2 = flow_rhs(detail::advance(fm, k1, dt / 2), stages[1]);
  const FlowDerivative k3 = flow_rhs(detail::advance(fm, k2, dt / 2), stages[2]);
  const FlowDerivative k4 = flow_rhs(detail::advance(fm, k3, dt), stages[3]);

  FlowMap out = fm;
  const double w = dt / 6.0;
  for (std::size_t p = 0; p < fm.size(); ++p) {
    for (int a = 0; a < 2; ++a) {
      const double inc = w * (k1.positions[p][a] + 2 * k2.positions[p][a] + 2 * k3.positions[p][a] +
                              k4.positions[p][a]) + fm.position_carry[p][a];
      const double x = fm.positions[p][a] + inc;
      out.position_carry[p][a] = inc - (x - fm.positions[p][a]);
      out.positions[p][a] = x;
    }
    for (int a = 0; a < 4; ++a) {
      out.tangent[p][a] += w * (k1.tangent[p][a] + 2 * k2.tangent[p][a] + 2 * k3.tangent[p][a] + k4.tangent[p][a]);
      out.inverse_tangent[p][a] += w * (k1.inverse_tangent[p][a] + 2 * k2.inverse_tangent[p][a] +
                                        2 * k3.inverse_tangent[p][a] + k4.inverse_tangent[p][a]);
    }
  }
  out.t = fm.t + dt;
  return out;
}

/// max over particles of |det T - 1|.
inline double volume_defect(const FlowMap& fm) {
  double m = 0.0;
  for (const auto& t : fm.tangent) m = std::max(m, std::abs(det(t) - 1.0));
  return m;
}

/// max over particles of the row-sum norm of T Tinv - I.
inline double inverse_defect(const FlowMap& fm) {
  double m = 0.0;
  for (std::size_t p = 0; p < fm.size(); ++p) {
    const Mat2 e = matmul(fm.tangent[p], fm.inverse_tangent[p]);
    const double r1 = std::abs(e[0] - 1.0) + std::abs(e[1]);
    const double r2 = std::abs(e[2]) + std::abs(e[3] - 1.0);
    m = std::max({m, r1, r2});
  }
  return m;
}

namespace detail {
// H^r norm of one real m x m lattice function, normalised like sobolev_norm
// (r = 0 gives the L2 norm over the torus). Direct separable DFT.
inline double lattice_sobolev_norm(std::span<const double> f, int m, double r) {
  const auto wave = [m](int idx) { return idx <= m / 2 ? idx : idx - m; };
  std::vector<Complex> rows(static_cast<std::size_t>(m) * m);
  // Transform along x for every row.
  for (int j = 0; j < m; ++j)
    for (int a = 0; a < m; ++a) {
      Complex s{};
      for (int i = 0; i < m; ++i) s += f[static_cast<std::size_t>(j) * m + i] * std::polar(1.0, -kTwoPi * a * i / m);
      rows[static_cast<std::size_t>(j) * m + a] = s;
    }
  double sum = 0.0;
  const double norm = 1.0 / (static_cast<double>(m) * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Complex s{};
      for (int j = 0; j < m; ++j) s += rows[static_cast<std::size_t>(j) * m + a] * std::polar(1.0, -kTwoPi * b * j / m);
      s *= norm;
      const double k1 = wave(a), k2 = wave(b);
      sum += std::pow(1.0 + k1 * k1 + k2 * k2, r) * std::norm(s);
    }
  return kTwoPi * std::sqrt(sum);
}
}  // namespace detail

/// Discrete proxy for ||T eta||_{H^{s-1}}: the tangent entries, viewed as
/// functions on the Lagrangian particle lattice, measured in H^{s-1} and
/// combined in quadrature.
inline double sobolev_growth_monitor(const FlowMap& fm, double s) {
  if (!(s >= 1.0)) throw std::invalid_argument("sobolev_growth_monitor: s must be >= 1");
  std::vector<double> entry(fm.size());
  double total = 0.0;
  for (int c = 0; c < 4; ++c) {
    for (std::size_t p = 0; p < fm.size(); ++p) entry[p] = fm.tangent[p][c];
    const double v = detail::lattice_sobolev_norm(entry, fm.m, s - 1.0);
    total += v * v;
  }
  return std::sqrt(total);
}

}  // namespace lagflow
