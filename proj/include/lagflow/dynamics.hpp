#pragma once

#include <lagflow/operators.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lagflow {

enum class Model { euler, euler_alpha };

inline std::string_view to_string(Model m) { return m == Model::euler ? "euler" : "euler_alpha"; }

/// Model selection plus the Euler-alpha length scale alpha (length^2) and
/// viscosity nu.
struct ModelParams {
  Model model = Model::euler;
  double alpha = 0.0;
  double nu = 0.0;

  void validate() const {
    if (model == Model::euler_alpha && !(alpha > 0.0)) {
      throw std::invalid_argument("alpha must be > 0 for model euler_alpha");
    }
    if (!(nu >= 0.0)) throw std::invalid_argument("nu must be >= 0");
    if (model == Model::euler && nu != 0.0) {
      throw std::invalid_argument("nu must be 0 for model euler (the Euler equations are inviscid)");
    }
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline constexpr double kDivergenceTolerance = 1e-8;
inline constexpr double kConsistencyTolerance = 1e-8;

inline void require_divergence_free(const VectorSpectrum& u, std::string_view who) {
  const double scale = std::max(1.0, u.max_abs());
  if (divergence_bound(u) > kDivergenceTolerance * scale) {
    throw std::invalid_argument(std::string(who) + ": velocity is not divergence-free");
  }
}

namespace detail {

// Physical velocity and velocity gradient of a spectral velocity.
struct VelocitySamples {
  VectorField u;
  MatrixField grad_u;

  explicit VelocitySamples(const VectorSpectrum& uh)
      : u(to_physical(uh)), grad_u(to_physical(gradient_matrix(uh))) {}
};

template <typename F>
ScalarSpectrum dealiased_pointwise(const GridPtr& grid, F&& f) {
  ScalarField out(grid);
  auto o = out[0];
  for (std::size_t p = 0; p < o.size(); ++p) o[p] = f(p);
  auto spec = to_spectral(out);
  spec.dealias();
  return spec;
}

// (u . grad) u, each quadratic product truncated by the 2/3 rule.
inline VectorSpectrum advection(const VelocitySamples& s) {
  const auto u1 = s.u[0], u2 = s.u[1];
  const auto a11 = s.grad_u[0], a12 = s.grad_u[1], a21 = s.grad_u[2], a22 = s.grad_u[3];
  const GridPtr& g = s.u.grid_ptr();
  return stack(dealiased_pointwise(g, [&](std::size_t p) { return u1[p] * a11[p] + u2[p] * a12[p]; }),
               dealiased_pointwise(g, [&](std::size_t p) { return u1[p] * a21[p] + u2[p] * a22[p]; }));
}

// Tr(grad u . grad u) = d_j u_i d_i u_j.
inline ScalarSpectrum trace_grad_squared(const VelocitySamples& s) {
  const auto a11 = s.grad_u[0], a12 = s.grad_u[1], a21 = s.grad_u[2], a22 = s.grad_u[3];
  return dealiased_pointwise(s.u.grid_ptr(), [&](std::size_t p) {
    return a11[p] * a11[p] + 2.0 * a12[p] * a21[p] + a22[p] * a22[p];
  });
}

inline VectorSpectrum calU(const VelocitySamples& s, double alpha) {
  const auto& A = s.grad_u;
  const GridPtr& g = A.grid_ptr();
  auto a = [&](int i, int j, std::size_t p) { return A[2 * i + j][p]; };
  // M = A A^T + A A - A^T A, entrywise.
  auto entry = [&](int i, int j) {
    return dealiased_pointwise(g, [&, i, j](std::size_t p) {
      double v = 0.0;
      for (int k = 0; k < 2; ++k) v += a(i, k, p) * a(j, k, p) + a(i, k, p) * a(k, j, p) - a(k, i, p) * a(k, j, p);
      return v;
    });
  };
  const MatrixSpectrum m = stack(entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1));
  VectorSpectrum bracket = div_rows(m);
  bracket += grad(trace_grad_squared(s));
  bracket *= alpha;
  return stokes_operator_inv(std::move(bracket), alpha);
}

}  // namespace detail

/// grad Laplacian^{-1} [Tr(grad u . grad u)], the pressure term of the
/// Lagrangian Euler equation on the flat torus.
inline VectorSpectrum pressure_gradient(const VectorSpectrum& u) {
  require_divergence_free(u, "pressure_gradient");
  const detail::VelocitySamples s(u);
  return grad(inv_laplacian(detail::trace_grad_squared(s)));
}

/// Dealiased self-advection (u . grad) u.
inline VectorSpectrum advection(const VectorSpectrum& u) { return detail::advection(detail::VelocitySamples(u)); }

/// Euler velocity tendency, du/dt = -P[(u . grad) u].
inline VectorSpectrum euler_rhs(const VectorSpectrum& u) {
  require_divergence_free(u, "euler_rhs");
  return -1.0 * leray_project(advection(u));
}

/// Euler vorticity tendency -u . grad(omega).
inline ScalarSpectrum vorticity_rhs(const ScalarSpectrum& omega, const VectorSpectrum& u) {
  const ScalarSpectrum mismatch = curl2d(u) - omega;
  if (mismatch.max_abs() > kConsistencyTolerance * std::max(1.0, omega.max_abs())) {
    throw std::invalid_argument("vorticity_rhs: omega is not the curl of u");
  }
  const VectorField up = to_physical(u);
  const VectorField dw = to_physical(grad(omega));
  const auto u1 = up[0], u2 = up[1], w1 = dw[0], w2 = dw[1];
  return -1.0 * detail::dealiased_pointwise(u.grid_ptr(),
                                            [&](std::size_t p) { return u1[p] * w1[p] + u2[p] * w2[p]; });
}

/// (1 - alpha L)^{-1} { alpha div[A A^T + A A - A^T A] + alpha grad Tr(A A) },
/// A = grad u, L = Laplacian + grad div. At alpha = 1 this is the operator U(u)
/// of the second-grade Lagrangian equation.
inline VectorSpectrum calU(const VectorSpectrum& u, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("calU: alpha must be > 0");
  require_divergence_free(u, "calU");
  return detail::calU(detail::VelocitySamples(u), alpha);
}

/// Euler-alpha velocity tendency,
/// du/dt = P[nu (1 - alpha Lap)^{-1} Lap u - (u . grad) u - U(u)].
inline VectorSpectrum euler_alpha_rhs(const VectorSpectrum& u, const ModelParams& params) {
  if (params.model != Model::euler_alpha) throw std::invalid_argument("euler_alpha_rhs: model must be euler_alpha");
  if (!(params.alpha > 0.0)) throw std::invalid_argument("euler_alpha_rhs: alpha must be > 0");
  require_divergence_free(u, "euler_alpha_rhs");
  const detail::VelocitySamples s(u);
  VectorSpectrum rhs = detail::advection(s);
  rhs += detail::calU(s, params.alpha);
  rhs *= -1.0;
  if (params.nu != 0.0) rhs.axpy(params.nu, helmholtz_inv(laplacian(u), params.alpha));
  return leray_project(std::move(rhs));
}

/// Velocity tendency for either model.
inline VectorSpectrum velocity_rhs(const VectorSpectrum& u, const ModelParams& params) {
  return params.model == Model::euler ? euler_rhs(u) : euler_alpha_rhs(u, params);
}

/// q = curl2d((1 - alpha Lap) u).
inline ScalarSpectrum potential_vorticity(const VectorSpectrum& u, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("potential_vorticity: alpha must be > 0");
  return curl2d(helmholtz(u, alpha));
}

/// Inverts q -> omega = (1 - alpha Lap)^{-1} q -> u = grad-perp Lap^{-1} omega.
inline VectorSpectrum velocity_from_q(const ScalarSpectrum& q, double alpha) {
  return velocity_from_vorticity(helmholtz_inv(q, alpha));
}

/// Potential-vorticity tendency -u . grad q + nu Lap omega,
/// omega = (1 - alpha Lap)^{-1} q.
inline ScalarSpectrum q_transport_rhs(const ScalarSpectrum& q, const VectorSpectrum& u, double nu, double alpha) {
  const ScalarSpectrum mismatch = potential_vorticity(u, alpha) - q;
  if (mismatch.max_abs() > kConsistencyTolerance * std::max(1.0, q.max_abs())) {
    throw std::invalid_argument("q_transport_rhs: q is not the potential vorticity of u");
  }
  const VectorField up = to_physical(u);
  const VectorField dq = to_physical(grad(q));
  const auto u1 = up[0], u2 = up[1], q1 = dq[0], q2 = dq[1];
  ScalarSpectrum rhs = -1.0 * detail::dealiased_pointwise(
                                  u.grid_ptr(), [&](std::size_t p) { return u1[p] * q1[p] + u2[p] * q2[p]; });
  if (nu != 0.0) rhs.axpy(nu, laplacian(helmholtz_inv(q, alpha)));
  return rhs;
}

}  // namespace lagflow
