#pragma once

#include <lagflow/config.hpp>
#include <lagflow/diagnostics.hpp>
#include <lagflow/initial_condition.hpp>
#include <lagflow/state.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lagflow {

/// Raised when a non-finite value appears in any stage of a step.
class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kCflLimit = 0.5;

namespace detail {

inline std::string instability_report(const SimState& s, double dt, const char* what) {
  std::ostringstream os;
  os << "instability: " << what << " during step from t = " << format_double(s.t) << " with dt = " << format_double(dt)
     << " (model " << to_string(s.params.model) << ", alpha = " << format_double(s.params.alpha)
     << ", nu = " << format_double(s.params.nu) << ", max|u| at step start = ";
  try {
    os << format_double(to_physical(s.u).max_norm());
  } catch (const std::exception&) {
    os << "non-finite";
  }
  os << ")";
  return os.str();
}

/// Classical RK4 on a field g with tendency f(g); returns the increment
/// over the step and the four stage values g, g + dt/2 k1, g + dt/2 k2,
/// g + dt k3.
template <typename Field, typename Rhs>
std::pair<Field, std::array<Field, 4>> rk4_stages(const Field& g, double dt, Rhs&& f) {
  const Field k1 = f(g);
  Field g2 = g;
  g2.axpy(0.5 * dt, k1);
  const Field k2 = f(g2);
  Field g3 = g;
  g3.axpy(0.5 * dt, k2);
  const Field k3 = f(g3);
  Field g4 = g;
  g4.axpy(dt, k3);
  const Field k4 = f(g4);
  Field inc = k1;
  inc *= dt / 6.0;
  inc.axpy(dt / 3.0, k2);
  inc.axpy(dt / 3.0, k3);
  inc.axpy(dt / 6.0, k4);
  return {std::move(inc), {g, std::move(g2), std::move(g3), std::move(g4)}};
}

/// g + inc with the rounding residue kept in carry.
template <typename Field>
Field compensated_add(const Field& g, Field inc, Field& carry) {
  inc += carry;
  Field out = g + inc;
  carry = inc - (out - g);
  return out;
}

}  // namespace detail

/// One RK4 step of the coupled (u, eta, T, Tinv) system. The field stage
/// velocities drive the particle stages. In vorticity form the prognostic
/// variable is omega (euler) or q (euler_alpha); u is recovered from it.
inline SimState step(const SimState& state, double dt, Formulation form = Formulation::velocity) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  const ModelParams& params = state.params;
  try {
    std::vector<SampledVelocity> stages;
    stages.reserve(4);
    VectorSpectrum u_next(state.u.grid_ptr());
    std::optional<VectorSpectrum> carry;
    if (form == Formulation::velocity) {
      auto [inc, us] = detail::rk4_stages(state.u, dt, [&](const VectorSpectrum& u) { return velocity_rhs(u, params); });
      for (const auto& u : us) stages.emplace_back(u);
      // The increment is re-projected so roundoff divergence never reaches u.
      carry = state.u_carry.value_or(VectorSpectrum(state.u.grid_ptr()));
      u_next = detail::compensated_add(state.u, leray_project(std::move(inc)), *carry);
    } else if (params.model == Model::euler) {
      const ScalarSpectrum w = curl2d(state.u);
      auto [inc, ws] = detail::rk4_stages(w, dt, [](const ScalarSpectrum& x) {
        return vorticity_rhs(x, velocity_from_vorticity(x));
      });
      for (const auto& x : ws) stages.emplace_back(velocity_from_vorticity(x));
      u_next = velocity_from_vorticity(w + inc);
    } else {
      const double a = params.alpha, nu = params.nu;
      const ScalarSpectrum q = potential_vorticity(state.u, a);
      auto [inc, qs] = detail::rk4_stages(q, dt, [&](const ScalarSpectrum& x) {
        return q_transport_rhs(x, velocity_from_q(x, a), nu, a);
      });
      for (const auto& x : qs) stages.emplace_back(velocity_from_q(x, a));
      u_next = velocity_from_q(q + inc, a);
    }
    if (!u_next.all_finite()) throw std::domain_error("non-finite velocity after update");
    SimState next{state.t + dt, std::move(u_next), step_flow(state.fm, stages, dt), params, std::move(carry)};
    next.fm.t = next.t;
    return next;
  } catch (const InstabilityError&) {
    throw;
  } catch (const std::domain_error& e) {
    throw InstabilityError(detail::instability_report(state, dt, e.what()));
  }
}

/// Start-of-run CFL number dt * max|u0| * n / (2 pi).
inline double cfl_number(const VectorSpectrum& u, double dt) {
  return dt * to_physical(u).max_norm() * u.grid().n() / kTwoPi;
}

struct RunResult {
  SimState state;
  std::vector<DiagnosticsRecord> series;
  double cfl = 0.0;
  bool cfl_warning = false;
  long steps = 0;
};

/// Receives the state at step 0, every snapshot_every steps and the end.
using SnapshotSink = std::function<void(const SimState&, long step)>;

struct RunOptions {
  bool diagnostics = true;
  SnapshotSink snapshots;
};

inline long step_count(double t_end, double dt) {
  if (t_end <= 0.0) return 0;
  return std::max(1L, static_cast<long>(std::ceil(t_end / dt * (1.0 - 1e-12))));
}

/// Integrates from an explicit initial velocity with fixed steps dt; the
/// last step is shortened to land on t_end.
inline RunResult run_from(const SimConfig& config, VectorSpectrum u0, const RunOptions& options = {}) {
  validate(config);
  config.params.validate();
  require_divergence_free(u0, "run");
  RunResult out{SimState{0.0, std::move(u0), init_flow_map(config.m), config.params, std::nullopt}, {}, 0.0, false, 0};
  out.cfl = cfl_number(out.state.u, config.dt);
  out.cfl_warning = out.cfl > kCflLimit;
  const long steps = step_count(config.t_end, config.dt);
  auto observe = [&](long i) {
    const bool last = i == steps;
    if (options.diagnostics && (i % config.diag_every == 0 || last)) out.series.push_back(sample(out.state, config.s));
    if (options.snapshots && (i == 0 || last || (config.snapshot_every > 0 && i % config.snapshot_every == 0))) {
      options.snapshots(out.state, i);
    }
  };
  observe(0);
  for (long i = 0; i < steps; ++i) {
    const bool last = i + 1 == steps;
    const double h = last ? config.t_end - static_cast<double>(i) * config.dt : config.dt;
    out.state = step(out.state, h, config.form);
    out.state.t = last ? config.t_end : static_cast<double>(i + 1) * config.dt;
    out.state.fm.t = out.state.t;
    observe(i + 1);
  }
  out.steps = steps;
  return out;
}

inline VectorSpectrum initial_velocity(const SimConfig& config) {
  return build_ic(config.ic, make_grid(config.n), config.params);
}

inline RunResult run(const SimConfig& config, const RunOptions& options = {}) {
  return run_from(config, initial_velocity(config), options);
}

// ---------------------------------------------------------------------------
// Distances

/// Sup and L2 distances between two particle maps on the torus, each
/// displacement reduced to its nearest periodic image.
struct MapDistance {
  double sup = 0.0;
  double l2 = 0.0;
};

inline MapDistance flow_map_distance(const FlowMap& a, const FlowMap& b) {
  if (a.m != b.m) throw std::invalid_argument("flow_map_distance: lattice sizes differ");
  MapDistance d;
  double sum = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    double r2 = 0.0;
    for (int c = 0; c < 2; ++c) {
      double x = a.positions[p][c] - b.positions[p][c];
      x -= kTwoPi * std::round(x / kTwoPi);
      r2 += x * x;
    }
    d.sup = std::max(d.sup, std::sqrt(r2));
    sum += r2;
  }
  const double h = kTwoPi / a.m;
  d.l2 = std::sqrt(sum) * h;
  return d;
}

inline MapDistance field_distance(const VectorSpectrum& a, const VectorSpectrum& b) {
  const VectorSpectrum diff = a - b;
  return {to_physical(diff).max_norm(), std::sqrt(inner_product(diff, diff))};
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 matched points");
  const std::size_t k = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= k;
  my /= k;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Viscosity sweep

struct SweepEntry {
  double nu = 0.0;
  MapDistance eta;
  MapDistance u;
};

struct SweepResult {
  std::vector<SweepEntry> entries;  // in the order of nu_list
  double eta_sup_slope = 0.0;
  double u_l2_slope = 0.0;
  bool eta_monotone = false;  // E strictly decreasing as nu decreases
  bool u_monotone = false;
};

inline void validate_sweep(const SimConfig& config, const std::vector<double>& nu_list) {
  if (config.params.model != Model::euler_alpha) throw ConfigError("sweep requires model = euler_alpha");
  if (nu_list.empty()) throw ConfigError("sweep.nu_list: at least one viscosity is required");
  for (std::size_t i = 0; i < nu_list.size(); ++i) {
    if (!(nu_list[i] > 0.0)) throw ConfigError("sweep.nu_list: every viscosity must be > 0 (nu = 0 is the reference)");
    if (i > 0 && !(nu_list[i] < nu_list[i - 1])) throw ConfigError("sweep.nu_list: values must be strictly descending");
  }
}

/// E(nu) = distances between the viscous and inviscid (nu = 0) solutions at
/// t_end, for eta and u. All runs share u0, grid, dt and particle lattice.
inline SweepResult viscosity_sweep(const SimConfig& config, const std::vector<double>& nu_list) {
  validate_sweep(config, nu_list);
  const VectorSpectrum u0 = initial_velocity(config);
  SimConfig ref_config = config;
  ref_config.params.nu = 0.0;
  const RunOptions quiet{false, {}};
  const RunResult ref = run_from(ref_config, u0, quiet);

  SweepResult out;
  std::vector<double> nus, eta_sup, u_l2;
  for (double nu : nu_list) {
    SimConfig c = config;
    c.params.nu = nu;
    const RunResult r = run_from(c, u0, quiet);
    out.entries.push_back({nu, flow_map_distance(r.state.fm, ref.state.fm), field_distance(r.state.u, ref.state.u)});
    nus.push_back(nu);
    eta_sup.push_back(out.entries.back().eta.sup);
    u_l2.push_back(out.entries.back().u.l2);
  }
  auto strictly_decreasing = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i] < v[i - 1])) return false;
    return true;
  };
  out.eta_monotone = strictly_decreasing(eta_sup);
  out.u_monotone = strictly_decreasing(u_l2);
  if (nus.size() >= 2) {
    out.eta_sup_slope = loglog_slope(nus, eta_sup);
    out.u_l2_slope = loglog_slope(nus, u_l2);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sensitivity

/// Random divergence-free direction with the configured IC spectrum,
/// normalised to unit H^s norm.
inline VectorSpectrum make_sensitivity_direction(const GridPtr& grid, std::uint64_t seed, double p, int cutoff,
                                                 double s) {
  VectorSpectrum v = velocity_from_vorticity(random_vorticity(grid, seed, p, cutoff));
  v *= 1.0 / sobolev_norm(v, s);
  return v;
}

inline VectorSpectrum make_sensitivity_direction(const SimConfig& config) {
  const int cutoff = config.ic.kind == ICKind::random ? config.ic.cutoff : std::min(8, (config.n - 1) / 3);
  return make_sensitivity_direction(make_grid(config.n), config.direction_seed, config.ic.p, cutoff, config.s);
}

/// Central-difference directional derivative of (eta(T), u(T)).
struct Derivative {
  std::vector<Vec2> eta;
  VectorSpectrum u;
};

struct SensitivityRow {
  double eps = 0.0;
  double eta_diff = 0.0;       // ||D(eps) - D(eps/2)|| for eta, particle sup
  double eta_diff_half = 0.0;  // ||D(eps/2) - D(eps/4)||
  double eta_ratio = 0.0;
  double u_diff = 0.0;  // grid sup
  double u_diff_half = 0.0;
  double u_ratio = 0.0;
  bool roundoff_floor = false;  // differences comparable to the rounding noise of D
};

struct SensitivityResult {
  std::vector<SensitivityRow> rows;
  double eta_derivative_norm = 0.0;  // sup of D(eps_0) for eta
  double u_derivative_norm = 0.0;
};

namespace detail {

inline Derivative central_difference(const SimConfig& config, const VectorSpectrum& u0, const VectorSpectrum& v,
                                     double eps) {
  const RunOptions quiet{false, {}};
  VectorSpectrum up = u0, um = u0;
  up.axpy(eps, v);
  um.axpy(-eps, v);
  const RunResult rp = run_from(config, up, quiet);
  const RunResult rm = run_from(config, um, quiet);
  Derivative d{std::vector<Vec2>(rp.state.fm.size()), rp.state.u - rm.state.u};
  d.u *= 1.0 / (2.0 * eps);
  const FlowMap& fp = rp.state.fm;
  const FlowMap& fn = rm.state.fm;
  for (std::size_t p = 0; p < d.eta.size(); ++p)
    for (int c = 0; c < 2; ++c) {
      const double diff = (fp.positions[p][c] - fn.positions[p][c]) + (fp.position_carry[p][c] - fn.position_carry[p][c]);
      d.eta[p][c] = diff / (2.0 * eps);
    }
  return d;
}

inline double eta_sup_diff(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double m = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) m = std::max(m, std::hypot(a[p][0] - b[p][0], a[p][1] - b[p][1]));
  return m;
}

inline double eta_sup(const std::vector<Vec2>& a) {
  double m = 0.0;
  for (const auto& x : a) m = std::max(m, std::hypot(x[0], x[1]));
  return m;
}

}  // namespace detail

/// Richardson table for D(eps), D(eps/2), D(eps/4) at each eps. A row is
/// flagged as at the roundoff floor when the finer difference falls below
/// one rounding unit of the quantity divided by eps/4.
inline SensitivityResult sensitivity_from(const SimConfig& config, const VectorSpectrum& u0, const VectorSpectrum& v,
                                          const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw std::invalid_argument("sensitivity: eps_list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw std::invalid_argument("sensitivity: every epsilon must be > 0");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw std::invalid_argument("sensitivity: eps_list must be descending");
  }
  require_divergence_free(v, "sensitivity direction");
  const RunResult base = run_from(config, u0, RunOptions{false, {}});
  double eta_scale = 0.0;
  for (const auto& x : base.state.fm.positions) eta_scale = std::max(eta_scale, std::hypot(x[0], x[1]));
  const double u_scale = std::max(to_physical(base.state.u).max_norm(), 1e-300);

  SensitivityResult out;
  constexpr double unit = std::numeric_limits<double>::epsilon();
  for (double eps : eps_list) {
    const Derivative d0 = detail::central_difference(config, u0, v, eps);
    const Derivative d1 = detail::central_difference(config, u0, v, eps / 2);
    const Derivative d2 = detail::central_difference(config, u0, v, eps / 4);
    SensitivityRow row;
    row.eps = eps;
    row.eta_diff = detail::eta_sup_diff(d0.eta, d1.eta);
    row.eta_diff_half = detail::eta_sup_diff(d1.eta, d2.eta);
    row.eta_ratio = row.eta_diff / row.eta_diff_half;
    row.u_diff = to_physical(d0.u - d1.u).max_norm();
    row.u_diff_half = to_physical(d1.u - d2.u).max_norm();
    row.u_ratio = row.u_diff / row.u_diff_half;
    const double eta_noise = unit * eta_scale / (eps / 4);
    const double u_noise = unit * u_scale / (eps / 4);
    row.roundoff_floor = row.eta_diff_half < eta_noise || row.u_diff_half < u_noise;
    if (out.rows.empty()) {
      out.eta_derivative_norm = detail::eta_sup(d0.eta);
      out.u_derivative_norm = to_physical(d0.u).max_norm();
    }
    out.rows.push_back(row);
  }
  return out;
}

inline SensitivityResult sensitivity(const SimConfig& config, const VectorSpectrum& v, const std::vector<double>& eps_list) {
  return sensitivity_from(config, initial_velocity(config), v, eps_list);
}

}  // namespace lagflow
