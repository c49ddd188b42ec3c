#pragma once

#include <lagflow/simulate.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

// Invariant suite shared by `lagflow verify` and the acceptance binary.
// Each criterion runs its own experiment and reports the measured numbers.

namespace lagflow {

struct CriterionResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace verify_detail {

inline std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

inline std::string fix(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::fixed << v;
  return os.str();
}

inline SimConfig base_config(Model model, ICKind kind) {
  SimConfig c;
  c.params = {model, model == Model::euler ? 0.0 : 1.0, 0.0};
  c.ic.kind = kind;
  c.ic.seed = 7;
  c.ic.p = 4.0;
  c.ic.cutoff = 8;
  c.diag_every = 50;
  return c;
}

inline const RunOptions kNoOutput{false, {}};

inline double max_eta_diff(const FlowMap& a, const FlowMap& b) {
  double m = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p)
    m = std::max(m, std::hypot(a.positions[p][0] - b.positions[p][0], a.positions[p][1] - b.positions[p][1]));
  return m;
}

// Unit-variance node values, truncated to the 2/3 band, zero mean.
template <std::size_t N>
SpectralField<N> random_band_limited(const GridPtr& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  PhysicalField<N> f(grid);
  for (std::size_t c = 0; c < N; ++c)
    for (double& v : f[c]) v = nd(rng);
  SpectralField<N> s = to_spectral(f);
  s.dealias();
  s.zero_mean();
  return s;
}

}  // namespace verify_detail

/// Taylor-Green and shear are steady Euler solutions; shear is steady for
/// inviscid Euler-alpha.
inline CriterionResult verify_steady_states() {
  using namespace verify_detail;
  double worst_euler = 0.0, worst_alpha = 0.0;
  for (ICKind kind : {ICKind::taylor_green, ICKind::shear}) {
    const SimConfig c = base_config(Model::euler, kind);
    const VectorSpectrum u0 = initial_velocity(c);
    worst_euler = std::max(worst_euler, field_distance(run_from(c, u0, kNoOutput).state.u, u0).sup);
  }
  const SimConfig c = base_config(Model::euler_alpha, ICKind::shear);
  const VectorSpectrum u0 = initial_velocity(c);
  worst_alpha = field_distance(run_from(c, u0, kNoOutput).state.u, u0).sup;
  return {"steady states", worst_euler <= 1e-10 && worst_alpha <= 1e-8,
          "euler max|u(T)-u0| = " + sci(worst_euler) + " (<= 1e-10), euler_alpha shear " + sci(worst_alpha) +
              " (<= 1e-8)"};
}

/// Euler random IC (p = 4, K = 8) at n = 128: energy, enstrophy and
/// max |omega| relative drifts over T = 1.
inline CriterionResult verify_euler_conservation() {
  using namespace verify_detail;
  SimConfig c = base_config(Model::euler, ICKind::random);
  c.n = 128;
  const RunResult r = run(c);
  const ConservationReport rep = assert_conservation(r.series, Model::euler, 0.0);
  std::string detail;
  bool ok = true;
  for (const auto& e : rep.entries) {
    if (e.quantity == "log_bound_growth") continue;
    ok = ok && e.passed;
    detail += (detail.empty() ? "" : ", ") + e.quantity + " " + sci(e.drift);
  }
  return {"euler conservation", ok, detail + " (each <= 1e-8, n = 128, T = 1)"};
}

/// Euler-alpha potential vorticity: ||q||_2 and max |q| at nu = 0, mean(q)
/// at nu in {0, 1e-3}.
inline CriterionResult verify_potential_vorticity() {
  using namespace verify_detail;
  bool ok = true;
  std::string detail;
  for (double nu : {0.0, 1e-3}) {
    SimConfig c = base_config(Model::euler_alpha, ICKind::random);
    c.n = 128;
    c.params.nu = nu;
    const RunResult r = run(c);
    const ConservationReport rep = assert_conservation(r.series, Model::euler_alpha, nu);
    for (const auto& e : rep.entries) {
      if (!e.tolerance || e.quantity == "log_bound_growth") continue;
      ok = ok && e.passed;
      detail += (detail.empty() ? "" : ", ") + e.quantity + "(nu=" + format_double(nu) + ") " + sci(e.drift);
    }
  }
  return {"potential vorticity", ok, detail + " (l2, max <= 1e-6; mean <= 1e-10)"};
}

/// det T = 1 and T Tinv = I at T = 1, plus the coupled (u, eta) order from
/// three dt halvings starting at 0.05.
inline CriterionResult verify_flow_map_structure() {
  using namespace verify_detail;
  bool ok = true;
  std::string detail;
  for (Model model : {Model::euler, Model::euler_alpha}) {
    SimConfig c = base_config(model, ICKind::random);
    std::vector<RunResult> runs;
    for (double dt : {0.05, 0.025, 0.0125, 0.00625}) {
      c.dt = dt;
      runs.push_back(run(c, kNoOutput));
    }
    double worst_order_dev = 0.0;
    std::string orders;
    for (std::size_t i = 0; i + 2 < runs.size(); ++i) {
      const double order = std::log2(max_eta_diff(runs[i].state.fm, runs[i + 1].state.fm) /
                                     max_eta_diff(runs[i + 1].state.fm, runs[i + 2].state.fm));
      orders += (orders.empty() ? "" : "/") + fix(order);
      ok = ok && order >= 3.7 && order <= 4.3;
      worst_order_dev = std::max(worst_order_dev, std::abs(order - 4.0));
    }
    // Defects from a dt = 1e-3 run.
    c.dt = 1e-3;
    const FlowMap fm = run(c, kNoOutput).state.fm;
    const double vol = volume_defect(fm), inv = inverse_defect(fm);
    ok = ok && vol <= 1e-8 && inv <= 1e-8;
    detail += (detail.empty() ? "" : "; ") + std::string(to_string(model)) + ": |det T - 1| " + sci(vol) +
              ", |T Tinv - I| " + sci(inv) + ", order " + orders;
  }
  return {"flow-map structure", ok, detail + " (defects <= 1e-8, order in [3.7, 4.3])"};
}

/// Shear flow: eta = (x + t sin y, y), T = [[1, t cos y], [0, 1]].
inline CriterionResult verify_shear_oracle() {
  using namespace verify_detail;
  const SimConfig c = base_config(Model::euler, ICKind::shear);
  const FlowMap fm = run(c, kNoOutput).state.fm;
  const double t = fm.t;
  double e_eta = 0.0, e_t = 0.0;
  for (std::size_t p = 0; p < fm.size(); ++p) {
    const Vec2 x0 = fm.lattice_point(p);
    e_eta = std::max({e_eta, std::abs(fm.positions[p][0] - (x0[0] + t * std::sin(x0[1]))),
                      std::abs(fm.positions[p][1] - x0[1])});
    const Mat2 expect{1.0, t * std::cos(x0[1]), 0.0, 1.0};
    for (int a = 0; a < 4; ++a) e_t = std::max(e_t, std::abs(fm.tangent[p][a] - expect[a]));
  }
  return {"shear exact flow", e_eta <= 1e-8 && e_t <= 1e-8,
          "eta error " + sci(e_eta) + ", T error " + sci(e_t) + " (<= 1e-8 at T = 1)"};
}

/// Richardson ratios of central-difference derivatives of eta(T), u(T)
/// with respect to u0 along a unit H^s direction, eps = 1e-3.
inline CriterionResult verify_smooth_dependence() {
  using namespace verify_detail;
  bool ok = true;
  std::string detail;
  for (Model model : {Model::euler, Model::euler_alpha}) {
    const SimConfig c = base_config(model, ICKind::random);
    const VectorSpectrum v = make_sensitivity_direction(c);
    const SensitivityResult s = sensitivity(c, v, {1e-3});
    const SensitivityRow& row = s.rows.front();
    ok = ok && row.eta_ratio >= 3.2 && row.eta_ratio <= 4.8 && row.u_ratio >= 3.2 && row.u_ratio <= 4.8;
    detail += (detail.empty() ? "" : "; ") + std::string(to_string(model)) + ": eta ratio " + fix(row.eta_ratio) +
              ", u ratio " + fix(row.u_ratio) + (row.roundoff_floor ? " [roundoff floor]" : "");
  }
  return {"smooth dependence", ok, detail + " (in [3.2, 4.8], eps = 1e-3)"};
}

/// E(nu) for nu in {1e-2, 1e-3, 1e-4}: strictly decreasing, log-log slope
/// >= 0.8.
inline CriterionResult verify_zero_viscosity_limit() {
  using namespace verify_detail;
  const SimConfig c = base_config(Model::euler_alpha, ICKind::random);
  const SweepResult s = viscosity_sweep(c, {1e-2, 1e-3, 1e-4});
  std::string detail = "E_eta =";
  for (const auto& e : s.entries) detail += " " + sci(e.eta.sup);
  detail += ", slope " + fix(s.eta_sup_slope) + " (u L2 slope " + fix(s.u_l2_slope) + ")";
  return {"zero-viscosity limit", s.eta_monotone && s.eta_sup_slope >= 0.8,
          detail + (s.eta_monotone ? ", decreasing" : ", NOT decreasing") + " (slope >= 0.8)"};
}

/// Velocity form against q-transport form, Euler-alpha, nu = 0, T = 0.5.
inline CriterionResult verify_form_equivalence() {
  using namespace verify_detail;
  SimConfig c = base_config(Model::euler_alpha, ICKind::random);
  c.t_end = 0.5;
  const VectorSpectrum u0 = initial_velocity(c);
  const RunResult vel = run_from(c, u0, kNoOutput);
  c.form = Formulation::vorticity;
  const RunResult q = run_from(c, u0, kNoOutput);
  const double d = field_distance(vel.state.u, q.state.u).sup;
  return {"form equivalence", d <= 1e-6, "max|u_vel - u_q| = " + sci(d) + " (<= 1e-6 at T = 0.5)"};
}

/// Spectral-core identities on 100 random band-limited fields.
inline CriterionResult verify_operator_identities() {
  using namespace verify_detail;
  const GridPtr grid = make_grid(32);
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  auto track = [&](double err) { worst = std::max(worst, err); };
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_band_limited<1>(grid, rng);
    const auto u = random_band_limited<2>(grid, rng);
    const auto v = random_band_limited<2>(grid, rng);
    const auto pu = leray_project(u);
    track((div(grad(f)) - laplacian(f)).max_abs());
    track(curl2d(grad(f)).max_abs());
    track((leray_project(pu) - pu).max_abs());
    track(std::abs(inner_product(pu, v) - inner_product(u, leray_project(v))));
    track(to_physical(div(pu)).max_norm());
    track(std::abs(inner_product(pu, grad(f))));
    track((helmholtz_inv(pu, 0.3) - leray_project(helmholtz_inv(u, 0.3))).max_abs());
    track((helmholtz(helmholtz_inv(u, 0.3), 0.3) - u).max_abs());
    track((laplacian(inv_laplacian(f)) - f).max_abs());
    track((stokes_operator_inv(pu, 0.3) - helmholtz_inv(pu, 0.3)).max_abs());
    track((curl2d(velocity_from_vorticity(f)) - f).max_abs());
    const VectorField phys = to_physical(u);
    track(to_physical(to_spectral(phys) - u).max_norm());
    double sum = 0.0;
    for (std::size_t c = 0; c < 2; ++c)
      for (double x : phys[c]) sum += x * x;
    const double h = grid->spacing();
    track(std::abs(inner_product(u, u) - sum * h * h) / std::max(1.0, sum * h * h));
  }
  return {"operator identities", worst <= 1e-11, "worst residual " + sci(worst) + " over 100 fields (<= 1e-11)"};
}

using Criterion = std::function<CriterionResult()>;

inline std::vector<Criterion> verify_criteria() {
  return {verify_steady_states,       verify_euler_conservation, verify_potential_vorticity,
          verify_flow_map_structure,  verify_shear_oracle,       verify_smooth_dependence,
          verify_zero_viscosity_limit, verify_form_equivalence,  verify_operator_identities};
}

/// Runs every criterion; an exception inside a criterion counts as failure.
/// on_result is called as each criterion finishes.
inline std::vector<CriterionResult> run_verify_suite(const std::function<void(const CriterionResult&)>& on_result = {}) {
  std::vector<CriterionResult> out;
  for (const Criterion& criterion : verify_criteria()) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = criterion();
    } catch (const std::exception& e) {
      r = {"criterion " + std::to_string(out.size() + 1), false, std::string("error: ") + e.what()};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

inline void print_result(std::ostream& os, const CriterionResult& r) {
  os << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << " [" << verify_detail::fix(r.seconds) << " s]\n";
}

}  // namespace lagflow
