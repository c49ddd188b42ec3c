#pragma once

#include <lagflow/state.hpp>

#include <algorithm>
#include <functional>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace lagflow {

/// One time sample of the conserved and monitored quantities.
struct DiagnosticsRecord {
  double t = 0.0;
  double energy = 0.0;     // 1/2 int |u|^2
  double enstrophy = 0.0;  // 1/2 int omega^2
  double omega_max = 0.0;
  std::optional<double> q_mean;
  std::optional<double> q_l2;
  std::optional<double> q_max;
  double hs_norm = 0.0;
  double grad_u_max = 0.0;
  double log_bound_ratio = 0.0;  // grad_u_max / (1 + log(e + hs_norm))
  double volume_defect = 0.0;
  double inverse_defect = 0.0;
  double tangent_monitor = 0.0;
};

inline constexpr double kDefaultSobolevIndex = 2.5;

namespace detail {
inline double grid_max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}
}  // namespace detail

/// Supremum of |f| over the torus for a band-limited scalar. Grid local
/// maxima of |f| seed a Newton search for critical points of the
/// trigonometric interpolant.
inline double sup_norm(const ScalarSpectrum& f) {
  const Grid& g = f.grid();
  const ScalarField fp = to_physical(f);
  const auto v = fp[0];
  const int n = g.n();
  const double grid_max = detail::grid_max_abs(v);
  if (grid_max == 0.0) return 0.0;

  std::vector<std::pair<double, std::size_t>> seeds;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double a = std::abs(fp.at(0, i, j));
      if (a < 0.5 * grid_max) continue;
      bool peak = true;
      for (int dj = -1; dj <= 1 && peak; ++dj)
        for (int di = -1; di <= 1 && peak; ++di)
          if ((di || dj) && std::abs(fp.at(0, (i + di + n) % n, (j + dj + n) % n)) > a) peak = false;
      if (peak) seeds.emplace_back(a, g.physical_index(i, j));
    }
  std::ranges::sort(seeds, std::greater<>());
  if (seeds.size() > 16) seeds.resize(16);

  const VectorSpectrum df = grad(f);
  const auto hess = gradient_matrix(df);
  const auto d = stack(f, component(df, 0), component(df, 1), component(hess, 0), component(hess, 1),
                       component(hess, 3));
  const double h = g.spacing();
  double best = grid_max;
  for (const auto& [a, idx] : seeds) {
    double x = g.node(static_cast<int>(idx % n)), y = g.node(static_cast<int>(idx / n));
    for (int it = 0; it < 30; ++it) {
      const auto e = evaluate_trig(d, x, y);
      const double det = e[3] * e[5] - e[4] * e[4];
      if (det == 0.0) break;
      double sx = -(e[5] * e[1] - e[4] * e[2]) / det;
      double sy = -(e[3] * e[2] - e[4] * e[1]) / det;
      const double len = std::hypot(sx, sy);
      if (len > h) {
        sx *= h / len;
        sy *= h / len;
      }
      x += sx;
      y += sy;
      if (len < 1e-14) break;
    }
    best = std::max(best, std::abs(evaluate_trig(f, x, y)[0]));
  }
  return best;
}

inline DiagnosticsRecord sample(const SimState& state, double s = kDefaultSobolevIndex) {
  if (!(s > 2.0)) throw std::invalid_argument("diagnostics: Sobolev index s must be > 2");
  DiagnosticsRecord r;
  r.t = state.t;
  const VectorSpectrum& u = state.u;
  const ScalarSpectrum omega = curl2d(u);
  r.energy = 0.5 * inner_product(u, u);
  r.enstrophy = 0.5 * inner_product(omega, omega);
  r.omega_max = sup_norm(omega);
  if (state.params.model == Model::euler_alpha) {
    const ScalarSpectrum q = potential_vorticity(u, state.params.alpha);
    r.q_mean = q.mean();
    r.q_l2 = std::sqrt(inner_product(q, q));
    r.q_max = sup_norm(q);
  }
  r.hs_norm = sobolev_norm(u, s);
  const MatrixField a = to_physical(gradient_matrix(u));
  double g2 = 0.0;
  for (std::size_t p = 0; p < a[0].size(); ++p)
    g2 = std::max(g2, a[0][p] * a[0][p] + a[1][p] * a[1][p] + a[2][p] * a[2][p] + a[3][p] * a[3][p]);
  r.grad_u_max = std::sqrt(g2);
  r.log_bound_ratio = r.grad_u_max / (1.0 + std::log(std::numbers::e + r.hs_norm));
  r.volume_defect = volume_defect(state.fm);
  r.inverse_defect = inverse_defect(state.fm);
  r.tangent_monitor = sobolev_growth_monitor(state.fm, s);
  return r;
}

/// Per-quantity tolerances. Drifts are relative to the t = 0 value except
/// q_mean, which is absolute; log_bound_growth bounds max(ratio) / ratio(0).
struct ConservationTolerances {
  double energy = 1e-8;
  double enstrophy = 1e-8;
  double omega_max = 1e-8;
  double q_l2 = 1e-6;
  double q_max = 1e-6;
  double q_mean = 1e-10;
  double log_bound_growth = 3.0;
};

struct ConservationEntry {
  std::string quantity;
  double drift = 0.0;
  std::optional<double> tolerance;  // absent: reported, not asserted
  bool passed = true;
};

struct ConservationReport {
  std::vector<ConservationEntry> entries;
  bool passed() const {
    return std::ranges::all_of(entries, [](const ConservationEntry& e) { return e.passed; });
  }
};

namespace detail {
template <typename Get>
double max_drift(const std::vector<DiagnosticsRecord>& series, Get get, bool relative) {
  const double base = get(series.front());
  double m = 0.0;
  for (const auto& r : series) m = std::max(m, std::abs(get(r) - base));
  return (relative && base != 0.0) ? m / std::abs(base) : m;
}
}  // namespace detail

/// Checks the drifts the model is expected to conserve.
/// Euler: energy, enstrophy, max |omega|. Euler-alpha: mean(q) always;
/// ||q||_L2 and max |q| asserted only when nu = 0. The log-bound ratio must
/// stay within log_bound_growth times its initial value.
inline ConservationReport assert_conservation(const std::vector<DiagnosticsRecord>& series, Model model, double nu,
                                              const ConservationTolerances& tol = {}) {
  if (series.empty()) throw std::invalid_argument("assert_conservation: empty series");
  ConservationReport rep;
  auto add = [&](std::string name, double drift, std::optional<double> limit) {
    rep.entries.push_back({std::move(name), drift, limit, !limit || drift <= *limit});
  };
  if (model == Model::euler) {
    add("energy", detail::max_drift(series, [](const auto& r) { return r.energy; }, true), tol.energy);
    add("enstrophy", detail::max_drift(series, [](const auto& r) { return r.enstrophy; }, true), tol.enstrophy);
    add("omega_max", detail::max_drift(series, [](const auto& r) { return r.omega_max; }, true), tol.omega_max);
  } else {
    const bool inviscid = nu == 0.0;
    add("q_mean", detail::max_drift(series, [](const auto& r) { return r.q_mean.value_or(0.0); }, false),
        tol.q_mean);
    add("q_l2", detail::max_drift(series, [](const auto& r) { return r.q_l2.value_or(0.0); }, true),
        inviscid ? std::optional(tol.q_l2) : std::nullopt);
    add("q_max", detail::max_drift(series, [](const auto& r) { return r.q_max.value_or(0.0); }, true),
        inviscid ? std::optional(tol.q_max) : std::nullopt);
  }
  const double r0 = series.front().log_bound_ratio;
  double growth = 1.0;
  if (r0 > 0.0) {
    for (const auto& r : series) growth = std::max(growth, r.log_bound_ratio / r0);
  }
  add("log_bound_growth", growth, tol.log_bound_growth);
  return rep;
}

/// Both sides of the Gronwall form of the tangent-map energy estimate:
/// log(monitor(t) / monitor(0)) against int_0^t (||grad u||_inf + ||u||_Hs).
/// The unknown constant C is not applied; the pair is recorded, not asserted.
struct GronwallSample {
  double t;
  double log_growth;
  double integral;
};

inline std::vector<GronwallSample> gronwall_series(const std::vector<DiagnosticsRecord>& series) {
  std::vector<GronwallSample> out;
  if (series.empty()) return out;
  const double m0 = series.front().tangent_monitor;
  double integral = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (i > 0) {
      const auto& a = series[i - 1];
      const auto& b = series[i];
      integral += 0.5 * (b.t - a.t) * (a.grad_u_max + a.hs_norm + b.grad_u_max + b.hs_norm);
    }
    out.push_back({series[i].t, std::log(series[i].tangent_monitor / m0), integral});
  }
  return out;
}

/// Shortest decimal string that parses back to exactly v.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kDiagnosticsHeader =
    "t,energy,enstrophy,omega_max,q_mean,q_l2,q_max,hs_norm,grad_u_max,log_bound_ratio,volume_defect,"
    "inverse_defect,tangent_monitor";

inline void write_csv_row(std::ostream& os, const DiagnosticsRecord& r) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  os << format_double(r.t) << ',' << format_double(r.energy) << ',' << format_double(r.enstrophy) << ','
     << format_double(r.omega_max) << ',' << opt(r.q_mean) << ',' << opt(r.q_l2) << ',' << opt(r.q_max) << ','
     << format_double(r.hs_norm) << ',' << format_double(r.grad_u_max) << ',' << format_double(r.log_bound_ratio)
     << ',' << format_double(r.volume_defect) << ',' << format_double(r.inverse_defect) << ','
     << format_double(r.tangent_monitor) << '\n';
}

inline void write_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& series) {
  os << kDiagnosticsHeader << '\n';
  for (const auto& r : series) write_csv_row(os, r);
}

inline std::string to_csv(const std::vector<DiagnosticsRecord>& series) {
  std::ostringstream os;
  write_csv(os, series);
  return os.str();
}

}  // namespace lagflow
