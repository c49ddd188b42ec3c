#include <lagflow/simulate.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

using namespace lagflow;
using Catch::Approx;

namespace {

SimConfig small_config(Model model, ICKind kind) {
  SimConfig c;
  c.n = 32;
  c.m = 8;
  c.dt = 0.01;
  c.t_end = 0.2;
  c.params = {model, model == Model::euler ? 0.0 : 1.0, 0.0};
  c.ic.kind = kind;
  c.ic.seed = 3;
  c.ic.cutoff = 6;
  c.diag_every = 5;
  return c;
}

SimState initial_state(const SimConfig& c) {
  return SimState{0.0, initial_velocity(c), init_flow_map(c.m), c.params, std::nullopt};
}

double eta_sup_diff(const FlowMap& a, const FlowMap& b) {
  double m = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p)
    m = std::max(m, std::hypot(a.positions[p][0] - b.positions[p][0], a.positions[p][1] - b.positions[p][1]));
  return m;
}

const RunOptions kQuiet{false, {}};

}  // namespace

TEST_CASE("single steps on steady states", "[simulate][step]") {
  SECTION("Taylor-Green under Euler is unchanged") {
    const SimConfig c = small_config(Model::euler, ICKind::taylor_green);
    const SimState s0 = initial_state(c);
    const SimState s1 = step(s0, 0.01);
    CHECK(field_distance(s1.u, s0.u).sup <= 1e-12);
    CHECK(s1.t == Approx(0.01));
    CHECK(s1.fm.t == s1.t);
  }

  SECTION("shear under inviscid Euler-alpha: u fixed, T closed form") {
    const SimConfig c = small_config(Model::euler_alpha, ICKind::shear);
    SimState s = initial_state(c);
    const VectorSpectrum u0 = s.u;
    for (int i = 0; i < 20; ++i) s = step(s, 0.01);
    CHECK(field_distance(s.u, u0).sup <= 1e-10);
    for (std::size_t p = 0; p < s.fm.size(); ++p) {
      const Vec2 x0 = s.fm.lattice_point(p);
      CHECK(std::abs(s.fm.tangent[p][1] - s.t * std::cos(x0[1])) <= 1e-12);
      CHECK(std::abs(s.fm.positions[p][0] - x0[0] - s.t * std::sin(x0[1])) <= 1e-12);
    }
  }

  SECTION("vorticity form agrees with velocity form over one step") {
    for (Model model : {Model::euler, Model::euler_alpha}) {
      const SimConfig c = small_config(model, ICKind::random);
      const SimState s0 = initial_state(c);
      const SimState a = step(s0, 0.01, Formulation::velocity);
      const SimState b = step(s0, 0.01, Formulation::vorticity);
      CHECK(field_distance(a.u, b.u).sup <= 1e-13);
      CHECK(eta_sup_diff(a.fm, b.fm) <= 1e-13);
    }
  }

  SECTION("argument and instability errors") {
    const SimConfig c = small_config(Model::euler, ICKind::taylor_green);
    SimState s = initial_state(c);
    CHECK_THROWS_AS(step(s, 0.0), std::invalid_argument);
    s.u.at(0, 1, 1) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
    CHECK_THROWS_AS(step(s, 0.01), InstabilityError);
    try {
      step(s, 0.01);
    } catch (const InstabilityError& e) {
      CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("t = 0"));
    }
  }
}

TEST_CASE("run bookkeeping", "[simulate][run]") {
  SECTION("t_end = 0 gives the initial diagnostics only") {
    SimConfig c = small_config(Model::euler, ICKind::taylor_green);
    c.t_end = 0.0;
    int snapshots = 0;
    const RunResult r = run(c, {true, [&](const SimState&, long) { ++snapshots; }});
    CHECK(r.steps == 0);
    CHECK(r.series.size() == 1);
    CHECK(snapshots == 1);
    CHECK(r.state.t == 0.0);
  }

  SECTION("partial final step lands on t_end") {
    SimConfig c = small_config(Model::euler, ICKind::taylor_green);
    c.dt = 0.005;
    c.t_end = 0.0125;
    c.diag_every = 2;
    c.snapshot_every = 2;
    std::vector<long> snap_steps;
    const RunResult r = run(c, {true, [&](const SimState&, long i) { snap_steps.push_back(i); }});
    CHECK(r.steps == 3);
    CHECK(r.state.t == 0.0125);
    CHECK(r.state.fm.t == 0.0125);
    REQUIRE(r.series.size() == 3);  // steps 0, 2, 3
    CHECK(r.series[1].t == 0.01);
    CHECK(r.series[2].t == 0.0125);
    CHECK(snap_steps == std::vector<long>{0, 2, 3});
  }

  SECTION("step count avoids a spurious sliver step") {
    CHECK(step_count(1.0, 1e-3) == 1000);
    CHECK(step_count(0.5, 0.1) == 5);
    CHECK(step_count(0.55, 0.1) == 6);
    CHECK(step_count(0.0, 0.1) == 0);
  }

  SECTION("CFL warning") {
    SimConfig c = small_config(Model::euler, ICKind::taylor_green);
    c.t_end = 0.0;
    c.dt = 0.2;  // 0.2 * 1 * 32 / (2 pi) > 0.5
    const RunResult r = run(c);
    CHECK(r.cfl == Approx(0.2 * 32 / kTwoPi).epsilon(1e-12));
    CHECK(r.cfl_warning);
    c.dt = 0.01;
    CHECK_FALSE(run(c).cfl_warning);
  }

  SECTION("identical configs give identical CSV") {
    const SimConfig c = small_config(Model::euler_alpha, ICKind::random);
    CHECK(to_csv(run(c).series) == to_csv(run(c).series));
    SimConfig other = c;
    other.ic.seed = 4;
    CHECK(to_csv(run(other).series) != to_csv(run(c).series));
  }

  SECTION("divergence stays at roundoff") {
    SimConfig c = small_config(Model::euler_alpha, ICKind::random);
    const RunResult r = run(c, kQuiet);
    CHECK(to_physical(div(r.state.u)).max_norm() <= 1e-10);
  }
}

TEST_CASE("viscous shear decays at the single-mode rate", "[simulate][oracle]") {
  // (1 - alpha Lap)^{-1} Lap sin y = -sin y / (1 + alpha): u = e^{-c t} (sin y, 0), c = nu / (1 + alpha).
  SimConfig c = small_config(Model::euler_alpha, ICKind::shear);
  c.params = {Model::euler_alpha, 0.5, 0.1};
  c.t_end = 1.0;
  c.dt = 0.02;
  const RunResult r = run(c, kQuiet);
  const double decay = std::exp(-0.1 / 1.5);
  const VectorSpectrum expect = to_spectral(VectorField::sample(make_grid(c.n), [&](double, double y) {
    return std::array{decay * std::sin(y), 0.0};
  }));
  CHECK(field_distance(r.state.u, expect).sup <= 1e-10);
}

TEST_CASE("coupled integrator is fourth order", "[simulate][order]") {
  for (Model model : {Model::euler, Model::euler_alpha}) {
    SimConfig c = small_config(model, ICKind::random);
    c.t_end = 0.5;
    std::vector<RunResult> runs;
    for (double dt : {0.05, 0.025, 0.0125, 0.00625}) {
      c.dt = dt;
      runs.push_back(run(c, kQuiet));
    }
    for (int i = 0; i + 2 < 4; ++i) {
      const double eta_order = std::log2(eta_sup_diff(runs[i].state.fm, runs[i + 1].state.fm) /
                                         eta_sup_diff(runs[i + 1].state.fm, runs[i + 2].state.fm));
      const double u_order = std::log2(field_distance(runs[i].state.u, runs[i + 1].state.u).sup /
                                       field_distance(runs[i + 1].state.u, runs[i + 2].state.u).sup);
      CHECK(eta_order >= 3.7);
      CHECK(eta_order <= 4.3);
      CHECK(u_order >= 3.7);
      CHECK(u_order <= 4.3);
    }
  }
}

TEST_CASE("distances and slopes", "[simulate]") {
  FlowMap a = init_flow_map(4), b = init_flow_map(4);
  b.positions[3][0] += kTwoPi;
  b.positions[5][1] -= 2 * kTwoPi;
  CHECK(flow_map_distance(a, b).sup <= 1e-14);
  b.positions[2][0] += 0.3;
  b.positions[2][1] -= 0.4;
  const MapDistance d = flow_map_distance(a, b);
  CHECK(d.sup == Approx(0.5));
  CHECK(d.l2 == Approx(0.5 * kTwoPi / 4));

  const std::vector<double> x{1e-2, 1e-3, 1e-4}, y{3e-4, 3e-6, 3e-8};
  CHECK(loglog_slope(x, y) == Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(loglog_slope(std::span(x).first(1), std::span(y).first(1)), std::invalid_argument);
}

TEST_CASE("viscosity sweep", "[simulate][sweep]") {
  SECTION("shear: E(nu) matches the closed form and grows with nu") {
    // x(T) - x0 = sin y0 (1 - e^{-cT}) / c against T sin y0 for nu = 0.
    SimConfig c = small_config(Model::euler_alpha, ICKind::shear);
    c.t_end = 1.0;
    c.dt = 0.02;
    const std::vector<double> nus{1e-1, 1e-2};
    const SweepResult s = viscosity_sweep(c, nus);
    REQUIRE(s.entries.size() == 2);
    for (const auto& e : s.entries) {
      const double k = e.nu / (1.0 + c.params.alpha);
      CHECK(e.eta.sup == Approx(1.0 - (1.0 - std::exp(-k)) / k).epsilon(1e-9));
      CHECK(e.u.sup == Approx(1.0 - std::exp(-k)).epsilon(1e-9));
    }
    CHECK(s.eta_monotone);
    CHECK(s.entries[0].eta.sup > s.entries[1].eta.sup);
    CHECK(s.eta_sup_slope == Approx(1.0).margin(0.05));
  }

  SECTION("validation") {
    const SimConfig alpha = small_config(Model::euler_alpha, ICKind::shear);
    CHECK_THROWS_AS(viscosity_sweep(small_config(Model::euler, ICKind::shear), {1e-2}), ConfigError);
    CHECK_THROWS_AS(viscosity_sweep(alpha, {0.0}), ConfigError);
    CHECK_THROWS_AS(viscosity_sweep(alpha, {1e-3, 1e-2}), ConfigError);
    CHECK_THROWS_AS(viscosity_sweep(alpha, {}), ConfigError);
  }
}

TEST_CASE("sensitivity", "[simulate][sensitivity]") {
  SECTION("uniform translation depends affinely on u0") {
    // u0 = (c, 0) perturbed along (d, 0): eta(T) = x0 + T (c + eps d), so D = (T d, 0).
    SimConfig c = small_config(Model::euler, ICKind::taylor_green);
    c.t_end = 0.5;
    const GridPtr g = make_grid(c.n);
    const VectorSpectrum u0 = to_spectral(VectorField::sample(g, [](double, double) { return std::array{0.7, 0.0}; }));
    VectorSpectrum v = to_spectral(VectorField::sample(g, [](double, double) { return std::array{1.0, 0.0}; }));
    v *= 1.0 / sobolev_norm(v, c.s);
    const double d = 1.0 / kTwoPi;
    const SensitivityResult s = sensitivity_from(c, u0, v, {1e-2, 1e-3});
    CHECK(s.eta_derivative_norm == Approx(0.5 * d).epsilon(1e-10));
    CHECK(s.u_derivative_norm == Approx(d).epsilon(1e-10));
    for (const auto& row : s.rows) {
      CHECK(row.eta_diff <= 1e-10);
      CHECK(row.u_diff <= 1e-10);
    }
  }

  SECTION("Richardson ratios approach 4 on a random IC") {
    SimConfig c = small_config(Model::euler, ICKind::random);
    c.t_end = 0.5;
    c.dt = 0.005;
    const VectorSpectrum v = make_sensitivity_direction(c);
    CHECK(sobolev_norm(v, c.s) == Approx(1.0).epsilon(1e-13));
    VectorSpectrum big = v;
    big *= 2.0;  // stronger curvature keeps the table clear of the roundoff floor on this small grid
    const SensitivityResult s = sensitivity(c, big, {1e-2});
    const SensitivityRow& row = s.rows.front();
    CHECK(row.eta_ratio == Approx(4.0).margin(0.4));
    CHECK(row.u_ratio == Approx(4.0).margin(0.4));
    CHECK_FALSE(row.roundoff_floor);
  }

  SECTION("roundoff floor is flagged for tiny eps") {
    SimConfig c = small_config(Model::euler, ICKind::random);
    c.t_end = 0.1;
    const SensitivityResult s = sensitivity(c, make_sensitivity_direction(c), {1e-8});
    CHECK(s.rows.front().roundoff_floor);
  }

  SECTION("validation") {
    const SimConfig c = small_config(Model::euler, ICKind::random);
    const VectorSpectrum v = make_sensitivity_direction(c);
    CHECK_THROWS_AS(sensitivity(c, v, {}), std::invalid_argument);
    CHECK_THROWS_AS(sensitivity(c, v, {1e-4, 1e-3}), std::invalid_argument);
    CHECK_THROWS_AS(sensitivity(c, v, {-1e-3}), std::invalid_argument);
    const VectorSpectrum grad_field = grad(to_spectral(ScalarField::sample(make_grid(c.n), [](double x, double) {
      return std::sin(x);
    })));
    CHECK_THROWS_AS(sensitivity(c, grad_field, {1e-3}), std::invalid_argument);
  }
}
