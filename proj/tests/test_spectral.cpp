#include <lagflow/operators.hpp>

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace lagflow;
using lagflow::testing::max_abs;
using lagflow::testing::max_abs_diff;
using Catch::Approx;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("grid rejects odd or small sizes", "[spectral][grid]") {
  CHECK_THROWS_AS(Grid(63), std::invalid_argument);
  CHECK_THROWS_AS(Grid(6), std::invalid_argument);
  CHECK_NOTHROW(Grid(8));
  const Grid g(16);
  CHECK(g.node(4) == Approx(pi / 2));
  CHECK(g.k2(15) == -1);
  CHECK(g.k2(8) == -8);
  CHECK(g.retained(0, 5));
  CHECK_FALSE(g.retained(0, 6));
}

TEST_CASE("transform of simple fields", "[spectral][transform]") {
  auto grid = make_grid(16);

  SECTION("constant has only the zero mode") {
    auto f = to_spectral(ScalarField::sample(grid, [](double, double) { return 3.5; }));
    CHECK(f.at(0, 0, 0).real() == Approx(3.5));
    f.at(0, 0, 0) = 0.0;
    CHECK(f.max_abs() < 1e-15);
  }

  SECTION("sin x has exactly the two modes k = (+-1, 0)") {
    auto f = to_spectral(ScalarField::sample(grid, [](double x, double) { return std::sin(x); }));
    CHECK(std::abs(f.coefficient(0, 1, 0) - Complex(0, -0.5)) < 1e-15);
    CHECK(std::abs(f.coefficient(0, -1, 0) - Complex(0, 0.5)) < 1e-15);
    int nonzero = 0;
    for (int k1 = -8; k1 < 8; ++k1)
      for (int k2 = -8; k2 < 8; ++k2)
        if (std::abs(f.coefficient(0, k1, k2)) > 1e-14) ++nonzero;
    CHECK(nonzero == 2);
  }

  SECTION("non-finite samples are rejected") {
    ScalarField f(grid);
    f[0][3] = std::nan("");
    CHECK_THROWS_AS(to_spectral(f), std::domain_error);
  }
}

TEST_CASE("transform matches a direct DFT and round-trips on 8x8", "[spectral][transform]") {
  auto grid = make_grid(8);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(-1, 1);
  for (int trial = 0; trial < 5; ++trial) {
    ScalarField f(grid);
    for (auto& v : f[0]) v = ud(rng);
    const auto spec = to_spectral(f);
    const auto dense = lagflow::testing::dense_dft(f[0], 8);
    double err = 0.0;
    for (int k1 = -4; k1 < 4; ++k1)
      for (int k2 = -4; k2 < 4; ++k2) err = std::max(err, std::abs(spec.coefficient(0, k1, k2) - dense[k2 + 4][k1 + 4]));
    CHECK(err < 1e-14);

    // Conjugate symmetry on the self-paired columns k1 = 0 and k1 = -n/2.
    for (int k2 = -3; k2 < 4; ++k2) {
      CHECK(std::abs(spec.coefficient(0, 0, k2) - std::conj(spec.coefficient(0, 0, -k2))) < 1e-15);
      CHECK(std::abs(dense[k2 + 4][4] - std::conj(dense[-k2 + 4][4])) < 1e-14);
    }

    const auto back = to_physical(spec);
    CHECK(max_abs_diff(back, f) <= 1e-12 * max_abs(f));
  }
}

TEST_CASE("derivative operators", "[spectral][ops]") {
  auto grid = make_grid(32);

  SECTION("grad of a constant vanishes") {
    auto g = grad(ScalarField::sample(grid, [](double, double) { return 2.0; }));
    CHECK(g.max_abs() == 0.0);
  }

  SECTION("curl of a gradient vanishes") {
    auto f = ScalarField::sample(grid, [](double x, double y) { return std::sin(x) * std::cos(2 * y); });
    CHECK(max_abs(to_physical(curl2d(grad(f)))) < 1e-13);
  }

  SECTION("grad(sin x) agrees with centred differences to O(h^2)") {
    double prev_err = 0.0;
    for (int n : {32, 64, 128}) {
      auto g = make_grid(n);
      const double h = g->spacing();
      auto f = ScalarField::sample(g, [](double x, double) { return std::sin(x); });
      auto df = to_physical(grad(f));
      auto fd = ScalarField::sample(g, [h](double x, double) { return (std::sin(x + h) - std::sin(x - h)) / (2 * h); });
      double err = 0.0;
      for (std::size_t p = 0; p < fd[0].size(); ++p) err = std::max(err, std::abs(df[0][p] - fd[0][p]));
      CHECK(err <= h * h / 6.0 * 1.0001);
      CHECK(err >= h * h / 6.0 * 0.99);
      if (prev_err > 0) CHECK(prev_err / err == Approx(4.0).epsilon(0.01));
      prev_err = err;
      CHECK(max_abs(to_physical(component(grad(f), 1))) < 1e-14);
    }
  }

  SECTION("laplacian of sin x cos 2y") {
    auto f = ScalarField::sample(grid, [](double x, double y) { return std::sin(x) * std::cos(2 * y); });
    auto lap = to_physical(laplacian(f));
    auto expect = ScalarField::sample(grid, [](double x, double y) { return -5.0 * std::sin(x) * std::cos(2 * y); });
    CHECK(max_abs_diff(lap, expect) < 1e-12);
  }
}

TEST_CASE("inverse Laplacian", "[spectral][ops]") {
  auto grid = make_grid(32);
  auto check = [&](auto f, auto expect) {
    auto out = to_physical(inv_laplacian(to_spectral(ScalarField::sample(grid, f))));
    CHECK(max_abs_diff(out, ScalarField::sample(grid, expect)) < 1e-14);
  };
  check([](double x, double) { return std::sin(x); }, [](double x, double) { return -std::sin(x); });
  check([](double, double) { return 4.0; }, [](double, double) { return 0.0; });
  check([](double x, double y) { return std::sin(x) + std::cos(2 * y); },
        [](double x, double y) { return -std::sin(x) - std::cos(2 * y) / 4.0; });

  std::mt19937_64 rng(3);
  auto f = lagflow::testing::random_band_limited<1>(grid, rng, false);
  auto inv = inv_laplacian(f);
  CHECK(std::abs(inv.mean()) == 0.0);
  auto g = f;
  g.zero_mean();
  CHECK(max_abs_diff(laplacian(inv), g) < 1e-12 * std::max(1.0, f.max_abs()));
}

TEST_CASE("Helmholtz inverse", "[spectral][ops]") {
  auto grid = make_grid(32);
  auto sinx = to_spectral(ScalarField::sample(grid, [](double x, double) { return std::sin(x); }));
  auto half = to_physical(helmholtz_inv(sinx, 1.0));
  CHECK(max_abs_diff(half, ScalarField::sample(grid, [](double x, double) { return std::sin(x) / 2; })) < 1e-15);

  auto c = to_spectral(ScalarField::sample(grid, [](double, double) { return 1.7; }));
  for (double alpha : {0.1, 1.0, 7.0}) CHECK(helmholtz_inv(c, alpha).mean() == Approx(1.7));

  CHECK_THROWS_AS(helmholtz_inv(sinx, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(helmholtz_inv(sinx, -1.0), std::invalid_argument);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto u = lagflow::testing::random_divergence_free(grid, rng);
    auto w = helmholtz_inv(u, 0.25);
    CHECK(max_abs_diff(helmholtz(w, 0.25), u) < 1e-12 * u.max_abs());
    CHECK(divergence_bound(w) < 1e-12);
  }
}

TEST_CASE("Leray projection", "[spectral][ops]") {
  auto grid = make_grid(32);
  auto cosx = ScalarField::sample(grid, [](double x, double) { return std::cos(x); });
  CHECK(leray_project(grad(cosx)).max_abs() < 1e-15);

  auto shear = VectorField::sample(grid, [](double, double y) { return std::array{std::sin(y), 0.0}; });
  CHECK(max_abs_diff(to_physical(leray_project(shear)), shear) < 1e-15);

  SECTION("per-mode formula on u + grad f") {
    std::mt19937_64 rng(9);
    auto u = lagflow::testing::random_band_limited<2>(grid, rng);
    auto f = lagflow::testing::random_band_limited<1>(grid, rng);
    auto p = leray_project(u + grad(f));
    CHECK(max_abs_diff(p, leray_project(u)) < 1e-14);
    for (int k1 = -10; k1 <= 10; ++k1)
      for (int k2 = -10; k2 <= 10; ++k2) {
        const double a1 = k1, a2 = k2;
        const double kk = a1 * a1 + a2 * a2;
        const Complex a = u.coefficient(0, k1, k2), b = u.coefficient(1, k1, k2);
        Complex e1 = a, e2 = b;
        if (kk > 0) {
          e1 = a - (a1 * (a1 * a + a2 * b)) / kk;
          e2 = b - (a2 * (a1 * a + a2 * b)) / kk;
        }
        CHECK(std::abs(p.coefficient(0, k1, k2) - e1) < 1e-14);
        CHECK(std::abs(p.coefficient(1, k1, k2) - e2) < 1e-14);
      }
  }
}

TEST_CASE("velocity from vorticity", "[spectral][ops]") {
  auto grid = make_grid(32);
  auto invert = [&](auto w) { return velocity_from_vorticity(to_spectral(ScalarField::sample(grid, w))); };

  auto u = to_physical(invert([](double x, double) { return std::sin(x); }));
  CHECK(max_abs_diff(u, VectorField::sample(grid, [](double x, double) { return std::array{0.0, -std::cos(x)}; })) <
        1e-15);

  CHECK(invert([](double, double) { return 0.0; }).max_abs() == 0.0);

  // Taylor-Green: substituting u = (sin x cos y, -cos x sin y) gives curl u = 2 sin x sin y.
  auto tg_w = [](double x, double y) { return 2 * std::sin(x) * std::sin(y); };
  auto tg = invert(tg_w);
  auto tg_exact = VectorField::sample(
      grid, [](double x, double y) { return std::array{std::sin(x) * std::cos(y), -std::cos(x) * std::sin(y)}; });
  CHECK(max_abs_diff(to_physical(tg), tg_exact) < 1e-15);
  CHECK(max_abs_diff(to_physical(curl2d(tg_exact)), ScalarField::sample(grid, tg_w)) < 1e-13);

  double removed = 0.0;
  auto w = to_spectral(ScalarField::sample(grid, [](double x, double y) { return 0.3 + std::cos(x + y); }));
  auto v = velocity_from_vorticity(w, &removed);
  CHECK(removed == Approx(0.3));
  CHECK(divergence_bound(v) < 1e-14);
  auto w0 = w;
  w0.zero_mean();
  CHECK(max_abs_diff(curl2d(v), w0) < 1e-14);
}

TEST_CASE("Sobolev norms", "[spectral][sobolev]") {
  auto grid = make_grid(32);
  auto sinx = ScalarField::sample(grid, [](double x, double) { return std::sin(x); });
  for (double s : {0.0, 1.0, 2.5, 4.0}) {
    CHECK(sobolev_norm(sinx, s) == Approx(std::pow(2.0, s / 2) * pi * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(sobolev_norm(ScalarField::sample(grid, [](double, double) { return 0.75; }), s) ==
          Approx(2 * pi * 0.75).epsilon(1e-14));
  }
  CHECK_THROWS_AS(sobolev_norm(sinx, -0.5), std::invalid_argument);

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = lagflow::testing::random_band_limited<2>(grid, rng, false);
    auto phys = to_physical(f);
    const double h = grid->spacing();
    double quad = 0.0;
    for (std::size_t c = 0; c < 2; ++c)
      for (double v : phys[c]) quad += v * v * h * h;
    CHECK(sobolev_norm(f, 0.0) == Approx(std::sqrt(quad)).epsilon(1e-10));
    double prev = 0.0;
    for (double s : {0.0, 0.5, 1.0, 2.0, 2.5, 3.0}) {
      const double v = sobolev_norm(f, s);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("operator identities on random fields", "[spectral][property]") {
  auto grid = make_grid(32);
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = lagflow::testing::random_band_limited<1>(grid, rng);
    auto u = lagflow::testing::random_band_limited<2>(grid, rng);
    auto v = lagflow::testing::random_band_limited<2>(grid, rng);

    CHECK(max_abs_diff(div(grad(f)), laplacian(f)) <= 1e-13);
    CHECK(curl2d(grad(f)).max_abs() <= 1e-13);

    auto pu = leray_project(u);
    CHECK(max_abs_diff(leray_project(pu), pu) <= 1e-11);
    CHECK(std::abs(inner_product(pu, v) - inner_product(u, leray_project(v))) <= 1e-11);
    CHECK(max_abs(to_physical(div(pu))) <= 1e-12);
    CHECK(std::abs(inner_product(pu, grad(f))) <= 1e-11);

    CHECK(max_abs_diff(helmholtz_inv(leray_project(u), 0.3), leray_project(helmholtz_inv(u, 0.3))) <= 1e-12);

    auto phys = to_physical(u);
    CHECK(max_abs_diff(to_physical(to_spectral(phys)), phys) <= 1e-12 * max_abs(phys));
  }
}
