#pragma once

#include <lagflow/dynamics.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lagflow {

enum class ICKind { taylor_green, shear, modes, random };

inline std::string_view to_string(ICKind k) {
  switch (k) {
    case ICKind::taylor_green: return "taylor_green";
    case ICKind::shear: return "shear";
    case ICKind::modes: return "modes";
    case ICKind::random: return "random";
  }
  return "?";
}

/// One term amplitude * cos(k1 x + k2 y + phase).
struct FourierMode {
  int k1 = 0;
  int k2 = 0;
  double amplitude = 0.0;
  double phase = 0.0;
  friend bool operator==(const FourierMode&, const FourierMode&) = default;
};

/// Initial-condition description. For `modes` the terms define the
/// vorticity (euler) or the potential vorticity (euler_alpha). For
/// `random` the vorticity spectrum is |omega_k| ~ (1 + |k|^2)^(-p/2) for
/// 0 < |k| <= cutoff with uniformly random phases; the resulting velocity is
/// scaled to max |u| = 1 on the grid.
struct ICSpec {
  ICKind kind = ICKind::taylor_green;
  std::vector<FourierMode> modes;
  std::uint64_t seed = 0;
  double p = 4.0;
  int cutoff = 8;
  friend bool operator==(const ICSpec&, const ICSpec&) = default;
};

namespace detail {
// Uniform double in [0, 1) from the top 53 bits; fixed across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
}  // namespace detail

/// Random zero-mean vorticity with the power-law spectrum described above
/// (unnormalised).
inline ScalarSpectrum random_vorticity(const GridPtr& grid, std::uint64_t seed, double p, int cutoff) {
  const Grid& g = *grid;
  if (cutoff < 1) throw std::invalid_argument("random IC: cutoff K must be >= 1");
  if (3 * cutoff >= g.n()) {
    throw std::invalid_argument("random IC: cutoff K = " + std::to_string(cutoff) +
                                " violates the dealiasing headroom K < n/3 (n = " + std::to_string(g.n()) + ")");
  }
  std::mt19937_64 rng(seed);
  ScalarSpectrum w(grid);
  for (int k1 = 0; k1 <= cutoff; ++k1)
    for (int k2 = -cutoff; k2 <= cutoff; ++k2) {
      if (k1 == 0 && k2 <= 0) continue;  // conjugate partners of k1 = 0, k2 > 0
      const double kk = double(k1) * k1 + double(k2) * k2;
      if (kk > double(cutoff) * cutoff) continue;
      const double amp = std::pow(1.0 + kk, -p / 2.0);
      const Complex c = std::polar(amp, kTwoPi * detail::unit_uniform(rng));
      w.at(0, g.row_of(k2), k1) = c;
      if (k1 == 0) w.at(0, g.row_of(-k2), 0) = std::conj(c);
    }
  return w;
}

/// Divergence-free, zero-mean initial velocity for the given model.
inline VectorSpectrum build_ic(const ICSpec& spec, const GridPtr& grid, const ModelParams& params) {
  switch (spec.kind) {
    case ICKind::taylor_green:
      return to_spectral(VectorField::sample(grid, [](double x, double y) {
        return std::array{std::sin(x) * std::cos(y), -std::cos(x) * std::sin(y)};
      }));
    case ICKind::shear:
      return to_spectral(VectorField::sample(grid, [](double, double y) { return std::array{std::sin(y), 0.0}; }));
    case ICKind::modes: {
      if (spec.modes.empty()) throw std::invalid_argument("modes IC: at least one mode is required");
      for (const auto& m : spec.modes) {
        if (3 * std::abs(m.k1) >= grid->n() || 3 * std::abs(m.k2) >= grid->n()) {
          throw std::invalid_argument("modes IC: wavenumber (" + std::to_string(m.k1) + ", " + std::to_string(m.k2) +
                                      ") violates the dealiasing headroom |k| < n/3");
        }
      }
      const ScalarSpectrum g = to_spectral(ScalarField::sample(grid, [&](double x, double y) {
        double v = 0.0;
        for (const auto& m : spec.modes) v += m.amplitude * std::cos(m.k1 * x + m.k2 * y + m.phase);
        return v;
      }));
      return params.model == Model::euler ? velocity_from_vorticity(g) : velocity_from_q(g, params.alpha);
    }
    case ICKind::random: {
      VectorSpectrum u = velocity_from_vorticity(random_vorticity(grid, spec.seed, spec.p, spec.cutoff));
      const double umax = to_physical(u).max_norm();
      if (umax > 0.0) u *= 1.0 / umax;
      return u;
    }
  }
  throw std::invalid_argument("unknown IC kind");
}

}  // namespace lagflow
