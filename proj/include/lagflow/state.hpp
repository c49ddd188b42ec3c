#pragma once

#include <lagflow/dynamics.hpp>
#include <lagflow/flowmap.hpp>

#include <optional>

namespace lagflow {

/// Coupled Eulerian/Lagrangian state: divergence-free velocity (spectral)
/// and the particle flow map it drives. fm.t tracks t.
struct SimState {
  double t = 0.0;
  VectorSpectrum u;
  FlowMap fm;
  ModelParams params;
  // Rounding residue of the velocity update (compensated summation); absent
  // means zero.
  std::optional<VectorSpectrum> u_carry;
};

}  // namespace lagflow
