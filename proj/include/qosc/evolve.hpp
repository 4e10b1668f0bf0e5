#pragma once

#include <vector>

#include "qosc/fields.hpp"

namespace qosc {

struct EvolveOptions {
    double dt = 0.0;
    int steps = 0;
    /// Record every sample_every-th step; the initial and final states are always recorded.
    int sample_every = 1;
};

struct MaxwellSample {
    int step;
    FieldSnapshot A;
    FieldSnapshot D;
};

/**
 * Integrate dA/dt = -D/eps0, dD/dt = eps0 Omega^2 A - j_perp.
 *
 * Each step applies the exact per-mode free rotation over dt and adds the source
 * by the midpoint rule, dt * R(dt/2) (0, -j(t + dt/2)), so the scheme is exact for
 * free fields and second order in dt for the source. The k = 0 site is not evolved.
 */
std::vector<MaxwellSample> evolve_maxwell(const FieldSnapshot& A, const FieldSnapshot& D,
                                          const CurrentSource& source, const EvolveOptions& options);
std::vector<MaxwellSample> evolve_maxwell(const FieldSnapshot& A, const FieldSnapshot& D,
                                          const EvolveOptions& options);

/**
 * Integrate i dpsi/dt = Omega psi - (2 eps0 hbar Omega)^{-1/2} j_perp with exact
 * phases exp(-i omega dt) and the same midpoint source rule as evolve_maxwell.
 * Returns the sampled psi snapshots.
 */
std::vector<FieldSnapshot> evolve_se(const FieldSnapshot& psi, const CurrentSource& source,
                                     const EvolveOptions& options);
std::vector<FieldSnapshot> evolve_se(const FieldSnapshot& psi, const EvolveOptions& options);

}  // namespace qosc
