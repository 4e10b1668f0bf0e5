#pragma once

#include <vector>

#include "qosc/fields.hpp"

namespace qosc {

/**
 * Positive-frequency propagator for one helicity,
 *   K+(dt, dx) = sum_k w_k exp(-i (omega_k dt - k.dx)),
 * the k-space scalar product of two localized amplitude sets c_x(k) = exp(-i k x).
 * Anti-local: it does not vanish outside the light cone.
 */
cplx propagator_photon(const KGrid& grid, double dt, const Vec3& dx);
/// Helicity sum of propagator_photon (factor 2 in 3D, 1 in 1D).
cplx propagator_photon_unpolarized(const KGrid& grid, double dt, const Vec3& dx);

/**
 * (1/(2 eps0 hbar)) <0|[A_lambda(x), . D_lambda(x')]|0> for one helicity,
 *   K_AD(dt, dx) = (1/2V) sum_k [exp(-i(omega dt - k.dx)) + exp(+i(omega dt - k.dx))],
 * photon propagation forward plus its time-reversed partner. The sum runs over the
 * whole lattice including k = 0, so at dt = 0 it is exactly the lattice delta
 * (1/cell volume on site, 0 elsewhere), and at lattice-commensurate times
 * (c dt a multiple of dx) it vanishes identically outside the light cone.
 */
double commutator_kernel_AD(const KGrid& grid, double dt, const Vec3& dx);
/// The same lattice sum kept in complex arithmetic; its imaginary part measures lattice asymmetry.
cplx commutator_kernel_AD_complex(const KGrid& grid, double dt, const Vec3& dx);
double commutator_kernel_AD_unpolarized(const KGrid& grid, double dt, const Vec3& dx);

struct KernelSample {
    double dt;
    Vec3 dx;
    cplx photon;   // K+
    double ad;     // K_AD
};

/// Evaluate both kernels at each separation. Samples are independent and are spread over
/// QOSC_THREADS worker threads when that variable is set.
std::vector<KernelSample> sample_kernels(const KGrid& grid, const std::vector<SpacetimePoint>& separations);

/// Region a field started in: points within `radius` of `center` (periodic distance).
struct Support {
    Vec3 center{0.0, 0.0, 0.0};
    double radius = 0.0;
};

/// Light-crossing horizon (L - 2 radius) / (2c) beyond which periodic images can interfere.
double validity_horizon(const KGrid& grid, const Support& support);

struct LeakageResult {
    double fraction = 0.0;
    bool beyond_horizon = false;
    double horizon = 0.0;
};

/**
 * Fraction of a non-negative density lying outside {x : dist(x, support) <= c t + guard_cells dx}.
 * The one-cell guard band absorbs spectral ringing at the cone itself.
 */
LeakageResult light_cone_leakage(const ScalarField& density, double t, const Support& support,
                                 int guard_cells = 1);
/// |psi|^2 leakage.
LeakageResult light_cone_leakage(const FieldSnapshot& psi, double t, const Support& support, int guard_cells = 1);
/// Energy-density leakage of a real (A, D) pair.
LeakageResult light_cone_leakage(const FieldSnapshot& A, const FieldSnapshot& D, double t, const Support& support,
                                 int guard_cells = 1);

}  // namespace qosc
