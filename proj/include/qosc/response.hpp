#pragma once

#include <string>
#include <vector>

#include "qosc/fields.hpp"
#include "qosc/fock.hpp"

namespace qosc {

/// Coherent amplitudes alpha_lambda(k) left behind by a classical current, with their provenance.
struct CoherentAmplitudes {
    ModeAmplitudes alpha;
    std::string source_description;
    double t_start = 0.0;
    double t_final = 0.0;
    double quadrature_dt = 0.0;
};

/**
 * alpha_lambda(k) = (i / sqrt(2 eps0 hbar)) int_0^T dt' int dx e_lambda(k)^* . j(t', x) exp(i(omega_k t' - k.x)).
 *
 * With this normalization field_expectation(alpha, t) reproduces, for t >= T, the
 * retarded solution of the sourced Maxwell pair started from zero fields at t = 0.
 * Time integral by the composite midpoint rule; quadrature_dt must divide t_final.
 * Throws DomainError for a source that is not transverse (ratio above 1e-10).
 */
CoherentAmplitudes alpha_from_current(const CurrentSource& source, double t_final, double quadrature_dt);

/// A_perp(t, x) = sqrt(hbar/eps0) sum_lambda sum_k w_k alpha e_lambda e^{-ikx} / sqrt(2) + c.c.
FieldSnapshot field_expectation(const CoherentAmplitudes& alphas, double t);
/// The matching D = -eps0 dA/dt.
FieldSnapshot field_expectation_D(const CoherentAmplitudes& alphas, double t);

/// Poisson counting statistics P(n) = exp(-|a|^2) |a|^{2n} / n!, n = 0..n_max.
std::vector<double> photon_count_distribution(cplx alpha, int n_max);
/// Same for one (lambda, k) mode of a coherent response. n_max defaults to ceil(4|alpha|^2) + 20.
std::vector<double> photon_count_distribution(const CoherentAmplitudes& alphas, const ModeId& mode, int n_max = -1);
int recommended_n_max(cplx alpha);

}  // namespace qosc
