#include "qosc/response.hpp"

#include <cmath>

#include "qosc/error.hpp"

namespace qosc {

CoherentAmplitudes alpha_from_current(const CurrentSource& source, double t_final, double quadrature_dt) {
    if (!(t_final > 0.0)) throw DomainError("alpha_from_current: t_final must be positive");
    if (!(quadrature_dt > 0.0)) throw DomainError("alpha_from_current: quadrature_dt must be positive");
    const double ratio = t_final / quadrature_dt;
    const long steps = std::lround(ratio);
    if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio)
        throw DomainError("alpha_from_current: quadrature_dt must divide t_final");
    if (source.longitudinal_residual() > 1e-10)
        throw DomainError("alpha_from_current: source is not transverse");

    const auto& g = source.grid();
    const auto& K = g.constants();
    const double dt = t_final / static_cast<double>(steps);

    // Midpoint time quadrature of exp(i omega t) j(k, t); one running sum per component.
    SpectralField acc(source.grid_ptr(), field_components(g));
    for (long n = 0; n < steps; ++n) {
        const double t = (static_cast<double>(n) + 0.5) * dt;
        for (const auto& term : source.terms()) {
            const double env = term.envelope(t);
            if (env == 0.0) continue;
            for (int c = 0; c < acc.components; ++c)
                for (std::size_t k = 0; k < g.size(); ++k) {
                    if (g.is_zero_mode(k)) continue;
                    acc.at(c, k) += std::polar(env * dt, g.omega(k) * t) * term.profile.at(c, k);
                }
        }
    }

    // dV * FFT(j) approximates int dx j exp(-i k.x); project on helicities.
    for (auto& v : acc.data) v *= cplx(0.0, g.cell_volume() / std::sqrt(2.0 * K.eps0 * K.hbar));
    CoherentAmplitudes out{to_helicity(acc), source.description(), 0.0, t_final, dt};
    out.alpha.clear_zero_mode();
    return out;
}

FieldSnapshot field_expectation(const CoherentAmplitudes& alphas, double t) {
    return fields_from_amplitudes(alphas.alpha, t).A;
}

FieldSnapshot field_expectation_D(const CoherentAmplitudes& alphas, double t) {
    return fields_from_amplitudes(alphas.alpha, t).D;
}

std::vector<double> photon_count_distribution(cplx alpha, int n_max) {
    if (n_max < 0) throw DomainError("n_max must be non-negative");
    const double mean = std::norm(alpha);
    std::vector<double> p(static_cast<std::size_t>(n_max + 1));
    if (mean == 0.0) {
        p[0] = 1.0;
        return p;
    }
    // log space keeps large means from underflowing exp(-|alpha|^2)
    const double log_mean = std::log(mean);
    for (int n = 0; n <= n_max; ++n) p[n] = std::exp(n * log_mean - mean - std::lgamma(n + 1.0));
    return p;
}

int recommended_n_max(cplx alpha) { return static_cast<int>(std::ceil(4.0 * std::norm(alpha))) + 20; }

std::vector<double> photon_count_distribution(const CoherentAmplitudes& alphas, const ModeId& mode, int n_max) {
    const auto& g = alphas.alpha.grid();
    check_mode_on_grid(mode, g);
    const int slot = g.dim() == 3 ? slot_from_helicity(mode.lambda) : 0;
    const cplx a = alphas.alpha.at(slot, mode.k_index);
    const int needed = recommended_n_max(a);
    if (n_max < 0) n_max = needed;
    if (n_max < needed)
        throw DomainError("photon_count_distribution: n_max " + std::to_string(n_max) + " below 4|alpha|^2 + 20");
    return photon_count_distribution(a, n_max);
}

}  // namespace qosc
