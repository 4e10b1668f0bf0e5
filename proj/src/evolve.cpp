#include "qosc/evolve.hpp"

#include <cmath>
#include <string>

#include "qosc/error.hpp"

namespace qosc {

namespace {

void validate(const EvolveOptions& opt) {
    if (!(opt.dt > 0.0) || !std::isfinite(opt.dt)) throw DomainError("time step must be positive");
    if (opt.steps < 0) throw DomainError("step count must be non-negative");
    if (opt.sample_every < 1) throw DomainError("sample_every must be >= 1");
}

bool should_sample(int step, const EvolveOptions& opt) {
    return step == 0 || step == opt.steps || step % opt.sample_every == 0;
}

void check_finite(const SpectralField& f, int step, const char* what) {
    for (const auto& v : f.data)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw PropagationError(std::string(what) + ": non-finite field at step " + std::to_string(step));
}

struct PhaseTable {
    std::vector<double> cos_full, sin_full, cos_half, sin_half;

    PhaseTable(const KGrid& g, double dt)
        : cos_full(g.size()), sin_full(g.size()), cos_half(g.size()), sin_half(g.size()) {
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double w = g.omega(k);
            cos_full[k] = std::cos(w * dt);
            sin_full[k] = std::sin(w * dt);
            cos_half[k] = std::cos(0.5 * w * dt);
            sin_half[k] = std::sin(0.5 * w * dt);
        }
    }
};

}  // namespace

std::vector<MaxwellSample> evolve_maxwell(const FieldSnapshot& A, const FieldSnapshot& D,
                                          const CurrentSource& source, const EvolveOptions& options) {
    validate(options);
    const auto& g = A.lattice();
    if (!g.same_lattice(D.lattice()) || !g.same_lattice(source.grid()))
        throw DomainError("evolve_maxwell: fields and source live on different grids");
    if (A.time != D.time) throw DomainError("evolve_maxwell: A and D are given at different times");
    const double eps0 = g.constants().eps0;

    SpectralField a = to_spectral(A), d = to_spectral(D);
    check_finite(a, 0, "evolve_maxwell");
    check_finite(d, 0, "evolve_maxwell");
    for (int c = 0; c < a.components; ++c) {
        a.at(c, g.zero_mode_index()) = 0.0;
        d.at(c, g.zero_mode_index()) = 0.0;
    }

    const PhaseTable ph(g, options.dt);
    std::vector<MaxwellSample> out;
    double t = A.time;
    out.push_back({0, to_real_space(a, FieldKind::A_perp, t), to_real_space(d, FieldKind::D, t)});

    for (int step = 1; step <= options.steps; ++step) {
        const bool sourced = !source.empty();
        SpectralField j = sourced ? source.evaluate_spectral(t + 0.5 * options.dt) : SpectralField(A.grid, 1);
        for (int c = 0; c < a.components; ++c) {
            for (std::size_t k = 0; k < g.size(); ++k) {
                if (g.is_zero_mode(k)) continue;
                const double w = g.omega(k);
                const cplx a0 = a.at(c, k), d0 = d.at(c, k);
                cplx a1 = a0 * ph.cos_full[k] - d0 * ph.sin_full[k] / (eps0 * w);
                cplx d1 = a0 * (eps0 * w * ph.sin_full[k]) + d0 * ph.cos_full[k];
                if (sourced) {
                    // R(dt/2) applied to (0, -j), times dt.
                    const cplx jm = j.at(c, k);
                    a1 += options.dt * jm * ph.sin_half[k] / (eps0 * w);
                    d1 -= options.dt * jm * ph.cos_half[k];
                }
                a.at(c, k) = a1;
                d.at(c, k) = d1;
            }
        }
        t = A.time + step * options.dt;
        if (should_sample(step, options)) {
            check_finite(a, step, "evolve_maxwell");
            check_finite(d, step, "evolve_maxwell");
            out.push_back({step, to_real_space(a, FieldKind::A_perp, t), to_real_space(d, FieldKind::D, t)});
        }
    }
    return out;
}

std::vector<MaxwellSample> evolve_maxwell(const FieldSnapshot& A, const FieldSnapshot& D,
                                          const EvolveOptions& options) {
    return evolve_maxwell(A, D, CurrentSource(A.grid), options);
}

std::vector<FieldSnapshot> evolve_se(const FieldSnapshot& psi, const CurrentSource& source,
                                     const EvolveOptions& options) {
    validate(options);
    if (psi.kind != FieldKind::psi) throw DomainError("evolve_se expects a psi snapshot");
    const auto& g = psi.lattice();
    if (!g.same_lattice(source.grid())) throw DomainError("evolve_se: field and source live on different grids");
    const auto& K = g.constants();

    SpectralField f = to_spectral(psi);
    check_finite(f, 0, "evolve_se");
    for (int c = 0; c < f.components; ++c) f.at(c, g.zero_mode_index()) = 0.0;

    const PhaseTable ph(g, options.dt);
    std::vector<FieldSnapshot> out;
    double t = psi.time;
    out.push_back(to_real_space(f, FieldKind::psi, t));

    const cplx I(0.0, 1.0);
    for (int step = 1; step <= options.steps; ++step) {
        const bool sourced = !source.empty();
        SpectralField j = sourced ? source.evaluate_spectral(t + 0.5 * options.dt) : SpectralField(psi.grid, 1);
        for (int c = 0; c < f.components; ++c) {
            for (std::size_t k = 0; k < g.size(); ++k) {
                if (g.is_zero_mode(k)) continue;
                cplx v = f.at(c, k) * cplx(ph.cos_full[k], -ph.sin_full[k]);
                if (sourced) {
                    // dpsi/dt = -i Omega psi + i (2 eps0 hbar Omega)^{-1/2} j
                    const cplx s = I * j.at(c, k) / std::sqrt(2.0 * K.eps0 * K.hbar * g.omega(k));
                    v += options.dt * cplx(ph.cos_half[k], -ph.sin_half[k]) * s;
                }
                f.at(c, k) = v;
            }
        }
        t = psi.time + step * options.dt;
        if (should_sample(step, options)) {
            check_finite(f, step, "evolve_se");
            out.push_back(to_real_space(f, FieldKind::psi, t));
        }
    }
    return out;
}

std::vector<FieldSnapshot> evolve_se(const FieldSnapshot& psi, const EvolveOptions& options) {
    return evolve_se(psi, CurrentSource(psi.grid), options);
}

}  // namespace qosc
