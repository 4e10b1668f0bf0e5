#include "qosc/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qosc/error.hpp"
#include "qosc/spectral.hpp"

namespace qosc {

namespace {

void require_same_grid(const KGrid& a, const KGrid& b, const char* what) {
    if (!a.same_lattice(b)) throw DomainError(std::string(what) + ": operands live on different grids");
}

void require_finite(std::span<const cplx> data, const char* what) {
    for (const auto& v : data)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw PropagationError(std::string(what) + ": non-finite value in input");
}

/// e_lambda(k) on 3D grids, or the scalar 1 (first slot) for the 1D analog.
CVec3 polarization(const KGrid& grid, const PolarizationBasis* basis, std::size_t k, int slot) {
    if (grid.dim() == 1) return {cplx(1.0), cplx(0.0), cplx(0.0)};
    return basis->e(k, helicity_from_slot(slot));
}

const PolarizationBasis* basis_for(const KGrid& grid) {
    return grid.dim() == 3 ? &grid.polarization_basis() : nullptr;
}

}  // namespace

std::string to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::A_perp: return "A_perp";
        case FieldKind::D: return "D";
        case FieldKind::B: return "B";
        case FieldKind::psi: return "psi";
        case FieldKind::j_perp: return "j_perp";
    }
    return "unknown";
}

FieldKind field_kind_from_string(const std::string& name) {
    for (auto k : {FieldKind::A_perp, FieldKind::D, FieldKind::B, FieldKind::psi, FieldKind::j_perp})
        if (to_string(k) == name) return k;
    throw DomainError("unknown field kind '" + name + "'");
}

// ---------------------------------------------------------------------------

ModeAmplitudes::ModeAmplitudes(GridPtr grid)
    : grid_(std::move(grid)), helicities_(helicity_count(*grid_)),
      data_(static_cast<std::size_t>(helicities_) * grid_->size(), cplx(0.0)) {}

void ModeAmplitudes::clear_zero_mode() {
    for (int s = 0; s < helicities_; ++s) at(s, grid_->zero_mode_index()) = 0.0;
}

bool ModeAmplitudes::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

ModeAmplitudes& ModeAmplitudes::operator+=(const ModeAmplitudes& o) {
    require_same_grid(*grid_, *o.grid_, "ModeAmplitudes +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

ModeAmplitudes& ModeAmplitudes::operator*=(cplx s) {
    for (auto& v : data_) v *= s;
    return *this;
}

SpectralField::SpectralField(GridPtr g, int comps)
    : grid(std::move(g)), components(comps), data(static_cast<std::size_t>(comps) * grid->size(), cplx(0.0)) {}

CVec3 SpectralField::vec(std::size_t k) const {
    CVec3 v{cplx(0.0), cplx(0.0), cplx(0.0)};
    for (int c = 0; c < components; ++c) v[c] = at(c, k);
    return v;
}

void SpectralField::set_vec(std::size_t k, const CVec3& v) {
    for (int c = 0; c < components; ++c) at(c, k) = v[c];
}

FieldSnapshot::FieldSnapshot(FieldKind k, double t, GridPtr g)
    : kind(k), time(t), grid(std::move(g)), components(field_components(*grid)),
      data(static_cast<std::size_t>(components) * grid->size(), cplx(0.0)) {}

double FieldSnapshot::imag_residue() const {
    double max_abs = 0.0, max_imag = 0.0;
    for (const auto& v : data) {
        max_abs = std::max(max_abs, std::abs(v));
        max_imag = std::max(max_imag, std::abs(v.imag()));
    }
    return max_abs > 0.0 ? max_imag / max_abs : 0.0;
}

FieldSnapshot FieldSnapshot::real_part() const {
    FieldSnapshot out = *this;
    for (auto& v : out.data) v = cplx(v.real(), 0.0);
    return out;
}

double ScalarField::integral() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid->cell_volume();
}

SpectralField to_spectral(const FieldSnapshot& field) {
    SpectralField out(field.grid, field.components);
    out.data = field.data;
    const std::size_t n = field.grid->size();
    for (int c = 0; c < field.components; ++c)
        spectral::forward(*field.grid, std::span<cplx>(out.data.data() + static_cast<std::size_t>(c) * n, n));
    return out;
}

FieldSnapshot to_real_space(const SpectralField& field, FieldKind kind, double time) {
    FieldSnapshot out(kind, time, field.grid);
    if (out.components != field.components) throw DomainError("component count does not match the grid");
    out.data = field.data;
    const std::size_t n = field.grid->size();
    for (int c = 0; c < field.components; ++c)
        spectral::inverse(*field.grid, std::span<cplx>(out.data.data() + static_cast<std::size_t>(c) * n, n));
    return out;
}

// ---------------------------------------------------------------------------
// Frequency operator

namespace {

double omega_power(const KGrid& grid, std::size_t k, double s) {
    if (grid.is_zero_mode(k)) return s == 0.0 ? 1.0 : 0.0;
    return std::pow(grid.omega(k), s);
}

}  // namespace

ModeAmplitudes apply_omega_power(const ModeAmplitudes& field, double s) {
    require_finite(field.raw(), "apply_omega_power");
    ModeAmplitudes out = field;
    const auto& g = field.grid();
    for (int slot = 0; slot < out.helicities(); ++slot)
        for (std::size_t k = 0; k < g.size(); ++k) out.at(slot, k) *= omega_power(g, k, s);
    return out;
}

SpectralField apply_omega_power(const SpectralField& field, double s) {
    require_finite(field.data, "apply_omega_power");
    SpectralField out = field;
    const auto& g = *field.grid;
    for (int c = 0; c < out.components; ++c)
        for (std::size_t k = 0; k < g.size(); ++k) out.at(c, k) *= omega_power(g, k, s);
    return out;
}

FieldSnapshot apply_omega_power(const FieldSnapshot& field, double s) {
    require_finite(field.data, "apply_omega_power");
    return to_real_space(apply_omega_power(to_spectral(field), s), field.kind, field.time);
}

// ---------------------------------------------------------------------------
// Transverse sector and helicity

SpectralField transverse_project(const SpectralField& field) {
    const auto& g = *field.grid;
    if (g.dim() != 3 || field.components != 3) throw DomainError("transverse projection needs a 3D vector field");
    SpectralField out(field.grid, 3);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!g.is_transverse_active(k)) continue;
        const Vec3& kv = g.k(k);
        const double k2 = dot(kv, kv);
        const CVec3 f = field.vec(k);
        const cplx kf = kv[0] * f[0] + kv[1] * f[1] + kv[2] * f[2];
        CVec3 p;
        for (int j = 0; j < 3; ++j) p[j] = f[j] - kv[j] * kf / k2;
        out.set_vec(k, p);
    }
    return out;
}

double divergence_ratio(const SpectralField& field) {
    const auto& g = *field.grid;
    if (g.dim() != 3) return 0.0;
    double max_norm = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const CVec3 f = field.vec(k);
        max_norm = std::max(max_norm, std::sqrt(std::real(dotc(f, f))));
    }
    if (max_norm == 0.0) return 0.0;
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const CVec3 f = field.vec(k);
        const double fn = std::sqrt(std::real(dotc(f, f)));
        if (fn <= 1e-13 * max_norm) continue;
        if (g.is_zero_mode(k)) {
            worst = std::max(worst, 1.0);  // a k = 0 vector is never transverse
            continue;
        }
        const Vec3& kv = g.k(k);
        const cplx kf = kv[0] * f[0] + kv[1] * f[1] + kv[2] * f[2];
        worst = std::max(worst, std::abs(kf) / (g.k_norm(k) * fn));
    }
    return worst;
}

ModeAmplitudes to_helicity(const SpectralField& field) {
    const auto& g = *field.grid;
    ModeAmplitudes out(field.grid);
    if (g.dim() == 1) {
        std::copy(field.data.begin(), field.data.end(), out.raw().begin());
        return out;
    }
    const PolarizationBasis& basis = g.polarization_basis();
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!g.is_transverse_active(k)) continue;
        const CVec3 f = field.vec(k);
        out.at(0, k) = dotc(basis.e(k, +1), f);
        out.at(1, k) = dotc(basis.e(k, -1), f);
    }
    return out;
}

SpectralField from_helicity(const ModeAmplitudes& amps) {
    const auto& g = amps.grid();
    SpectralField out(amps.grid_ptr(), field_components(g));
    if (g.dim() == 1) {
        std::copy(amps.raw().begin(), amps.raw().end(), out.data.begin());
        return out;
    }
    const PolarizationBasis& basis = g.polarization_basis();
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!g.is_transverse_active(k)) continue;
        CVec3 v{cplx(0.0), cplx(0.0), cplx(0.0)};
        for (int slot = 0; slot < 2; ++slot) {
            const CVec3& e = basis.e(k, helicity_from_slot(slot));
            for (int j = 0; j < 3; ++j) v[j] += amps.at(slot, k) * e[j];
        }
        out.set_vec(k, v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Covariant amplitudes <-> fields

FieldPair fields_from_amplitudes(const ModeAmplitudes& c, double t) {
    require_finite(c.raw(), "fields_from_amplitudes");
    const auto& g = c.grid();
    const auto& K = g.constants();
    const auto basis = basis_for(g);
    const int comps = field_components(g);
    const double n_sites = static_cast<double>(g.size());

    // a(k) = N sqrt(hbar/(2 eps0)) w_k sum_lambda c_lambda(k) e_lambda(k) e^{-i omega t}
    std::vector<CVec3> a(g.size(), CVec3{cplx(0.0), cplx(0.0), cplx(0.0)});
    const double pref = n_sites * std::sqrt(K.hbar / (2.0 * K.eps0));
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!g.is_transverse_active(k)) continue;
        const cplx phase = std::polar(pref * g.weight(k), -g.omega(k) * t);
        for (int slot = 0; slot < c.helicities(); ++slot) {
            const CVec3 e = polarization(g, basis, k, slot);
            for (int j = 0; j < comps; ++j) a[k][j] += phase * c.at(slot, k) * e[j];
        }
    }

    SpectralField At(c.grid_ptr(), comps), Dt(c.grid_ptr(), comps);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.is_zero_mode(k)) continue;
        const std::size_t nk = g.negated_index(k);
        const cplx d_pref(0.0, K.eps0 * g.omega(k));
        for (int j = 0; j < comps; ++j) {
            At.at(j, k) = a[k][j] + std::conj(a[nk][j]);
            Dt.at(j, k) = d_pref * (a[k][j] - std::conj(a[nk][j]));
        }
    }
    return {to_real_space(At, FieldKind::A_perp, t), to_real_space(Dt, FieldKind::D, t)};
}

FieldSnapshot psi_from_amplitudes(const ModeAmplitudes& c, double t) {
    require_finite(c.raw(), "psi_from_amplitudes");
    const auto& g = c.grid();
    const auto basis = basis_for(g);
    const int comps = field_components(g);
    SpectralField psi(c.grid_ptr(), comps);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.is_zero_mode(k)) continue;
        const cplx phase = std::polar(1.0 / (g.cell_volume() * std::sqrt(g.omega(k))), -g.omega(k) * t);
        for (int slot = 0; slot < c.helicities(); ++slot) {
            const CVec3 e = polarization(g, basis, k, slot);
            for (int j = 0; j < comps; ++j) psi.at(j, k) += phase * c.at(slot, k) * e[j];
        }
    }
    return to_real_space(psi, FieldKind::psi, t);
}

ModeAmplitudes amplitudes_from_psi(const FieldSnapshot& psi) {
    if (psi.kind != FieldKind::psi) throw DomainError("amplitudes_from_psi expects a psi snapshot");
    require_finite(psi.data, "amplitudes_from_psi");
    const auto& g = psi.lattice();
    const auto basis = basis_for(g);
    const SpectralField f = to_spectral(psi);
    ModeAmplitudes c(psi.grid);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.is_zero_mode(k)) continue;
        const cplx phase = std::polar(g.cell_volume() * std::sqrt(g.omega(k)), g.omega(k) * psi.time);
        const CVec3 v = f.vec(k);
        for (int slot = 0; slot < c.helicities(); ++slot) {
            const CVec3 e = polarization(g, basis, k, slot);
            c.at(slot, k) = phase * dotc(e, v);
        }
    }
    return c;
}

FieldSnapshot build_psi(const FieldSnapshot& A, const FieldSnapshot& D) {
    require_same_grid(A.lattice(), D.lattice(), "build_psi");
    if (A.time != D.time) throw DomainError("build_psi: A and D are given at different times");
    require_finite(A.data, "build_psi");
    require_finite(D.data, "build_psi");
    const auto& g = A.lattice();
    const auto& K = g.constants();
    const SpectralField a = to_spectral(A);
    const SpectralField d = to_spectral(D);
    SpectralField psi(A.grid, A.components);
    const double pref = std::sqrt(K.eps0 / (2.0 * K.hbar));
    const cplx I(0.0, 1.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.is_zero_mode(k)) continue;
        const double sw = std::sqrt(g.omega(k));
        for (int j = 0; j < A.components; ++j)
            psi.at(j, k) = pref * (sw * a.at(j, k) - I * d.at(j, k) / (K.eps0 * sw));
    }
    return to_real_space(psi, FieldKind::psi, A.time);
}

ScalarField number_density(const FieldSnapshot& psi) {
    if (psi.kind != FieldKind::psi) throw DomainError("number_density expects a psi snapshot");
    ScalarField out{psi.grid, std::vector<double>(psi.grid->size(), 0.0)};
    for (int c = 0; c < psi.components; ++c)
        for (std::size_t x = 0; x < psi.grid->size(); ++x) out.values[x] += std::norm(psi.at(c, x));
    return out;
}

cplx scalar_product_x(const FieldSnapshot& psi1, const FieldSnapshot& psi2) {
    require_same_grid(psi1.lattice(), psi2.lattice(), "scalar_product_x");
    if (psi1.time != psi2.time) throw DomainError("scalar_product_x: fields are given at different times");
    cplx s(0.0);
    for (std::size_t i = 0; i < psi1.data.size(); ++i) s += std::conj(psi1.data[i]) * psi2.data[i];
    return s * psi1.lattice().cell_volume();
}

cplx scalar_product_k(const ModeAmplitudes& c1, const ModeAmplitudes& c2) {
    require_same_grid(c1.grid(), c2.grid(), "scalar_product_k");
    const auto& g = c1.grid();
    cplx s(0.0);
    for (int slot = 0; slot < c1.helicities(); ++slot)
        for (std::size_t k = 0; k < g.size(); ++k) s += g.weight(k) * std::conj(c1.at(slot, k)) * c2.at(slot, k);
    return s;
}

FieldSnapshot curl(const FieldSnapshot& A) {
    const auto& g = A.lattice();
    const SpectralField a = to_spectral(A);
    SpectralField b(A.grid, A.components);
    const cplx I(0.0, 1.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vec3& kv = g.k(k);
        if (g.dim() == 1) {
            b.at(0, k) = I * kv[0] * a.at(0, k);
            continue;
        }
        const CVec3 v = a.vec(k);
        b.set_vec(k, {I * (kv[1] * v[2] - kv[2] * v[1]), I * (kv[2] * v[0] - kv[0] * v[2]),
                      I * (kv[0] * v[1] - kv[1] * v[0])});
    }
    return to_real_space(b, FieldKind::B, A.time);
}

ScalarField energy_density(const FieldSnapshot& A, const FieldSnapshot& D) {
    require_same_grid(A.lattice(), D.lattice(), "energy_density");
    const auto& K = A.lattice().constants();
    const FieldSnapshot B = curl(A);
    ScalarField out{A.grid, std::vector<double>(A.grid->size(), 0.0)};
    for (int c = 0; c < A.components; ++c)
        for (std::size_t x = 0; x < A.grid->size(); ++x)
            out.values[x] +=
                std::norm(D.at(c, x)) / (2.0 * K.eps0) + 0.5 * K.eps0 * K.c * K.c * std::norm(B.at(c, x));
    return out;
}

double em_energy(const FieldSnapshot& A, const FieldSnapshot& D) { return energy_density(A, D).integral(); }

double ad_commutator_expectation(const ModeAmplitudes& c1, const ModeAmplitudes& c2) {
    require_same_grid(c1.grid(), c2.grid(), "ad_commutator_expectation");
    const auto& g = c1.grid();
    const auto& K = g.constants();
    const auto basis = basis_for(g);
    const cplx I(0.0, 1.0);

    // A_c = sum_{k,lambda} (alpha b + beta b^dagger), b normalized lattice ladder operators;
    // [X, . Y] = sum (alpha_X . beta_Y - beta_X . alpha_Y) since [b, b^dagger] = 1.
    cplx commutator(0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.is_zero_mode(k)) continue;
        const double amp = std::sqrt(g.weight(k)) * std::sqrt(K.hbar / (2.0 * K.eps0 * g.omega(k)));
        const cplx d_factor = I * K.eps0 * g.omega(k);
        for (int slot = 0; slot < c1.helicities(); ++slot) {
            const CVec3 e = polarization(g, basis, k, slot);
            CVec3 alpha_a, beta_a, alpha_d, beta_d;
            for (int j = 0; j < 3; ++j) {
                alpha_a[j] = amp * c1.at(slot, k) * e[j];
                beta_a[j] = std::conj(alpha_a[j]);
                alpha_d[j] = amp * d_factor * c2.at(slot, k) * e[j];
                beta_d[j] = std::conj(alpha_d[j]);
            }
            commutator += dotu(alpha_a, beta_d) - dotu(beta_a, alpha_d);
        }
    }
    return std::real(I / K.hbar * commutator);
}

ModeAmplitudes random_amplitudes(GridPtr grid, std::mt19937_64& rng, double k_max) {
    ModeAmplitudes c(grid);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int slot = 0; slot < c.helicities(); ++slot)
        for (std::size_t k = 0; k < grid->size(); ++k) {
            const double re = normal(rng), im = normal(rng);
            if (!grid->is_transverse_active(k) || (k_max > 0.0 && grid->k_norm(k) > k_max)) continue;
            c.at(slot, k) = cplx(re, im);
        }
    return c;
}

// ---------------------------------------------------------------------------
// Sources

TemporalProfile TemporalProfile::constant(double v) {
    return {[v](double) { return v; }, "constant(" + std::to_string(v) + ")"};
}

TemporalProfile TemporalProfile::cosine(double omega, double phase) {
    return {[omega, phase](double t) { return std::cos(omega * t + phase); },
            "cos(" + std::to_string(omega) + " t + " + std::to_string(phase) + ")"};
}

TemporalProfile TemporalProfile::sine_pulse(double duration) {
    if (!(duration > 0.0)) throw ConfigError("sine pulse duration must be positive");
    return {[duration](double t) {
                return (t < 0.0 || t > duration) ? 0.0 : std::sin(std::numbers::pi * t / duration);
            },
            "sin(pi t / " + std::to_string(duration) + ")"};
}

TemporalProfile TemporalProfile::gaussian_pulse(double t0, double width, double omega) {
    if (!(width > 0.0)) throw ConfigError("gaussian pulse width must be positive");
    return {[=](double t) {
                const double u = (t - t0) / width;
                return std::cos(omega * t) * std::exp(-0.5 * u * u);
            },
            "gaussian(t0=" + std::to_string(t0) + ", width=" + std::to_string(width) +
                ", omega=" + std::to_string(omega) + ")"};
}

CurrentSource::CurrentSource(GridPtr grid, std::string description)
    : grid_(std::move(grid)), description_(std::move(description)) {}

CurrentSource CurrentSource::separable(GridPtr grid, const std::function<double(const Vec3&)>& spatial,
                                       const Vec3& polarization, TemporalProfile envelope) {
    FieldSnapshot profile(FieldKind::j_perp, 0.0, grid);
    for (std::size_t x = 0; x < grid->size(); ++x) {
        const double s = spatial(grid->position(x));
        if (grid->dim() == 1) {
            profile.at(0, x) = s;
        } else {
            for (int j = 0; j < 3; ++j) profile.at(j, x) = s * polarization[j];
        }
    }
    auto src = from_profile(profile, std::move(envelope), true);
    src.description_ = "separable: " + src.terms_.front().envelope.description;
    return src;
}

CurrentSource CurrentSource::from_profile(const FieldSnapshot& profile, TemporalProfile envelope, bool project) {
    require_finite(profile.data, "current profile");
    CurrentSource src(profile.grid, "profile: " + envelope.description);
    SpectralField p = to_spectral(profile);
    if (project && profile.grid->dim() == 3) p = transverse_project(p);
    for (int c = 0; c < p.components; ++c) p.at(c, profile.grid->zero_mode_index()) = 0.0;
    src.add_term(std::move(p), std::move(envelope));
    return src;
}

CurrentSource CurrentSource::from_polarization(const FieldSnapshot& P0, TemporalProfile p_rate,
                                               const FieldSnapshot& M0, TemporalProfile m_envelope) {
    if (P0.lattice().dim() != 3) throw DomainError("polarization/magnetization sources need a 3D grid");
    require_same_grid(P0.lattice(), M0.lattice(), "from_polarization");
    CurrentSource src(P0.grid, "dP/dt + curl M");
    src.add_term(transverse_project(to_spectral(P0)), std::move(p_rate));
    src.add_term(to_spectral(curl(M0)), std::move(m_envelope));
    return src;
}

void CurrentSource::add_term(SpectralField profile, TemporalProfile envelope) {
    require_same_grid(*grid_, *profile.grid, "CurrentSource::add_term");
    terms_.push_back({std::move(profile), std::move(envelope)});
}

CurrentSource& CurrentSource::operator+=(const CurrentSource& other) {
    for (const auto& t : other.terms_) add_term(t.profile, t.envelope);
    description_ += " + " + other.description_;
    return *this;
}

SpectralField CurrentSource::evaluate_spectral(double t) const {
    SpectralField out(grid_, field_components(*grid_));
    for (const auto& term : terms_) {
        const double g = term.envelope(t);
        if (g == 0.0) continue;
        for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += g * term.profile.data[i];
    }
    return out;
}

FieldSnapshot CurrentSource::evaluate(double t) const {
    return to_real_space(evaluate_spectral(t), FieldKind::j_perp, t);
}

double CurrentSource::longitudinal_residual() const {
    double worst = 0.0;
    for (const auto& term : terms_) worst = std::max(worst, divergence_ratio(term.profile));
    return worst;
}

}  // namespace qosc
