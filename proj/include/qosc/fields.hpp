#pragma once

#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qosc/modes.hpp"

namespace qosc {

enum class FieldKind { A_perp, D, B, psi, j_perp };

std::string to_string(FieldKind kind);
FieldKind field_kind_from_string(const std::string& name);
inline bool is_real_kind(FieldKind kind) { return kind != FieldKind::psi; }

/// Number of vector components carried by fields on this grid (3 in 3D, 1 for the 1D scalar analog).
inline int field_components(const KGrid& grid) { return grid.dim() == 3 ? 3 : 1; }
/// Number of helicity slots (2 in 3D, 1 in 1D).
inline int helicity_count(const KGrid& grid) { return grid.dim() == 3 ? 2 : 1; }

/**
 * Helicity-resolved complex amplitudes on the k-lattice.
 *
 * Slot 0 is lambda = +1 and slot 1 is lambda = -1 (3D); the 1D analog has one
 * slot. The meaning of the numbers (covariant c_lambda(k), coherent alpha, raw
 * helicity projections) is fixed by the producing operation.
 */
class ModeAmplitudes {
public:
    explicit ModeAmplitudes(GridPtr grid);

    const KGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    int helicities() const { return helicities_; }

    cplx& at(int slot, std::size_t k) { return data_[static_cast<std::size_t>(slot) * grid_->size() + k]; }
    cplx at(int slot, std::size_t k) const { return data_[static_cast<std::size_t>(slot) * grid_->size() + k]; }
    std::span<cplx> slot(int s) { return {data_.data() + static_cast<std::size_t>(s) * grid_->size(), grid_->size()}; }
    std::span<const cplx> slot(int s) const {
        return {data_.data() + static_cast<std::size_t>(s) * grid_->size(), grid_->size()};
    }
    std::vector<cplx>& raw() { return data_; }
    const std::vector<cplx>& raw() const { return data_; }

    /// Force the k = 0 entries to zero.
    void clear_zero_mode();
    bool all_finite() const;

    ModeAmplitudes& operator+=(const ModeAmplitudes& o);
    ModeAmplitudes& operator*=(cplx s);

private:
    GridPtr grid_;
    int helicities_;
    std::vector<cplx> data_;
};

/// Per-component complex array on the k-lattice (FFT convention of qosc::spectral).
struct SpectralField {
    GridPtr grid;
    int components = 1;
    std::vector<cplx> data;  // component-major

    explicit SpectralField(GridPtr g, int comps);
    cplx& at(int c, std::size_t k) { return data[static_cast<std::size_t>(c) * grid->size() + k]; }
    cplx at(int c, std::size_t k) const { return data[static_cast<std::size_t>(c) * grid->size() + k]; }
    CVec3 vec(std::size_t k) const;
    void set_vec(std::size_t k, const CVec3& v);
};

/// Field materialized on the spatial grid at one instant. Data is component-major;
/// real kinds keep their (tiny) imaginary round-off so it can be inspected.
struct FieldSnapshot {
    FieldKind kind = FieldKind::A_perp;
    double time = 0.0;
    GridPtr grid;
    int components = 1;
    std::vector<cplx> data;

    FieldSnapshot(FieldKind k, double t, GridPtr g);
    const KGrid& lattice() const { return *grid; }
    cplx& at(int c, std::size_t x) { return data[static_cast<std::size_t>(c) * grid->size() + x]; }
    cplx at(int c, std::size_t x) const { return data[static_cast<std::size_t>(c) * grid->size() + x]; }
    /// max |Im| / max |value| (0 for the zero field).
    double imag_residue() const;
    /// Copy with imaginary parts set to exactly zero.
    FieldSnapshot real_part() const;
};

/// Real scalar field on the spatial grid (densities).
struct ScalarField {
    GridPtr grid;
    std::vector<double> values;

    double integral() const;
};

SpectralField to_spectral(const FieldSnapshot& field);
FieldSnapshot to_real_space(const SpectralField& field, FieldKind kind, double time);

/// Multiply every mode by omega_k^s. The k = 0 entry is dropped for s != 0.
ModeAmplitudes apply_omega_power(const ModeAmplitudes& field, double s);
FieldSnapshot apply_omega_power(const FieldSnapshot& field, double s);
SpectralField apply_omega_power(const SpectralField& field, double s);

/// delta_ij - k_i k_j / |k|^2 per mode; k = 0 and inactive Nyquist sites map to 0. 3D only.
SpectralField transverse_project(const SpectralField& field);
/// max_k |k . F(k)| / |k||F(k)| over modes with non-negligible amplitude (0 in 1D).
double divergence_ratio(const SpectralField& field);

/// c_lambda(k) = e_lambda(k)^* . F(k) on transverse-active sites; identity copy in 1D.
ModeAmplitudes to_helicity(const SpectralField& field);
/// F(k) = sum_lambda c_lambda(k) e_lambda(k).
SpectralField from_helicity(const ModeAmplitudes& amps);

/// Real A_perp and D of a photon mode with covariant amplitudes c at time t:
/// A = sum_lambda (A+_lambda + A-_lambda)/sqrt(2), A+_lambda = sqrt(hbar/eps0) sum_k w_k c e_lambda e^{-ikx},
/// D = -eps0 dA/dt.
struct FieldPair {
    FieldSnapshot A;
    FieldSnapshot D;
};
FieldPair fields_from_amplitudes(const ModeAmplitudes& c, double t);

/// psi(t,x) = sum_lambda sum_k c_lambda(k) e_lambda(k) e^{-i(omega t - k.x)} / (V sqrt(omega_k)),
/// the one-photon wavefunction whose x-space norm equals the covariant k-space norm of c.
FieldSnapshot psi_from_amplitudes(const ModeAmplitudes& c, double t);
/// Inverse of psi_from_amplitudes at the snapshot's time.
ModeAmplitudes amplitudes_from_psi(const FieldSnapshot& psi);

/// psi = sqrt(eps0/2hbar) Omega^{1/2} [A - i (eps0 Omega)^{-1} D], evaluated spectrally.
FieldSnapshot build_psi(const FieldSnapshot& A, const FieldSnapshot& D);

/// psi^* . psi pointwise.
ScalarField number_density(const FieldSnapshot& psi);

/// Integral dx psi1^* . psi2 by the cell-volume rule.
cplx scalar_product_x(const FieldSnapshot& psi1, const FieldSnapshot& psi2);
/// sum_lambda sum_k w_k c1^* c2.
cplx scalar_product_k(const ModeAmplitudes& c1, const ModeAmplitudes& c2);

/// B = curl A (3D) or dA/dx (1D analog), spectrally.
FieldSnapshot curl(const FieldSnapshot& A);

/// |D|^2/(2 eps0) + eps0 c^2 |B|^2 / 2 pointwise.
ScalarField energy_density(const FieldSnapshot& A, const FieldSnapshot& D);
/// Integral of energy_density.
double em_energy(const FieldSnapshot& A, const FieldSnapshot& D);

/// (i/hbar) <0|[A_c1, . D_c2]|0>, evaluated from ladder-operator coefficients of the
/// A and D mode expansions. Equals Re <c1|c2>.
double ad_commutator_expectation(const ModeAmplitudes& c1, const ModeAmplitudes& c2);

/// Complex Gaussian amplitudes on transverse-active modes with |k| <= k_max (no cap when k_max <= 0).
ModeAmplitudes random_amplitudes(GridPtr grid, std::mt19937_64& rng, double k_max = 0.0);

// ---------------------------------------------------------------------------
// Prescribed transverse currents.

struct TemporalProfile {
    std::function<double(double)> value;
    std::string description;

    double operator()(double t) const { return value(t); }

    static TemporalProfile constant(double v = 1.0);
    static TemporalProfile cosine(double omega, double phase = 0.0);
    /// sin(pi t / T) on [0, T], zero elsewhere.
    static TemporalProfile sine_pulse(double duration);
    /// cos(omega t) exp(-(t - t0)^2 / (2 width^2)).
    static TemporalProfile gaussian_pulse(double t0, double width, double omega);
};

/**
 * Sum of separable terms j(t, k) = profile(k) * g(t).
 *
 * Profiles are stored in k-space and, unless built raw, already transverse.
 */
class CurrentSource {
public:
    struct Term {
        SpectralField profile;
        TemporalProfile envelope;
    };

    explicit CurrentSource(GridPtr grid, std::string description = "none");

    /// spatial(x) * polarization * g(t), transverse-projected.
    static CurrentSource separable(GridPtr grid, const std::function<double(const Vec3&)>& spatial,
                                   const Vec3& polarization, TemporalProfile envelope);
    /// A real vector profile times g(t). With project = false the profile is kept as given.
    static CurrentSource from_profile(const FieldSnapshot& profile, TemporalProfile envelope, bool project = true);
    /// j = dP_perp/dt + curl M with P = P0(x) p(t), M = M0(x) m(t); p_rate is dp/dt. 3D only.
    static CurrentSource from_polarization(const FieldSnapshot& P0, TemporalProfile p_rate, const FieldSnapshot& M0,
                                           TemporalProfile m_envelope);

    const KGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const std::vector<Term>& terms() const { return terms_; }
    const std::string& description() const { return description_; }
    bool empty() const { return terms_.empty(); }

    void add_term(SpectralField profile, TemporalProfile envelope);
    CurrentSource& operator+=(const CurrentSource& other);

    SpectralField evaluate_spectral(double t) const;
    FieldSnapshot evaluate(double t) const;
    /// Largest divergence_ratio over the term profiles.
    double longitudinal_residual() const;

private:
    GridPtr grid_;
    std::string description_;
    std::vector<Term> terms_;
};

}  // namespace qosc
