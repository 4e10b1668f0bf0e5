#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace qosc {

class PolarizationBasis;

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using CVec3 = std::array<cplx, 3>;

/// Physical constants in simulation units. Natural units (c = eps0 = hbar = 1)
/// by default; mu0 is derived.
struct PhysicalConstants {
    double c = 1.0;
    double eps0 = 1.0;
    double hbar = 1.0;

    double mu0() const { return 1.0 / (eps0 * c * c); }
    void validate() const;

    bool operator==(const PhysicalConstants&) const = default;
};

/// A point (t, x) of space-time; unused position components are zero in 1D.
struct SpacetimePoint {
    double t = 0.0;
    Vec3 x{0.0, 0.0, 0.0};

    SpacetimePoint operator-(const SpacetimePoint& o) const {
        return {t - o.t, {x[0] - o.x[0], x[1] - o.x[1], x[2] - o.x[2]}};
    }
};

/**
 * Periodic wavevector lattice on a cubic box of side L with n points per axis.
 *
 * Sites are stored row-major (last axis fastest), matching the spatial grid
 * and the FFT layout. Per axis the integer index m follows the usual DFT
 * ordering 0, 1, ..., -1, and k = 2*pi*m/L. The k = 0 site is flagged and
 * carries omega = 0 and weight 0; every other site has the covariant
 * quadrature weight w_k = (dk)^dim / ((2 pi)^dim omega_k) = 1 / (V omega_k).
 */
class KGrid {
public:
    int dim() const { return dim_; }
    int n_points() const { return n_; }
    double box_length() const { return box_length_; }
    const PhysicalConstants& constants() const { return constants_; }

    /// Number of lattice sites, n^dim.
    std::size_t size() const { return omega_.size(); }
    std::size_t zero_mode_index() const { return 0; }
    bool is_zero_mode(std::size_t i) const { return i == 0; }

    double dk() const;
    double dx() const;
    double cell_volume() const;
    double volume() const;

    const Vec3& k(std::size_t i) const { return k_[i]; }
    double k_norm(std::size_t i) const { return k_norm_[i]; }
    double omega(std::size_t i) const { return omega_[i]; }
    double weight(std::size_t i) const { return weight_[i]; }

    /// Integer lattice coordinates of site i (DFT-ordered, unused axes 0).
    std::array<int, 3> integer_index(std::size_t i) const;
    /// Index of the site holding -k (Nyquist sites map to themselves).
    std::size_t negated_index(std::size_t i) const { return negated_[i]; }
    /// True for non-zero sites that can carry a real transverse field. In 3D with even n, sites
    /// on a Nyquist plane are paired with a partner that is not -k, so real and transverse
    /// cannot both hold there; those sites are excluded.
    bool is_transverse_active(std::size_t i) const { return active_[i] != 0; }
    /// Position of spatial grid site i.
    Vec3 position(std::size_t i) const;

    bool same_lattice(const KGrid& other) const;

    /// Helicity vectors of every site, tabulated once per grid. 3D only.
    const PolarizationBasis& polarization_basis() const;

private:
    friend KGrid build_kgrid(int, int, double, const PhysicalConstants&);

    int dim_ = 1;
    int n_ = 0;
    double box_length_ = 0.0;
    PhysicalConstants constants_;
    std::vector<Vec3> k_;
    std::vector<double> k_norm_;
    std::vector<double> omega_;
    std::vector<double> weight_;
    std::vector<std::size_t> negated_;
    std::vector<char> active_;
    std::shared_ptr<const PolarizationBasis> basis_;
};

using GridPtr = std::shared_ptr<const KGrid>;

KGrid build_kgrid(int dim, int n_points, double box_length,
                  const PhysicalConstants& constants = {});
GridPtr make_grid(int dim, int n_points, double box_length,
                  const PhysicalConstants& constants = {});

/// Spherical polar triad at k.
struct SphericalTriad {
    Vec3 e_theta;
    Vec3 e_phi;
    Vec3 e_k;
};

/// ISO spherical unit vectors at k, with the fixed pole convention
/// e_theta(+z) = x, e_phi(+z) = y and the theta -> pi limit at -z.
/// Throws DomainError for k = 0.
SphericalTriad spherical_unit_vectors(const Vec3& k);

/// e_lambda(k) = (e_theta + i*lambda*e_phi)/sqrt(2), lambda = +1 or -1.
CVec3 helicity_vector(const Vec3& k, int lambda);

/// Helicity vectors tabulated on every non-zero site of a 3D grid.
class PolarizationBasis {
public:
    explicit PolarizationBasis(const KGrid& grid);

    const SphericalTriad& triad(std::size_t i) const { return triads_[i]; }
    /// lambda = +1 or -1.
    const CVec3& e(std::size_t i, int lambda) const { return lambda > 0 ? plus_[i] : minus_[i]; }

private:
    std::vector<SphericalTriad> triads_;
    std::vector<CVec3> plus_;
    std::vector<CVec3> minus_;
};

inline int helicity_from_slot(int slot) { return slot == 0 ? +1 : -1; }
inline int slot_from_helicity(int lambda) { return lambda > 0 ? 0 : 1; }

// Small vector helpers shared by the field code.
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
/// Bilinear (no conjugation) product.
inline cplx dotu(const CVec3& a, const CVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
/// Hermitian product, conjugate-linear in a.
inline cplx dotc(const CVec3& a, const CVec3& b) {
    return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1] + std::conj(a[2]) * b[2];
}

}  // namespace qosc
