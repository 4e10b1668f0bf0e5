#include "qosc/modes.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qosc/error.hpp"

namespace qosc {

namespace {

// DFT ordering: 0, 1, ..., ceil(n/2)-1, -floor(n/2), ..., -1.
int dft_integer(int j, int n) { return j < (n + 1) / 2 ? j : j - n; }
int wrap(int m, int n) { return ((m % n) + n) % n; }

}  // namespace

void PhysicalConstants::validate() const {
    auto check = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("physical constant '") + name + "' must be positive and finite");
    };
    check(c, "c");
    check(eps0, "eps0");
    check(hbar, "hbar");
}

double KGrid::dk() const { return 2.0 * std::numbers::pi / box_length_; }
double KGrid::dx() const { return box_length_ / n_; }
double KGrid::cell_volume() const { return std::pow(dx(), dim_); }
double KGrid::volume() const { return std::pow(box_length_, dim_); }

std::array<int, 3> KGrid::integer_index(std::size_t i) const {
    std::array<int, 3> m{0, 0, 0};
    std::size_t rest = i;
    for (int axis = dim_ - 1; axis >= 0; --axis) {
        m[axis] = dft_integer(static_cast<int>(rest % n_), n_);
        rest /= n_;
    }
    return m;
}

Vec3 KGrid::position(std::size_t i) const {
    Vec3 x{0.0, 0.0, 0.0};
    std::size_t rest = i;
    for (int axis = dim_ - 1; axis >= 0; --axis) {
        x[axis] = static_cast<double>(rest % n_) * dx();
        rest /= n_;
    }
    return x;
}

bool KGrid::same_lattice(const KGrid& other) const {
    return this == &other || (dim_ == other.dim_ && n_ == other.n_ && box_length_ == other.box_length_ &&
                              constants_ == other.constants_);
}

KGrid build_kgrid(int dim, int n_points, double box_length, const PhysicalConstants& constants) {
    if (dim != 1 && dim != 3) throw ConfigError("grid dimension must be 1 or 3, got " + std::to_string(dim));
    if (n_points < 2) throw ConfigError("grid needs n_points >= 2, got " + std::to_string(n_points));
    if (!(box_length > 0.0) || !std::isfinite(box_length)) throw ConfigError("box_length must be positive");
    constants.validate();

    KGrid g;
    g.dim_ = dim;
    g.n_ = n_points;
    g.box_length_ = box_length;
    g.constants_ = constants;

    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n_points);

    g.k_.resize(total);
    g.k_norm_.resize(total);
    g.omega_.resize(total);
    g.weight_.resize(total);
    g.negated_.resize(total);
    g.active_.resize(total);

    const double dk = g.dk();
    const double volume = g.volume();
    for (std::size_t i = 0; i < total; ++i) {
        const auto m = g.integer_index(i);
        Vec3 k{0.0, 0.0, 0.0};
        std::size_t neg = 0;
        for (int a = 0; a < dim; ++a) {
            k[a] = dk * m[a];
            neg = neg * n_points + static_cast<std::size_t>(wrap(-m[a], n_points));
        }
        g.k_[i] = k;
        g.negated_[i] = neg;
        const double kn = std::sqrt(dot(k, k));
        g.k_norm_[i] = kn;
        g.omega_[i] = constants.c * kn;
        g.weight_[i] = i == 0 ? 0.0 : 1.0 / (volume * g.omega_[i]);
    }
    for (std::size_t i = 1; i < total; ++i) {
        const Vec3& k = g.k_[i];
        const Vec3& nk = g.k_[g.negated_[i]];
        g.active_[i] = dim == 1 || (nk[0] == -k[0] && nk[1] == -k[1] && nk[2] == -k[2]);
    }
    if (dim == 3) g.basis_ = std::make_shared<const PolarizationBasis>(g);
    return g;
}

const PolarizationBasis& KGrid::polarization_basis() const {
    if (!basis_) throw DomainError("polarization basis requires a 3D grid");
    return *basis_;
}

GridPtr make_grid(int dim, int n_points, double box_length, const PhysicalConstants& constants) {
    return std::make_shared<const KGrid>(build_kgrid(dim, n_points, box_length, constants));
}

SphericalTriad spherical_unit_vectors(const Vec3& k) {
    const double rho2 = k[0] * k[0] + k[1] * k[1];
    const double norm = std::sqrt(rho2 + k[2] * k[2]);
    if (!(norm > 0.0)) throw DomainError("spherical unit vectors are undefined at k = 0");

    const double theta = std::atan2(std::sqrt(rho2), k[2]);
    // On the polar axis the azimuth is pinned to 0.
    const double phi = rho2 > 0.0 ? std::atan2(k[1], k[0]) : 0.0;
    const double ct = std::cos(theta), st = std::sin(theta);
    const double cp = std::cos(phi), sp = std::sin(phi);

    SphericalTriad t;
    t.e_k = {k[0] / norm, k[1] / norm, k[2] / norm};
    t.e_theta = {ct * cp, ct * sp, -st};
    t.e_phi = {-sp, cp, 0.0};
    return t;
}

namespace {

CVec3 helicity_from_triad(const SphericalTriad& t, int lambda) {
    const double s = 1.0 / std::numbers::sqrt2;
    CVec3 e;
    for (int j = 0; j < 3; ++j) e[j] = cplx(t.e_theta[j] * s, lambda * t.e_phi[j] * s);
    return e;
}

}  // namespace

CVec3 helicity_vector(const Vec3& k, int lambda) {
    if (lambda != 1 && lambda != -1)
        throw DomainError("helicity must be +1 or -1, got " + std::to_string(lambda));
    return helicity_from_triad(spherical_unit_vectors(k), lambda);
}

PolarizationBasis::PolarizationBasis(const KGrid& grid)
    : triads_(grid.size()), plus_(grid.size()), minus_(grid.size()) {
    if (grid.dim() != 3) throw DomainError("polarization basis requires a 3D grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.is_zero_mode(i)) continue;
        triads_[i] = spherical_unit_vectors(grid.k(i));
        plus_[i] = helicity_from_triad(triads_[i], +1);
        minus_[i] = helicity_from_triad(triads_[i], -1);
    }
}

}  // namespace qosc
