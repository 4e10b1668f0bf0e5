#include "qosc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "qosc/error.hpp"

namespace qosc {

namespace {

double phase(const KGrid& g, std::size_t k, double dt, const Vec3& dx) {
    return g.omega(k) * dt - dot(g.k(k), dx);
}

unsigned thread_count() {
    if (const char* env = std::getenv("QOSC_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return 1;
}

double periodic_distance(const KGrid& g, const Vec3& a, const Vec3& b) {
    const double L = g.box_length();
    double d2 = 0.0;
    for (int axis = 0; axis < g.dim(); ++axis) {
        double d = std::fmod(std::abs(a[axis] - b[axis]), L);
        d = std::min(d, L - d);
        d2 += d * d;
    }
    return std::sqrt(d2);
}

}  // namespace

cplx propagator_photon(const KGrid& grid, double dt, const Vec3& dx) {
    cplx sum(0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid.is_zero_mode(k)) continue;
        sum += grid.weight(k) * std::polar(1.0, -phase(grid, k, dt, dx));
    }
    return sum;
}

cplx propagator_photon_unpolarized(const KGrid& grid, double dt, const Vec3& dx) {
    return static_cast<double>(helicity_count(grid)) * propagator_photon(grid, dt, dx);
}

cplx commutator_kernel_AD_complex(const KGrid& grid, double dt, const Vec3& dx) {
    cplx forward(0.0), backward(0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double p = phase(grid, k, dt, dx);
        forward += std::polar(1.0, -p);
        backward += std::polar(1.0, p);
    }
    return (forward + backward) / (2.0 * grid.volume());
}

double commutator_kernel_AD(const KGrid& grid, double dt, const Vec3& dx) {
    return commutator_kernel_AD_complex(grid, dt, dx).real();
}

double commutator_kernel_AD_unpolarized(const KGrid& grid, double dt, const Vec3& dx) {
    return helicity_count(grid) * commutator_kernel_AD(grid, dt, dx);
}

std::vector<KernelSample> sample_kernels(const KGrid& grid, const std::vector<SpacetimePoint>& separations) {
    std::vector<KernelSample> out(separations.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& s = separations[i];
            out[i] = {s.t, s.x, propagator_photon(grid, s.t, s.x), commutator_kernel_AD(grid, s.t, s.x)};
        }
    };
    const unsigned threads = std::min<std::size_t>(thread_count(), std::max<std::size_t>(separations.size(), 1));
    if (threads <= 1) {
        work(0, separations.size());
        return out;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (separations.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t b = t * chunk, e = std::min(separations.size(), b + chunk);
        if (b < e) pool.emplace_back(work, b, e);
    }
    pool.clear();
    return out;
}

double validity_horizon(const KGrid& grid, const Support& support) {
    return (grid.box_length() - 2.0 * support.radius) / (2.0 * grid.constants().c);
}

LeakageResult light_cone_leakage(const ScalarField& density, double t, const Support& support, int guard_cells) {
    const auto& g = *density.grid;
    if (t < 0.0) throw DomainError("light_cone_leakage: time must be non-negative");
    LeakageResult r;
    r.horizon = validity_horizon(g, support);
    r.beyond_horizon = t > r.horizon;
    const double reach = support.radius + g.constants().c * t + guard_cells * g.dx();
    double inside = 0.0, outside = 0.0;
    for (std::size_t x = 0; x < g.size(); ++x) {
        const double v = density.values[x];
        if (periodic_distance(g, g.position(x), support.center) <= reach)
            inside += v;
        else
            outside += v;
    }
    const double total = inside + outside;
    r.fraction = total > 0.0 ? outside / total : 0.0;
    return r;
}

LeakageResult light_cone_leakage(const FieldSnapshot& psi, double t, const Support& support, int guard_cells) {
    return light_cone_leakage(number_density(psi), t, support, guard_cells);
}

LeakageResult light_cone_leakage(const FieldSnapshot& A, const FieldSnapshot& D, double t, const Support& support,
                                 int guard_cells) {
    return light_cone_leakage(energy_density(A, D), t, support, guard_cells);
}

}  // namespace qosc
