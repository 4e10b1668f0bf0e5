#include "qosc/fock.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qosc/error.hpp"

namespace qosc {

namespace {

constexpr std::size_t kMaxAmplitudes = 1u << 22;

std::size_t tensor_size(std::size_t modes, int n_max) {
    std::size_t total = 1;
    for (std::size_t m = 0; m < modes; ++m) {
        total *= static_cast<std::size_t>(n_max + 1);
        if (total > kMaxAmplitudes)
            throw DomainError("Fock space too large: (n_max+1)^M exceeds " + std::to_string(kMaxAmplitudes));
    }
    return total;
}

std::vector<ModeId> sorted_modes(std::vector<ModeId> modes) {
    if (modes.empty()) throw DomainError("a Fock state needs at least one mode");
    for (const auto& m : modes)
        if (m.lambda != 1 && m.lambda != -1) throw DomainError("mode helicity must be +1 or -1");
    std::sort(modes.begin(), modes.end());
    if (std::adjacent_find(modes.begin(), modes.end()) != modes.end())
        throw DomainError("duplicate mode in Fock state");
    return modes;
}

}  // namespace

void check_mode_on_grid(const ModeId& mode, const KGrid& grid) {
    if (mode.lambda != 1 && mode.lambda != -1) throw DomainError("mode helicity must be +1 or -1");
    if (mode.k_index >= grid.size()) throw DomainError("mode k_index outside the grid");
    if (grid.is_zero_mode(mode.k_index)) throw DomainError("the k = 0 site is not a field mode");
}

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
    if (a.cols != b.rows) throw DomainError("matmul shape mismatch");
    RealMatrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t l = 0; l < a.cols; ++l) {
            const double v = a(i, l);
            if (v == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += v * b(l, j);
        }
    return out;
}

RealMatrix transpose(const RealMatrix& a) {
    RealMatrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

LadderMatrix::LadderMatrix(int n_max) : n_max_(n_max) {
    if (n_max < 1) throw DomainError("ladder matrix needs n_max >= 1");
    const auto dim = static_cast<std::size_t>(n_max + 1);
    a_ = RealMatrix(dim, dim);
    for (std::size_t n = 1; n < dim; ++n) a_(n - 1, n) = std::sqrt(static_cast<double>(n));
}

RealMatrix commutator_defect(int n_max) {
    if (n_max < 1) throw DomainError("commutator_defect needs n_max >= 1");
    // Ladder entries are square roots of integers. Products are formed as sqrt(p q) of the
    // squared entries, so every term sqrt(n) sqrt(n) is exactly n.
    const std::size_t d = static_cast<std::size_t>(n_max) + 1;
    RealMatrix a2(d, d);
    for (std::size_t n = 1; n < d; ++n) a2(n - 1, n) = static_cast<double>(n);
    const RealMatrix ad2 = transpose(a2);
    auto root_product = [&](const RealMatrix& x, const RealMatrix& y) {
        RealMatrix out(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t m = 0; m < d; ++m) {
                if (x(i, m) == 0.0) continue;
                for (std::size_t j = 0; j < d; ++j)
                    if (y(m, j) != 0.0) out(i, j) += std::sqrt(x(i, m) * y(m, j));
            }
        return out;
    };
    RealMatrix out = root_product(a2, ad2);
    const RealMatrix rhs = root_product(ad2, a2);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= rhs.data[i];
    return out;
}

FockState::FockState(std::vector<ModeId> modes, int n_max) : modes_(sorted_modes(std::move(modes))), n_max_(n_max) {
    if (n_max < 0) throw DomainError("n_max must be non-negative");
    amps_.assign(tensor_size(modes_.size(), n_max_), cplx(0.0));
    amps_[0] = 1.0;
}

FockState::FockState(std::vector<ModeId> modes, int n_max, std::vector<cplx> amplitudes)
    : modes_(std::move(modes)), n_max_(n_max), amps_(std::move(amplitudes)) {
    if (n_max < 0) throw DomainError("n_max must be non-negative");
    if (!std::is_sorted(modes_.begin(), modes_.end()) || sorted_modes(modes_) != modes_)
        throw DomainError("Fock state modes must be distinct and in lexicographic order");
    if (amps_.size() != tensor_size(modes_.size(), n_max_))
        throw DomainError("amplitude vector does not match (n_max+1)^M");
}

std::size_t FockState::mode_position(const ModeId& mode) const {
    auto it = std::lower_bound(modes_.begin(), modes_.end(), mode);
    if (it == modes_.end() || *it != mode)
        throw DomainError("mode (lambda=" + std::to_string(mode.lambda) + ", k=" + std::to_string(mode.k_index) +
                          ") is not part of this state");
    return static_cast<std::size_t>(it - modes_.begin());
}

std::size_t FockState::stride(std::size_t position) const {
    std::size_t s = 1;
    for (std::size_t p = position + 1; p < modes_.size(); ++p) s *= static_cast<std::size_t>(n_max_ + 1);
    return s;
}

std::size_t FockState::flat_index(const std::vector<int>& occupations) const {
    if (occupations.size() != modes_.size()) throw DomainError("occupation tuple has wrong length");
    std::size_t idx = 0;
    for (int n : occupations) {
        if (n < 0 || n > n_max_) throw TruncationError("occupation " + std::to_string(n) + " outside 0..n_max");
        idx = idx * static_cast<std::size_t>(n_max_ + 1) + static_cast<std::size_t>(n);
    }
    return idx;
}

std::vector<int> FockState::occupations(std::size_t flat) const {
    std::vector<int> occ(modes_.size());
    for (std::size_t p = modes_.size(); p-- > 0;) {
        occ[p] = static_cast<int>(flat % static_cast<std::size_t>(n_max_ + 1));
        flat /= static_cast<std::size_t>(n_max_ + 1);
    }
    return occ;
}

double FockState::norm_squared() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
}

FockState FockState::normalized() const {
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) throw DomainError("cannot normalize the zero vector");
    auto amps = amps_;
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : amps) a *= inv;
    return FockState(modes_, n_max_, std::move(amps));
}

bool FockState::same_basis(const FockState& other) const {
    return n_max_ == other.n_max_ && modes_ == other.modes_;
}

FockState ladder_lower(const FockState& state, const ModeId& mode) {
    const std::size_t pos = state.mode_position(mode);
    const std::size_t stride = state.stride(pos);
    const auto levels = static_cast<std::size_t>(state.n_max() + 1);
    const auto& in = state.amplitudes();
    std::vector<cplx> out(in.size(), cplx(0.0));
    for (std::size_t idx = 0; idx < in.size(); ++idx) {
        const std::size_t n = (idx / stride) % levels;
        if (n == 0) continue;
        out[idx - stride] = std::sqrt(static_cast<double>(n)) * in[idx];
    }
    return FockState(state.modes(), state.n_max(), std::move(out));
}

RaiseResult ladder_raise(const FockState& state, const ModeId& mode) {
    const std::size_t pos = state.mode_position(mode);
    const std::size_t stride = state.stride(pos);
    const auto levels = static_cast<std::size_t>(state.n_max() + 1);
    const auto& in = state.amplitudes();
    std::vector<cplx> out(in.size(), cplx(0.0));
    double loss = 0.0;
    for (std::size_t idx = 0; idx < in.size(); ++idx) {
        const std::size_t n = (idx / stride) % levels;
        if (n + 1 == levels) {
            loss += std::norm(in[idx]);
            continue;
        }
        out[idx + stride] = std::sqrt(static_cast<double>(n + 1)) * in[idx];
    }
    return {FockState(state.modes(), state.n_max(), std::move(out)), loss};
}

FockState number_state(const std::vector<ModeId>& modes, const std::vector<int>& occupations, int n_max) {
    if (modes.size() != occupations.size()) throw DomainError("one occupation per mode is required");
    FockState vacuum(modes, n_max);
    std::vector<int> ordered(vacuum.mode_count());
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (occupations[i] < 0) throw DomainError("occupation numbers must be non-negative");
        if (occupations[i] > n_max)
            throw TruncationError("occupation " + std::to_string(occupations[i]) + " exceeds n_max " +
                                  std::to_string(n_max));
        ordered[vacuum.mode_position(modes[i])] = occupations[i];
    }
    std::vector<cplx> amps(vacuum.amplitudes().size(), cplx(0.0));
    amps[vacuum.flat_index(ordered)] = 1.0;
    return FockState(vacuum.modes(), n_max, std::move(amps));
}

FockState coherent_state(const ModeId& mode, cplx alpha, int n_max) {
    std::vector<cplx> amps(static_cast<std::size_t>(n_max + 1));
    amps[0] = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n <= n_max; ++n) amps[n] = amps[n - 1] * alpha / std::sqrt(static_cast<double>(n));
    return FockState({mode}, n_max, std::move(amps));
}

double coherent_norm_deficit(cplx alpha, int n_max) {
    const double mean = std::norm(alpha);
    double p = std::exp(-mean), total = p;
    for (int n = 1; n <= n_max; ++n) {
        p *= mean / n;
        total += p;
    }
    return 1.0 - total;
}

bool coherent_truncation_reliable(cplx alpha, int n_max) { return std::norm(alpha) <= n_max / 4.0; }

FockState product_state(const FockState& a, const FockState& b) {
    if (a.n_max() != b.n_max()) throw DomainError("product_state needs equal truncation levels");
    std::vector<ModeId> modes = a.modes();
    modes.insert(modes.end(), b.modes().begin(), b.modes().end());
    FockState out(modes, a.n_max());  // validates disjointness and sorts

    std::vector<cplx> amps(out.amplitudes().size(), cplx(0.0));
    std::vector<std::size_t> pos_a, pos_b;
    for (const auto& m : a.modes()) pos_a.push_back(out.mode_position(m));
    for (const auto& m : b.modes()) pos_b.push_back(out.mode_position(m));
    for (std::size_t idx = 0; idx < amps.size(); ++idx) {
        const auto occ = out.occupations(idx);
        std::vector<int> oa, ob;
        for (auto p : pos_a) oa.push_back(occ[p]);
        for (auto p : pos_b) ob.push_back(occ[p]);
        amps[idx] = a.amplitude(oa) * b.amplitude(ob);
    }
    return FockState(out.modes(), out.n_max(), std::move(amps));
}

cplx inner_product(const FockState& s1, const FockState& s2) {
    if (!s1.same_basis(s2)) throw DomainError("inner product of states on different mode sets or truncations");
    cplx sum(0.0);
    const auto& a = s1.amplitudes();
    const auto& b = s2.amplitudes();
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
    return sum;
}

double mean_photon_number(const FockState& state, const ModeId& mode) {
    return ladder_lower(state, mode).norm_squared();
}

std::vector<double> occupation_distribution(const FockState& state, const ModeId& mode) {
    const std::size_t pos = state.mode_position(mode);
    const std::size_t stride = state.stride(pos);
    const auto levels = static_cast<std::size_t>(state.n_max() + 1);
    std::vector<double> p(levels, 0.0);
    const auto& amps = state.amplitudes();
    for (std::size_t idx = 0; idx < amps.size(); ++idx) p[(idx / stride) % levels] += std::norm(amps[idx]);
    return p;
}

double coincidence_probability(const FockState& state, const ModeId& mode1, const ModeId& mode2) {
    if (mode1 == mode2) throw DomainError("coincidence needs two distinct modes");
    return ladder_lower(ladder_lower(state, mode1), mode2).norm_squared();
}

}  // namespace qosc
