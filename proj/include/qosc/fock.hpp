#pragma once

#include <compare>
#include <complex>
#include <cstddef>
#include <vector>

#include "qosc/modes.hpp"

namespace qosc {

/// Label of one field mode: helicity and wavevector site. 1D scalar modes use lambda = +1.
struct ModeId {
    int lambda = 1;
    std::size_t k_index = 1;

    auto operator<=>(const ModeId&) const = default;
};

/// Throws DomainError unless lambda is +-1 and k_index is a non-zero site of the grid.
void check_mode_on_grid(const ModeId& mode, const KGrid& grid);

/// Dense real matrix, row-major.
struct RealMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    RealMatrix() = default;
    RealMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);
RealMatrix transpose(const RealMatrix& a);

/// Single-mode annihilation matrix on levels 0..n_max: a(n-1, n) = sqrt(n).
class LadderMatrix {
public:
    explicit LadderMatrix(int n_max);

    int n_max() const { return n_max_; }
    const RealMatrix& annihilation() const { return a_; }
    RealMatrix creation() const { return transpose(a_); }

private:
    int n_max_;
    RealMatrix a_;
};

/// a a^dagger - a^dagger a on the truncated space: identity except -n_max in the last slot.
RealMatrix commutator_defect(int n_max);

/**
 * State vector over a small set of modes, each truncated at n_max quanta.
 *
 * Modes are kept in lexicographic (lambda, k_index) order. Amplitudes are a
 * dense (n_max+1)^M tensor, row-major with the first mode most significant.
 */
class FockState {
public:
    /// Vacuum over the given modes.
    FockState(std::vector<ModeId> modes, int n_max);
    FockState(std::vector<ModeId> modes, int n_max, std::vector<cplx> amplitudes);

    const std::vector<ModeId>& modes() const { return modes_; }
    int n_max() const { return n_max_; }
    std::size_t mode_count() const { return modes_.size(); }
    const std::vector<cplx>& amplitudes() const { return amps_; }

    /// Position of a mode in modes(); throws DomainError if absent.
    std::size_t mode_position(const ModeId& mode) const;
    std::size_t flat_index(const std::vector<int>& occupations) const;
    std::vector<int> occupations(std::size_t flat) const;
    cplx amplitude(const std::vector<int>& occupations) const { return amps_[flat_index(occupations)]; }

    double norm_squared() const;
    FockState normalized() const;
    bool same_basis(const FockState& other) const;

    /// Flat-index distance between successive occupations of the mode at position.
    std::size_t stride(std::size_t position) const;

private:
    std::vector<ModeId> modes_;
    int n_max_;
    std::vector<cplx> amps_;
};

struct RaiseResult {
    FockState state;
    /// Squared norm of the input component sitting at n_max, which the truncated a^dagger discards.
    double truncation_loss = 0.0;
};

FockState ladder_lower(const FockState& state, const ModeId& mode);
RaiseResult ladder_raise(const FockState& state, const ModeId& mode);

/// Normalized number state; occupations are given in the same order as modes.
FockState number_state(const std::vector<ModeId>& modes, const std::vector<int>& occupations, int n_max);

/// Truncated single-mode coherent state exp(-|a|^2/2) sum a^n/sqrt(n!) |n>, not renormalized.
FockState coherent_state(const ModeId& mode, cplx alpha, int n_max);
/// 1 - sum_{n<=n_max} P(n) for the truncated coherent state.
double coherent_norm_deficit(cplx alpha, int n_max);
/// False when |alpha|^2 > n_max/4, where truncation starts to bite.
bool coherent_truncation_reliable(cplx alpha, int n_max);

/// Tensor product of states over disjoint modes with equal truncation.
FockState product_state(const FockState& a, const FockState& b);

cplx inner_product(const FockState& s1, const FockState& s2);

/// <a^dagger a> for one mode.
double mean_photon_number(const FockState& state, const ModeId& mode);
/// Marginal occupation distribution P(n), n = 0..n_max, of one mode.
std::vector<double> occupation_distribution(const FockState& state, const ModeId& mode);

/// <a1^dagger a2^dagger a2 a1> = |a2 a1 |state>|^2.
double coincidence_probability(const FockState& state, const ModeId& mode1, const ModeId& mode2);

}  // namespace qosc
