#pragma once

#include <span>

#include "qosc/modes.hpp"

namespace qosc::spectral {

// In-place transforms of one scalar component laid out on the grid.
// forward:  F(k) = sum_x f(x) exp(-i k.x)
// inverse:  f(x) = (1/N) sum_k F(k) exp(+i k.x)
// Plans are cached per (dim, n) behind a mutex; execution is reentrant.
void forward(const KGrid& grid, std::span<cplx> data);
void inverse(const KGrid& grid, std::span<cplx> data);

}  // namespace qosc::spectral
