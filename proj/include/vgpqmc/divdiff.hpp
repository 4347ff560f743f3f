#pragma once

#include <cstddef>
#include <span>

#include "vgpqmc/signed_log.hpp"

namespace vgpqmc {

// Divided difference of f(x) = exp(-beta x) over the energies E_0..E_q.
//
// Inputs are sorted first, so the result is bit-identical under any
// permutation. With y_i = beta (E_max - E_i) >= 0 the value factors as
//
//     exp(-beta E_max) (-beta)^q exp[y_0, ..., y_q],
//
// and exp[y] is the bottom-left entry of the exponential of the lower
// bidiagonal matrix with diagonal y and unit subdiagonal. That entry is
// summed as a Taylor series on the first column; every term is nonnegative,
// so coincident and clustered energies cost no precision.
//
// Throws InvalidArgument for beta <= 0, an empty list or non-finite input and
// DimensionError past the supported range (q > 1500 or beta * spread > 600).
SignedLogValue divdiff_exp(double beta, std::span<const double> energies);

// Direct evaluation of sum_j exp(-beta E_j) / prod_{k != j}(E_j - E_k) in
// 100-digit arithmetic. Reference oracle only; throws NearDegenerate when two
// inputs are within sep_min.
double divdiff_naive(double beta, std::span<const double> energies, double sep_min = 1e-6);

// (-1)^q, the sign every divided difference of exp(-beta x) over q + 1 inputs carries.
constexpr int divdiff_sign(std::size_t q) noexcept { return q % 2 == 0 ? 1 : -1; }

}  // namespace vgpqmc
