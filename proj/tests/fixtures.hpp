#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "vgpqmc/model.hpp"
#include "vgpqmc/pmr.hpp"

namespace fixtures {

using vgpqmc::Amplitude;
using vgpqmc::Hamiltonian;
using vgpqmc::MatrixEntry;

inline Hamiltonian minus_x() {
    return vgpqmc::from_dense({{0.0, -1.0}, {-1.0, 0.0}});
}

// Zero diagonal, every off-diagonal element +1.
inline Hamiltonian ones_triangle() {
    return vgpqmc::from_dense({{0.0, 1.0, 1.0}, {1.0, 0.0, 1.0}, {1.0, 1.0, 0.0}});
}

// H_01 = i, H_02 = 1, H_12 = 1, zero diagonal.
inline Hamiltonian complex_triangle() {
    const Amplitude i{0.0, 1.0};
    return vgpqmc::from_dense({{0.0, i, 1.0}, {-i, 0.0, 1.0}, {1.0, 1.0, 0.0}});
}

// Random Hermitian matrix with the given off-diagonal density.
inline Hamiltonian random_hermitian(std::size_t n, double density, std::mt19937_64& rng, bool complex = true) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<MatrixEntry> entries;
    for (std::size_t i = 0; i < n; ++i) entries.push_back({i, i, u(rng)});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (unit(rng) >= density) continue;
            const Amplitude v{u(rng), complex ? u(rng) : 0.0};
            entries.push_back({i, j, v});
            entries.push_back({j, i, std::conj(v)});
        }
    return Hamiltonian(n, entries);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fixtures
