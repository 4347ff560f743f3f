#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vgpqmc {

using Amplitude = std::complex<double>;

struct ModelTolerances {
    double herm = 1e-10;  // absolute, per entry
    double zero = 1e-12;  // entries at or below this magnitude are structural zeros
};

struct MatrixEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    Amplitude value;
};

// Pauli string acting on n qubits. The leftmost character acts on the most
// significant bit of the basis index, so "XZ" is X (x) Z.
struct PauliTerm {
    Amplitude coeff;
    std::string word;
};

enum class HamiltonianOrigin { matrix, pauli };

// Hermitian matrix in a fixed computational basis. Holds the real diagonal
// and every nonzero off-diagonal element (both triangles), sorted by (row, col).
// Instances are validated on construction and immutable afterwards.
class Hamiltonian {
public:
    // `entries` describe the full matrix; missing elements are zero. Duplicate
    // (row, col) pairs are summed. Throws DimensionError, HermiticityError.
    Hamiltonian(std::size_t dim, std::span<const MatrixEntry> entries,
                const ModelTolerances& tol = {},
                HamiltonianOrigin origin = HamiltonianOrigin::matrix);

    std::size_t dim() const noexcept { return diag_.size(); }
    double energy(std::size_t z) const { return diag_.at(z); }
    const std::vector<double>& energies() const noexcept { return diag_; }

    // Off-diagonal support, sorted by (row, col); both triangles present.
    const std::vector<MatrixEntry>& off_diagonal() const noexcept { return off_; }

    // Element <row|H|col>; zero when absent.
    Amplitude entry(std::size_t row, std::size_t col) const;

    double max_abs_entry() const noexcept;
    HamiltonianOrigin origin() const noexcept { return origin_; }

private:
    std::vector<double> diag_;
    std::vector<MatrixEntry> off_;
    HamiltonianOrigin origin_;
};

Hamiltonian from_dense(const std::vector<std::vector<Amplitude>>& matrix,
                       const ModelTolerances& tol = {});

// Upper-triangle entries suffice; a missing mirror element is inferred by
// conjugation. When both orientations are given they must agree.
Hamiltonian from_sparse(std::size_t dim, std::span<const MatrixEntry> entries,
                        const ModelTolerances& tol = {});

Hamiltonian from_pauli(std::size_t n_qubits, std::span<const PauliTerm> terms,
                       const ModelTolerances& tol = {});

// Every off-diagonal element replaced by -|H_ij|; diagonal untouched.
Hamiltonian stoquasticize(const Hamiltonian& h);

bool is_stoquastic(const Hamiltonian& h, double tol = 1e-12);

}  // namespace vgpqmc
