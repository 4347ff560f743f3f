#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "vgpqmc/model.hpp"

namespace vgpqmc {

inline constexpr std::size_t kNoImage = std::numeric_limits<std::size_t>::max();

// One generalized permutation term D_j P_j. `image[z]` is the state P_j maps z
// to (kNoImage where the partial permutation leaves z uncovered); `coeff[z']`
// is the diagonal entry of D_j at the target state z', i.e. <z'|H|z>.
struct PmrTerm {
    std::vector<std::size_t> image;
    std::vector<Amplitude> coeff;
};

// A single off-diagonal move available from some state.
struct PmrStep {
    std::size_t term = 0;
    std::size_t target = 0;
    Amplitude coeff;
};

// H = D_0 + sum_j D_j P_j with fixed-point-free, pairwise distinct partial
// permutations. Construction validates those invariants (throws DimensionError).
class PmrForm {
public:
    PmrForm(std::vector<double> classical_diag, std::vector<PmrTerm> terms);

    std::size_t dim() const noexcept { return energies_.size(); }
    std::size_t num_terms() const noexcept { return terms_.size(); }
    const std::vector<double>& energies() const noexcept { return energies_; }
    const std::vector<PmrTerm>& terms() const noexcept { return terms_; }

    // Steps leaving state z, ordered by term index.
    const std::vector<PmrStep>& steps_from(std::size_t z) const { return steps_.at(z); }

    // Index of the term moving `from` to `to`, if any.
    std::optional<std::size_t> term_between(std::size_t from, std::size_t to) const;

    double max_magnitude() const noexcept;

private:
    std::vector<double> energies_;
    std::vector<PmrTerm> terms_;
    std::vector<std::vector<PmrStep>> steps_;
};

PmrForm decompose_pmr(const Hamiltonian& h);

// Dense reconstruction D_0 + sum_j D_j P_j. Throws HermiticityError when the
// form does not describe a Hermitian matrix.
Hamiltonian recompose(const PmrForm& pmr);

}  // namespace vgpqmc
