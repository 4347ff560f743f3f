#include "vgpqmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "vgpqmc/errors.hpp"

namespace vgpqmc {

namespace {

constexpr std::size_t kMaxPauliQubits = 24;

bool finite(Amplitude a) { return std::isfinite(a.real()) && std::isfinite(a.imag()); }

std::string describe(std::size_t i, std::size_t j) {
    return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

}  // namespace

Hamiltonian::Hamiltonian(std::size_t dim, std::span<const MatrixEntry> entries,
                         const ModelTolerances& tol, HamiltonianOrigin origin)
    : origin_(origin) {
    if (dim == 0) throw DimensionError("Hamiltonian dimension must be at least 1");

    std::map<std::pair<std::size_t, std::size_t>, Amplitude> acc;
    for (const auto& e : entries) {
        if (e.row >= dim || e.col >= dim)
            throw DimensionError("entry " + describe(e.row, e.col) + " outside dimension " +
                                 std::to_string(dim));
        if (!finite(e.value)) throw ParseError("non-finite matrix element at " + describe(e.row, e.col));
        acc[{e.row, e.col}] += e.value;
    }

    diag_.assign(dim, 0.0);
    for (const auto& [key, value] : acc) {
        const auto [i, j] = key;
        if (i == j) {
            if (std::abs(value.imag()) > tol.herm)
                throw HermiticityError("diagonal element " + describe(i, i) + " has imaginary part " +
                                       std::to_string(value.imag()));
            diag_[i] = value.real();
            continue;
        }
        auto mirror_it = acc.find({j, i});
        const Amplitude mirror = mirror_it == acc.end() ? Amplitude{} : mirror_it->second;
        if (std::abs(value - std::conj(mirror)) > tol.herm)
            throw HermiticityError("elements " + describe(i, j) + " and " + describe(j, i) +
                                   " are not complex conjugates");
    }

    // Store the Hermitian projection so downstream code can rely on exact symmetry.
    auto value_at = [&acc](std::size_t i, std::size_t j) {
        auto it = acc.find({i, j});
        return it == acc.end() ? Amplitude{} : it->second;
    };
    for (const auto& [key, value] : acc) {
        const auto [i, j] = key;
        if (i == j) continue;
        const std::size_t lo = std::min(i, j), hi = std::max(i, j);
        // Visit each unordered pair once, from whichever orientation is stored first.
        if (i > j && acc.count({lo, hi})) continue;
        const Amplitude upper = 0.5 * (value_at(lo, hi) + std::conj(value_at(hi, lo)));
        if (std::abs(upper) <= tol.zero) continue;
        off_.push_back({lo, hi, upper});
        off_.push_back({hi, lo, std::conj(upper)});
    }
    std::sort(off_.begin(), off_.end(), [](const MatrixEntry& a, const MatrixEntry& b) {
        return std::pair(a.row, a.col) < std::pair(b.row, b.col);
    });
}

Amplitude Hamiltonian::entry(std::size_t row, std::size_t col) const {
    if (row >= dim() || col >= dim()) throw DimensionError("index " + describe(row, col) + " out of range");
    if (row == col) return diag_[row];
    auto it = std::lower_bound(off_.begin(), off_.end(), std::pair(row, col),
                               [](const MatrixEntry& e, const std::pair<std::size_t, std::size_t>& key) {
                                   return std::pair(e.row, e.col) < key;
                               });
    if (it != off_.end() && it->row == row && it->col == col) return it->value;
    return {};
}

double Hamiltonian::max_abs_entry() const noexcept {
    double m = 0.0;
    for (double d : diag_) m = std::max(m, std::abs(d));
    for (const auto& e : off_) m = std::max(m, std::abs(e.value));
    return m;
}

Hamiltonian from_dense(const std::vector<std::vector<Amplitude>>& matrix, const ModelTolerances& tol) {
    const std::size_t n = matrix.size();
    std::vector<MatrixEntry> entries;
    for (std::size_t i = 0; i < n; ++i) {
        if (matrix[i].size() != n)
            throw DimensionError("dense matrix row " + std::to_string(i) + " has length " +
                                 std::to_string(matrix[i].size()) + ", expected " + std::to_string(n));
        for (std::size_t j = 0; j < n; ++j)
            if (matrix[i][j] != Amplitude{}) entries.push_back({i, j, matrix[i][j]});
    }
    return Hamiltonian(n, entries, tol);
}

Hamiltonian from_sparse(std::size_t dim, std::span<const MatrixEntry> entries, const ModelTolerances& tol) {
    std::map<std::pair<std::size_t, std::size_t>, Amplitude> given;
    for (const auto& e : entries) {
        if (e.row >= dim || e.col >= dim)
            throw DimensionError("entry " + describe(e.row, e.col) + " outside dimension " + std::to_string(dim));
        if (!given.emplace(std::pair(e.row, e.col), e.value).second)
            throw ParseError("duplicate sparse entry " + describe(e.row, e.col));
    }
    std::vector<MatrixEntry> full(entries.begin(), entries.end());
    for (const auto& [key, value] : given) {
        const auto [i, j] = key;
        if (i != j && !given.count({j, i})) full.push_back({j, i, std::conj(value)});
    }
    return Hamiltonian(dim, full, tol);
}

Hamiltonian from_pauli(std::size_t n_qubits, std::span<const PauliTerm> terms, const ModelTolerances& tol) {
    if (n_qubits == 0 || n_qubits > kMaxPauliQubits)
        throw DimensionError("n_qubits must be in [1, " + std::to_string(kMaxPauliQubits) + "]");
    const std::size_t dim = std::size_t{1} << n_qubits;

    std::map<std::pair<std::size_t, std::size_t>, Amplitude> acc;
    for (const auto& term : terms) {
        if (term.word.size() != n_qubits)
            throw ParseError("Pauli word '" + term.word + "' does not have length " + std::to_string(n_qubits));
        if (term.coeff == Amplitude{} || !finite(term.coeff))
            throw ParseError("Pauli term '" + term.word + "' needs a finite nonzero coefficient");

        std::size_t flip = 0;
        for (std::size_t k = 0; k < n_qubits; ++k) {
            const std::size_t bit = std::size_t{1} << (n_qubits - 1 - k);
            switch (term.word[k]) {
                case 'I': case 'Z': break;
                case 'X': case 'Y': flip |= bit; break;
                default: throw ParseError("invalid Pauli character '" + std::string(1, term.word[k]) + "'");
            }
        }
        for (std::size_t z = 0; z < dim; ++z) {
            Amplitude phase{1.0, 0.0};
            for (std::size_t k = 0; k < n_qubits; ++k) {
                const bool set = (z >> (n_qubits - 1 - k)) & 1U;
                switch (term.word[k]) {
                    case 'Z': if (set) phase = -phase; break;
                    case 'Y': phase *= set ? Amplitude{0.0, -1.0} : Amplitude{0.0, 1.0}; break;
                    default: break;
                }
            }
            acc[{z ^ flip, z}] += term.coeff * phase;
        }
    }

    std::vector<MatrixEntry> entries;
    entries.reserve(acc.size());
    for (const auto& [key, value] : acc) entries.push_back({key.first, key.second, value});
    return Hamiltonian(dim, entries, tol, HamiltonianOrigin::pauli);
}

Hamiltonian stoquasticize(const Hamiltonian& h) {
    std::vector<MatrixEntry> entries;
    entries.reserve(h.off_diagonal().size() + h.dim());
    for (std::size_t z = 0; z < h.dim(); ++z) entries.push_back({z, z, h.energy(z)});
    for (const auto& e : h.off_diagonal()) entries.push_back({e.row, e.col, -std::abs(e.value)});
    return Hamiltonian(h.dim(), entries, {}, h.origin());
}

bool is_stoquastic(const Hamiltonian& h, double tol) {
    return std::all_of(h.off_diagonal().begin(), h.off_diagonal().end(), [tol](const MatrixEntry& e) {
        return std::abs(e.value.imag()) <= tol && e.value.real() <= tol;
    });
}

}  // namespace vgpqmc
