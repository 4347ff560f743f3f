#include "vgpqmc/pmr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "vgpqmc/errors.hpp"

namespace vgpqmc {

PmrForm::PmrForm(std::vector<double> classical_diag, std::vector<PmrTerm> terms)
    : energies_(std::move(classical_diag)), terms_(std::move(terms)) {
    const std::size_t n = energies_.size();
    if (n == 0) throw DimensionError("PMR form needs at least one basis state");

    std::set<std::vector<std::size_t>> seen;
    steps_.assign(n, {});
    for (std::size_t j = 0; j < terms_.size(); ++j) {
        const auto& t = terms_[j];
        if (t.image.size() != n || t.coeff.size() != n)
            throw DimensionError("PMR term " + std::to_string(j) + " has wrong length");
        std::vector<bool> hit(n, false);
        bool any = false;
        for (std::size_t z = 0; z < n; ++z) {
            const std::size_t to = t.image[z];
            if (to == kNoImage) continue;
            if (to >= n) throw DimensionError("PMR term " + std::to_string(j) + " maps outside the basis");
            if (to == z) throw DimensionError("PMR term " + std::to_string(j) + " has a fixed point");
            if (hit[to]) throw DimensionError("PMR term " + std::to_string(j) + " is not injective");
            hit[to] = true;
            any = true;
            steps_[z].push_back({j, to, t.coeff[to]});
        }
        if (!any) throw DimensionError("PMR term " + std::to_string(j) + " is empty");
        if (!seen.insert(t.image).second)
            throw DimensionError("PMR term " + std::to_string(j) + " repeats an earlier permutation");
    }
}

std::optional<std::size_t> PmrForm::term_between(std::size_t from, std::size_t to) const {
    for (const auto& s : steps_.at(from))
        if (s.target == to) return s.term;
    return std::nullopt;
}

double PmrForm::max_magnitude() const noexcept {
    double m = 0.0;
    for (const auto& row : steps_)
        for (const auto& s : row) m = std::max(m, std::abs(s.coeff));
    return m;
}

namespace {

PmrForm decompose_by_flip_mask(const Hamiltonian& h) {
    const std::size_t n = h.dim();
    std::map<std::size_t, PmrTerm> by_mask;
    for (const auto& e : h.off_diagonal()) {
        auto [it, inserted] = by_mask.try_emplace(e.row ^ e.col);
        if (inserted) {
            it->second.image.assign(n, kNoImage);
            it->second.coeff.assign(n, Amplitude{});
        }
        it->second.image[e.col] = e.row;
        it->second.coeff[e.row] = e.value;
    }
    std::vector<PmrTerm> terms;
    terms.reserve(by_mask.size());
    for (auto& [mask, term] : by_mask) terms.push_back(std::move(term));
    return PmrForm(h.energies(), std::move(terms));
}

// Kuhn's augmenting-path matching between rows and columns of the remaining
// support. Rows are tried in ascending order, each row's columns ascending.
class BipartiteMatcher {
public:
    BipartiteMatcher(const std::vector<std::vector<std::size_t>>& adj, std::size_t n)
        : adj_(adj), match_col_(n, kNoImage), stamp_(n, 0) {}

    const std::vector<std::size_t>& run() {
        for (std::size_t row = 0; row < adj_.size(); ++row) {
            if (adj_[row].empty()) continue;
            ++epoch_;
            augment(row);
        }
        return match_col_;
    }

private:
    bool augment(std::size_t row) {
        for (std::size_t col : adj_[row]) {
            if (stamp_[col] == epoch_) continue;
            stamp_[col] = epoch_;
            if (match_col_[col] == kNoImage || augment(match_col_[col])) {
                match_col_[col] = row;
                return true;
            }
        }
        return false;
    }

    const std::vector<std::vector<std::size_t>>& adj_;
    std::vector<std::size_t> match_col_;
    std::vector<std::size_t> stamp_;
    std::size_t epoch_ = 0;
};

PmrForm decompose_by_matching(const Hamiltonian& h) {
    const std::size_t n = h.dim();
    std::vector<std::vector<std::size_t>> remaining(n);
    std::size_t left = 0;
    for (const auto& e : h.off_diagonal()) {
        remaining[e.row].push_back(e.col);
        ++left;
    }

    std::vector<PmrTerm> terms;
    while (left > 0) {
        const auto match_col = BipartiteMatcher(remaining, n).run();
        PmrTerm term{std::vector<std::size_t>(n, kNoImage), std::vector<Amplitude>(n)};
        for (std::size_t col = 0; col < n; ++col) {
            const std::size_t row = match_col[col];
            if (row == kNoImage) continue;
            term.image[col] = row;
            term.coeff[row] = h.entry(row, col);
            auto& cols = remaining[row];
            cols.erase(std::find(cols.begin(), cols.end(), col));
            --left;
        }
        terms.push_back(std::move(term));
    }
    return PmrForm(h.energies(), std::move(terms));
}

}  // namespace

PmrForm decompose_pmr(const Hamiltonian& h) {
    if (h.origin() == HamiltonianOrigin::pauli) return decompose_by_flip_mask(h);
    return decompose_by_matching(h);
}

Hamiltonian recompose(const PmrForm& pmr) {
    std::vector<MatrixEntry> entries;
    for (std::size_t z = 0; z < pmr.dim(); ++z) {
        entries.push_back({z, z, pmr.energies()[z]});
        for (const auto& s : pmr.steps_from(z)) entries.push_back({s.target, z, s.coeff});
    }
    return Hamiltonian(pmr.dim(), entries);
}

}  // namespace vgpqmc
