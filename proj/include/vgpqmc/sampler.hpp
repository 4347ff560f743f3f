#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "vgpqmc/expansion.hpp"
#include "vgpqmc/pmr.hpp"

namespace vgpqmc {

enum class Scheme { stoq, abs };

std::string_view to_string(Scheme s) noexcept;
Scheme parse_scheme(std::string_view s);  // throws InvalidArgument

struct SignEstimate {
    Scheme scheme = Scheme::stoq;
    double mean = 0.0;
    double std_error = 0.0;  // batch means over 32 batches
    std::uint64_t n_samples = 0;
    double acceptance_rate = 0.0;
};

struct SamplerOptions {
    std::uint64_t q_safety = 10000;     // ZeroWeightTrap beyond this many steps in a walk
    std::size_t max_cycle_len = 12;     // cycles offered to the cycle insert/delete move
    std::size_t max_cycles = 100000;
    unsigned chains = 1;
    unsigned threads = 1;
};

struct ChainState {
    Configuration config;
    WeightBreakdown cached;
};

enum class MoveKind { pair_insert, pair_delete, cycle_insert, cycle_delete, resample_z, rotate };

struct Proposal {
    MoveKind kind = MoveKind::resample_z;
    bool valid = false;        // false when the drawn move does not apply
    Configuration config;
    double log_hastings = 0.0; // log q(new -> old) / q(old -> new)
};

// Precomputed move tables for one PMR form: every chordless cycle of the phase
// graph up to max_cycle_len, rooted at each of its vertices in both
// orientations, traversed once and twice. Together with backtrack pairs the
// chordless cycles generate every closed walk; when their enumeration is
// truncated the fundamental cycles are used instead.
class MoveSet {
public:
    MoveSet(const PmrForm& pmr, const SamplerOptions& opts = {});

    const PmrForm& pmr() const noexcept { return pmr_; }
    const std::vector<std::vector<std::size_t>>& rooted_cycles(std::size_t v) const { return rooted_.at(v); }
    std::size_t num_rooted_cycles() const noexcept { return total_rooted_; }

    Proposal propose(const ChainState& state, std::mt19937_64& rng) const;

private:
    Proposal pair_insert(const ChainState& s, std::mt19937_64& rng) const;
    Proposal pair_delete(const ChainState& s, std::mt19937_64& rng) const;
    Proposal cycle_insert(const ChainState& s, std::mt19937_64& rng) const;
    Proposal cycle_delete(const ChainState& s, std::mt19937_64& rng) const;
    Proposal resample_z(const ChainState& s, std::mt19937_64& rng) const;
    Proposal rotate(const ChainState& s, std::mt19937_64& rng) const;

    // Number of rooted cycles matching seq at position k of a walk with `states`.
    std::size_t matches_at(const std::vector<std::size_t>& seq, const std::vector<std::size_t>& states,
                           std::size_t k) const;
    // log of q(big -> small) / q(small -> big) summed over every cycle placement linking the two.
    double log_cycle_ratio(const Configuration& small, const Configuration& big,
                           const std::vector<std::size_t>& big_states) const;

    const PmrForm& pmr_;
    std::vector<std::vector<std::vector<std::size_t>>> rooted_;
    std::size_t total_rooted_ = 0;
};

// Metropolis chain with stationary weight W^(scheme). Zero abs-scheme weights
// (cos Phi = 0) are floored at 1e-300 relative to W^(s).
class MetropolisChain {
public:
    MetropolisChain(const MoveSet& moves, double beta, Scheme scheme, std::uint64_t seed,
                    std::uint64_t q_safety = SamplerOptions{}.q_safety, std::size_t q_cap = SIZE_MAX);

    // One proposal; returns whether it was accepted.
    bool step();

    const ChainState& state() const noexcept { return state_; }
    // w_true / w_scheme for the current configuration, in [-1, 1].
    double ratio() const;

private:
    double log_weight(const WeightBreakdown& w) const;

    const MoveSet& moves_;
    double beta_;
    Scheme scheme_;
    std::uint64_t q_safety_;
    std::size_t q_cap_;
    std::mt19937_64 rng_;
    ChainState state_;
    double log_w_ = 0.0;
};

// True when the cached breakdown matches a fresh evaluation within 1e-10.
bool state_consistent(const PmrForm& pmr, double beta, const ChainState& state);

SignEstimate mcmc_weighted_sign(const PmrForm& pmr, double beta, Scheme scheme, std::uint64_t steps,
                                std::uint64_t burn_in, std::uint64_t seed, const SamplerOptions& opts = {});

// Runs the chain restricted to q <= q_cap and returns the total-variation
// distance between its visit frequencies and the normalized W^(scheme).
double exact_chain_check(const PmrForm& pmr, double beta, Scheme scheme, std::size_t q_cap, std::uint64_t steps,
                         std::uint64_t seed, const SamplerOptions& opts = {});

}  // namespace vgpqmc
