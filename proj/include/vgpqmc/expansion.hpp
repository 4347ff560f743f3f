#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "vgpqmc/model.hpp"
#include "vgpqmc/pmr.hpp"
#include "vgpqmc/signed_log.hpp"

namespace vgpqmc {

// Initial state z and the sequence of PMR term indices (0-based) applied in order.
struct Configuration {
    std::size_t z = 0;
    std::vector<std::size_t> seq;

    friend auto operator<=>(const Configuration&, const Configuration&) = default;
};

struct WeightBreakdown {
    std::vector<std::size_t> states;  // z_0 .. z_q, z_q == z_0
    std::vector<double> energies;
    SignedLogValue r_product;         // prod |d|
    double phase_total = 0.0;         // Phi, the summed step phases (not wrapped)
    SignedLogValue dd;                // divided difference of exp(-beta x) over `energies`
    double w_true = 0.0;              // prod r * cos(Phi) * |dd|
    double w_stoq = 0.0;              // prod r * |dd|
    double w_abs = 0.0;               // |cos(Phi)| * w_stoq
    double log_w_stoq = 0.0;          // log of w_stoq, finite even when w_stoq underflows
};

struct ExpansionOptions {
    std::uint64_t budget = 100'000'000;  // partial walks (enumeration) or cell updates (transfer sums)
    unsigned threads = 1;
};

// Phase picked up by a walk step carrying off-diagonal element d = -r e^{-i phi}.
double step_phase(Amplitude d) noexcept;

// Throws UndefinedStep when a term has no image, NotClosed when the walk does not return.
std::vector<std::size_t> walk_states(const PmrForm& pmr, const Configuration& config);

WeightBreakdown config_weight(const PmrForm& pmr, double beta, const Configuration& config);

// Calls `visit` for every closed configuration with |seq| <= q_max, ordered by
// (q, z, lexicographic seq). Throws BudgetExceeded past opts.budget partial walks.
void for_each_config(const PmrForm& pmr, std::size_t q_max,
                     const std::function<void(const Configuration&)>& visit,
                     std::uint64_t budget = ExpansionOptions{}.budget);

std::vector<Configuration> enumerate_configs(const PmrForm& pmr, std::size_t q_max,
                                             std::uint64_t budget = ExpansionOptions{}.budget);

// Number of closed configurations with exactly q steps (trace of the q-th power
// of the step-count matrix), as a double.
double count_closed_configs(const PmrForm& pmr, std::size_t q);

// |sum_{q > Q} W| <= N e^{-beta E_min} sum_{q > Q} (M r_max beta)^q / q!, also for W^(s).
double truncation_bound(const PmrForm& pmr, double beta, std::size_t q);

struct EnumeratedSums {
    SignedLogValue z_true;
    SignedLogValue z_stoq;
    SignedLogValue z_abs;
    double imag_sum = 0.0;  // sum of Im(prod d) dd, which cancels over conjugate walks
    double abs_sum = 0.0;   // sum of |prod d| |dd|
    std::uint64_t configs = 0;
};

// Sums over every closed configuration with q <= q_max, one config at a time.
// Work is split by initial state; per-state results are reduced in state order.
EnumeratedSums sum_weights_enumerated(const PmrForm& pmr, double beta, std::size_t q_max,
                                      const ExpansionOptions& opts = {});

struct PartitionSeries {
    double z = 0.0;
    std::size_t q_max_used = 0;
    double tail_bound = 0.0;
    std::vector<SignedLogValue> by_order;  // contribution of each q <= q_max_used
};

// Z = sum of w_true over closed configurations with q <= q_max_used, where
// q_max_used is the smallest order whose tail bound is below rel_tol |Z|.
// Configurations are summed by a transfer recursion over (steps, diagonal
// insertions, state), which equals the per-configuration sum exactly.
PartitionSeries partition_function_series(const PmrForm& pmr, double beta, double rel_tol,
                                          const ExpansionOptions& opts = {});

inline constexpr std::size_t kOracleDimCap = 4096;

// tr exp(-beta H) by dense Hermitian eigendecomposition.
double partition_function_exact(const Hamiltonian& h, double beta, std::size_t dim_cap = kOracleDimCap);

struct WeightedSignReport {
    double beta = 0.0;
    std::size_t q_max = 0;
    SignedLogValue z_true;
    SignedLogValue z_stoq;
    SignedLogValue z_abs;
    double sgn_stoq = 0.0;
    double sgn_abs = 0.0;
    double tail_bound = 0.0;
};

// Weighted signs over the configurations with q <= q_max chosen as in
// partition_function_series (both Z and Z_stoq meet rel_tol).
WeightedSignReport weighted_signs(const PmrForm& pmr, double beta, double rel_tol,
                                  const ExpansionOptions& opts = {});

// Same sums over the fixed truncated set q <= q_max.
WeightedSignReport weighted_signs_truncated(const PmrForm& pmr, double beta, std::size_t q_max,
                                            const ExpansionOptions& opts = {});

struct SignDecayPoint {
    double beta = 0.0;
    double sgn_stoq = 0.0;
    double sgn_abs = 0.0;
};

std::vector<SignDecayPoint> sign_decay_scan(const PmrForm& pmr, const std::vector<double>& betas,
                                            double rel_tol = 1e-8, const ExpansionOptions& opts = {});

// Every closed walk with 1..q_max steps, grouped by (state, geometric phase
// class). Weights are positive apart from cos(Phi), so min_cos >= 0 proves no
// configuration in that range has a negative weight.
struct PhaseScan {
    std::size_t q_max = 0;
    double min_cos = 1.0;                    // 1 when no closed walk exists
    std::optional<Configuration> witness;    // a walk attaining min_cos
    std::uint64_t cells = 0;
};

PhaseScan scan_closed_walk_phases(const PmrForm& pmr, std::size_t q_max,
                                  std::uint64_t budget = ExpansionOptions{}.budget);

struct NegativeWeight {
    Configuration config;
    WeightBreakdown weight;
};

// Searches closed walks with q <= q_max, shortest first, for one with
// w_true < threshold. Within each phase class the walk with the largest
// product of |d| is tried.
std::optional<NegativeWeight> find_negative_weight(const PmrForm& pmr, double beta, std::size_t q_max,
                                                   double threshold = -1e-12,
                                                   std::uint64_t budget = ExpansionOptions{}.budget);

}  // namespace vgpqmc
