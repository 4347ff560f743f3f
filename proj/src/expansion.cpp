#include "vgpqmc/expansion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <string>

#include <Eigen/Dense>

#include "parallel.hpp"
#include "vgpqmc/divdiff.hpp"
#include "vgpqmc/errors.hpp"
#include "vgpqmc/phase_graph.hpp"

namespace vgpqmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_beta(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive and finite");
}

double min_energy(const PmrForm& pmr) { return *std::min_element(pmr.energies().begin(), pmr.energies().end()); }
double max_energy(const PmrForm& pmr) { return *std::max_element(pmr.energies().begin(), pmr.energies().end()); }

// log of sum_{q > Q} a^q / q!; -inf when a == 0.
double log_poisson_tail(double a, std::size_t Q) {
    if (a <= 0.0) return kNegInf;
    const double log_a = std::log(a);
    SignedLogValue sum;
    for (std::size_t q = Q + 1;; ++q) {
        const double lt = static_cast<double>(q) * log_a - std::lgamma(static_cast<double>(q) + 1.0);
        sum += SignedLogValue(1, lt);
        // Past q = 2a the terms at least halve, so the remainder is below the last term.
        if (static_cast<double>(q) > 2.0 * a && lt < sum.log_mag() - 40.0) break;
    }
    return sum.log_mag();
}

double log_truncation_bound(const PmrForm& pmr, double beta, std::size_t q) {
    const double a = static_cast<double>(pmr.num_terms()) * pmr.max_magnitude() * beta;
    const double tail = log_poisson_tail(a, q);
    if (tail == kNegInf) return kNegInf;
    return std::log(static_cast<double>(pmr.dim())) - beta * min_energy(pmr) + tail;
}

// log sum_z exp(-beta E_z), a lower bound on both Z and Z_stoq.
double log_classical_z(const PmrForm& pmr, double beta) {
    SignedLogValue z0;
    for (double e : pmr.energies()) z0 += SignedLogValue(1, -beta * e);
    return z0.log_mag();
}

// Smallest order whose tail bound is below half of rel_tol times the classical lower bound.
std::size_t order_for_tolerance(const PmrForm& pmr, double beta, double rel_tol) {
    const double target = std::log(0.5 * rel_tol) + log_classical_z(pmr, beta);
    for (std::size_t q = 0;; ++q) {
        if (log_truncation_bound(pmr, beta, q) < target) return q;
        if (q > 100000) throw BudgetExceeded("truncation order above 100000");
    }
}

// Number of diagonal insertions kept per walk: sum_{m > m_max} Y^m / m! < 1e-17.
std::size_t insertion_cap(double spread) {
    if (spread <= 0.0) return 0;
    const double log_y = std::log(spread);
    for (std::size_t m = 0;; ++m) {
        const double next = static_cast<double>(m + 1) * log_y - std::lgamma(static_cast<double>(m) + 2.0);
        if (static_cast<double>(m + 1) > 2.0 * spread && next < std::log(0.5e-17)) return m;
    }
}

std::vector<std::vector<std::size_t>> distances_to_all(const PmrForm& pmr) {
    const std::size_t n = pmr.dim();
    constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max();
    std::vector<std::vector<std::size_t>> dist(n, std::vector<std::size_t>(n, kFar));
    for (std::size_t z = 0; z < n; ++z) {
        auto& d = dist[z];
        d[z] = 0;
        std::queue<std::size_t> queue;
        queue.push(z);
        while (!queue.empty()) {
            const std::size_t a = queue.front();
            queue.pop();
            // Hermiticity makes the step graph symmetric, so distances from z equal distances to z.
            for (const auto& s : pmr.steps_from(a)) {
                if (d[s.target] != kFar) continue;
                d[s.target] = d[a] + 1;
                queue.push(s.target);
            }
        }
    }
    return dist;
}

// Depth-first walk generator for closed walks of a fixed length from a fixed state.
class ClosedWalks {
public:
    using Distances = std::vector<std::vector<std::size_t>>;

    ClosedWalks(const PmrForm& pmr, const Distances& dist, std::atomic<std::uint64_t>& visited, std::uint64_t budget)
        : pmr_(pmr), dist_(dist), visited_(visited), budget_(budget) {}

    template <class Fn>
    void run(std::size_t z, std::size_t q, Fn&& fn) {
        config_.z = z;
        config_.seq.clear();
        q_ = q;
        descend(z, fn);
    }

private:
    template <class Fn>
    void descend(std::size_t v, Fn& fn) {
        const std::size_t depth = config_.seq.size();
        if (depth == q_) {
            if (v == config_.z) fn(config_);
            return;
        }
        const std::size_t remaining = q_ - depth - 1;
        const auto& to_z = dist_[config_.z];
        for (const auto& s : pmr_.steps_from(v)) {
            if (to_z[s.target] > remaining) continue;
            if (visited_.fetch_add(1, std::memory_order_relaxed) >= budget_)
                throw BudgetExceeded("enumeration visited more than " + std::to_string(budget_) + " partial walks");
            config_.seq.push_back(s.term);
            descend(s.target, fn);
            config_.seq.pop_back();
        }
    }

    const PmrForm& pmr_;
    const Distances& dist_;
    std::atomic<std::uint64_t>& visited_;
    std::uint64_t budget_;
    Configuration config_;
    std::size_t q_ = 0;
};

std::vector<std::size_t> walk_open(const PmrForm& pmr, const Configuration& config) {
    if (config.z >= pmr.dim()) throw InvalidArgument("initial state out of range");
    std::vector<std::size_t> states;
    states.reserve(config.seq.size() + 1);
    states.push_back(config.z);
    for (std::size_t k = 0; k < config.seq.size(); ++k) {
        const std::size_t j = config.seq[k];
        if (j >= pmr.num_terms()) throw InvalidArgument("term index " + std::to_string(j) + " out of range");
        const std::size_t next = pmr.terms()[j].image[states.back()];
        if (next == kNoImage)
            throw UndefinedStep("term " + std::to_string(j) + " has no image at state " + std::to_string(states.back()));
        states.push_back(next);
    }
    return states;
}

}  // namespace

double step_phase(Amplitude d) noexcept { return -std::atan2(-d.imag(), -d.real()); }

std::vector<std::size_t> walk_states(const PmrForm& pmr, const Configuration& config) {
    auto states = walk_open(pmr, config);
    if (states.back() != states.front())
        throw NotClosed("walk ends at " + std::to_string(states.back()) + ", not " + std::to_string(states.front()));
    return states;
}

WeightBreakdown config_weight(const PmrForm& pmr, double beta, const Configuration& config) {
    check_beta(beta);
    WeightBreakdown w;
    w.states = walk_states(pmr, config);
    w.energies.reserve(w.states.size());
    for (std::size_t s : w.states) w.energies.push_back(pmr.energies()[s]);

    double log_r = 0.0;
    for (std::size_t k = 0; k < config.seq.size(); ++k) {
        const Amplitude d = pmr.terms()[config.seq[k]].coeff[w.states[k + 1]];
        log_r += std::log(std::abs(d));
        w.phase_total += step_phase(d);
    }
    w.r_product = SignedLogValue(1, log_r);
    w.dd = divdiff_exp(beta, w.energies);

    // Re(prod d) dd = (-1)^q prod r cos(Phi) * (-1)^q |dd|.
    const double c = std::cos(w.phase_total);
    w.log_w_stoq = log_r + w.dd.log_mag();
    w.w_stoq = std::exp(w.log_w_stoq);
    w.w_true = c * w.w_stoq;
    w.w_abs = std::abs(c) * w.w_stoq;
    return w;
}

void for_each_config(const PmrForm& pmr, std::size_t q_max, const std::function<void(const Configuration&)>& visit,
                     std::uint64_t budget) {
    std::atomic<std::uint64_t> visited{0};
    const auto dist = distances_to_all(pmr);
    ClosedWalks walks(pmr, dist, visited, budget);
    for (std::size_t q = 0; q <= q_max; ++q)
        for (std::size_t z = 0; z < pmr.dim(); ++z) walks.run(z, q, visit);
}

std::vector<Configuration> enumerate_configs(const PmrForm& pmr, std::size_t q_max, std::uint64_t budget) {
    std::vector<Configuration> out;
    for_each_config(pmr, q_max, [&out](const Configuration& c) { out.push_back(c); }, budget);
    return out;
}

double count_closed_configs(const PmrForm& pmr, std::size_t q) {
    const std::size_t n = pmr.dim();
    double total = 0.0;
    std::vector<double> cur(n), next(n);
    for (std::size_t z = 0; z < n; ++z) {
        std::fill(cur.begin(), cur.end(), 0.0);
        cur[z] = 1.0;
        for (std::size_t k = 0; k < q; ++k) {
            std::fill(next.begin(), next.end(), 0.0);
            for (std::size_t a = 0; a < n; ++a)
                if (cur[a] != 0.0)
                    for (const auto& s : pmr.steps_from(a)) next[s.target] += cur[a];
            std::swap(cur, next);
        }
        total += cur[z];
    }
    return total;
}

double truncation_bound(const PmrForm& pmr, double beta, std::size_t q) {
    check_beta(beta);
    const double lb = log_truncation_bound(pmr, beta, q);
    return lb == kNegInf ? 0.0 : std::exp(lb);
}

EnumeratedSums sum_weights_enumerated(const PmrForm& pmr, double beta, std::size_t q_max,
                                      const ExpansionOptions& opts) {
    check_beta(beta);
    const std::size_t n = pmr.dim();
    std::vector<EnumeratedSums> per_state(n);
    std::atomic<std::uint64_t> visited{0};
    const auto dist = distances_to_all(pmr);

    detail::parallel_for(n, opts.threads, [&](std::size_t z) {
        ClosedWalks walks(pmr, dist, visited, opts.budget);
        auto& acc = per_state[z];
        for (std::size_t q = 0; q <= q_max; ++q) {
            walks.run(z, q, [&](const Configuration& c) {
                const auto w = config_weight(pmr, beta, c);
                const double c_phi = std::cos(w.phase_total);
                const int s = c_phi > 0.0 ? 1 : (c_phi < 0.0 ? -1 : 0);
                acc.z_stoq += SignedLogValue(1, w.log_w_stoq);
                acc.z_true += SignedLogValue(s, w.log_w_stoq + std::log(std::abs(c_phi)));
                acc.z_abs += SignedLogValue(s == 0 ? 0 : 1, w.log_w_stoq + std::log(std::abs(c_phi)));
                acc.imag_sum += -std::sin(w.phase_total) * w.w_stoq;
                acc.abs_sum += w.w_stoq;
                ++acc.configs;
            });
        }
    });

    EnumeratedSums total;
    for (const auto& acc : per_state) {
        total.z_true += acc.z_true;
        total.z_stoq += acc.z_stoq;
        total.z_abs += acc.z_abs;
        total.imag_sum += acc.imag_sum;
        total.abs_sum += acc.abs_sum;
        total.configs += acc.configs;
    }
    return total;
}

namespace {

// Shared setup of the transfer recursion. Writing the divided difference as
// e^{-beta E_max} (-beta)^q sum_m h_m(y) / (q + m)! with y = beta (E_max - E),
// every closed walk with m diagonal insertions is a product of hop factors
// (-beta d) and insertion factors y_v, divided by (q + m)!.
struct Transfer {
    std::size_t n = 0;
    std::size_t m_cap = 0;
    double beta = 0.0;
    double e_max = 0.0;
    std::vector<double> y;

    Transfer(const PmrForm& pmr, double b) : n(pmr.dim()), beta(b), e_max(max_energy(pmr)) {
        y.resize(n);
        for (std::size_t v = 0; v < n; ++v) y[v] = beta * (e_max - pmr.energies()[v]);
        const double spread = beta * (e_max - min_energy(pmr));
        if (spread > 600.0) throw DimensionError("beta times energy spread above 600 is not supported");
        m_cap = insertion_cap(spread);
    }

    std::size_t width() const { return (m_cap + 1) * n; }
};

SignedLogValue to_signed_log(double x, double log_scale) {
    if (!std::isfinite(x)) throw DimensionError("partition sum left double range");
    if (x == 0.0) return {};
    return {x > 0 ? 1 : -1, std::log(std::abs(x)) + log_scale};
}

// Per-order Re(sum of complex weights) and sum of stoquastized weights for q <= q_max.
struct OrderSums {
    std::vector<SignedLogValue> z_true;
    std::vector<SignedLogValue> z_stoq;
    std::vector<SignedLogValue> z_abs;
};

OrderSums complex_transfer(const PmrForm& pmr, double beta, std::size_t q_max, const ExpansionOptions& opts) {
    const Transfer t(pmr, beta);
    std::size_t steps = 0;
    for (std::size_t v = 0; v < t.n; ++v) steps += pmr.steps_from(v).size();
    const double work = static_cast<double>(t.n) * static_cast<double>(q_max + 1) * static_cast<double>(t.m_cap + 1) *
                        static_cast<double>(t.n + steps);
    if (work > static_cast<double>(opts.budget))
        throw BudgetExceeded("transfer sum needs about " + std::to_string(static_cast<std::uint64_t>(work)) +
                             " cell updates, above the budget of " + std::to_string(opts.budget));

    using C = std::complex<double>;
    std::vector<std::vector<C>> closure_true(t.n, std::vector<C>(q_max + 1));
    std::vector<std::vector<double>> closure_stoq(t.n, std::vector<double>(q_max + 1));

    detail::parallel_for(t.n, opts.threads, [&](std::size_t z) {
        const std::size_t w = t.width();
        std::vector<C> prev(w), cur(w);
        std::vector<double> prev_s(w), cur_s(w);
        prev[z] = 1.0;
        prev_s[z] = 1.0;
        for (std::size_t m = 1; m <= t.m_cap; ++m) {
            prev[m * t.n + z] = prev[(m - 1) * t.n + z] * (t.y[z] / static_cast<double>(m));
            prev_s[m * t.n + z] = prev_s[(m - 1) * t.n + z] * (t.y[z] / static_cast<double>(m));
        }
        for (std::size_t m = 0; m <= t.m_cap; ++m) {
            closure_true[z][0] += prev[m * t.n + z];
            closure_stoq[z][0] += prev_s[m * t.n + z];
        }

        for (std::size_t j = 1; j <= q_max; ++j) {
            std::fill(cur.begin(), cur.end(), C{});
            std::fill(cur_s.begin(), cur_s.end(), 0.0);
            for (std::size_t u = 0; u < t.n; ++u) {
                for (const auto& s : pmr.steps_from(u)) {
                    const C hop = -t.beta * s.coeff;
                    const double hop_s = t.beta * std::abs(s.coeff);
                    for (std::size_t m = 0; m <= t.m_cap; ++m) {
                        cur[m * t.n + s.target] += hop * prev[m * t.n + u];
                        cur_s[m * t.n + s.target] += hop_s * prev_s[m * t.n + u];
                    }
                }
            }
            for (std::size_t m = 0; m <= t.m_cap; ++m) {
                const double inv = 1.0 / static_cast<double>(j + m);
                for (std::size_t v = 0; v < t.n; ++v) {
                    const std::size_t i = m * t.n + v;
                    if (m > 0) {
                        cur[i] += t.y[v] * cur[i - t.n];
                        cur_s[i] += t.y[v] * cur_s[i - t.n];
                    }
                    cur[i] *= inv;
                    cur_s[i] *= inv;
                }
            }
            for (std::size_t m = 0; m <= t.m_cap; ++m) {
                closure_true[z][j] += cur[m * t.n + z];
                closure_stoq[z][j] += cur_s[m * t.n + z];
            }
            std::swap(prev, cur);
            std::swap(prev_s, cur_s);
        }
    });

    OrderSums out;
    const double log_scale = -beta * t.e_max;
    for (std::size_t j = 0; j <= q_max; ++j) {
        double re = 0.0, st = 0.0;
        for (std::size_t z = 0; z < t.n; ++z) {
            re += closure_true[z][j].real();
            st += closure_stoq[z][j];
        }
        out.z_true.push_back(to_signed_log(re, log_scale));
        out.z_stoq.push_back(to_signed_log(st, log_scale));
    }
    return out;
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::int64_t phase_class(double phase) {
    constexpr double kBuckets = 1099511627776.0;  // 2^40
    double t = std::fmod(phase, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    auto k = static_cast<std::int64_t>(std::llround(t / kTwoPi * kBuckets));
    if (k == static_cast<std::int64_t>(kBuckets)) k = 0;
    return k;
}

// Same recursion with real |d| hop factors, keeping walks of distinct geometric
// phase apart so that cos(Phi) and |cos(Phi)| can be applied at closure.
OrderSums grouped_transfer(const PmrForm& pmr, double beta, std::size_t q_max, const ExpansionOptions& opts) {
    const Transfer t(pmr, beta);
    const std::size_t width = t.m_cap + 1;
    struct Cell {
        std::size_t v;
        double phase;
        std::vector<double> f;
    };
    struct Closure {
        double true_sum = 0.0, stoq_sum = 0.0, abs_sum = 0.0;
    };
    std::vector<std::vector<Closure>> closures(t.n, std::vector<Closure>(q_max + 1));
    std::atomic<std::uint64_t> work{0};

    detail::parallel_for(t.n, opts.threads, [&](std::size_t z) {
        std::vector<Cell> prev;
        Cell start{z, 0.0, std::vector<double>(width)};
        start.f[0] = 1.0;
        for (std::size_t m = 1; m < width; ++m) start.f[m] = start.f[m - 1] * t.y[z] / static_cast<double>(m);
        prev.push_back(std::move(start));

        auto close = [&](const std::vector<Cell>& layer, std::size_t j) {
            auto& acc = closures[z][j];
            for (const auto& cell : layer) {
                if (cell.v != z) continue;
                double val = 0.0;
                for (double x : cell.f) val += x;
                const double c = std::cos(cell.phase);
                acc.true_sum += c * val;
                acc.stoq_sum += val;
                acc.abs_sum += std::abs(c) * val;
            }
        };
        close(prev, 0);

        for (std::size_t j = 1; j <= q_max; ++j) {
            std::map<std::pair<std::size_t, std::int64_t>, std::size_t> index;
            std::vector<Cell> cur;
            for (const auto& cell : prev) {
                for (const auto& s : pmr.steps_from(cell.v)) {
                    const double phase = wrap_phase(cell.phase + step_phase(s.coeff));
                    auto [it, inserted] = index.try_emplace({s.target, phase_class(phase)}, cur.size());
                    if (inserted) {
                        cur.push_back({s.target, phase, std::vector<double>(width)});
                        if (work.fetch_add(width, std::memory_order_relaxed) > opts.budget)
                            throw BudgetExceeded("grouped transfer sum exceeded the budget of " +
                                                 std::to_string(opts.budget) + " cell updates");
                    }
                    auto& f = cur[it->second].f;
                    const double hop = t.beta * std::abs(s.coeff);
                    for (std::size_t m = 0; m < width; ++m) f[m] += hop * cell.f[m];
                }
            }
            for (auto& cell : cur) {
                const double yv = t.y[cell.v];
                for (std::size_t m = 0; m < width; ++m) {
                    if (m > 0) cell.f[m] += yv * cell.f[m - 1];
                    cell.f[m] /= static_cast<double>(j + m);
                }
            }
            close(cur, j);
            prev = std::move(cur);
        }
    });

    OrderSums out;
    const double log_scale = -beta * t.e_max;
    for (std::size_t j = 0; j <= q_max; ++j) {
        Closure sum;
        for (std::size_t z = 0; z < t.n; ++z) {
            sum.true_sum += closures[z][j].true_sum;
            sum.stoq_sum += closures[z][j].stoq_sum;
            sum.abs_sum += closures[z][j].abs_sum;
        }
        out.z_true.push_back(to_signed_log(sum.true_sum, log_scale));
        out.z_stoq.push_back(to_signed_log(sum.stoq_sum, log_scale));
        out.z_abs.push_back(to_signed_log(sum.abs_sum, log_scale));
    }
    return out;
}

SignedLogValue sum_prefix(const std::vector<SignedLogValue>& v, std::size_t last) {
    SignedLogValue s;
    for (std::size_t q = 0; q <= last; ++q) s += v[q];
    return s;
}

// Smallest order Q whose tail bound is below rel_tol |Z(Q)|, where Z(Q) sums orders <= Q.
std::size_t first_converged_order(const PmrForm& pmr, double beta, double rel_tol,
                                  const std::vector<SignedLogValue>& by_order) {
    SignedLogValue partial;
    for (std::size_t q = 0; q < by_order.size(); ++q) {
        partial += by_order[q];
        const double lb = log_truncation_bound(pmr, beta, q);
        if (lb == kNegInf) return q;
        if (!partial.is_zero() && lb - partial.log_mag() < std::log(rel_tol)) return q;
    }
    return by_order.size() - 1;
}

WeightedSignReport make_report(const PmrForm& pmr, double beta, std::size_t q_max, const OrderSums& sums) {
    WeightedSignReport r;
    r.beta = beta;
    r.q_max = q_max;
    r.z_true = sum_prefix(sums.z_true, q_max);
    r.z_stoq = sum_prefix(sums.z_stoq, q_max);
    r.z_abs = sum_prefix(sums.z_abs, q_max);
    r.sgn_stoq = (r.z_true / r.z_stoq).to_double();
    r.sgn_abs = r.z_abs.is_zero() ? 0.0 : (r.z_true / r.z_abs).to_double();
    r.tail_bound = truncation_bound(pmr, beta, q_max);
    return r;
}

void check_rel_tol(double rel_tol) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvalidArgument("rel_tol must lie in (0, 1)");
}

}  // namespace

PartitionSeries partition_function_series(const PmrForm& pmr, double beta, double rel_tol,
                                          const ExpansionOptions& opts) {
    check_beta(beta);
    check_rel_tol(rel_tol);
    const std::size_t q_guess = order_for_tolerance(pmr, beta, rel_tol);
    const auto sums = complex_transfer(pmr, beta, q_guess, opts);
    PartitionSeries out;
    out.q_max_used = first_converged_order(pmr, beta, rel_tol, sums.z_true);
    out.by_order.assign(sums.z_true.begin(), sums.z_true.begin() + static_cast<std::ptrdiff_t>(out.q_max_used) + 1);
    out.z = sum_prefix(sums.z_true, out.q_max_used).to_double();
    out.tail_bound = truncation_bound(pmr, beta, out.q_max_used);
    return out;
}

double partition_function_exact(const Hamiltonian& h, double beta, std::size_t dim_cap) {
    check_beta(beta);
    const std::size_t n = h.dim();
    if (n > dim_cap)
        throw DimensionError("dimension " + std::to_string(n) + " exceeds the spectral oracle cap " +
                             std::to_string(dim_cap));
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t z = 0; z < n; ++z) m(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(z)) = h.energy(z);
    for (const auto& e : h.off_diagonal())
        m(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.value;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw DimensionError("eigendecomposition failed");
    const auto& ev = solver.eigenvalues();
    const double lo = ev.minCoeff();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) sum += std::exp(-beta * (ev(i) - lo));
    return std::exp(-beta * lo) * sum;
}

WeightedSignReport weighted_signs(const PmrForm& pmr, double beta, double rel_tol, const ExpansionOptions& opts) {
    check_beta(beta);
    check_rel_tol(rel_tol);
    const std::size_t q_guess = order_for_tolerance(pmr, beta, rel_tol);
    const auto sums = grouped_transfer(pmr, beta, q_guess, opts);
    // Z_stoq >= |Z|, so convergence of Z implies convergence of Z_stoq.
    const std::size_t q = first_converged_order(pmr, beta, rel_tol, sums.z_true);
    return make_report(pmr, beta, q, sums);
}

WeightedSignReport weighted_signs_truncated(const PmrForm& pmr, double beta, std::size_t q_max,
                                            const ExpansionOptions& opts) {
    check_beta(beta);
    return make_report(pmr, beta, q_max, grouped_transfer(pmr, beta, q_max, opts));
}

std::vector<SignDecayPoint> sign_decay_scan(const PmrForm& pmr, const std::vector<double>& betas, double rel_tol,
                                            const ExpansionOptions& opts) {
    for (std::size_t i = 0; i < betas.size(); ++i) {
        check_beta(betas[i]);
        if (i > 0 && !(betas[i] > betas[i - 1])) throw InvalidArgument("betas must be strictly ascending");
    }
    std::vector<SignDecayPoint> out;
    for (double b : betas) {
        const auto r = weighted_signs(pmr, b, rel_tol, opts);
        out.push_back({b, r.sgn_stoq, r.sgn_abs});
    }
    return out;
}

namespace {

// Layered reachability over (state, phase class) for closed walks from every
// start, keeping for each cell the predecessor with the largest prod |d|.
class PhaseReach {
public:
    struct Cell {
        std::size_t v;
        double phase;
        double log_r;
        std::size_t prev;  // index in the previous layer
        std::size_t term;
    };

    PhaseReach(const PmrForm& pmr, std::uint64_t budget) : pmr_(pmr), budget_(budget), layers_(pmr.dim()) {
        for (std::size_t z = 0; z < pmr.dim(); ++z) layers_[z].push_back({Cell{z, 0.0, 0.0, 0, 0}});
    }

    // Builds the layer with one more step for every start state.
    void advance() {
        for (std::size_t z = 0; z < pmr_.dim(); ++z) {
            const auto& prev = layers_[z].back();
            std::map<std::pair<std::size_t, std::int64_t>, std::size_t> index;
            std::vector<Cell> cur;
            for (std::size_t i = 0; i < prev.size(); ++i) {
                const auto& cell = prev[i];
                for (const auto& s : pmr_.steps_from(cell.v)) {
                    const double phase = wrap_phase(cell.phase + step_phase(s.coeff));
                    const double log_r = cell.log_r + std::log(std::abs(s.coeff));
                    auto [it, inserted] = index.try_emplace({s.target, phase_class(phase)}, cur.size());
                    if (inserted) {
                        if (++cells_ > budget_)
                            throw BudgetExceeded("phase scan exceeded " + std::to_string(budget_) + " cells");
                        cur.push_back({s.target, phase, log_r, i, s.term});
                    } else if (log_r > cur[it->second].log_r) {
                        auto& c = cur[it->second];
                        c.log_r = log_r;
                        c.prev = i;
                        c.term = s.term;
                    }
                }
            }
            layers_[z].push_back(std::move(cur));
        }
        ++depth_;
    }

    std::size_t depth() const { return depth_; }
    std::uint64_t cells() const { return cells_; }
    const std::vector<Cell>& layer(std::size_t z) const { return layers_[z].back(); }

    Configuration witness(std::size_t z, std::size_t cell) const {
        Configuration c;
        c.z = z;
        c.seq.resize(depth_);
        for (std::size_t j = depth_; j >= 1; --j) {
            const auto& x = layers_[z][j][cell];
            c.seq[j - 1] = x.term;
            cell = x.prev;
        }
        return c;
    }

private:
    const PmrForm& pmr_;
    std::uint64_t budget_;
    std::vector<std::vector<std::vector<Cell>>> layers_;
    std::size_t depth_ = 0;
    std::uint64_t cells_ = 0;
};

}  // namespace

PhaseScan scan_closed_walk_phases(const PmrForm& pmr, std::size_t q_max, std::uint64_t budget) {
    PhaseReach reach(pmr, budget);
    PhaseScan out;
    out.q_max = q_max;
    for (std::size_t j = 1; j <= q_max; ++j) {
        reach.advance();
        for (std::size_t z = 0; z < pmr.dim(); ++z) {
            const auto& layer = reach.layer(z);
            for (std::size_t i = 0; i < layer.size(); ++i) {
                if (layer[i].v != z) continue;
                const double c = std::cos(layer[i].phase);
                if (!out.witness || c < out.min_cos) {
                    out.min_cos = c;
                    out.witness = reach.witness(z, i);
                }
            }
        }
    }
    out.cells = reach.cells();
    return out;
}

std::optional<NegativeWeight> find_negative_weight(const PmrForm& pmr, double beta, std::size_t q_max,
                                                   double threshold, std::uint64_t budget) {
    check_beta(beta);
    PhaseReach reach(pmr, budget);
    for (std::size_t j = 1; j <= q_max; ++j) {
        reach.advance();
        std::optional<NegativeWeight> best;
        for (std::size_t z = 0; z < pmr.dim(); ++z) {
            const auto& layer = reach.layer(z);
            for (std::size_t i = 0; i < layer.size(); ++i) {
                if (layer[i].v != z || !(std::cos(layer[i].phase) < 0.0)) continue;
                auto config = reach.witness(z, i);
                auto w = config_weight(pmr, beta, config);
                if (w.w_true < threshold && (!best || w.w_true < best->weight.w_true))
                    best = NegativeWeight{std::move(config), std::move(w)};
            }
        }
        if (best) return best;
    }
    return std::nullopt;
}

}  // namespace vgpqmc
