#include "vgpqmc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "parallel.hpp"
#include "vgpqmc/errors.hpp"
#include "vgpqmc/phase_graph.hpp"

namespace vgpqmc {

namespace {

constexpr double kZeroCosFloor = 1e-300;
constexpr std::size_t kBatches = 32;
constexpr std::uint64_t kMaxExactStates = 100000;

std::mt19937_64 chain_rng(std::uint64_t seed, std::uint64_t chain) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chain), static_cast<std::uint32_t>(chain >> 32)};
    return std::mt19937_64(seq);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// States visited by seq from z, or an empty vector when a step is undefined.
std::vector<std::size_t> try_walk(const PmrForm& pmr, std::size_t z, const std::vector<std::size_t>& seq) {
    std::vector<std::size_t> states{z};
    for (std::size_t j : seq) {
        const std::size_t next = pmr.terms()[j].image[states.back()];
        if (next == kNoImage) return {};
        states.push_back(next);
    }
    return states;
}

bool segment_equals(const std::vector<std::size_t>& seq, std::size_t k, const std::vector<std::size_t>& pattern) {
    if (k + pattern.size() > seq.size()) return false;
    return std::equal(pattern.begin(), pattern.end(), seq.begin() + static_cast<std::ptrdiff_t>(k));
}

}  // namespace

std::string_view to_string(Scheme s) noexcept { return s == Scheme::stoq ? "stoq" : "abs"; }

Scheme parse_scheme(std::string_view s) {
    if (s == "stoq") return Scheme::stoq;
    if (s == "abs") return Scheme::abs;
    throw InvalidArgument("scheme must be 'stoq' or 'abs'");
}

MoveSet::MoveSet(const PmrForm& pmr, const SamplerOptions& opts) : pmr_(pmr), rooted_(pmr.dim()) {
    const auto g = build_graph(recompose(pmr));
    std::vector<std::vector<std::size_t>> cycles;
    const auto chordless = enumerate_chordless_cycles(g, std::max<std::size_t>(3, opts.max_cycle_len), opts.max_cycles);
    if (!chordless.truncated) {
        for (const auto& c : chordless.cycles) cycles.push_back(c.vertices);
    } else {
        const auto forest = spanning_forest(g);
        for (std::size_t e : forest.non_tree_edges) cycles.push_back(fundamental_cycle(g, forest, e).vertices);
    }

    for (const auto& vs : cycles) {
        const std::size_t k = vs.size();
        for (std::size_t start = 0; start < k; ++start) {
            for (int dir : {1, -1}) {
                std::vector<std::size_t> seq;
                std::size_t a = vs[start];
                for (std::size_t step = 1; step <= k; ++step) {
                    const std::size_t idx = dir > 0 ? (start + step) % k : (start + k - step) % k;
                    seq.push_back(*pmr.term_between(a, vs[idx]));
                    a = vs[idx];
                }
                // The doubled loop lets the chain step over a cycle whose single
                // traversal has cos(Phi) = 0 and therefore only floor weight.
                auto twice = seq;
                twice.insert(twice.end(), seq.begin(), seq.end());
                rooted_[vs[start]].push_back(std::move(seq));
                rooted_[vs[start]].push_back(std::move(twice));
                total_rooted_ += 2;
            }
        }
    }
}

Proposal MoveSet::propose(const ChainState& state, std::mt19937_64& rng) const {
    if (pmr_.num_terms() == 0) return resample_z(state, rng);
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (u < 0.2) return pair_insert(state, rng);
    if (u < 0.4) return pair_delete(state, rng);
    if (u < 0.5) return cycle_insert(state, rng);
    if (u < 0.6) return cycle_delete(state, rng);
    if (u < 0.8) return resample_z(state, rng);
    return rotate(state, rng);
}

// Insert (j, j^-1) before position k: q + 1 positions times M terms, reversed by
// picking that pair among the q + 1 adjacent pairs of the longer walk.
Proposal MoveSet::pair_insert(const ChainState& s, std::mt19937_64& rng) const {
    Proposal p{MoveKind::pair_insert};
    const auto& seq = s.config.seq;
    const std::size_t k = uniform_index(rng, seq.size() + 1);
    const std::size_t j = uniform_index(rng, pmr_.num_terms());
    const std::size_t from = s.cached.states[k];
    const std::size_t to = pmr_.terms()[j].image[from];
    if (to == kNoImage) return p;
    p.config.z = s.config.z;
    p.config.seq = seq;
    const auto pos = p.config.seq.begin() + static_cast<std::ptrdiff_t>(k);
    p.config.seq.insert(pos, {j, *pmr_.term_between(to, from)});
    p.log_hastings = std::log(static_cast<double>(pmr_.num_terms()));
    p.valid = true;
    return p;
}

Proposal MoveSet::pair_delete(const ChainState& s, std::mt19937_64& rng) const {
    Proposal p{MoveKind::pair_delete};
    const auto& seq = s.config.seq;
    if (seq.size() < 2) return p;
    const std::size_t k = uniform_index(rng, seq.size() - 1);
    if (s.cached.states[k + 2] != s.cached.states[k]) return p;
    p.config.z = s.config.z;
    p.config.seq = seq;
    const auto pos = p.config.seq.begin() + static_cast<std::ptrdiff_t>(k);
    p.config.seq.erase(pos, pos + 2);
    p.log_hastings = -std::log(static_cast<double>(pmr_.num_terms()));
    p.valid = true;
    return p;
}

std::size_t MoveSet::matches_at(const std::vector<std::size_t>& seq, const std::vector<std::size_t>& states,
                                std::size_t k) const {
    std::size_t m = 0;
    for (const auto& r : rooted_[states[k]]) m += segment_equals(seq, k, r) ? 1 : 0;
    return m;
}

double MoveSet::log_cycle_ratio(const Configuration& small, const Configuration& big,
                                const std::vector<std::size_t>& big_states) const {
    const std::size_t qs = small.seq.size();
    const std::size_t qb = big.seq.size();
    const std::size_t len = qb - qs;
    double fwd = 0.0;  // small -> big
    double rev = 0.0;  // big -> small
    for (std::size_t k = 0; k + len <= qb; ++k) {
        const auto& rs = rooted_[big_states[k]];
        const std::size_t m = matches_at(big.seq, big_states, k);
        if (m == 0) continue;
        for (const auto& r : rs) {
            if (r.size() != len || !segment_equals(big.seq, k, r)) continue;
            if (!std::equal(small.seq.begin(), small.seq.begin() + static_cast<std::ptrdiff_t>(k), big.seq.begin()))
                continue;
            if (!std::equal(small.seq.begin() + static_cast<std::ptrdiff_t>(k), small.seq.end(),
                            big.seq.begin() + static_cast<std::ptrdiff_t>(k + len)))
                continue;
            fwd += 1.0 / (static_cast<double>(qs + 1) * static_cast<double>(rs.size()));
            rev += 1.0 / (static_cast<double>(qb + 1) * static_cast<double>(m));
        }
    }
    return std::log(rev) - std::log(fwd);
}

Proposal MoveSet::cycle_insert(const ChainState& s, std::mt19937_64& rng) const {
    Proposal p{MoveKind::cycle_insert};
    const auto& seq = s.config.seq;
    const std::size_t k = uniform_index(rng, seq.size() + 1);
    const auto& rs = rooted_[s.cached.states[k]];
    if (rs.empty()) return p;
    const auto& r = rs[uniform_index(rng, rs.size())];
    p.config.z = s.config.z;
    p.config.seq = seq;
    p.config.seq.insert(p.config.seq.begin() + static_cast<std::ptrdiff_t>(k), r.begin(), r.end());
    const auto big_states = try_walk(pmr_, p.config.z, p.config.seq);
    p.log_hastings = log_cycle_ratio(s.config, p.config, big_states);
    p.valid = true;
    return p;
}

Proposal MoveSet::cycle_delete(const ChainState& s, std::mt19937_64& rng) const {
    Proposal p{MoveKind::cycle_delete};
    const auto& seq = s.config.seq;
    const std::size_t k = uniform_index(rng, seq.size() + 1);
    std::vector<const std::vector<std::size_t>*> hits;
    for (const auto& r : rooted_[s.cached.states[k]])
        if (segment_equals(seq, k, r)) hits.push_back(&r);
    if (hits.empty()) return p;
    const auto& r = *hits[uniform_index(rng, hits.size())];
    p.config.z = s.config.z;
    p.config.seq = seq;
    const auto pos = p.config.seq.begin() + static_cast<std::ptrdiff_t>(k);
    p.config.seq.erase(pos, pos + static_cast<std::ptrdiff_t>(r.size()));
    p.log_hastings = -log_cycle_ratio(p.config, s.config, s.cached.states);
    p.valid = true;
    return p;
}

// Uniform over the states the sequence maps back to themselves; the set is the
// same from either end, so the proposal is symmetric.
Proposal MoveSet::resample_z(const ChainState& s, std::mt19937_64& rng) const {
    Proposal p{MoveKind::resample_z};
    const auto& seq = s.config.seq;
    std::vector<std::size_t> fixed;
    if (seq.empty()) {
        p.config.z = uniform_index(rng, pmr_.dim());
    } else {
        for (std::size_t z = 0; z < pmr_.dim(); ++z) {
            std::size_t v = z;
            for (std::size_t j : seq) {
                v = pmr_.terms()[j].image[v];
                if (v == kNoImage) break;
            }
            if (v == z) fixed.push_back(z);
        }
        p.config.z = fixed[uniform_index(rng, fixed.size())];
    }
    p.config.seq = seq;
    p.valid = true;
    return p;
}

Proposal MoveSet::rotate(const ChainState& s, std::mt19937_64& rng) const {
    Proposal p{MoveKind::rotate};
    const auto& seq = s.config.seq;
    if (seq.size() < 2) return p;
    const std::size_t k = 1 + uniform_index(rng, seq.size() - 1);
    p.config.z = s.cached.states[k];
    p.config.seq.assign(seq.begin() + static_cast<std::ptrdiff_t>(k), seq.end());
    p.config.seq.insert(p.config.seq.end(), seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(k));
    p.valid = true;
    return p;
}

MetropolisChain::MetropolisChain(const MoveSet& moves, double beta, Scheme scheme, std::uint64_t seed,
                                 std::uint64_t q_safety, std::size_t q_cap)
    : moves_(moves), beta_(beta), scheme_(scheme), q_safety_(q_safety), q_cap_(q_cap), rng_(chain_rng(seed, 0)) {
    state_.config = Configuration{0, {}};
    state_.cached = config_weight(moves_.pmr(), beta_, state_.config);
    log_w_ = log_weight(state_.cached);
}

double MetropolisChain::log_weight(const WeightBreakdown& w) const {
    if (scheme_ == Scheme::stoq) return w.log_w_stoq;
    return w.log_w_stoq + std::log(std::max(std::abs(std::cos(w.phase_total)), kZeroCosFloor));
}

bool MetropolisChain::step() {
    auto p = moves_.propose(state_, rng_);
    if (!p.valid || p.config.seq.size() > q_cap_) return false;
    if (p.config.seq.size() > q_safety_)
        throw ZeroWeightTrap("walk length exceeded the safety cap of " + std::to_string(q_safety_));
    auto w = config_weight(moves_.pmr(), beta_, p.config);
    const double log_w = log_weight(w);
    if (p.kind != MoveKind::rotate) {
        const double log_alpha = log_w - log_w_ + p.log_hastings;
        if (log_alpha < 0.0) {
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
            if (!(std::log(u) < log_alpha)) return false;
        }
    }
    state_.config = std::move(p.config);
    state_.cached = std::move(w);
    log_w_ = log_w;
    return true;
}

double MetropolisChain::ratio() const {
    const double c = std::cos(state_.cached.phase_total);
    if (scheme_ == Scheme::stoq) return c;
    if (std::abs(c) <= 1e-12) return 0.0;
    return c > 0 ? 1.0 : -1.0;
}

bool state_consistent(const PmrForm& pmr, double beta, const ChainState& state) {
    const auto fresh = config_weight(pmr, beta, state.config);
    const auto& c = state.cached;
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-10 * std::max({1.0, std::abs(a), std::abs(b)}); };
    return fresh.states == c.states && close(fresh.log_w_stoq, c.log_w_stoq) &&
           close(std::cos(fresh.phase_total), std::cos(c.phase_total));
}

namespace {

SignEstimate run_chain(const MoveSet& moves, double beta, Scheme scheme, std::uint64_t steps, std::uint64_t burn_in,
                       std::uint64_t seed, std::uint64_t q_safety) {
    MetropolisChain chain(moves, beta, scheme, seed, q_safety);
    std::uint64_t accepted = 0;
    for (std::uint64_t t = 0; t < burn_in; ++t) accepted += chain.step() ? 1 : 0;

    const std::uint64_t n = steps - burn_in;
    const std::size_t batches = static_cast<std::size_t>(std::min<std::uint64_t>(kBatches, n));
    const std::uint64_t batch_len = n / batches;
    std::vector<double> batch_sum(batches, 0.0);
    double total = 0.0;
    for (std::uint64_t t = 0; t < n; ++t) {
        accepted += chain.step() ? 1 : 0;
        const double r = chain.ratio();
        total += r;
        const std::uint64_t b = t / batch_len;
        if (b < batches) batch_sum[b] += r;
    }

    SignEstimate est;
    est.scheme = scheme;
    est.n_samples = n;
    est.mean = total / static_cast<double>(n);
    est.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(steps);
    if (batches >= 2) {
        double mean_b = 0.0;
        for (double s : batch_sum) mean_b += s / static_cast<double>(batch_len);
        mean_b /= static_cast<double>(batches);
        double var = 0.0;
        for (double s : batch_sum) {
            const double d = s / static_cast<double>(batch_len) - mean_b;
            var += d * d;
        }
        est.std_error = std::sqrt(var / static_cast<double>(batches * (batches - 1)));
    }
    return est;
}

SignEstimate combine(const std::vector<SignEstimate>& parts) {
    SignEstimate out = parts.front();
    if (parts.size() == 1) return out;
    const bool weighted = std::all_of(parts.begin(), parts.end(), [](const SignEstimate& e) { return e.std_error > 0; });
    double wsum = 0.0, mean = 0.0, var = 0.0, acc = 0.0;
    std::uint64_t n = 0;
    for (const auto& e : parts) {
        const double w = weighted ? 1.0 / (e.std_error * e.std_error) : 1.0;
        wsum += w;
        mean += w * e.mean;
        var += e.std_error * e.std_error;
        acc += e.acceptance_rate;
        n += e.n_samples;
    }
    const double k = static_cast<double>(parts.size());
    out.mean = mean / wsum;
    out.std_error = weighted ? std::sqrt(1.0 / wsum) : std::sqrt(var) / k;
    out.acceptance_rate = acc / k;
    out.n_samples = n;
    return out;
}

void check_chain_args(double beta, std::uint64_t steps, std::uint64_t burn_in) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive and finite");
    if (steps <= burn_in) throw InvalidArgument("steps must exceed burn_in");
}

}  // namespace

SignEstimate mcmc_weighted_sign(const PmrForm& pmr, double beta, Scheme scheme, std::uint64_t steps,
                                std::uint64_t burn_in, std::uint64_t seed, const SamplerOptions& opts) {
    check_chain_args(beta, steps, burn_in);
    const unsigned chains = std::max(1u, opts.chains);
    const MoveSet moves(pmr, opts);
    std::vector<SignEstimate> parts(chains);
    detail::parallel_for(chains, opts.threads, [&](std::size_t c) {
        // Chain c draws from its own stream; chain 0 uses the seed unchanged.
        const std::uint64_t chain_seed = c == 0 ? seed : chain_rng(seed, c)();
        parts[c] = run_chain(moves, beta, scheme, steps, burn_in, chain_seed, opts.q_safety);
    });
    return combine(parts);
}

double exact_chain_check(const PmrForm& pmr, double beta, Scheme scheme, std::size_t q_cap, std::uint64_t steps,
                         std::uint64_t seed, const SamplerOptions& opts) {
    check_chain_args(beta, steps, steps / 10);
    double count = 0.0;
    for (std::size_t q = 0; q <= q_cap; ++q) count += count_closed_configs(pmr, q);
    if (count > static_cast<double>(kMaxExactStates))
        throw BudgetExceeded("more than " + std::to_string(kMaxExactStates) + " configurations below q_cap");

    std::map<Configuration, std::size_t> index;
    std::vector<double> log_w;
    for_each_config(pmr, q_cap, [&](const Configuration& c) {
        const auto w = config_weight(pmr, beta, c);
        double lw = w.log_w_stoq;
        if (scheme == Scheme::abs) lw += std::log(std::max(std::abs(std::cos(w.phase_total)), kZeroCosFloor));
        index.emplace(c, log_w.size());
        log_w.push_back(lw);
    });
    const double top = *std::max_element(log_w.begin(), log_w.end());
    std::vector<double> target(log_w.size());
    double norm = 0.0;
    for (std::size_t i = 0; i < log_w.size(); ++i) norm += target[i] = std::exp(log_w[i] - top);
    for (auto& t : target) t /= norm;

    const MoveSet moves(pmr, opts);
    MetropolisChain chain(moves, beta, scheme, seed, opts.q_safety, q_cap);
    const std::uint64_t burn_in = steps / 10;
    for (std::uint64_t t = 0; t < burn_in; ++t) chain.step();
    std::vector<double> visits(target.size(), 0.0);
    for (std::uint64_t t = burn_in; t < steps; ++t) {
        chain.step();
        visits[index.at(chain.state().config)] += 1.0;
    }
    const double n = static_cast<double>(steps - burn_in);
    double tv = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) tv += std::abs(visits[i] / n - target[i]);
    return 0.5 * tv;
}

}  // namespace vgpqmc
