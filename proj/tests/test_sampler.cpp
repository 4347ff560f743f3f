#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "vgpqmc/errors.hpp"
#include "vgpqmc/phase_graph.hpp"
#include "vgpqmc/sampler.hpp"

using namespace vgpqmc;

TEST_CASE("scheme names") {
    CHECK(parse_scheme("abs") == Scheme::abs);
    CHECK(to_string(Scheme::stoq) == "stoq");
    CHECK_THROWS_AS(parse_scheme("other"), InvalidArgument);
}

TEST_CASE("proposals keep walks closed") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const auto h = fixtures::random_hermitian(5, 0.7, rng);
        const auto pmr = decompose_pmr(h);
        const MoveSet moves(pmr);
        MetropolisChain chain(moves, 1.0, trial % 2 ? Scheme::abs : Scheme::stoq, 10 + trial);
        for (int t = 0; t < 20000; ++t) {
            const auto p = moves.propose(chain.state(), rng);
            if (p.valid) CHECK_NOTHROW(walk_states(pmr, p.config));
            chain.step();
            const double r = chain.ratio();
            CHECK(r >= -1.0);
            CHECK(r <= 1.0);
        }
        CHECK(state_consistent(pmr, 1.0, chain.state()));
    }
}

TEST_CASE("pair moves on small configurations") {
    const auto pmr = decompose_pmr(fixtures::minus_x());
    const MoveSet moves(pmr);
    ChainState empty{{0, {}}, config_weight(pmr, 1.0, {0, {}})};
    std::mt19937_64 rng(1);
    bool inserted = false, deleted = false;
    for (int t = 0; t < 200; ++t) {
        const auto p = moves.propose(empty, rng);
        if (p.kind == MoveKind::pair_insert) {
            REQUIRE(p.valid);
            CHECK(p.config.seq == std::vector<std::size_t>{0, 0});
            inserted = true;
        }
        if (p.kind == MoveKind::pair_delete) {
            CHECK_FALSE(p.valid);
            deleted = true;
        }
    }
    CHECK(inserted);
    CHECK(deleted);
}

TEST_CASE("cycle tables") {
    const auto tri = decompose_pmr(fixtures::ones_triangle());
    const MoveSet moves(tri);
    // One triangle, rooted at each vertex in two orientations, once and twice around.
    CHECK(moves.num_rooted_cycles() == 12);
    for (std::size_t v = 0; v < 3; ++v)
        for (const auto& r : moves.rooted_cycles(v)) CHECK_NOTHROW(walk_states(tri, {v, r}));
}

TEST_CASE("stationary distribution on truncated spaces") {
    CHECK(exact_chain_check(decompose_pmr(fixtures::minus_x()), 1.0, Scheme::stoq, 4, 1000000, 5) < 0.02);
    CHECK(exact_chain_check(decompose_pmr(fixtures::ones_triangle()), 1.0, Scheme::stoq, 6, 1000000, 6) < 0.05);
    CHECK(exact_chain_check(decompose_pmr(fixtures::complex_triangle()), 1.0, Scheme::abs, 6, 1000000, 7) < 0.05);
    CHECK(exact_chain_check(decompose_pmr(from_dense({{0.4}})), 1.0, Scheme::stoq, 3, 1000, 8) == 0.0);
    CHECK(exact_chain_check(decompose_pmr(from_dense({{0.0, 0.0}, {0.0, 0.5}})), 1.0, Scheme::stoq, 3, 200000, 8) <
          0.01);
    CHECK_THROWS_AS(exact_chain_check(decompose_pmr(fixtures::ones_triangle()), 1.0, Scheme::stoq, 40, 10, 1),
                    BudgetExceeded);
}

TEST_CASE("stoquastic instances give sign one exactly") {
    const auto pmr = decompose_pmr(generate_stoquastic(4, 0.8, 2));
    for (auto scheme : {Scheme::stoq, Scheme::abs}) {
        const auto est = mcmc_weighted_sign(pmr, 1.0, scheme, 20000, 2000, 1);
        CHECK(est.mean == 1.0);
        CHECK(est.std_error == 0.0);
        CHECK(est.n_samples == 18000);
        CHECK(est.acceptance_rate > 0.0);
    }
}

TEST_CASE("estimates match exact weighted signs") {
    const auto tri = decompose_pmr(fixtures::ones_triangle());
    const auto exact_tri = weighted_signs(tri, 1.0, 1e-10);
    const auto est = mcmc_weighted_sign(tri, 1.0, Scheme::stoq, 1000000, 10000, 11);
    CHECK(std::abs(est.mean - exact_tri.sgn_stoq) < 3 * est.std_error);

    const auto ct = decompose_pmr(fixtures::complex_triangle());
    const auto exact_ct = weighted_signs(ct, 1.0, 1e-10);
    const auto s = mcmc_weighted_sign(ct, 1.0, Scheme::stoq, 1000000, 10000, 12);
    const auto a = mcmc_weighted_sign(ct, 1.0, Scheme::abs, 1000000, 10000, 13);
    CHECK(std::abs(s.mean - exact_ct.sgn_stoq) < 3 * s.std_error);
    CHECK(std::abs(a.mean - exact_ct.sgn_abs) < 3 * a.std_error);
    CHECK(a.mean > s.mean);
}

TEST_CASE("determinism and multiple chains") {
    const auto ct = decompose_pmr(fixtures::complex_triangle());
    const auto a = mcmc_weighted_sign(ct, 1.0, Scheme::stoq, 50000, 1000, 99);
    const auto b = mcmc_weighted_sign(ct, 1.0, Scheme::stoq, 50000, 1000, 99);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);

    SamplerOptions opts;
    opts.chains = 4;
    opts.threads = 2;
    const auto m1 = mcmc_weighted_sign(ct, 1.0, Scheme::stoq, 50000, 1000, 99, opts);
    opts.threads = 1;
    const auto m2 = mcmc_weighted_sign(ct, 1.0, Scheme::stoq, 50000, 1000, 99, opts);
    CHECK(m1.mean == m2.mean);
    CHECK(m1.n_samples == 4 * 49000);
    CHECK(m1.std_error < a.std_error);

    CHECK_THROWS_AS(mcmc_weighted_sign(ct, 1.0, Scheme::stoq, 10, 10, 1), InvalidArgument);
}

TEST_CASE("safety cap") {
    // At large beta the chain drifts to long walks; a tiny cap trips quickly.
    SamplerOptions opts;
    opts.q_safety = 4;
    CHECK_THROWS_AS(mcmc_weighted_sign(decompose_pmr(fixtures::minus_x()), 8.0, Scheme::stoq, 100000, 0, 1, opts),
                    ZeroWeightTrap);
}
