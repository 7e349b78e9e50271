#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dp4/strata.hpp"

using namespace dp4;
using namespace dp4::strata;
using picard::class_from_invariants;
using posetq::SaturatedElement;

namespace {

SaturatedElement one_point(uint32_t pid, posetq::Chain c) {
    SaturatedElement x;
    x.at.push_back({pid, std::move(c)});
    return x;
}

}  // namespace

TEST_CASE("surface config validation") {
    CHECK_THROWS_AS(SurfaceConfig::standard(2), ConfigError);
    auto cfg3 = SurfaceConfig::standard(3);
    // q = 3 uses all four rational points, infinity included
    CHECK(cfg3.p1[3] == std::make_pair(1u, 0u));
    auto cfg5 = SurfaceConfig::standard(5);
    CHECK(cfg5.p1[3].second == 1);
    // duplicate points rejected
    std::array<std::pair<uint32_t, uint32_t>, 4> dup{{{0, 1}, {0, 1}, {2, 1}, {1, 0}}};
    std::array<std::pair<uint32_t, uint32_t>, 4> ok{{{0, 1}, {1, 1}, {2, 1}, {1, 0}}};
    CHECK_THROWS_AS(SurfaceConfig::custom(3, dup, ok), ConfigError);
}

TEST_CASE("incidence system kernel dimensions") {
    auto cfg = SurfaceConfig::standard(3);
    ff::PointTable pt(*cfg.F, 2);
    uint32_t p0 = pt.id(1, 0);

    SaturatedElement empty;
    auto d0 = stratum_dim(cfg, pt, 2, 2, empty);
    CHECK(d0.actual == 12);
    CHECK(d0.unobstructed);

    auto d1 = stratum_dim(cfg, pt, 2, 2, one_point(p0, posetq::atom_chain(0, 1)));
    CHECK(d1.actual == 10);
    CHECK(d1.expected == 10);
    CHECK(d1.unobstructed);

    auto d2 = stratum_dim(cfg, pt, 2, 2, one_point(p0, posetq::single_chain(posetq::kV1)));
    CHECK(d2.actual == 10);  // two rows on t
    CHECK(d2.unobstructed);

    // obstructed probe: cubic tangency on degree-1 sections
    auto d3 = stratum_dim(cfg, pt, 1, 1, one_point(p0, posetq::atom_chain(0, 3)));
    CHECK(d3.actual == 4);
    CHECK(d3.expected == 2);
    CHECK(!d3.unobstructed);

    // a 1[0] condition on (3,3) sections is unobstructed of codim 4
    auto d4 = stratum_dim(cfg, pt, 3, 3, one_point(p0, posetq::single_chain(posetq::kZero)));
    CHECK(d4.actual == 12);
    CHECK(d4.expected == 12);
    CHECK(d4.unobstructed);
    CHECK(d4.n_const == 2 * 3 + 2 * 3 + 4 - 4);
}

TEST_CASE("forced counts for the conic class F") {
    // class F has invariants (a, a') = (0, 1), k = 0
    auto F_cls = class_from_invariants(0, 1, {0, 0, 0, 0});
    {
        auto cfg = SurfaceConfig::standard(3);
        ff::PointTable pt(*cfg.F, 1);
        auto rep = count_naive(cfg, pt, F_cls);
        CHECK(rep.torsor_count == 0);
        CHECK(rep.curve_count == 0);
    }
    {
        auto cfg = SurfaceConfig::standard(4);
        ff::PointTable pt(*cfg.F, 1);
        auto rep = count_naive(cfg, pt, F_cls);
        CHECK(rep.curve_count == Rat(60));
        auto fib = count_fibered(cfg, pt, F_cls);
        CHECK(fib.curve_count == Rat(60));
        auto sv = count_sieve_exact(cfg, pt, F_cls);
        CHECK(sv.curve_count == Rat(60));
    }
}

TEST_CASE("counter agreement on small classes") {
    for (uint32_t q : {3u, 4u}) {
        auto cfg = SurfaceConfig::standard(q);
        std::vector<picard::PicClass> classes = {
            class_from_invariants(1, 1, {0, 0, 0, 0}),
            class_from_invariants(1, 1, {1, 0, 0, 0}),
            class_from_invariants(1, 1, {1, 1, 0, 0}),
            class_from_invariants(2, 1, {1, 1, 1, 0}),
            class_from_invariants(2, 2, {1, 1, 1, 1}),  // -K
            class_from_invariants(2, 0, {0, 0, 0, 0}),
        };
        for (const auto& cls : classes) {
            auto inv = picard::standard_invariants(cls);
            ff::PointTable pt(*cfg.F,
                              std::max<int>({(int)inv.a, (int)inv.aprime, 1}));
            auto n = count_naive(cfg, pt, cls);
            auto f = count_fibered(cfg, pt, cls);
            auto s = count_sieve_exact(cfg, pt, cls);
            CAPTURE(q);
            CAPTURE(n.klass);
            CHECK(n.torsor_count == f.torsor_count);
            CHECK(n.torsor_count == s.torsor_count);
            // torsor divisibility is asserted inside the reports themselves
            CHECK(n.torsor_count % (Int(q - 1) * Int(q - 1)) == 0);
        }
    }
}

TEST_CASE("naive equals fibered on -K over q = 3 (cross-oracle)") {
    auto cfg = SurfaceConfig::standard(3);
    ff::PointTable pt(*cfg.F, 2);
    auto mk = class_from_invariants(2, 2, {1, 1, 1, 1});
    auto n = count_naive(cfg, pt, mk);
    auto f = count_fibered(cfg, pt, mk);
    // over F_3 the four centers necessarily sit on a (1,1)-curve (every
    // bijection of 4-point subsets of P^1(F_3) is Mobius), so the surface is
    // only weak del Pezzo and this particular count happens to vanish; the
    // cross-oracle equality is the point
    CHECK(n.torsor_count == f.torsor_count);
}

TEST_CASE("bidegree (1,1) classes match the Mobius-map oracle") {
    // morphisms of bidegree (1,1) are pairs (alpha, sigma alpha) with alpha
    // in PGL_2 and sigma the induced correspondence; over the q = 3 diagonal
    // configuration the incidence conditions become fixed-point conditions
    // on sigma acting on P^1(F_3), so the counts reduce to permutation
    // counting: |PGL_2(F_3)| = 24 times the number of admissible sigma.
    auto cfg = SurfaceConfig::standard(3);
    ff::PointTable pt(*cfg.F, 1);
    // sigma(0) = 0 and no other fixed point: the two 3-cycles on {1, 2, inf}
    auto c1 = count_fibered(cfg, pt, class_from_invariants(1, 1, {1, 0, 0, 0}));
    CHECK(c1.curve_count == Rat(24 * 2));
    // fixed-point-free sigma: the 9 derangements of 4 letters
    auto c0 = count_fibered(cfg, pt, class_from_invariants(1, 1, {0, 0, 0, 0}));
    CHECK(c0.curve_count == Rat(24 * 9));
}

TEST_CASE("virtual main term: base cases and factored agreement") {
    ff::FieldTable F2(2);
    ff::PointTable pt2(F2, 2);
    CHECK(main_term_virtual(pt2, {0, 0, 0, 0}, 0, 1) == Rat(1));
    CHECK(main_term_virtual(pt2, {0, 0, 0, 0}, 2, 1) == Rat(-7, 2));

    // factored route agrees with the brute double sum once gamma_max clears
    // every essential: at most 4 above the trivial chain and 2k_i + 4 above
    // each atom chain.  This also exercises local-global Mobius
    // multiplicativity across points.
    for (auto k : {std::array<int, 4>{0, 0, 0, 0}, std::array<int, 4>{1, 0, 0, 0},
                   std::array<int, 4>{2, 1, 0, 0}}) {
        int gmax = 4 * 3;  // 3 rational points over F_2
        for (int i = 0; i < 4; ++i) gmax += 2 * k[i] + 4;
        Rat brute = main_term_virtual(pt2, k, gmax, 1);
        Rat fact = main_term_virtual_factored(pt2, k, 1);
        CHECK(brute == fact);
    }
}

TEST_CASE("unobstructedness verification") {
    auto cfg = SurfaceConfig::standard(3);
    ff::PointTable pt(*cfg.F, 3);
    // class (8,3,3,(1,1,1,1)) in h-form: a = aprime = 3, k = (1,1,1,1)
    auto cls = class_from_invariants(3, 3, {1, 1, 1, 1});

    auto rep0 = verify_unobstructedness(cfg, pt, cls, 0);
    CHECK(rep0.fraction == 1.0);
    CHECK(rep0.checked == 24);  // one x = w per w

    auto rep2 = verify_unobstructedness(cfg, pt, cls, 2);
    CHECK(rep2.fraction == 1.0);
    CHECK(rep2.checked > rep0.checked);

    // hypothesis violated: 2a <= sum k
    CHECK_THROWS_AS(verify_unobstructedness(cfg, pt, class_from_invariants(2, 2, {1, 1, 1, 1}), 0),
                    PreconditionError);
}

TEST_CASE("coverage report") {
    auto cfg = SurfaceConfig::standard(3);
    ff::PointTable pt(*cfg.F, 2);
    auto r = coverage_report(cfg, pt, 2, {1, 1, 0, 0});
    CHECK(r.fraction == 1.0);
    CHECK(r.total == 12);

    auto r0 = coverage_report(cfg, pt, 2, {0, 0, 0, 0});
    CHECK(r0.fraction == 1.0);
    CHECK(r0.total == 1);

    // sum k > a can leave uncovered tuples; the fraction is just reported
    auto r2 = coverage_report(cfg, pt, 1, {1, 1, 1, 0});
    CHECK(r2.total == 24);
    CHECK(r2.fraction >= 0.0);
    CHECK(r2.fraction <= 1.0);
}

TEST_CASE("budget caps raise resource errors") {
    auto cfg = SurfaceConfig::standard(3);
    ff::PointTable pt(*cfg.F, 2);
    Budgets tiny;
    tiny.naive = 16;
    CHECK_THROWS_AS(count_naive(cfg, pt, class_from_invariants(2, 2, {1, 1, 1, 1}), tiny),
                    ResourceCapError);
    Budgets tiny2;
    tiny2.fiber = 2;
    CHECK_THROWS_AS(count_fibered(cfg, pt, class_from_invariants(1, 1, {0, 0, 0, 0}), tiny2),
                    ResourceCapError);
}

TEST_CASE("non-nef classes are rejected") {
    auto cfg = SurfaceConfig::standard(3);
    ff::PointTable pt(*cfg.F, 1);
    // a < k_i is not nef
    CHECK_THROWS_AS(count_naive(cfg, pt, class_from_invariants(0, 0, {1, 0, 0, 0})),
                    PreconditionError);
}
