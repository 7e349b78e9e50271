#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "dp4/ffpoly.hpp"

using namespace dp4;
using namespace dp4::ff;

TEST_CASE("field axioms and canonical order for small q") {
    for (uint32_t q : {2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 25u, 27u}) {
        FieldTable F(q);
        CHECK(F.q() == q);
        // canonical order: 0, then 1 = g^0
        CHECK(F.value(0) == 0);
        CHECK(F.value(1) == 1);
        // multiplicative group is cyclic of order q-1 (exhaustive)
        std::set<uint64_t> orders;
        for (uint32_t a = 1; a < q; ++a) orders.insert(F.order(a));
        CHECK(*orders.rbegin() == q - 1);
        CHECK(F.order(F.generator()) == q - 1);
        // field laws, exhaustive
        for (uint32_t a = 0; a < q; ++a) {
            CHECK(F.add(a, F.neg(a)) == 0);
            if (a) CHECK(F.mul(a, F.inv(a)) == 1);
            for (uint32_t b = 0; b < q; ++b) {
                CHECK(F.add(a, b) == F.add(b, a));
                CHECK(F.mul(a, b) == F.mul(b, a));
                for (uint32_t c = 0; c < q && q <= 9; ++c) {
                    CHECK(F.add(F.add(a, b), c) == F.add(a, F.add(b, c)));
                    CHECK(F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c)));
                    CHECK(F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c)));
                }
            }
        }
        // Frobenius is additive and multiplicative (exhaustive)
        for (uint32_t a = 0; a < q; ++a)
            for (uint32_t b = 0; b < q; ++b) {
                CHECK(F.frobenius(F.add(a, b)) == F.add(F.frobenius(a), F.frobenius(b)));
                CHECK(F.frobenius(F.mul(a, b)) == F.mul(F.frobenius(a), F.frobenius(b)));
            }
    }
}

TEST_CASE("q bound and non prime powers rejected") {
    CHECK_THROWS_AS(FieldTable(6), ConfigError);
    CHECK_THROWS_AS(FieldTable(1), ConfigError);
    CHECK_THROWS_AS(FieldTable(12), ConfigError);
    CHECK_THROWS_AS(FieldTable(1u << 17), ConfigError);
    CHECK_NOTHROW(FieldTable(1u << 16));  // 2^16 is within the default bound
}

TEST_CASE("closed point counts") {
    FieldTable F3(3), F2(2);
    CHECK(closed_points(F3, 1).size() == 4);   // q+1 rational points
    CHECK(closed_points(F3, 2).size() == 3);   // (9-3)/2
    CHECK(closed_points(F2, 3).size() == 2);   // (8-2)/3
}

TEST_CASE("necklace identity: sum over e|d of e * N_e^affine = q^d") {
    for (uint32_t q : {2u, 3u, 4u, 5u, 7u, 8u}) {
        FieldTable F(q);
        std::map<int, uint64_t> n_affine;
        for (int d = 1; d <= 5; ++d) {
            auto pts = closed_points(F, d);
            uint64_t aff = 0;
            for (auto& cp : pts)
                if (!cp.infinity) ++aff;
            n_affine[d] = aff;
        }
        for (int d = 1; d <= 5; ++d) {
            uint64_t lhs = 0;
            for (int e = 1; e <= d; ++e)
                if (d % e == 0) lhs += static_cast<uint64_t>(e) * n_affine[e];
            uint64_t qd = 1;
            for (int i = 0; i < d; ++i) qd *= q;
            CHECK(lhs == qd);
        }
    }
}

TEST_CASE("dehomogenized closed points are monic and irreducible by brute force") {
    FieldTable F(3);
    for (int d = 1; d <= 4; ++d) {
        for (const auto& cp : closed_points(F, d)) {
            if (cp.infinity) continue;
            CHECK(poly_deg(cp.monic) == d);
            CHECK(cp.monic.back() == 1);
            // brute-force divisor test against every lower-degree monic poly
            for (int e = 1; e <= d / 2; ++e) {
                uint64_t total = 1;
                for (int i = 0; i < e; ++i) total *= 3;
                for (uint64_t code = 0; code < total; ++code) {
                    Poly f(e + 1, 0);
                    f[e] = 1;
                    uint64_t v = code;
                    for (int i = 0; i < e; ++i) { f[i] = v % 3; v /= 3; }
                    CHECK(!poly_mod(F, cp.monic, f).empty());
                }
            }
        }
    }
}

TEST_CASE("divisor counts match (q^{n+1}-1)/(q-1)") {
    for (uint32_t q : {2u, 3u, 4u, 5u}) {
        FieldTable F(q);
        PointTable pt(F, 5);
        for (int n = 0; n <= 5; ++n) {
            uint64_t expect = 0, qq = 1;
            for (int i = 0; i <= n; ++i) { expect += qq; qq *= q; }
            CHECK(divisors_of_degree(pt, n).size() == expect);
        }
    }
}

TEST_CASE("divisor degree additivity and disjointness") {
    FieldTable F(3);
    PointTable pt(F, 3);
    auto d2 = divisors_of_degree(pt, 2);
    for (auto& a : d2)
        for (auto& b : d2) {
            if (!a.disjoint_from(b)) continue;
            Divisor u;
            u.m = a.m;
            for (auto& pm : b.m) u.m.push_back(pm);
            std::sort(u.m.begin(), u.m.end());
            CHECK(u.degree(pt) == a.degree(pt) + b.degree(pt));
        }
}

TEST_CASE("enumerate_uk examples") {
    {
        FieldTable F(2);
        PointTable pt(F, 1);
        CHECK(enumerate_uk(pt, {1, 1, 1, 1}).empty());
    }
    {
        FieldTable F(3);
        PointTable pt(F, 2);
        CHECK(enumerate_uk(pt, {1, 1, 1, 1}).size() == 24);
        CHECK(enumerate_uk(pt, {2, 0, 0, 0}).size() == 13);
    }
}

TEST_CASE("intersection multiplicity basics") {
    FieldTable F(3);
    PointTable pt(F, 4);
    // s = (u, v): the identity map of degree 1; phi1 with kernel (0:1) is A
    // alone (lambda=1, mu=0): phi1(s) = u; gcd with phi2(t) picks shared roots.
    BinaryForm s0(1, {1, 0}), s1(1, {0, 1});
    BinaryForm t0(1, {1, 0}), t1(1, {0, 1});
    // phi picks the second coordinate: functional (0,1): value v for both
    IntersectionResult r =
        intersection_multiplicity(pt, s0, s1, t0, t1, {0, 1}, {0, 1});
    CHECK(!r.whole_curve);
    CHECK(r.deg == 1);
    REQUIRE(r.div.m.size() == 1);
    CHECK(pt.point(r.div.m[0].first).infinity);

    // phi1 image identically zero: gcd(0, g) = g
    BinaryForm z0 = BinaryForm::zero(1);
    // s = (0-form, s1) is vanishing, so use s = (u, v) with functional
    // annihilating it: phi = (0,0) is not a functional; instead make
    // phi1(s) = 0 by s0 = s1 and phi = (1, -1).
    BinaryForm e0(1, {1, 0}), e1(1, {1, 0});
    // e = (u, u) has common root at u=0, i.e. vanishing -> must throw
    CHECK_THROWS_AS(
        intersection_multiplicity(pt, e0, e1, t0, t1, {1, 0}, {0, 1}),
        PreconditionError);

    // two proportional coordinates via constants: s = (1, 1) in degree 0,
    // phi1 = (1, -1) kills it; t arbitrary non-vanishing
    BinaryForm c0(0, {1}), c1(0, {1});
    IntersectionResult r2 =
        intersection_multiplicity(pt, c0, c1, t0, t1, {1, F.neg(1)}, {0, 1});
    CHECK(!r2.whole_curve);
    CHECK(r2.deg == 1);  // gcd(0, v) = v

    IntersectionResult r3 =
        intersection_multiplicity(pt, c0, c1, c0, c1, {1, F.neg(1)}, {1, F.neg(1)});
    CHECK(r3.whole_curve);  // both images vanish identically
}

TEST_CASE("intersection multiplicity invariant under independent scaling") {
    for (uint32_t q : {3u, 4u, 5u}) {
        FieldTable F(q);
        PointTable pt(F, 4);
        std::mt19937_64 rng(12345 + q);
        auto rnd_elt = [&]() { return static_cast<uint32_t>(rng() % q); };
        int done = 0;
        while (done < 1000) {
            int a = 1 + static_cast<int>(rng() % 3);
            BinaryForm s0(a, {}), s1(a, {}), t0(a, {}), t1(a, {});
            s0.c.resize(a + 1); s1.c.resize(a + 1);
            t0.c.resize(a + 1); t1.c.resize(a + 1);
            for (int j = 0; j <= a; ++j) {
                s0.c[j] = rnd_elt(); s1.c[j] = rnd_elt();
                t0.c[j] = rnd_elt(); t1.c[j] = rnd_elt();
            }
            if (!pair_nowhere_vanishing(F, s0, s1) || !pair_nowhere_vanishing(F, t0, t1))
                continue;
            PairFunctional f1{1, rnd_elt()}, f2{rnd_elt(), 1};
            auto base = intersection_multiplicity(pt, s0, s1, t0, t1, f1, f2);
            uint32_t ls = 1 + static_cast<uint32_t>(rng() % (q - 1));
            uint32_t lt = 1 + static_cast<uint32_t>(rng() % (q - 1));
            auto scale = [&](BinaryForm f, uint32_t l) {
                for (auto& x : f.c) x = F.mul(x, l);
                return f;
            };
            auto scaled = intersection_multiplicity(pt, scale(s0, ls), scale(s1, ls),
                                                    scale(t0, lt), scale(t1, lt), f1, f2);
            CHECK(base.whole_curve == scaled.whole_curve);
            CHECK(base.div == scaled.div);
            ++done;
        }
    }
}

namespace {
// Brute-force kernel dimension of a row system over F_q by enumerating the
// whole coefficient space (test oracle; tiny spaces only).
int brute_kernel_dim(const FieldTable& F, const std::vector<std::vector<uint32_t>>& rows,
                     int ncols) {
    uint64_t total = 1;
    for (int i = 0; i < ncols; ++i) total *= F.q();
    uint64_t cnt = 0;
    std::vector<uint32_t> v(ncols);
    for (uint64_t code = 0; code < total; ++code) {
        uint64_t x = code;
        for (int i = 0; i < ncols; ++i) { v[i] = static_cast<uint32_t>(x % F.q()); x /= F.q(); }
        bool ok = true;
        for (auto& r : rows) {
            uint32_t acc = 0;
            for (int i = 0; i < ncols; ++i) acc = F.add(acc, F.mul(r[i], v[i]));
            if (acc) { ok = false; break; }
        }
        if (ok) ++cnt;
    }
    int dim = 0;
    while (cnt > 1) { cnt /= F.q(); ++dim; }
    return dim;
}
}  // namespace

TEST_CASE("divisibility rows: counts, ranks, kernels") {
    FieldTable F(3);
    auto pts1 = closed_points(F, 1);
    auto pts2 = closed_points(F, 2);
    const ClosedPoint& p0 = pts1[0];  // affine point 0

    // (n=2, deg-1 point, m=1): one row, kernel codim 1
    auto r1 = divisibility_rows(F, 2, {1, 0}, p0, 1);
    CHECK(r1.size() == 1);
    CHECK(brute_kernel_dim(F, r1, 6) == 5);

    // (n=2, deg-1 point, m=3): 3 rows of rank 3; the functional image side is
    // forced to the zero form, so the kernel keeps only the B block
    auto r3 = divisibility_rows(F, 2, {1, 0}, p0, 3);
    CHECK(r3.size() == 3);
    CHECK(brute_kernel_dim(F, r3, 6) == 3);

    // (n=2, deg-2 point, m=1): 2 rows
    auto r2 = divisibility_rows(F, 2, {1, 0}, pts2[0], 1);
    CHECK(r2.size() == 2);
    CHECK(brute_kernel_dim(F, r2, 6) == 4);

    // kernel membership is exactly divisibility (spot check over whole space)
    for (const ClosedPoint& pi : {pts1[1], pts1.back()}) {
        auto rows = divisibility_rows(F, 2, {1, 2}, pi, 1);
        for (uint64_t code = 0; code < 729; ++code) {
            uint64_t x = code;
            std::vector<uint32_t> v(6);
            for (int i = 0; i < 6; ++i) { v[i] = static_cast<uint32_t>(x % 3); x /= 3; }
            BinaryForm A(2, {v[0], v[1], v[2]}), B(2, {v[3], v[4], v[5]});
            BinaryForm G = BinaryForm::zero(2);
            for (int j = 0; j <= 2; ++j)
                G.c[j] = F.add(F.mul(1, A.c[j]), F.mul(2, B.c[j]));
            bool in_kernel = true;
            for (auto& r : rows) {
                uint32_t acc = 0;
                for (int i = 0; i < 6; ++i) acc = F.add(acc, F.mul(r[i], v[i]));
                if (acc) { in_kernel = false; break; }
            }
            bool divisible;
            if (G.is_zero()) {
                divisible = true;
            } else if (pi.infinity) {
                divisible = G.v_valuation() >= 1;
            } else {
                divisible = poly_mod(F, G.dehomogenize(), pi.monic).empty();
            }
            CHECK(in_kernel == divisible);
        }
    }
}

TEST_CASE("divisibility rows are intersection compatible in m") {
    FieldTable F(3);
    auto pts1 = closed_points(F, 1);
    for (const ClosedPoint& pi : {pts1[2], pts1.back()}) {
        for (int m1 = 1; m1 <= 2; ++m1)
            for (int m2 = m1; m2 <= 3; ++m2) {
                auto a = divisibility_rows(F, 4, {1, 1}, pi, m1);
                auto b = divisibility_rows(F, 4, {1, 1}, pi, m2);
                auto both = a;
                both.insert(both.end(), b.begin(), b.end());
                // same kernel as rows(pi, max(m1,m2)) alone: compare by rank
                // over random probes is weaker; use brute kernel dims on a
                // smaller space instead
                auto a2 = divisibility_rows(F, 2, {1, 1}, pi, m1);
                auto b2 = divisibility_rows(F, 2, {1, 1}, pi, m2);
                auto both2 = a2;
                both2.insert(both2.end(), b2.begin(), b2.end());
                CHECK(brute_kernel_dim(F, both2, 6) == brute_kernel_dim(F, b2, 6));
            }
    }
}

TEST_CASE("form gcd bookkeeping around infinity") {
    FieldTable F(3);
    // G1 = v^2 * u, degree 3: coefficients c_j of u^{3-j} v^j -> u at v^2
    // means term u^1 v^2: c_2 = 1
    BinaryForm g1(3, {0, 0, 1, 0});
    // G2 = v * u^2: c_1 = 1
    BinaryForm g2(3, {0, 1, 0, 0});
    auto [vv, g] = form_gcd(F, g1, g2);
    CHECK(vv == 1);
    CHECK(poly_deg(g) == 1);
    CHECK(g[0] == 0);  // gcd poly = u
}
