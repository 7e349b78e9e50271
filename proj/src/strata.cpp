#include "dp4/strata.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace dp4::strata {

using ff::BinaryForm;
using ff::ClosedPoint;
using ff::Divisor;
using ff::FieldTable;
using ff::PairFunctional;
using ff::PointTable;
using ff::Poly;
using posetq::Chain;
using posetq::SaturatedElement;

namespace {

double now_seconds() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

SurfaceConfig SurfaceConfig::standard(uint32_t q) {
    if (q < 3) throw ConfigError("surface requires q >= 3 (four distinct points on P^1)");
    auto F = std::make_shared<FieldTable>(q);
    std::array<std::pair<uint32_t, uint32_t>, 4> pts;
    // first four elements of the canonical order 0, 1, g, g^2 as affine
    // points (x : 1); infinity (1 : 0) replaces the fourth when q = 3
    for (int i = 0; i < 4; ++i) pts[i] = {static_cast<uint32_t>(i), 1u};
    if (q == 3) pts[3] = {1u, 0u};
    SurfaceConfig cfg;
    cfg.F = F;
    cfg.p1 = cfg.p2 = pts;
    for (int i = 0; i < 4; ++i) {
        // the functional (v, -u) vanishes exactly on the direction (u : v)
        cfg.phi1[i] = PairFunctional{pts[i].second, F->neg(pts[i].first)};
        cfg.phi2[i] = PairFunctional{pts[i].second, F->neg(pts[i].first)};
    }
    return cfg;
}

SurfaceConfig SurfaceConfig::custom(uint32_t q,
                                    const std::array<std::pair<uint32_t, uint32_t>, 4>& p1,
                                    const std::array<std::pair<uint32_t, uint32_t>, 4>& p2) {
    if (q < 3) throw ConfigError("surface requires q >= 3");
    auto F = std::make_shared<FieldTable>(q);
    auto norm = [&](std::pair<uint32_t, uint32_t> p) {
        if (p.first >= q || p.second >= q || (p.first == 0 && p.second == 0))
            throw ConfigError("bad projective point");
        if (p.second != 0) {
            uint32_t inv = F->inv(p.second);
            return std::make_pair(F->mul(p.first, inv), 1u);
        }
        return std::make_pair(1u, 0u);
    };
    SurfaceConfig cfg;
    cfg.F = F;
    for (int i = 0; i < 4; ++i) {
        cfg.p1[i] = norm(p1[i]);
        cfg.p2[i] = norm(p2[i]);
    }
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            if (cfg.p1[i] == cfg.p1[j]) throw ConfigError("p_i must be pairwise distinct");
            if (cfg.p2[i] == cfg.p2[j]) throw ConfigError("p'_i must be pairwise distinct");
        }
    for (int i = 0; i < 4; ++i) {
        cfg.phi1[i] = PairFunctional{cfg.p1[i].second, F->neg(cfg.p1[i].first)};
        cfg.phi2[i] = PairFunctional{cfg.p2[i].second, F->neg(cfg.p2[i].first)};
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// row reduction

namespace {

// reduced row echelon form in place; returns rank
int rref(const FieldTable& F, std::vector<std::vector<uint32_t>>& rows) {
    if (rows.empty()) return 0;
    size_t ncols = rows[0].size();
    size_t r = 0;
    for (size_t c = 0; c < ncols && r < rows.size(); ++c) {
        size_t piv = r;
        while (piv < rows.size() && rows[piv][c] == 0) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[r], rows[piv]);
        uint32_t inv = F.inv(rows[r][c]);
        for (size_t j = c; j < ncols; ++j) rows[r][j] = F.mul(rows[r][j], inv);
        for (size_t i = 0; i < rows.size(); ++i) {
            if (i == r || rows[i][c] == 0) continue;
            uint32_t f = rows[i][c];
            for (size_t j = c; j < ncols; ++j)
                rows[i][j] = F.sub(rows[i][j], F.mul(f, rows[r][j]));
        }
        ++r;
    }
    rows.resize(r);
    return static_cast<int>(r);
}

}  // namespace

int rank_of(const FieldTable& F, std::vector<std::vector<uint32_t>> rows) {
    return rref(F, rows);
}

std::vector<std::vector<uint32_t>> kernel_basis(const FieldTable& F,
                                                const std::vector<std::vector<uint32_t>>& rows_in,
                                                int ncols) {
    std::vector<std::vector<uint32_t>> rows = rows_in;
    for (auto& r : rows) r.resize(ncols, 0);
    rref(F, rows);
    std::vector<int> pivot_col(rows.size(), -1);
    std::vector<bool> is_pivot(ncols, false);
    for (size_t i = 0; i < rows.size(); ++i) {
        for (int c = 0; c < ncols; ++c)
            if (rows[i][c]) {
                pivot_col[i] = c;
                is_pivot[c] = true;
                break;
            }
    }
    std::vector<std::vector<uint32_t>> basis;
    for (int c = 0; c < ncols; ++c) {
        if (is_pivot[c]) continue;
        std::vector<uint32_t> v(ncols, 0);
        v[c] = 1;
        for (size_t i = 0; i < rows.size(); ++i)
            if (pivot_col[i] >= 0 && rows[i][c]) v[pivot_col[i]] = F.neg(rows[i][c]);
        basis.push_back(std::move(v));
    }
    return basis;
}

// ---------------------------------------------------------------------------
// incidence systems

namespace {

void append_rows(std::vector<std::vector<uint32_t>>& dst,
                 std::vector<std::vector<uint32_t>> rows) {
    for (auto& r : rows) dst.push_back(std::move(r));
}

}  // namespace

IncidenceSystem incidence_system(const SurfaceConfig& cfg, const PointTable& pt, int a,
                                 int aprime, const SaturatedElement& x) {
    const FieldTable& F = *cfg.F;
    IncidenceSystem sys;
    sys.a = a;
    sys.aprime = aprime;
    sys.scols = 2 * (a + 1);
    sys.tcols = 2 * (aprime + 1);
    sys.x = x;
    const PairFunctional id0{1, 0}, id1{0, 1};
    for (const auto& [pid, chain] : x.at) {
        const ClosedPoint& pi = pt.point(pid);
        auto g = posetq::chain_multiplicities(chain);
        // rows only for the path elements; their cumulative orders determine
        // the full saturated condition
        for (const auto& [q, mult] : chain.steps) {
            int o = g[q];
            (void)mult;
            using namespace posetq;
            if (q == kZero) {
                append_rows(sys.srows, ff::divisibility_rows(F, a, id0, pi, o));
                append_rows(sys.srows, ff::divisibility_rows(F, a, id1, pi, o));
                append_rows(sys.trows, ff::divisibility_rows(F, aprime, id0, pi, o));
                append_rows(sys.trows, ff::divisibility_rows(F, aprime, id1, pi, o));
            } else if (q == kV1) {
                // V1 = V1 + 0: the t coordinates vanish
                append_rows(sys.trows, ff::divisibility_rows(F, aprime, id0, pi, o));
                append_rows(sys.trows, ff::divisibility_rows(F, aprime, id1, pi, o));
            } else if (q == kV2) {
                append_rows(sys.srows, ff::divisibility_rows(F, a, id0, pi, o));
                append_rows(sys.srows, ff::divisibility_rows(F, a, id1, pi, o));
            } else if (q >= 9 && q <= 12) {
                int i = q - 9;
                append_rows(sys.srows, ff::divisibility_rows(F, a, cfg.phi1[i], pi, o));
                append_rows(sys.trows, ff::divisibility_rows(F, aprime, cfg.phi2[i], pi, o));
            } else {
                int i = (q - 1) / 2, j = (q - 1) % 2;
                if (j == 0) {
                    // l_{i,1}: s proportional to p_i and t vanishing
                    append_rows(sys.srows, ff::divisibility_rows(F, a, cfg.phi1[i], pi, o));
                    append_rows(sys.trows, ff::divisibility_rows(F, aprime, id0, pi, o));
                    append_rows(sys.trows, ff::divisibility_rows(F, aprime, id1, pi, o));
                } else {
                    append_rows(sys.srows, ff::divisibility_rows(F, a, id0, pi, o));
                    append_rows(sys.srows, ff::divisibility_rows(F, a, id1, pi, o));
                    append_rows(sys.trows, ff::divisibility_rows(F, aprime, cfg.phi2[i], pi, o));
                }
            }
        }
    }
    return sys;
}

StratumDim stratum_dim(const SurfaceConfig& cfg, const PointTable& pt, int a, int aprime,
                       const SaturatedElement& x) {
    IncidenceSystem sys = incidence_system(cfg, pt, a, aprime, x);
    const FieldTable& F = *cfg.F;
    int rs = rank_of(F, sys.srows);
    int rt = rank_of(F, sys.trows);
    StratumDim d;
    d.actual = (sys.scols - rs) + (sys.tcols - rt);
    auto comb = posetq::comb_functions(pt, x, nullptr, {0, 0, 0, 0});
    d.expected = static_cast<int>(std::max<int64_t>(sys.ncols() - comb.gamma, 0));
    d.unobstructed = d.actual == d.expected;
    d.n_const = 2 * a + 2 * aprime + 4 - comb.gamma;
    if (d.actual < d.expected) throw std::logic_error("stratum dimension below expectation");
    return d;
}

// ---------------------------------------------------------------------------
// enumeration helpers

namespace {

constexpr int kMaxDeg = 13;

// dehomogenized form: u-polynomial plus v-adic valuation
struct FormVal {
    int deg = -1;  // u-degree of the poly part, -1 = zero form
    int vval = 0;
    uint32_t c[kMaxDeg + 1];
};

void form_from_block(const uint32_t* blk, int n, FormVal& out) {
    int lo = -1, hi = -1;
    for (int j = 0; j <= n; ++j)
        if (blk[j]) {
            hi = j;
            if (lo < 0) lo = j;
        }
    (void)hi;
    if (lo < 0) {
        out.deg = -1;
        out.vval = 0;
        return;
    }
    // poly coefficient of u^k is blk[n-k]; the top nonzero u-power is n - lo
    out.deg = n - lo;
    out.vval = lo;
    for (int k = 0; k <= out.deg; ++k) out.c[k] = blk[n - k];
}

void functional_block(const FieldTable& F, const uint32_t* a_blk, const uint32_t* b_blk,
                      int n, PairFunctional f, uint32_t* out) {
    for (int j = 0; j <= n; ++j)
        out[j] = F.add(F.mul(f.lambda, a_blk[j]), F.mul(f.mu, b_blk[j]));
}

// degree of the gcd of two forms (vval + poly gcd degree); fills the monic
// gcd poly and valuation when requested.  Both-zero returns -1 (whole curve).
int form_gcd_degree(const FieldTable& F, const FormVal& A, const FormVal& B,
                    Poly* out_poly = nullptr, int* out_vval = nullptr) {
    if (A.deg < 0 && B.deg < 0) return -1;
    auto to_poly = [](const FormVal& f) { return Poly(f.c, f.c + f.deg + 1); };
    if (A.deg < 0 || B.deg < 0) {
        const FormVal& nz = A.deg < 0 ? B : A;
        if (out_poly) *out_poly = ff::poly_monic(F, to_poly(nz));
        if (out_vval) *out_vval = nz.vval;
        return nz.vval + nz.deg;
    }
    int vv = std::min(A.vval, B.vval);
    Poly g = ff::poly_gcd(F, to_poly(A), to_poly(B));
    if (out_poly) *out_poly = g;
    if (out_vval) *out_vval = vv;
    return vv + ff::poly_deg(g);
}

bool block_nowhere_vanishing(const FieldTable& F, const uint32_t* blk, int n) {
    FormVal A, B;
    form_from_block(blk, n, A);
    form_from_block(blk + (n + 1), n, B);
    if (A.deg < 0 && B.deg < 0) return false;
    if (A.deg < 0 || B.deg < 0) {
        const FormVal& nz = A.deg < 0 ? B : A;
        return nz.deg == 0 && nz.vval == 0;
    }
    return form_gcd_degree(F, A, B) == 0;
}

struct SideRep {
    FormVal phi[4];
};

struct TargetDiv {
    int inf_mult = 0;
    Poly monic;
    int deg = 0;
};

TargetDiv target_of(const PointTable& pt, const Divisor& d) {
    TargetDiv t;
    t.monic = Poly{1};
    const FieldTable& F = pt.field();
    for (auto& [pid, mult] : d.m) {
        const ClosedPoint& cp = pt.point(pid);
        if (cp.infinity)
            t.inf_mult += mult;
        else
            t.monic = ff::poly_mul(F, t.monic, ff::poly_pow(F, cp.monic, mult));
        t.deg += pt.degree(pid) * mult;
    }
    return t;
}

void for_each_span_vector(const FieldTable& F,
                          const std::vector<std::vector<uint32_t>>& basis, int ncols,
                          const std::function<void(const uint32_t*)>& fn) {
    size_t d = basis.size();
    std::vector<uint32_t> digits(d, 0);
    std::vector<uint32_t> vec(ncols, 0);
    uint64_t total = 1;
    for (size_t i = 0; i < d; ++i) total *= F.q();
    for (uint64_t code = 0;; ++code) {
        fn(vec.data());
        if (code + 1 == total) break;
        for (size_t j = 0;; ++j) {
            uint32_t old = digits[j];
            uint32_t nw = (old + 1) % F.q();
            digits[j] = nw;
            uint32_t delta = F.sub(nw, old);
            if (delta)
                for (int c = 0; c < ncols; ++c)
                    if (basis[j][c]) vec[c] = F.add(vec[c], F.mul(delta, basis[j][c]));
            if (nw != 0) break;
        }
    }
}

// representatives of the projectivized span: leading coefficient pinned to 1
void for_each_proj_vector(const FieldTable& F,
                          const std::vector<std::vector<uint32_t>>& basis, int ncols,
                          const std::function<void(const uint32_t*)>& fn) {
    size_t d = basis.size();
    std::vector<uint32_t> sum(ncols);
    for (size_t lead = 0; lead < d; ++lead) {
        std::vector<std::vector<uint32_t>> tail(basis.begin() + lead + 1, basis.end());
        std::vector<uint32_t> base = basis[lead];
        base.resize(ncols, 0);
        for_each_span_vector(F, tail, ncols, [&](const uint32_t* v) {
            for (int c = 0; c < ncols; ++c) sum[c] = F.add(base[c], v[c]);
            fn(sum.data());
        });
    }
}

struct ClassData {
    int a, aprime;
    std::array<int, 4> k;
    int64_t h;
};

ClassData class_data(const picard::PicClass& cls) {
    auto inv = picard::standard_invariants(cls);  // throws on non-nef input
    ClassData cd;
    cd.a = static_cast<int>(inv.a);
    cd.aprime = static_cast<int>(inv.aprime);
    for (int i = 0; i < 4; ++i) cd.k[i] = static_cast<int>(inv.k[i]);
    cd.h = inv.h;
    return cd;
}

void finish_report(CountReport& rep, const FieldTable& F, int64_t h, const Int& torsor,
                   bool enumerative, double t0) {
    uint32_t q = F.q();
    rep.q = q;
    rep.torsor_count = torsor;
    rep.torsor_exact = Rat(torsor);
    rep.curve_count = Rat(torsor, Int(q - 1) * Int(q - 1));
    Rat bound = rat_pow(Rat(q, q - 1), 6) * Rat(int_pow(Int(q), static_cast<unsigned>(h + 2)));
    rep.upper_bound_ok = rep.curve_count <= bound;
    if (enumerative && !rep.upper_bound_ok)
        throw std::logic_error("count exceeds the q^{h+2} upper bound");
    if (enumerative && rep.torsor_count % (Int(q - 1) * Int(q - 1)) != 0)
        throw std::logic_error("torsor count not divisible by (q-1)^2");
    rep.seconds = now_seconds() - t0;
}

}  // namespace

CountReport count_naive(const SurfaceConfig& cfg, const PointTable& pt,
                        const picard::PicClass& cls, const Budgets& b) {
    double t0 = now_seconds();
    const FieldTable& F = *cfg.F;
    uint32_t q = F.q();
    ClassData cd = class_data(cls);
    int ns = 2 * (cd.a + 1), nt = 2 * (cd.aprime + 1);
    if (cd.a > kMaxDeg - 1 || cd.aprime > kMaxDeg - 1)
        throw ResourceCapError("count_naive: degree beyond the enumeration design");
    if (pt.max_degree() < std::max({cd.a, cd.aprime, 1}))
        throw PreconditionError("count_naive: point table too shallow");
    double total = std::pow(static_cast<double>(q), ns + nt);
    if (total > static_cast<double>(b.naive))
        throw ResourceCapError("count_naive: candidate space exceeds budget");

    // cache the t side once: nowhere-vanishing flag plus functional values
    uint64_t tcount = 1;
    for (int i = 0; i < nt; ++i) tcount *= q;
    std::vector<SideRep> treps(tcount);
    std::vector<uint8_t> tok(tcount, 0);
    {
        std::vector<uint32_t> blk(nt, 0);
        uint32_t scratch[2 * kMaxDeg + 2];
        for (uint64_t code = 0; code < tcount; ++code) {
            uint64_t v = code;
            for (int i = 0; i < nt; ++i) {
                blk[i] = static_cast<uint32_t>(v % q);
                v /= q;
            }
            if (!block_nowhere_vanishing(F, blk.data(), cd.aprime)) continue;
            tok[code] = 1;
            for (int i = 0; i < 4; ++i) {
                functional_block(F, blk.data(), blk.data() + (cd.aprime + 1), cd.aprime,
                                 cfg.phi2[i], scratch);
                form_from_block(scratch, cd.aprime, treps[code].phi[i]);
            }
        }
    }

    uint64_t scount = 1;
    for (int i = 0; i < ns; ++i) scount *= q;
    int jobs = std::max(1, b.jobs);
    std::vector<Int> partial(jobs, 0);
    auto worker = [&](int job) {
        Int acc = 0;
        std::vector<uint32_t> blk(ns, 0);
        uint32_t scratch[2 * kMaxDeg + 2];
        SideRep s;
        for (uint64_t code = job; code < scount; code += static_cast<uint64_t>(jobs)) {
            uint64_t v = code;
            for (int i = 0; i < ns; ++i) {
                blk[i] = static_cast<uint32_t>(v % q);
                v /= q;
            }
            if (!block_nowhere_vanishing(F, blk.data(), cd.a)) continue;
            for (int i = 0; i < 4; ++i) {
                functional_block(F, blk.data(), blk.data() + (cd.a + 1), cd.a, cfg.phi1[i],
                                 scratch);
                form_from_block(scratch, cd.a, s.phi[i]);
            }
            for (uint64_t tc = 0; tc < tcount; ++tc) {
                if (!tok[tc]) continue;
                const SideRep& t = treps[tc];
                bool good = true;
                for (int i = 0; i < 4 && good; ++i)
                    if (form_gcd_degree(F, s.phi[i], t.phi[i]) != cd.k[i]) good = false;
                if (good) acc += 1;
            }
        }
        partial[job] = acc;
    };
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> th;
        for (int j = 0; j < jobs; ++j) th.emplace_back(worker, j);
        for (auto& t : th) t.join();
    }
    Int torsor = 0;
    for (auto& p : partial) torsor += p;

    CountReport rep;
    rep.klass = picard::class_text(cls);
    rep.method = "naive";
    finish_report(rep, F, cd.h, torsor, true, t0);
    return rep;
}

namespace {

// per-fiber count: kernel of E_w enumerated projectively on each side, with
// exact divisor matching against w
Int fiber_count(const SurfaceConfig& cfg, const PointTable& pt, const ClassData& cd,
                const std::array<Divisor, 4>& w, const Budgets& b) {
    const FieldTable& F = *cfg.F;
    uint32_t q = F.q();
    SaturatedElement xw = posetq::from_uk(pt, w);
    IncidenceSystem sys = incidence_system(cfg, pt, cd.a, cd.aprime, xw);
    auto sbasis = kernel_basis(F, sys.srows, sys.scols);
    auto tbasis = kernel_basis(F, sys.trows, sys.tcols);
    double fib =
        std::pow(static_cast<double>(q), static_cast<double>(sbasis.size() + tbasis.size()));
    if (fib > static_cast<double>(b.fiber))
        throw ResourceCapError("count_fibered: fiber exceeds budget");

    TargetDiv target[4];
    for (int i = 0; i < 4; ++i) target[i] = target_of(pt, w[i]);

    std::vector<SideRep> sreps, treps;
    uint32_t scratch[2 * kMaxDeg + 2];
    for_each_proj_vector(F, sbasis, sys.scols, [&](const uint32_t* v) {
        if (!block_nowhere_vanishing(F, v, cd.a)) return;
        SideRep r;
        for (int i = 0; i < 4; ++i) {
            functional_block(F, v, v + (cd.a + 1), cd.a, cfg.phi1[i], scratch);
            form_from_block(scratch, cd.a, r.phi[i]);
        }
        sreps.push_back(r);
    });
    for_each_proj_vector(F, tbasis, sys.tcols, [&](const uint32_t* v) {
        if (!block_nowhere_vanishing(F, v, cd.aprime)) return;
        SideRep r;
        for (int i = 0; i < 4; ++i) {
            functional_block(F, v, v + (cd.aprime + 1), cd.aprime, cfg.phi2[i], scratch);
            form_from_block(scratch, cd.aprime, r.phi[i]);
        }
        treps.push_back(r);
    });

    Int pairs = 0;
    Poly gcd_poly;
    int gcd_vval = 0;
    for (const SideRep& s : sreps)
        for (const SideRep& t : treps) {
            bool good = true;
            for (int i = 0; i < 4 && good; ++i) {
                int d = form_gcd_degree(F, s.phi[i], t.phi[i]);
                if (d != target[i].deg) {
                    good = false;
                    break;
                }
                if (d == 0) continue;
                form_gcd_degree(F, s.phi[i], t.phi[i], &gcd_poly, &gcd_vval);
                if (gcd_vval != target[i].inf_mult || !(gcd_poly == target[i].monic))
                    good = false;
            }
            if (good) pairs += 1;
        }
    // both sides were counted projectively; restore the two scaling orbits
    return pairs * Int(q - 1) * Int(q - 1);
}

}  // namespace

CountReport count_fibered(const SurfaceConfig& cfg, const PointTable& pt,
                          const picard::PicClass& cls, const Budgets& b) {
    double t0 = now_seconds();
    const FieldTable& F = *cfg.F;
    ClassData cd = class_data(cls);
    if (pt.max_degree() < std::max({cd.a, cd.aprime, 1}))
        throw PreconditionError("count_fibered: point table too shallow");
    auto ws = ff::enumerate_uk(pt, cd.k);
    int jobs = std::max(1, b.jobs);
    std::vector<Int> partial(jobs, 0);
    std::vector<std::string> errors(jobs);
    auto worker = [&](int job) {
        try {
            Int acc = 0;
            for (size_t i = job; i < ws.size(); i += static_cast<size_t>(jobs))
                acc += fiber_count(cfg, pt, cd, ws[i], b);
            partial[job] = acc;
        } catch (const std::exception& e) {
            errors[job] = e.what();
        }
    };
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> th;
        for (int j = 0; j < jobs; ++j) th.emplace_back(worker, j);
        for (auto& t : th) t.join();
    }
    for (auto& e : errors)
        if (!e.empty()) throw ResourceCapError(e);
    Int torsor = 0;
    for (auto& p : partial) torsor += p;

    CountReport rep;
    rep.klass = picard::class_text(cls);
    rep.method = "fibered";
    finish_report(rep, F, cd.h, torsor, true, t0);
    return rep;
}

// ---------------------------------------------------------------------------
// exact sieve over the intersection lattice of incidence subspaces

namespace {

std::string rows_key(const std::vector<std::vector<uint32_t>>& rows) {
    std::string k;
    for (auto& r : rows) {
        for (uint32_t x : r) {
            k.push_back(static_cast<char>('a' + (x & 15)));
            k.push_back(static_cast<char>('a' + ((x >> 4) & 15)));
        }
        k.push_back('|');
    }
    return k;
}

// rowspace(a) contains rowspace(b): every row of b reduces to zero against
// the RREF rows of a
bool rowspace_contains(const FieldTable& F, const std::vector<std::vector<uint32_t>>& a,
                       const std::vector<std::vector<uint32_t>>& b) {
    if (b.empty()) return true;
    size_t ncols = b[0].size();
    std::vector<int> piv(a.size(), -1);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t c = 0; c < ncols; ++c)
            if (a[i][c]) {
                piv[i] = static_cast<int>(c);
                break;
            }
    for (const auto& row : b) {
        std::vector<uint32_t> r = row;
        for (size_t i = 0; i < a.size(); ++i) {
            if (piv[i] < 0 || r[piv[i]] == 0) continue;
            uint32_t f = r[piv[i]];
            for (size_t c = 0; c < ncols; ++c) r[c] = F.sub(r[c], F.mul(f, a[i][c]));
        }
        for (uint32_t x : r)
            if (x) return false;
    }
    return true;
}

}  // namespace

CountReport count_sieve_exact(const SurfaceConfig& cfg, const PointTable& pt,
                              const picard::PicClass& cls, const Budgets& b) {
    double t0 = now_seconds();
    const FieldTable& F = *cfg.F;
    uint32_t q = F.q();
    ClassData cd = class_data(cls);
    int maxdeg = std::max({cd.a, cd.aprime, 1});
    if (pt.max_degree() < maxdeg)
        throw PreconditionError("count_sieve_exact: point table too shallow");
    auto ws = ff::enumerate_uk(pt, cd.k);

    auto per_w = [&](const std::array<Divisor, 4>& w) -> Int {
        SaturatedElement xw = posetq::from_uk(pt, w);
        IncidenceSystem base = incidence_system(cfg, pt, cd.a, cd.aprime, xw);

        // side registries: each lattice element is a pair of side-space ids;
        // meets and containments are computed once per side pair
        struct SideReg {
            std::vector<std::vector<std::vector<uint32_t>>> rows;  // RREF per id
            std::vector<int> dim;
            std::map<std::string, int> by_key;
            int cols;
        };
        SideReg regs{{}, {}, {}, base.scols}, regt{{}, {}, {}, base.tcols};
        auto intern = [&](SideReg& reg, std::vector<std::vector<uint32_t>> rows) {
            for (auto& r : rows) r.resize(reg.cols, 0);
            int rk = rref(F, rows);
            std::string key = rows_key(rows);
            auto it = reg.by_key.find(key);
            if (it != reg.by_key.end()) return it->second;
            int id = static_cast<int>(reg.rows.size());
            reg.rows.push_back(std::move(rows));
            reg.dim.push_back(reg.cols - rk);
            reg.by_key.emplace(std::move(key), id);
            return id;
        };
        int top_s = intern(regs, base.srows);
        int top_t = intern(regt, base.trows);

        std::vector<std::pair<int, int>> atoms;
        bool degenerate = false;
        for (uint32_t pid = 0; pid < pt.total() && !degenerate; ++pid) {
            if (pt.degree(pid) > maxdeg) continue;
            const Chain& basec = xw.chain_at(pid);
            for (const Chain& cov : posetq::covers_and_essentials(basec).covers) {
                SaturatedElement x = xw;
                bool found = false;
                for (auto& [p2, c2] : x.at)
                    if (p2 == pid) {
                        c2 = cov;
                        found = true;
                    }
                if (!found) {
                    x.at.push_back({pid, cov});
                    std::sort(x.at.begin(), x.at.end(), [](const auto& a2, const auto& b2) {
                        return a2.first < b2.first;
                    });
                }
                IncidenceSystem sys = incidence_system(cfg, pt, cd.a, cd.aprime, x);
                int sid = intern(regs, sys.srows);
                int tid = intern(regt, sys.trows);
                if (sid == top_s && tid == top_t) {
                    degenerate = true;  // an excluded locus is all of E_w
                    break;
                }
                atoms.push_back({sid, tid});
            }
        }
        if (degenerate) return 0;
        std::sort(atoms.begin(), atoms.end());
        atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());

        // close under meets with atoms (every intersection of atoms arises
        // one atom at a time)
        std::map<std::pair<int, int>, int> meet_s, meet_t;
        auto side_meet = [&](SideReg& reg, std::map<std::pair<int, int>, int>& memo, int i,
                             int j) {
            if (i == j) return i;
            auto key = std::minmax(i, j);
            auto it = memo.find(key);
            if (it != memo.end()) return it->second;
            auto rows = reg.rows[key.first];
            rows.insert(rows.end(), reg.rows[key.second].begin(), reg.rows[key.second].end());
            int id = intern(reg, std::move(rows));
            memo.emplace(key, id);
            return id;
        };
        std::set<std::pair<int, int>> seen(atoms.begin(), atoms.end());
        std::vector<std::pair<int, int>> lattice(atoms.begin(), atoms.end());
        for (size_t i = 0; i < lattice.size(); ++i) {
            if (lattice.size() > b.lattice_cap)
                throw ResourceCapError("count_sieve_exact: lattice cap at w = " + xw.text(pt));
            for (const auto& [as, at] : atoms) {
                std::pair<int, int> m{side_meet(regs, meet_s, lattice[i].first, as),
                                      side_meet(regt, meet_t, lattice[i].second, at)};
                if (seen.insert(m).second) lattice.push_back(m);
            }
        }

        // side containment tables (sub id contains the constraints of sup id)
        auto side_contains = [&](const SideReg& reg, std::vector<std::vector<bool>>& tbl) {
            size_t n = reg.rows.size();
            tbl.assign(n, std::vector<bool>(n, false));
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j) {
                    if (reg.dim[i] > reg.dim[j]) continue;
                    tbl[i][j] = rowspace_contains(F, reg.rows[i], reg.rows[j]);
                }
        };
        std::vector<std::vector<bool>> cont_s, cont_t;
        side_contains(regs, cont_s);
        side_contains(regt, cont_t);

        // Mobius inversion from the top of the intersection lattice
        auto dim_of = [&](std::pair<int, int> e) {
            return regs.dim[e.first] + regt.dim[e.second];
        };
        std::vector<size_t> order(lattice.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
            int di = dim_of(lattice[i]), dj = dim_of(lattice[j]);
            if (di != dj) return di > dj;
            return lattice[i] < lattice[j];
        });
        std::vector<Int> mu(lattice.size(), 0);
        Int total = int_pow(Int(q), static_cast<unsigned>(regs.dim[top_s] + regt.dim[top_t]));
        for (size_t oi = 0; oi < order.size(); ++oi) {
            size_t i = order[oi];
            Int s = 1;  // the top element E_w contributes mu = 1
            for (size_t oj = 0; oj < oi; ++oj) {
                size_t j = order[oj];
                if (dim_of(lattice[j]) <= dim_of(lattice[i])) continue;
                if (cont_s[lattice[i].first][lattice[j].first] &&
                    cont_t[lattice[i].second][lattice[j].second])
                    s += mu[j];
            }
            mu[i] = -s;
            total += mu[i] * int_pow(Int(q), static_cast<unsigned>(dim_of(lattice[i])));
        }
        return total;
    };

    int jobs = std::max(1, b.jobs);
    std::vector<Int> partial(jobs, 0);
    std::vector<std::string> errors(jobs);
    auto worker = [&](int job) {
        try {
            Int acc = 0;
            for (size_t i = job; i < ws.size(); i += static_cast<size_t>(jobs))
                acc += per_w(ws[i]);
            partial[job] = acc;
        } catch (const std::exception& e) {
            errors[job] = e.what();
        }
    };
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> th;
        for (int j = 0; j < jobs; ++j) th.emplace_back(worker, j);
        for (auto& t : th) t.join();
    }
    for (auto& e : errors)
        if (!e.empty()) throw ResourceCapError(e);
    Int torsor = 0;
    for (auto& p : partial) torsor += p;

    CountReport rep;
    rep.klass = picard::class_text(cls);
    rep.method = "sieve";
    finish_report(rep, F, cd.h, torsor, true, t0);
    return rep;
}

// ---------------------------------------------------------------------------
// virtual main term

Rat main_term_virtual(const PointTable& pt, const std::array<int, 4>& k, int gamma_max,
                      int deg_max) {
    if (gamma_max < 0 || deg_max < 0)
        throw PreconditionError("main_term_virtual: bounds must be >= 0");
    Rat sum = 0;
    uint64_t q = pt.field().q();
    ff::for_each_uk(pt, k, [&](const std::array<Divisor, 4>& w) {
        SaturatedElement xw = posetq::from_uk(pt, w);
        posetq::for_each_saturated_above(
            pt, xw, gamma_max, deg_max, [&](const SaturatedElement& x) {
                int64_t mu = posetq::mobius_global(pt, xw, x);
                if (mu == 0) return;
                auto comb = posetq::comb_functions(pt, x, nullptr, {0, 0, 0, 0});
                sum += Rat(mu) * q_inv_pow(q, static_cast<unsigned>(comb.gamma));
            });
    });
    return sum;
}

namespace {

// complete local sum over essentials above mult[wedge] at a degree-d point
const Rat& local_factor(uint64_t q, int mult, int d) {
    static std::map<std::tuple<uint64_t, int, int>, Rat> cache;
    static std::mutex mu_;
    std::lock_guard<std::mutex> lk(mu_);
    auto key = std::make_tuple(q, mult, d);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Chain base = posetq::atom_chain(0, mult);
    Rat sum = 0;
    for (const Chain& x : posetq::covers_and_essentials(base).essentials)
        sum += Rat(posetq::mobius_local(base, x)) *
               q_inv_pow(q, static_cast<unsigned>(x.gamma() * d));
    return cache.emplace(key, sum).first->second;
}

}  // namespace

Rat main_term_virtual_factored(const PointTable& pt, const std::array<int, 4>& k,
                               int deg_max) {
    uint64_t q = pt.field().q();
    Rat trivial_prod = 1;
    for (int d = 1; d <= deg_max; ++d)
        trivial_prod *= rat_pow(local_factor(q, 0, d), pt.count(d));
    Rat sum = 0;
    ff::for_each_uk(pt, k, [&](const std::array<Divisor, 4>& w) {
        Rat term = trivial_prod;
        for (int i = 0; i < 4; ++i)
            for (auto& [pid, mult] : w[i].m) {
                int d = pt.degree(pid);
                term *= local_factor(q, mult, d);
                if (d <= deg_max) term /= local_factor(q, 0, d);
            }
        sum += term;
    });
    return sum;
}

CountReport count_virtual(const SurfaceConfig& cfg, const PointTable& pt,
                          const picard::PicClass& cls, int gamma_max, int deg_max,
                          bool factored) {
    double t0 = now_seconds();
    const FieldTable& F = *cfg.F;
    uint32_t q = F.q();
    ClassData cd = class_data(cls);
    Rat mt = factored ? main_term_virtual_factored(pt, cd.k, deg_max)
                      : main_term_virtual(pt, cd.k, gamma_max, deg_max);
    Rat torsor = Rat(int_pow(Int(q), static_cast<unsigned>(2 * cd.a + 2 * cd.aprime + 4))) * mt;
    CountReport rep;
    rep.q = q;
    rep.klass = picard::class_text(cls);
    rep.method = "virtual";
    rep.torsor_exact = torsor;
    rep.torsor_count = numerator(torsor) / denominator(torsor);
    rep.curve_count = torsor / (Rat(q - 1) * Rat(q - 1));
    Rat bound =
        rat_pow(Rat(q, q - 1), 6) * Rat(int_pow(Int(q), static_cast<unsigned>(cd.h + 2)));
    rep.upper_bound_ok = rep.curve_count <= bound;
    std::ostringstream caps;
    caps << "gamma_max=" << gamma_max << ",deg_max=" << deg_max
         << (factored ? ",factored" : "");
    rep.caps = caps.str();
    rep.seconds = now_seconds() - t0;
    return rep;
}

// ---------------------------------------------------------------------------
// unobstructedness and coverage

UnobstructednessReport verify_unobstructedness(const SurfaceConfig& cfg, const PointTable& pt,
                                               const picard::PicClass& cls, int E_bound,
                                               uint64_t sample_limit, uint64_t seed) {
    ClassData cd = class_data(cls);
    int sumk = cd.k[0] + cd.k[1] + cd.k[2] + cd.k[3];
    if (!(2 * cd.a > sumk && 2 * cd.aprime > sumk))
        throw PreconditionError("verify_unobstructedness: requires 2a > sum k and 2a' > sum k");
    auto ws = ff::enumerate_uk(pt, cd.k);
    if (sample_limit && ws.size() > sample_limit) {
        std::mt19937_64 rng(seed);
        std::shuffle(ws.begin(), ws.end(), rng);
        ws.resize(sample_limit);
    }
    UnobstructednessReport rep;
    // every nontrivial extra chain costs gamma >= 2 per geometric point
    int deg_max = std::max(1, E_bound / 2);
    for (const auto& w : ws) {
        SaturatedElement xw = posetq::from_uk(pt, w);
        auto combw = posetq::comb_functions(pt, xw, nullptr, cd.k);
        posetq::for_each_saturated_above(
            pt, xw, static_cast<int>(combw.gamma) + E_bound, deg_max,
            [&](const SaturatedElement& x) {
                ++rep.checked;
                StratumDim d = stratum_dim(cfg, pt, cd.a, cd.aprime, x);
                if (d.unobstructed)
                    ++rep.unobstructed;
                else if (rep.counterexamples.size() < 32)
                    rep.counterexamples.push_back(x.text(pt));
            });
    }
    rep.fraction =
        rep.checked ? static_cast<double>(rep.unobstructed) / static_cast<double>(rep.checked)
                    : 1.0;
    return rep;
}

CoverageReport coverage_report(const SurfaceConfig& cfg, const PointTable& pt, int a,
                               const std::array<int, 4>& k) {
    const FieldTable& F = *cfg.F;
    CoverageReport rep;
    ff::for_each_uk(pt, k, [&](const std::array<Divisor, 4>& w) {
        ++rep.total;
        std::vector<std::vector<uint32_t>> rows;
        for (int i = 0; i < 4; ++i)
            for (auto& [pid, mult] : w[i].m)
                append_rows(rows, ff::divisibility_rows(F, a, cfg.phi1[i], pt.point(pid), mult));
        auto basis = kernel_basis(F, rows, 2 * (a + 1));
        bool found = false;
        for_each_proj_vector(F, basis, 2 * (a + 1), [&](const uint32_t* v) {
            if (found) return;
            if (block_nowhere_vanishing(F, v, a)) found = true;
        });
        if (found) ++rep.covered;
    });
    rep.fraction =
        rep.total ? static_cast<double>(rep.covered) / static_cast<double>(rep.total) : 1.0;
    return rep;
}

}  // namespace dp4::strata
