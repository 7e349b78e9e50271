#pragma once

// Finite field arithmetic, homogeneous binary forms on P^1, closed points,
// effective divisors, and the constraint rows that incidence conditions
// impose on section coefficients.
//
// Conventions.  A form of degree n is sum_j c_j u^{n-j} v^j.  The affine
// coordinate is u (dehomogenize with v = 1); the point at infinity is the
// zero locus of the form v, i.e. (1:0).  Closed points are monic-in-u
// irreducible forms, plus v itself for infinity.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dp4/errors.hpp"

namespace dp4::ff {

// F_q with q = p^e <= 2^16.  Elements are indices in the canonical order
// 0, 1 = g^0, g, g^2, ..., g^{q-2} for a fixed generator g.  All tables are
// built once in the constructor; afterwards every method is const and safe
// for unrestricted concurrent use.
class FieldTable {
public:
    explicit FieldTable(uint32_t q, uint32_t q_bound = (1u << 16));

    uint32_t q() const { return q_; }
    uint32_t p() const { return p_; }
    uint32_t e() const { return e_; }

    uint32_t add(uint32_t a, uint32_t b) const {
        if (add_tab_) return add_tab_[a * q_ + b];
        return add_zech(a, b);
    }
    uint32_t sub(uint32_t a, uint32_t b) const { return add(a, neg(b)); }
    uint32_t mul(uint32_t a, uint32_t b) const {
        if (mul_tab_) return mul_tab_[a * q_ + b];
        if (a == 0 || b == 0) return 0;
        return 1 + mod_qm1(a - 1 + b - 1);
    }
    uint32_t neg(uint32_t a) const { return neg_[a]; }
    uint32_t inv(uint32_t a) const;
    uint32_t div(uint32_t a, uint32_t b) const { return mul(a, inv(b)); }
    uint32_t pow(uint32_t a, uint64_t n) const;
    uint32_t frobenius(uint32_t a) const { return pow(a, p_); }
    uint32_t generator() const { return q_ > 2 ? 2u : 1u; }  // index of g

    // Multiplicative order of a nonzero element (exhaustive; test support).
    uint64_t order(uint32_t a) const;

    // Polynomial representation as a base-p digit vector (degree e), used by
    // tests and for printing.  value(a) packs the digits in base p.
    std::vector<uint32_t> digits(uint32_t a) const;
    uint64_t value(uint32_t a) const;
    std::string to_string(uint32_t a) const;

private:
    uint32_t mod_qm1(uint32_t x) const { return x >= q_ - 1 ? x - (q_ - 1) : x; }
    uint32_t add_zech(uint32_t a, uint32_t b) const;

    uint32_t q_ = 0, p_ = 0, e_ = 0;
    std::vector<uint32_t> exp_poly_;  // g^i as packed digits
    std::vector<uint32_t> log_;       // packed digits -> exponent + 1 (0 for zero)
    std::vector<uint32_t> zech_;      // zech[n]: 1 + g^n = g^{zech[n]}, q-1 if zero
    std::vector<uint32_t> neg_;
    std::vector<uint32_t> inv_;
    std::vector<uint32_t> add_flat_, mul_flat_;  // full tables when q <= 256
    const uint32_t* add_tab_ = nullptr;
    const uint32_t* mul_tab_ = nullptr;
};

// Homogeneous binary form of degree n: coeffs[j] multiplies u^{n-j} v^j.
struct BinaryForm {
    int deg = 0;
    std::vector<uint32_t> c;  // size deg + 1

    BinaryForm() : deg(0), c(1, 0) {}
    BinaryForm(int n, std::vector<uint32_t> coeffs) : deg(n), c(std::move(coeffs)) {}
    static BinaryForm zero(int n) { return BinaryForm(n, std::vector<uint32_t>(n + 1, 0)); }

    bool is_zero() const {
        for (uint32_t x : c)
            if (x) return false;
        return true;
    }
    // v-adic valuation: least j with c_j != 0 (only meaningful when nonzero).
    int v_valuation() const;
    // u-polynomial p(u) = G(u, 1), ascending coefficients, trimmed.
    std::vector<uint32_t> dehomogenize() const;
};

BinaryForm form_from_poly(int deg, const std::vector<uint32_t>& poly_u, int v_power);
uint32_t eval_form(const FieldTable& F, const BinaryForm& f, uint32_t xu, uint32_t xv);

// Univariate polynomials in u, ascending coefficients, no trailing zeros.
using Poly = std::vector<uint32_t>;
int poly_deg(const Poly& a);  // -1 for zero
Poly poly_trim(Poly a);
Poly poly_mul(const FieldTable& F, const Poly& a, const Poly& b);
Poly poly_mod(const FieldTable& F, Poly a, const Poly& b);
Poly poly_monic(const FieldTable& F, Poly a);
Poly poly_gcd(const FieldTable& F, Poly a, Poly b);
Poly poly_pow(const FieldTable& F, const Poly& a, unsigned n);

// A closed point of P^1 over F_q: either infinity (the form v) or a monic
// irreducible u-polynomial of degree d.
struct ClosedPoint {
    bool infinity = false;
    Poly monic;  // ascending coefficients, monic[d] = 1; empty when infinity

    int degree() const { return infinity ? 1 : poly_deg(monic); }
    bool operator==(const ClosedPoint& o) const {
        return infinity == o.infinity && monic == o.monic;
    }
    std::string text(const FieldTable& F) const;
};

// Exactly the degree-d closed points, canonical order (affine points by
// canonical field order, then infinity, for d = 1; monic irreducibles in
// enumeration order for d >= 2).
std::vector<ClosedPoint> closed_points(const FieldTable& F, int d);

// Closed points up to a degree bound with dense ids; immutable after
// construction.  Also provides factorization by trial division.
class PointTable {
public:
    PointTable(const FieldTable& F, int max_degree);

    const FieldTable& field() const { return *F_; }
    int max_degree() const { return maxdeg_; }
    uint32_t count(int d) const { return static_cast<uint32_t>(by_deg_[d].size()); }
    uint32_t total() const { return static_cast<uint32_t>(pts_.size()); }
    uint32_t id(int d, uint32_t i) const { return offset_[d] + i; }
    int degree(uint32_t id) const { return deg_of_[id]; }
    const ClosedPoint& point(uint32_t id) const { return pts_[id]; }
    uint32_t infinity_id() const { return inf_id_; }

    // Factor a nonzero monic u-polynomial into (point id, multiplicity).
    // Requires deg <= max_degree for complete factorization.
    std::vector<std::pair<uint32_t, int>> factor(const Poly& monic) const;

private:
    const FieldTable* F_;
    int maxdeg_;
    std::vector<ClosedPoint> pts_;
    std::vector<int> deg_of_;
    std::vector<std::vector<uint32_t>> by_deg_;  // degree -> ids
    std::vector<uint32_t> offset_;
    uint32_t inf_id_ = 0;
};

// Finitely supported multiplicity map on closed points (an effective divisor).
struct Divisor {
    std::vector<std::pair<uint32_t, int>> m;  // sorted by point id, mult >= 1

    int degree(const PointTable& pt) const;
    bool disjoint_from(const Divisor& o) const;
    int mult_at(uint32_t id) const;
    bool operator==(const Divisor& o) const { return m == o.m; }
    std::string text(const PointTable& pt) const;
};

// All effective divisors of degree n; count (q^{n+1}-1)/(q-1); deterministic order.
std::vector<Divisor> divisors_of_degree(const PointTable& pt, int n);

// Streams the tuples (T_1..T_4) with deg T_i = k_i and pairwise disjoint
// supports, in deterministic order.
void for_each_uk(const PointTable& pt, const std::array<int, 4>& k,
                 const std::function<void(const std::array<Divisor, 4>&)>& fn);
std::vector<std::array<Divisor, 4>> enumerate_uk(const PointTable& pt,
                                                 const std::array<int, 4>& k);

// Linear functional on the 2-space of a section pair: (A, B) -> la*A + mu*B.
struct PairFunctional {
    uint32_t lambda = 0;
    uint32_t mu = 0;
};

struct IntersectionResult {
    bool whole_curve = false;
    Divisor div;
    int deg = 0;
};

// gcd(phi1(s), phi2(t)) as a divisor; WholeCurve when both images vanish
// identically.  s = (s0, s1) of degree a, t = (t0, t1) of degree a'; both
// pairs must be nowhere vanishing.
IntersectionResult intersection_multiplicity(const PointTable& pt,
                                             const BinaryForm& s0, const BinaryForm& s1,
                                             const BinaryForm& t0, const BinaryForm& t1,
                                             PairFunctional phi1, PairFunctional phi2);

// Returns m*deg(pi) rows over F_q on the 2(n+1) coefficients of a pair of
// degree-n forms (A-coeffs then B-coeffs), whose joint kernel is exactly
// { (A,B) : pi^m | functional(A,B) }.  Rows may be dependent when
// m*deg(pi) > n+1; rank deficiency is meaningful, not an error.
std::vector<std::vector<uint32_t>> divisibility_rows(const FieldTable& F, int n,
                                                     PairFunctional functional,
                                                     const ClosedPoint& pi, int m);

// gcd of two forms as (v-power, monic u-poly); both zero is the caller's case.
std::pair<int, Poly> form_gcd(const FieldTable& F, const BinaryForm& g1, const BinaryForm& g2);

// Nowhere-vanishing test for a pair of degree-n forms: no common root on P^1
// over the algebraic closure (gcd of the two forms is a unit).
bool pair_nowhere_vanishing(const FieldTable& F, const BinaryForm& a, const BinaryForm& b);

}  // namespace dp4::ff
