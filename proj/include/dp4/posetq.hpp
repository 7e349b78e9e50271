#pragma once

// The incidence poset Q of subspaces of V = V1 + V2 attached to the four
// blown-up points: { V, V1, V2, 0 } together with l_{i,1}+l_{i,2}, l_{i,1},
// l_{i,2} for i = 1..4 (16 elements).  Chains encode saturated multiplicity
// functions at one closed point; saturated elements are finitely supported
// maps from closed points to chains.  This module is purely combinatorial:
// no field data enters except through point degrees.
//
// Chain order convention: x >= w iff f_x(n) is contained in f_w(n) for every
// n (deeper incidence conditions are larger), the reverse of the pointwise
// subspace order.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dp4/errors.hpp"
#include "dp4/ffpoly.hpp"

namespace dp4::posetq {

// Element ids: 0 = the zero subspace, 1..8 = l_{i,j} (i = 1..4, j = 1,2,
// id = 1 + 2*(i-1) + (j-1)), 9..12 = l_{i,1}+l_{i,2}, 13 = V1, 14 = V2,
// 15 = V.  V1 contains the l_{i,1}, V2 the l_{i,2}.
using QElem = uint8_t;

inline constexpr QElem kZero = 0;
inline constexpr QElem kV1 = 13;
inline constexpr QElem kV2 = 14;
inline constexpr QElem kTop = 15;
inline QElem line_elem(int i, int j) { return static_cast<QElem>(1 + 2 * i + j); }  // i, j 0-based
inline QElem wedge_elem(int i) { return static_cast<QElem>(9 + i); }                // l_{i,1}+l_{i,2}

QElem meet(QElem a, QElem b);
bool q_leq(QElem a, QElem b);  // subspace containment a <= b

// gamma and rank weights (V has weight 0).
int gamma_weight(QElem q);
int rank_weight(QElem q);

// A chain at one point: strictly increasing subspaces with multiplicities,
// written m_1[q_1] + ... + m_r[q_r]; the empty chain is the trivial one.
struct Chain {
    std::vector<std::pair<QElem, uint16_t>> steps;

    bool trivial() const { return steps.empty(); }
    int total_mult() const;
    QElem value_at(int n) const;  // f(n), n >= 1
    int gamma() const;
    int rank() const;
    int mult_of(QElem q) const;  // occurrences of q
    bool valid() const;          // strictly increasing comparable steps
    bool operator==(const Chain& o) const { return steps == o.steps; }
    bool operator<(const Chain& o) const { return steps < o.steps; }
    std::string text() const;
};

Chain trivial_chain();
Chain atom_chain(int i, int mult);  // mult[l_{i,1}+l_{i,2}]
Chain single_chain(QElem q, int mult = 1);

// Chain order: x >= w iff f_x(n) is contained in f_w(n) for all n.
bool chain_leq(const Chain& lo, const Chain& hi);

// Least upper bound: pointwise meet in Q.
Chain chain_join(const Chain& a, const Chain& b);

// Saturation: least meet-preserving function above a monotone multiplicity
// function g on the 15 proper elements (indexed by QElem, V omitted);
// returns the corresponding chain.  Throws on non-monotone input.
Chain saturate(const std::array<int, 15>& g);

// Multiplicity function of a chain (inverse of saturate on its image).
std::array<int, 15> chain_multiplicities(const Chain& f);

struct CoversEssentials {
    std::vector<Chain> covers;      // all f with f0 covered by f
    std::vector<Chain> essentials;  // joins of subsets of covers, incl. f0
};
CoversEssentials covers_and_essentials(const Chain& f0);

// Mobius function of the interval [f0, f] in the chain order, by the
// recursion mu(f0,f0) = 1, mu(f0,f) = -sum_{f0 <= y < f} mu(f0,y), memoized.
int64_t mobius_local(const Chain& f0, const Chain& f);

// All chains in the closed interval [f0, f].
std::vector<Chain> chain_interval(const Chain& f0, const Chain& f);

// All chains g >= base with gamma(g) <= gamma_max, deterministic order.
std::vector<Chain> chains_above(const Chain& base, int gamma_max);

// A saturated element: finitely supported map from closed points to chains.
struct SaturatedElement {
    std::vector<std::pair<uint32_t, Chain>> at;  // sorted by point id, nontrivial

    const Chain& chain_at(uint32_t id) const;
    bool operator==(const SaturatedElement& o) const { return at == o.at; }
    bool operator<(const SaturatedElement& o) const { return at < o.at; }
    std::string text(const ff::PointTable& pt) const;
};

SaturatedElement from_uk(const ff::PointTable& pt, const std::array<ff::Divisor, 4>& w);

bool sat_leq(const ff::PointTable& pt, const SaturatedElement& w, const SaturatedElement& x);

// Product over supporting points of the local Mobius values.
int64_t mobius_global(const ff::PointTable& pt, const SaturatedElement& w,
                      const SaturatedElement& x);

struct CombRecord {
    int64_t gamma = 0, rank = 0, supp = 0;  // degree-weighted
    int64_t kappa = 0;                      // 2*gamma(T) - rank(T) - 2|Supp(T)| for T = (w <= x)
    int64_t E = 0;                          // 4m0 + 3 sum m_l + 2 sum m_V + 2 sum m_wedge - 2 sum k
};

// Combinatorial functions of x (degree-weighted over geometric points); the
// pair statistics use w when given (otherwise the empty element) and the
// four-tuple k for the E function.
CombRecord comb_functions(const ff::PointTable& pt, const SaturatedElement& x,
                          const SaturatedElement* w, const std::array<int, 4>& k);

// All saturated x >= w supported on supp(w) and closed points of degree
// <= deg_max, with gamma(x) <= gamma_max; deterministic order.
void for_each_saturated_above(const ff::PointTable& pt, const SaturatedElement& w,
                              int gamma_max, int deg_max,
                              const std::function<void(const SaturatedElement&)>& fn);
std::vector<SaturatedElement> enumerate_saturated_above(const ff::PointTable& pt,
                                                        const SaturatedElement& w,
                                                        int gamma_max, int deg_max);

// Parse the textual chain syntax "m0[0]+m1[l1,1]+m2[l1,1+l1,2]"; element
// names: 0, V1, V2, li,j, li,1+li,2 (i, j one-based).
Chain parse_chain(const std::string& text);

}  // namespace dp4::posetq
