#pragma once

// Exact-rational Euler products over the closed points of P^1: the Tamagawa
// constant, the virtual height zeta function with its residue, the
// Mobius-coefficient cross-checks against the poset sums, the Manin
// predictor, and the explicit Betti-bound constant.
//
// Values are kept in factored form (one exact rational factor per point
// degree, with its closed-point count as exponent); expanding a product with
// astronomically many factors into a single fraction is neither possible nor
// needed, so numeric display goes through doubles with an explicit tail
// bound while every identity check stays exact per factor.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dp4/errors.hpp"
#include "dp4/ffpoly.hpp"
#include "dp4/numeric.hpp"

namespace dp4::zeta {

// number of closed points of degree d on P^1 over F_q
Int closed_point_count(uint64_t q, int d);

// #S(F_{q^d}) = q^{2d} + 6 q^d + 1
Int surface_point_count(uint64_t q, int d);

struct EulerProduct {
    uint64_t q = 0;
    int D = 0;  // truncation degree
    Rat prefactor = 1;
    std::vector<std::pair<Rat, Int>> factors;  // (degree-d factor, N_d)
    double tail_bound = 0;  // |bare(D) - bare(infinity)| estimate for the bare product

    double bare() const;    // product of factors only
    double value() const;   // prefactor * bare
    // exact single-fraction expansion; feasible only for small truncations
    bool expandable(double digit_limit = 2e5) const;
    Rat expand() const;  // prefactor included; throws if not expandable
};

// tau = q^2 (1-1/q)^{-6} prod (1-q^{-d})^6 #S(F_{q^d}) / q^{2d}
EulerProduct tamagawa(uint64_t q, int D);

// the residue-side Euler product (1-1/q)^{-4} prod (1-z)^6 (1 + 6z + z^2)
EulerProduct residue_closed_form(uint64_t q, int D);

// local virtual-zeta factor at a degree-d point, numeric arguments; throws
// on divergent t (needs |t_i| < q)
Rat virtual_zeta_factor(uint64_t q, int d, const std::array<Rat, 4>& t);

struct ResidueCompare {
    EulerProduct closed_form;
    EulerProduct abel_limit;       // same value assembled through the t -> 1 route
    Rat max_factor_difference;     // exact, must be 0
};
ResidueCompare residue_compare(uint64_t q, int D);

// truncated multivariate series in t_1..t_4 and z = 1/q: exponent tuple plus
// z-degree mapped to an exact integer coefficient (the (q t_i)^{dm} powers of
// q are folded into the coefficient)
using TSeries = std::map<std::pair<std::array<int, 4>, int>, Int>;

// the formal local factor of the virtual height zeta function at one point
// degree, truncated to t-exponents <= tmax and z-degree <= gamma_max
TSeries virtual_zeta_factor_formal(uint64_t q, int d, const std::array<int, 4>& tmax,
                                   int gamma_max);

std::string series_text(const TSeries& s);

struct CoefficientCompare {
    Rat poset_sum;            // q^{sum k} * truncated main term
    Rat product_coefficient;  // t^k coefficient of the truncated Euler product
    Rat difference;
    int gamma_max = 0, deg_max = 0;
};

// both sides truncated identically: divisor/chain support on closed points of
// degree <= deg_max, gamma(x) (= z-degree) <= gamma_max.  A per-side degree
// override that disagrees is a configuration error.
CoefficientCompare mobius_coefficient_compare(uint64_t q, const std::array<int, 4>& k,
                                              int gamma_max, int deg_max,
                                              int deg_max_series = -1);

struct PredictorReport {
    uint64_t q = 0;
    int d = 0;
    Rat eps = 0;
    Rat alpha_value = 0;
    bool alpha_exact = false;
    double tau = 0;
    double tau_tail = 0;
    double leading = 0;      // (1-1/q)^{-1} alpha tau q^d d^5
    double ehrhart_sum = 0;  // sum over classes in the cone with h <= d of tau q^h
};

// eps = 0 means the full nef cone (alpha = 1/180 exactly)
PredictorReport manin_predictor(uint64_t q, const Rat& eps, int d, int D = 25,
                                int dilation = 30);

// (max(d_r, 2) + 2)^{2n + 4 + sum d_i} for a complete intersection of the
// given multidegree in P^n; degrees must be nonempty and nondecreasing
Int betti_constant(int n, const std::vector<int>& degrees);

}  // namespace dp4::zeta
