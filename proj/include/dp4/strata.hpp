#pragma once

// Section spaces E_w for the blown-up surface, their linear stratification,
// rank and unobstructedness computations, and the curve counters: direct
// enumeration, fibered enumeration over U_k, the exact subspace-lattice
// sieve, and the virtual main term.
//
// A point of the torsor is a pair of sections s = (s0, s1) of degree a and
// t = (t0, t1) of degree a'; the surface is P^1 x P^1 blown up at
// ((p_i, p'_i)).  Every incidence condition is linear and touches only one
// of the two coordinate blocks, so E_w always splits as an s-space plus a
// t-space.

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dp4/ffpoly.hpp"
#include "dp4/numeric.hpp"
#include "dp4/picard.hpp"
#include "dp4/posetq.hpp"

namespace dp4::strata {

struct SurfaceConfig {
    std::shared_ptr<ff::FieldTable> F;
    // blown-up points as projective pairs (u : v) on each factor
    std::array<std::pair<uint32_t, uint32_t>, 4> p1, p2;
    std::array<ff::PairFunctional, 4> phi1, phi2;  // kernels l_{i,1}, l_{i,2}

    uint32_t q() const { return F->q(); }

    // Default configuration: p_i = p'_i = the first four elements of the
    // canonical field order, with infinity as the fourth point when q = 3.
    static SurfaceConfig standard(uint32_t q);
    static SurfaceConfig custom(uint32_t q,
                                const std::array<std::pair<uint32_t, uint32_t>, 4>& p1,
                                const std::array<std::pair<uint32_t, uint32_t>, 4>& p2);
};

struct IncidenceSystem {
    int a = 0, aprime = 0;
    int scols = 0, tcols = 0;  // 2(a+1) and 2(a'+1)
    std::vector<std::vector<uint32_t>> srows, trows;
    posetq::SaturatedElement x;
    int ncols() const { return scols + tcols; }
};

IncidenceSystem incidence_system(const SurfaceConfig& cfg, const ff::PointTable& pt,
                                 int a, int aprime, const posetq::SaturatedElement& x);

struct StratumDim {
    int actual = 0;
    int expected = 0;  // max(2(a+1)+2(a'+1) - gamma(x), 0)
    bool unobstructed = false;
    int64_t n_const = 0;  // 2a + 2a' + 4 - gamma(x), the paper's n_{a,a',k,T}
};

StratumDim stratum_dim(const SurfaceConfig& cfg, const ff::PointTable& pt, int a,
                       int aprime, const posetq::SaturatedElement& x);

struct Budgets {
    uint64_t naive = uint64_t{1} << 30;   // candidate tuples
    uint64_t fiber = uint64_t{1} << 26;   // kernel points per fiber
    uint64_t lattice_cap = 200000;        // sieve lattice size per fiber
    int jobs = 1;
};

struct CountReport {
    uint32_t q = 0;
    std::string klass;
    std::string method;
    Int torsor_count = 0;   // exact integer (enumerative methods)
    Rat torsor_exact = 0;   // torsor_count, or the virtual-method rational
    Rat curve_count = 0;    // torsor / (q-1)^2
    double seconds = 0;
    std::string caps;
    bool upper_bound_ok = true;  // #M <= (1-1/q)^{-6} q^{h+2}
};

CountReport count_naive(const SurfaceConfig& cfg, const ff::PointTable& pt,
                        const picard::PicClass& cls, const Budgets& b = {});
CountReport count_fibered(const SurfaceConfig& cfg, const ff::PointTable& pt,
                          const picard::PicClass& cls, const Budgets& b = {});
CountReport count_sieve_exact(const SurfaceConfig& cfg, const ff::PointTable& pt,
                              const picard::PicClass& cls, const Budgets& b = {});

// sum over w in U_k and saturated x >= w (gamma(x) <= gamma_max, new support
// of degree <= deg_max) of mu(w, x) q^{-gamma(x)}, exact.
Rat main_term_virtual(const ff::PointTable& pt, const std::array<int, 4>& k,
                      int gamma_max, int deg_max);

// Same sum with the complete local Mobius sums per point (no gamma cutoff):
// product over supp(w) of the atom factor and over the remaining points of
// degree <= deg_max of the trivial factor.
Rat main_term_virtual_factored(const ff::PointTable& pt, const std::array<int, 4>& k,
                               int deg_max);

// The predictor report q^{2a+2a'+4} * main term as a CountReport.
CountReport count_virtual(const SurfaceConfig& cfg, const ff::PointTable& pt,
                          const picard::PicClass& cls, int gamma_max, int deg_max,
                          bool factored = false);

struct UnobstructednessReport {
    uint64_t checked = 0;
    uint64_t unobstructed = 0;
    double fraction = 1.0;
    std::vector<std::string> counterexamples;  // textual (w, x) pairs
};

// Sweep pairs w < x with E(w < x) <= E_bound; sample_limit = 0 means
// exhaustive.  Requires 2a > sum k and 2a' > sum k.
UnobstructednessReport verify_unobstructedness(const SurfaceConfig& cfg,
                                               const ff::PointTable& pt,
                                               const picard::PicClass& cls, int E_bound,
                                               uint64_t sample_limit = 0,
                                               uint64_t seed = 0);

struct CoverageReport {
    uint64_t total = 0;
    uint64_t covered = 0;
    double fraction = 1.0;
};

// Fraction of w in U_k admitting a nowhere-vanishing degree-a pair s with
// phi_{i,1}(s) divisible by T_i for every i.
CoverageReport coverage_report(const SurfaceConfig& cfg, const ff::PointTable& pt, int a,
                               const std::array<int, 4>& k);

// Row reduction over F_q (shared by tests and the sieve).
int rank_of(const ff::FieldTable& F, std::vector<std::vector<uint32_t>> rows);
std::vector<std::vector<uint32_t>> kernel_basis(const ff::FieldTable& F,
                                                const std::vector<std::vector<uint32_t>>& rows,
                                                int ncols);

}  // namespace dp4::strata
