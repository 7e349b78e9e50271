#pragma once

// The rank-6 Picard lattice of a split degree-4 del Pezzo surface realized
// as P^1 x P^1 blown up at four points: intersection pairing, the 16
// (-1)-classes, nef cone membership, presentations as blow-ups of P^1 x P^1,
// class invariants, the chamber decomposition by ordered disjoint triples,
// the piecewise linear function ell with its shrunk cones, and the alpha
// constant of rational polyhedral subcones.
//
// Basis order: (F, F', E1, E2, E3, E4) with F^2 = F'^2 = 0, F.F' = 1,
// Ei^2 = -1, and -K = 2F + 2F' - sum Ei.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dp4/errors.hpp"
#include "dp4/numeric.hpp"

namespace dp4::picard {

struct PicClass {
    std::array<int64_t, 6> v{0, 0, 0, 0, 0, 0};

    friend PicClass operator+(PicClass a, const PicClass& b) {
        for (int i = 0; i < 6; ++i) a.v[i] += b.v[i];
        return a;
    }
    friend PicClass operator-(PicClass a, const PicClass& b) {
        for (int i = 0; i < 6; ++i) a.v[i] -= b.v[i];
        return a;
    }
    friend PicClass operator*(int64_t c, PicClass a) {
        for (auto& x : a.v) x *= c;
        return a;
    }
    bool operator==(const PicClass& o) const { return v == o.v; }
    bool operator<(const PicClass& o) const { return v < o.v; }
    bool is_zero() const {
        for (auto x : v)
            if (x) return false;
        return true;
    }
};

int64_t pairing(const PicClass& a, const PicClass& b);

PicClass class_F();
PicClass class_Fprime();
PicClass class_E(int i);  // i in 0..3
PicClass minus_K();

// All 16 classes C with C^2 = -1 and -K.C = 1, in canonical order.
const std::vector<PicClass>& minus_one_classes();

// All 960 ordered triples of pairwise disjoint (-1)-classes (indices into
// minus_one_classes()), lexicographic.
const std::vector<std::array<int, 3>>& disjoint_triples();

bool is_nef(const PicClass& a);

struct Invariants {
    int64_t h = 0, a = 0, aprime = 0;
    std::array<int64_t, 4> k{0, 0, 0, 0};
};

// An ordered pair of nef conic classes meeting once, together with the four
// exceptional classes orthogonal to both.
struct Presentation {
    PicClass C, Cprime;
    std::array<PicClass, 4> e;
};

const std::vector<Presentation>& presentations();
const Presentation& standard_presentation();  // (F, F', E1..E4)

// h = -K.a, a = C.a, a' = C'.a, k_i = e_i.a; requires a nef.
Invariants class_invariants(const PicClass& a, const Presentation& rho);
Invariants standard_invariants(const PicClass& a);

// Nef class from standard invariants: a' F + a F' - sum k_i E_i.
PicClass class_from_invariants(int64_t a, int64_t aprime, const std::array<int64_t, 4>& k);

// Chamber of the nef cone attached to an ordered disjoint triple: the
// simplicial cone spanned by -K, -psi3*K, -psi2*K, psi1*H, psi1*F1, psi1*F2.
struct Chamber {
    std::array<int, 3> triple;
    std::array<PicClass, 6> gens;
    std::array<std::array<int64_t, 6>, 6> inverse;  // exact inverse times det
    int64_t det = 0;                                // determinant of the generator matrix
};

const std::vector<Chamber>& chambers();

struct Decomposition {
    std::array<int64_t, 6> coeff;  // (b, b3, b2, x, y1, y2)
    int chamber_index = -1;
};

// First admissible decomposition in canonical chamber order; requires nef
// integral input.
Decomposition chamber_decompose(const PicClass& a);

// ell(alpha) = max over presentations of min(J_rho, R_rho) with
// J_rho = (1/32) min(2C.a - sum e_i.a, 2C'.a - sum e_i.a) and
// R_rho = min_i e_i.a.  Exact rational.
Rat ell(const PicClass& a);

struct EllResult {
    Rat ell;
    bool member = false;  // ell(a) >= eps * (-K.a)
};
EllResult ell_and_cone(const PicClass& a, const Rat& eps);

// Rational polyhedral subcones of the nef cone that the alpha/Ehrhart
// operations understand.  The shrunk cone is carried as its defining
// predicate: a union of chambers rather than a facet description.
struct Cone {
    enum class Kind { FullNef, Rays, Shrunk };
    Kind kind = Kind::FullNef;
    std::vector<PicClass> rays;  // Kind::Rays
    Rat epsilon = 0;             // Kind::Shrunk

    static Cone full_nef() { return Cone{}; }
    static Cone from_rays(std::vector<PicClass> r) { return Cone{Kind::Rays, std::move(r), 0}; }
    static Cone shrunk(const Rat& eps) { return Cone{Kind::Shrunk, {}, eps}; }

    bool contains(const PicClass& a) const;
};

// Extreme rays of the full nef cone (primitive integral generators).
const std::vector<PicClass>& nef_extreme_rays();

struct AlphaResult {
    Rat value = 0;           // exact when is_exact, else the lattice estimate
    bool is_exact = false;
    bool fallback_warning = false;  // exact mode requested but unsupported
    int dilation = 0;               // dilation used by lattice mode
};

// Peyre's alpha constant rho * Vol{a in cone : -K.a <= 1}.  Exact mode is
// supported for the full nef cone (chamber triangulation) and for cones
// spanned by at most 6 rays; other cones fall back to lattice mode with a
// warning flag.
AlphaResult alpha_constant(const Cone& cone, bool exact_mode, int dilation = 30);

// #{alpha integral in cone : -K.alpha <= m}, by bounded enumeration.
uint64_t ehrhart_count(const Cone& cone, int m);

// Canonical textual class form "a,a',k1,k2,k3,k4" (standard presentation).
PicClass parse_class(const std::string& text);
std::string class_text(const PicClass& a);

}  // namespace dp4::picard
