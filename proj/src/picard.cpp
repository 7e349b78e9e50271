#include "dp4/picard.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace dp4::picard {

namespace {
// Gram matrix of the basis (F, F', E1..E4).
constexpr int64_t kGram[6][6] = {
    {0, 1, 0, 0, 0, 0},  {1, 0, 0, 0, 0, 0},  {0, 0, -1, 0, 0, 0},
    {0, 0, 0, -1, 0, 0}, {0, 0, 0, 0, -1, 0}, {0, 0, 0, 0, 0, -1},
};
}  // namespace

int64_t pairing(const PicClass& a, const PicClass& b) {
    int64_t s = 0;
    for (int i = 0; i < 6; ++i) {
        if (!a.v[i]) continue;
        for (int j = 0; j < 6; ++j)
            if (kGram[i][j]) s += a.v[i] * kGram[i][j] * b.v[j];
    }
    return s;
}

PicClass class_F() { return PicClass{{1, 0, 0, 0, 0, 0}}; }
PicClass class_Fprime() { return PicClass{{0, 1, 0, 0, 0, 0}}; }
PicClass class_E(int i) {
    PicClass c;
    c.v[2 + i] = 1;
    return c;
}
PicClass minus_K() { return PicClass{{2, 2, -1, -1, -1, -1}}; }

const std::vector<PicClass>& minus_one_classes() {
    static const std::vector<PicClass> lines = [] {
        std::vector<PicClass> out;
        for (int i = 0; i < 4; ++i) out.push_back(class_E(i));
        for (int i = 0; i < 4; ++i) out.push_back(class_F() - class_E(i));
        for (int i = 0; i < 4; ++i) out.push_back(class_Fprime() - class_E(i));
        for (int omit = 0; omit < 4; ++omit) {
            PicClass c = class_F() + class_Fprime();
            for (int i = 0; i < 4; ++i)
                if (i != omit) c = c - class_E(i);
            out.push_back(c);
        }
        for (const auto& c : out) {
            if (pairing(c, c) != -1 || pairing(minus_K(), c) != 1)
                throw std::logic_error("bad (-1)-class table");
        }
        return out;
    }();
    return lines;
}

const std::vector<std::array<int, 3>>& disjoint_triples() {
    static const std::vector<std::array<int, 3>> triples = [] {
        const auto& L = minus_one_classes();
        std::vector<std::array<int, 3>> out;
        for (int a = 0; a < 16; ++a)
            for (int b = 0; b < 16; ++b) {
                if (b == a || pairing(L[a], L[b]) != 0) continue;
                for (int c = 0; c < 16; ++c) {
                    if (c == a || c == b) continue;
                    if (pairing(L[a], L[c]) || pairing(L[b], L[c])) continue;
                    out.push_back({a, b, c});
                }
            }
        return out;
    }();
    return triples;
}

bool is_nef(const PicClass& a) {
    for (const auto& l : minus_one_classes())
        if (pairing(a, l) < 0) return false;
    return true;
}

namespace {
std::vector<PicClass> conic_classes() {
    // C^2 = 0, -K.C = 2, nef; canonical order
    std::vector<PicClass> out;
    out.push_back(class_F());
    out.push_back(class_Fprime());
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            out.push_back(class_F() + class_Fprime() - class_E(i) - class_E(j));
    PicClass sumE;
    for (int i = 0; i < 4; ++i) sumE = sumE + class_E(i);
    out.push_back(2 * class_F() + class_Fprime() - sumE);
    out.push_back(class_F() + 2 * class_Fprime() - sumE);
    for (const auto& c : out)
        if (pairing(c, c) != 0 || pairing(minus_K(), c) != 2 || !is_nef(c))
            throw std::logic_error("bad conic table");
    return out;
}
}  // namespace

const std::vector<Presentation>& presentations() {
    static const std::vector<Presentation> ps = [] {
        auto conics = conic_classes();
        const auto& lines = minus_one_classes();
        std::vector<Presentation> out;
        for (const auto& C : conics)
            for (const auto& Cp : conics) {
                if (pairing(C, Cp) != 1) continue;
                Presentation pr;
                pr.C = C;
                pr.Cprime = Cp;
                int found = 0;
                for (const auto& l : lines) {
                    if (pairing(l, C) == 0 && pairing(l, Cp) == 0) {
                        if (found < 4) pr.e[found] = l;
                        ++found;
                    }
                }
                if (found != 4)
                    throw std::logic_error("presentation without 4 exceptional classes");
                out.push_back(pr);
            }
        return out;
    }();
    return ps;
}

const Presentation& standard_presentation() {
    static const Presentation std_p = [] {
        for (const auto& p : presentations())
            if (p.C == class_F() && p.Cprime == class_Fprime()) return p;
        throw std::logic_error("standard presentation missing");
    }();
    return std_p;
}

Invariants class_invariants(const PicClass& a, const Presentation& rho) {
    if (!is_nef(a)) throw PreconditionError("class_invariants: class is not nef");
    Invariants inv;
    inv.h = pairing(minus_K(), a);
    inv.a = pairing(rho.C, a);
    inv.aprime = pairing(rho.Cprime, a);
    int64_t sumk = 0;
    for (int i = 0; i < 4; ++i) {
        inv.k[i] = pairing(rho.e[i], a);
        sumk += inv.k[i];
    }
    if (inv.h != 2 * inv.a + 2 * inv.aprime - sumk)
        throw std::logic_error("invariant identity violated");
    return inv;
}

Invariants standard_invariants(const PicClass& a) {
    return class_invariants(a, standard_presentation());
}

PicClass class_from_invariants(int64_t a, int64_t aprime, const std::array<int64_t, 4>& k) {
    PicClass c = aprime * class_F() + a * class_Fprime();
    for (int i = 0; i < 4; ++i) c = c - k[i] * class_E(i);
    return c;
}

namespace {
// Fraction-free Bareiss determinant of a 6x6 integer matrix.
int64_t det6(std::array<std::array<int64_t, 6>, 6> b) {
    int64_t prev = 1;
    int sign = 1;
    for (int k = 0; k < 5; ++k) {
        if (b[k][k] == 0) {
            int piv = -1;
            for (int r = k + 1; r < 6; ++r)
                if (b[r][k]) { piv = r; break; }
            if (piv < 0) return 0;
            std::swap(b[k], b[piv]);
            sign = -sign;
        }
        for (int r = k + 1; r < 6; ++r)
            for (int c = k + 1; c < 6; ++c)
                b[r][c] = (b[r][c] * b[k][k] - b[r][k] * b[k][c]) / prev;
        prev = b[k][k];
    }
    return sign * b[5][5];
}

int64_t det5(const std::array<std::array<int64_t, 5>, 5>& m) {
    std::array<std::array<int64_t, 6>, 6> b{};
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) b[i][j] = m[i][j];
    b[5][5] = 1;
    return det6(b);
}

// Adjugate (inverse times det) of a 6x6 integer matrix.
std::array<std::array<int64_t, 6>, 6> adjugate6(const std::array<std::array<int64_t, 6>, 6>& m) {
    std::array<std::array<int64_t, 6>, 6> adj;
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) {
            // adj[r][c] = (-1)^{r+c} * minor(m, row=c, col=r)
            std::array<std::array<int64_t, 5>, 5> minor{};
            int mr = 0;
            for (int i = 0; i < 6; ++i) {
                if (i == c) continue;
                int mc = 0;
                for (int j = 0; j < 6; ++j) {
                    if (j == r) continue;
                    minor[mr][mc++] = m[i][j];
                }
                ++mr;
            }
            int64_t cof = det5(minor);
            adj[r][c] = (((r + c) % 2) ? -cof : cof);
        }
    return adj;
}
}  // namespace

const std::vector<Chamber>& chambers() {
    static const std::vector<Chamber> chs = [] {
        const auto& L = minus_one_classes();
        std::vector<Chamber> out;
        out.reserve(disjoint_triples().size());
        for (const auto& t : disjoint_triples()) {
            Chamber ch;
            ch.triple = t;
            PicClass K1star = minus_K() + L[t[0]] + L[t[1]] + L[t[2]];
            // the three (-1)-classes orthogonal to the contracted triple
            std::vector<PicClass> s1lines;
            for (const auto& l : L) {
                if (pairing(l, L[t[0]]) == 0 && pairing(l, L[t[1]]) == 0 &&
                    pairing(l, L[t[2]]) == 0)
                    s1lines.push_back(l);
            }
            if (s1lines.size() != 3) throw std::logic_error("expected 3 residual lines");
            // the ruling contraction M meets both others; A, B are disjoint
            int mi = -1;
            for (int i = 0; i < 3; ++i) {
                int j = (i + 1) % 3, k = (i + 2) % 3;
                if (pairing(s1lines[i], s1lines[j]) == 1 && pairing(s1lines[i], s1lines[k]) == 1)
                    mi = i;
            }
            if (mi < 0) throw std::logic_error("no ruling line among residual lines");
            PicClass A = s1lines[(mi + 1) % 3], B = s1lines[(mi + 2) % 3];
            if (B < A) std::swap(A, B);
            PicClass HK = K1star + A + B;  // 3H
            PicClass H;
            for (int i = 0; i < 6; ++i) {
                if (HK.v[i] % 3 != 0) throw std::logic_error("H class not integral");
                H.v[i] = HK.v[i] / 3;
            }
            if (pairing(H, H) != 1 || pairing(K1star, H) != 3)
                throw std::logic_error("bad hyperplane class");
            ch.gens = {minus_K(), minus_K() + L[t[0]], minus_K() + L[t[0]] + L[t[1]],
                       H, H - A, H - B};
            std::array<std::array<int64_t, 6>, 6> G;
            for (int r = 0; r < 6; ++r)
                for (int c = 0; c < 6; ++c) G[r][c] = ch.gens[c].v[r];
            ch.det = det6(G);
            if (ch.det == 0) throw std::logic_error("degenerate chamber");
            ch.inverse = adjugate6(G);
            out.push_back(ch);
        }
        return out;
    }();
    return chs;
}

Decomposition chamber_decompose(const PicClass& a) {
    if (!is_nef(a)) throw PreconditionError("chamber_decompose: class is not nef");
    const auto& chs = chambers();
    for (int idx = 0; idx < static_cast<int>(chs.size()); ++idx) {
        const Chamber& ch = chs[idx];
        std::array<int64_t, 6> num;
        bool ok = true;
        for (int r = 0; r < 6 && ok; ++r) {
            int64_t s = 0;
            for (int c = 0; c < 6; ++c) s += ch.inverse[r][c] * a.v[c];
            if (s % ch.det != 0) { ok = false; break; }
            num[r] = s / ch.det;
            if (num[r] < 0) ok = false;
        }
        if (ok) return Decomposition{num, idx};
    }
    throw std::logic_error("nef class admits no chamber decomposition");
}

namespace {
// 32 * min(J_rho, R_rho), an integer since ell is quantized in 1/32 steps.
int64_t ell32_at(const PicClass& a, const Presentation& rho) {
    int64_t av = pairing(rho.C, a), apv = pairing(rho.Cprime, a);
    int64_t sumk = 0, mink = INT64_MAX;
    for (const auto& e : rho.e) {
        int64_t k = pairing(e, a);
        sumk += k;
        mink = std::min(mink, k);
    }
    int64_t J32 = std::min(2 * av - sumk, 2 * apv - sumk);
    int64_t R32 = 32 * mink;
    return std::min(J32, R32);
}

int64_t ell32(const PicClass& a) {
    int64_t best = INT64_MIN;
    for (const auto& rho : presentations()) best = std::max(best, ell32_at(a, rho));
    return best;
}
}  // namespace

Rat ell(const PicClass& a) { return Rat(ell32(a), 32); }

EllResult ell_and_cone(const PicClass& a, const Rat& eps) {
    EllResult r;
    r.ell = ell(a);
    r.member = r.ell >= eps * Rat(pairing(minus_K(), a));
    return r;
}

bool Cone::contains(const PicClass& a) const {
    if (!is_nef(a)) return false;
    switch (kind) {
        case Kind::FullNef:
            return true;
        case Kind::Shrunk: {
            Int lhs = Int(ell32(a)) * Int(denominator(epsilon));
            Int rhs = Int(32) * Int(numerator(epsilon)) * Int(pairing(minus_K(), a));
            return lhs >= rhs;
        }
        case Kind::Rays: {
            if (rays.empty()) return a.is_zero();
            size_t n = rays.size();
            std::vector<std::vector<Rat>> M(6, std::vector<Rat>(n + 1));
            for (int r = 0; r < 6; ++r) {
                for (size_t c = 0; c < n; ++c) M[r][c] = Rat(rays[c].v[r]);
                M[r][n] = Rat(a.v[r]);
            }
            size_t rank = 0;
            for (size_t c = 0; c < n && rank < 6; ++c) {
                size_t piv = rank;
                while (piv < 6 && M[piv][c] == 0) ++piv;
                if (piv == 6) continue;
                std::swap(M[rank], M[piv]);
                Rat inv = 1 / M[rank][c];
                for (size_t j = c; j <= n; ++j) M[rank][j] *= inv;
                for (size_t r2 = 0; r2 < 6; ++r2) {
                    if (r2 == rank || M[r2][c] == 0) continue;
                    Rat f = M[r2][c];
                    for (size_t j = c; j <= n; ++j) M[r2][j] -= f * M[rank][j];
                }
                ++rank;
            }
            for (size_t r = rank; r < 6; ++r)
                if (M[r][n] != 0) return false;
            if (rank < n) throw PreconditionError("Cone::contains: non-simplicial ray cone");
            for (size_t r = 0; r < rank; ++r)
                if (M[r][n] < 0) return false;
            return true;
        }
    }
    return false;
}

const std::vector<PicClass>& nef_extreme_rays() {
    static const std::vector<PicClass> rays = [] {
        const auto& L = minus_one_classes();
        std::vector<PicClass> out;
        std::array<int, 5> idx;
        for (idx[0] = 0; idx[0] < 16; ++idx[0])
            for (idx[1] = idx[0] + 1; idx[1] < 16; ++idx[1])
                for (idx[2] = idx[1] + 1; idx[2] < 16; ++idx[2])
                    for (idx[3] = idx[2] + 1; idx[3] < 16; ++idx[3])
                        for (idx[4] = idx[3] + 1; idx[4] < 16; ++idx[4]) {
                            // row r: the functional x -> L_{idx[r]} . x
                            int64_t m[5][6];
                            for (int r = 0; r < 5; ++r) {
                                const PicClass& l = L[idx[r]];
                                for (int c = 0; c < 6; ++c) {
                                    int64_t s = 0;
                                    for (int j = 0; j < 6; ++j) s += kGram[c][j] * l.v[j];
                                    m[r][c] = s;
                                }
                            }
                            // kernel vector via signed maximal minors
                            PicClass v;
                            for (int c = 0; c < 6; ++c) {
                                std::array<std::array<int64_t, 5>, 5> minor{};
                                for (int r = 0; r < 5; ++r) {
                                    int mc = 0;
                                    for (int j = 0; j < 6; ++j) {
                                        if (j == c) continue;
                                        minor[r][mc++] = m[r][j];
                                    }
                                }
                                v.v[c] = ((c % 2) ? -1 : 1) * det5(minor);
                            }
                            if (v.is_zero()) continue;
                            int64_t g = 0;
                            for (auto x : v.v) g = std::gcd(g, x < 0 ? -x : x);
                            for (auto& x : v.v) x /= g;
                            if (pairing(minus_K(), v) < 0) v = -1 * v;
                            if (pairing(minus_K(), v) <= 0) continue;
                            if (!is_nef(v)) continue;
                            out.push_back(v);
                        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }();
    return rays;
}

uint64_t ehrhart_count(const Cone& cone, int m) {
    if (m < 0) throw PreconditionError("ehrhart_count: m >= 0");
    uint64_t count = 0;
    int smax = (3 * m) / 2;
    bool full = cone.kind == Cone::Kind::FullNef;
    for (int a = 0; a <= smax; ++a)
        for (int ap = 0; a + ap <= smax; ++ap) {
            int mu = std::min(a, ap);
            int s = a + ap;
            for (int k1 = 0; k1 <= mu; ++k1)
                for (int k2 = 0; k2 <= mu; ++k2) {
                    if (k1 + k2 > s) break;
                    for (int k3 = 0; k3 <= mu; ++k3) {
                        if (k1 + k2 + k3 > s) break;
                        int hi = std::min<int>(mu, s - std::max({k1 + k2, k1 + k3, k2 + k3}));
                        int lo = std::max(0, 2 * s - m - (k1 + k2 + k3));
                        if (hi < lo) continue;
                        if (full) {
                            count += static_cast<uint64_t>(hi - lo + 1);
                        } else {
                            for (int k4 = lo; k4 <= hi; ++k4) {
                                PicClass c = class_from_invariants(a, ap, {k1, k2, k3, k4});
                                if (cone.contains(c)) ++count;
                            }
                        }
                    }
                }
        }
    return count;
}

namespace {
// Lattice points on the height-m slice of the cone, closed and relative
// interior counts.  The alpha constant is the top coefficient of the slice
// Ehrhart quasi-polynomial; averaging the closed and interior counts cancels
// the surface term (Ehrhart reciprocity), which is what makes a desk-scale
// dilation usable.
void slice_counts(const Cone& cone, int m, uint64_t& closed, uint64_t& interior) {
    closed = interior = 0;
    int smax = (3 * m) / 2 + 2;
    bool full = cone.kind == Cone::Kind::FullNef;
    for (int a = 0; a <= smax; ++a)
        for (int ap = 0; a + ap <= smax; ++ap) {
            int mu = std::min(a, ap);
            int s = a + ap;
            for (int k1 = 0; k1 <= mu; ++k1)
                for (int k2 = 0; k2 <= mu; ++k2) {
                    if (k1 + k2 > s) break;
                    for (int k3 = 0; k3 <= mu; ++k3) {
                        if (k1 + k2 + k3 > s) break;
                        int k4 = 2 * s - m - (k1 + k2 + k3);  // h == m exactly
                        if (k4 < 0 || k4 > mu) continue;
                        if (k1 + k2 + k4 > s || k1 + k3 + k4 > s || k2 + k3 + k4 > s)
                            continue;
                        PicClass c = class_from_invariants(a, ap, {k1, k2, k3, k4});
                        if (!full && !cone.contains(c)) continue;
                        ++closed;
                        bool strict = k1 >= 1 && k2 >= 1 && k3 >= 1 && k4 >= 1 &&
                                      k1 < mu && k2 < mu && k3 < mu && k4 < mu &&
                                      k1 + k2 + k3 < s && k1 + k2 + k4 < s &&
                                      k1 + k3 + k4 < s && k2 + k3 + k4 < s;
                        if (!strict) continue;
                        if (cone.kind == Cone::Kind::Shrunk) {
                            // relative interior of the shrunk cone: strict
                            // defining inequality as well
                            Int lhs = Int(ell32(c)) * Int(denominator(cone.epsilon));
                            Int rhs = Int(32) * Int(numerator(cone.epsilon)) *
                                      Int(pairing(minus_K(), c));
                            if (!(lhs > rhs)) continue;
                        }
                        ++interior;
                    }
                }
        }
}
}  // namespace

AlphaResult alpha_constant(const Cone& cone, bool exact_mode, int dilation) {
    AlphaResult res;
    res.dilation = dilation;
    if (exact_mode) {
        if (cone.kind == Cone::Kind::FullNef) {
            Rat vol = 0;
            for (const auto& ch : chambers()) {
                Rat scale = 1;
                for (const auto& g : ch.gens) scale *= Rat(pairing(minus_K(), g));
                vol += Rat(ch.det < 0 ? -ch.det : ch.det) / (scale * 720);
            }
            res.value = 6 * vol;
            res.is_exact = true;
            return res;
        }
        if (cone.kind == Cone::Kind::Rays && cone.rays.size() < 6) {
            res.value = 0;
            res.is_exact = true;
            return res;
        }
        if (cone.kind == Cone::Kind::Rays && cone.rays.size() == 6) {
            std::array<std::array<int64_t, 6>, 6> G;
            for (int r = 0; r < 6; ++r)
                for (int c = 0; c < 6; ++c) G[r][c] = cone.rays[c].v[r];
            int64_t d = det6(G);
            if (d == 0) {
                res.value = 0;
            } else {
                Rat scale = 1;
                for (const auto& g : cone.rays) scale *= Rat(pairing(minus_K(), g));
                res.value = 6 * Rat(d < 0 ? -d : d) / (scale * 720);
            }
            res.is_exact = true;
            return res;
        }
        res.fallback_warning = true;
    }
    uint64_t closed = 0, interior = 0;
    slice_counts(cone, dilation, closed, interior);
    res.value = Rat(Int(closed) + Int(interior), 2 * int_pow(Int(dilation), 5));
    res.is_exact = false;
    return res;
}

PicClass parse_class(const std::string& text) {
    std::vector<int64_t> vals;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) throw ConfigError("malformed class string");
        try {
            vals.push_back(std::stoll(cur));
        } catch (...) {
            throw ConfigError("malformed class string");
        }
        cur.clear();
    };
    for (char c : text) {
        if (c == ',') {
            flush();
        } else if ((c >= '0' && c <= '9') || c == '-' || c == '+') {
            cur.push_back(c);
        } else {
            throw ConfigError("malformed class string");
        }
    }
    flush();
    if (vals.size() != 6) throw ConfigError("class string needs 6 comma-separated integers");
    return class_from_invariants(vals[0], vals[1], {vals[2], vals[3], vals[4], vals[5]});
}

std::string class_text(const PicClass& a) {
    Invariants inv = standard_invariants(a);
    std::ostringstream os;
    os << inv.a << "," << inv.aprime << "," << inv.k[0] << "," << inv.k[1] << ","
       << inv.k[2] << "," << inv.k[3];
    return os.str();
}

}  // namespace dp4::picard
