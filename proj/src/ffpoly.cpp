#include "dp4/ffpoly.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace dp4::ff {

namespace {

bool is_prime(uint32_t n) {
    if (n < 2) return false;
    for (uint32_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Split q into (p, e) or fail.
std::pair<uint32_t, uint32_t> prime_power_split(uint32_t q) {
    if (q < 2) throw ConfigError("q must be a prime power >= 2");
    for (uint32_t p = 2; p * p <= q; ++p) {
        if (q % p == 0) {
            if (!is_prime(p)) continue;
            uint32_t e = 0, m = q;
            while (m % p == 0) { m /= p; ++e; }
            if (m != 1) throw ConfigError("q is not a prime power");
            return {p, e};
        }
    }
    return {q, 1};  // q itself prime
}

// Dense polynomial arithmetic over F_p with packed base-p encoding, used
// only during FieldTable construction.
struct PackedPoly {
    // digits[i] = coefficient of x^i, values in [0, p)
    static uint32_t pack(const std::vector<uint32_t>& d, uint32_t p) {
        uint32_t v = 0;
        for (size_t i = d.size(); i-- > 0;) v = v * p + d[i];
        return v;
    }
    static std::vector<uint32_t> unpack(uint32_t v, uint32_t p, uint32_t e) {
        std::vector<uint32_t> d(e, 0);
        for (uint32_t i = 0; i < e; ++i) { d[i] = v % p; v /= p; }
        return d;
    }
};

std::vector<uint32_t> fp_mulmod(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b,
                                const std::vector<uint32_t>& f, uint32_t p) {
    // f monic of degree e; a, b of degree < e
    uint32_t e = static_cast<uint32_t>(f.size()) - 1;
    std::vector<uint32_t> prod(2 * e - 1 > 0 ? 2 * e - 1 : 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i])
            for (size_t j = 0; j < b.size(); ++j)
                prod[i + j] = (prod[i + j] + static_cast<uint64_t>(a[i]) * b[j]) % p;
    for (size_t i = prod.size(); i-- > e;) {
        uint32_t coef = prod[i];
        if (!coef) continue;
        prod[i] = 0;
        for (uint32_t j = 0; j < e; ++j)
            prod[i - e + j] = (prod[i - e + j] + static_cast<uint64_t>(coef) * (p - f[j] % p)) % p;
    }
    prod.resize(e);
    return prod;
}

std::vector<uint32_t> factorize_u64(uint64_t n) {
    std::vector<uint32_t> fs;
    for (uint64_t d = 2; d * d <= n; ++d)
        while (n % d == 0) {
            if (fs.empty() || fs.back() != d) fs.push_back(static_cast<uint32_t>(d));
            n /= d;
        }
    if (n > 1) fs.push_back(static_cast<uint32_t>(n));
    return fs;
}

}  // namespace

FieldTable::FieldTable(uint32_t q, uint32_t q_bound) {
    if (q > q_bound) throw ConfigError("q exceeds the configured bound");
    auto [p, e] = prime_power_split(q);
    q_ = q; p_ = p; e_ = e;

    // Modulus: for e = 1 use x - 0 conceptually (elements are residues);
    // for e > 1 the lexicographically smallest monic irreducible of degree e,
    // scanning constant-first packed encodings.
    std::vector<uint32_t> f;  // monic degree-e modulus, f[e] = 1
    if (e_ > 1) {
        // F_p[x] gcd on raw coefficient vectors (ascending, trimmed).
        auto fp_trim = [](std::vector<uint32_t> a) {
            while (!a.empty() && a.back() == 0) a.pop_back();
            return a;
        };
        auto fp_inv = [&](uint32_t a) {
            uint32_t r = 1, b = a, ex = p_ - 2;
            while (ex) {
                if (ex & 1) r = static_cast<uint32_t>((static_cast<uint64_t>(r) * b) % p_);
                b = static_cast<uint32_t>((static_cast<uint64_t>(b) * b) % p_);
                ex >>= 1;
            }
            return r;
        };
        auto fp_mod = [&](std::vector<uint32_t> a, const std::vector<uint32_t>& b) {
            a = fp_trim(std::move(a));
            uint32_t li = fp_inv(b.back());
            while (a.size() >= b.size() && !a.empty()) {
                uint32_t coef = static_cast<uint32_t>((static_cast<uint64_t>(a.back()) * li) % p_);
                size_t shift = a.size() - b.size();
                for (size_t i = 0; i < b.size(); ++i) {
                    uint64_t sub = (static_cast<uint64_t>(coef) * b[i]) % p_;
                    a[shift + i] = static_cast<uint32_t>((a[shift + i] + p_ - sub) % p_);
                }
                a = fp_trim(std::move(a));
            }
            return a;
        };
        auto fp_gcd_is_one = [&](std::vector<uint32_t> a, std::vector<uint32_t> b) {
            a = fp_trim(std::move(a));
            b = fp_trim(std::move(b));
            while (!b.empty()) {
                auto r = fp_mod(a, b);
                a = std::move(b);
                b = std::move(r);
            }
            return a.size() == 1;
        };
        std::vector<uint32_t> eprimes;
        {
            uint32_t m = e_;
            for (uint32_t r = 2; r <= m; ++r)
                while (m % r == 0) {
                    if (eprimes.empty() || eprimes.back() != r) eprimes.push_back(r);
                    m /= r;
                }
        }
        for (uint32_t code = 0;; ++code) {
            f = PackedPoly::unpack(code, p_, e_);
            f.push_back(1);
            std::vector<uint32_t> x(e_, 0);
            x[1] = 1;
            auto frob_pow = [&](uint32_t iters) {
                // x^(p^iters) mod f by repeated p-th powers
                auto cur = x;
                for (uint32_t i = 0; i < iters; ++i) {
                    std::vector<uint32_t> acc(e_, 0);
                    acc[0] = 1;
                    auto base = cur;
                    uint32_t ex = p_;
                    while (ex) {
                        if (ex & 1) acc = fp_mulmod(acc, base, f, p_);
                        base = fp_mulmod(base, base, f, p_);
                        ex >>= 1;
                    }
                    cur = acc;
                }
                return cur;
            };
            // irreducible iff x^(p^e) == x mod f and gcd(x^(p^(e/r)) - x, f) = 1
            // for every prime r | e
            if (frob_pow(e_) != x) {
                if (code == q_ - 1) throw ConfigError("no irreducible modulus found");
                continue;
            }
            bool ok = true;
            for (uint32_t r : eprimes) {
                auto y = frob_pow(e_ / r);
                // y - x
                std::vector<uint32_t> diff = y;
                diff[1] = (diff[1] + p_ - x[1]) % p_;
                if (!fp_gcd_is_one(diff, f)) { ok = false; break; }
            }
            if (ok) break;
            if (code == q_ - 1) throw ConfigError("no irreducible modulus found");
        }
    } else {
        f = {0, 1};
    }

    // Find a generator of the multiplicative group and build exp/log tables.
    auto mul_packed = [&](uint32_t a, uint32_t b) -> uint32_t {
        if (e_ == 1) return static_cast<uint32_t>((static_cast<uint64_t>(a) * b) % p_);
        auto da = PackedPoly::unpack(a, p_, e_), db = PackedPoly::unpack(b, p_, e_);
        return PackedPoly::pack(fp_mulmod(da, db, f, p_), p_);
    };
    auto fs = factorize_u64(q_ - 1);
    auto pow_packed = [&](uint32_t a, uint64_t n) {
        uint32_t r = 1, b = a;
        while (n) {
            if (n & 1) r = mul_packed(r, b);
            b = mul_packed(b, b);
            n >>= 1;
        }
        return r;
    };
    uint32_t g = 0;
    for (uint32_t cand = 2; cand < q_ || q_ == 2; ++cand) {
        uint32_t c = q_ == 2 ? 1 : cand;
        bool prim = c != 0;
        for (uint32_t f1 : fs)
            if (pow_packed(c, (q_ - 1) / f1) == 1) { prim = false; break; }
        if (prim) { g = c; break; }
        if (q_ == 2) break;
    }
    if (g == 0) throw ConfigError("no generator found");

    exp_poly_.assign(q_ - 1, 0);
    log_.assign(q_, 0);
    uint32_t cur = 1;
    for (uint32_t i = 0; i < q_ - 1; ++i) {
        exp_poly_[i] = cur;
        log_[cur] = i + 1;
        cur = mul_packed(cur, g);
    }
    if (cur != 1) throw ConfigError("generator order mismatch");

    // Zech logarithms: zech[n] = log(1 + g^n), or q-1 when 1 + g^n = 0.
    zech_.assign(q_ - 1, q_ - 1);
    for (uint32_t n = 0; n < q_ - 1; ++n) {
        uint32_t s;
        if (e_ == 1) {
            s = (exp_poly_[n] + 1) % p_;
        } else {
            auto d = PackedPoly::unpack(exp_poly_[n], p_, e_);
            d[0] = (d[0] + 1) % p_;
            s = PackedPoly::pack(d, p_);
        }
        zech_[n] = s == 0 ? q_ - 1 : log_[s] - 1;
    }

    neg_.assign(q_, 0);
    inv_.assign(q_, 0);
    for (uint32_t a = 1; a < q_; ++a) {
        uint32_t la = a - 1;
        inv_[a] = 1 + mod_qm1(q_ - 1 - la == q_ - 1 ? 0 : q_ - 1 - la);
        uint32_t packed = exp_poly_[la];
        uint32_t npacked;
        if (e_ == 1) {
            npacked = (p_ - packed) % p_;
        } else {
            auto d = PackedPoly::unpack(packed, p_, e_);
            for (auto& x : d) x = (p_ - x) % p_;
            npacked = PackedPoly::pack(d, p_);
        }
        neg_[a] = npacked == 0 ? 0 : log_[npacked];
    }

    if (q_ <= 256) {
        add_flat_.assign(static_cast<size_t>(q_) * q_, 0);
        mul_flat_.assign(static_cast<size_t>(q_) * q_, 0);
        for (uint32_t a = 0; a < q_; ++a)
            for (uint32_t b = 0; b < q_; ++b) {
                add_flat_[a * q_ + b] = add_zech(a, b);
                mul_flat_[a * q_ + b] =
                    (a == 0 || b == 0) ? 0 : 1 + mod_qm1(a - 1 + b - 1);
            }
        add_tab_ = add_flat_.data();
        mul_tab_ = mul_flat_.data();
    }
}

uint32_t FieldTable::add_zech(uint32_t a, uint32_t b) const {
    if (a == 0) return b;
    if (b == 0) return a;
    uint32_t la = a - 1, lb = b - 1;
    uint32_t d = lb >= la ? lb - la : lb + q_ - 1 - la;
    uint32_t z = zech_[d];
    if (z == q_ - 1) return 0;
    return 1 + mod_qm1(la + z);
}

uint32_t FieldTable::inv(uint32_t a) const {
    if (a == 0) throw PreconditionError("inverse of zero");
    return inv_[a];
}

uint32_t FieldTable::pow(uint32_t a, uint64_t n) const {
    if (a == 0) return n == 0 ? 1 : 0;
    uint64_t la = (a - 1) % (q_ - 1);
    return 1 + static_cast<uint32_t>((la * (n % (q_ - 1))) % (q_ - 1));
}

uint64_t FieldTable::order(uint32_t a) const {
    if (a == 0) throw PreconditionError("order of zero");
    uint32_t cur = a;
    uint64_t n = 1;
    while (cur != 1) { cur = mul(cur, a); ++n; }
    return n;
}

std::vector<uint32_t> FieldTable::digits(uint32_t a) const {
    if (a == 0) return std::vector<uint32_t>(e_, 0);
    return PackedPoly::unpack(exp_poly_[a - 1], p_, e_);
}

uint64_t FieldTable::value(uint32_t a) const {
    return a == 0 ? 0 : exp_poly_[a - 1];
}

std::string FieldTable::to_string(uint32_t a) const { return std::to_string(value(a)); }

int BinaryForm::v_valuation() const {
    for (int j = 0; j <= deg; ++j)
        if (c[j]) return j;
    return deg + 1;
}

std::vector<uint32_t> BinaryForm::dehomogenize() const {
    // coefficient of u^k is c[deg - k]
    Poly p(deg + 1, 0);
    for (int k = 0; k <= deg; ++k) p[k] = c[deg - k];
    return poly_trim(std::move(p));
}

BinaryForm form_from_poly(int deg, const Poly& poly_u, int v_power) {
    // v^{v_power} * (poly homogenized to degree deg - v_power); the u^k term
    // lands at coefficient index deg - k regardless of the v split, so the
    // power only enters through the degree bound.
    int d = poly_deg(poly_u);
    if (d < 0) return BinaryForm::zero(deg);
    if (d + v_power > deg) throw PreconditionError("form degree too small");
    BinaryForm f = BinaryForm::zero(deg);
    for (int k = 0; k <= d; ++k) f.c[deg - k] = poly_u[k];
    return f;
}

uint32_t eval_form(const FieldTable& F, const BinaryForm& f, uint32_t xu, uint32_t xv) {
    // sum c_j xu^{n-j} xv^j via Horner in xv/xu is awkward with xu = 0; do it directly
    uint32_t acc = 0;
    uint32_t n = static_cast<uint32_t>(f.deg);
    for (uint32_t j = 0; j <= n; ++j) {
        uint32_t term = f.c[j];
        if (!term) continue;
        term = F.mul(term, F.pow(xu, n - j));
        term = F.mul(term, F.pow(xv, j));
        acc = F.add(acc, term);
    }
    return acc;
}

int poly_deg(const Poly& a) { return static_cast<int>(a.size()) - 1; }

Poly poly_trim(Poly a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
    return a;
}

Poly poly_mul(const FieldTable& F, const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i])
            for (size_t j = 0; j < b.size(); ++j)
                if (b[j]) r[i + j] = F.add(r[i + j], F.mul(a[i], b[j]));
    return poly_trim(std::move(r));
}

Poly poly_mod(const FieldTable& F, Poly a, const Poly& b) {
    a = poly_trim(std::move(a));
    if (b.empty()) throw PreconditionError("mod by zero polynomial");
    uint32_t lead_inv = F.inv(b.back());
    while (poly_deg(a) >= poly_deg(b)) {
        uint32_t coef = F.mul(a.back(), lead_inv);
        size_t shift = a.size() - b.size();
        for (size_t i = 0; i < b.size(); ++i)
            a[shift + i] = F.sub(a[shift + i], F.mul(coef, b[i]));
        a = poly_trim(std::move(a));
    }
    return a;
}

Poly poly_monic(const FieldTable& F, Poly a) {
    a = poly_trim(std::move(a));
    if (a.empty()) return a;
    uint32_t inv = F.inv(a.back());
    for (auto& x : a) x = F.mul(x, inv);
    return a;
}

Poly poly_gcd(const FieldTable& F, Poly a, Poly b) {
    a = poly_trim(std::move(a));
    b = poly_trim(std::move(b));
    while (!b.empty()) {
        Poly r = poly_mod(F, a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return poly_monic(F, std::move(a));
}

Poly poly_pow(const FieldTable& F, const Poly& a, unsigned n) {
    Poly r{1};
    Poly b = a;
    while (n) {
        if (n & 1) r = poly_mul(F, r, b);
        b = poly_mul(F, b, b);
        n >>= 1;
    }
    return r;
}

std::string ClosedPoint::text(const FieldTable& F) const {
    if (infinity) return "inf";
    // homogeneous coefficients c_0..c_d of the monic-in-u representative,
    // i.e. the u-polynomial printed from the leading coefficient down
    std::ostringstream os;
    for (size_t i = monic.size(); i-- > 0;) {
        os << F.to_string(monic[i]);
        if (i > 0) os << ",";
    }
    return os.str();
}

std::vector<ClosedPoint> closed_points(const FieldTable& F, int d) {
    if (d < 1) throw PreconditionError("closed point degree must be >= 1");
    std::vector<ClosedPoint> out;
    if (d == 1) {
        for (uint32_t a = 0; a < F.q(); ++a) {
            // u - a*v dehomogenizes to u - a
            out.push_back(ClosedPoint{false, Poly{F.neg(a), 1}});
        }
        out.push_back(ClosedPoint{true, {}});
        return out;
    }
    // monic degree-d u-polynomials, irreducibility by trial division against
    // lower-degree irreducibles
    std::vector<Poly> small;
    for (int e = 1; e <= d / 2; ++e)
        for (const auto& cp : closed_points(F, e))
            if (!cp.infinity) small.push_back(cp.monic);
    uint64_t total = 1;
    for (int i = 0; i < d; ++i) {
        total *= F.q();
        if (total > (1ull << 26)) throw ResourceCapError("closed point enumeration too large");
    }
    Poly cand(d + 1, 0);
    cand[d] = 1;
    for (uint64_t code = 0; code < total; ++code) {
        uint64_t v = code;
        for (int i = 0; i < d; ++i) { cand[i] = static_cast<uint32_t>(v % F.q()); v /= F.q(); }
        bool irred = true;
        for (const auto& f : small)
            if (poly_mod(F, cand, f).empty()) { irred = false; break; }
        if (irred) out.push_back(ClosedPoint{false, cand});
    }
    return out;
}

PointTable::PointTable(const FieldTable& F, int max_degree) : F_(&F), maxdeg_(max_degree) {
    by_deg_.resize(max_degree + 1);
    offset_.resize(max_degree + 2, 0);
    for (int d = 1; d <= max_degree; ++d) {
        auto v = closed_points(F, d);
        offset_[d] = static_cast<uint32_t>(pts_.size());
        for (auto& cp : v) {
            if (cp.infinity) inf_id_ = static_cast<uint32_t>(pts_.size());
            by_deg_[d].push_back(static_cast<uint32_t>(pts_.size()));
            pts_.push_back(std::move(cp));
            deg_of_.push_back(d);
        }
    }
    offset_[max_degree + 1] = static_cast<uint32_t>(pts_.size());
    // patch: offset_[d] must be the start of degree d even when d = 1
    offset_[0] = 0;
    if (max_degree >= 1) offset_[1] = 0;
}

namespace {
// Exact division a / b, returning (quotient, remainder).
std::pair<Poly, Poly> poly_divmod(const FieldTable& F, Poly a, const Poly& b) {
    a = poly_trim(std::move(a));
    if (b.empty()) throw PreconditionError("division by zero polynomial");
    if (poly_deg(a) < poly_deg(b)) return {{}, a};
    Poly quot(a.size() - b.size() + 1, 0);
    uint32_t lead_inv = F.inv(b.back());
    while (poly_deg(a) >= poly_deg(b)) {
        uint32_t coef = F.mul(a.back(), lead_inv);
        size_t shift = a.size() - b.size();
        quot[shift] = coef;
        for (size_t i = 0; i < b.size(); ++i)
            a[shift + i] = F.sub(a[shift + i], F.mul(coef, b[i]));
        a = poly_trim(std::move(a));
        if (a.empty()) break;
    }
    return {poly_trim(std::move(quot)), a};
}
}  // namespace

std::vector<std::pair<uint32_t, int>> PointTable::factor(const Poly& monic_in) const {
    Poly rem = monic_in;
    std::vector<std::pair<uint32_t, int>> out;
    for (uint32_t id = 0; id < pts_.size() && poly_deg(rem) > 0; ++id) {
        if (pts_[id].infinity) continue;
        const Poly& f = pts_[id].monic;
        if (poly_deg(f) > poly_deg(rem)) continue;
        int mult = 0;
        while (poly_deg(rem) >= poly_deg(f)) {
            auto [quot, r] = poly_divmod(*F_, rem, f);
            if (!r.empty()) break;
            rem = quot.empty() ? Poly{1} : quot;
            ++mult;
        }
        if (mult) out.emplace_back(id, mult);
    }
    if (poly_deg(rem) > 0)
        throw PreconditionError("factor: degree exceeds point table bound");
    std::sort(out.begin(), out.end());
    return out;
}

int Divisor::degree(const PointTable& pt) const {
    int d = 0;
    for (auto& [id, mult] : m) d += pt.degree(id) * mult;
    return d;
}

bool Divisor::disjoint_from(const Divisor& o) const {
    size_t i = 0, j = 0;
    while (i < m.size() && j < o.m.size()) {
        if (m[i].first == o.m[j].first) return false;
        if (m[i].first < o.m[j].first) ++i; else ++j;
    }
    return true;
}

int Divisor::mult_at(uint32_t id) const {
    for (auto& [pid, mult] : m)
        if (pid == id) return mult;
    return 0;
}

std::string Divisor::text(const PointTable& pt) const {
    if (m.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [id, mult] : m) {
        if (!first) os << " + ";
        first = false;
        if (mult != 1) os << mult << "*";
        os << "(" << pt.point(id).text(pt.field()) << ")";
    }
    return os.str();
}

namespace {
void divisors_rec(const PointTable& pt, int n, uint32_t min_id,
                  std::vector<std::pair<uint32_t, int>>& acc,
                  std::vector<Divisor>& out) {
    if (n == 0) {
        out.push_back(Divisor{acc});
        return;
    }
    for (uint32_t id = min_id; id < pt.total(); ++id) {
        int d = pt.degree(id);
        if (d > n) break;  // ids are sorted by degree
        for (int mult = n / d; mult >= 1; --mult) {
            acc.emplace_back(id, mult);
            divisors_rec(pt, n - mult * d, id + 1, acc, out);
            acc.pop_back();
        }
    }
}
}  // namespace

std::vector<Divisor> divisors_of_degree(const PointTable& pt, int n) {
    if (n < 0) throw PreconditionError("divisor degree must be >= 0");
    if (n > pt.max_degree() && pt.count(1) == 0)
        throw PreconditionError("point table too shallow");
    std::vector<Divisor> out;
    std::vector<std::pair<uint32_t, int>> acc;
    divisors_rec(pt, n, 0, acc, out);
    return out;
}

void for_each_uk(const PointTable& pt, const std::array<int, 4>& k,
                 const std::function<void(const std::array<Divisor, 4>&)>& fn) {
    for (int ki : k)
        if (ki < 0) throw PreconditionError("k_i must be >= 0");
    // Precompute divisor lists once per needed degree.
    std::array<const std::vector<Divisor>*, 4> lists{};
    std::vector<std::vector<Divisor>> storage;
    storage.reserve(4);
    for (int i = 0; i < 4; ++i) {
        storage.push_back(divisors_of_degree(pt, k[i]));
    }
    for (int i = 0; i < 4; ++i) lists[i] = &storage[i];

    std::array<Divisor, 4> w;
    std::function<void(int)> rec = [&](int i) {
        if (i == 4) { fn(w); return; }
        for (const Divisor& d : *lists[i]) {
            bool ok = true;
            for (int j = 0; j < i; ++j)
                if (!d.disjoint_from(w[j])) { ok = false; break; }
            if (!ok) continue;
            w[i] = d;
            rec(i + 1);
        }
    };
    rec(0);
}

std::vector<std::array<Divisor, 4>> enumerate_uk(const PointTable& pt,
                                                 const std::array<int, 4>& k) {
    std::vector<std::array<Divisor, 4>> out;
    for_each_uk(pt, k, [&](const std::array<Divisor, 4>& w) { out.push_back(w); });
    return out;
}

std::pair<int, Poly> form_gcd(const FieldTable& F, const BinaryForm& g1, const BinaryForm& g2) {
    bool z1 = g1.is_zero(), z2 = g2.is_zero();
    if (z1 && z2) throw PreconditionError("gcd of two zero forms");
    if (z1) return {g2.v_valuation(), poly_monic(F, g2.dehomogenize())};
    if (z2) return {g1.v_valuation(), poly_monic(F, g1.dehomogenize())};
    Poly p1 = g1.dehomogenize(), p2 = g2.dehomogenize();
    int vv = std::min(g1.deg - poly_deg(p1), g2.deg - poly_deg(p2));
    return {vv, poly_gcd(F, p1, p2)};
}

bool pair_nowhere_vanishing(const FieldTable& F, const BinaryForm& a, const BinaryForm& b) {
    if (a.is_zero() && b.is_zero()) return false;
    if (a.is_zero() || b.is_zero()) {
        const BinaryForm& nz = a.is_zero() ? b : a;
        // the zero coordinate vanishes everywhere; need nz without roots,
        // impossible unless deg 0
        return nz.deg == 0 || (poly_deg(nz.dehomogenize()) == 0 && nz.v_valuation() == 0);
    }
    auto [vv, g] = form_gcd(F, a, b);
    return vv == 0 && poly_deg(g) == 0;
}

IntersectionResult intersection_multiplicity(const PointTable& pt,
                                             const BinaryForm& s0, const BinaryForm& s1,
                                             const BinaryForm& t0, const BinaryForm& t1,
                                             PairFunctional phi1, PairFunctional phi2) {
    const FieldTable& F = pt.field();
    if (!pair_nowhere_vanishing(F, s0, s1) || !pair_nowhere_vanishing(F, t0, t1))
        throw PreconditionError("intersection_multiplicity: vanishing section pair");

    auto apply = [&](const BinaryForm& a, const BinaryForm& b, PairFunctional f) {
        BinaryForm r = BinaryForm::zero(a.deg);
        for (int j = 0; j <= a.deg; ++j)
            r.c[j] = F.add(F.mul(f.lambda, a.c[j]), F.mul(f.mu, b.c[j]));
        return r;
    };
    BinaryForm fs = apply(s0, s1, phi1);
    BinaryForm ft = apply(t0, t1, phi2);
    if (fs.is_zero() && ft.is_zero()) return IntersectionResult{true, {}, -1};

    auto [vv, g] = form_gcd(F, fs, ft);
    IntersectionResult res;
    res.whole_curve = false;
    if (vv > 0) res.div.m.emplace_back(pt.infinity_id(), vv);
    if (poly_deg(g) > 0) {
        auto fac = pt.factor(g);
        for (auto& pm : fac) res.div.m.push_back(pm);
    }
    std::sort(res.div.m.begin(), res.div.m.end());
    res.deg = res.div.degree(pt);
    return res;
}

std::vector<std::vector<uint32_t>> divisibility_rows(const FieldTable& F, int n,
                                                     PairFunctional functional,
                                                     const ClosedPoint& pi, int m) {
    if (m < 1) throw PreconditionError("divisibility_rows: m >= 1 required");
    int d = pi.degree();
    int nrows = m * d;
    int ncols = 2 * (n + 1);
    std::vector<std::vector<uint32_t>> rows(nrows, std::vector<uint32_t>(ncols, 0));

    if (pi.infinity) {
        // v^m | G  <=>  c_0 = ... = c_{m-1} = 0, where G = la*A + mu*B and
        // c_j(A) sits at column j, c_j(B) at column (n+1) + j.
        for (int r = 0; r < std::min(m, n + 1); ++r) {
            rows[r][r] = functional.lambda;
            rows[r][n + 1 + r] = functional.mu;
        }
        // rows beyond n+1 coefficients stay zero (the form is forced to 0
        // already); they are deliberately kept so the row count is m*d.
        return rows;
    }

    // pi^m | G  <=>  p^m | g where p = dehomog(pi), g = dehomog(G); the
    // remainder of g mod p^m has m*d coordinates.  Columns are unit basis
    // forms; row r is the r-th remainder coordinate as a functional.
    Poly pm = poly_pow(F, pi.monic, static_cast<unsigned>(m));
    for (int col = 0; col < ncols; ++col) {
        bool bside = col > n;
        int j = bside ? col - (n + 1) : col;
        uint32_t scale = bside ? functional.mu : functional.lambda;
        if (!scale) continue;
        // basis form e: c_j = 1 -> dehomog poly = scale * u^{n-j}
        Poly g(n - j + 1, 0);
        g[n - j] = scale;
        Poly rem = poly_mod(F, g, pm);
        for (size_t r = 0; r < rem.size(); ++r)
            if (rem[r]) rows[r][col] = rem[r];
    }
    return rows;
}

}  // namespace dp4::ff
