#include "dp4/zeta.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dp4/picard.hpp"
#include "dp4/strata.hpp"

namespace dp4::zeta {

namespace {

int moebius_int(int n) {
    int r = 1;
    for (int p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            n /= p;
            if (n % p == 0) return 0;
            r = -r;
        }
    }
    if (n > 1) r = -r;
    return r;
}

}  // namespace

Int closed_point_count(uint64_t q, int d) {
    if (d < 1) throw PreconditionError("closed_point_count: d >= 1");
    if (d == 1) return Int(q) + 1;
    Int s = 0;
    for (int e = 1; e <= d; ++e)
        if (d % e == 0) s += Int(moebius_int(e)) * int_pow(Int(q), static_cast<unsigned>(d / e));
    return s / d;
}

Int surface_point_count(uint64_t q, int d) {
    if (d < 1) throw PreconditionError("surface_point_count: d >= 1");
    return int_pow(Int(q), static_cast<unsigned>(2 * d)) +
           6 * int_pow(Int(q), static_cast<unsigned>(d)) + 1;
}

double EulerProduct::bare() const {
    double v = 1;
    for (const auto& [f, n] : factors)
        v *= std::pow(to_double(f), n.convert_to<double>());
    return v;
}

double EulerProduct::value() const { return to_double(prefactor) * bare(); }

bool EulerProduct::expandable(double digit_limit) const {
    double digits = 0;
    for (const auto& [f, n] : factors) {
        double sz = static_cast<double>(numerator(f).str().size() +
                                        denominator(f).str().size());
        digits += sz * n.convert_to<double>();
    }
    return digits <= digit_limit;
}

Rat EulerProduct::expand() const {
    if (!expandable()) throw ResourceCapError("EulerProduct: expansion too large");
    Rat v = prefactor;
    for (const auto& [f, n] : factors) v *= rat_pow(f, n.convert_to<long>());
    return v;
}

namespace {

// tail of a product whose factors satisfy |f(d) - 1| <= 84 q^{-2d}: bound on
// |bare(D) - bare(infinity)| via the closed-point bound N_d <= q^d/d + q^{d/2}
double product_tail(uint64_t q, int D, double bare_value) {
    double z = std::pow(static_cast<double>(q), -(D + 1));
    if (84.0 * z * z > 0.5) return 1e9;  // bound not applicable this shallow
    double qd = static_cast<double>(q);
    // sum_{d > D} (q^{-d}/d + q^{-3d/2}), geometric overestimates
    double s1 = std::pow(qd, -(D + 1)) / (D + 1) / (1.0 - 1.0 / qd);
    double s2 = std::pow(qd, -1.5 * (D + 1)) / (1.0 - std::pow(qd, -1.5));
    double log_tail = 168.0 * (s1 + s2);
    return std::abs(bare_value) * std::expm1(log_tail);
}

}  // namespace

EulerProduct tamagawa(uint64_t q, int D) {
    if (D < 0) throw PreconditionError("tamagawa: D >= 0");
    EulerProduct ep;
    ep.q = q;
    ep.D = D;
    // q^2 (1 - 1/q)^{-6}
    ep.prefactor = Rat(Int(q) * Int(q)) * rat_pow(Rat(Int(q), Int(q) - 1), 6);
    for (int d = 1; d <= D; ++d) {
        Rat z = q_inv_pow(q, static_cast<unsigned>(d));
        Rat f = rat_pow(1 - z, 6) *
                Rat(surface_point_count(q, d), int_pow(Int(q), static_cast<unsigned>(2 * d)));
        ep.factors.push_back({f, closed_point_count(q, d)});
    }
    ep.tail_bound = product_tail(q, D, ep.bare());
    return ep;
}

EulerProduct residue_closed_form(uint64_t q, int D) {
    EulerProduct ep;
    ep.q = q;
    ep.D = D;
    ep.prefactor = rat_pow(Rat(Int(q), Int(q) - 1), 4);
    for (int d = 1; d <= D; ++d) {
        Rat z = q_inv_pow(q, static_cast<unsigned>(d));
        Rat f = rat_pow(1 - z, 6) * (1 + 6 * z + z * z);
        ep.factors.push_back({f, closed_point_count(q, d)});
    }
    ep.tail_bound = product_tail(q, D, ep.bare());
    return ep;
}

Rat virtual_zeta_factor(uint64_t q, int d, const std::array<Rat, 4>& t) {
    if (d < 1) throw PreconditionError("virtual_zeta_factor: d >= 1");
    Rat z = q_inv_pow(q, static_cast<unsigned>(d));
    Rat base = 1 - 6 * z * z + 8 * z * z * z - 3 * rat_pow(z, 4);
    Rat shell = 1 - 2 * z + 2 * rat_pow(z, 3) - rat_pow(z, 4);
    Rat sum = 0;
    for (const Rat& ti : t) {
        // w = (t_i / q)^d; the geometric series needs |w| < 1
        Rat w = rat_pow(ti, d) * z;
        Rat aw = w < 0 ? -w : w;
        if (aw >= 1) throw PreconditionError("virtual_zeta_factor: divergent t");
        sum += w / (1 - w);
    }
    return base + shell * sum;
}

ResidueCompare residue_compare(uint64_t q, int D) {
    if (D < 0) throw PreconditionError("residue_compare: D >= 1");
    ResidueCompare rc;
    rc.closed_form = residue_closed_form(q, D);
    rc.abel_limit.q = q;
    rc.abel_limit.D = D;
    rc.abel_limit.prefactor = rat_pow(Rat(Int(q), Int(q) - 1), 4);
    rc.max_factor_difference = 0;
    std::array<Rat, 4> ones{1, 1, 1, 1};
    for (int d = 1; d <= D; ++d) {
        Rat z = q_inv_pow(q, static_cast<unsigned>(d));
        // the (1 - t_i)-normalization leaves (1 - z)^4 per factor at t = 1
        Rat abel = rat_pow(1 - z, 4) * virtual_zeta_factor(q, d, ones);
        rc.abel_limit.factors.push_back({abel, closed_point_count(q, d)});
        Rat diff = abel - rc.closed_form.factors[d - 1].first;
        if (diff < 0) diff = -diff;
        if (diff > rc.max_factor_difference) rc.max_factor_difference = diff;
    }
    rc.abel_limit.tail_bound = product_tail(q, D, rc.abel_limit.bare());
    return rc;
}

TSeries virtual_zeta_factor_formal(uint64_t q, int d, const std::array<int, 4>& tmax,
                                   int gamma_max) {
    TSeries s;
    auto add = [&](const std::array<int, 4>& e, int zdeg, const Int& c) {
        if (zdeg > gamma_max) return;
        for (int i = 0; i < 4; ++i)
            if (e[i] > tmax[i]) return;
        s[{e, zdeg}] += c;
    };
    std::array<int, 4> zero{0, 0, 0, 0};
    add(zero, 0, 1);
    add(zero, 2 * d, -6);
    add(zero, 3 * d, 8);
    add(zero, 4 * d, -3);
    for (int i = 0; i < 4; ++i) {
        for (int m = 1; m * d <= tmax[i]; ++m) {
            std::array<int, 4> e = zero;
            e[i] = m * d;
            Int qp = int_pow(Int(q), static_cast<unsigned>(m * d));  // the (q t_i)^{dm} power
            add(e, (2 * m) * d, qp);
            add(e, (2 * m + 1) * d, -2 * qp);
            add(e, (2 * m + 3) * d, 2 * qp);
            add(e, (2 * m + 4) * d, -qp);
        }
    }
    // drop zero coefficients introduced by cancellation
    for (auto it = s.begin(); it != s.end();)
        it = it->second == 0 ? s.erase(it) : std::next(it);
    return s;
}

std::string series_text(const TSeries& s) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [key, coef] : s) {
        const auto& [e, zdeg] = key;
        if (!first) os << " + ";
        first = false;
        os << coef.str();
        for (int i = 0; i < 4; ++i)
            if (e[i]) os << "*t" << (i + 1) << "^" << e[i];
        if (zdeg) os << "*z^" << zdeg;
    }
    return first ? "0" : os.str();
}

namespace {

TSeries series_mul(const TSeries& a, const TSeries& b, const std::array<int, 4>& tmax,
                   int gamma_max) {
    TSeries out;
    for (const auto& [ka, ca] : a)
        for (const auto& [kb, cb] : b) {
            int zdeg = ka.second + kb.second;
            if (zdeg > gamma_max) continue;
            std::array<int, 4> e;
            bool ok = true;
            for (int i = 0; i < 4; ++i) {
                e[i] = ka.first[i] + kb.first[i];
                if (e[i] > tmax[i]) ok = false;
            }
            if (!ok) continue;
            out[{e, zdeg}] += ca * cb;
        }
    for (auto it = out.begin(); it != out.end();)
        it = it->second == 0 ? out.erase(it) : std::next(it);
    return out;
}

TSeries series_pow(const TSeries& a, const Int& n_in, const std::array<int, 4>& tmax,
                   int gamma_max) {
    TSeries r;
    r[{{0, 0, 0, 0}, 0}] = 1;
    Int n = n_in;
    TSeries base = a;
    while (n > 0) {
        if ((n & 1) != 0) r = series_mul(r, base, tmax, gamma_max);
        n >>= 1;
        if (n > 0) base = series_mul(base, base, tmax, gamma_max);
    }
    return r;
}

}  // namespace

CoefficientCompare mobius_coefficient_compare(uint64_t q, const std::array<int, 4>& k,
                                              int gamma_max, int deg_max,
                                              int deg_max_series) {
    if (deg_max_series < 0) deg_max_series = deg_max;
    if (deg_max_series != deg_max)
        throw ConfigError("mobius_coefficient_compare: mismatched truncation degrees");
    CoefficientCompare cc;
    cc.gamma_max = gamma_max;
    cc.deg_max = deg_max;

    // poset side: the point table bounded by deg_max restricts every divisor
    // and chain support to the matched truncation
    ff::FieldTable F(static_cast<uint32_t>(q));
    ff::PointTable pt(F, deg_max);
    int sumk = k[0] + k[1] + k[2] + k[3];
    cc.poset_sum = Rat(int_pow(Int(q), static_cast<unsigned>(sumk))) *
                   strata::main_term_virtual(pt, k, gamma_max, deg_max);

    // series side: product of the formal local factors over the same points
    TSeries prod;
    prod[{{0, 0, 0, 0}, 0}] = 1;
    for (int d = 1; d <= deg_max; ++d) {
        TSeries f = virtual_zeta_factor_formal(q, d, k, gamma_max);
        prod = series_mul(prod, series_pow(f, closed_point_count(q, d), k, gamma_max), k,
                          gamma_max);
    }
    // extract the t^k coefficient and evaluate the z-polynomial at z = 1/q
    Rat coef = 0;
    for (const auto& [key, c] : prod) {
        if (key.first != k) continue;
        coef += Rat(c) * q_inv_pow(q, static_cast<unsigned>(key.second));
    }
    cc.product_coefficient = coef;
    cc.difference = cc.poset_sum - cc.product_coefficient;
    return cc;
}

PredictorReport manin_predictor(uint64_t q, const Rat& eps, int d, int D, int dilation) {
    if (eps < 0) throw PreconditionError("manin_predictor: eps >= 0");
    PredictorReport rep;
    rep.q = q;
    rep.d = d;
    rep.eps = eps;
    picard::Cone cone = eps == 0 ? picard::Cone::full_nef() : picard::Cone::shrunk(eps);
    auto alpha = picard::alpha_constant(cone, true, dilation);
    rep.alpha_value = alpha.value;
    rep.alpha_exact = alpha.is_exact;
    EulerProduct tau = tamagawa(q, D);
    rep.tau = tau.value();
    rep.tau_tail = to_double(tau.prefactor) * tau.tail_bound;
    double qd = static_cast<double>(q);
    rep.leading = 1.0 / (1.0 - 1.0 / qd) * to_double(rep.alpha_value) * rep.tau *
                  std::pow(qd, d) * std::pow(static_cast<double>(d), 5);
    // refined form: tau * sum over integral classes in the cone with h <= d
    double acc = 0;
    uint64_t prev = 0;
    for (int j = 0; j <= d; ++j) {
        uint64_t nj = picard::ehrhart_count(cone, j);
        acc += static_cast<double>(nj - prev) * std::pow(qd, j);
        prev = nj;
    }
    rep.ehrhart_sum = rep.tau * acc;
    return rep;
}

Int betti_constant(int n, const std::vector<int>& degrees) {
    if (degrees.empty()) throw PreconditionError("betti_constant: degrees must be nonempty");
    for (size_t i = 1; i < degrees.size(); ++i)
        if (degrees[i] < degrees[i - 1])
            throw PreconditionError("betti_constant: degrees must be nondecreasing");
    int dr = degrees.back();
    int base = std::max(dr, 2) + 2;
    int expo = 2 * n + 4;
    for (int di : degrees) expo += di;
    return int_pow(Int(base), static_cast<unsigned>(expo));
}

}  // namespace dp4::zeta
