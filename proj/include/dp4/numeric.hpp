#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <cstdint>
#include <string>

namespace dp4 {

using Int = boost::multiprecision::mpz_int;
using Rat = boost::multiprecision::mpq_rational;

inline Int int_pow(Int base, unsigned e) {
    Int r = 1;
    while (e) {
        if (e & 1) r *= base;
        base *= base;
        e >>= 1;
    }
    return r;
}

inline Rat rat_pow(const Rat& base, long e) {
    if (e < 0) return 1 / rat_pow(base, -e);
    Rat r = 1, b = base;
    auto k = static_cast<unsigned long>(e);
    while (k) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
    }
    return r;
}

// q^{-e} as an exact rational, e >= 0
inline Rat q_inv_pow(uint64_t q, unsigned e) {
    return Rat(1, int_pow(Int(q), e));
}

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

inline std::string rat_string(const Rat& r) {
    return r.str();
}

}  // namespace dp4
