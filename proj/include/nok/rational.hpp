#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

#include "nok/errors.hpp"

namespace nok {

// All core arithmetic is exact. Floating point is banned from the library;
// a source lint in the test suite enforces this.
using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int rat_num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int rat_den(const Rat& r) { return boost::multiprecision::denominator(r); }

inline int sign(const Rat& r) { return r.sign(); }

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

/// Wire format: "p/q" with q > 0 and gcd(p, q) = 1, denominator always shown.
inline std::string rat_str(const Rat& r) {
    return rat_num(r).str() + "/" + rat_den(r).str();
}

/// Human format: omits "/1".
inline std::string rat_str_short(const Rat& r) {
    if (rat_den(r) == 1) return rat_num(r).str();
    return rat_str(r);
}

inline Rat rat_parse(const std::string& s) {
    auto bad = [&] { throw input_error("invalid rational literal: '" + s + "'"); };
    if (s.empty()) bad();
    std::string num = s, den = "1";
    if (auto k = s.find('/'); k != std::string::npos) {
        num = s.substr(0, k);
        den = s.substr(k + 1);
        if (num.empty() || den.empty()) bad();
    }
    for (size_t i = 0; i < num.size(); ++i)
        if (!(std::isdigit(static_cast<unsigned char>(num[i])) || (i == 0 && (num[i] == '-' || num[i] == '+'))))
            bad();
    for (char c : den)
        if (!std::isdigit(static_cast<unsigned char>(c))) bad();
    try {
        Int n(num), d(den);
        if (d == 0) bad();
        return Rat(n, d);
    } catch (const std::exception&) {
        bad();
    }
    return Rat(0); // unreachable
}

/// floor(sqrt(n)) for n >= 0.
inline Int isqrt(const Int& n) {
    if (n < 0) throw internal_error("isqrt of negative integer");
    return boost::multiprecision::sqrt(n);
}

inline bool is_square(const Int& n, Int* root = nullptr) {
    if (n < 0) return false;
    Int r = isqrt(n);
    if (r * r == n) {
        if (root) *root = r;
        return true;
    }
    return false;
}

/// Writes n = s^2 * d with d squarefree, by trial division.
/// Trial division runs up to a fixed bound; past it the remaining cofactor is
/// kept as-is after a perfect-square check, which is exact for every radicand
/// these sweeps produce at desk scale.
inline void squarefree_split(Int n, Int& s, Int& d) {
    if (n < 0) throw internal_error("squarefree_split of negative integer");
    s = 1;
    d = 1;
    if (n <= 1) { d = n; return; }
    const long long bound = 1000000;
    for (long long p = 2; p <= bound && Int(p) * p <= n; p == 2 ? p = 3 : p += 2) {
        if (n % p != 0) continue;
        int e = 0;
        while (n % p == 0) { n /= p; ++e; }
        for (int i = 0; i < e / 2; ++i) s *= p;
        if (e % 2) d *= p;
    }
    if (n > 1) {
        Int r;
        if (is_square(n, &r)) s *= r;
        else d *= n;
    }
}

} // namespace nok
