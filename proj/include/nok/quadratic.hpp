#pragma once

#include <string>

#include "nok/rational.hpp"

namespace nok {

/// Element a + b*sqrt(d) of a real quadratic extension of Q.
///
/// Canonical form: either b == 0 and d == 0 (a plain rational), or b != 0 and
/// d squarefree >= 2. Canonical triples are equal iff the values are equal,
/// so polygon-vertex equality stays decidable when t_max is irrational.
struct QuadExt {
    Rat a;
    Rat b;
    Int d;

    QuadExt() : a(0), b(0), d(0) {}
    QuadExt(const Rat& r) : a(r), b(0), d(0) {} // NOLINT: implicit by design
    QuadExt(long long r) : a(r), b(0), d(0) {}
    QuadExt(const Rat& a_, const Rat& b_, const Int& d_) : a(a_), b(b_), d(d_) { normalize(); }

    bool is_rational() const { return b == 0; }

    void normalize() {
        if (b == 0 || d == 0) { b = 0; d = 0; return; }
        if (d < 0) throw internal_error("QuadExt with negative radicand");
        Int s, df;
        squarefree_split(d, s, df);
        b *= s;
        d = df;
        if (d == 1) { a += b; b = 0; d = 0; }
        if (b == 0) d = 0;
    }

    /// sqrt(r) of a nonnegative rational, exact.
    static QuadExt root(const Rat& r) {
        if (r < 0) throw math_error("square root of a negative rational");
        if (r == 0) return QuadExt(Rat(0));
        // sqrt(p/q) = sqrt(p*q)/q
        Int p = rat_num(r), q = rat_den(r);
        return QuadExt(Rat(0), Rat(1, q), p * q);
    }

    int sgn() const {
        if (b == 0) return sign(a);
        if (a == 0) return sign(b);
        int sa = sign(a), sb = sign(b);
        if (sa == sb) return sa;
        // a and b of opposite sign: compare a^2 with b^2 d.
        Rat lhs = a * a, rhs = b * b * Rat(d);
        if (lhs == rhs) throw internal_error("QuadExt: a^2 == b^2 d with b != 0"); // d squarefree>1 forbids
        return lhs > rhs ? sa : sb;
    }

    friend bool same_field(const QuadExt& x, const QuadExt& y) {
        return x.d == y.d || x.is_rational() || y.is_rational();
    }

    static void require_same_field(const QuadExt& x, const QuadExt& y) {
        if (!same_field(x, y))
            throw internal_error("QuadExt arithmetic across distinct quadratic fields");
    }

    friend QuadExt operator+(const QuadExt& x, const QuadExt& y) {
        require_same_field(x, y);
        QuadExt r;
        r.a = x.a + y.a;
        r.b = x.b + y.b;
        r.d = x.is_rational() ? y.d : x.d;
        r.normalize();
        return r;
    }
    friend QuadExt operator-(const QuadExt& x) { QuadExt r(x); r.a = -r.a; r.b = -r.b; return r; }
    friend QuadExt operator-(const QuadExt& x, const QuadExt& y) { return x + (-y); }

    friend QuadExt operator*(const QuadExt& x, const QuadExt& y) {
        require_same_field(x, y);
        Int d = x.is_rational() ? y.d : x.d;
        QuadExt r;
        r.a = x.a * y.a + x.b * y.b * Rat(d);
        r.b = x.a * y.b + x.b * y.a;
        r.d = d;
        r.normalize();
        return r;
    }

    friend bool operator==(const QuadExt& x, const QuadExt& y) {
        return x.a == y.a && x.b == y.b && x.d == y.d;
    }
    friend bool operator!=(const QuadExt& x, const QuadExt& y) { return !(x == y); }
    friend bool operator<(const QuadExt& x, const QuadExt& y) { return (x - y).sgn() < 0; }
    friend bool operator>(const QuadExt& x, const QuadExt& y) { return (x - y).sgn() > 0; }
    friend bool operator<=(const QuadExt& x, const QuadExt& y) { return (x - y).sgn() <= 0; }
    friend bool operator>=(const QuadExt& x, const QuadExt& y) { return (x - y).sgn() >= 0; }

    std::string str() const {
        if (is_rational()) return rat_str_short(a);
        std::string s = rat_str_short(a) + (sign(b) < 0 ? "-" : "+");
        Rat ab = rat_abs(b);
        if (ab != 1) s += rat_str_short(ab) + "*";
        s += "sqrt(" + d.str() + ")";
        return s;
    }
};

} // namespace nok
