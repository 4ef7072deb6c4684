#pragma once

#include <optional>
#include <vector>

#include "nok/rational.hpp"

namespace nok {

using RatVec = std::vector<Rat>;
using RatMat = std::vector<std::vector<Rat>>;

namespace detail {

/// Clears denominators row by row, returning an integer matrix that row-wise
/// represents the same linear system.
inline std::vector<std::vector<Int>> clear_denominators(const RatMat& m) {
    std::vector<std::vector<Int>> out(m.size());
    for (size_t i = 0; i < m.size(); ++i) {
        Int l = 1;
        for (const Rat& x : m[i]) l = boost::multiprecision::lcm(l, rat_den(x));
        out[i].reserve(m[i].size());
        for (const Rat& x : m[i]) out[i].push_back(rat_num(x) * (l / rat_den(x)));
    }
    return out;
}

} // namespace detail

/// Exact determinant by fraction-free Bareiss elimination on the
/// denominator-cleared matrix.
inline Rat determinant(const RatMat& a) {
    const size_t n = a.size();
    for (const auto& row : a)
        if (row.size() != n) throw internal_error("determinant of non-square matrix");
    if (n == 0) return Rat(1);

    // Row scaling changes det by the product of the scalars; track it.
    Rat scale(1);
    std::vector<std::vector<Int>> m(n);
    for (size_t i = 0; i < n; ++i) {
        Int l = 1;
        for (const Rat& x : a[i]) l = boost::multiprecision::lcm(l, rat_den(x));
        scale *= Rat(1, l);
        for (const Rat& x : a[i]) m[i].push_back(rat_num(x) * (l / rat_den(x)));
    }

    Int prev = 1;
    int sgn = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            size_t piv = k + 1;
            while (piv < n && m[piv][k] == 0) ++piv;
            if (piv == n) return Rat(0);
            std::swap(m[k], m[piv]);
            sgn = -sgn;
        }
        for (size_t i = k + 1; i < n; ++i)
            for (size_t j = k + 1; j < n; ++j) {
                Int t = m[i][j] * m[k][k] - m[i][k] * m[k][j];
                m[i][j] = t / prev; // exact division (Bareiss)
            }
        prev = m[k][k];
    }
    return scale * Rat(sgn) * Rat(m[n - 1][n - 1]);
}

/// Solves A x = b exactly. Returns nullopt when A is singular.
inline std::optional<RatVec> solve_linear(RatMat a, RatVec b) {
    const size_t n = a.size();
    if (b.size() != n) throw internal_error("solve_linear: shape mismatch");
    for (auto& row : a)
        if (row.size() != n) throw internal_error("solve_linear: non-square matrix");
    if (n == 0) return RatVec{};

    for (size_t i = 0; i < n; ++i) a[i].push_back(b[i]);
    auto m = detail::clear_denominators(a);

    // Fraction-free forward elimination on the augmented matrix.
    Int prev = 1;
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            size_t piv = k + 1;
            while (piv < n && m[piv][k] == 0) ++piv;
            if (piv == n) return std::nullopt;
            std::swap(m[k], m[piv]);
        }
        for (size_t i = k + 1; i < n; ++i)
            for (size_t j = k + 1; j <= n; ++j) {
                Int t = m[i][j] * m[k][k] - m[i][k] * m[k][j];
                m[i][j] = t / prev;
            }
        prev = m[k][k];
    }
    if (m[n - 1][n - 1] == 0) return std::nullopt;

    RatVec x(n, Rat(0));
    for (size_t ii = n; ii-- > 0;) {
        Rat acc(m[ii][n]);
        for (size_t j = ii + 1; j < n; ++j) acc -= Rat(m[ii][j]) * x[j];
        x[ii] = acc / Rat(m[ii][ii]);
    }
    return x;
}

/// Characteristic polynomial coefficients of a square rational matrix,
/// monic, by the Faddeev–LeVerrier recurrence: returns c so that
/// det(tI - A) = t^n + c[n-1] t^(n-1) + ... + c[0].
inline RatVec char_poly(const RatMat& a) {
    const size_t n = a.size();
    RatMat m(n, RatVec(n, Rat(0)));
    RatVec c(n, Rat(0));
    RatMat id(n, RatVec(n, Rat(0)));
    for (size_t i = 0; i < n; ++i) id[i][i] = 1;

    RatMat prod = id;
    Rat coeff(1);
    for (size_t k = 1; k <= n; ++k) {
        // prod = A * (previous adjusted)
        RatMat next(n, RatVec(n, Rat(0)));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                Rat s(0);
                for (size_t l = 0; l < n; ++l) s += a[i][l] * prod[l][j];
                next[i][j] = s;
            }
        Rat tr(0);
        for (size_t i = 0; i < n; ++i) tr += next[i][i];
        coeff = -tr / Rat(static_cast<long long>(k));
        c[n - k] = coeff;
        for (size_t i = 0; i < n; ++i) next[i][i] += coeff;
        prod = next;
    }
    return c;
}

} // namespace nok
