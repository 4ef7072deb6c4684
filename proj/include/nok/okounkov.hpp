#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nok/quadratic.hpp"
#include "nok/zariski.hpp"

namespace nok {

enum class FlagKind { Smooth, Proper, Infinitesimal };

inline std::string to_string(FlagKind k) {
    switch (k) {
        case FlagKind::Smooth: return "smooth";
        case FlagKind::Proper: return "proper";
        case FlagKind::Infinitesimal: return "infinitesimal";
    }
    return "?";
}

/// An admissible flag for the workspace surface: a curve Y1 (declared curve
/// or exceptional) smooth at a marked point p, living on the blowup of the
/// chain under p. Sweeps run on that model with the whole universe carried
/// along as strict transforms.
struct Flag {
    UniverseRef base_universe;  // on the workspace model
    UniverseRef sweep_universe; // on the flag model
    Transport transport;        // workspace model -> flag model
    std::vector<PointId> new_points;
    std::string y1_name; // universe element name: curve name or "E(q)"
    PointId p;
    PointId center;
    FlagKind kind = FlagKind::Smooth;

    std::string name() const { return to_string(kind) + ":" + y1_name + "@" + p; }

    const UniverseElement& y1_element() const { return sweep_universe->element(y1_name); }
};

/// Builds a flag from a curve name or an exceptional point ("E(q)" spelling
/// is handled by the caller; pass exc_point nonempty for exceptional Y1).
inline Flag make_flag(const UniverseRef& U, const std::string& curve_name, const PointId& exc_point,
                      const PointId& p) {
    const PointForest& forest = U->forest();
    if (!forest.contains(p)) throw input_error("unknown flag point '" + p + "'");
    if (U->model()->blown(p))
        throw math_error("flag point '" + p + "' is blown up in the model; the flag would not live on it");

    Flag f;
    f.base_universe = U;
    f.p = p;
    f.center = forest.base_of(p);

    std::vector<PointId> chain = forest.chain_to(p);
    chain.pop_back(); // all strictly under p
    for (const PointId& q : chain)
        if (!U->model()->blown(q)) f.new_points.push_back(q);
    f.sweep_universe = U->refine(f.new_points, &f.transport);

    if (!exc_point.empty()) {
        if (!forest.on_exceptional(p, exc_point))
            throw math_error("point '" + p + "' does not lie on E(" + exc_point + ")");
        f.y1_name = "E(" + exc_point + ")";
        f.kind = FlagKind::Infinitesimal;
        f.sweep_universe->element(f.y1_name); // must exist (exc_point is blown on the flag model)
    } else {
        const CurveRecord& c = U->curve(curve_name);
        long long m = mult_at(forest, CurveLike::of(c), p);
        if (m == 0) throw math_error("point '" + p + "' does not lie on curve '" + curve_name + "'");
        if (m > 1) throw math_error("curve '" + curve_name + "' is singular at '" + p + "'; flag not admissible");
        f.y1_name = curve_name;
        f.kind = f.new_points.empty() ? FlagKind::Smooth : FlagKind::Proper;
    }
    return f;
}

inline Flag make_curve_flag(const UniverseRef& U, const std::string& curve, const PointId& p) {
    return make_flag(U, curve, {}, p);
}
inline Flag make_exceptional_flag(const UniverseRef& U, const PointId& exc, const PointId& p) {
    return make_flag(U, {}, exc, p);
}

// ---------------------------------------------------------------------------
// Flag valuations
// ---------------------------------------------------------------------------

struct FlagValuation {
    Rat nu1, nu2;
    friend bool operator==(const FlagValuation& a, const FlagValuation& b) {
        return a.nu1 == b.nu1 && a.nu2 == b.nu2;
    }
};

/// An effective divisor supported on declared universe curves.
using EffectiveDivisor = std::vector<std::pair<std::string, Rat>>;

/// The flag valuation (nu1, nu2) of an effective divisor: the order along Y1
/// of its pullback to the flag model, then the order at p of the restriction
/// of what remains. Exceptional components of the pullback carry their value
/// vector coefficients.
inline FlagValuation flag_valuation(const EffectiveDivisor& F, const Flag& flag) {
    const CurveUniverse& base = *flag.base_universe;
    const PointForest& forest = base.forest();
    std::vector<std::pair<CurveLike, Rat>> parts;
    for (const auto& [name, coeff] : F) {
        if (coeff < 0) throw math_error("flag_valuation: effective divisor required");
        if (coeff == 0) continue;
        parts.emplace_back(CurveLike::of(base.curve(name)), coeff);
    }

    std::set<PointId> home;
    for (const PointId& q : base.model()->blown_points()) home.insert(q);

    const UniverseElement& y1 = flag.y1_element();
    FlagValuation v;

    // nu1 = ord_{Y1} of the pullback.
    if (y1.like.is_exceptional()) {
        std::map<PointId, Rat> memo;
        v.nu1 = value_at(forest, parts, y1.like.exc, home, &memo);
    } else {
        v.nu1 = 0;
        for (const auto& [c, coeff] : parts)
            if (c.curve->name == flag.y1_name) v.nu1 = coeff;
    }

    // nu2 = sum over residual components through p of coeff * (component . Y1)_p.
    v.nu2 = 0;
    for (const auto& [c, coeff] : parts) {
        if (!y1.like.is_exceptional() && c.curve->name == flag.y1_name) continue;
        v.nu2 += coeff * local_intersection(forest, c, y1.like, flag.p);
    }
    std::map<PointId, Rat> memo;
    for (const PointId& s : flag.new_points) {
        if (y1.like.is_exceptional() && y1.like.exc == s) continue;
        Rat w = value_at(forest, parts, s, home, &memo);
        if (w == 0) continue;
        v.nu2 += w * local_intersection(forest, CurveLike::exceptional_of(s), y1.like, flag.p);
    }
    return v;
}

/// The matrix of the branch-sequence lemma: (nu1, nu2) evaluated through the
/// k-th infinitesimal flag of a branch resolved at index k0.
inline FlagValuation infinitesimal_transform(const FlagValuation& v, long long k, long long k0) {
    return FlagValuation{Rat(k - k0) * v.nu1 + v.nu2, v.nu1};
}

// ---------------------------------------------------------------------------
// Newton-Okounkov polygons by parametric Zariski sweep
// ---------------------------------------------------------------------------

/// Affine function c0 + c1 * t with exact coefficients.
struct Affine {
    Rat c0, c1;
    Rat eval(const Rat& t) const { return c0 + c1 * t; }
    QuadExt eval(const QuadExt& t) const { return QuadExt(c0) + QuadExt(c1) * t; }
    friend Affine operator+(const Affine& a, const Affine& b) { return Affine{a.c0 + b.c0, a.c1 + b.c1}; }
};

struct Chamber {
    Rat t0;
    QuadExt t1;
    std::vector<std::string> support; // element names, sorted
    Affine alpha, beta;
};

struct NOPolygon {
    std::string flag_name;
    FlagKind kind = FlagKind::Smooth;
    Rat t_min;
    QuadExt t_max;
    Rat p_squared; // (positive part of D)^2; twice the polygon area
    std::vector<Chamber> chambers;
    std::vector<std::pair<QuadExt, QuadExt>> vertices; // counterclockwise, collinear pruned
};

inline bool polygons_equal(const NOPolygon& a, const NOPolygon& b) {
    return a.vertices == b.vertices;
}

/// First coordinate of the leftmost polygon point: the coefficient of the
/// flag curve in the negative part of D.
inline Rat leftmost(const NOPolygon& poly) { return poly.t_min; }

/// Height of the polygon's intersection with the vertical axis, which equals
/// P . Y1. Requires the flag curve to avoid the negative part (t_min = 0).
inline Rat axis_height(const NOPolygon& poly) {
    if (poly.t_min != 0)
        throw math_error("axis_height: flag curve appears in the negative part (t_min > 0)");
    const Chamber& c = poly.chambers.front();
    return c.beta.eval(Rat(0)) - c.alpha.eval(Rat(0));
}

namespace detail {

struct SweepState {
    const CurveUniverse* U = nullptr;
    size_t y1 = 0;             // element index of the flag curve
    DivisorClass D;            // pullback of the divisor to the flag model
    RatMat prod;               // cached pairwise products
    std::vector<RatVec> dcoef; // element classes as raw vectors (for P(t))

    Rat pair(size_t i, size_t j) const { return prod[i][j]; }
};

/// Exact solve of the orthogonality system on a support, affine in t:
/// returns per-support-index affine coefficients a_i(t).
inline std::vector<Affine> parametric_solve(const SweepState& st, const std::vector<size_t>& s) {
    const auto& elems = st.U->elements();
    if (s.empty()) return {};
    std::vector<DivisorClass> classes;
    std::vector<std::string> labels;
    for (size_t i : s) { classes.push_back(elems[i].cls); labels.push_back(elems[i].name); }
    GramCertificate cert = is_negative_definite(classes, labels);
    if (!cert.negative_definite())
        throw math_error("not pseudoeffective relative to universe along the sweep");
    RatMat g(s.size(), RatVec(s.size()));
    RatVec rhs0(s.size()), rhs1(s.size());
    for (size_t a = 0; a < s.size(); ++a) {
        rhs0[a] = intersect(st.D, elems[s[a]].cls);                    // constant part
        rhs1[a] = -intersect(elems[st.y1].cls, elems[s[a]].cls);      // slope from -t*Y1
        for (size_t b = 0; b < s.size(); ++b) g[a][b] = st.pair(s[a], s[b]);
    }
    auto x0 = solve_linear(g, rhs0);
    auto x1 = solve_linear(g, rhs1);
    if (!x0 || !x1) throw internal_error("sweep Gram matrix singular");
    std::vector<Affine> out(s.size());
    for (size_t a = 0; a < s.size(); ++a) out[a] = Affine{(*x0)[a], (*x1)[a]};
    return out;
}

/// P(t) = D - t Y1 - sum a_i(t) N_i as a vector of affine coordinate functions.
inline std::vector<Affine> positive_part(const SweepState& st, const std::vector<size_t>& s,
                                         const std::vector<Affine>& a) {
    const auto& elems = st.U->elements();
    size_t rank = st.D.c.size();
    std::vector<Affine> P(rank);
    for (size_t k = 0; k < rank; ++k) P[k] = Affine{st.D.c[k], Rat(0)};
    for (size_t k = 0; k < rank; ++k) P[k].c1 -= elems[st.y1].cls.c[k];
    for (size_t idx = 0; idx < s.size(); ++idx)
        for (size_t k = 0; k < rank; ++k) {
            P[k].c0 -= a[idx].c0 * elems[s[idx]].cls.c[k];
            P[k].c1 -= a[idx].c1 * elems[s[idx]].cls.c[k];
        }
    return P;
}

inline Rat pairing(const ModelRef& model, const RatVec& x, const RatVec& y) {
    Rat s = x[0] * y[0] * Rat(model->base_selfint());
    for (size_t i = 1; i < x.size(); ++i) s -= x[i] * y[i];
    return s;
}

/// P(t) . class as an affine function of t.
inline Affine product_affine(const SweepState& st, const std::vector<Affine>& P, const RatVec& cls) {
    const ModelRef& model = st.D.model;
    RatVec p0(P.size()), p1(P.size());
    for (size_t k = 0; k < P.size(); ++k) { p0[k] = P[k].c0; p1[k] = P[k].c1; }
    return Affine{pairing(model, p0, cls), pairing(model, p1, cls)};
}

} // namespace detail

/// Computes the Newton-Okounkov polygon of D with respect to the flag by the
/// parametric sweep of Zariski decompositions of D - t Y1. Chamber data is
/// re-certified against a full decomposition at an interior point of each
/// chamber, and the polygon's doubled area is checked against P^2 exactly.
inline NOPolygon no_polygon(const DivisorClass& D, const Flag& flag) {
    const UniverseRef& Uref = flag.sweep_universe;
    const CurveUniverse& U = *Uref;
    const auto& elems = U.elements();
    const PointForest& forest = U.forest();

    detail::SweepState st;
    st.U = &U;
    st.y1 = U.element_index(flag.y1_name);
    st.D = flag.transport(D);
    const size_t n = elems.size();
    st.prod.assign(n, RatVec(n, Rat(0)));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j <= i; ++j)
            st.prod[i][j] = st.prod[j][i] = intersect(elems[i].cls, elems[j].cls);

    ZariskiDecomposition z0 = zariski_decompose(st.D, Uref);
    Rat p2 = intersect(z0.P, z0.P);
    if (p2 <= 0) throw math_error("divisor is not big relative to the universe (P^2 <= 0)");

    NOPolygon poly;
    poly.flag_name = flag.name();
    poly.kind = flag.kind;
    poly.p_squared = p2;
    poly.t_min = z0.coefficient_of(flag.y1_name);

    // Local intersection numbers (N_i . Y1)_p, cached per element.
    std::map<size_t, Rat> li_cache;
    auto li = [&](size_t i) {
        auto it = li_cache.find(i);
        if (it != li_cache.end()) return it->second;
        Rat v = local_intersection(forest, elems[i].like, elems[st.y1].like, flag.p);
        li_cache[i] = v;
        return v;
    };

    std::set<size_t> support;
    for (const auto& [i, a] : z0.N) {
        (void)a;
        if (i != st.y1) support.insert(i);
    }

    Rat t0 = poly.t_min;
    const size_t chamber_guard = 2 * n + 8;

    for (size_t rounds = 0;; ++rounds) {
        if (rounds > chamber_guard) throw internal_error("sweep exceeded the chamber-change guard");

        // Support fixpoint just after t0: drop components whose coefficient
        // vanishes with negative slope, then admit curves whose product with
        // P(t) is zero and decreasing. Removals run before additions.
        std::vector<size_t> s;
        std::vector<Affine> a, P;
        for (size_t iter = 0;; ++iter) {
            if (iter > 4 * (n + 2)) throw internal_error("support fixpoint did not stabilize");
            s.assign(support.begin(), support.end());
            a = detail::parametric_solve(st, s);
            bool changed = false;
            for (size_t idx = 0; idx < s.size(); ++idx) {
                Rat v = a[idx].eval(t0);
                if (v < 0) throw internal_error("negative coefficient inside a chamber");
                if (v == 0 && a[idx].c1 < 0) { support.erase(s[idx]); changed = true; }
            }
            if (changed) continue;
            P = detail::positive_part(st, s, a);
            for (size_t i = 0; i < n; ++i) {
                if (i == st.y1 || support.count(i)) continue;
                Affine g = detail::product_affine(st, P, elems[i].cls.c);
                Rat v = g.eval(t0);
                if (v < 0) throw internal_error("nef violation at a chamber boundary");
                if (v == 0 && g.c1 < 0) { support.insert(i); changed = true; }
            }
            if (!changed) break;
        }

        Affine width = detail::product_affine(st, P, elems[st.y1].cls.c);
        if (width.eval(t0) < 0) throw internal_error("negative width against the flag curve");

        // P(t)^2 as an exact quadratic in s = t - t0.
        RatVec A(P.size()), B(P.size());
        for (size_t k = 0; k < P.size(); ++k) { A[k] = P[k].eval(t0); B[k] = P[k].c1; }
        Rat q0 = detail::pairing(st.D.model, A, A);
        Rat q1 = detail::pairing(st.D.model, A, B); // half the linear coefficient
        Rat q2 = detail::pairing(st.D.model, B, B);

        if (q0 == 0) { // bigness exhausted exactly at the chamber boundary
            poly.t_max = QuadExt(t0);
            break;
        }

        // Smallest positive root of q(s) = q2 s^2 + 2 q1 s + q0.
        std::optional<QuadExt> mu;
        if (q2 == 0) {
            if (q1 < 0) mu = QuadExt(t0) + QuadExt(-q0 / (2 * q1));
        } else {
            Rat disc = q1 * q1 - q2 * q0;
            if (disc >= 0) {
                QuadExt root = QuadExt::root(disc);
                QuadExt r1 = (QuadExt(-q1) - root) * QuadExt(Rat(1) / q2);
                QuadExt r2 = (QuadExt(-q1) + root) * QuadExt(Rat(1) / q2);
                if (r1 > r2) std::swap(r1, r2);
                QuadExt zero{Rat(0)};
                if (r1 > zero) mu = QuadExt(t0) + r1;
                else if (r2 > zero) mu = QuadExt(t0) + r2;
            }
        }

        // Earliest coefficient-vanishing or support-entry event.
        std::optional<Rat> event;
        auto consider = [&](const Affine& f) {
            if (f.c1 >= 0) return;
            Rat v = f.eval(t0);
            if (v <= 0) return;
            Rat root = t0 + v / (-f.c1);
            if (!event || root < *event) event = root;
        };
        for (size_t idx = 0; idx < s.size(); ++idx) consider(a[idx]);
        for (size_t i = 0; i < n; ++i) {
            if (i == st.y1 || support.count(i)) continue;
            consider(detail::product_affine(st, P, elems[i].cls.c));
        }

        bool ends_at_mu = mu && (!event || !(QuadExt(*event) < *mu));
        if (!ends_at_mu && !event)
            throw internal_error("sweep found no chamber-ending event");

        QuadExt t1 = ends_at_mu ? *mu : QuadExt(*event);

        Chamber ch;
        ch.t0 = t0;
        ch.t1 = t1;
        ch.alpha = Affine{Rat(0), Rat(0)};
        for (size_t idx = 0; idx < s.size(); ++idx) {
            Rat w = li(s[idx]);
            ch.alpha.c0 += a[idx].c0 * w;
            ch.alpha.c1 += a[idx].c1 * w;
        }
        ch.beta = ch.alpha + width;
        for (size_t i : s) ch.support.push_back(elems[i].name);
        std::sort(ch.support.begin(), ch.support.end());

        // Re-certify the chamber against an independent full decomposition at
        // an interior rational point.
        {
            Rat tm;
            if (!ends_at_mu) tm = (t0 + *event) / 2;
            else {
                Rat step(1);
                tm = t0 + step;
                while (!(QuadExt(tm) < t1)) { step /= 2; tm = t0 + step; }
            }
            DivisorClass Dm = st.D - tm * elems[st.y1].cls;
            ZariskiDecomposition zm = zariski_decompose(Dm, Uref);
            std::map<size_t, Rat> want;
            for (size_t idx = 0; idx < s.size(); ++idx) {
                Rat v = a[idx].eval(tm);
                if (v != 0) want[s[idx]] = v;
            }
            std::map<size_t, Rat> got;
            for (const auto& [i, c] : zm.N) got[i] = c;
            if (want != got) throw internal_error("chamber re-certification failed: supports differ");
        }

        if (!poly.chambers.empty()) {
            const Chamber& prev = poly.chambers.back();
            if (prev.alpha.eval(t0) != ch.alpha.eval(t0) || prev.beta.eval(t0) != ch.beta.eval(t0))
                throw internal_error("alpha/beta discontinuity across a chamber boundary");
        }
        if (ch.alpha.eval(ch.t0) > ch.beta.eval(ch.t0) || ch.alpha.eval(t1) > ch.beta.eval(t1))
            throw internal_error("alpha exceeds beta inside a chamber");

        poly.chambers.push_back(std::move(ch));
        if (ends_at_mu) {
            poly.t_max = t1;
            break;
        }
        t0 = *event;
    }

    if (poly.chambers.empty())
        throw math_error("divisor is not big relative to the universe (empty sweep)");

    // Assemble vertices: lower boundary left to right, then upper right to left.
    std::vector<std::pair<QuadExt, QuadExt>> cycle;
    auto push = [&](QuadExt x, QuadExt y) {
        if (!cycle.empty() && cycle.back().first == x && cycle.back().second == y) return;
        cycle.emplace_back(std::move(x), std::move(y));
    };
    push(QuadExt(poly.chambers.front().t0), poly.chambers.front().alpha.eval(Rat(poly.chambers.front().t0)));
    for (const Chamber& c : poly.chambers) push(c.t1, c.alpha.eval(c.t1));
    for (auto it = poly.chambers.rbegin(); it != poly.chambers.rend(); ++it) {
        push(it->t1, it->beta.eval(it->t1));
        push(QuadExt(it->t0), it->beta.eval(Rat(it->t0)));
    }
    while (cycle.size() > 1 && cycle.front() == cycle.back()) cycle.pop_back();

    // Prune collinear points around the cycle.
    std::vector<std::pair<QuadExt, QuadExt>> verts;
    const size_t m = cycle.size();
    for (size_t i = 0; i < m; ++i) {
        const auto& prev = cycle[(i + m - 1) % m];
        const auto& cur = cycle[i];
        const auto& next = cycle[(i + 1) % m];
        QuadExt cross = (cur.first - prev.first) * (next.second - prev.second) -
                        (next.first - prev.first) * (cur.second - prev.second);
        if (!(cross == QuadExt(Rat(0)))) verts.push_back(cur);
    }
    if (verts.empty()) verts.push_back(cycle.front()); // degenerate (a point)

    // Canonical rotation: start at the lexicographically least vertex.
    size_t best = 0;
    for (size_t i = 1; i < verts.size(); ++i) {
        if (verts[i].first < verts[best].first ||
            (verts[i].first == verts[best].first && verts[i].second < verts[best].second))
            best = i;
    }
    std::rotate(verts.begin(), verts.begin() + static_cast<long>(best), verts.end());
    poly.vertices = std::move(verts);

    // Volume identity: twice the polygon area equals P^2, exactly.
    QuadExt twice_area{Rat(0)};
    for (size_t i = 0; i < poly.vertices.size(); ++i) {
        const auto& u = poly.vertices[i];
        const auto& v = poly.vertices[(i + 1) % poly.vertices.size()];
        twice_area = twice_area + u.first * v.second - v.first * u.second;
    }
    if (!(twice_area == QuadExt(poly.p_squared)))
        throw internal_error("area identity failed: 2*Area != P^2");

    return poly;
}

// ---------------------------------------------------------------------------
// Branch flag sequences
// ---------------------------------------------------------------------------

/// The sequence of infinitesimal flags along one branch of a curve through
/// the center, with the branch extended by synthesized free points when its
/// declared data is shorter than the requested depth.
struct BranchFlagSequence {
    UniverseRef universe; // extended universe the flags live on
    std::string curve;
    std::vector<PointId> points; // p_0 = base, ..., p_depth
    long long k0 = 0;            // first index from which the branch is smooth and free
    std::vector<Flag> flags;     // flags for k = 1..depth
    Flag proper_flag;            // the flag (strict transform, p_k0)

    const Flag& flag(size_t k) const {
        if (k < 1 || k > flags.size()) throw input_error("branch flag index out of range");
        return flags[k - 1];
    }
};

inline BranchFlagSequence branch_flag_sequence(const UniverseRef& U, const std::string& curve_name,
                                               const PointId& base, size_t branch_index, size_t depth) {
    if (depth < 1) throw input_error("branch_flag_sequence: depth must be at least 1");
    const CurveRecord& c0 = U->curve(curve_name);
    const auto* branches = c0.branches_at(base);
    if (!branches || branch_index >= branches->size())
        throw input_error("curve '" + curve_name + "' has no branch #" +
                          std::to_string(branch_index) + " at '" + base + "'");
    const BranchData& branch = (*branches)[branch_index];

    size_t have = branch.chain.size();
    size_t need = depth + 1;
    std::vector<ClusterPoint> extra;
    if (need > have) {
        if (branch.truncated || branch.back().mult != 1)
            throw math_error("branch of '" + curve_name + "' cannot be extended to depth " +
                             std::to_string(depth) + " (truncated or multiplicity > 1)");
        PointId parent = branch.back().point;
        for (size_t k = have; k < need; ++k) {
            PointId id = curve_name + "~" + std::to_string(k);
            if (U->forest().contains(id))
                throw internal_error("synthesized point id collides: '" + id + "'");
            extra.push_back(ClusterPoint{id, parent, {parent}, false});
            parent = id;
        }
    }

    BranchFlagSequence seq;
    seq.curve = curve_name;

    if (extra.empty()) {
        seq.universe = U;
    } else {
        // Rebuild the universe over the extended forest, with the branch data
        // of this curve lengthened by the synthesized free simple points.
        auto forest2 = U->forest().extend(extra);
        auto model2 = std::make_shared<SurfaceModel>(U->model()->base_selfint(), forest2,
                                                     U->model()->blown_points());
        std::vector<CurveRecord> curves;
        for (const CurveRecord& c : U->curves()) {
            CurveRecord r = c;
            r.cls = DivisorClass(model2, c.cls.c);
            if (c.name == curve_name) {
                auto& chain = r.local_data[base][branch_index].chain;
                for (const auto& cp : extra) chain.push_back(BranchPoint{cp.id, 1});
            }
            curves.push_back(std::move(r));
        }
        seq.universe = std::make_shared<CurveUniverse>(model2, U->center(), std::move(curves));
    }

    const CurveRecord& c = seq.universe->curve(curve_name);
    const BranchData& ext_branch = (*c.branches_at(base))[branch_index];
    for (size_t k = 0; k < need; ++k) seq.points.push_back(ext_branch.chain[k].point);

    // k0: everything from index k0 on is a free point of multiplicity one.
    const PointForest& forest = seq.universe->forest();
    seq.k0 = 0;
    for (size_t k = 0; k < ext_branch.chain.size(); ++k) {
        bool singular = ext_branch.chain[k].mult > 1;
        bool satellite = forest.classify(ext_branch.chain[k].point) == PointKind::Satellite;
        if (singular || satellite) seq.k0 = static_cast<long long>(k) + 1;
    }

    for (size_t k = 1; k <= depth; ++k)
        seq.flags.push_back(make_exceptional_flag(seq.universe, seq.points[k - 1], seq.points[k]));
    seq.proper_flag = make_curve_flag(seq.universe, curve_name, seq.points[static_cast<size_t>(seq.k0)]);
    return seq;
}

} // namespace nok
