#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nok/lattice.hpp"
#include "nok/points.hpp"

namespace nok {

struct BranchPoint {
    PointId point;
    long long mult = 1;
};

/// One branch of a curve at a base point: a weighted chain of infinitely
/// near points, each the child of the previous.
///
/// Convention: past the last listed point an untruncated branch continues
/// through fresh free points with the last multiplicity, which must then be 1.
/// A truncated branch asserts nothing past its data; questions that need the
/// continuation surface as "undetermined" errors.
struct BranchData {
    std::vector<BranchPoint> chain;
    bool truncated = false;

    const BranchPoint& back() const { return chain.back(); }

    void validate(const PointForest& forest, const std::string& owner) const {
        if (chain.empty()) throw input_error("branch of '" + owner + "' is empty");
        const ClusterPoint& first = forest.at(chain.front().point);
        if (!first.is_base())
            throw input_error("branch of '" + owner + "' must start at a base-surface point");
        for (size_t i = 0; i < chain.size(); ++i) {
            if (chain[i].mult <= 0)
                throw input_error("branch of '" + owner + "' has a non-positive multiplicity");
            if (i > 0) {
                const ClusterPoint& p = forest.at(chain[i].point);
                if (!p.parent || *p.parent != chain[i - 1].point)
                    throw input_error("branch of '" + owner + "': point '" + chain[i].point +
                                      "' is not a child of '" + chain[i - 1].point + "'");
                if (chain[i].mult > chain[i - 1].mult)
                    throw input_error("branch of '" + owner + "' has increasing multiplicities");
            }
        }
        // Proximity consistency: m_q >= sum of chain multiplicities proximate to q,
        // counting the implicit free continuation point of an untruncated branch.
        for (size_t i = 0; i < chain.size(); ++i) {
            long long s = 0;
            for (size_t j = i + 1; j < chain.size(); ++j)
                if (forest.on_exceptional(chain[j].point, chain[i].point)) s += chain[j].mult;
            if (i + 1 == chain.size() && !truncated) s += chain.back().mult;
            if (chain[i].mult < s)
                throw input_error("branch of '" + owner + "' violates proximity at '" + chain[i].point + "'");
        }
        if (!truncated && chain.back().mult != 1)
            throw input_error("branch of '" + owner +
                              "' ends with multiplicity > 1; mark it truncated or extend the data");
    }

    /// Index of the point in the chain, if listed.
    std::optional<size_t> find(const PointId& p) const {
        for (size_t i = 0; i < chain.size(); ++i)
            if (chain[i].point == p) return i;
        return std::nullopt;
    }
};

/// An irreducible curve: its class on the workspace model plus branch data
/// at the declared base points it meets.
struct CurveRecord {
    std::string name;
    DivisorClass cls;
    std::map<PointId, std::vector<BranchData>> local_data; // keyed by base point
    bool irreducible = true;

    const std::vector<BranchData>* branches_at(const PointId& base) const {
        auto it = local_data.find(base);
        return it == local_data.end() ? nullptr : &it->second;
    }

    void validate() const {
        const PointForest& forest = *cls.model->forest();
        for (const auto& [base, branches] : local_data) {
            if (!forest.at(base).is_base())
                throw input_error("curve '" + name + "': local data keyed by non-base point '" + base + "'");
            for (const BranchData& b : branches) {
                b.validate(forest, name);
                if (b.chain.front().point != base)
                    throw input_error("curve '" + name + "': branch under wrong base point");
            }
        }
        // Class consistency: the coefficient of E_q* equals minus the total
        // branch multiplicity at every blown point.
        for (const PointId& q : cls.model->blown_points()) {
            long long total = 0;
            PointId base = forest.base_of(q);
            if (const auto* branches = branches_at(base))
                for (const BranchData& b : *branches)
                    if (auto idx = b.find(q)) total += b.chain[*idx].mult;
            if (cls.coeff(q) != Rat(-total))
                throw input_error("curve '" + name + "': class coefficient at '" + q +
                                  "' does not match branch multiplicities");
        }
    }
};

/// A curve-or-exceptional view: local intersection theory treats the strict
/// transforms of exceptional curves on the same footing as declared curves.
struct CurveLike {
    const CurveRecord* curve = nullptr;
    PointId exc; // nonempty when this is the exceptional curve of that point

    static CurveLike of(const CurveRecord& c) { return CurveLike{&c, {}}; }
    static CurveLike exceptional_of(PointId p) { return CurveLike{nullptr, std::move(p)}; }

    bool is_exceptional() const { return curve == nullptr; }
    std::string name() const { return is_exceptional() ? "E(" + exc + ")" : curve->name; }

    friend bool operator==(const CurveLike& a, const CurveLike& b) {
        return a.curve == b.curve && a.exc == b.exc;
    }
};

// ---------------------------------------------------------------------------
// Multiplicities
// ---------------------------------------------------------------------------

/// Multiplicity of the (strict transform of the) curve at a declared point.
/// Nullopt = undetermined (the point extends a truncated branch).
inline std::optional<long long> mult_at_opt(const PointForest& forest, const CurveLike& c, const PointId& p) {
    if (c.is_exceptional())
        return forest.on_exceptional(p, c.exc) ? 1 : 0;
    PointId base = forest.base_of(p);
    const auto* branches = c.curve->branches_at(base);
    if (!branches) return 0;
    long long total = 0;
    bool undetermined = false;
    for (const BranchData& b : *branches) {
        if (auto idx = b.find(p)) {
            total += b.chain[*idx].mult;
            continue;
        }
        // p extends past the end of a truncated chain: unknown.
        if (b.truncated && forest.at_or_over(p, b.back().point) && p != b.back().point)
            undetermined = true;
        // Untruncated continuations pass through fresh generic points only.
    }
    if (undetermined) return std::nullopt;
    return total;
}

inline long long mult_at(const PointForest& forest, const CurveLike& c, const PointId& p) {
    auto m = mult_at_opt(forest, c, p);
    if (!m)
        throw undetermined_error("multiplicity of '" + c.name() + "' at '" + p +
                                 "' is undetermined (truncated branch)");
    return *m;
}

inline bool has_smooth_branch(const CurveRecord& c, const PointId& base) {
    const auto* branches = c.branches_at(base);
    if (!branches) return false;
    for (const BranchData& b : *branches)
        if (b.chain.front().mult == 1) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Weighted clusters
// ---------------------------------------------------------------------------

/// Points infinitely near (or equal to) a base point with rational weights.
/// Zero weights are omitted; listed points are closed under taking parents
/// within the cluster's support.
struct WeightedCluster {
    std::map<PointId, Rat> weights;

    bool empty() const { return weights.empty(); }

    void add(const PointId& p, const Rat& w) {
        auto it = weights.find(p);
        if (it == weights.end()) {
            if (w != 0) weights[p] = w;
        } else {
            it->second += w;
            if (it->second == 0) weights.erase(it);
        }
    }

    friend WeightedCluster operator+(const WeightedCluster& a, const WeightedCluster& b) {
        WeightedCluster r = a;
        for (const auto& [p, w] : b.weights) r.add(p, w);
        return r;
    }
    friend WeightedCluster operator*(const Rat& s, const WeightedCluster& a) {
        WeightedCluster r;
        for (const auto& [p, w] : a.weights) r.add(p, s * w);
        return r;
    }
    friend bool operator==(const WeightedCluster& a, const WeightedCluster& b) {
        return a.weights == b.weights;
    }

    void validate_closed(const PointForest& forest) const {
        for (const auto& [p, w] : weights) {
            (void)w;
            const ClusterPoint& cp = forest.at(p);
            if (cp.parent && !weights.count(*cp.parent))
                throw input_error("weighted cluster is not closed: '" + p + "' listed without its parent");
        }
    }
};

/// The cluster of initial free points of an effective combination of curves
/// at the base point O: on each branch, the free points before the first
/// satellite, weighted by coefficient times multiplicity.
inline WeightedCluster initial_free_points(const PointForest& forest,
                                           const std::vector<std::pair<const CurveRecord*, Rat>>& divisor,
                                           const PointId& center) {
    WeightedCluster out;
    for (const auto& [curve, coeff] : divisor) {
        if (coeff < 0) throw math_error("initial_free_points: effective combination required");
        if (coeff == 0) continue;
        if (has_smooth_branch(*curve, center))
            throw math_error("initial_free_points: '" + curve->name +
                             "' has a smooth branch at '" + center + "'; split it off first");
        const auto* branches = curve->branches_at(center);
        if (!branches) continue;
        for (const BranchData& b : *branches) {
            bool stopped = false;
            for (const BranchPoint& bp : b.chain) {
                if (forest.classify(bp.point) == PointKind::Satellite) { stopped = true; break; }
                out.add(bp.point, coeff * Rat(bp.mult));
            }
            if (!stopped && !b.truncated)
                throw math_error("initial_free_points: branch of '" + curve->name +
                                 "' at '" + center + "' has no satellite in its data; "
                                 "the initial free cluster is not finite as declared");
            if (!stopped && b.truncated)
                throw undetermined_error("initial_free_points: branch of '" + curve->name +
                                         "' is truncated before its first satellite");
        }
    }
    out.validate_closed(forest);
    return out;
}

// ---------------------------------------------------------------------------
// Local intersection numbers (Noether sums)
// ---------------------------------------------------------------------------

namespace detail {

/// Shared-point Noether sum of two distinct curve branches, restricted to
/// points at or over p.
inline Rat branch_pair_sum(const PointForest& forest, const BranchData& a, const BranchData& b,
                           const PointId& p, const std::string& na, const std::string& nb) {
    Rat total(0);
    size_t k = 0;
    while (k < a.chain.size() && k < b.chain.size() && a.chain[k].point == b.chain[k].point) {
        const PointId& t = a.chain[k].point;
        if (forest.at_or_over(t, p)) total += Rat(a.chain[k].mult) * Rat(b.chain[k].mult);
        ++k;
    }
    bool ea = (k == a.chain.size()), eb = (k == b.chain.size());
    if (k == 0) return total; // different base points / immediate separation
    const PointId& last_shared = a.chain[k - 1].point;
    bool ambiguous = false;
    if (ea && a.truncated && !(eb && !b.truncated)) ambiguous = true;
    if (eb && b.truncated && !(ea && !a.truncated)) ambiguous = true;
    if (ambiguous && (forest.at_or_over(last_shared, p) || forest.at_or_over(p, last_shared)))
        throw undetermined_error("local intersection of '" + na + "' and '" + nb +
                                 "' near '" + last_shared + "' is undetermined (truncated branch)");
    return total;
}

inline Rat curve_curve_local(const PointForest& forest, const CurveRecord& a, const CurveRecord& b,
                             const PointId& p) {
    PointId base = forest.base_of(p);
    const auto* ba = a.branches_at(base);
    const auto* bb = b.branches_at(base);
    if (!ba || !bb) return Rat(0);
    Rat total(0);
    for (const BranchData& x : *ba)
        for (const BranchData& y : *bb) total += branch_pair_sum(forest, x, y, p, a.name, b.name);
    return total;
}

inline Rat curve_exc_local(const PointForest& forest, const CurveRecord& a, const PointId& s,
                           const PointId& p) {
    PointId base = forest.base_of(p);
    if (forest.base_of(s) != base) return Rat(0);
    const auto* branches = a.branches_at(base);
    if (!branches) return Rat(0);
    Rat total(0);
    for (const BranchData& b : *branches) {
        for (const BranchPoint& bp : b.chain)
            if (forest.on_exceptional(bp.point, s) && forest.at_or_over(bp.point, p))
                total += Rat(bp.mult);
        // A branch through the center s continues onto E_s at its next point.
        const PointId& e = b.back().point;
        if (e == s && forest.at_or_over(s, p)) {
            if (b.truncated)
                throw undetermined_error("intersection of '" + a.name + "' with E(" + s +
                                         ") is undetermined (branch truncated at its center)");
            total += 1; // implicit free continuation point, multiplicity 1
        }
        // A truncated branch ending on E_s might keep meeting it.
        if (e != s && b.truncated && forest.on_exceptional(e, s) &&
            (forest.at_or_over(e, p) || forest.at_or_over(p, e)))
            throw undetermined_error("intersection of '" + a.name + "' with E(" + s +
                                     ") past '" + e + "' is undetermined (truncated branch)");
    }
    return total;
}

inline Rat exc_exc_local(const PointForest& forest, const PointId& s1, const PointId& s2,
                         const PointId& p) {
    auto meet = forest.exceptional_meet(s1, s2);
    if (!meet.exists) return Rat(0);
    bool over_p = meet.declared ? forest.at_or_over(*meet.declared, p)
                                : forest.at_or_over(meet.deeper, p);
    return over_p ? Rat(1) : Rat(0);
}

} // namespace detail

/// Noether local intersection of two distinct curves at p: the sum of
/// mult_t(a) * mult_t(b) over all shared points t at or infinitely near p.
inline Rat local_intersection(const PointForest& forest, const CurveLike& a, const CurveLike& b,
                              const PointId& p) {
    if (a == b) throw math_error("local_intersection of a curve with itself is not defined");
    Rat value;
    if (!a.is_exceptional() && !b.is_exceptional()) {
        if (a.curve->name == b.curve->name)
            throw math_error("local_intersection of a curve with itself is not defined");
        value = detail::curve_curve_local(forest, *a.curve, *b.curve, p);
        // Consistency bound: the total over all shared points cannot exceed the
        // base-surface product (class product plus blown shared multiplicities).
        const ModelRef& model = a.curve->cls.model;
        bool bound_known = true;
        Rat bound = intersect(a.curve->cls, b.curve->cls);
        for (const PointId& q : model->blown_points()) {
            auto ma = mult_at_opt(forest, a, q), mb = mult_at_opt(forest, b, q);
            if (!ma || !mb) { bound_known = false; break; }
            bound += Rat(*ma) * Rat(*mb);
        }
        if (bound_known && value > bound)
            throw math_error("local intersection of '" + a.name() + "' and '" + b.name() +
                             "' at '" + p + "' exceeds the class product; branch data inconsistent");
    } else if (!a.is_exceptional()) {
        value = detail::curve_exc_local(forest, *a.curve, b.exc, p);
    } else if (!b.is_exceptional()) {
        value = detail::curve_exc_local(forest, *b.curve, a.exc, p);
    } else {
        value = detail::exc_exc_local(forest, a.exc, b.exc, p);
    }
    return value;
}

// ---------------------------------------------------------------------------
// Value vectors (orders of vanishing along exceptional divisors)
// ---------------------------------------------------------------------------

/// Order of vanishing along E_q of the pullback of a divisor, where the
/// divisor lives on the model whose blown points are `home`: the proximity
/// recursion v_q = m_q + sum of v over prox targets outside `home`.
inline Rat value_at(const PointForest& forest,
                    const std::vector<std::pair<CurveLike, Rat>>& divisor,
                    const PointId& q,
                    const std::set<PointId>& home,
                    std::map<PointId, Rat>* memo = nullptr) {
    if (memo) {
        auto it = memo->find(q);
        if (it != memo->end()) return it->second;
    }
    Rat v(0);
    for (const auto& [c, coeff] : divisor) v += coeff * Rat(mult_at(forest, c, q));
    for (const PointId& t : forest.at(q).proximate_to)
        if (!home.count(t)) v += value_at(forest, divisor, t, home, memo);
    if (memo) (*memo)[q] = v;
    return v;
}

/// Value vector of a divisor supported on base curves, pulled back from the
/// base surface to the given model: one value per blown point.
inline std::map<PointId, Rat> value_vector(const PointForest& forest,
                                           const std::vector<std::pair<const CurveRecord*, Rat>>& divisor,
                                           const ModelRef& model) {
    std::vector<std::pair<CurveLike, Rat>> d;
    for (const auto& [c, w] : divisor) d.emplace_back(CurveLike::of(*c), w);
    std::map<PointId, Rat> memo, out;
    std::set<PointId> home; // pullback from the base surface: nothing blown below
    for (const PointId& q : model->blown_points())
        out[q] = value_at(forest, d, q, home, &memo);
    return out;
}

} // namespace nok
