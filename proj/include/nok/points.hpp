#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nok/errors.hpp"

namespace nok {

using PointId = std::string;

enum class PointKind { Free, Satellite };

/// A base-surface point or a point infinitely near one.
///
/// Base points have no parent and no proximities. An infinitely near point is
/// proximate to its parent, plus at most one earlier point (which makes it a
/// satellite).
struct ClusterPoint {
    PointId id;
    std::optional<PointId> parent;     // nullopt = lies on the base surface
    std::vector<PointId> proximate_to; // parent first, optional extra second
    bool blown = true;                 // participates in the surface model

    bool is_base() const { return !parent.has_value(); }
};

/// The declared points of a workspace: a forest under the parent relation.
/// Immutable once built; models and flags share it by pointer.
class PointForest {
public:
    PointForest() = default;

    static std::shared_ptr<const PointForest> create(std::vector<ClusterPoint> pts) {
        auto f = std::make_shared<PointForest>();
        for (auto& p : pts) f->add(std::move(p));
        return f;
    }

    void add(ClusterPoint p) {
        if (index_.count(p.id)) throw input_error("duplicate point id '" + p.id + "'");
        if (p.parent) {
            if (!index_.count(*p.parent))
                throw input_error("point '" + p.id + "' declared before its parent '" + *p.parent + "'");
            if (p.proximate_to.empty() || p.proximate_to.front() != *p.parent)
                throw internal_error("proximity list must start with the parent");
            if (p.proximate_to.size() > 2)
                throw input_error("point '" + p.id + "' proximate to more than two points");
            if (p.proximate_to.size() == 2) {
                const PointId& extra = p.proximate_to[1];
                const ClusterPoint& par = at(*p.parent);
                bool ok = false;
                if (par.parent && *par.parent == extra) ok = true;
                for (const PointId& q : par.proximate_to)
                    if (q == extra) ok = true;
                if (!ok)
                    throw input_error("point '" + p.id + "': extra proximity '" + extra +
                                      "' is not an allowed target for a child of '" + *p.parent + "'");
                // A pair of exceptional curves meets in at most one point.
                auto key = std::make_pair(*p.parent, extra);
                if (satellite_slots_.count(key))
                    throw input_error("two points proximate to both '" + *p.parent + "' and '" + extra + "'");
                satellite_slots_.insert(key);
            }
        } else {
            if (!p.proximate_to.empty())
                throw input_error("base point '" + p.id + "' cannot carry proximities");
        }
        index_[p.id] = order_.size();
        order_.push_back(p.id);
        pts_[p.id] = std::move(p);
    }

    bool contains(const PointId& id) const { return index_.count(id) != 0; }

    const ClusterPoint& at(const PointId& id) const {
        auto it = pts_.find(id);
        if (it == pts_.end()) throw input_error("unknown point '" + id + "'");
        return it->second;
    }

    const std::vector<PointId>& order() const { return order_; }

    /// Declaration index; parents always precede children.
    size_t position(const PointId& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw input_error("unknown point '" + id + "'");
        return it->second;
    }

    PointKind classify(const PointId& id) const {
        return at(id).proximate_to.size() == 2 ? PointKind::Satellite : PointKind::Free;
    }

    /// K(p): the chain of points from the base point under p down to p.
    std::vector<PointId> chain_to(const PointId& id) const {
        std::vector<PointId> chain;
        PointId cur = id;
        while (true) {
            chain.push_back(cur);
            const ClusterPoint& c = at(cur);
            if (!c.parent) break;
            cur = *c.parent;
        }
        std::vector<PointId> rev(chain.rbegin(), chain.rend());
        return rev;
    }

    /// The base-surface point below p (p itself if p is a base point).
    PointId base_of(const PointId& id) const { return chain_to(id).front(); }

    /// Number of blowups needed to reach p: 0 for base points.
    size_t depth(const PointId& id) const { return chain_to(id).size() - 1; }

    bool is_free_cluster(const std::vector<PointId>& cluster) const {
        for (const PointId& p : cluster)
            if (classify(p) == PointKind::Satellite) return false;
        return true;
    }

    /// True when q lies on the exceptional curve of s, i.e. s in prox(q).
    bool on_exceptional(const PointId& q, const PointId& s) const {
        for (const PointId& t : at(q).proximate_to)
            if (t == s) return true;
        return false;
    }

    /// True when a is equal to b or infinitely near it (b in chain(a)).
    bool at_or_over(const PointId& a, const PointId& b) const {
        PointId cur = a;
        while (true) {
            if (cur == b) return true;
            const ClusterPoint& c = at(cur);
            if (!c.parent) return false;
            cur = *c.parent;
        }
    }

    std::vector<PointId> children(const PointId& id) const {
        std::vector<PointId> out;
        for (const PointId& q : order_)
            if (pts_.at(q).parent && *pts_.at(q).parent == id) out.push_back(q);
        return out;
    }

    /// The point where the exceptional curves of s1 and s2 meet, if they do:
    /// the satellite proximate to both. May be undeclared; existence is
    /// decided combinatorially (one center lies on the other's curve).
    struct SatelliteMeet {
        bool exists = false;
        std::optional<PointId> declared; // id when the meeting point is declared
        PointId deeper;                  // the later-blown of s1, s2
    };
    SatelliteMeet exceptional_meet(const PointId& s1, const PointId& s2) const {
        SatelliteMeet m;
        if (s1 == s2) throw internal_error("exceptional_meet of a point with itself");
        PointId lo = s1, hi = s2; // hi = deeper
        if (position(lo) > position(hi)) std::swap(lo, hi);
        if (!on_exceptional(hi, lo)) return m;
        m.exists = true;
        m.deeper = hi;
        for (const PointId& q : order_) {
            const ClusterPoint& c = pts_.at(q);
            if (c.proximate_to.size() == 2) {
                bool has1 = c.proximate_to[0] == s1 || c.proximate_to[1] == s1;
                bool has2 = c.proximate_to[0] == s2 || c.proximate_to[1] == s2;
                if (has1 && has2) { m.declared = q; break; }
            }
        }
        return m;
    }

    /// Extends the forest with synthesized points (used for branch flag
    /// sequences past the declared data). Returns a new forest.
    std::shared_ptr<const PointForest> extend(const std::vector<ClusterPoint>& extra) const {
        auto f = std::make_shared<PointForest>(*this);
        for (const auto& p : extra) f->add(p);
        return f;
    }

private:
    std::map<PointId, ClusterPoint> pts_;
    std::map<PointId, size_t> index_;
    std::vector<PointId> order_;
    std::set<std::pair<PointId, PointId>> satellite_slots_;
};

} // namespace nok
