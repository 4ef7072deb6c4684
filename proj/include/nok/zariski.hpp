#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "nok/cluster.hpp"
#include "nok/lattice.hpp"

namespace nok {

/// A universe element: a declared curve or the strict transform of an
/// exceptional curve, with its class on the universe's model.
struct UniverseElement {
    CurveLike like;
    DivisorClass cls;
    std::string name;
};

/// The declared curves of a workspace plus, always, the strict exceptional
/// classes of the model. Decompositions are relative to this universe: they
/// are the true Zariski decompositions whenever the universe contains every
/// irreducible curve meeting some intermediate positive part negatively.
class CurveUniverse {
public:
    CurveUniverse(ModelRef model, PointId center, std::vector<CurveRecord> curves)
        : model_(std::move(model)), center_(std::move(center)),
          curves_(std::make_shared<std::vector<CurveRecord>>(std::move(curves))) {
        if (!model_->forest()->contains(center_)) throw input_error("unknown center '" + center_ + "'");
        for (const CurveRecord& c : *curves_) {
            if (c.cls.model.get() != model_.get())
                throw input_error("curve '" + c.name + "' lives on a different model");
            c.validate();
        }
        for (const CurveRecord& c : *curves_)
            elements_.push_back(UniverseElement{CurveLike::of(c), c.cls, c.name});
        for (const PointId& p : model_->blown_points())
            elements_.push_back(UniverseElement{CurveLike::exceptional_of(p),
                                                strict_exceptional(model_, p), "E(" + p + ")"});
        for (size_t i = 0; i < elements_.size(); ++i) {
            if (index_.count(elements_[i].name))
                throw input_error("duplicate universe element '" + elements_[i].name + "'");
            index_[elements_[i].name] = i;
        }
    }

    const ModelRef& model() const { return model_; }
    const PointId& center() const { return center_; }
    const PointForest& forest() const { return *model_->forest(); }
    const std::vector<UniverseElement>& elements() const { return elements_; }
    const std::vector<CurveRecord>& curves() const { return *curves_; }

    const UniverseElement& element(size_t i) const { return elements_[i]; }
    const UniverseElement& element(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw input_error("unknown universe element '" + name + "'");
        return elements_[it->second];
    }
    size_t element_index(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw input_error("unknown universe element '" + name + "'");
        return it->second;
    }
    const CurveRecord& curve(const std::string& name) const {
        for (const CurveRecord& c : *curves_)
            if (c.name == name) return c;
        throw input_error("unknown curve '" + name + "'");
    }

    /// The same universe over a refinement of the model: curve classes become
    /// strict transforms; new exceptional elements appear.
    std::shared_ptr<const CurveUniverse> refine(const std::vector<PointId>& new_points,
                                                Transport* transport_out = nullptr) const {
        RefinedModel rm = refine_model(model_, new_points);
        std::vector<CurveRecord> curves;
        for (const CurveRecord& c : *curves_) {
            CurveRecord r = c;
            r.cls = rm.transport(c.cls);
            for (const PointId& q : new_points)
                r.cls.c[rm.model->basis_index(q)] -=
                    Rat(mult_at(*rm.model->forest(), CurveLike::of(c), q));
            curves.push_back(std::move(r));
        }
        if (transport_out) *transport_out = rm.transport;
        return std::make_shared<CurveUniverse>(rm.model, center_, std::move(curves));
    }

    /// Universe with the declared curves in a permuted order (same model,
    /// same curves). Used to check order invariance of decompositions.
    std::shared_ptr<const CurveUniverse> permuted(const std::vector<size_t>& perm) const {
        if (perm.size() != curves_->size()) throw internal_error("bad permutation size");
        std::vector<CurveRecord> curves;
        for (size_t i : perm) curves.push_back((*curves_)[i]);
        return std::make_shared<CurveUniverse>(model_, center_, std::move(curves));
    }

private:
    ModelRef model_;
    PointId center_;
    std::shared_ptr<std::vector<CurveRecord>> curves_; // stable storage
    std::vector<UniverseElement> elements_;
    std::map<std::string, size_t> index_;
};

using UniverseRef = std::shared_ptr<const CurveUniverse>;

/// D = P + N with P nef against the universe, P . N_i = 0, supp N negative
/// definite, coefficients nonnegative. Certificates are recomputed from the
/// output, not trusted from the solver path.
struct ZariskiDecomposition {
    UniverseRef universe;
    DivisorClass D;
    DivisorClass P;
    std::vector<std::pair<size_t, Rat>> N; // (element index, coefficient), index-sorted
    GramCertificate support_certificate;
    std::vector<std::pair<size_t, Rat>> nef_products; // P . element, all elements

    Rat coefficient_of(const std::string& name) const {
        size_t i = universe->element_index(name);
        for (const auto& [j, a] : N)
            if (j == i) return a;
        return Rat(0);
    }

    DivisorClass negative_class() const {
        DivisorClass n = DivisorClass::zero(D.model);
        for (const auto& [i, a] : N) n = n + a * universe->element(i).cls;
        return n;
    }

    std::map<std::string, Rat> named_negative_part() const {
        std::map<std::string, Rat> m;
        for (const auto& [i, a] : N) m[universe->element(i).name] = a;
        return m;
    }
};

inline ZariskiDecomposition zariski_decompose(const DivisorClass& D, const UniverseRef& Uref) {
    const CurveUniverse& U = *Uref;
    if (D.model.get() != U.model().get())
        throw math_error("divisor lives on a different model than the universe");
    const auto& elems = U.elements();
    const size_t n = elems.size();

    // Cached pairwise products.
    RatMat prod(n, RatVec(n, Rat(0)));
    RatVec dprod(n, Rat(0));
    for (size_t i = 0; i < n; ++i) {
        dprod[i] = intersect(D, elems[i].cls);
        for (size_t j = 0; j <= i; ++j) prod[i][j] = prod[j][i] = intersect(elems[i].cls, elems[j].cls);
    }

    std::set<size_t> support;
    RatVec coeffs;
    DivisorClass P = D;

    for (size_t round = 0; round <= n + 1; ++round) {
        std::vector<size_t> s(support.begin(), support.end());
        if (!s.empty()) {
            std::vector<DivisorClass> classes;
            std::vector<std::string> labels;
            for (size_t i : s) { classes.push_back(elems[i].cls); labels.push_back(elems[i].name); }
            GramCertificate cert = is_negative_definite(classes, labels);
            if (!cert.negative_definite())
                throw math_error("not pseudoeffective relative to universe: "
                                 "support Gram matrix is not negative definite");
            RatMat g(s.size(), RatVec(s.size()));
            RatVec rhs(s.size());
            for (size_t a = 0; a < s.size(); ++a) {
                rhs[a] = dprod[s[a]];
                for (size_t b = 0; b < s.size(); ++b) g[a][b] = prod[s[a]][s[b]];
            }
            auto sol = solve_linear(g, rhs);
            if (!sol) throw internal_error("negative definite Gram matrix was singular");
            coeffs = *sol;
            P = D;
            for (size_t a = 0; a < s.size(); ++a) P = P - coeffs[a] * elems[s[a]].cls;
        } else {
            coeffs.clear();
            P = D;
        }

        std::vector<size_t> violators;
        for (size_t i = 0; i < n; ++i)
            if (!support.count(i) && intersect(P, elems[i].cls) < 0) violators.push_back(i);
        if (violators.empty()) break;
        if (round == n + 1)
            throw internal_error("zariski_decompose failed to terminate");
        for (size_t i : violators) support.insert(i);
    }

    std::vector<size_t> s(support.begin(), support.end());
    for (size_t a = 0; a < s.size(); ++a)
        if (coeffs[a] < 0)
            throw math_error("not pseudoeffective relative to universe: "
                             "negative coefficient for '" + elems[s[a]].name + "'");

    ZariskiDecomposition z;
    z.universe = Uref;
    z.D = D;
    z.P = P;
    for (size_t a = 0; a < s.size(); ++a)
        if (coeffs[a] != 0) z.N.emplace_back(s[a], coeffs[a]);

    // Re-verify every invariant by direct intersection.
    {
        DivisorClass sum = z.P + z.negative_class();
        if (!(sum == D)) throw internal_error("decomposition does not sum back to D");
        std::vector<DivisorClass> classes;
        std::vector<std::string> labels;
        for (const auto& [i, a] : z.N) {
            (void)a;
            classes.push_back(elems[i].cls);
            labels.push_back(elems[i].name);
        }
        z.support_certificate = is_negative_definite(classes, labels);
        if (!z.support_certificate.negative_definite())
            throw internal_error("support certificate failed after convergence");
        for (const auto& [i, a] : z.N) {
            (void)a;
            if (intersect(z.P, elems[i].cls) != 0)
                throw internal_error("P is not orthogonal to '" + elems[i].name + "'");
        }
        for (size_t i = 0; i < n; ++i) {
            Rat v = intersect(z.P, elems[i].cls);
            if (v < 0) throw internal_error("P is negative against '" + elems[i].name + "'");
            z.nef_products.emplace_back(i, v);
        }
    }
    return z;
}

/// N split at the marked point: components through O, further separated by
/// whether they have a smooth branch there. Exceptional components lying over
/// O count as smooth through O; exceptional components of far points fall in
/// the complement.
struct RefinedDecomposition {
    ZariskiDecomposition z;
    PointId center;
    std::vector<std::pair<size_t, Rat>> N_O;
    std::vector<std::pair<size_t, Rat>> N_O_complement;
    std::vector<std::pair<size_t, Rat>> N_O_sing;
    std::vector<std::pair<size_t, Rat>> N_O_smooth;

    std::map<std::string, Rat> named(const std::vector<std::pair<size_t, Rat>>& part) const {
        std::map<std::string, Rat> m;
        for (const auto& [i, a] : part) m[z.universe->element(i).name] = a;
        return m;
    }

    /// The sing part as curve records with coefficients (for F computations).
    std::vector<std::pair<const CurveRecord*, Rat>> sing_curves() const {
        std::vector<std::pair<const CurveRecord*, Rat>> out;
        for (const auto& [i, a] : N_O_sing) out.emplace_back(z.universe->element(i).like.curve, a);
        return out;
    }
};

inline RefinedDecomposition refine_at(ZariskiDecomposition z, const PointId& center) {
    const CurveUniverse& U = *z.universe;
    RefinedDecomposition r;
    r.center = center;
    for (const auto& item : z.N) {
        const UniverseElement& e = U.element(item.first);
        bool through;
        bool smooth;
        if (e.like.is_exceptional()) {
            through = U.forest().base_of(e.like.exc) == center;
            smooth = true; // exceptional curves are smooth
        } else {
            through = mult_at(U.forest(), e.like, center) > 0;
            smooth = has_smooth_branch(*e.like.curve, center);
        }
        if (through) {
            r.N_O.push_back(item);
            (smooth ? r.N_O_smooth : r.N_O_sing).push_back(item);
        } else {
            r.N_O_complement.push_back(item);
        }
    }
    r.z = std::move(z);
    return r;
}

struct EquivalenceVerdict {
    bool equivalent = false;
    std::string report;
};

/// Local numerical equivalence at O: P = P' as class vectors and
/// N_O = N'_O as weighted curve lists, exactly.
inline EquivalenceVerdict locally_num_equivalent(const DivisorClass& D1, const DivisorClass& D2,
                                                 const UniverseRef& U, const PointId& center) {
    RefinedDecomposition a = refine_at(zariski_decompose(D1, U), center);
    RefinedDecomposition b = refine_at(zariski_decompose(D2, U), center);
    EquivalenceVerdict v;
    if (!(a.z.P == b.z.P)) {
        v.report = "positive parts differ";
        return v;
    }
    if (a.named(a.N_O) != b.named(b.N_O)) {
        v.report = "N_O differs";
        return v;
    }
    v.equivalent = true;
    v.report = "locally numerically equivalent at " + center;
    return v;
}

/// The smooth-flag-level equivalence: P = P', N_O^sm = N'_O^sm, and equal
/// clusters of initial free points of the singular parts.
inline EquivalenceVerdict smooth_equivalent(const DivisorClass& D1, const DivisorClass& D2,
                                            const UniverseRef& U, const PointId& center) {
    RefinedDecomposition a = refine_at(zariski_decompose(D1, U), center);
    RefinedDecomposition b = refine_at(zariski_decompose(D2, U), center);
    EquivalenceVerdict v;
    if (!(a.z.P == b.z.P)) {
        v.report = "positive parts differ";
        return v;
    }
    if (a.named(a.N_O_smooth) != b.named(b.N_O_smooth)) {
        v.report = "N_O^sm differs";
        return v;
    }
    WeightedCluster fa = initial_free_points(U->forest(), a.sing_curves(), center);
    WeightedCluster fb = initial_free_points(U->forest(), b.sing_curves(), center);
    if (!(fa == fb)) {
        v.report = "initial free clusters of N_O^sing differ";
        return v;
    }
    v.equivalent = true;
    v.report = "smooth-equivalent at " + center;
    return v;
}

} // namespace nok
