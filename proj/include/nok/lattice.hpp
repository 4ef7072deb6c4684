#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nok/linalg.hpp"
#include "nok/points.hpp"
#include "nok/rational.hpp"

namespace nok {

/// The Picard lattice of a surface obtained from a rank-1 base lattice
/// (H with H^2 = base_selfint) by blowing up an ordered cluster of points.
/// The intersection form is diagonal in the (H, E_p*) basis.
class SurfaceModel {
public:
    SurfaceModel(Int base_selfint,
                 std::shared_ptr<const PointForest> forest,
                 std::vector<PointId> blown)
        : base_selfint_(std::move(base_selfint)), forest_(std::move(forest)), blown_(std::move(blown)) {
        if (base_selfint_ <= 0) throw input_error("base self-intersection must be positive");
        for (size_t i = 0; i < blown_.size(); ++i) {
            const ClusterPoint& p = forest_->at(blown_[i]);
            if (pos_.count(blown_[i])) throw input_error("point '" + blown_[i] + "' blown up twice");
            if (p.parent && !pos_.count(*p.parent))
                throw input_error("point '" + blown_[i] + "' blown up before its parent '" + *p.parent + "'");
            pos_[blown_[i]] = i + 1; // slot 0 is H
        }
    }

    size_t rank() const { return blown_.size() + 1; }
    const Int& base_selfint() const { return base_selfint_; }
    const std::vector<PointId>& blown_points() const { return blown_; }
    const std::shared_ptr<const PointForest>& forest() const { return forest_; }

    bool blown(const PointId& p) const { return pos_.count(p) != 0; }

    size_t basis_index(const PointId& p) const {
        auto it = pos_.find(p);
        if (it == pos_.end()) throw input_error("point '" + p + "' is not blown up in this model");
        return it->second;
    }

private:
    Int base_selfint_;
    std::shared_ptr<const PointForest> forest_;
    std::vector<PointId> blown_;
    std::map<PointId, size_t> pos_;
};

using ModelRef = std::shared_ptr<const SurfaceModel>;

/// A rational divisor class: exact coefficients over (H, E_p* ...).
struct DivisorClass {
    ModelRef model;
    RatVec c;

    DivisorClass() = default;
    DivisorClass(ModelRef m, RatVec v) : model(std::move(m)), c(std::move(v)) {
        if (c.size() != model->rank()) throw internal_error("class length does not match model rank");
    }

    static DivisorClass zero(const ModelRef& m) { return DivisorClass(m, RatVec(m->rank(), Rat(0))); }

    static DivisorClass hyperplane(const ModelRef& m, const Rat& deg = Rat(1)) {
        DivisorClass d = zero(m);
        d.c[0] = deg;
        return d;
    }

    static DivisorClass exceptional(const ModelRef& m, const PointId& p) {
        DivisorClass d = zero(m);
        d.c[m->basis_index(p)] = 1;
        return d;
    }

    const Rat& coeff(const PointId& p) const { return c[model->basis_index(p)]; }
    const Rat& degree() const { return c[0]; }

    bool is_zero() const {
        for (const Rat& x : c)
            if (x != 0) return false;
        return true;
    }

    friend DivisorClass operator+(const DivisorClass& a, const DivisorClass& b) {
        require_same_model(a, b);
        DivisorClass r = a;
        for (size_t i = 0; i < r.c.size(); ++i) r.c[i] += b.c[i];
        return r;
    }
    friend DivisorClass operator-(const DivisorClass& a, const DivisorClass& b) {
        require_same_model(a, b);
        DivisorClass r = a;
        for (size_t i = 0; i < r.c.size(); ++i) r.c[i] -= b.c[i];
        return r;
    }
    friend DivisorClass operator*(const Rat& s, const DivisorClass& a) {
        DivisorClass r = a;
        for (Rat& x : r.c) x *= s;
        return r;
    }
    friend bool operator==(const DivisorClass& a, const DivisorClass& b) {
        return a.model.get() == b.model.get() && a.c == b.c;
    }

    static void require_same_model(const DivisorClass& a, const DivisorClass& b) {
        if (a.model.get() != b.model.get())
            throw math_error("divisor classes live on different models");
    }
};

/// Exact intersection pairing; diagonal on the basis.
inline Rat intersect(const DivisorClass& a, const DivisorClass& b) {
    DivisorClass::require_same_model(a, b);
    Rat s = a.c[0] * b.c[0] * Rat(a.model->base_selfint());
    for (size_t i = 1; i < a.c.size(); ++i) s -= a.c[i] * b.c[i];
    return s;
}

/// Class of the strict transform of the exceptional curve of p:
/// E_p* minus the sum of E_q* over blown q proximate to p.
inline DivisorClass strict_exceptional(const ModelRef& model, const PointId& p) {
    DivisorClass d = DivisorClass::exceptional(model, p);
    for (const PointId& q : model->blown_points())
        if (model->forest()->on_exceptional(q, p)) d.c[model->basis_index(q)] -= 1;
    return d;
}

/// Coefficient transport along a model refinement. Pullback keeps existing
/// coefficients and sets the new exceptional coefficients to zero, so
/// intersection numbers are preserved (projection formula).
struct Transport {
    ModelRef from;
    ModelRef to;

    DivisorClass operator()(const DivisorClass& d) const {
        if (d.model.get() != from.get()) throw math_error("transport applied to a class on the wrong model");
        DivisorClass out = DivisorClass::zero(to);
        out.c[0] = d.c[0];
        for (size_t i = 1; i < d.c.size(); ++i)
            out.c[to->basis_index(from->blown_points()[i - 1])] = d.c[i];
        return out;
    }
};

struct RefinedModel {
    ModelRef model;
    Transport transport;
};

/// Blows up additional points (parents must already be present).
inline RefinedModel refine_model(const ModelRef& model, const std::vector<PointId>& new_points) {
    std::vector<PointId> blown = model->blown_points();
    for (const PointId& p : new_points) {
        if (model->blown(p)) throw input_error("refine_model: point '" + p + "' already blown up");
        blown.push_back(p);
    }
    auto refined = std::make_shared<SurfaceModel>(model->base_selfint(), model->forest(), blown);
    return RefinedModel{refined, Transport{model, refined}};
}

enum class GramVerdict { NegativeDefinite, NotNegativeDefinite };

/// Gram matrix of a curve list with the definiteness verdict. When the test
/// fails, `witness` is a nonzero vector with witness^T * gram * witness >= 0.
struct GramCertificate {
    std::vector<std::string> labels;
    RatMat gram;
    GramVerdict verdict = GramVerdict::NegativeDefinite;
    RatVec witness;

    bool negative_definite() const { return verdict == GramVerdict::NegativeDefinite; }

    Rat quadratic_form(const RatVec& v) const {
        Rat s(0);
        for (size_t i = 0; i < v.size(); ++i)
            for (size_t j = 0; j < v.size(); ++j) s += v[i] * gram[i][j] * v[j];
        return s;
    }
};

namespace detail {

/// Leading-principal-minor sign test via symmetric (LDL^T) elimination:
/// minor_k = d_1 ... d_k, so (-1)^k minor_k > 0 for all k iff every pivot is
/// negative. Produces a witness from the first offending pivot.
inline void negdef_test(GramCertificate& cert) {
    const size_t n = cert.gram.size();
    RatMat m = cert.gram;                 // working copy, reduced in place
    RatMat l(n, RatVec(n, Rat(0)));       // unit lower-triangular multipliers
    for (size_t i = 0; i < n; ++i) l[i][i] = 1;

    auto witness_from = [&](RatVec w_reduced) {
        // Solve L^T v = w_reduced so that v^T G v equals the reduced form value.
        RatVec v(n, Rat(0));
        for (size_t ii = n; ii-- > 0;) {
            Rat acc = w_reduced[ii];
            for (size_t j = ii + 1; j < n; ++j) acc -= l[j][ii] * v[j];
            v[ii] = acc;
        }
        return v;
    };

    for (size_t k = 0; k < n; ++k) {
        const Rat piv = m[k][k];
        if (piv > 0 || piv == 0) {
            cert.verdict = GramVerdict::NotNegativeDefinite;
            if (piv > 0) {
                RatVec e(n, Rat(0));
                e[k] = 1;
                cert.witness = witness_from(e);
            } else {
                // Zero pivot: either the reduced row is zero (null vector) or
                // some off-diagonal entry makes the form indefinite.
                size_t j = k + 1;
                while (j < n && m[k][j] == 0) ++j;
                RatVec e(n, Rat(0));
                e[k] = 1;
                if (j < n) {
                    // In the (k, j) plane the reduced form is 2 m t + c with
                    // m = m[k][j], c = m[j][j]; pick t with value |c| + 1 > 0.
                    Rat mm = m[k][j], cc = m[j][j];
                    e[k] = (rat_abs(cc) + 1 - cc) / (2 * mm);
                    e[j] = 1;
                }
                cert.witness = witness_from(e);
            }
            if (cert.quadratic_form(cert.witness) < 0)
                throw internal_error("negative-definiteness witness failed to verify");
            return;
        }
        for (size_t i = k + 1; i < n; ++i) {
            Rat f = m[i][k] / piv;
            l[i][k] = f;
            for (size_t j = k; j < n; ++j) m[i][j] -= f * m[k][j];
        }
    }
    cert.verdict = GramVerdict::NegativeDefinite;
}

} // namespace detail

/// Exact negative-definiteness certificate for a list of classes.
/// The empty list is vacuously negative definite.
inline GramCertificate is_negative_definite(const std::vector<DivisorClass>& curves,
                                            const std::vector<std::string>& labels = {}) {
    GramCertificate cert;
    const size_t n = curves.size();
    for (size_t i = 0; i < n; ++i)
        cert.labels.push_back(i < labels.size() ? labels[i] : "curve" + std::to_string(i));
    cert.gram.assign(n, RatVec(n, Rat(0)));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) cert.gram[i][j] = intersect(curves[i], curves[j]);
    detail::negdef_test(cert);
    return cert;
}

} // namespace nok
