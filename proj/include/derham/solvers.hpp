#pragma once

#include <optional>

#include "current.hpp"
#include "pairing.hpp"

namespace derham {

/// u = c delta(x) dx_1^...^dx_n + dv for a closed point-supported u.
struct PointSolution {
    Rat c;
    Current v;
};

/// u = dv + remainder + c D(S), remainder supported on the boundary of S.
struct RetractionStep {
    Rat c;
    Current v;
    Current remainder;
};

/// Either the constant of a closed 0-form or a primitive v with dv = u.
struct InteriorSolution {
    std::optional<Rat> constant;
    Current v;
};

namespace detail {

/// Interior product with y_i d/dy_i in the site's own model coordinates
/// (i is 0-based over all model coordinates), for terms on that site.
inline Current contract_model(const Current& u, int i) {
    Current out(u.dim(), u.period());
    for (const auto& [key, q] : u.terms()) {
        const int m = key.site.transverse_dim();
        const int p = key.site.tangential_dim();
        std::vector<int> s;
        for (int a : key.I.idx) s.push_back(a - 1);
        for (int b : key.J.idx) s.push_back(m + b - 1);
        auto pos = std::find(s.begin(), s.end(), i);
        if (pos == s.end()) continue;
        const Rat sign = (pos - s.begin()) % 2 == 0 ? 1 : -1;
        FormIndex I2 = key.I, J2 = key.J;
        if (i < m) {
            I2.idx.erase(std::find(I2.idx.begin(), I2.idx.end(), i + 1));
            if (key.alpha[i] == 0) continue;
            MultiIndex lowered = key.alpha;
            lowered[i] -= 1;
            out.add({key.site, lowered, I2, J2}, q * (sign * Rat(-key.alpha[i])));
        } else {
            J2.idx.erase(std::find(J2.idx.begin(), J2.idx.end(), i - m + 1));
            out.add({key.site, key.alpha, I2, J2}, (q * Poly::variable(p, i - m)) * sign);
        }
    }
    return out;
}

/// d of a tangential-only form on a site, ignoring the cut-off.
inline PolyForm interior_form(const Current& u, const Site& site, int k) {
    PolyForm w(site.tangential_dim(), k);
    for (const auto& [key, q] : u.terms()) {
        if (!(key.site == site) || key.site.transverse_dim() != 0 || !key.alpha.e.empty() || !key.I.empty())
            throw Error("support violation: expected a tangential form on one site");
        if (static_cast<int>(key.J.size()) != k) throw Error("mixed form degrees");
        w.add(key.J, q);
    }
    return w;
}

/// Homotopy for closed polynomial k-forms (k >= 1) on R^p: integrate the
/// dz_j-part in z_j from 0, subtract, move to the next variable.
inline PolyForm polynomial_primitive(PolyForm u) {
    const int p = u.dim();
    const int k = u.degree();
    PolyForm v(p, k - 1);
    for (int j = 1; j <= p && !u.components().empty(); ++j) {
        PolyForm step(p, k - 1);
        for (const auto& [K, f] : u.components()) {
            if (K.idx.front() != j) continue;  // no dz_i with i < j survives
            FormIndex rest(std::vector<int>(K.idx.begin() + 1, K.idx.end()));
            step.add(rest, f.antiderivative(j - 1));
        }
        PolyForm ds = step.d();
        ds *= Rat(-1);
        u += ds;
        v += step;
    }
    if (!u.components().empty()) throw Error("not closed in interior");
    return v;
}

inline bool supported_on_boundary(const Current& r, const Site& sigma) {
    for (const auto& [key, q] : r.terms())
        if (key.site == sigma || !is_face_of(key.site, sigma, r.period())) return false;
    return true;
}

}  // namespace detail

/// Closed currents supported at one point: peel off every component of
/// nonzero multi-homogeneity with the radial homotopy.
inline PointSolution solve_point(const Current& u) {
    const int n = u.dim();
    if (u.is_zero()) return {0, Current(n, u.period())};
    const Site site = u.terms().begin()->first.site;
    for (const auto& [key, q] : u.terms())
        if (key.site.kind != Site::Kind::Simplex || key.site.tangential_dim() != 0 || !(key.site == site))
            throw Error("not point-supported");
    if (!d(u).is_zero()) throw Error("not closed");

    const Vec& at = site.vertices.front();
    Current centered = at == Vec(n) ? u : affine_transform(u, AffineMap{Matrix::identity(n), Vec(n) - at});

    Current v(n, u.period());
    Rat c = 0;
    for (const auto& [a, comp] : homogeneity_decompose(centered)) {
        auto nz = std::find_if(a.begin(), a.end(), [](int x) { return x != 0; });
        if (nz == a.end()) {
            // only delta(x) dx_1^...^dx_n has degree zero
            for (const auto& [key, q] : comp.terms()) c += q.constant_term();
            continue;
        }
        const int i = static_cast<int>(nz - a.begin());
        Current piece = contract_radial(comp, i + 1);
        piece *= Rat(1) / Rat(*nz);
        v += piece;
    }
    if (!(at == Vec(n))) v = affine_transform(v, AffineMap{Matrix::identity(n), at});

    Current check = u - d(v) - c * canonical_D(site, n, u.period());
    if (!check.is_zero()) throw Error("internal: point solution does not reproduce the input");
    return {c, v};
}

/// Poincare lemma on the interior of a simplex (or a whole chart) for
/// tangential polynomial forms.
inline InteriorSolution solve_interior(const Current& u) {
    const int n = u.dim();
    if (u.is_zero()) return {std::nullopt, Current(n, u.period())};
    const Site site = u.terms().begin()->first.site;
    auto k = u.degree();
    if (!k) throw Error("mixed form degrees");
    PolyForm w = detail::interior_form(u, site, *k);
    if (!w.d().components().empty()) throw Error("not closed in interior");
    if (*k == 0) {
        Rat c = 0;
        for (const auto& [K, f] : w.components()) {
            if (!f.is_constant()) throw Error("k=0 nonconstant");
            c += f.constant_term();
        }
        return {c, Current(n, u.period())};
    }
    PolyForm prim = detail::polynomial_primitive(w);
    Current v(n, u.period());
    for (const auto& [J, f] : prim.components()) v.add({site, MultiIndex(0), FormIndex{}, J}, f);
    return {std::nullopt, v};
}

/// Retraction of a current supported in the closed simplex `sigma` and
/// closed away from its boundary.
inline RetractionStep retract_on_simplex(const Current& u, const Site& simplex) {
    const int n = u.dim();
    const Site sigma = canonical_site(simplex, u.period());
    if (sigma.kind != Site::Kind::Simplex) throw Error("retract_on_simplex needs a simplex site");
    const int m = sigma.transverse_dim();
    const int p = sigma.tangential_dim();

    Current interior(n, u.period()), remainder(n, u.period());
    for (const auto& [key, q] : u.terms()) {
        if (key.site == sigma)
            interior.add(key, q);
        else if (is_face_of(key.site, sigma, u.period()))
            remainder.add(key, q);
        else
            throw Error("support violation");
    }
    if (!detail::supported_on_boundary(d(u), sigma)) throw Error("not closed off boundary");
    if (interior.is_zero()) return {0, Current(n, u.period()), remainder};

    Current v(n, u.period());
    Rat c = 0;
    for (const auto& [a, comp] : transverse_decompose(interior)) {
        auto nz = std::find_if(a.begin(), a.end(), [](int x) { return x != 0; });
        if (nz != a.end()) {
            Current piece = detail::contract_model(comp, static_cast<int>(nz - a.begin()));
            piece *= Rat(1) / Rat(*nz);
            v += piece;
            continue;
        }
        // degree zero in y: delta(y) dy_1^...^dy_m ^ u''(z)
        const int kk = static_cast<int>(comp.terms().begin()->first.J.size());
        PolyForm form(p, kk);
        for (const auto& [key, q] : comp.terms()) form.add(key.J, q);
        if (!form.d().components().empty()) throw Error("not closed off boundary");
        if (kk == 0) {
            for (const auto& [K, f] : form.components()) {
                if (!f.is_constant()) throw Error("not closed off boundary");
                c += f.constant_term();
            }
            continue;
        }
        PolyForm prim = detail::polynomial_primitive(form);
        const Rat sign = m % 2 == 0 ? 1 : -1;
        for (const auto& [J, f] : prim.components()) v.add({sigma, MultiIndex(m), FormIndex::full(m), J}, f * sign);
    }
    Current rest = u - d(v) - c * canonical_D(sigma, n, u.period());
    if (!detail::supported_on_boundary(rest, sigma)) throw Error("internal: retraction left interior terms");
    return {c, v, rest};
}

/// Retraction on the model simplex S_p of R^n.
inline RetractionStep retract_on_simplex(const Current& u, int p) {
    return retract_on_simplex(u, Site::model_simplex(p, u.dim()));
}

}  // namespace derham
