#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include <derham/current.hpp>
#include <derham/linalg.hpp>
#include <derham/pairing.hpp>

namespace gen {

using namespace derham;
using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline Poly random_poly(Rng& rng, int nvars, int max_degree, int max_terms = 3, int range = 3) {
    Poly q(nvars);
    const int terms = uniform(rng, 1, max_terms);
    for (int t = 0; t < terms; ++t) {
        std::vector<int> e(nvars, 0);
        int budget = uniform(rng, 0, max_degree);
        while (budget-- > 0 && nvars > 0) ++e[uniform(rng, 0, nvars - 1)];
        int c = uniform(rng, -range, range);
        if (c == 0) c = 1;
        q.add_term(MultiIndex(e), Rat(c) / Rat(uniform(rng, 1, 2)));
    }
    return q;
}

/// Random k-element subset of {1..n}, sorted.
inline FormIndex random_subset(Rng& rng, int n, int k) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i + 1;
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<int> pick(all.begin(), all.begin() + k);
    std::sort(pick.begin(), pick.end());
    return FormIndex(pick);
}

inline PolyForm random_form(Rng& rng, int n, int k, int max_degree = 3) {
    PolyForm w(n, k);
    const int comps = uniform(rng, 1, 3);
    for (int c = 0; c < comps; ++c) w.add(random_subset(rng, n, k), random_poly(rng, n, max_degree));
    return w;
}

/// Splits the degree k between the m transverse and p tangential slots.
inline std::pair<FormIndex, FormIndex> random_split(Rng& rng, int m, int p, int k) {
    const int lo = std::max(0, k - p);
    const int hi = std::min(m, k);
    const int a = uniform(rng, lo, hi);
    return {random_subset(rng, m, a), random_subset(rng, p, k - a)};
}

inline MultiIndex random_alpha(Rng& rng, int m, int max_order) {
    MultiIndex a(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) a[i] = uniform(rng, 0, max_order);
    return a;
}

/// Simplex with small integer vertices, nondegenerate, in canonical order.
inline Site random_simplex_site(Rng& rng, int n, int p) {
    for (;;) {
        std::vector<Vec> verts;
        for (int v = 0; v <= p; ++v) {
            Vec x(n);
            for (auto& c : x) c = uniform(rng, -2, 2);
            verts.push_back(x);
        }
        Matrix gt(p, n);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < n; ++j) gt(i, j) = verts[i + 1][j] - verts[0][j];
        if (static_cast<int>(rank(gt)) != p) continue;
        std::sort(verts.begin(), verts.end(), vertex_less);
        if (std::adjacent_find(verts.begin(), verts.end()) != verts.end()) continue;
        return Site::simplex(verts);
    }
}

struct Options {
    int max_order = 2;      // delta derivative order per coordinate
    int max_degree = 2;     // tangential polynomial degree
    int max_terms = 3;
    bool general_sites = true;  // also non-model simplices
};

/// Random degree-k current on model or random simplices of R^n.
inline Current random_current(Rng& rng, int n, int k, const Options& opt = {}) {
    Current u(n);
    const int terms = uniform(rng, 1, opt.max_terms);
    for (int t = 0; t < terms; ++t) {
        const int p = uniform(rng, 0, n);
        const int m = n - p;
        Site site = opt.general_sites && uniform(rng, 0, 1) ? random_simplex_site(rng, n, p) : Site::model_simplex(p, n);
        auto [I, J] = random_split(rng, m, p, k);
        u.add({site, random_alpha(rng, m, opt.max_order), I, J}, random_poly(rng, p, opt.max_degree));
    }
    return u;
}

/// Random degree-k current supported at the origin.
inline Current random_point_current(Rng& rng, int n, int k, int max_order = 2, int max_terms = 3) {
    Current u(n);
    const int terms = uniform(rng, 1, max_terms);
    for (int t = 0; t < terms; ++t)
        u.add({Site::point(n), random_alpha(rng, n, max_order), random_subset(rng, n, k), FormIndex{}},
              Poly(0, Rat(uniform(rng, 1, 4) * (uniform(rng, 0, 1) ? 1 : -1))));
    return u;
}

/// Random degree-k current on the model simplex S_p only.
inline Current random_model_current(Rng& rng, int n, int p, int k, int max_order = 2, int max_degree = 2) {
    Current u(n);
    const int m = n - p;
    const int terms = uniform(rng, 1, 3);
    for (int t = 0; t < terms; ++t) {
        auto [I, J] = random_split(rng, m, p, k);
        u.add({Site::model_simplex(p, n), random_alpha(rng, m, max_order), I, J}, random_poly(rng, p, max_degree));
    }
    return u;
}

}  // namespace gen
