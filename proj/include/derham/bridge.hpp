#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "current.hpp"
#include "linalg.hpp"
#include "simplicial.hpp"
#include "solvers.hpp"

namespace derham {

/// Sign relating the dual current of a p-simplex in R^n to the current of
/// integration over it: -(-1)^(m(m+1)/2) with m = n - p. With it d(E(c)) =
/// E(boundary c) and the model (n-1)-simplex maps to +delta dx_1 chi.
inline int dual_sign(int p, int n) {
    const int m = n - p;
    return (m * (m + 1) / 2) % 2 == 0 ? -1 : 1;
}

/// Integration current of the simplex with the given ordered vertices,
/// written in the canonical frame of its site.
inline Current oriented_simplex_current(const std::vector<Vec>& vertices, const std::optional<Vec>& period = std::nullopt) {
    const int n = static_cast<int>(vertices.front().size());
    const Site site = canonical_site(Site::simplex(vertices), period);
    const int sign = detail::realization_order_sign(vertices) * (det(site.frame().map.A) > 0 ? 1 : -1);
    Current u = canonical_D(site, n, period);
    u *= Rat(sign);
    return u;
}

/// E(sigma) expressed as a multiple of canonical_D of sigma's site.
inline Rat dual_coefficient(const SimplicialComplex& X, int id) {
    const auto& s = X.simplex(id);
    if (!s.vertices) throw Error("unrealized simplex " + std::to_string(id));
    const Site site = X.site_of(id);
    const int sign = detail::realization_order_sign(*s.vertices) * (det(site.frame().map.A) > 0 ? 1 : -1);
    return Rat(dual_sign(s.dim, X.ambient_dim()) * s.orientation * sign);
}

/// The chain map from simplicial chains to currents.
inline Current E(const Chain& c, const SimplicialComplex& X) {
    const int n = X.ambient_dim();
    if (n < 0) throw Error("unrealized simplex");
    Current out(n, X.period());
    for (const auto& [id, coeff] : c.coeffs) {
        if (X.simplex(id).dim != c.dim) throw Error("chain refers to a simplex of another dimension");
        Current piece = canonical_D(X.site_of(id), n, X.period());
        piece *= coeff * dual_coefficient(X, id);
        out += piece;
    }
    return out;
}

/// d(D(S_p)) against the faces of S_p with their induced orientations:
/// d[S_p] = (-1)^(n-p+1) sum_r (-1)^r [face_r].
inline bool verify_boundary_identity(int p, int n) {
    if (p < 1 || p > n) throw Error("verify_boundary_identity needs 1 <= p <= n");
    Current lhs = d(make_D(p, n));
    const auto& verts = Site::model_simplex(p, n).vertices;
    Current rhs(n);
    for (int r = 0; r <= p; ++r) {
        std::vector<Vec> face = verts;
        face.erase(face.begin() + r);
        Current f = oriented_simplex_current(face);
        f *= Rat(r % 2 == 0 ? 1 : -1);
        rhs += f;
    }
    rhs *= Rat((n - p + 1) % 2 == 0 ? 1 : -1);
    return lhs == rhs;
}

inline bool chain_map_check(const Chain& c, const SimplicialComplex& X) {
    return d(E(c, X)) == E(boundary(c, X), X);
}

/// Terms of u living on j-simplices of X, grouped by simplex id.
inline std::map<int, Current> split_by_support(const Current& u, const SimplicialComplex& X, int j) {
    std::map<int, Current> out;
    for (const auto& [key, q] : u.terms()) {
        if (key.site.kind != Site::Kind::Simplex) throw Error("term not attributable to a simplex");
        const int p = key.site.tangential_dim();
        if (p > j) throw Error("term above the current skeleton");
        if (p < j) continue;
        auto id = X.find(key.site);
        if (!id) throw Error("term not attributable to a simplex");
        auto [it, inserted] = out.try_emplace(*id, u.dim(), u.period());
        it->second.add(key, q);
    }
    return out;
}

/// Every term of u attached to the lowest-id top-dimensional simplex of X
/// whose closure contains its support.
inline std::map<int, Current> split_by_support(const Current& u, const SimplicialComplex& X) {
    std::map<int, Current> out;
    const auto& top = X.ids_of_dim(X.dim());
    for (const auto& [key, q] : u.terms()) {
        std::optional<int> owner;
        if (key.site.kind == Site::Kind::Simplex)
            for (int id : top)
                if (is_face_of(key.site, X.site_of(id), X.period())) {
                    owner = id;
                    break;
                }
        if (!owner) throw Error("term not attributable to a simplex");
        auto [it, inserted] = out.try_emplace(*owner, u.dim(), u.period());
        it->second.add(key, q);
    }
    return out;
}

struct RetractionStage {
    int level = 0;
    int simplex = 0;
    Rat c;
    std::size_t v_terms = 0;
    std::size_t remainder_terms = 0;
};

/// u = E(c) + dv with boundary(c) = 0.
struct RetractionCertificate {
    Chain c;
    Current v;
    std::vector<RetractionStage> stages;
    bool verified = false;
};

/// Skeleton-by-skeleton retraction of a closed degree-k current on X.
inline RetractionCertificate global_retract(const Current& input, const SimplicialComplex& X, int k) {
    const int n = X.ambient_dim();
    if (!X.realized()) throw Error("unrealized simplex");
    if (input.dim() != n) throw Error("current and complex have different dimensions");
    if (k < 0 || k > n) throw Error("degree out of range");
    Current u = input.period() == X.period() ? input : input.with_period(X.period());
    if (auto deg = u.degree(); deg && *deg != k) throw Error("degree mismatch");
    if (!d(u).is_zero()) throw Error("not closed");

    RetractionCertificate cert{Chain(n - k), Current(n, X.period()), {}, false};
    Current cur = u;
    for (int j = std::min(n, X.dim()); j >= 0; --j) {
        for (auto& [id, piece] : split_by_support(cur, X, j)) {
            RetractionStep step = retract_on_simplex(piece, X.site_of(id));
            cert.v += step.v;
            cur -= piece;
            cur += step.remainder;
            if (step.c != 0) {
                if (j != n - k) throw Error("coefficient extracted below dual dimension");
                cert.c.add(id, step.c / dual_coefficient(X, id));
            }
            cert.stages.push_back({j, id, step.c, step.v.size(), step.remainder.size()});
        }
    }
    if (!cur.is_zero()) throw Error("internal: retraction left terms behind");
    cert.verified = u == E(cert.c, X) + d(cert.v) && boundary(cert.c, X).is_zero();
    if (!cert.verified) throw Error("internal: retraction certificate does not verify");
    return cert;
}

/// c' with boundary(c') = c, found from the Smith form of the next boundary
/// matrix. With `integral` set only integer solutions count.
inline std::optional<Chain> exactness_witness(const Chain& c, const SimplicialComplex& X, bool integral = false) {
    if (!boundary(c, X).is_zero()) throw Error("input not a cycle");
    const int p = c.dim;
    if (c.is_zero()) return Chain(p + 1);
    const auto x = X.vector_from_chain(c);
    const SmithForm s = smith_normal_form(X.boundary_matrix(p + 1));
    const std::size_t rows = x.size();
    const std::size_t cols = X.count(p + 1);
    std::vector<Rat> y(rows);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < rows; ++j)
            if (s.U(i, j) != 0) y[i] += Rat(s.U(i, j)) * x[j];
    std::vector<Rat> z(cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (i < s.rank()) {
            z[i] = y[i] / Rat(s.diagonal[i]);
            if (integral && !is_integer(z[i])) return std::nullopt;
        } else if (y[i] != 0) {
            return std::nullopt;
        }
    }
    std::vector<Rat> sol(cols);
    for (std::size_t i = 0; i < cols; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            if (s.V(i, j) != 0) sol[i] += Rat(s.V(i, j)) * z[j];
    Chain out = X.chain_from_vector(p + 1, sol);
    if (!(boundary(out, X) == c)) throw Error("internal: exactness witness does not verify");
    return out;
}

struct RandomCurrentOptions {
    int max_terms = 3;
    int max_delta_order = 1;
    int max_poly_degree = 2;
    int coeff_range = 3;
};

/// Random degree-k current made of terms on randomly chosen simplices of X.
template <class Rng>
Current random_current_on(const SimplicialComplex& X, int k, Rng& rng, const RandomCurrentOptions& opt = {}) {
    const int n = X.ambient_dim();
    Current out(n, X.period());
    std::vector<int> dims;
    for (int j = 0; j <= X.dim(); ++j)
        if (X.count(j) > 0) dims.push_back(j);
    std::uniform_int_distribution<int> coeff(-opt.coeff_range, opt.coeff_range);
    std::uniform_int_distribution<int> nterms(1, opt.max_terms);
    const int count = nterms(rng);
    for (int t = 0; t < count; ++t) {
        const int j = dims[std::uniform_int_distribution<std::size_t>(0, dims.size() - 1)(rng)];
        const int m = n - j;
        if (k > n) break;
        const auto& ids = X.ids_of_dim(j);
        const int id = ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)];
        // a random split of the degree between dy's and dz's
        std::vector<int> pool;
        for (int i = 0; i < n; ++i) pool.push_back(i);
        std::shuffle(pool.begin(), pool.end(), rng);
        FormIndex I, J;
        for (int i = 0; i < k; ++i) {
            if (pool[i] < m)
                I.idx.push_back(pool[i] + 1);
            else
                J.idx.push_back(pool[i] - m + 1);
        }
        std::sort(I.idx.begin(), I.idx.end());
        std::sort(J.idx.begin(), J.idx.end());
        MultiIndex alpha(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) alpha[i] = std::uniform_int_distribution<int>(0, opt.max_delta_order)(rng);
        Poly q(j);
        std::vector<int> expo(j);
        const int terms = 1 + std::uniform_int_distribution<int>(0, 2)(rng);
        for (int s = 0; s < terms; ++s) {
            int budget = std::uniform_int_distribution<int>(0, opt.max_poly_degree)(rng);
            for (auto& e : expo) e = 0;
            while (budget-- > 0 && j > 0) ++expo[std::uniform_int_distribution<int>(0, j - 1)(rng)];
            q.add_term(MultiIndex(expo), Rat(coeff(rng)));
        }
        if (q.is_zero()) q = Poly(j, 1);
        out.add({X.site_of(id), alpha, I, J}, q);
    }
    return out;
}

/// Rank of the degree-k cohomology of a realized complex, computed from the
/// retractions of E-images of a homology basis perturbed by exact currents.
inline int derham_cohomology(const SimplicialComplex& X, int k, std::uint64_t seed = 1) {
    const int n = X.ambient_dim();
    if (k < 0 || k > n) throw Error("degree out of range");
    const int p = n - k;
    const std::size_t np = X.count(p);
    auto to_rat = [](const IntMatrix& m) {
        Matrix r(m.rows(), m.cols());
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = Rat(m(i, j));
        return r;
    };
    const Matrix B = to_rat(X.boundary_matrix(p + 1));
    std::vector<Vec> cycles;
    if (p == 0) {
        for (std::size_t i = 0; i < np; ++i) {
            Vec e(np);
            e[i] = 1;
            cycles.push_back(e);
        }
    } else {
        cycles = nullspace(to_rat(X.boundary_matrix(p)));
    }
    auto with_columns = [&](const std::vector<Vec>& extra) {
        Matrix m(np, B.cols() + extra.size());
        for (std::size_t i = 0; i < np; ++i) {
            for (std::size_t j = 0; j < B.cols(); ++j) m(i, j) = B(i, j);
            for (std::size_t j = 0; j < extra.size(); ++j) m(i, B.cols() + j) = extra[j][i];
        }
        return m;
    };
    const std::size_t base = rank(B);
    std::vector<Vec> basis;
    for (const auto& z : cycles) {
        auto trial = basis;
        trial.push_back(z);
        if (rank(with_columns(trial)) > base + basis.size()) basis = std::move(trial);
    }

    std::mt19937_64 rng(seed);
    std::vector<Vec> retracted;
    for (const auto& h : basis) {
        Current u = E(X.chain_from_vector(p, h), X);
        if (k >= 1) u += d(random_current_on(X, k - 1, rng));
        RetractionCertificate cert = global_retract(u, X, k);
        retracted.push_back(X.vector_from_chain(cert.c.is_zero() ? Chain(p) : cert.c));
    }
    return static_cast<int>(rank(with_columns(retracted)) - base);
}

}  // namespace derham
