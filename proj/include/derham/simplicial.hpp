#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <vector>

#include "current.hpp"
#include "frame.hpp"
#include "snf.hpp"

namespace derham {

/// Formal linear combination of simplices of one dimension.
struct Chain {
    int dim = 0;
    std::map<int, Rat> coeffs;

    Chain() = default;
    explicit Chain(int p) : dim(p) {}

    void add(int id, const Rat& c) {
        if (c == 0) return;
        auto [it, inserted] = coeffs.emplace(id, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) coeffs.erase(it);
        }
    }
    Rat at(int id) const {
        auto it = coeffs.find(id);
        return it == coeffs.end() ? Rat(0) : it->second;
    }
    bool is_zero() const { return coeffs.empty(); }

    Chain& operator+=(const Chain& o) {
        if (!o.is_zero() && !is_zero() && o.dim != dim) throw Error("chains of different dimension");
        if (is_zero()) dim = o.dim;
        for (const auto& [id, c] : o.coeffs) add(id, c);
        return *this;
    }
    Chain& operator*=(const Rat& s) {
        if (s == 0) coeffs.clear();
        for (auto& [id, c] : coeffs) c *= s;
        return *this;
    }
    friend Chain operator+(Chain a, const Chain& b) { return a += b; }
    friend Chain operator-(Chain a, Chain b) { return a += (b *= Rat(-1)); }
    friend Chain operator*(const Rat& s, Chain a) { return a *= s; }
    friend bool operator==(const Chain& a, const Chain& b) {
        return a.coeffs == b.coeffs && (a.coeffs.empty() || a.dim == b.dim);
    }
};

/// A simplex of a Delta-complex. Faces are listed opposite vertex 0, 1, ...,
/// each with its incidence sign. `vertices` is the optional affine
/// realization, in the order matching the face list.
struct SimplexRecord {
    int id = 0;
    int dim = 0;
    std::vector<std::pair<int, int>> faces;
    std::optional<std::vector<Vec>> vertices;
    int orientation = 1;
};

struct HomologyResult {
    std::vector<int> betti;
    std::vector<std::vector<Int>> torsion;

    int euler_characteristic() const {
        int chi = 0;
        for (std::size_t p = 0; p < betti.size(); ++p) chi += (p % 2 == 0 ? 1 : -1) * betti[p];
        return chi;
    }
};

/// Oriented Delta-complex, optionally realized affinely in R^N (modulo a
/// diagonal lattice when `period` is set).
class SimplicialComplex {
public:
    SimplicialComplex() = default;
    explicit SimplicialComplex(std::optional<Vec> period) : period_(std::move(period)) {}

    /// Adds a simplex; faces must already exist. Returns its id.
    int add(SimplexRecord s) {
        if (simplices_.count(s.id)) throw Error("duplicate simplex id " + std::to_string(s.id));
        if (s.dim < 0) throw Error("negative simplex dimension");
        if (s.dim == 0 && !s.faces.empty()) throw Error("a vertex has no faces");
        if (s.dim > 0 && static_cast<int>(s.faces.size()) != s.dim + 1)
            throw Error("simplex " + std::to_string(s.id) + " needs " + std::to_string(s.dim + 1) + " faces");
        for (const auto& [f, sign] : s.faces) {
            auto it = simplices_.find(f);
            if (it == simplices_.end()) throw Error("dangling simplex id " + std::to_string(f));
            if (it->second.dim != s.dim - 1) throw Error("face of wrong dimension in simplex " + std::to_string(s.id));
            if (sign != 1 && sign != -1) throw Error("incidence sign must be +1 or -1");
        }
        if (s.orientation != 1 && s.orientation != -1) throw Error("orientation must be +1 or -1");
        if (s.vertices) {
            if (static_cast<int>(s.vertices->size()) != s.dim + 1) throw Error("realization has wrong vertex count");
            if (ambient_ < 0) ambient_ = static_cast<int>(s.vertices->front().size());
            for (const auto& v : *s.vertices)
                if (static_cast<int>(v.size()) != ambient_) throw Error("realization vertices of mixed dimension");
            if (period_ && static_cast<int>(period_->size()) != ambient_) throw Error("period does not match ambient dimension");
            Site site = canonical_site(Site::simplex(*s.vertices), period_);
            site.frame();  // rejects degenerate simplices
            if (!index_.emplace(site.vertices, s.id).second)
                throw Error("two simplices share the realization of simplex " + std::to_string(s.id));
        }
        dim_ = std::max(dim_, s.dim);
        const int id = s.id;
        by_dim_[s.dim].push_back(id);
        std::sort(by_dim_[s.dim].begin(), by_dim_[s.dim].end());
        simplices_.emplace(id, std::move(s));
        return id;
    }

    int dim() const { return dim_; }
    int ambient_dim() const { return ambient_; }
    const std::optional<Vec>& period() const { return period_; }
    std::size_t size() const { return simplices_.size(); }
    const std::map<int, SimplexRecord>& simplices() const { return simplices_; }

    const SimplexRecord& simplex(int id) const {
        auto it = simplices_.find(id);
        if (it == simplices_.end()) throw Error("dangling simplex id " + std::to_string(id));
        return it->second;
    }

    /// Ids of the j-simplices in increasing order.
    const std::vector<int>& ids_of_dim(int j) const {
        static const std::vector<int> none;
        auto it = by_dim_.find(j);
        return it == by_dim_.end() ? none : it->second;
    }
    std::size_t count(int j) const { return ids_of_dim(j).size(); }

    bool realized() const {
        for (const auto& [id, s] : simplices_)
            if (!s.vertices) return false;
        return !simplices_.empty();
    }

    /// The canonical site of a realized simplex.
    Site site_of(int id) const {
        const auto& s = simplex(id);
        if (!s.vertices) throw Error("unrealized simplex " + std::to_string(id));
        return canonical_site(Site::simplex(*s.vertices), period_);
    }

    /// Simplex realizing a given site, if any.
    std::optional<int> find(const Site& site) const {
        if (site.kind != Site::Kind::Simplex) return std::nullopt;
        auto it = index_.find(canonical_site(site, period_).vertices);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Integer matrix of the boundary C_p -> C_{p-1}, rows and columns in id
    /// order.
    IntMatrix boundary_matrix(int p) const {
        const auto& cols = ids_of_dim(p);
        const auto& rows = ids_of_dim(p - 1);
        IntMatrix m(rows.size(), cols.size());
        if (p <= 0) return m;
        std::map<int, std::size_t> row_of;
        for (std::size_t i = 0; i < rows.size(); ++i) row_of[rows[i]] = i;
        for (std::size_t j = 0; j < cols.size(); ++j)
            for (const auto& [f, sign] : simplex(cols[j]).faces) m(row_of.at(f), j) += sign;
        return m;
    }

    Chain chain_from_vector(int p, const std::vector<Rat>& x) const {
        const auto& ids = ids_of_dim(p);
        Chain c(p);
        for (std::size_t i = 0; i < ids.size(); ++i) c.add(ids[i], x[i]);
        return c;
    }
    std::vector<Rat> vector_from_chain(const Chain& c) const {
        const auto& ids = ids_of_dim(c.dim);
        std::vector<Rat> x(ids.size());
        for (const auto& [id, v] : c.coeffs) {
            auto it = std::lower_bound(ids.begin(), ids.end(), id);
            if (it == ids.end() || *it != id) throw Error("chain refers to a simplex of another dimension");
            x[it - ids.begin()] = v;
        }
        return x;
    }

private:
    int dim_ = -1;
    int ambient_ = -1;
    std::optional<Vec> period_;
    std::map<int, SimplexRecord> simplices_;
    std::map<int, std::vector<int>> by_dim_;
    std::map<std::vector<Vec>, int, VertexListLess> index_;
};

inline Chain boundary(const Chain& c, const SimplicialComplex& X) {
    Chain out(c.dim - 1);
    for (const auto& [id, v] : c.coeffs) {
        const auto& s = X.simplex(id);
        if (s.dim != c.dim) throw Error("chain refers to a simplex of another dimension");
        for (const auto& [f, sign] : s.faces) out.add(f, v * sign);
    }
    return out;
}

/// Ids of all simplices of dimension at most j.
inline std::vector<int> skeleton(const SimplicialComplex& X, int j) {
    if (j < 0 || j > X.dim()) throw Error("skeleton dimension out of range");
    std::vector<int> out;
    for (int p = 0; p <= j; ++p) {
        const auto& ids = X.ids_of_dim(p);
        out.insert(out.end(), ids.begin(), ids.end());
    }
    return out;
}

inline HomologyResult snf_homology(const SimplicialComplex& X) {
    const int n = X.dim();
    std::vector<std::size_t> rank(n + 2, 0);
    std::vector<std::vector<Int>> factors(n + 2);
    for (int p = 1; p <= n; ++p) {
        SmithForm s = smith_normal_form(X.boundary_matrix(p));
        rank[p] = s.rank();
        factors[p] = s.diagonal;
    }
    HomologyResult h;
    for (int p = 0; p <= n; ++p) {
        h.betti.push_back(static_cast<int>(X.count(p) - rank[p] - rank[p + 1]));
        std::vector<Int> tors;
        for (const auto& f : factors[p + 1])
            if (f > 1) tors.push_back(f);
        h.torsion.push_back(std::move(tors));
    }
    return h;
}

/// Every (n-1)-simplex lies in exactly two n-simplices with opposite
/// incidence signs.
inline bool validate_oriented(const SimplicialComplex& X) {
    const int n = X.dim();
    if (n < 1) return false;
    std::map<int, std::vector<int>> signs;
    for (int id : X.ids_of_dim(n))
        for (const auto& [f, sign] : X.simplex(id).faces) signs[f].push_back(sign);
    for (int f : X.ids_of_dim(n - 1)) {
        auto it = signs.find(f);
        if (it == signs.end() || it->second.size() != 2 || it->second[0] + it->second[1] != 0) return false;
    }
    return true;
}

namespace detail {

inline int permutation_sign(std::vector<int> perm) {
    int sign = 1;
    for (std::size_t i = 0; i < perm.size(); ++i)
        while (perm[i] != static_cast<int>(i)) {
            std::swap(perm[i], perm[perm[i]]);
            sign = -sign;
        }
    return sign;
}

/// Sign of the permutation sorting the realized vertices into canonical order.
inline int realization_order_sign(const std::vector<Vec>& vertices) {
    std::vector<int> perm(vertices.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](int a, int b) { return vertex_less(vertices[a], vertices[b]); });
    return permutation_sign(perm);
}

/// Builds every face of the given simplices (vertex tuples) with standard
/// incidence signs. Vertex tuples are sorted; `orient` gives the top-simplex
/// orientations.
struct FacetBuilder {
    SimplicialComplex X;
    std::map<std::vector<int>, int> ids;
    std::function<std::vector<Vec>(const std::vector<int>&)> realize;

    explicit FacetBuilder(std::optional<Vec> period) : X(std::move(period)) {}

    int get(const std::vector<int>& verts, int orientation = 1) {
        if (auto it = ids.find(verts); it != ids.end()) return it->second;
        SimplexRecord s;
        s.dim = static_cast<int>(verts.size()) - 1;
        if (s.dim > 0)
            for (std::size_t r = 0; r < verts.size(); ++r) {
                std::vector<int> face = verts;
                face.erase(face.begin() + static_cast<long>(r));
                int fid = get(face);
                s.faces.push_back({fid, (r % 2 == 0 ? 1 : -1) * orientation * X.simplex(fid).orientation});
            }
        s.orientation = orientation;
        s.id = static_cast<int>(X.size());
        if (realize) s.vertices = realize(verts);
        X.add(s);
        ids.emplace(verts, s.id);
        return s.id;
    }
};

}  // namespace detail

/// Builds a complex from top simplices given as vertex-index lists, choosing
/// orientations by propagation so that shared facets get opposite signs
/// whenever that is possible.
inline SimplicialComplex from_facets(std::vector<std::vector<int>> facets) {
    if (facets.empty()) throw Error("no facets");
    const std::size_t k = facets.front().size();
    for (auto& f : facets) {
        if (f.size() != k) throw Error("facets of mixed dimension");
        std::sort(f.begin(), f.end());
        if (std::adjacent_find(f.begin(), f.end()) != f.end()) throw Error("repeated vertex in facet");
    }
    // propagate orientations across shared ridges
    std::map<std::vector<int>, std::vector<std::pair<std::size_t, int>>> ridges;
    for (std::size_t i = 0; i < facets.size(); ++i)
        for (std::size_t r = 0; r < k && k > 1; ++r) {
            auto ridge = facets[i];
            ridge.erase(ridge.begin() + static_cast<long>(r));
            ridges[ridge].push_back({i, r % 2 == 0 ? 1 : -1});
        }
    std::vector<int> orient(facets.size(), 0);
    for (std::size_t start = 0; start < facets.size(); ++start) {
        if (orient[start] != 0) continue;
        orient[start] = 1;
        std::queue<std::size_t> todo;
        todo.push(start);
        while (!todo.empty()) {
            std::size_t i = todo.front();
            todo.pop();
            for (std::size_t r = 0; r < k && k > 1; ++r) {
                auto ridge = facets[i];
                ridge.erase(ridge.begin() + static_cast<long>(r));
                const int mine = orient[i] * (r % 2 == 0 ? 1 : -1);
                for (const auto& [j, s] : ridges[ridge]) {
                    if (j == i || orient[j] != 0) continue;
                    orient[j] = -mine * s;
                    todo.push(j);
                }
            }
        }
    }
    detail::FacetBuilder b(std::nullopt);
    for (std::size_t i = 0; i < facets.size(); ++i) b.get(facets[i], orient[i]);
    return std::move(b.X);
}

/// Boundary of the standard (n+1)-simplex, realized on the vertices
/// 0, e_1, ..., e_{n+1} of R^{n+1}.
inline SimplicialComplex make_sphere(int n) {
    if (n < 1) throw Error("make_sphere needs n >= 1");
    detail::FacetBuilder b(std::nullopt);
    b.realize = [n](const std::vector<int>& verts) {
        std::vector<Vec> out;
        for (int v : verts) {
            Vec x(n + 1);
            if (v > 0) x[v - 1] = 1;
            out.push_back(std::move(x));
        }
        return out;
    };
    for (int r = 0; r <= n + 1; ++r) {
        std::vector<int> verts;
        for (int v = 0; v <= n + 1; ++v)
            if (v != r) verts.push_back(v);
        b.get(verts, r % 2 == 0 ? 1 : -1);
    }
    return std::move(b.X);
}

/// Freudenthal triangulation of the k^n grid on R^n / kZ^n: one n-simplex
/// per cube and coordinate order, vertex paths increasing one coordinate at
/// a time.
inline SimplicialComplex make_torus(int n, int k) {
    if (n < 1 || n > 3) throw Error("make_torus supports 1 <= n <= 3");
    if (k < 1) throw Error("make_torus needs k >= 1");
    const Vec period(n, Rat(k));
    SimplicialComplex X(period);
    std::map<std::vector<Vec>, int, VertexListLess> ids;

    std::function<int(std::vector<Vec>, int)> get = [&](std::vector<Vec> verts, int orientation) -> int {
        Site canon = canonical_site(Site::simplex(verts), period);
        if (auto it = ids.find(canon.vertices); it != ids.end()) return it->second;
        SimplexRecord s;
        s.dim = static_cast<int>(canon.vertices.size()) - 1;
        if (s.dim > 0)
            for (std::size_t r = 0; r < canon.vertices.size(); ++r) {
                auto face = canon.vertices;
                face.erase(face.begin() + static_cast<long>(r));
                int fid = get(face, 1);
                s.faces.push_back({fid, (r % 2 == 0 ? 1 : -1) * orientation * X.simplex(fid).orientation});
            }
        s.orientation = orientation;
        s.id = static_cast<int>(X.size());
        s.vertices = canon.vertices;
        X.add(s);
        ids.emplace(canon.vertices, s.id);
        return s.id;
    };

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> perms;
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));

    int cells = 1;
    for (int i = 0; i < n; ++i) cells *= k;
    for (int cell = 0; cell < cells; ++cell) {
        Vec base(n);
        for (int i = 0, rest = cell; i < n; ++i, rest /= k) base[i] = rest % k;
        for (const auto& order : perms) {
            std::vector<Vec> path{base};
            for (int axis : order) {
                Vec next = path.back();
                next[axis] += 1;
                path.push_back(std::move(next));
            }
            Matrix G(n, n);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) G(i, j) = path[j + 1][i] - path[0][i];
            get(path, det(G) > 0 ? 1 : -1);
        }
    }
    return X;
}

/// The minimal 6-vertex triangulation of the real projective plane.
inline SimplicialComplex make_projective_plane() {
    return from_facets({{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}, {0, 5, 1},
                        {1, 2, 4}, {2, 3, 5}, {3, 4, 1}, {4, 5, 2}, {5, 1, 3}});
}

}  // namespace derham
