#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "algebra.hpp"
#include "linalg.hpp"

namespace derham {

/// Affine map x -> A x + b on R^n.
struct AffineMap {
    Matrix A;
    Vec b;

    static AffineMap identity(int n) { return {Matrix::identity(n), Vec(n)}; }

    Vec apply(const Vec& x) const { return A * x + b; }

    /// (*this) after `inner`.
    AffineMap compose(const AffineMap& inner) const { return {A * inner.A, A * inner.b + b}; }

    friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

/// Rational affine coordinate system: model coordinates x' = (y, z) with the
/// first `split` entries transverse (y) and the rest tangential (z); the
/// ambient point is A x' + b.
struct Frame {
    AffineMap map;
    int split = 0;

    int dim() const { return static_cast<int>(map.A.rows()); }
    int transverse_dim() const { return split; }
    int tangential_dim() const { return dim() - split; }

    friend bool operator==(const Frame&, const Frame&) = default;
};

inline bool vec_less(const Vec& a, const Vec& b) {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (b[i] < a[i]) return false;
    }
    return a.size() < b.size();
}

/// Canonical vertex order of a simplex: compare the last coordinate first.
/// With it the model simplex 0, e_{m+1}, ..., e_n is already in order, as are
/// coordinate-monotone vertex paths.
inline bool vertex_less(const Vec& a, const Vec& b) {
    for (std::size_t k = a.size(); k-- > 0;) {
        if (a[k] < b[k]) return true;
        if (b[k] < a[k]) return false;
    }
    return false;
}

inline int compare_vec(const Vec& a, const Vec& b) {
    if (vec_less(a, b)) return -1;
    if (vec_less(b, a)) return 1;
    return 0;
}

inline int compare_frame(const Frame& a, const Frame& b) {
    if (a.split != b.split) return a.split < b.split ? -1 : 1;
    if (auto c = a.map.A <=> b.map.A; c != 0) return c < 0 ? -1 : 1;
    return compare_vec(a.map.b, b.map.b);
}

struct VertexListLess {
    bool operator()(const std::vector<Vec>& a, const std::vector<Vec>& b) const {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), vec_less);
    }
};

/// Canonical frame of an ordered, affinely independent vertex list in R^n:
/// tangential columns v_i - v_0, transverse columns the canonical basis of
/// the orthogonal complement of the tangent space, origin v_0.
///
/// Because the transverse block only depends on the tangent space, a face
/// of a simplex and the simplex itself have nested transverse spaces, which
/// keeps every face re-expression in d free of shear.
inline Frame simplex_frame(const std::vector<Vec>& vertices) {
    static std::mutex mu;
    static std::map<std::vector<Vec>, Frame, VertexListLess> cache;
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(vertices); it != cache.end()) return it->second;
    }
    if (vertices.empty()) throw Error("simplex with no vertices");
    const std::size_t n = vertices[0].size();
    const std::size_t p = vertices.size() - 1;
    if (p > n) throw Error("simplex dimension exceeds ambient dimension");
    Matrix gt(p, n);
    for (std::size_t i = 0; i < p; ++i) {
        if (vertices[i + 1].size() != n) throw Error("simplex vertices of mixed dimension");
        for (std::size_t j = 0; j < n; ++j) gt(i, j) = vertices[i + 1][j] - vertices[0][j];
    }
    if (rank(gt) != p) throw Error("degenerate simplex");
    auto normals = nullspace(gt);
    Frame f;
    f.split = static_cast<int>(n - p);
    f.map.A = Matrix(n, n);
    f.map.b = vertices[0];
    for (std::size_t c = 0; c < normals.size(); ++c)
        for (std::size_t r = 0; r < n; ++r) f.map.A(r, c) = normals[c][r];
    for (std::size_t c = 0; c < p; ++c)
        for (std::size_t r = 0; r < n; ++r) f.map.A(r, n - p + c) = gt(c, r);
    std::lock_guard lock(mu);
    if (cache.size() > 200000) cache.clear();
    cache.emplace(vertices, f);
    return f;
}

}  // namespace derham
