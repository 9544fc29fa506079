#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "algebra.hpp"
#include "frame.hpp"
#include "linalg.hpp"

namespace derham {

/// Where a term lives. A Simplex site is an ordered list of p+1 affinely
/// independent points of R^n carrying the characteristic function of the
/// simplex they span (a single vertex is a point support). A Plane site is
/// a whole affine plane given by an explicit frame, with no cut-off.
struct Site {
    enum class Kind { Simplex, Plane };

    Kind kind = Kind::Simplex;
    std::vector<Vec> vertices;
    Frame plane;

    static Site simplex(std::vector<Vec> vertices) {
        Site s;
        s.kind = Kind::Simplex;
        s.vertices = std::move(vertices);
        return s;
    }
    static Site point(int n) { return simplex({Vec(n)}); }
    /// S_p = {x_1 = ... = x_{n-p} = 0, x_j >= 0, sum of the rest <= 1}.
    static Site model_simplex(int p, int n) {
        if (p < 0 || p > n) throw Error("model simplex needs 0 <= p <= n");
        std::vector<Vec> v{Vec(n)};
        for (int j = n - p; j < n; ++j) {
            Vec e(n);
            e[j] = 1;
            v.push_back(std::move(e));
        }
        return simplex(std::move(v));
    }
    static Site plane_site(Frame f) {
        Site s;
        s.kind = Kind::Plane;
        s.plane = std::move(f);
        return s;
    }
    /// All of R^n in its own coordinates.
    static Site chart(int n) { return plane_site(Frame{AffineMap::identity(n), 0}); }

    int ambient_dim() const {
        return kind == Kind::Plane ? plane.dim() : static_cast<int>(vertices.front().size());
    }
    int tangential_dim() const {
        return kind == Kind::Plane ? plane.tangential_dim() : static_cast<int>(vertices.size()) - 1;
    }
    int transverse_dim() const { return ambient_dim() - tangential_dim(); }
    bool has_cutoff() const { return kind == Kind::Simplex && tangential_dim() > 0; }

    Frame frame() const { return kind == Kind::Plane ? plane : simplex_frame(vertices); }

    friend int compare(const Site& a, const Site& b) {
        if (a.kind != b.kind) return a.kind == Kind::Simplex ? -1 : 1;
        if (a.kind == Kind::Plane) return compare_frame(a.plane, b.plane);
        if (a.vertices.size() != b.vertices.size()) return a.vertices.size() < b.vertices.size() ? -1 : 1;
        for (std::size_t i = 0; i < a.vertices.size(); ++i)
            if (int c = compare_vec(a.vertices[i], b.vertices[i]); c != 0) return c;
        return 0;
    }
    friend bool operator==(const Site& a, const Site& b) { return compare(a, b) == 0; }
};

/// One symbolic term delta^(alpha)(y) dy^I ^ q(z) dz^J [chi] expressed in the
/// canonical frame of its site; q lives in `map` below.
struct TermKey {
    Site site;
    MultiIndex alpha;  // length = transverse dim
    FormIndex I;       // over transverse coordinates 1..m
    FormIndex J;       // over tangential coordinates 1..p

    int form_degree() const { return static_cast<int>(I.size() + J.size()); }

    friend bool operator<(const TermKey& a, const TermKey& b) {
        if (int c = compare(a.site, b.site); c != 0) return c < 0;
        if (a.alpha != b.alpha) return a.alpha < b.alpha;
        if (a.I != b.I) return a.I < b.I;
        return a.J < b.J;
    }
    friend bool operator==(const TermKey& a, const TermKey& b) {
        return a.site == b.site && a.alpha == b.alpha && a.I == b.I && a.J == b.J;
    }
};

/// A term in the explicit form used by the API and the tests.
struct CurrentTerm {
    TermKey key;
    Poly q;
};

namespace detail {

struct Piece {
    MultiIndex alpha;
    FormIndex I;
    FormIndex J;
    Poly q;
};

struct PieceKeyLess {
    bool operator()(const std::tuple<MultiIndex, FormIndex, FormIndex>& a,
                    const std::tuple<MultiIndex, FormIndex, FormIndex>& b) const {
        return a < b;
    }
};

using PieceMap = std::map<std::tuple<MultiIndex, FormIndex, FormIndex>, Poly, PieceKeyLess>;

inline void add_piece(PieceMap& out, MultiIndex alpha, FormIndex I, FormIndex J, const Poly& q) {
    if (q.is_zero()) return;
    auto key = std::make_tuple(std::move(alpha), std::move(I), std::move(J));
    auto it = out.find(key);
    if (it == out.end())
        out.emplace(std::move(key), q);
    else {
        it->second += q;
        if (it->second.is_zero()) out.erase(it);
    }
}

/// y^eta delta^(gamma)(y) = prod_i (-1)^eta_i gamma_i!/(gamma_i-eta_i)! delta^(gamma-eta)(y),
/// zero as soon as eta_i > gamma_i for some i.
inline std::optional<std::pair<MultiIndex, Rat>> absorb_into_delta(const MultiIndex& gamma, const MultiIndex& eta) {
    MultiIndex out = gamma;
    Int factor = 1;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        if (eta[i] > gamma[i]) return std::nullopt;
        out[i] = gamma[i] - eta[i];
        factor *= factorial(gamma[i]) / factorial(out[i]);
        if (eta[i] % 2 == 1) factor = -factor;
    }
    return std::make_pair(out, Rat(factor));
}

/// Determinant of the |S| x |T| minor of m (0-based index lists).
inline Rat minor_det(const Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
    Matrix sub(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) sub(i, j) = m(rows[i], cols[j]);
    return det(sub);
}

/// dx_old^S = sum_T det(jac[S,T]) dx_new^T, with S, T 0-based sorted lists.
inline std::vector<std::pair<std::vector<int>, Rat>> pull_back_form(const Matrix& jac, const std::vector<int>& s) {
    std::vector<std::pair<std::vector<int>, Rat>> out;
    const int n = static_cast<int>(jac.cols());
    const int k = static_cast<int>(s.size());
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        std::vector<int> t;
        for (int j = 0; j < n; ++j)
            if (mask & (1u << j)) t.push_back(j);
        Rat d = k == 0 ? Rat(1) : minor_det(jac, s, t);
        if (d != 0) out.emplace_back(std::move(t), d);
    }
    return out;
}

/// Re-expresses one term under the model-coordinate substitution
/// x_old = jac * x_new + shift, which must keep the transverse block:
/// y_old = P y_new, z_old = R z_new + K y_new + r. A nonzero K can only be
/// absorbed when no delta derivative meets the cut-off, otherwise the
/// derivative would hit chi.
inline PieceMap change_coordinates(const Piece& in, int m, const Matrix& jac, const Vec& shift, bool cutoff) {
    const int n = static_cast<int>(jac.rows());
    const int p = n - m;
    for (int i = 0; i < m; ++i) {
        if (shift[i] != 0) throw Error("frame incompatible with the split");
        for (int j = m; j < n; ++j)
            if (jac(i, j) != 0) throw Error("frame incompatible with the split");
    }
    Matrix P = jac.block(0, 0, m, m);
    bool sheared = !jac.block(m, 0, p, m).is_zero();
    if (sheared && cutoff && in.alpha.order() > 0)
        throw Error("frame change shears a delta derivative across a simplex cut-off");

    // delta^(alpha)(P y') = |det P|^-1 prod_i (sum_j Q_ji d_j)^alpha_i delta(y')
    Poly deltas(m, 1);
    if (m > 0) {
        Matrix Q = inverse(P);
        Rat dp = det(P);
        deltas = Poly(m, 1 / (dp < 0 ? -dp : dp));
        for (int i = 0; i < m; ++i) {
            if (in.alpha[i] == 0) continue;
            Poly lin(m);
            for (int j = 0; j < m; ++j) lin.add_term(MultiIndex::unit(m, j), Q(j, i));
            deltas = deltas * lin.pow(in.alpha[i]);
        }
    }

    // q(z_old) in terms of (y_new, z_new)
    std::vector<Poly> images;
    for (int i = 0; i < p; ++i) {
        Poly img(n, shift[m + i]);
        for (int j = 0; j < n; ++j)
            if (jac(m + i, j) != 0) img.add_term(MultiIndex::unit(n, j), jac(m + i, j));
        images.push_back(std::move(img));
    }
    Poly qn = in.q.compose(images, n);

    std::vector<int> s;
    for (int i : in.I.idx) s.push_back(i - 1);
    for (int j : in.J.idx) s.push_back(m + j - 1);
    auto forms = pull_back_form(jac, s);

    PieceMap out;
    for (const auto& [gamma, cg] : deltas.terms()) {
        for (const auto& [mono, cq] : qn.terms()) {
            MultiIndex eta(std::vector<int>(mono.e.begin(), mono.e.begin() + m));
            MultiIndex beta(std::vector<int>(mono.e.begin() + m, mono.e.end()));
            auto absorbed = absorb_into_delta(gamma, eta);
            if (!absorbed) continue;
            for (const auto& [t, cf] : forms) {
                FormIndex I2, J2;
                for (int x : t) {
                    if (x < m)
                        I2.idx.push_back(x + 1);
                    else
                        J2.idx.push_back(x - m + 1);
                }
                add_piece(out, absorbed->first, std::move(I2), std::move(J2),
                          Poly::monomial(beta, cg * cq * cf * absorbed->second));
            }
        }
    }
    return out;
}

/// Coordinates of `to` expressed through coordinates of `from`:
/// x_from = jac * x_to + shift.
inline std::pair<Matrix, Vec> relative_coordinates(const Frame& from, const Frame& to) {
    Matrix ainv = inverse(from.map.A);
    return {ainv * to.map.A, ainv * (to.map.b - from.map.b)};
}

}  // namespace detail

/// Finite sum of symbolic terms over R^n, or over the torus R^n / diag(period)
/// when a period vector is set (each stored term then stands for its orbit).
/// The container is always in canonical form: every mutation normalizes.
class Current {
public:
    using Terms = std::map<TermKey, Poly>;

    Current() = default;
    explicit Current(int n, std::optional<Vec> period = std::nullopt) : n_(n), period_(std::move(period)) {
        if (period_ && static_cast<int>(period_->size()) != n_) throw Error("period vector has wrong length");
    }

    int dim() const { return n_; }
    const std::optional<Vec>& period() const { return period_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    std::vector<CurrentTerm> listing() const {
        std::vector<CurrentTerm> out;
        for (const auto& [k, q] : terms_) out.push_back({k, q});
        return out;
    }

    /// Form degree shared by all terms; nullopt for the zero current or a
    /// current of mixed degree.
    std::optional<int> degree() const {
        std::optional<int> k;
        for (const auto& [key, q] : terms_) {
            if (k && *k != key.form_degree()) return std::nullopt;
            k = key.form_degree();
        }
        return k;
    }

    /// Adds a term whose coefficient q is polynomial in the tangential
    /// coordinates only.
    void add(const TermKey& key, const Poly& q) {
        validate(key, q);
        if (q.is_zero()) return;
        if (key.site.kind == Site::Kind::Simplex) {
            if (!std::is_sorted(key.site.vertices.begin(), key.site.vertices.end(), vertex_less)) {
                add_reordered(key, q);
                return;
            }
            if (period_) {
                const Vec& v0 = key.site.vertices.front();
                Vec shift(n_);
                bool moved = false;
                for (int i = 0; i < n_; ++i) {
                    shift[i] = -Rat(floor_of(v0[i] / (*period_)[i])) * (*period_)[i];
                    if (shift[i] != 0) moved = true;
                }
                if (moved) {
                    TermKey k2 = key;
                    for (auto& v : k2.site.vertices) v = v + shift;
                    insert(std::move(k2), q);
                    return;
                }
            }
        }
        insert(key, q);
    }

    /// Adds c * delta^(alpha)(y) dy^I ^ q dz^J where q may also involve the
    /// transverse coordinates; factors y_i are absorbed with
    /// y_i delta^(alpha) = -alpha_i delta^(alpha - e_i).
    void add_raw(const Site& site, const MultiIndex& alpha, const FormIndex& I, const Poly& q_all, const FormIndex& J,
                 const Rat& c = 1) {
        const int m = site.transverse_dim();
        const int p = site.tangential_dim();
        if (static_cast<int>(q_all.nvars()) != m + p) throw Error("raw coefficient has wrong variable count");
        detail::PieceMap pieces;
        for (const auto& [mono, cq] : q_all.terms()) {
            MultiIndex eta(std::vector<int>(mono.e.begin(), mono.e.begin() + m));
            MultiIndex beta(std::vector<int>(mono.e.begin() + m, mono.e.end()));
            auto absorbed = detail::absorb_into_delta(alpha, eta);
            if (!absorbed) continue;
            detail::add_piece(pieces, absorbed->first, I, J, Poly::monomial(beta, c * cq * absorbed->second));
        }
        for (auto& [k, q] : pieces) add({site, std::get<0>(k), std::get<1>(k), std::get<2>(k)}, q);
    }

    Current& operator+=(const Current& o) {
        check(o);
        for (const auto& [k, q] : o.terms_) insert(k, q);
        return *this;
    }
    Current& operator-=(const Current& o) {
        check(o);
        for (const auto& [k, q] : o.terms_) insert(k, -q);
        return *this;
    }
    Current& operator*=(const Rat& s) {
        if (s == 0) terms_.clear();
        for (auto& [k, q] : terms_) q *= s;
        return *this;
    }
    friend Current operator+(Current a, const Current& b) { return a += b; }
    friend Current operator-(Current a, const Current& b) { return a -= b; }
    friend Current operator*(const Rat& s, Current a) { return a *= s; }
    friend Current operator-(Current a) { return a *= Rat(-1); }

    friend bool operator==(const Current& a, const Current& b) {
        return a.n_ == b.n_ && a.period_ == b.period_ && a.terms_ == b.terms_;
    }

    /// Same terms, no periodic identification (used for pairing against
    /// non-periodic test forms).
    Current without_period() const {
        Current c(n_);
        for (const auto& [k, q] : terms_) c.add(k, q);
        return c;
    }

    Current with_period(std::optional<Vec> period) const {
        Current c(n_, std::move(period));
        for (const auto& [k, q] : terms_) c.add(k, q);
        return c;
    }

private:
    void check(const Current& o) const {
        if (o.n_ != n_) throw Error("currents of different ambient dimension");
        if (o.period_ != period_) throw Error("currents with different periodicity");
    }

    void validate(const TermKey& key, const Poly& q) const {
        if (key.site.ambient_dim() != n_) throw Error("term site has wrong ambient dimension");
        const int m = key.site.transverse_dim();
        const int p = key.site.tangential_dim();
        if (static_cast<int>(key.alpha.size()) != m) throw Error("delta order has wrong length");
        for (int a : key.alpha.e)
            if (a < 0) throw Error("negative delta order");
        if (!key.I.valid(m) || !key.J.valid(p)) throw Error("form index outside its coordinate block");
        if (static_cast<int>(q.nvars()) != p) throw Error("tangential coefficient has wrong variable count");
    }

    void insert(const TermKey& key, const Poly& q) {
        if (q.is_zero()) return;
        auto it = terms_.find(key);
        if (it == terms_.end()) {
            terms_.emplace(key, q);
            return;
        }
        it->second += q;
        if (it->second.is_zero()) terms_.erase(it);
    }

    /// Vertices out of canonical order: move to the sorted vertex order,
    /// an affine symmetry of the standard simplex.
    void add_reordered(const TermKey& key, const Poly& q) {
        std::vector<Vec> sorted = key.site.vertices;
        std::sort(sorted.begin(), sorted.end(), vertex_less);
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw Error("degenerate simplex");
        Site target = Site::simplex(sorted);
        auto [jac, shift] = detail::relative_coordinates(key.site.frame(), target.frame());
        detail::Piece in{key.alpha, key.I, key.J, q};
        for (auto& [k, qq] : detail::change_coordinates(in, key.site.transverse_dim(), jac, shift, true))
            add({target, std::get<0>(k), std::get<1>(k), std::get<2>(k)}, qq);
    }

    int n_ = 0;
    std::optional<Vec> period_;
    Terms terms_;
};

/// Site in canonical vertex order, translated into the fundamental domain
/// when a period is given.
inline Site canonical_site(Site s, const std::optional<Vec>& period) {
    if (s.kind != Site::Kind::Simplex) return s;
    std::sort(s.vertices.begin(), s.vertices.end(), vertex_less);
    if (period) {
        Vec shift(s.vertices.front().size());
        for (std::size_t i = 0; i < shift.size(); ++i)
            shift[i] = -Rat(floor_of(s.vertices.front()[i] / (*period)[i])) * (*period)[i];
        for (auto& v : s.vertices) v = v + shift;
    }
    return s;
}

/// Canonical form: merges like terms, drops zeros, reorders simplex vertices,
/// reduces torus representatives. Idempotent.
inline Current normalize(const Current& u) {
    Current out(u.dim(), u.period());
    for (const auto& [k, q] : u.terms()) out.add(k, q);
    return out;
}

/// The basic current chi(S_p) delta(x_1)...delta(x_{n-p}) dx_1^...^dx_{n-p}.
inline Current make_D(int p, int n) {
    if (p < 0 || p > n) throw Error("make_D: need 0 <= p <= n");
    Current u(n);
    Site s = Site::model_simplex(p, n);
    u.add({s, MultiIndex(n - p), FormIndex::full(n - p), FormIndex{}}, Poly(p, 1));
    return u;
}

/// Delta-supported current of a simplex in its own canonical frame:
/// delta(y) dy_1^...^dy_m chi.
inline Current canonical_D(const Site& s, int n, std::optional<Vec> period = std::nullopt) {
    Current u(n, std::move(period));
    const int m = s.transverse_dim();
    u.add({s, MultiIndex(m), FormIndex::full(m), FormIndex{}}, Poly(s.tangential_dim(), 1));
    return u;
}

namespace detail {

/// Boundary part of d on one simplex-supported term: the derivative of the
/// cut-off, one term per facet, each moved into the facet's canonical frame.
inline void emit_facet_terms(const TermKey& key, const Poly& q, Current& out) {
    const Site& site = key.site;
    const int n = site.ambient_dim();
    const int m = site.transverse_dim();
    const int p = site.tangential_dim();
    const Frame frame = site.frame();
    const Matrix G = frame.map.A.block(0, m, n, p);
    const Matrix gram = G.transpose() * G;
    const Rat sign_I = key.I.size() % 2 == 0 ? 1 : -1;

    for (int r = 0; r <= p; ++r) {
        // facet opposite vertex r; l_r >= 0 on the simplex
        std::vector<Vec> corners;  // z-coordinates of the remaining vertices
        for (int v = 0; v <= p; ++v) {
            if (v == r) continue;
            Vec z(p);
            if (v > 0) z[v - 1] = 1;
            corners.push_back(std::move(z));
        }
        Vec grad(p);
        if (r == 0)
            for (auto& g : grad) g = -1;
        else
            grad[r - 1] = 1;

        Matrix facet_dirs(p, p - 1);  // z = corners[0] + facet_dirs * w
        for (int i = 1; i < p; ++i)
            for (int j = 0; j < p; ++j) facet_dirs(j, i - 1) = corners[i][j] - corners[0][j];

        // normal direction u inside the simplex's tangent space, orthogonal to
        // the facet in ambient coordinates, scaled so that l_r(s u) = s
        Matrix sys(p, p);
        Matrix rhs(p, 1);
        for (int i = 0; i < p - 1; ++i) {
            Vec row = gram * facet_dirs.column(i);
            for (int j = 0; j < p; ++j) sys(i, j) = row[j];
        }
        for (int j = 0; j < p; ++j) sys(p - 1, j) = grad[j];
        rhs(p - 1, 0) = 1;
        auto usol = solve_exact(sys, rhs);
        if (!usol) throw Error("internal: facet normal system is singular");
        Vec normal = usol->column(0);

        // q restricted to the facet, as a polynomial in w
        std::vector<Poly> images;
        for (int j = 0; j < p; ++j) {
            Poly img(p - 1, corners[0][j]);
            for (int i = 0; i < p - 1; ++i)
                if (facet_dirs(j, i) != 0) img.add_term(MultiIndex::unit(p - 1, i), facet_dirs(j, i));
            images.push_back(std::move(img));
        }
        Poly qf = q.compose(images, p - 1);
        if (qf.is_zero()) continue;

        // frame with coordinates (y, s, w)
        Matrix embed(n, n);
        for (int i = 0; i < m; ++i) embed(i, i) = 1;
        for (int j = 0; j < p; ++j) embed(m + j, m) = normal[j];
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < p - 1; ++i) embed(m + j, m + 1 + i) = facet_dirs(j, i);
        Vec origin(n);
        for (int j = 0; j < p; ++j) origin[m + j] = corners[0][j];
        Frame derived{{frame.map.A * embed, frame.map.A * origin + frame.map.b}, m + 1};

        // dz^J restricted to the facet, in dw
        std::vector<int> jrows;
        for (int j : key.J.idx) jrows.push_back(j - 1);
        for (auto& [cols, cf] : pull_back_form(facet_dirs, jrows)) {
            MultiIndex alpha(static_cast<std::size_t>(m + 1));
            for (int i = 0; i < m; ++i) alpha[i] = key.alpha[i];
            FormIndex I = key.I;
            I.idx.push_back(m + 1);
            FormIndex J;
            for (int c : cols) J.idx.push_back(c + 1);
            Piece piece{alpha, I, J, qf * (sign_I * cf)};

            std::vector<Vec> fverts;
            for (int v = 0; v <= p; ++v)
                if (v != r) fverts.push_back(site.vertices[v]);
            Site facet = Site::simplex(std::move(fverts));
            auto [jac, shift] = relative_coordinates(derived, facet.frame());
            for (auto& [k, qq] : change_coordinates(piece, m + 1, jac, shift, facet.has_cutoff()))
                out.add({facet, std::get<0>(k), std::get<1>(k), std::get<2>(k)}, qq);
        }
    }
}

}  // namespace detail

/// Distributional exterior derivative, fixed by <du, w> = (-1)^(k+1) <u, dw>.
inline Current d(const Current& u) {
    Current out(u.dim(), u.period());
    for (const auto& [key, q] : u.terms()) {
        const int m = key.site.transverse_dim();
        const int p = key.site.tangential_dim();
        // transverse: d_{y_i} delta^(alpha) dy_i ^ ...
        for (int i = 1; i <= m; ++i) {
            auto w = wedge(FormIndex{i}, key.I);
            if (w.sign == 0) continue;
            TermKey k2{key.site, key.alpha + MultiIndex::unit(m, i - 1), w.k, key.J};
            out.add(k2, q * Rat(w.sign));
        }
        // tangential: (-1)^|I| delta dy^I ^ dq ^ dz^J
        const Rat sign_I = key.I.size() % 2 == 0 ? 1 : -1;
        for (int j = 1; j <= p; ++j) {
            auto w = wedge(FormIndex{j}, key.J);
            if (w.sign == 0) continue;
            Poly dq = q.derivative(j - 1);
            if (dq.is_zero()) continue;
            out.add({key.site, key.alpha, key.I, w.k}, dq * (sign_I * w.sign));
        }
        if (key.site.has_cutoff()) detail::emit_facet_terms(key, q, out);
    }
    return out;
}

/// Interior product with the radial field x_i d/dx_i (ambient coordinate
/// i, 1-based, origin at 0).
inline Current contract_radial(const Current& u, int i) {
    const int n = u.dim();
    if (i < 1 || i > n) throw Error("contract_radial: coordinate out of range");
    Current out(n, u.period());
    for (const auto& [key, q] : u.terms()) {
        const Frame f = key.site.frame();
        const int m = key.site.transverse_dim();
        const int p = key.site.tangential_dim();
        Vec direction = inverse(f.map.A).column(i - 1);  // d/dx_i in model coordinates

        std::vector<int> s;
        for (int a : key.I.idx) s.push_back(a - 1);
        for (int b : key.J.idx) s.push_back(m + b - 1);

        for (std::size_t pos = 0; pos < s.size(); ++pos) {
            const Rat vc = direction[s[pos]];
            if (vc == 0) continue;
            const Rat sign = pos % 2 == 0 ? 1 : -1;
            FormIndex I2, J2;
            for (std::size_t t = 0; t < s.size(); ++t) {
                if (t == pos) continue;
                if (s[t] < m)
                    I2.idx.push_back(s[t] + 1);
                else
                    J2.idx.push_back(s[t] - m + 1);
            }
            // multiply by x_i = sum_k A_ik x'_k + b_i
            const Rat base = sign * vc;
            if (f.map.b[i - 1] != 0) out.add({key.site, key.alpha, I2, J2}, q * (base * f.map.b[i - 1]));
            for (int k = 0; k < m; ++k) {
                const Rat a = f.map.A(i - 1, k);
                if (a == 0 || key.alpha[k] == 0) continue;
                MultiIndex lowered = key.alpha;
                lowered[k] -= 1;
                out.add({key.site, lowered, I2, J2}, q * (base * a * Rat(-key.alpha[k])));
            }
            for (int k = 0; k < p; ++k) {
                const Rat a = f.map.A(i - 1, m + k);
                if (a == 0) continue;
                out.add({key.site, key.alpha, I2, J2}, (q * Poly::variable(p, k)) * (base * a));
            }
        }
    }
    return out;
}

/// Degree vector of one monomial term in its model coordinates:
/// transverse [i in I] - 1 - alpha_i, tangential beta_j + [j in J].
inline std::vector<int> term_degrees(const TermKey& key, const MultiIndex& beta) {
    const int m = key.site.transverse_dim();
    const int p = key.site.tangential_dim();
    std::vector<int> a(m + p);
    for (int i = 0; i < m; ++i) a[i] = (key.I.contains(i + 1) ? 1 : 0) - 1 - key.alpha[i];
    for (int j = 0; j < p; ++j) a[m + j] = beta[j] + (key.J.contains(j + 1) ? 1 : 0);
    return a;
}

/// Splits u into multi-homogeneous components keyed by degree vector.
inline std::map<std::vector<int>, Current> homogeneity_decompose(const Current& u) {
    std::map<std::vector<int>, Current> out;
    for (const auto& [key, q] : u.terms()) {
        for (const auto& [beta, c] : q.terms()) {
            auto a = term_degrees(key, beta);
            auto it = out.try_emplace(a, u.dim(), u.period()).first;
            it->second.add(key, Poly::monomial(beta, c));
        }
    }
    return out;
}

/// Same, but grading only by the transverse degrees (tangential monomials
/// are kept together).
inline std::map<std::vector<int>, Current> transverse_decompose(const Current& u) {
    std::map<std::vector<int>, Current> out;
    for (const auto& [key, q] : u.terms()) {
        const int m = key.site.transverse_dim();
        std::vector<int> a(m);
        for (int i = 0; i < m; ++i) a[i] = (key.I.contains(i + 1) ? 1 : 0) - 1 - key.alpha[i];
        auto it = out.try_emplace(a, u.dim(), u.period()).first;
        it->second.add(key, q);
    }
    return out;
}

/// Pushforward by an invertible affine map of R^n.
inline Current affine_transform(const Current& u, const AffineMap& phi) {
    const int n = u.dim();
    if (static_cast<int>(phi.A.rows()) != n || static_cast<int>(phi.A.cols()) != n ||
        static_cast<int>(phi.b.size()) != n)
        throw Error("affine_transform: dimension mismatch");
    if (det(phi.A) == 0) throw Error("affine_transform: singular map");
    if (u.period() && phi.A != Matrix::identity(n))
        throw Error("affine_transform: a periodic current can only be translated");
    Current out(n, u.period());
    for (const auto& [key, q] : u.terms()) {
        const Frame f = key.site.frame();
        Frame pushed{phi.compose(f.map), f.split};
        if (key.site.kind == Site::Kind::Plane) {
            out.add({Site::plane_site(pushed), key.alpha, key.I, key.J}, q);
            continue;
        }
        std::vector<Vec> verts;
        for (const auto& v : key.site.vertices) verts.push_back(phi.apply(v));
        Site image = Site::simplex(std::move(verts));
        auto [jac, shift] = detail::relative_coordinates(pushed, image.frame());
        detail::Piece in{key.alpha, key.I, key.J, q};
        for (auto& [k, qq] : detail::change_coordinates(in, f.split, jac, shift, image.has_cutoff()))
            out.add({image, std::get<0>(k), std::get<1>(k), std::get<2>(k)}, qq);
    }
    return out;
}

inline Current affine_transform(const Current& u, const Frame& phi) { return affine_transform(u, phi.map); }

/// True iff `tau` is a face of `sigma` (possibly sigma itself), allowing a
/// lattice translation when a period is given.
inline bool is_face_of(const Site& tau, const Site& sigma, const std::optional<Vec>& period) {
    if (tau.kind != Site::Kind::Simplex || sigma.kind != Site::Kind::Simplex) return tau == sigma;
    auto contains = [&](const Vec& shift) {
        for (const auto& v : tau.vertices) {
            Vec w = v + shift;
            if (std::find(sigma.vertices.begin(), sigma.vertices.end(), w) == sigma.vertices.end()) return false;
        }
        return true;
    };
    for (const auto& sv : sigma.vertices) {
        Vec shift = sv - tau.vertices.front();
        if (period) {
            bool lattice = true;
            for (std::size_t i = 0; i < shift.size(); ++i)
                if (!is_integer(shift[i] / (*period)[i])) lattice = false;
            if (!lattice) continue;
        } else if (shift != Vec(shift.size())) {
            continue;
        }
        if (contains(shift)) return true;
    }
    return false;
}

}  // namespace derham
