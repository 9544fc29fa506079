#pragma once

#include <map>
#include <vector>

#include "algebra.hpp"
#include "current.hpp"

namespace derham {

/// Polynomial differential k-form on R^n (a smooth test form).
class PolyForm {
public:
    PolyForm() = default;
    PolyForm(int n, int k) : n_(n), k_(k) {
        if (k < 0 || k > n) throw Error("form degree out of range");
    }

    int dim() const { return n_; }
    int degree() const { return k_; }
    const std::map<FormIndex, Poly>& components() const { return comps_; }

    void add(const FormIndex& K, const Poly& f) {
        if (static_cast<int>(K.size()) != k_ || !K.valid(n_)) throw Error("form index does not match form degree");
        if (static_cast<int>(f.nvars()) != n_) throw Error("form coefficient has wrong variable count");
        if (f.is_zero()) return;
        auto [it, inserted] = comps_.emplace(K, f);
        if (!inserted) {
            it->second += f;
            if (it->second.is_zero()) comps_.erase(it);
        }
    }

    PolyForm& operator+=(const PolyForm& o) {
        for (const auto& [K, f] : o.comps_) add(K, f);
        return *this;
    }
    PolyForm& operator*=(const Rat& s) {
        if (s == 0) comps_.clear();
        for (auto& [K, f] : comps_) f *= s;
        return *this;
    }

    PolyForm d() const {
        if (k_ == n_) return PolyForm(n_, n_);
        PolyForm out(n_, k_ + 1);
        for (const auto& [K, f] : comps_)
            for (int i = 1; i <= n_; ++i) {
                auto w = wedge(FormIndex{i}, K);
                if (w.sign == 0) continue;
                Poly df = f.derivative(i - 1);
                if (!df.is_zero()) out.add(w.k, df * Rat(w.sign));
            }
        return out;
    }

    friend bool operator==(const PolyForm&, const PolyForm&) = default;

private:
    int n_ = 0;
    int k_ = 0;
    std::map<FormIndex, Poly> comps_;
};

namespace detail {

inline Poly affine_pullback(const Poly& f, const AffineMap& map) {
    const std::size_t n = map.A.rows();
    const std::size_t cols = map.A.cols();
    std::vector<Poly> images;
    for (std::size_t i = 0; i < n; ++i) {
        Poly img(cols, map.b[i]);
        for (std::size_t j = 0; j < cols; ++j)
            if (map.A(i, j) != 0) img.add_term(MultiIndex::unit(cols, j), map.A(i, j));
        images.push_back(std::move(img));
    }
    return f.compose(images, cols);
}

}  // namespace detail

/// <T, w> = integral of T ^ w over R^n. For a periodic current this pairs the
/// stored representatives, which is the torus pairing whenever w is periodic.
inline Rat pair(const Current& T, const PolyForm& w) {
    const int n = T.dim();
    if (w.dim() != n) throw Error("pair: dimension mismatch");
    Rat total = 0;
    for (const auto& [key, q] : T.terms()) {
        if (key.form_degree() + w.degree() != n) throw Error("pair: degrees do not add up to the dimension");
        const int m = key.site.transverse_dim();
        const int p = key.site.tangential_dim();
        if (key.site.kind == Site::Kind::Plane && p > 0) throw Error("pair: term with non-compact support");
        const Frame f = key.site.frame();
        const Rat orient = det(f.map.A) > 0 ? 1 : -1;

        FormIndex s;
        for (int a : key.I.idx) s.idx.push_back(a);
        for (int b : key.J.idx) s.idx.push_back(m + b);

        Poly integrand(n);  // coefficient of dx'_1..dx'_n in T's frame, without delta/q
        for (const auto& [K, coeff] : w.components()) {
            std::vector<int> rows;
            for (int k : K.idx) rows.push_back(k - 1);
            Poly g = detail::affine_pullback(coeff, f.map);
            for (const auto& [cols, minor] : detail::pull_back_form(f.map.A, rows)) {
                FormIndex t;
                for (int c : cols) t.idx.push_back(c + 1);
                auto wd = wedge(s, t);
                if (wd.sign == 0) continue;
                integrand += g * (minor * wd.sign);
            }
        }
        // <delta^(alpha)(y), g> = (-1)^|alpha| d^alpha g (0)
        Poly tangential(p);
        Int alpha_fact = 1;
        for (int a : key.alpha.e) alpha_fact *= factorial(a);
        for (const auto& [mono, c] : integrand.terms()) {
            bool match = true;
            for (int i = 0; i < m; ++i)
                if (mono[i] != key.alpha[i]) match = false;
            if (!match) continue;
            tangential.add_term(MultiIndex(std::vector<int>(mono.e.begin() + m, mono.e.end())), c * Rat(alpha_fact));
        }
        Rat value = simplex_integral(tangential * q);
        if (key.alpha.order() % 2 == 1) value = -value;
        total += orient * value;
    }
    return total;
}

/// Checks <dT, w> = (-1)^(k+1) <T, dw> exactly.
inline bool stokes_check(const Current& T, const PolyForm& w) {
    const int n = T.dim();
    const int k = n - 1 - w.degree();
    if (auto deg = T.degree(); deg && *deg != k) throw Error("stokes_check: degree mismatch");
    if (k < 0) throw Error("stokes_check: degree mismatch");
    Current local = T.without_period();
    Rat lhs = pair(d(local), w);
    Rat rhs = pair(local, w.d());
    if (k % 2 == 0) rhs = -rhs;
    return lhs == rhs;
}

/// Integral of a p-form over the oriented simplex with the given ordered
/// vertices, by direct parametrization z -> v_0 + sum z_i (v_i - v_0).
inline Rat integrate_over_simplex(const std::vector<Vec>& vertices, const PolyForm& w) {
    const int n = w.dim();
    const int p = static_cast<int>(vertices.size()) - 1;
    if (w.degree() != p) throw Error("integrate_over_simplex: degree mismatch");
    Matrix G(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) G(i, j) = vertices[j + 1][i] - vertices[0][i];
    AffineMap param{G, vertices[0]};
    Poly density(p);
    for (const auto& [K, coeff] : w.components()) {
        Matrix minor(p, p);
        for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b) minor(a, b) = G(K.idx[a] - 1, b);
        Rat jac = p == 0 ? Rat(1) : det(minor);
        if (jac != 0) density += detail::affine_pullback(coeff, param) * jac;
    }
    return simplex_integral(density);
}

}  // namespace derham
