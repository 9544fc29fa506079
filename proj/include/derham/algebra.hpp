#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "linalg.hpp"
#include "rational.hpp"

namespace derham {

/// Exponent vector of fixed length; used both for monomials and for orders
/// of Dirac delta derivatives.
struct MultiIndex {
    std::vector<int> e;

    MultiIndex() = default;
    explicit MultiIndex(std::size_t n) : e(n, 0) {}
    MultiIndex(std::initializer_list<int> l) : e(l) {}
    explicit MultiIndex(std::vector<int> v) : e(std::move(v)) {}

    std::size_t size() const { return e.size(); }
    int order() const {
        int s = 0;
        for (int x : e) s += x;
        return s;
    }
    int operator[](std::size_t i) const { return e[i]; }
    int& operator[](std::size_t i) { return e[i]; }

    static MultiIndex unit(std::size_t n, std::size_t i) {
        MultiIndex m(n);
        m.e[i] = 1;
        return m;
    }

    friend MultiIndex operator+(MultiIndex a, const MultiIndex& b) {
        for (std::size_t i = 0; i < a.size(); ++i) a.e[i] += b.e[i];
        return a;
    }

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
    friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

/// Graded lexicographic order, highest total degree first; this is the
/// canonical iteration and printing order of Poly.
struct GrLex {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const {
        int da = a.order(), db = b.order();
        if (da != db) return da > db;
        return a.e > b.e;
    }
};

/// Strictly increasing list of 1-based coordinate indices, i.e. dx^I.
struct FormIndex {
    std::vector<int> idx;

    FormIndex() = default;
    FormIndex(std::initializer_list<int> l) : idx(l) {}
    explicit FormIndex(std::vector<int> v) : idx(std::move(v)) {}

    std::size_t size() const { return idx.size(); }
    bool empty() const { return idx.empty(); }
    bool contains(int i) const { return std::binary_search(idx.begin(), idx.end(), i); }

    bool valid(int dim) const {
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (idx[k] < 1 || idx[k] > dim) return false;
            if (k > 0 && idx[k - 1] >= idx[k]) return false;
        }
        return true;
    }

    static FormIndex full(int dim) {
        FormIndex f;
        for (int i = 1; i <= dim; ++i) f.idx.push_back(i);
        return f;
    }

    friend bool operator==(const FormIndex&, const FormIndex&) = default;
    friend auto operator<=>(const FormIndex&, const FormIndex&) = default;
};

struct WedgeResult {
    int sign = 0;
    FormIndex k;
};

/// dx^I ^ dx^J = sign * dx^K.
inline WedgeResult wedge(const FormIndex& a, const FormIndex& b) {
    std::vector<int> merged;
    merged.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    int inversions = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a.idx[i] < b.idx[j])) {
            merged.push_back(a.idx[i++]);
        } else if (i == a.size() || b.idx[j] < a.idx[i]) {
            inversions += static_cast<int>(a.size() - i);
            merged.push_back(b.idx[j++]);
        } else {
            return {0, {}};
        }
    }
    return {inversions % 2 == 0 ? 1 : -1, FormIndex(std::move(merged))};
}

/// Checked variant: both indices must be valid over `dim` coordinates.
inline WedgeResult wedge(const FormIndex& a, const FormIndex& b, int dim) {
    if (!a.valid(dim) || !b.valid(dim)) throw Error("wedge: form index outside dimension " + std::to_string(dim));
    return wedge(a, b);
}

/// Sparse multivariate polynomial with rational coefficients in a fixed
/// number of variables. No zero coefficient is ever stored.
class Poly {
public:
    using Terms = std::map<MultiIndex, Rat, GrLex>;

    Poly() = default;
    explicit Poly(std::size_t nvars) : nvars_(nvars) {}
    Poly(std::size_t nvars, const Rat& c) : nvars_(nvars) {
        if (c != 0) terms_.emplace(MultiIndex(nvars), c);
    }

    static Poly monomial(const MultiIndex& m, const Rat& c) {
        Poly p(m.size());
        if (c != 0) p.terms_.emplace(m, c);
        return p;
    }
    /// The coordinate function x_var (0-based).
    static Poly variable(std::size_t nvars, std::size_t var) {
        return monomial(MultiIndex::unit(nvars, var), 1);
    }

    std::size_t nvars() const { return nvars_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.order() == 0); }
    Rat constant_term() const {
        auto it = terms_.find(MultiIndex(nvars_));
        return it == terms_.end() ? Rat(0) : it->second;
    }
    int degree() const { return terms_.empty() ? -1 : terms_.begin()->first.order(); }

    void add_term(const MultiIndex& m, const Rat& c) {
        if (c == 0) return;
        auto [it, inserted] = terms_.emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Poly& operator+=(const Poly& o) {
        check(o);
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        check(o);
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    Poly& operator*=(const Rat& s) {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [m, c] : terms_) c *= s;
        return *this;
    }
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator-(Poly a) { return a *= Rat(-1); }
    friend Poly operator*(Poly a, const Rat& s) { return a *= s; }
    friend Poly operator*(const Rat& s, Poly a) { return a *= s; }
    friend Poly operator*(const Poly& a, const Poly& b) {
        a.check(b);
        Poly r(a.nvars_);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) r.add_term(ma + mb, ca * cb);
        return r;
    }

    Poly pow(int k) const {
        Poly r(nvars_, 1);
        for (int i = 0; i < k; ++i) r = r * *this;
        return r;
    }

    /// d/dx_var (0-based).
    Poly derivative(std::size_t var) const {
        Poly r(nvars_);
        for (const auto& [m, c] : terms_) {
            if (m[var] == 0) continue;
            MultiIndex d = m;
            d[var] -= 1;
            r.add_term(d, c * m[var]);
        }
        return r;
    }

    /// Antiderivative in x_var (0-based) vanishing on x_var = 0.
    Poly antiderivative(std::size_t var) const {
        Poly r(nvars_);
        for (const auto& [m, c] : terms_) {
            MultiIndex d = m;
            d[var] += 1;
            r.add_term(d, c / d[var]);
        }
        return r;
    }

    Rat evaluate(const Vec& x) const {
        if (x.size() != nvars_) throw Error("poly evaluate: dimension mismatch");
        Rat s = 0;
        for (const auto& [m, c] : terms_) {
            Rat t = c;
            for (std::size_t i = 0; i < nvars_; ++i)
                for (int k = 0; k < m[i]; ++k) t *= x[i];
            s += t;
        }
        return s;
    }

    /// Substitutes x_i -> images[i]; all images share a variable count.
    Poly compose(const std::vector<Poly>& images, std::size_t out_vars) const {
        if (images.size() != nvars_) throw Error("poly compose: wrong number of images");
        std::vector<std::vector<Poly>> powers(nvars_);
        Poly r(out_vars);
        for (const auto& [m, c] : terms_) {
            Poly t(out_vars, c);
            for (std::size_t i = 0; i < nvars_; ++i) {
                if (m[i] == 0) continue;
                auto& pw = powers[i];
                if (pw.empty()) pw.push_back(Poly(out_vars, 1));
                while (static_cast<int>(pw.size()) <= m[i]) pw.push_back(pw.back() * images[i]);
                t = t * pw[m[i]];
            }
            r += t;
        }
        return r;
    }

    /// Re-embeds into `out_vars` variables: old variable i becomes new
    /// variable placement[i].
    Poly embed(std::size_t out_vars, const std::vector<std::size_t>& placement) const {
        Poly r(out_vars);
        for (const auto& [m, c] : terms_) {
            MultiIndex e(out_vars);
            for (std::size_t i = 0; i < nvars_; ++i) e[placement[i]] += m[i];
            r.add_term(e, c);
        }
        return r;
    }

    friend bool operator==(const Poly& a, const Poly& b) { return a.nvars_ == b.nvars_ && a.terms_ == b.terms_; }

    /// Renders in graded-lex order with variables named prefix1, prefix2, ...
    std::string to_string(const std::string& prefix = "z") const {
        return to_string([&](std::size_t i) { return prefix + std::to_string(i + 1); });
    }

    std::string to_string(const char* prefix) const {
        const std::string pre(prefix);
        return to_string([&](std::size_t i) { return pre + std::to_string(i + 1); });
    }

    template <class Namer>
    std::string to_string(Namer&& name) const {
        if (terms_.empty()) return "0";
        std::string out;
        bool first = true;
        for (const auto& [m, c] : terms_) {
            Rat a = c;
            if (first) {
                if (a < 0) {
                    out += "-";
                    a = -a;
                }
            } else {
                out += a < 0 ? " - " : " + ";
                if (a < 0) a = -a;
            }
            first = false;
            std::string mono;
            for (std::size_t i = 0; i < nvars_; ++i) {
                if (m[i] == 0) continue;
                if (!mono.empty()) mono += "*";
                mono += name(i);
                if (m[i] > 1) mono += "^" + std::to_string(m[i]);
            }
            if (mono.empty())
                out += derham::to_string(a);
            else if (a == 1)
                out += mono;
            else
                out += derham::to_string(a) + "*" + mono;
        }
        return out;
    }

private:
    void check(const Poly& o) const {
        if (o.nvars_ != nvars_) throw Error("polynomial variable count mismatch");
    }

    std::size_t nvars_ = 0;
    Terms terms_;
};

/// Antiderivative in coordinate i (1-based) with base point z_i = 0.
inline Poly poly_antiderivative(const Poly& q, int i) {
    if (i < 1 || static_cast<std::size_t>(i) > q.nvars()) throw Error("poly_antiderivative: coordinate out of range");
    return q.antiderivative(static_cast<std::size_t>(i - 1));
}

/// Returns w -> q(A w + b), expanded.
inline Poly poly_affine_substitute(const Poly& q, const Matrix& a, const Vec& b) {
    const std::size_t n = q.nvars();
    if (a.rows() != n || a.cols() != n || b.size() != n) throw Error("poly_affine_substitute: dimension mismatch");
    if (det(a) == 0) throw Error("poly_affine_substitute: singular matrix");
    std::vector<Poly> images;
    images.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Poly li(n, b[i]);
        for (std::size_t j = 0; j < n; ++j)
            if (a(i, j) != 0) li.add_term(MultiIndex::unit(n, j), a(i, j));
        images.push_back(std::move(li));
    }
    return q.compose(images, n);
}

/// Exact integral of z^beta over {z >= 0, sum z <= 1} in R^p:
/// prod(beta_i!) / (|beta| + p)!.
inline Rat monomial_simplex_integral(const MultiIndex& beta, int p) {
    if (static_cast<int>(beta.size()) != p) throw Error("monomial_simplex_integral: length mismatch");
    Int num = 1;
    for (int b : beta.e) num *= factorial(b);
    return Rat(num, factorial(beta.order() + p));
}

/// Integral of a polynomial over the standard simplex of its own dimension.
inline Rat simplex_integral(const Poly& q) {
    Rat s = 0;
    for (const auto& [m, c] : q.terms()) s += c * monomial_simplex_integral(m, static_cast<int>(q.nvars()));
    return s;
}

}  // namespace derham
