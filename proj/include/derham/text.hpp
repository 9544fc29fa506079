#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "current.hpp"
#include "pairing.hpp"

namespace derham {

class SyntaxError : public Error {
public:
    SyntaxError(int line, int column, const std::string& what)
        : Error("syntax error at line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// What a current expression may refer to besides its own directives.
struct ParseContext {
    std::optional<int> dim;
    std::optional<Vec> period;
    std::map<std::string, Site> named;  // targets of simplex(<name>)
};

namespace detail {

/// Cursor over one line of input.
class Cursor {
public:
    Cursor(std::string_view text, int line, int col0) : s_(text), line_(line), col0_(col0) {}

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool done() {
        skip_ws();
        return pos_ >= s_.size();
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    bool starts_with(std::string_view t) {
        skip_ws();
        return s_.substr(pos_).substr(0, t.size()) == t;
    }
    bool accept(std::string_view t) {
        if (!starts_with(t)) return false;
        pos_ += t.size();
        return true;
    }
    void expect(std::string_view t) {
        if (!accept(t)) fail("expected '" + std::string(t) + "'");
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw SyntaxError(line_, col0_ + static_cast<int>(pos_) + 1, what);
    }
    int column() const { return col0_ + static_cast<int>(pos_) + 1; }
    std::size_t pos() const { return pos_; }
    void seek(std::size_t p) { pos_ = p; }
    std::string_view rest() const { return s_.substr(pos_); }
    int line() const { return line_; }

    int parse_int() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
        std::size_t digits = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == digits) {
            pos_ = start;
            fail("expected an integer");
        }
        return std::stoi(std::string(s_.substr(start, pos_ - start)));
    }

    Rat parse_rat() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
        std::size_t digits = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == digits) {
            pos_ = start;
            fail("expected a rational number");
        }
        if (pos_ + 1 < s_.size() && s_[pos_] == '/' && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
            ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
        try {
            return parse_rat_text(s_.substr(start, pos_ - start));
        } catch (const Error& e) {
            pos_ = start;
            fail(e.what());
        }
    }

    std::string parse_word() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        if (pos_ == start) fail("expected a name");
        return std::string(s_.substr(start, pos_ - start));
    }

    std::vector<int> parse_int_list(char close) {
        std::vector<int> out;
        if (peek() == close) return out;
        out.push_back(parse_int());
        while (accept(",")) out.push_back(parse_int());
        return out;
    }

    Vec parse_vector() {
        expect("(");
        Vec v;
        if (!accept(")")) {
            v.push_back(parse_rat());
            while (accept(",")) v.push_back(parse_rat());
            expect(")");
        }
        return v;
    }

    /// Offset of the parenthesis matching the one at the cursor.
    std::size_t matching_paren() {
        skip_ws();
        int depth = 0;
        for (std::size_t i = pos_; i < s_.size(); ++i) {
            if (s_[i] == '(') ++depth;
            if (s_[i] == ')' && --depth == 0) return i;
        }
        fail("unbalanced parenthesis");
    }

private:
    static Rat parse_rat_text(std::string_view t) { return derham::parse_rat(t); }

    std::string_view s_;
    std::size_t pos_ = 0;
    int line_;
    int col0_;
};

/// Recursive descent over + - * ^ and parentheses with named variables.
class PolyParser {
public:
    PolyParser(Cursor& c, const std::vector<std::string>& names) : c_(c), names_(names) {}

    Poly expr() {
        Poly acc(names_.size());
        bool negate = false;
        if (c_.accept("-"))
            negate = true;
        else
            c_.accept("+");
        Poly t = term();
        acc = negate ? acc - t : acc + t;
        for (;;) {
            if (c_.accept("+"))
                acc = acc + term();
            else if (c_.peek() == '-') {
                c_.accept("-");
                acc = acc - term();
            } else
                return acc;
        }
    }

private:
    Poly term() {
        Poly acc = factor();
        while (c_.accept("*")) acc = acc * factor();
        return acc;
    }
    Poly factor() {
        Poly base = atom();
        if (c_.accept("^")) {
            int e = c_.parse_int();
            if (e < 0) c_.fail("negative exponent");
            base = base.pow(e);
        }
        return base;
    }
    Poly atom() {
        const char ch = c_.peek();
        if (ch == '(') {
            c_.accept("(");
            Poly p = expr();
            c_.expect(")");
            return p;
        }
        if (std::isdigit(static_cast<unsigned char>(ch))) return Poly(names_.size(), c_.parse_rat());
        if (ch == '-') {
            c_.accept("-");
            return atom() * Rat(-1);
        }
        const std::size_t at = c_.pos();
        std::string w = c_.parse_word();
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == w) return Poly::variable(names_.size(), i);
        c_.seek(at);
        c_.fail("unknown variable '" + w + "'");
    }

    Cursor& c_;
    const std::vector<std::string>& names_;
};

inline std::vector<std::string> coordinate_names(int m, int p) {
    std::vector<std::string> names;
    for (int i = 1; i <= m; ++i) names.push_back("y" + std::to_string(i));
    for (int i = 1; i <= p; ++i) names.push_back("z" + std::to_string(i));
    return names;
}

/// Splits into lines, strips `#` comments, and hands (line number, column
/// offset, content) to the callback for every non-blank line.
template <class F>
void for_each_line(std::string_view text, F&& f) {
    int line = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++line;
        std::string_view content = text.substr(start, end - start);
        if (auto hash = content.find('#'); hash != std::string_view::npos) content = content.substr(0, hash);
        bool blank = true;
        for (char ch : content)
            if (!std::isspace(static_cast<unsigned char>(ch))) blank = false;
        if (!blank) f(line, content);
        if (end == text.size()) break;
        start = end + 1;
    }
}

inline Site parse_site(Cursor& c, std::optional<int>& dim, const ParseContext& ctx) {
    auto need_dim = [&]() {
        if (!dim) c.fail("dimension unknown; add a 'dim n' line");
        return *dim;
    };
    auto set_dim = [&](int n) {
        if (dim && *dim != n) c.fail("dimension inconsistency: " + std::to_string(n) + " vs " + std::to_string(*dim));
        dim = n;
    };
    if (c.accept("point")) {
        if (c.peek() == '[') {
            c.expect("[");
            Vec v = c.parse_vector();
            c.expect("]");
            set_dim(static_cast<int>(v.size()));
            return Site::simplex({v});
        }
        return Site::point(need_dim());
    }
    if (c.accept("chart")) {
        c.expect("(");
        int n = c.parse_int();
        c.expect(")");
        if (n < 1) c.fail("chart dimension must be positive");
        set_dim(n);
        return Site::chart(n);
    }
    if (c.accept("simplex")) {
        if (c.accept("[")) {
            std::vector<Vec> verts{c.parse_vector()};
            while (c.accept(";")) verts.push_back(c.parse_vector());
            c.expect("]");
            set_dim(static_cast<int>(verts.front().size()));
            try {
                Site s = Site::simplex(verts);
                s.frame();
                return s;
            } catch (const SyntaxError&) {
                throw;
            } catch (const Error& e) {
                c.fail(e.what());
            }
        }
        c.expect("(");
        const std::size_t at = c.pos();
        std::string name = c.parse_word();
        c.expect(")");
        if (auto it = ctx.named.find(name); it != ctx.named.end()) {
            set_dim(it->second.ambient_dim());
            return it->second;
        }
        if (name.size() > 1 && name[0] == 'S' && name.find_first_not_of("0123456789", 1) == std::string::npos) {
            const int p = std::stoi(name.substr(1));
            const int n = need_dim();
            if (p > n) c.fail("model simplex dimension exceeds ambient dimension");
            return Site::model_simplex(p, n);
        }
        c.seek(at);
        c.fail("unknown simplex '" + name + "'");
    }
    if (c.accept("plane")) {
        c.expect("[");
        int split = c.parse_int();
        c.expect(";");
        Vec b = c.parse_vector();
        const int n = static_cast<int>(b.size());
        Matrix A(n, n);
        for (int i = 0; i < n; ++i) {
            c.expect(";");
            Vec row = c.parse_vector();
            if (static_cast<int>(row.size()) != n) c.fail("plane matrix row has wrong length");
            for (int j = 0; j < n; ++j) A(i, j) = row[j];
        }
        c.expect("]");
        set_dim(n);
        if (split < 0 || split > n) c.fail("plane split out of range");
        if (det(A) == 0) c.fail("singular plane frame");
        return Site::plane_site(Frame{{A, b}, split});
    }
    c.fail("expected a site: point, chart(n), simplex(...) or plane[...]");
}

inline void parse_term(Cursor& c, Current& out, std::optional<int>& dim, const ParseContext& ctx) {
    // the site comes last but decides the coordinate names, so read it first
    const std::string_view rest = c.rest();
    const std::size_t at = rest.rfind('@');
    if (at == std::string_view::npos) c.fail("expected '@ site'");
    const std::size_t base = c.pos();
    c.seek(base + at + 1);
    Site site = parse_site(c, dim, ctx);
    bool chi = false;
    if (c.accept("::")) {
        const std::size_t w = c.pos();
        if (c.parse_word() != "chi") {
            c.seek(w);
            c.fail("expected 'chi'");
        }
        chi = true;
    }
    if (!c.done()) c.fail("unexpected text after site");
    if (chi && !site.has_cutoff()) c.fail("':: chi' on a site without cut-off");
    const std::size_t end = base + at;
    c.seek(base);

    const int m = site.transverse_dim();
    const int p = site.tangential_dim();
    const auto names = coordinate_names(m, p);
    Rat coeff = c.parse_rat();
    c.expect("*");
    MultiIndex alpha(static_cast<std::size_t>(m));
    std::vector<bool> seen(m, false);
    Poly q(m + p, 1);
    bool have_poly = false, have_dy = false, have_dz = false;
    FormIndex I, J;
    auto parse_index = [&](int limit) {
        c.expect("{");
        const std::size_t where = c.pos();
        auto idx = c.parse_int_list('}');
        c.expect("}");
        std::vector<int> sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < idx.size(); ++i)
            if (idx[i] < 1 || idx[i] > limit || (i > 0 && sorted[i] == sorted[i - 1])) {
                c.seek(where);
                c.fail("bad form index");
            }
        return idx;
    };
    auto to_form = [](const std::vector<int>& idx, Rat& sign) {
        FormIndex f;
        for (int i : idx) {
            auto w = wedge(f, FormIndex{i});
            sign *= w.sign;
            f = w.k;
        }
        return f;
    };
    while (c.pos() < end) {
        c.skip_ws();
        if (c.pos() >= end) break;
        if (c.starts_with("d[")) {
            c.expect("d[");
            auto orders = c.parse_int_list(']');
            c.expect("]");
            c.expect("(");
            std::vector<int> coords;
            do {
                const std::size_t w = c.pos();
                std::string v = c.parse_word();
                if (v.size() < 2 || v[0] != 'y' || v.find_first_not_of("0123456789", 1) != std::string::npos) {
                    c.seek(w);
                    c.fail("delta argument must be a transverse coordinate y<i>");
                }
                const int i = std::stoi(v.substr(1));
                if (i < 1 || i > m || seen[i - 1]) {
                    c.seek(w);
                    c.fail("bad or repeated delta coordinate '" + v + "'");
                }
                seen[i - 1] = true;
                coords.push_back(i);
            } while (c.accept(","));
            c.expect(")");
            if (orders.size() != coords.size()) c.fail("delta orders and coordinates differ in number");
            for (std::size_t k = 0; k < orders.size(); ++k) {
                if (orders[k] < 0) c.fail("negative delta order");
                alpha[coords[k] - 1] = orders[k];
            }
        } else if (c.peek() == '(') {
            if (have_poly) c.fail("second polynomial factor");
            const std::size_t close = c.matching_paren();
            c.expect("(");
            PolyParser pp(c, names);
            q = pp.expr();
            c.skip_ws();
            if (c.pos() != close) c.fail("unexpected text in polynomial");
            c.expect(")");
            have_poly = true;
        } else if (c.starts_with("dy")) {
            if (have_dy || have_dz) c.fail("dy{...} must come once, before dz{...}");
            c.expect("dy");
            auto idx = parse_index(m);
            I = to_form(idx, coeff);
            have_dy = true;
        } else if (c.starts_with("dz")) {
            if (have_dz) c.fail("second dz{...}");
            c.expect("dz");
            auto idx = parse_index(p);
            J = to_form(idx, coeff);
            have_dz = true;
        } else {
            c.fail("expected d[..](..), (polynomial), dy{..} or dz{..}");
        }
    }
    if (static_cast<int>(site.ambient_dim()) != *dim) c.fail("dimension inconsistency");
    out.add_raw(site, alpha, I, q, J, coeff);
}

}  // namespace detail

/// Parses newline-separated terms, `dim n` and `period k[,k...]` directives
/// and `#` comments into a normalized current.
inline Current parse_current(std::string_view text, const ParseContext& ctx = {}) {
    std::optional<int> dim = ctx.dim;
    std::optional<Vec> period = ctx.period;
    struct Pending {
        int line;
        std::string_view content;
    };
    std::vector<Pending> terms;
    detail::for_each_line(text, [&](int line, std::string_view content) {
        detail::Cursor c(content, line, 0);
        if (c.starts_with("dim ") || c.starts_with("dim\t")) {
            c.accept("dim");
            int n = c.parse_int();
            if (n < 1) c.fail("dimension must be positive");
            if (dim && *dim != n) c.fail("dimension inconsistency");
            if (!c.done()) c.fail("unexpected text after dim");
            dim = n;
        } else if (c.starts_with("period")) {
            c.accept("period");
            Vec per{c.parse_rat()};
            while (c.accept(",")) per.push_back(c.parse_rat());
            if (!c.done()) c.fail("unexpected text after period");
            for (const auto& x : per)
                if (x <= 0) c.fail("period must be positive");
            period = per;
        } else {
            terms.push_back({line, content});
        }
    });
    // the dimension may also come from the first explicit site
    std::optional<Current> out;
    for (const auto& t : terms) {
        detail::Cursor c(t.content, t.line, 0);
        if (!dim) {
            Current scratch(1);
            std::optional<int> probe;
            try {
                detail::parse_term(c, scratch, probe, ctx);
            } catch (const Error&) {
                if (!probe) throw;
            }
            dim = probe;
            c.seek(0);
        }
        if (!out) {
            if (period && period->size() == 1 && *dim > 1) period = Vec(*dim, period->front());
            if (period && static_cast<int>(period->size()) != *dim)
                throw SyntaxError(t.line, 1, "period does not match the dimension");
            out.emplace(*dim, period);
        }
        detail::parse_term(c, *out, dim, ctx);
    }
    if (!out) {
        if (!dim) throw SyntaxError(1, 1, "empty current without a 'dim n' line");
        if (period && period->size() == 1 && *dim > 1) period = Vec(*dim, period->front());
        out.emplace(*dim, period);
    }
    return *out;
}

inline std::string render_vector(const Vec& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + to_string(v[i]);
    return s + ")";
}

inline std::string render_site(const Site& site) {
    if (site.kind == Site::Kind::Simplex) {
        if (site.vertices.size() == 1 && site.vertices[0] == Vec(site.vertices[0].size())) return "point";
        std::string s = "simplex[";
        for (std::size_t i = 0; i < site.vertices.size(); ++i) s += (i ? ";" : "") + render_vector(site.vertices[i]);
        return s + "]";
    }
    const int n = site.ambient_dim();
    if (site.plane.split == 0 && site.plane.map == AffineMap::identity(n)) return "chart(" + std::to_string(n) + ")";
    std::string s = "plane[" + std::to_string(site.plane.split) + ";" + render_vector(site.plane.map.b);
    for (int i = 0; i < n; ++i) {
        Vec row(n);
        for (int j = 0; j < n; ++j) row[j] = site.plane.map.A(i, j);
        s += ";" + render_vector(row);
    }
    return s + "]";
}

inline std::string render_term(const TermKey& key, const Poly& q) {
    const int m = key.site.transverse_dim();
    std::string s;
    if (q.is_constant())
        s = to_string(q.constant_term()) + " *";
    else
        s = "1 *";
    if (m > 0) {
        s += " d[";
        for (int i = 0; i < m; ++i) s += (i ? "," : "") + std::to_string(key.alpha[i]);
        s += "](";
        for (int i = 0; i < m; ++i) s += (i ? ",y" : "y") + std::to_string(i + 1);
        s += ")";
    }
    if (!q.is_constant()) s += " (" + q.to_string("z") + ")";
    auto idx = [](const FormIndex& f) {
        std::string r = "{";
        for (std::size_t i = 0; i < f.idx.size(); ++i) r += (i ? "," : "") + std::to_string(f.idx[i]);
        return r + "}";
    };
    if (!key.I.empty()) s += " dy" + idx(key.I);
    if (!key.J.empty()) s += " dz" + idx(key.J);
    s += " @ " + render_site(key.site);
    if (key.site.has_cutoff()) s += " :: chi";
    return s;
}

/// Canonical text: a `dim` line, an optional `period` line, one term per line.
inline std::string render_current(const Current& u) {
    std::string s = "dim " + std::to_string(u.dim()) + "\n";
    if (u.period()) {
        s += "period ";
        for (std::size_t i = 0; i < u.period()->size(); ++i) s += (i ? "," : "") + to_string((*u.period())[i]);
        s += "\n";
    }
    for (const auto& t : u.listing()) s += render_term(t.key, t.q) + "\n";
    return s;
}

/// Test forms: `dim n` plus lines `rat * (poly in x1..xn) dx{i,j,...}`.
inline PolyForm parse_form(std::string_view text, std::optional<int> dim = std::nullopt) {
    std::optional<PolyForm> out;
    std::optional<int> degree;
    detail::for_each_line(text, [&](int line, std::string_view content) {
        detail::Cursor c(content, line, 0);
        if (c.starts_with("dim")) {
            c.accept("dim");
            int n = c.parse_int();
            if (n < 1) c.fail("dimension must be positive");
            if (dim && *dim != n) c.fail("dimension inconsistency");
            if (!c.done()) c.fail("unexpected text after dim");
            dim = n;
            return;
        }
        if (!dim) c.fail("dimension unknown; add a 'dim n' line");
        std::vector<std::string> names;
        for (int i = 1; i <= *dim; ++i) names.push_back("x" + std::to_string(i));
        Rat coeff = c.parse_rat();
        c.expect("*");
        Poly f(*dim, 1);
        if (c.peek() == '(') {
            const std::size_t close = c.matching_paren();
            c.expect("(");
            detail::PolyParser pp(c, names);
            f = pp.expr();
            c.skip_ws();
            if (c.pos() != close) c.fail("unexpected text in polynomial");
            c.expect(")");
        }
        c.expect("dx");
        c.expect("{");
        const std::size_t where = c.pos();
        auto idx = c.parse_int_list('}');
        c.expect("}");
        if (!c.done()) c.fail("unexpected text after form");
        FormIndex K;
        for (int i : idx) {
            if (i < 1 || i > *dim) {
                c.seek(where);
                c.fail("bad form index");
            }
            auto w = wedge(K, FormIndex{i});
            if (w.sign == 0) {
                c.seek(where);
                c.fail("repeated form index");
            }
            coeff *= w.sign;
            K = w.k;
        }
        if (degree && *degree != static_cast<int>(K.size())) c.fail("mixed form degrees");
        degree = static_cast<int>(K.size());
        if (!out) out.emplace(*dim, *degree);
        out->add(K, f * coeff);
    });
    if (!out) {
        if (!dim) throw SyntaxError(1, 1, "empty form without a 'dim n' line");
        return PolyForm(*dim, 0);
    }
    return *out;
}

inline std::string render_form(const PolyForm& w) {
    std::string s = "dim " + std::to_string(w.dim()) + "\n";
    for (const auto& [K, f] : w.components()) {
        s += "1 * (" + f.to_string("x") + ") dx{";
        for (std::size_t i = 0; i < K.idx.size(); ++i) s += (i ? "," : "") + std::to_string(K.idx[i]);
        s += "}\n";
    }
    return s;
}

}  // namespace derham
