#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <derham/bridge.hpp>
#include <derham/complex_io.hpp>
#include <derham/text.hpp>

using namespace derham;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kUsage = 1, kFailed = 2 };

struct Report {
    std::string command;
    json inputs = json::object();
    json outputs = json::object();
    bool verified = true;

    void check(const std::string& name, bool ok) {
        outputs["checks"][name] = ok;
        verified = verified && ok;
    }
};

/// Inline expressions use ';' between lines; a ';' inside brackets belongs
/// to a vertex list and is kept.
std::string inline_lines(std::string t) {
    int depth = 0;
    for (auto& ch : t) {
        if (ch == '[' || ch == '(') ++depth;
        else if (ch == ']' || ch == ')') --depth;
        else if (ch == ';' && depth <= 0) ch = '\n';
    }
    return t;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Options shared by every command that reads a current.
struct CurrentInput {
    std::string file;
    std::string expr;
    int dim = 0;
    std::string complex_file;

    void attach(CLI::App* cmd) {
        cmd->add_option("file", file, "File holding a current expression");
        cmd->add_option("-e,--expr", expr, "Inline current expression (';' separates lines)");
        cmd->add_option("--dim", dim, "Ambient dimension when the text does not fix it");
        cmd->add_option("--complex", complex_file, "Complex file whose simplex ids may appear as simplex(<id>)");
    }

    std::string text() const {
        if (!expr.empty()) return inline_lines(expr);
        if (file.empty()) throw CLI::ValidationError("a current file or --expr is required");
        return slurp(file);
    }

    Current read(Report& r, const SimplicialComplex* X = nullptr) const {
        ParseContext ctx;
        if (dim > 0) ctx.dim = dim;
        if (X) {
            if (X->ambient_dim() > 0) ctx.dim = X->ambient_dim();
            ctx.period = X->period();
            for (const auto& [id, s] : X->simplices())
                if (s.vertices) ctx.named.emplace(std::to_string(id), X->site_of(id));
        }
        const std::string t = text();
        r.inputs["current"] = t;
        return parse_current(t, ctx);
    }
};

/// Options selecting a complex: a file or one of the generators.
struct ComplexInput {
    std::string file;
    int sphere = 0;
    int torus = 0;
    int grid = 3;
    bool rp2 = false;

    void attach(CLI::App* cmd, bool positional) {
        if (positional)
            cmd->add_option("complex", file, "Complex file");
        else
            cmd->add_option("--complex", file, "Complex file");
        cmd->add_option("--sphere", sphere, "Use the boundary of the (n+1)-simplex");
        cmd->add_option("--torus", torus, "Use the periodic grid triangulation of T^n");
        cmd->add_option("--grid", grid, "Grid size k for --torus");
        cmd->add_flag("--rp2", rp2, "Use the 6-vertex projective plane");
    }

    bool given() const { return !file.empty() || sphere > 0 || torus > 0 || rp2; }

    SimplicialComplex build(Report& r) const {
        if (!file.empty()) {
            r.inputs["complex"] = file;
            return read_complex(file);
        }
        if (sphere > 0) {
            r.inputs["complex"] = "sphere " + std::to_string(sphere);
            return make_sphere(sphere);
        }
        if (torus > 0) {
            r.inputs["complex"] = "torus " + std::to_string(torus) + " grid " + std::to_string(grid);
            return make_torus(torus, grid);
        }
        if (rp2) {
            r.inputs["complex"] = "rp2";
            return make_projective_plane();
        }
        throw CLI::ValidationError("a complex is required (file, --sphere, --torus or --rp2)");
    }
};

json chain_json(const Chain& c) {
    json j = json::object();
    for (const auto& [id, v] : c.coeffs) j[std::to_string(id)] = to_string(v);
    return j;
}

std::string chain_text(const Chain& c) {
    if (c.is_zero()) return "0";
    std::string s;
    for (const auto& [id, v] : c.coeffs) {
        if (!s.empty()) s += " + ";
        s += to_string(v) + "*[" + std::to_string(id) + "]";
    }
    return s;
}

void print_current(const std::string& label, const Current& u) {
    std::cout << label << ":\n" << render_current(u);
}

/// w(x + t) as a form: the pullback of w under translation by t.
PolyForm translate_form(const PolyForm& w, const Vec& t) {
    const int n = w.dim();
    std::vector<Poly> images;
    for (int i = 0; i < n; ++i) {
        Poly img = Poly::variable(n, i);
        img += Poly(n, t[i]);
        images.push_back(img);
    }
    PolyForm out(n, w.degree());
    for (const auto& [K, f] : w.components()) out.add(K, f.compose(images, n));
    return out;
}

int run_homology(const ComplexInput& in, Report& r) {
    SimplicialComplex X = in.build(r);
    HomologyResult h = snf_homology(X);
    // independent check of the Betti numbers by ranks over Q
    for (int p = 0; p <= X.dim(); ++p) {
        auto rat_rank = [&](int q) -> std::size_t {
            if (q < 1 || q > X.dim()) return 0;
            IntMatrix m = X.boundary_matrix(q);
            Matrix a(m.rows(), m.cols());
            for (std::size_t i = 0; i < m.rows(); ++i)
                for (std::size_t j = 0; j < m.cols(); ++j) a(i, j) = Rat(m(i, j));
            return rank(a);
        };
        const int b = static_cast<int>(X.count(p) - rat_rank(p) - rat_rank(p + 1));
        r.check("betti_" + std::to_string(p) + "_rank_over_Q", b == h.betti[p]);
    }
    int chi = 0;
    for (int p = 0; p <= X.dim(); ++p) chi += (p % 2 == 0 ? 1 : -1) * static_cast<int>(X.count(p));
    r.check("euler_characteristic", chi == h.euler_characteristic());
    r.outputs["betti"] = h.betti;
    json tors = json::array();
    for (const auto& t : h.torsion) {
        json row = json::array();
        for (const auto& f : t) row.push_back(f.str());
        tors.push_back(row);
    }
    r.outputs["torsion"] = tors;
    r.outputs["oriented"] = validate_oriented(X);
    std::cout << "p  simplices  betti  torsion\n";
    for (int p = 0; p <= X.dim(); ++p) {
        std::cout << p << "  " << X.count(p) << "  " << h.betti[p] << "  ";
        for (const auto& f : h.torsion[p]) std::cout << "Z/" << f << " ";
        std::cout << "\n";
    }
    std::cout << "euler characteristic " << chi << ", oriented " << (validate_oriented(X) ? "yes" : "no") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact symbolic de Rham engine for distributional currents"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string json_path;
    app.add_option("--json", json_path, "Write a structured report to this path");

    ComplexInput hom_in;
    auto* hom = app.add_subcommand("homology", "Integer homology of a complex by Smith normal form");
    hom_in.attach(hom, true);

    ComplexInput gen_in;
    std::string gen_out;
    auto* gen = app.add_subcommand("complex", "Write a generated complex to a file");
    gen_in.attach(gen, false);
    gen->add_option("-o,--output", gen_out, "Output path (standard output when omitted)");

    CurrentInput d_in;
    auto* dcmd = app.add_subcommand("d", "Exterior derivative of a current");
    d_in.attach(dcmd);

    CurrentInput c_in;
    int c_index = 1;
    auto* ccmd = app.add_subcommand("contract", "Interior product with x_i d/dx_i");
    c_in.attach(ccmd);
    ccmd->add_option("-i,--index", c_index, "Ambient coordinate (1-based)")->required();

    int vd_p = 1, vd_n = 1;
    auto* vd = app.add_subcommand("verify-dD", "Check d D(S_p) against the faces of S_p");
    vd->add_option("--p", vd_p, "Simplex dimension p")->required();
    vd->add_option("--n", vd_n, "Ambient dimension n")->required();

    CurrentInput sp_in;
    auto* sp = app.add_subcommand("solve-point", "Poincare lemma for a closed point-supported current");
    sp_in.attach(sp);

    CurrentInput si_in;
    auto* si = app.add_subcommand("solve-interior", "Poincare lemma inside a simplex or chart");
    si_in.attach(si);

    CurrentInput rs_in;
    int rs_p = -1;
    std::string rs_site;
    auto* rs = app.add_subcommand("retract-simplex", "One retraction step on a simplex");
    rs_in.attach(rs);
    rs->add_option("--p", rs_p, "Use the model simplex S_p");
    rs->add_option("--simplex", rs_site, "Target simplex, e.g. simplex[(0,0);(1,0)] or simplex(S1)");

    CurrentInput gr_in;
    ComplexInput gr_cx;
    int gr_k = -1;
    auto* gr = app.add_subcommand("global-retract", "Retract a closed current onto the dual of a cycle");
    gr_in.attach(gr);
    gr->add_option("--on", gr_cx.file, "Complex file");
    gr->add_option("--torus", gr_cx.torus, "Use the periodic grid triangulation of T^n");
    gr->add_option("--grid", gr_cx.grid, "Grid size k for --torus");
    gr->add_option("--sphere", gr_cx.sphere, "Use the boundary of the (n+1)-simplex");
    gr->add_option("-k,--degree", gr_k, "Form degree (taken from the current when omitted)");

    int db_torus = 1, db_grid = 3;
    std::uint64_t db_seed = 1;
    auto* db = app.add_subcommand("derham-betti", "Cohomology ranks of a torus from retractions");
    db->add_option("--torus", db_torus, "Torus dimension n")->required();
    db->add_option("--grid", db_grid, "Grid size k");
    db->add_option("--seed", db_seed, "Seed for the exact perturbations");

    CurrentInput pr_in;
    std::string pr_form_file, pr_form_expr;
    auto* pr = app.add_subcommand("pair", "Pair a current with a polynomial test form");
    pr_in.attach(pr);
    pr->add_option("--form", pr_form_file, "File holding a test form");
    pr->add_option("--form-expr", pr_form_expr, "Inline test form (';' separates lines)");

    auto* st = app.add_subcommand("selftest", "Quick internal consistency checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kPass : kUsage;
    }

    const auto start = std::chrono::steady_clock::now();
    Report r;
    int status = kPass;
    try {
        if (*hom) {
            r.command = "homology";
            run_homology(hom_in, r);
        } else if (*gen) {
            r.command = "complex";
            json doc = complex_to_json(gen_in.build(r));
            r.check("reads_back", complex_to_json(complex_from_json(doc)) == doc);
            if (gen_out.empty()) {
                std::cout << doc.dump(2) << "\n";
            } else {
                std::ofstream(gen_out) << doc.dump(2) << "\n";
                std::cout << "wrote " << gen_out << "\n";
            }
            r.outputs["path"] = gen_out;
        } else if (*dcmd) {
            r.command = "d";
            std::optional<SimplicialComplex> X;
            if (!d_in.complex_file.empty()) X = read_complex(d_in.complex_file);
            Current u = d_in.read(r, X ? &*X : nullptr);
            Current du = d(u);
            r.check("dd_zero", d(du).is_zero());
            r.outputs["d"] = render_current(du);
            print_current("d", du);
        } else if (*ccmd) {
            r.command = "contract";
            Current u = c_in.read(r);
            if (c_index < 1 || c_index > u.dim()) throw Error("coordinate index out of range");
            Current out = contract_radial(u, c_index);
            r.outputs["contraction"] = render_current(out);
            print_current("contraction", out);
        } else if (*vd) {
            r.command = "verify-dD";
            r.inputs["p"] = vd_p;
            r.inputs["n"] = vd_n;
            const bool ok = verify_boundary_identity(vd_p, vd_n);
            r.check("boundary_identity", ok);
            std::cout << "d D(S_" << vd_p << ") in R^" << vd_n << ": " << (ok ? "pass" : "FAIL") << "\n";
        } else if (*sp) {
            r.command = "solve-point";
            Current u = sp_in.read(r);
            PointSolution s = solve_point(u);
            const Site at = u.is_zero() ? Site::point(u.dim()) : u.terms().begin()->first.site;
            r.check("identity", u == d(s.v) + s.c * canonical_D(at, u.dim(), u.period()));
            r.outputs["c"] = to_string(s.c);
            r.outputs["v"] = render_current(s.v);
            std::cout << "c = " << to_string(s.c) << "\n";
            print_current("v", s.v);
        } else if (*si) {
            r.command = "solve-interior";
            Current u = si_in.read(r);
            InteriorSolution s = solve_interior(u);
            if (s.constant) {
                r.outputs["constant"] = to_string(*s.constant);
                std::cout << "constant = " << to_string(*s.constant) << "\n";
            } else {
                // the primitive is checked away from the cut-off boundary
                Current diff = u - d(s.v);
                bool inside = true;
                for (const auto& [key, q] : diff.terms())
                    if (key.site == u.terms().begin()->first.site) inside = false;
                r.check("dv_equals_u_inside", inside);
                r.outputs["v"] = render_current(s.v);
                print_current("v", s.v);
            }
        } else if (*rs) {
            r.command = "retract-simplex";
            Current u = rs_in.read(r);
            Site sigma = Site::model_simplex(0, u.dim());
            if (!rs_site.empty()) {
                ParseContext ctx;
                ctx.dim = u.dim();
                detail::Cursor c(rs_site, 1, 0);
                std::optional<int> dim = u.dim();
                sigma = detail::parse_site(c, dim, ctx);
                if (!c.done()) c.fail("unexpected text after site");
            } else if (rs_p >= 0) {
                sigma = Site::model_simplex(rs_p, u.dim());
            } else {
                throw CLI::ValidationError("--p or --simplex is required");
            }
            RetractionStep s = retract_on_simplex(u, sigma);
            const Site canon = canonical_site(sigma, u.period());
            r.check("identity", u == d(s.v) + s.remainder + s.c * canonical_D(canon, u.dim(), u.period()));
            bool boundary_only = true;
            for (const auto& [key, q] : s.remainder.terms())
                if (key.site == canon || !is_face_of(key.site, canon, u.period())) boundary_only = false;
            r.check("remainder_on_boundary", boundary_only);
            r.outputs["c"] = to_string(s.c);
            r.outputs["v"] = render_current(s.v);
            r.outputs["remainder"] = render_current(s.remainder);
            std::cout << "c = " << to_string(s.c) << "\n";
            print_current("v", s.v);
            print_current("remainder", s.remainder);
        } else if (*gr) {
            r.command = "global-retract";
            if (!gr_cx.given()) throw CLI::ValidationError("--on, --torus or --sphere is required");
            SimplicialComplex X = gr_cx.build(r);
            Current u = gr_in.read(r, &X);
            int k = gr_k;
            if (k < 0) {
                auto deg = u.degree();
                if (!deg) throw Error("mixed form degrees; pass --degree");
                k = *deg;
            }
            RetractionCertificate cert = global_retract(u, X, k);
            r.check("certificate", u.with_period(X.period()) == E(cert.c, X) + d(cert.v));
            r.check("chain_is_cycle", boundary(cert.c, X).is_zero());
            r.outputs["c"] = chain_json(cert.c);
            r.outputs["v"] = render_current(cert.v);
            json log = json::array();
            for (const auto& s : cert.stages)
                log.push_back({{"level", s.level}, {"simplex", s.simplex}, {"c", to_string(s.c)},
                               {"v_terms", s.v_terms}, {"remainder_terms", s.remainder_terms}});
            r.outputs["stages"] = log;
            std::cout << "chain c = " << chain_text(cert.c) << "\n";
            print_current("v", cert.v);
            std::cout << "stages: " << cert.stages.size() << "\n";
            for (const auto& s : cert.stages)
                std::cout << "  level " << s.level << " simplex " << s.simplex << " c " << to_string(s.c) << " v-terms "
                          << s.v_terms << " remainder-terms " << s.remainder_terms << "\n";
        } else if (*db) {
            r.command = "derham-betti";
            r.inputs["torus"] = db_torus;
            r.inputs["grid"] = db_grid;
            SimplicialComplex X = make_torus(db_torus, db_grid);
            HomologyResult h = snf_homology(X);
            json table = json::array();
            std::cout << "k  de Rham rank  simplicial betti_{n-k}\n";
            for (int k = 0; k <= db_torus; ++k) {
                const int rank = derham_cohomology(X, k, db_seed);
                const int betti = h.betti[db_torus - k];
                r.check("k" + std::to_string(k), rank == betti);
                table.push_back({{"k", k}, {"rank", rank}, {"betti", betti}});
                std::cout << k << "  " << rank << "  " << betti << "\n";
            }
            r.outputs["table"] = table;
        } else if (*pr) {
            r.command = "pair";
            Current u = pr_in.read(r);
            std::string ftext;
            if (!pr_form_expr.empty()) {
                ftext = inline_lines(pr_form_expr);
            } else if (!pr_form_file.empty()) {
                ftext = slurp(pr_form_file);
            } else {
                throw CLI::ValidationError("--form or --form-expr is required");
            }
            r.inputs["form"] = ftext;
            PolyForm w = parse_form(ftext, u.dim());
            const Rat value = pair(u, w);
            // translation covariance: <tau_* T, w> = <T, tau^* w>
            const Current plain = u.without_period();
            const Vec shift(u.dim(), Rat(1));
            const Rat moved = pair(affine_transform(plain, AffineMap{Matrix::identity(u.dim()), shift}), w);
            r.check("translation_covariance", moved == pair(plain, translate_form(w, shift)));
            r.outputs["value"] = to_string(value);
            std::cout << "<T, w> = " << to_string(value) << "\n";
        } else if (*st) {
            r.command = "selftest";
            for (int n = 1; n <= 3; ++n)
                for (int p = 1; p <= n; ++p)
                    r.check("boundary_identity_" + std::to_string(p) + "_" + std::to_string(n),
                            verify_boundary_identity(p, n));
            r.check("sphere2_betti", snf_homology(make_sphere(2)).betti == std::vector<int>{1, 0, 1});
            r.check("torus2_betti", snf_homology(make_torus(2, 3)).betti == std::vector<int>{1, 2, 1});
            for (int n = 1; n <= 3; ++n) {
                PointSolution s = solve_point(make_D(0, n));
                r.check("generator_" + std::to_string(n), s.c == 1 && s.v.is_zero());
            }
            r.check("derham_T2_k1", derham_cohomology(make_torus(2, 3), 1) == 2);
            for (const auto& [name, ok] : r.outputs["checks"].items())
                std::cout << (ok.get<bool>() ? "pass  " : "FAIL  ") << name << "\n";
        }
        if (!r.verified) status = kFailed;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        const std::string what = e.what();
        std::cerr << "error: " << what << "\n";
        status = what.rfind("internal", 0) == 0 ? kFailed : kUsage;
        r.verified = false;
        r.outputs["error"] = what;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        status = kUsage;
        r.verified = false;
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    if (status == kPass) std::cout << "verified: yes\n";
    if (status == kFailed) std::cout << "verified: NO\n";
    if (!json_path.empty()) {
        json doc{{"command", r.command}, {"inputs", r.inputs}, {"outputs", r.outputs}, {"verified", r.verified},
                 {"elapsed_ms", ms}};
        std::ofstream(json_path) << doc.dump(2) << "\n";
    }
    return status;
}
