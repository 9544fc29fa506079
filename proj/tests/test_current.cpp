#include <catch_amalgamated.hpp>

#include <derham/bridge.hpp>
#include <derham/current.hpp>
#include <derham/text.hpp>

#include "generators.hpp"

using namespace derham;

namespace {

Current cur(const std::string& text) { return parse_current(text); }

Matrix mat(std::initializer_list<std::initializer_list<int>> rows) {
    Matrix m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& r : rows) {
        std::size_t j = 0;
        for (int x : r) m(i, j++) = x;
        ++i;
    }
    return m;
}

// Pullback of a polynomial form by x -> A x + b, coefficient on dx^L is
// f(Ax + b) det A[K, L].
PolyForm pullback(const PolyForm& w, const AffineMap& phi) {
    const int n = w.dim();
    PolyForm out(n, w.degree());
    for (const auto& [K, f] : w.components()) {
        const Poly g = detail::affine_pullback(f, phi);
        for (int mask = 0; mask < (1 << n); ++mask) {
            std::vector<int> L;
            for (int j = 0; j < n; ++j)
                if (mask & (1 << j)) L.push_back(j + 1);
            if (L.size() != K.size()) continue;
            Matrix minor(L.size(), L.size());
            for (std::size_t a = 0; a < L.size(); ++a)
                for (std::size_t b = 0; b < L.size(); ++b) minor(a, b) = phi.A(K.idx[a] - 1, L[b] - 1);
            const Rat dm = det(minor);
            if (dm != 0) out.add(FormIndex(L), g * dm);
        }
    }
    return out;
}

AffineMap random_map(gen::Rng& rng, int n, bool unimodular) {
    for (;;) {
        AffineMap phi{Matrix(n, n), Vec(n)};
        for (int i = 0; i < n; ++i) {
            phi.b[i] = gen::uniform(rng, -2, 2);
            for (int j = 0; j < n; ++j) phi.A(i, j) = gen::uniform(rng, -2, 2);
        }
        const Rat dt = det(phi.A);
        if (dt != 0 && (!unimodular || dt == 1 || dt == -1)) return phi;
    }
}

AffineMap signed_permutation(gen::Rng& rng, int n) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    AffineMap phi{Matrix(n, n), Vec(n)};
    for (int i = 0; i < n; ++i) {
        phi.A(i, perm[i]) = gen::uniform(rng, 0, 1) ? 1 : -1;
        phi.b[i] = gen::uniform(rng, -2, 2);
    }
    return phi;
}

}  // namespace

TEST_CASE("normalization absorbs transverse factors into delta derivatives") {
    Current u(1);
    u.add_raw(Site::point(1), MultiIndex{0}, FormIndex{}, Poly::variable(1, 0), FormIndex{});
    CHECK(u.is_zero());

    Current v(1);
    v.add_raw(Site::point(1), MultiIndex{1}, FormIndex{}, Poly::variable(1, 0), FormIndex{});
    CHECK(v == cur("dim 1\n-1 * d[0](y1) @ point"));

    Current w(1);
    w.add_raw(Site::point(1), MultiIndex{2}, FormIndex{1}, Poly::variable(1, 0).pow(2), FormIndex{}, 3);
    CHECK(w == cur("dim 1\n6 * d[0](y1) dy{1} @ point"));
}

TEST_CASE("terms cancel and sites are compared canonically") {
    Current u = cur("dim 2\n1 * d[0](y1) dy{1} @ simplex[(0,0);(0,1)] :: chi");
    Current flipped(2);
    flipped.add({Site::simplex({Vec{0, 1}, Vec{0, 0}}), MultiIndex{0}, FormIndex{1}, FormIndex{}}, Poly(1, 1));
    CHECK(!(u + flipped).is_zero());
    CHECK(flipped.size() == 1);
    CHECK((u - u).is_zero());
    CHECK(u.degree() == 1);
    CHECK((u + make_D(2, 2)).degree() == std::nullopt);
}

TEST_CASE("periodic currents keep reduced representatives") {
    Current u(1, Vec{3});
    u.add({Site::point(1), MultiIndex{0}, FormIndex{1}, FormIndex{}}, Poly(0, 1));
    Current w(1, Vec{3});
    w.add({Site::simplex({Vec{4}}), MultiIndex{0}, FormIndex{1}, FormIndex{}}, Poly(0, 1));
    w.add({Site::simplex({Vec{-2}}), MultiIndex{0}, FormIndex{1}, FormIndex{}}, Poly(0, 1));
    CHECK(w.size() == 1);
    CHECK(w.terms().begin()->first.site == Site::simplex({Vec{1}}));
    CHECK((u + w).size() == 2);
}

TEST_CASE("model integration currents") {
    CHECK(make_D(0, 2) == cur("dim 2\n1 * d[0,0](y1,y2) dy{1,2} @ point"));
    CHECK(make_D(2, 2) == cur("dim 2\n1 * (1) @ simplex(S2) :: chi"));
    CHECK(make_D(1, 2) == cur("dim 2\n1 * d[0](y1) dy{1} @ simplex(S1) :: chi"));
    CHECK(make_D(1, 2).degree() == 1);
    CHECK_THROWS_AS(make_D(3, 2), Error);
}

TEST_CASE("exterior derivative examples") {
    CHECK(d(make_D(0, 2)).is_zero());
    CHECK(d(cur("dim 1\n1 * (1) @ simplex(S1) :: chi")) ==
          cur("dim 1\n1 * d[0](y1) dy{1} @ point\n-1 * d[0](y1) dy{1} @ simplex[(1)]"));
    CHECK(d(cur("dim 2\n1 * d[0](y1) @ simplex(S1) :: chi")) ==
          cur("dim 2\n"
              "1 * d[1](y1) dy{1} @ simplex(S1) :: chi\n"
              "1 * d[0,0](y1,y2) dy{2} @ point\n"
              "-1 * d[0,0](y1,y2) dy{2} @ simplex[(0,1)]"));
    // a chart term has no boundary
    CHECK(d(cur("dim 1\n1 * (z1^2) @ chart(1)")) == cur("dim 1\n2 * (z1) dz{1} @ chart(1)"));
}

TEST_CASE("d squares to zero on random currents") {
    gen::Rng rng(21);
    for (int trial = 0; trial < 120; ++trial) {
        const int n = gen::uniform(rng, 1, 4);
        const int k = gen::uniform(rng, 0, n);
        gen::Options opt;
        opt.max_order = 3;
        opt.max_degree = 3;
        const Current u = gen::random_current(rng, n, k, opt);
        const Current du = d(u);
        CHECK(d(du).is_zero());
        if (!du.is_zero()) CHECK(du.degree() == k + 1);
    }
}

TEST_CASE("radial contraction examples") {
    CHECK(contract_radial(make_D(0, 1), 1).is_zero());
    CHECK(contract_radial(cur("dim 1\n1 * d[1](y1) dy{1} @ point"), 1) == cur("dim 1\n-1 * d[0](y1) @ point"));
    CHECK(contract_radial(cur("dim 1\n1 * (z1) dz{1} @ simplex(S1) :: chi"), 1) ==
          cur("dim 1\n1 * (z1^2) @ simplex(S1) :: chi"));
    CHECK_THROWS_AS(contract_radial(make_D(0, 1), 2), Error);
}

TEST_CASE("homogeneity degrees and decomposition") {
    const Current u = cur("dim 2\n1 * d[2,0](y1,y2) dy{1} @ point\n3 * d[0,1](y1,y2) @ point");
    const auto parts = homogeneity_decompose(u);
    REQUIRE(parts.size() == 2);
    CHECK(parts.count({-2, -1}) == 1);
    CHECK(parts.count({-1, -2}) == 1);

    const Current v = cur("dim 2\n1 * d[1](y1) (z1 + z1^2) dz{1} @ simplex(S1) :: chi");
    const auto vp = homogeneity_decompose(v);
    REQUIRE(vp.size() == 2);
    CHECK(vp.count({-2, 2}) == 1);
    CHECK(vp.count({-2, 3}) == 1);
    CHECK(transverse_decompose(v).size() == 1);
}

TEST_CASE("decompositions sum back to the current") {
    gen::Rng rng(22);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = gen::uniform(rng, 1, 3);
        const Current u = gen::random_current(rng, n, gen::uniform(rng, 0, n));
        Current s(n), t(n);
        for (const auto& [a, part] : homogeneity_decompose(u)) s += part;
        for (const auto& [a, part] : transverse_decompose(u)) t += part;
        CHECK(s == u);
        CHECK(t == u);
    }
}

TEST_CASE("Cartan identity on point and chart terms") {
    gen::Rng rng(23);
    for (int trial = 0; trial < 80; ++trial) {
        const int n = gen::uniform(rng, 1, 4);
        const int k = gen::uniform(rng, 0, n);
        Current u = gen::random_point_current(rng, n, k, 3);
        Current chart(n);
        chart.add({Site::chart(n), MultiIndex(std::size_t{0}), FormIndex{}, gen::random_subset(rng, n, k)},
                  gen::random_poly(rng, n, 3));
        u += chart;
        for (const auto& [a, part] : homogeneity_decompose(u)) {
            for (int i = 1; i <= n; ++i) {
                Current lhs = d(contract_radial(part, i)) + contract_radial(d(part), i);
                Current rhs = part;
                rhs *= Rat(a[i - 1]);
                CHECK(lhs == rhs);
            }
        }
    }
}

TEST_CASE("Cartan identity in transverse coordinates of model simplices") {
    gen::Rng rng(24);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = gen::uniform(rng, 2, 4);
        const int p = gen::uniform(rng, 1, n - 1);
        const int k = gen::uniform(rng, 0, n);
        const Current u = gen::random_model_current(rng, n, p, k, 2, 2);
        for (const auto& [a, part] : homogeneity_decompose(u)) {
            for (int i = 1; i <= n - p; ++i) {
                Current lhs = d(contract_radial(part, i)) + contract_radial(d(part), i);
                Current rhs = part;
                rhs *= Rat(a[i - 1]);
                CHECK(lhs == rhs);
            }
        }
    }
}

TEST_CASE("affine transform examples") {
    const Current u = make_D(1, 2);
    CHECK(affine_transform(u, AffineMap::identity(2)) == u);
    AffineMap reflect{mat({{-1, 0}, {0, 1}}), Vec{0, 0}};
    Current minus_u = u;
    minus_u *= Rat(-1);
    CHECK(affine_transform(u, reflect) == minus_u);
    AffineMap shift{Matrix::identity(1), Vec{2}};
    CHECK(affine_transform(make_D(0, 1), shift) == cur("dim 1\n1 * d[0](y1) dy{1} @ simplex[(2)]"));
    CHECK_THROWS_AS(affine_transform(u, AffineMap{mat({{1, 1}, {1, 1}}), Vec{0, 0}}), Error);
}

TEST_CASE("affine transforms of model simplices are oriented image simplices") {
    gen::Rng rng(25);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = gen::uniform(rng, 1, 3);
        const int p = gen::uniform(rng, 0, n);
        const AffineMap phi = random_map(rng, n, true);
        std::vector<Vec> image;
        for (const auto& v : Site::model_simplex(p, n).vertices) image.push_back(phi.apply(v));
        Current expected = oriented_simplex_current(image);
        expected *= det(phi.A);
        CHECK(affine_transform(make_D(p, n), phi) == expected);
    }
}

TEST_CASE("affine transforms by signed permutations are functorial, commute with d and respect pairing") {
    gen::Rng rng(26);
    gen::Options opt;
    opt.max_order = 2;
    opt.max_degree = 2;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = gen::uniform(rng, 1, 3);
        const int k = gen::uniform(rng, 0, n);
        const Current u = gen::random_current(rng, n, k, opt);
        const AffineMap f = signed_permutation(rng, n);
        const AffineMap g = signed_permutation(rng, n);
        CHECK(affine_transform(affine_transform(u, g), f) == affine_transform(u, f.compose(g)));
        CHECK(d(affine_transform(u, f)) == affine_transform(d(u), f));
        const PolyForm w = gen::random_form(rng, n, n - k, 2);
        const Rat sign = det(f.A) > 0 ? 1 : -1;
        CHECK(pair(affine_transform(u, f), w) == sign * pair(u, pullback(w, f)));
    }
}

TEST_CASE("unimodular affine transforms of undifferentiated simplex currents") {
    gen::Rng rng(27);
    gen::Options opt;
    opt.max_order = 0;
    opt.max_degree = 3;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = gen::uniform(rng, 1, 3);
        const int k = gen::uniform(rng, 0, n);
        const Current u = gen::random_current(rng, n, k, opt) + gen::random_point_current(rng, n, k, 3);
        const AffineMap f = random_map(rng, n, true);
        const AffineMap g = random_map(rng, n, true);
        CHECK(affine_transform(affine_transform(u, g), f) == affine_transform(u, f.compose(g)));
        const PolyForm w = gen::random_form(rng, n, n - k, 2);
        const Rat sign = det(f.A) > 0 ? 1 : -1;
        CHECK(pair(affine_transform(u, f), w) == sign * pair(u, pullback(w, f)));
    }
}

TEST_CASE("a shear of a differentiated delta across a cut-off is rejected") {
    const Current u = cur("dim 2\n1 * d[1](y1) dy{1} @ simplex(S1) :: chi");
    const AffineMap shear{mat({{1, 0}, {1, 1}}), Vec{0, 0}};
    CHECK_THROWS_AS(affine_transform(u, shear), Error);
    CHECK_NOTHROW(affine_transform(make_D(1, 2), shear));
}

TEST_CASE("face relation") {
    const Site tri = Site::model_simplex(2, 2);
    CHECK(is_face_of(Site::simplex({Vec{0, 0}, Vec{1, 0}}), tri, std::nullopt));
    CHECK(is_face_of(tri, tri, std::nullopt));
    CHECK(!is_face_of(Site::simplex({Vec{1, 1}}), tri, std::nullopt));
    CHECK(is_face_of(Site::simplex({Vec{4, 0}}), tri, Vec{3, 3}));
}
