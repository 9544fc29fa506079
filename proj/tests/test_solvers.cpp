#include <catch_amalgamated.hpp>

#include <derham/solvers.hpp>
#include <derham/text.hpp>

#include "generators.hpp"

using namespace derham;

namespace {

Current cur(const std::string& text) { return parse_current(text); }

bool on_boundary_of(const Current& r, const Site& sigma) {
    for (const auto& [key, q] : r.terms())
        if (key.site == sigma || !is_face_of(key.site, sigma, r.period())) return false;
    return true;
}

}  // namespace

TEST_CASE("solve_point examples") {
    auto s = solve_point(make_D(0, 1));
    CHECK(s.c == 1);
    CHECK(s.v.is_zero());

    s = solve_point(cur("dim 1\n1 * d[1](y1) dy{1} @ point"));
    CHECK(s.c == 0);
    CHECK(s.v == cur("dim 1\n1 * d[0](y1) @ point"));

    s = solve_point(Current(3));
    CHECK(s.c == 0);
    CHECK(s.v.is_zero());

    CHECK_THROWS_WITH(solve_point(cur("dim 2\n1 * d[0,0](y1,y2) dy{1} @ point")), "not closed");
    CHECK_THROWS_WITH(solve_point(make_D(1, 2)), "not point-supported");
}

TEST_CASE("solve_point recovers c from c delta + dw") {
    gen::Rng rng(41);
    for (int trial = 0; trial < 80; ++trial) {
        const int n = gen::uniform(rng, 1, 4);
        const Rat c = Rat(gen::uniform(rng, -5, 5)) / Rat(gen::uniform(rng, 1, 3));
        Current w = gen::random_point_current(rng, n, n - 1, 3, 4);
        Current u = c * make_D(0, n) + d(w);
        Vec at(n);
        if (trial % 3 == 0) {
            for (auto& x : at) x = gen::uniform(rng, -2, 2);
            u = affine_transform(u, AffineMap{Matrix::identity(n), at});
        }
        const auto s = solve_point(u);
        CHECK(s.c == c);
        CHECK(u - d(s.v) - s.c * canonical_D(Site::simplex({at}), n) == Current(n));
    }
}

TEST_CASE("the point generator is not exact at bounded order") {
    for (int n = 1; n <= 3; ++n) {
        const auto s = solve_point(make_D(0, n));
        CHECK(s.c == 1);
        CHECK(s.v.is_zero());
        // every (n-1)-form term at a point has a negative degree, and d keeps degrees
        for (int mask = 0; mask < (1 << n); ++mask) {
            std::vector<int> I;
            for (int i = 0; i < n; ++i)
                if (mask & (1 << i)) I.push_back(i + 1);
            if (static_cast<int>(I.size()) != n - 1) continue;
            std::vector<int> e(n, 0);
            for (int code = 0; code < 64; ++code) {
                int rest = code;
                for (int i = 0; i < n; ++i) {
                    e[i] = rest % 4;
                    rest /= 4;
                }
                if (rest != 0) continue;
                Current b(n);
                b.add({Site::point(n), MultiIndex(e), FormIndex(I), FormIndex{}}, Poly(0, 1));
                for (const auto& [a, part] : homogeneity_decompose(d(b)))
                    CHECK(std::any_of(a.begin(), a.end(), [](int x) { return x != 0; }));
            }
        }
    }
}

TEST_CASE("solve_interior examples") {
    auto s = solve_interior(cur("dim 1\n1 * (1) dz{1} @ simplex(S1) :: chi"));
    CHECK(!s.constant);
    CHECK(s.v == cur("dim 1\n1 * (z1) @ simplex(S1) :: chi"));

    s = solve_interior(cur("dim 2\n1 * (z2) dz{1} @ simplex(S2) :: chi\n1 * (z1) dz{2} @ simplex(S2) :: chi"));
    CHECK(s.v == cur("dim 2\n1 * (z1*z2) @ simplex(S2) :: chi"));

    s = solve_interior(cur("dim 2\n5 * (1) @ simplex(S2) :: chi"));
    REQUIRE(s.constant);
    CHECK(*s.constant == 5);

    CHECK_THROWS_WITH(solve_interior(cur("dim 2\n1 * (z1) dz{2} @ simplex(S2) :: chi")), "not closed in interior");
    CHECK_THROWS_WITH(solve_interior(cur("dim 1\n1 * (z1) @ simplex(S1) :: chi")), "not closed in interior");
}

TEST_CASE("solve_interior inverts d on exact chart and top-simplex forms") {
    gen::Rng rng(42);
    for (int trial = 0; trial < 80; ++trial) {
        const int n = gen::uniform(rng, 1, 4);
        const int k = gen::uniform(rng, 1, n);
        const Site site = trial % 2 == 0 ? Site::chart(n) : Site::model_simplex(n, n);
        Current w(n);
        for (int t = 0; t < 3; ++t)
            w.add({site, MultiIndex(std::size_t{0}), FormIndex{}, gen::random_subset(rng, n, k - 1)},
                  gen::random_poly(rng, n, 3));
        Current u(n);
        const Current dw = d(w);
        for (const auto& [key, q] : dw.terms())
            if (key.site == site) u.add(key, q);
        if (u.is_zero()) continue;
        const auto s = solve_interior(u);
        Current interior(n);
        const Current dv = d(s.v);
        for (const auto& [key, q] : dv.terms())
            if (key.site == site) interior.add(key, q);
        CHECK(interior == u);
    }
}

TEST_CASE("retract_on_simplex examples") {
    for (int n = 1; n <= 3; ++n)
        for (int p = 0; p <= n; ++p) {
            const auto r = retract_on_simplex(make_D(p, n), p);
            CHECK(r.c == 1);
            CHECK(r.v.is_zero());
            CHECK(r.remainder.is_zero());
        }

    const Current u = cur("dim 2\n1 * d[1](y1) dy{1} @ simplex(S1) :: chi");
    const auto r = retract_on_simplex(u, 1);
    CHECK(r.c == 0);
    CHECK(r.v == cur("dim 2\n1 * d[0](y1) @ simplex(S1) :: chi"));
    CHECK(r.remainder == cur("dim 2\n-1 * d[0,0](y1,y2) dy{2} @ point\n1 * d[0,0](y1,y2) dy{2} @ simplex[(0,1)]"));
    CHECK(u == d(r.v) + r.remainder);

    const auto z = retract_on_simplex(Current(2), 1);
    CHECK(z.c == 0);
    CHECK(z.v.is_zero());
    CHECK(z.remainder.is_zero());

    CHECK_THROWS_WITH(retract_on_simplex(cur("dim 2\n1 * d[0,0](y1,y2) dy{1,2} @ simplex[(2,2)]"), 2),
                      "support violation");
    const auto face = retract_on_simplex(make_D(1, 2), 2);
    CHECK(face.c == 0);
    CHECK(face.remainder == make_D(1, 2));
    CHECK_THROWS_WITH(retract_on_simplex(cur("dim 2\n1 * d[0](y1) (z1) @ simplex(S1) :: chi"), 1),
                      "not closed off boundary");
}

TEST_CASE("retract_on_simplex invariants on random closed inputs") {
    gen::Rng rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = gen::uniform(rng, 1, 4);
        const int p = gen::uniform(rng, 0, n);
        const int k = gen::uniform(rng, 1, n);
        const Rat c = k == n - p ? Rat(gen::uniform(rng, -3, 3)) : Rat(0);
        const Current w = gen::random_model_current(rng, n, p, k - 1, 2, 2);
        const Current u = c * make_D(p, n) + d(w);
        const Site sigma = Site::model_simplex(p, n);
        const auto r = retract_on_simplex(u, p);
        CHECK(r.c == c);
        CHECK(u == d(r.v) + r.remainder + r.c * make_D(p, n));
        CHECK(on_boundary_of(r.remainder, sigma));
    }
}
