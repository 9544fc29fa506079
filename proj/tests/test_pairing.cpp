#include <catch_amalgamated.hpp>

#include <derham/bridge.hpp>
#include <derham/pairing.hpp>
#include <derham/text.hpp>

#include "generators.hpp"
#include "oracles.hpp"

using namespace derham;

namespace {

Current cur(const std::string& text) { return parse_current(text); }

PolyForm form(int n, int k, const FormIndex& K, const Poly& f) {
    PolyForm w(n, k);
    w.add(K, f);
    return w;
}

std::vector<Vec> random_vertices(gen::Rng& rng, int n, int p) {
    std::vector<Vec> v = gen::random_simplex_site(rng, n, p).vertices;
    std::shuffle(v.begin(), v.end(), rng);
    return v;
}

}  // namespace

TEST_CASE("pairing examples") {
    CHECK(pair(cur("dim 1\n1 * (1) @ simplex(S1) :: chi"), form(1, 1, {1}, Poly(1, 1))) == 1);
    const Poly x2 = Poly::variable(2, 1);
    const Poly x1 = Poly::variable(2, 0);
    CHECK(pair(make_D(1, 2), form(2, 1, {2}, x2)) == Rat(1) / 2);
    CHECK(pair(cur("dim 2\n1 * d[1](y1) dy{1} @ simplex(S1) :: chi"), form(2, 1, {2}, x1)) == -1);
    CHECK(pair(make_D(0, 2), form(2, 0, {}, Poly(2, 7))) == 7);
    CHECK(pair(make_D(2, 2), form(2, 2, {1, 2}, x1 * x2)) == Rat(1) / 24);
}

TEST_CASE("pairing rejects bad input") {
    CHECK_THROWS_AS(pair(make_D(1, 2), form(2, 2, {1, 2}, Poly(2, 1))), Error);
    CHECK_THROWS_AS(pair(make_D(1, 2), form(3, 1, {1}, Poly(3, 1))), Error);
    CHECK_THROWS_AS(pair(cur("dim 1\n1 * (1) @ chart(1)"), form(1, 1, {1}, Poly(1, 1))), Error);
}

TEST_CASE("fundamental theorem of calculus as a Stokes identity") {
    // <d chi, x^2> = -<chi, 2x dx> = -1 and d chi = delta(x) - delta(x - 1)
    const Current chi = cur("dim 1\n1 * (1) @ simplex(S1) :: chi");
    const PolyForm f = form(1, 0, {}, Poly::variable(1, 0).pow(2));
    CHECK(pair(d(chi), f) == -1);
    CHECK(pair(chi, f.d()) == 1);
    CHECK(stokes_check(chi, f));
}

TEST_CASE("Stokes identity on random currents and forms") {
    gen::Rng rng(31);
    for (int trial = 0; trial < 150; ++trial) {
        const int n = gen::uniform(rng, 1, 4);
        const int k = gen::uniform(rng, 0, n - 1);
        gen::Options opt;
        opt.max_order = 2;
        const Current u = gen::random_current(rng, n, k, opt);
        const PolyForm w = gen::random_form(rng, n, n - k - 1, 3);
        const Rat sign = k % 2 == 0 ? -1 : 1;
        CHECK(pair(d(u), w) == sign * pair(u, w.d()));
        CHECK(stokes_check(u, w));
    }
}

TEST_CASE("pairing is bilinear") {
    gen::Rng rng(32);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = gen::uniform(rng, 1, 3);
        const int k = gen::uniform(rng, 0, n);
        const Current u = gen::random_current(rng, n, k);
        const Current v = gen::random_current(rng, n, k);
        PolyForm w1 = gen::random_form(rng, n, n - k);
        const PolyForm w2 = gen::random_form(rng, n, n - k);
        const Rat a = gen::uniform(rng, -3, 3);
        CHECK(pair(u + a * v, w1) == pair(u, w1) + a * pair(v, w1));
        const Rat before = pair(u, w1) + pair(u, w2);
        w1 += w2;
        CHECK(pair(u, w1) == before);
    }
}

TEST_CASE("integration currents pair to integrals over oriented simplices") {
    gen::Rng rng(33);
    for (int trial = 0; trial < 120; ++trial) {
        const int n = gen::uniform(rng, 1, 4);
        const int p = gen::uniform(rng, 0, n);
        const auto verts = random_vertices(rng, n, p);
        const PolyForm w = gen::random_form(rng, n, p, 3);
        const Rat expected = oracle::integrate(verts, w);
        CHECK(pair(oriented_simplex_current(verts), w) == expected);
        CHECK(integrate_over_simplex(verts, w) == expected);
    }
}

TEST_CASE("exterior derivative of polynomial forms") {
    const Poly x = Poly::variable(2, 0), y = Poly::variable(2, 1);
    const PolyForm w = form(2, 1, {1}, x * y);
    const PolyForm dw = w.d();
    CHECK(dw.components().size() == 1);
    CHECK(dw.components().at(FormIndex{1, 2}) == -x);
    gen::Rng rng(34);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = gen::uniform(rng, 2, 4);
        const PolyForm f = gen::random_form(rng, n, gen::uniform(rng, 0, n - 2), 4);
        CHECK(f.d().d().components().empty());
    }
}
