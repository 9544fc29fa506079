#include <catch_amalgamated.hpp>

#include <functional>

#include <derham/algebra.hpp>

#include "generators.hpp"
#include "oracles.hpp"

using namespace derham;

namespace {

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

Poly z(std::size_t n, std::size_t i) { return Poly::variable(n, i); }

}  // namespace

TEST_CASE("rationals parse and print in lowest terms") {
    CHECK(to_string(parse_rat("6/4")) == "3/2");
    CHECK(to_string(parse_rat("-7")) == "-7");
    CHECK(to_string(parse_rat("+0/5")) == "0");
    CHECK_THROWS_AS(parse_rat("1/0"), Error);
    CHECK_THROWS_AS(parse_rat("1/-2"), Error);
    CHECK_THROWS_AS(parse_rat("abc"), Error);
    CHECK(floor_of(Rat(-1) / Rat(2)) == -1);
    CHECK(floor_of(Rat(7) / Rat(2)) == 3);
}

TEST_CASE("wedge of basis forms") {
    auto r = wedge(FormIndex{2}, FormIndex{1});
    CHECK(r.sign == -1);
    CHECK(r.k == FormIndex{1, 2});

    r = wedge(FormIndex{1, 3}, FormIndex{2});
    CHECK(r.sign == -1);
    CHECK(r.k == FormIndex{1, 2, 3});

    CHECK(wedge(FormIndex{1, 2}, FormIndex{2}).sign == 0);
    CHECK(wedge(FormIndex{}, FormIndex{3}).sign == 1);
    CHECK_THROWS_AS(wedge(FormIndex{4}, FormIndex{1}, 3), Error);
}

TEST_CASE("wedge is graded anticommutative and associative") {
    gen::Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = gen::uniform(rng, 1, 6);
        const FormIndex a = gen::random_subset(rng, n, gen::uniform(rng, 0, n));
        const FormIndex b = gen::random_subset(rng, n, gen::uniform(rng, 0, n));
        const FormIndex c = gen::random_subset(rng, n, gen::uniform(rng, 0, n));
        const auto ab = wedge(a, b);
        const auto ba = wedge(b, a);
        const int graded = (a.size() * b.size()) % 2 == 0 ? 1 : -1;
        CHECK(ab.sign == graded * ba.sign);
        if (ab.sign != 0) CHECK(ab.k == ba.k);

        int left = 0, right = 0;
        if (ab.sign != 0) {
            auto x = wedge(ab.k, c);
            left = ab.sign * x.sign;
        }
        auto bc = wedge(b, c);
        if (bc.sign != 0) {
            auto y = wedge(a, bc.k);
            right = bc.sign * y.sign;
        }
        CHECK(left == right);
    }
}

TEST_CASE("antiderivative examples") {
    const Poly q = z(2, 0) * z(2, 1);
    CHECK(poly_antiderivative(q, 1) == z(2, 0).pow(2) * z(2, 1) * Rat(Rat(1) / 2));
    CHECK(poly_antiderivative(Poly(1, 3), 1) == z(1, 0) * Rat(3));
    CHECK_THROWS_AS(poly_antiderivative(q, 3), Error);
}

TEST_CASE("derivative undoes antiderivative and the base point is zero") {
    gen::Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = gen::uniform(rng, 1, 4);
        const Poly q = gen::random_poly(rng, n, 4, 4);
        const int i = gen::uniform(rng, 1, n);
        const Poly Q = poly_antiderivative(q, i);
        CHECK(Q.derivative(i - 1) == q);
        Vec x(n);
        for (auto& v : x) v = gen::uniform(rng, -3, 3);
        x[i - 1] = 0;
        CHECK(Q.evaluate(x) == 0);
    }
}

TEST_CASE("affine substitution") {
    const Poly q = z(1, 0).pow(2);
    CHECK(poly_affine_substitute(q, mat({{2}}), Vec{0}) == z(1, 0).pow(2) * Rat(4));
    CHECK(poly_affine_substitute(q, mat({{1}}), Vec{1}) == z(1, 0).pow(2) + z(1, 0) * Rat(2) + Poly(1, 1));
    CHECK_THROWS_AS(poly_affine_substitute(z(2, 0), mat({{1, 2}, {2, 4}}), Vec{0, 0}), Error);
    CHECK_THROWS_AS(poly_affine_substitute(z(2, 0), mat({{1}}), Vec{0}), Error);
}

TEST_CASE("affine substitution is functorial and agrees with evaluation") {
    gen::Rng rng(13);
    auto random_invertible = [&](int n) {
        for (;;) {
            Matrix a(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) a(i, j) = gen::uniform(rng, -2, 2);
            if (det(a) != 0) return a;
        }
    };
    for (int trial = 0; trial < 60; ++trial) {
        const int n = gen::uniform(rng, 1, 3);
        const Poly q = gen::random_poly(rng, n, 3);
        const Matrix a1 = random_invertible(n), a2 = random_invertible(n);
        Vec b1(n), b2(n), x(n);
        for (int i = 0; i < n; ++i) {
            b1[i] = gen::uniform(rng, -2, 2);
            b2[i] = gen::uniform(rng, -2, 2);
            x[i] = gen::uniform(rng, -3, 3);
        }
        // q(A1 (A2 w + b2) + b1)
        const Poly once = poly_affine_substitute(q, a1 * a2, a1 * b2 + b1);
        const Poly twice = poly_affine_substitute(poly_affine_substitute(q, a1, b1), a2, b2);
        CHECK(once == twice);
        CHECK(poly_affine_substitute(q, a1, b1).evaluate(x) == q.evaluate(a1 * x + b1));
    }
}

TEST_CASE("monomial simplex integrals") {
    CHECK(monomial_simplex_integral(MultiIndex{0}, 1) == 1);
    CHECK(monomial_simplex_integral(MultiIndex{2}, 1) == Rat(1) / 3);
    CHECK(monomial_simplex_integral(MultiIndex{1, 1}, 2) == Rat(1) / 24);
    CHECK(monomial_simplex_integral(MultiIndex(std::size_t{0}), 0) == 1);
    CHECK_THROWS_AS(monomial_simplex_integral(MultiIndex{1}, 2), Error);
}

TEST_CASE("simplex integrals agree with nested one-dimensional integration") {
    for (int p = 1; p <= 4; ++p) {
        // every exponent vector with |beta| <= 6
        std::vector<int> e(p, 0);
        std::function<void(int, int)> rec = [&](int i, int budget) {
            if (i == p) {
                const MultiIndex beta(e);
                CHECK(monomial_simplex_integral(beta, p) == oracle::iterated_simplex_integral(Poly::monomial(beta, 1)));
                return;
            }
            for (int k = 0; k <= budget; ++k) {
                e[i] = k;
                rec(i + 1, budget - k);
            }
            e[i] = 0;
        };
        rec(0, 6);
    }
    gen::Rng rng(14);
    for (int trial = 0; trial < 50; ++trial) {
        const Poly q = gen::random_poly(rng, gen::uniform(rng, 1, 4), 5, 5);
        CHECK(simplex_integral(q) == oracle::iterated_simplex_integral(q));
    }
}
