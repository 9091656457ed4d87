#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "subrk/cdc.hpp"
#include "subrk/models.hpp"

using namespace subrk;

namespace {

std::vector<Rational> random_pointq(int vars, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(-8, 8);
    std::vector<Rational> pt(vars);
    for (auto& c : pt) c = Rational(num(rng), 4);
    return pt;
}

} // namespace

TEST_CASE("heisenberg dimensions and homogeneous dimension") {
    CarnotModel h1 = heisenberg(1);
    CHECK(h1.d() == 2);
    CHECK(h1.m() == 1);
    CHECK(h1.homogeneous_dim() == 4);
    CHECK(h1.is_heisenberg());

    CarnotModel h2 = heisenberg(2);
    CHECK(h2.d() == 4);
    CHECK(h2.homogeneous_dim() == 6);

    CHECK_THROWS_AS(heisenberg(0), std::invalid_argument);
}

TEST_CASE("heisenberg frame bracket [X, Y] = Z") {
    CarnotModel h1 = heisenberg(1);
    auto L = h1.sub_laplacian<Rational>();
    auto zs = h1.vertical_frame<Rational>();
    VectorField<Rational> br = bracket(L.horizontal[0], L.horizontal[1]);
    for (int i = 0; i < 3; ++i) CHECK(br.coef[i] == zs[0].coef[i]);
}

TEST_CASE("frame brackets reproduce the structure matrices on a random model") {
    CarnotModel g = random_step2_model(3, 2, 99);
    auto L = g.sub_laplacian<Rational>();
    auto zs = g.vertical_frame<Rational>();
    for (int i = 0; i < g.d(); ++i) {
        for (int j = 0; j < g.d(); ++j) {
            VectorField<Rational> br = bracket(L.horizontal[i], L.horizontal[j]);
            VectorField<Rational> expect;
            expect.coef.assign(g.dim(), PolyQ::zero(g.dim()));
            for (int k = 0; k < g.m(); ++k) {
                expect.coef[g.d() + k] = PolyQ::constant(g.dim(), g.structure(k, i, j));
            }
            for (int c = 0; c < g.dim(); ++c) CHECK(br.coef[c] == expect.coef[c]);
        }
    }
}

TEST_CASE("group law: identity, inverse, spec example") {
    CarnotModel h1 = heisenberg(1);
    Point p = {1.0, 0.0, 0.0}, q = {0.0, 1.0, 0.0};
    Point id = {0.0, 0.0, 0.0};

    CHECK(group_law(h1, id, q) == q);
    CHECK(group_law(h1, p, id) == p);

    Point pq = group_law(h1, p, q);
    CHECK(pq[0] == doctest::Approx(1.0));
    CHECK(pq[1] == doctest::Approx(1.0));
    CHECK(pq[2] == doctest::Approx(0.5));

    Point pinv = group_inverse(h1, p);
    Point e = group_law(h1, p, pinv);
    for (double c : e) CHECK(c == doctest::Approx(0.0));
}

TEST_CASE("group law associativity is exact in rational arithmetic") {
    std::mt19937_64 rng(7);
    for (const CarnotModel& g : {heisenberg(1), random_step2_model(3, 2, 5)}) {
        for (int rep = 0; rep < 10; ++rep) {
            auto p = random_pointq(g.dim(), rng);
            auto q = random_pointq(g.dim(), rng);
            auto r = random_pointq(g.dim(), rng);
            auto lhs = compose<Rational>(g, compose<Rational>(g, p, q), r);
            auto rhs = compose<Rational>(g, p, compose<Rational>(g, q, r));
            CHECK(lhs == rhs);
        }
    }
}

TEST_CASE("dilation: scaling, multiplicativity, automorphism") {
    CarnotModel h1 = heisenberg(1);
    Point p = {1.0, 1.0, 1.0};

    Point same = dilation(h1, 1.0, p);
    CHECK(same == p);

    Point twice = dilation(h1, 2.0, p);
    CHECK(twice[0] == doctest::Approx(2.0));
    CHECK(twice[1] == doctest::Approx(2.0));
    CHECK(twice[2] == doctest::Approx(4.0));

    CHECK_THROWS_AS(dilation(h1, 0.0, p), std::invalid_argument);
    CHECK_THROWS_AS(dilation(h1, -1.0, p), std::invalid_argument);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (int rep = 0; rep < 10; ++rep) {
        Point a = {uni(rng), uni(rng), uni(rng)};
        Point b = {uni(rng), uni(rng), uni(rng)};
        double lam = 0.5 + std::abs(uni(rng)), mu = 0.5 + std::abs(uni(rng));
        // multiplicative in lambda
        Point lhs = dilation(h1, lam * mu, a);
        Point rhs = dilation(h1, lam, dilation(h1, mu, a));
        for (int i = 0; i < 3; ++i) CHECK(lhs[i] == doctest::Approx(rhs[i]));
        // automorphism of the group law
        Point l2 = dilation(h1, lam, group_law(h1, a, b));
        Point r2 = group_law(h1, dilation(h1, lam, a), dilation(h1, lam, b));
        for (int i = 0; i < 3; ++i) CHECK(l2[i] == doctest::Approx(r2[i]));
    }
}

TEST_CASE("frame left-invariance: left translation preserves frame coefficients") {
    // For fixed rational g0, X_i f(g0 . p) as a function of p must equal
    // (X_i f)(g0 . p): check L_g0-pullback commutes with the frame symbolically.
    for (const CarnotModel& g : {heisenberg(1), random_step2_model(3, 2, 12)}) {
        auto L = g.sub_laplacian<Rational>();
        int n = g.dim();
        std::mt19937_64 rng(13);
        auto g0 = random_pointq(n, rng);
        // coordinates of g0 . p as polynomials in p
        std::vector<PolyQ> trans;
        {
            std::vector<PolyQ> pvars;
            for (int i = 0; i < n; ++i) pvars.push_back(PolyQ::variable(n, i));
            std::vector<PolyQ> g0poly;
            for (int i = 0; i < n; ++i) g0poly.push_back(PolyQ::constant(n, g0[i]));
            trans = compose<PolyQ>(g, g0poly, pvars);
        }
        auto pullback = [&](const PolyQ& f) {
            // substitute coordinates: f(g0 . p)
            PolyQ acc(n);
            for (const auto& [mono, coef] : f.terms()) {
                PolyQ term = PolyQ::constant(n, coef);
                for (int i = 0; i < n; ++i)
                    for (unsigned e = 0; e < mono[i]; ++e) term = term * trans[i];
                acc += term;
            }
            return acc;
        };
        std::mt19937_64 rng2(14);
        for (int rep = 0; rep < 3; ++rep) {
            PolyQ f = random_polynomial(n, 2, rng2).convert<Rational>();
            for (const auto& X : L.horizontal) {
                CHECK(X.apply(pullback(f)) == pullback(X.apply(f)));
            }
        }
    }
}

TEST_CASE("cd_parameters for sasakian specs (closed form)") {
    CDParams p1 = cd_parameters(SasakianSpec{1, -1.0});
    CHECK(p1.rho1 == doctest::Approx(-1.0));
    CHECK(p1.rho2 == doctest::Approx(0.5));
    CHECK(p1.kappa == doctest::Approx(1.0));
    CHECK(p1.d == doctest::Approx(2.0));
    CHECK(p1.D() == doctest::Approx(8.0));
    CHECK(p1.Dstar() == doctest::Approx(10.0));
    CHECK_FALSE(p1.estimated);

    CDParams p2 = cd_parameters(SasakianSpec{2, 0.0});
    CHECK(p2.rho1 == 0.0);
    CHECK(p2.rho2 == doctest::Approx(1.0));
    CHECK(p2.kappa == doctest::Approx(1.0));
    CHECK(p2.d == doctest::Approx(4.0));
}

TEST_CASE("cd_parameters estimate for heisenberg(1) certifies CD(0, .)") {
    CarnotModel g = heisenberg(1);
    CDParams est = cd_parameters(g, 7, 20, 6);
    CHECK(est.estimated);
    CHECK(est.rho1 == 0.0);
    CHECK(est.rho2 > 0.0);
    // the estimate must itself pass a fresh residual sweep
    auto L = g.sub_laplacian<double>();
    auto zs = g.vertical_frame<double>();
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> uni(-1.5, 1.5);
    for (int rep = 0; rep < 25; ++rep) {
        PolyD f = random_polynomial(3, 3, rng);
        CdTerms<double> terms = cd_terms(L, zs, f);
        std::vector<double> pt = {uni(rng), uni(rng), uni(rng)};
        auto at = eval_terms(terms, pt);
        for (double nu : {0.01, 0.1, 1.0, 10.0, 100.0}) {
            CHECK(cd_residual(at, est, nu) >= -1e-7);
        }
    }
}

TEST_CASE("model_from_json round trips the three spec forms") {
    ModelSpec h = model_from_json(R"({"type":"heisenberg","n":2})");
    CHECK_FALSE(h.is_sasakian);
    CHECK(h.carnot.d() == 4);

    ModelSpec s = model_from_json(R"({"type":"sasakian","n":1,"rho1":-1.0})");
    CHECK(s.is_sasakian);
    CHECK(s.sasakian.rho1 == doctest::Approx(-1.0));

    ModelSpec c = model_from_json(R"({"type":"carnot2","B":[[[0,1],[-1,0]]]})");
    CHECK(c.carnot.d() == 2);
    CHECK(c.carnot.m() == 1);
    CHECK(c.carnot.is_heisenberg());

    CHECK_THROWS(model_from_json(R"({"type":"carnot2","B":[[[0,1],[1,0]]]})")); // not skew
    CHECK_THROWS(model_from_json(R"({"type":"nope"})"));
}

TEST_CASE("structure matrices are exactly skew-symmetric") {
    for (const CarnotModel& g : {heisenberg(1), heisenberg(3), random_step2_model(4, 3, 77)}) {
        for (int k = 0; k < g.m(); ++k)
            for (int i = 0; i < g.d(); ++i)
                for (int j = 0; j < g.d(); ++j)
                    CHECK(g.structure(k, i, j) == -g.structure(k, j, i));
    }
}

TEST_CASE("frame spans the tangent space at random points") {
    for (const CarnotModel& g : {heisenberg(1), random_step2_model(3, 2, 31)}) {
        auto L = g.sub_laplacian<double>();
        auto zs = g.vertical_frame<double>();
        std::mt19937_64 rng(32);
        std::uniform_real_distribution<double> uni(-3.0, 3.0);
        int n = g.dim();
        for (int rep = 0; rep < 5; ++rep) {
            std::vector<double> pt(n);
            for (auto& c : pt) c = uni(rng);
            // frame matrix rows: X_1..X_d, Z_1..Z_m evaluated at pt
            std::vector<std::vector<double>> a;
            for (const auto& X : L.horizontal) {
                std::vector<double> row(n);
                for (int i = 0; i < n; ++i) row[i] = X.coef[i].eval(pt);
                a.push_back(row);
            }
            for (const auto& Z : zs) {
                std::vector<double> row(n);
                for (int i = 0; i < n; ++i) row[i] = Z.coef[i].eval(pt);
                a.push_back(row);
            }
            // Gaussian elimination determinant
            double det = 1.0;
            for (int col = 0; col < n; ++col) {
                int piv = col;
                for (int r = col; r < n; ++r)
                    if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
                if (piv != col) { std::swap(a[piv], a[col]); det = -det; }
                det *= a[col][col];
                if (a[col][col] == 0.0) break;
                for (int r = col + 1; r < n; ++r) {
                    double f = a[r][col] / a[col][col];
                    for (int c2 = col; c2 < n; ++c2) a[r][c2] -= f * a[col][c2];
                }
            }
            CHECK(std::abs(det) > 1e-12);
        }
    }
}
