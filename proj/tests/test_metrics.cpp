#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "subrk/metrics.hpp"
#include "subrk/models.hpp"

using namespace subrk;

namespace {

Point rand_point(int dim, std::mt19937_64& rng, double scale = 1.5) {
    std::uniform_real_distribution<double> uni(-scale, scale);
    Point p(dim);
    for (auto& c : p) c = uni(rng);
    return p;
}

} // namespace

TEST_CASE("h1_distance closed form: axis values and scaling") {
    CHECK(h1_distance(1.0, 0.0) == doctest::Approx(1.0));
    CHECK(h1_distance(2.5, 0.0) == doctest::Approx(2.5));
    // pure vertical target: 2 sqrt(pi |z|)
    CHECK(h1_distance(0.0, 1.0) == doctest::Approx(2.0 * std::sqrt(M_PI)));
    CHECK(h1_distance(0.0, 0.25) == doctest::Approx(std::sqrt(M_PI)));
    CHECK(h1_distance(0.0, 0.0) == 0.0);

    // homogeneity d(lam r, lam^2 z) = lam d(r, z)
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.05, 2.0);
    for (int rep = 0; rep < 40; ++rep) {
        double r = uni(rng), z = uni(rng) - 1.0, lam = uni(rng);
        CHECK(h1_distance(lam * r, lam * lam * z)
              == doctest::Approx(lam * h1_distance(r, z)).epsilon(1e-12));
    }

    // continuity across the branch boundaries
    CHECK(h1_distance(1e-10, 0.3) == doctest::Approx(2.0 * std::sqrt(M_PI * 0.3)).epsilon(1e-6));
    CHECK(h1_distance(1.0, 1e-13) == doctest::Approx(1.0).epsilon(1e-9));

    // monotone in each argument
    CHECK(h1_distance(1.0, 0.5) > h1_distance(1.0, 0.2));
    CHECK(h1_distance(1.5, 0.5) > h1_distance(1.0, 0.5));
}

TEST_CASE("h1_distance agrees with an independent arclength evaluation") {
    // reconstruct the minimizing curve t -> (r(t), z(t)) for the solved phase
    // and integrate its sub-Riemannian speed numerically
    for (auto [r, z] : {std::pair{1.0, 0.3}, {0.7, -0.9}, {2.0, 0.05}, {0.2, 1.3}}) {
        double d = h1_distance(r, z);
        // the geodesic from the origin with |u0| = d and curvature k has
        // horizontal projection a circle arc; recover k from r = 2 sin(phi)/k
        // with phi = k/2 (unit time), then length = |u0|
        double za = std::abs(z);
        double lo = 1e-12, hi = M_PI - 1e-12;
        auto ratio = [](double phi) {
            double s = std::sin(phi);
            return (2.0 * phi - std::sin(2.0 * phi)) / (8.0 * s * s);
        };
        for (int it = 0; it < 90; ++it) {
            double mid = 0.5 * (lo + hi);
            (ratio(mid) < za / (r * r) ? lo : hi) = mid;
        }
        double phi = 0.5 * (lo + hi);
        // unit-time geodesic: total turning 2*phi, constant speed phi*r/sin(phi)
        double k = 2.0 * phi;
        double speed = phi * r / std::sin(phi); // = |u0|
        // verify the endpoint by explicit integration of the arc
        int n = 20000;
        double x1 = 0.0, x2 = 0.0, zz = 0.0, h = 1.0 / n;
        for (int i = 0; i < n; ++i) {
            double t = (i + 0.5) * h;
            double u1 = speed * std::cos(k * t), u2 = -speed * std::sin(k * t);
            zz += 0.5 * (x1 * u2 - x2 * u1) * h;
            x1 += u1 * h;
            x2 += u2 * h;
        }
        CHECK(std::sqrt(x1 * x1 + x2 * x2) == doctest::Approx(r).epsilon(1e-6));
        CHECK(std::abs(zz) == doctest::Approx(za).epsilon(1e-5));
        CHECK(d == doctest::Approx(speed).epsilon(1e-12));
    }
}

TEST_CASE("h1_ball_z_extent") {
    // at rho = 0 the extent solves 2 sqrt(pi zeta) = r
    CHECK(h1_ball_z_extent(0.0, 1.0) == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(1e-9));
    CHECK(h1_ball_z_extent(0.0, 2.0) == doctest::Approx(1.0 / M_PI).epsilon(1e-9));
    CHECK(h1_ball_z_extent(1.0, 1.0) == 0.0);
    CHECK(h1_ball_z_extent(1.5, 1.0) == 0.0);
    double zeta = h1_ball_z_extent(0.5, 1.0);
    CHECK(h1_distance(0.5, zeta) == doctest::Approx(1.0).epsilon(1e-9));
    // the extent is not monotone in rho: the unit sphere is tallest at
    // rho = 2/pi, z = 1/(2*pi) (half-turn geodesics), not on the axis
    CHECK(h1_distance(2.0 / M_PI, 1.0 / (2.0 * M_PI)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(h1_ball_z_extent(2.0 / M_PI, 1.0)
          == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-7));
    CHECK(h1_ball_z_extent(2.0 / M_PI, 1.0) > h1_ball_z_extent(0.0, 1.0));
}

TEST_CASE("d_cc on the Heisenberg group: metric axioms and invariance") {
    CarnotModel g = heisenberg(1);
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 50; ++rep) {
        Point a = rand_point(3, rng), b = rand_point(3, rng), c = rand_point(3, rng);
        double dab = d_cc(g, a, b).length;
        double dba = d_cc(g, b, a).length;
        double dac = d_cc(g, a, c).length;
        double dcb = d_cc(g, c, b).length;
        CHECK(dab == doctest::Approx(dba).epsilon(1e-10));
        CHECK(dab <= dac + dcb + 1e-6);
        CHECK(dab >= 0.0);
        // left-invariance
        Point t = rand_point(3, rng);
        double dt = d_cc(g, group_law(g, t, a), group_law(g, t, b)).length;
        CHECK(dt == doctest::Approx(dab).epsilon(1e-10));
        // dilation homogeneity
        double lam = 0.5 + std::abs(rand_point(1, rng)[0]);
        double dl = d_cc(g, dilation(g, lam, a), dilation(g, lam, b)).length;
        CHECK(dl == doctest::Approx(lam * dab).epsilon(1e-10));
    }
    // identity of indiscernibles
    Point p = {0.3, -0.2, 0.7};
    CHECK(d_cc(g, p, p).length == 0.0);
    CHECK(d_cc(g, p, Point{0.3, -0.2, 0.700001}).length > 0.0);
}

TEST_CASE("geodesic shooting matches the closed form on a rescaled Heisenberg model") {
    // B = 2J is not detected as the standard basis, so distances go through the
    // boundary-value solver; the model is H^1 with z read in doubled units.
    CarnotModel g(2, 1, {{{Rational(0), Rational(2)}, {Rational(-2), Rational(0)}}}, "h1x2");
    CHECK_FALSE(g.is_heisenberg());
    std::vector<Point> targets = {
        {1.0, 0.0, 0.0}, {1.0, 0.0, 0.4}, {0.3, -0.7, 0.2},
        {0.0, 0.0, 0.5}, {1.2, 0.5, -0.8}, {-0.4, 0.9, 0.05},
    };
    Point origin = {0.0, 0.0, 0.0};
    for (const Point& y : targets) {
        double expect = h1_distance(std::hypot(y[0], y[1]), y[2] / 2.0);
        GeodesicResult res = d_cc(g, origin, y);
        CHECK(res.converged);
        CHECK(res.length == doctest::Approx(expect).epsilon(2e-5));
        // path endpoints
        REQUIRE(res.path.size() >= 2);
        for (int i = 0; i < 3; ++i) {
            CHECK(res.path.front()[i] == doctest::Approx(origin[i]).epsilon(1e-7));
            CHECK(std::abs(res.path.back()[i] - y[i]) < 1e-6);
        }
    }
}

TEST_CASE("path-energy minimizer agrees with the closed form under refinement") {
    CarnotModel g = heisenberg(1);
    Point origin = {0.0, 0.0, 0.0};
    for (const Point& y : {Point{1.0, 0.0, 0.3}, Point{0.5, -0.4, -0.2}}) {
        double expect = h1_distance(std::hypot(y[0], y[1]), y[2]);
        PathEnergyOptions o32, o64;
        o32.segments = 32;
        o64.segments = 64;
        GeodesicResult r32 = path_energy_distance(g, origin, y, 0.0, o32);
        GeodesicResult r64 = path_energy_distance(g, origin, y, 0.0, o64);
        CHECK(r32.converged);
        CHECK(r64.converged);
        CHECK(r64.length == doctest::Approx(expect).epsilon(5e-3));
        // second-order accuracy: Richardson in the segment count
        double extrap = (4.0 * r64.length - r32.length) / 3.0;
        CHECK(extrap == doctest::Approx(expect).epsilon(1e-4));
    }
}

TEST_CASE("path-energy minimizer handles purely vertical targets") {
    CarnotModel g = heisenberg(1);
    Point origin = {0.0, 0.0, 0.0};
    Point y = {0.0, 0.0, 0.4};
    GeodesicResult res = path_energy_distance(g, origin, y, 0.0);
    CHECK(res.converged);
    CHECK(res.length == doctest::Approx(2.0 * std::sqrt(M_PI * 0.4)).epsilon(5e-3));
}

TEST_CASE("d_tau: limits, monotonicity and the vertical family") {
    CarnotModel g = heisenberg(1);
    Point origin = {0.0, 0.0, 0.0};
    Point y = {0.8, 0.2, 0.3};

    double dcc = d_cc(g, origin, y).length;
    GeodesicResult small_tau = d_tau(g, origin, y, 0.02);
    CHECK(small_tau.converged);
    CHECK(small_tau.length <= dcc + 1e-8);
    CHECK(small_tau.length == doctest::Approx(dcc).epsilon(0.02));

    MonotonicityReport rep = monotonicity_check(g, origin, y, {0.1, 0.5, 1.0, 2.0, 10.0});
    CHECK(rep.pass);
    CHECK(rep.dists.size() == 5);
    CHECK(rep.dists.back() < rep.dists.front());
    CHECK_THROWS_AS(monotonicity_check(g, origin, y, {1.0, 0.5}), std::invalid_argument);

    // vertical targets at tau = 1: cost approaches |z| / tau as z -> 0
    for (double h : {0.02, 0.05}) {
        GeodesicResult r = d_tau(g, origin, {0.0, 0.0, h}, 1.0);
        CHECK(r.converged);
        CHECK(r.length <= h + 1e-7);
        CHECK(r.length >= 0.9 * h);
    }
}

TEST_CASE("d_tau agrees with the path-energy minimizer") {
    CarnotModel g = heisenberg(1);
    Point origin = {0.0, 0.0, 0.0};
    Point y = {0.8, 0.2, 0.3};
    double tau = 0.7;
    GeodesicResult shot = d_tau(g, origin, y, tau);
    PathEnergyOptions o32, o64;
    o32.segments = 32;
    o64.segments = 64;
    GeodesicResult p32 = path_energy_distance(g, origin, y, tau, o32);
    GeodesicResult p64 = path_energy_distance(g, origin, y, tau, o64);
    CHECK(shot.converged);
    CHECK(p64.converged);
    double extrap = (4.0 * p64.length - p32.length) / 3.0;
    CHECK(shot.length == doctest::Approx(extrap).epsilon(1e-4));
}

TEST_CASE("shooting on a generic step-2 model satisfies metric sanity checks") {
    CarnotModel g = random_step2_model(3, 2, 21);
    Point origin(g.dim(), 0.0);
    std::mt19937_64 rng(22);
    for (int rep = 0; rep < 4; ++rep) {
        Point y = rand_point(g.dim(), rng, 0.8);
        GeodesicResult ab = d_cc(g, origin, y);
        GeodesicResult ba = d_cc(g, y, origin);
        CHECK(ab.converged);
        CHECK(ba.converged);
        CHECK(ab.length == doctest::Approx(ba.length).epsilon(1e-5));
        // horizontal chord lower bound
        double chord = 0.0;
        for (int i = 0; i < g.d(); ++i) chord += y[i] * y[i];
        CHECK(ab.length >= std::sqrt(chord) - 1e-7);
        // cross-check against the independent discretized minimizer
        GeodesicResult pe = path_energy_distance(g, origin, y, 0.0);
        CHECK(pe.converged);
        CHECK(ab.length <= pe.length + 5e-3);
        CHECK(ab.length == doctest::Approx(pe.length).epsilon(2e-2));
    }
}

TEST_CASE("ball_volume matches a radial quadrature oracle on H^1") {
    CarnotModel g = heisenberg(1);
    // V = int_0^r 2 pi rho * 2 zeta(rho) drho by midpoint rule
    auto oracle_volume = [&](double r) {
        int n = 4000;
        double acc = 0.0, h = r / n;
        for (int i = 0; i < n; ++i) {
            double rho = (i + 0.5) * h;
            acc += 2.0 * M_PI * rho * 2.0 * h1_ball_z_extent(rho, r) * h;
        }
        return acc;
    };
    double v1 = oracle_volume(1.0);
    Point origin = {0.0, 0.0, 0.0};
    VolumeEstimate est = ball_volume(g, origin, 1.0, TauMetric{0.0}, 200000, 42);
    CHECK(est.failure_rate == 0.0);
    CHECK(std::abs(est.value - v1) < 3.0 * est.stderr_);

    // homogeneity V(r) = r^4 V(1) against the oracle, and translation invariance
    CHECK(oracle_volume(0.5) == doctest::Approx(std::pow(0.5, 4) * v1).epsilon(1e-3));
    Point off = {0.7, -0.4, 0.9};
    VolumeEstimate est_off = ball_volume(g, off, 1.0, TauMetric{0.0}, 200000, 43);
    CHECK(std::abs(est_off.value - v1) < 3.0 * std::hypot(est_off.stderr_, est.stderr_));
}

TEST_CASE("ball_volume is deterministic and worker-count independent") {
    CarnotModel g = heisenberg(1);
    Point origin = {0.0, 0.0, 0.0};
    VolumeEstimate a = ball_volume(g, origin, 1.0, TauMetric{0.0}, 20000, 7);
    VolumeEstimate b = ball_volume(g, origin, 1.0, TauMetric{0.0}, 20000, 7);
    CHECK(a.value == b.value);
    CHECK(a.stderr_ == b.stderr_);
    setenv("SUBRK_WORKERS", "1", 1);
    VolumeEstimate c = ball_volume(g, origin, 1.0, TauMetric{0.0}, 20000, 7);
    setenv("SUBRK_WORKERS", "3", 1);
    VolumeEstimate d = ball_volume(g, origin, 1.0, TauMetric{0.0}, 20000, 7);
    unsetenv("SUBRK_WORKERS");
    CHECK(a.value == c.value);
    CHECK(a.value == d.value);
    VolumeEstimate e = ball_volume(g, origin, 1.0, TauMetric{0.0}, 20000, 8);
    CHECK(e.value != a.value); // different seed, different draw
}

TEST_CASE("tau-metric balls contain the cc ball and ball_inclusion_check works") {
    CarnotModel g = heisenberg(1);
    Point origin = {0.0, 0.0, 0.0};
    double R = 0.4, tau = 1.0;
    VolumeEstimate vtau = ball_volume(g, origin, R, TauMetric{tau}, 1500, 5);
    VolumeEstimate vcc = ball_volume(g, origin, R, TauMetric{0.0}, 1500, 5);
    CHECK(vtau.value > vcc.value - 3.0 * std::hypot(vtau.stderr_, vcc.stderr_));

    BallInclusionReport ok = ball_inclusion_check(g, origin, R, tau, 12.0, 12, 9);
    CHECK(ok.pass);
    CHECK(ok.n_samples == 12);
    CHECK(ok.worst_ratio <= 1.0);
    BallInclusionReport bad = ball_inclusion_check(g, origin, R, tau, 0.05, 12, 9);
    CHECK_FALSE(bad.pass);
    CHECK(bad.violations > 0);
    CHECK_FALSE(bad.witnesses.empty());
}

TEST_CASE("argument validation") {
    CarnotModel g = heisenberg(1);
    Point origin = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(d_cc(g, {0.0, 0.0}, origin), std::invalid_argument);
    CHECK_THROWS_AS(ball_volume(g, origin, 0.0, TauMetric{0.0}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(ball_bounding_box(g, origin, -1.0, 0.0), std::invalid_argument);
}
