#include "subrk/heat.hpp"

#include <cmath>
#include <stdexcept>

#include "subrk/metrics.hpp"
#include "subrk/quadrature.hpp"
#include "subrk/util.hpp"

namespace subrk {

namespace {

// radius at which exp(-d^2/4t) drops below anything we care about
double z_cutoff(double rho, double t, double exponent = 60.0) {
    double target = 4.0 * t * exponent;
    if (h1_distance(rho, 0.0) * h1_distance(rho, 0.0) >= target) return 0.0;
    double z = std::max(t, 1e-3);
    while (h1_distance(rho, z) * h1_distance(rho, z) < target) z *= 2.0;
    return z;
}

} // namespace

double h1_heat_kernel(double t, double rho, double z, double rel_tol) {
    if (t <= 0.0) throw std::invalid_argument("h1_heat_kernel: t must be positive");
    rho = std::abs(rho);
    z = std::abs(z);
    double diag = 1.0 / (16.0 * t * t);
    // tolerance on the raw lambda-integral (result is divided by 4 pi^2)
    double abs_tol = rel_tol * diag * 4.0 * M_PI * M_PI;
    double a = t + 0.25 * rho * rho;
    // integrand bound 2.313 lambda exp(-lambda a) for lambda t >= 1
    double cut = std::max(1.0 / t, 30.0 / a);
    while (2.313 * std::exp(-cut * a) * (cut * a + 1.0) / (a * a) > 0.5 * abs_tol) cut *= 1.25;
    auto integrand = [t, rho, z](double lam) {
        double damp;
        if (lam == 0.0) {
            damp = std::exp(-rho * rho / (4.0 * t)) / t;
        } else {
            double xx = lam * t;
            double sh = std::sinh(xx);
            double cth = 1.0 / std::tanh(xx);
            if (!std::isfinite(sh)) return 0.0;
            damp = lam / sh * std::exp(-lam * rho * rho * cth / 4.0);
        }
        return damp * std::cos(lam * z);
    };
    int panels = static_cast<int>(std::min(8.0 + z * cut / M_PI, 4000.0));
    QuadResult q = adaptive_gk15_panels(integrand, 0.0, cut, 0.5 * abs_tol, panels, 40000);
    if (!q.converged) throw SolverError("h1_heat_kernel: quadrature did not converge");
    return std::max(q.value / (4.0 * M_PI * M_PI), 0.0);
}

double h1_heat_kernel_point(double t, const Point& p, double rel_tol) {
    if (p.size() != 3) throw std::invalid_argument("h1_heat_kernel_point: expect heisenberg(1) point");
    return h1_heat_kernel(t, std::hypot(p[0], p[1]), p[2], rel_tol);
}

double h1_kernel_mass(double t, double tol) {
    if (t <= 0.0) throw std::invalid_argument("h1_kernel_mass: t must be positive");
    double rho_max = std::sqrt(4.0 * t * 60.0) + 1.0;
    double inner_tol = tol / (60.0 * (1.0 + rho_max * rho_max));
    auto section = [&](double rho) {
        double zc = z_cutoff(rho, t);
        if (zc == 0.0) return 0.0;
        QuadResult in = adaptive_gk15(
            [&](double z) { return h1_heat_kernel(t, rho, z, 1e-12); }, 0.0, zc, inner_tol, 2000);
        return 4.0 * M_PI * rho * in.value; // both z signs
    };
    QuadResult out = adaptive_gk15(section, 0.0, rho_max, 0.5 * tol, 2000);
    if (!out.converged) throw SolverError("h1_kernel_mass: quadrature did not converge");
    return out.value;
}

double h1_ball_heat_content(double t, double r, double tol) {
    if (t <= 0.0 || r <= 0.0) throw std::invalid_argument("h1_ball_heat_content: t, r must be positive");
    double inner_tol = tol / (60.0 * (1.0 + r * r));
    auto section = [&](double rho) {
        double zc = h1_ball_z_extent(rho, r);
        if (zc == 0.0) return 0.0;
        QuadResult in = adaptive_gk15(
            [&](double z) { return h1_heat_kernel(t, rho, z, 1e-12); }, 0.0, zc, inner_tol, 2000);
        return 4.0 * M_PI * rho * in.value;
    };
    QuadResult out = adaptive_gk15(section, 0.0, r, 0.5 * tol, 2000);
    if (!out.converged) throw SolverError("h1_ball_heat_content: quadrature did not converge");
    return out.value;
}

double h1_ball_complement_content(double t, double r, double tol) {
    if (t <= 0.0 || r <= 0.0)
        throw std::invalid_argument("h1_ball_complement_content: t, r must be positive");
    double rho_max = r + std::sqrt(4.0 * t * 60.0) + 1.0;
    double inner_tol = tol / (60.0 * (1.0 + rho_max * rho_max));
    auto section = [&](double rho) {
        double zc = z_cutoff(rho, t);
        double zlo = rho < r ? h1_ball_z_extent(rho, r) : 0.0;
        if (zc <= zlo) return 0.0;
        QuadResult in = adaptive_gk15(
            [&](double z) { return h1_heat_kernel(t, rho, z, 1e-12); }, zlo, zc, inner_tol, 2000);
        return 4.0 * M_PI * rho * in.value;
    };
    QuadResult out = adaptive_gk15(section, 0.0, rho_max, 0.5 * tol, 4000);
    if (!out.converged)
        throw SolverError("h1_ball_complement_content: quadrature did not converge");
    return out.value;
}

double h1_semigroup_convolution_origin(double s, double t, double tol) {
    if (s <= 0.0 || t <= 0.0) throw std::invalid_argument("h1_semigroup_convolution_origin: times must be positive");
    double tm = std::max(s, t);
    double rho_max = std::sqrt(4.0 * tm * 60.0) + 1.0;
    double inner_tol = tol / (60.0 * (1.0 + rho_max * rho_max));
    auto section = [&](double rho) {
        double zc = z_cutoff(rho, tm);
        if (zc == 0.0) return 0.0;
        QuadResult in = adaptive_gk15(
            [&](double z) {
                return h1_heat_kernel(s, rho, z, 1e-12) * h1_heat_kernel(t, rho, z, 1e-12);
            },
            0.0, zc, inner_tol * std::max(1.0, 16.0 * tm * tm), 2000);
        return 4.0 * M_PI * rho * in.value;
    };
    QuadResult out = adaptive_gk15(section, 0.0, rho_max, 0.5 * tol, 2000);
    if (!out.converged) throw SolverError("h1_semigroup_convolution_origin: quadrature did not converge");
    return out.value;
}

Point DiffusionSimulator::endpoint(const Point& start, double t, std::uint64_t path_index) const {
    if (static_cast<int>(start.size()) != model.dim())
        throw std::invalid_argument("DiffusionSimulator: dimension mismatch");
    if (t <= 0.0) throw std::invalid_argument("DiffusionSimulator: t must be positive");
    int n = std::max(1, static_cast<int>(std::ceil(steps_per_unit * t)));
    double dt = t / n;
    double sdt = std::sqrt(2.0 * dt);
    std::mt19937_64 rng = stream_rng(seed, path_index);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int d = model.d(), m = model.m();
    Point p = start;
    std::vector<double> dx(d);
    for (int step = 0; step < n; ++step) {
        for (int i = 0; i < d; ++i) dx[i] = sdt * gauss(rng);
        for (int k = 0; k < m; ++k) {
            double cross = 0.0;
            for (int i = 0; i < d; ++i) {
                double xm = p[i] + 0.5 * dx[i];
                if (xm == 0.0) continue;
                for (int j = 0; j < d; ++j) cross += xm * model.structure_d(k, i, j) * dx[j];
            }
            p[d + k] += 0.5 * cross;
        }
        for (int i = 0; i < d; ++i) p[i] += dx[i];
    }
    return p;
}

McEstimate semigroup_mc(const DiffusionSimulator& sim,
                        const std::function<double(const Point&)>& f, double t, const Point& x,
                        std::size_t n_paths) {
    if (n_paths == 0) throw std::invalid_argument("semigroup_mc: need paths");
    std::size_t blocks = std::min<std::size_t>(256, n_paths);
    std::size_t per = (n_paths + blocks - 1) / blocks;
    std::vector<double> s1(blocks, 0.0), s2(blocks, 0.0);
    parallel_for(blocks, [&](std::size_t b) {
        std::size_t lo = b * per, hi = std::min(n_paths, lo + per);
        double a1 = 0.0, a2 = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            double v = f(sim.endpoint(x, t, i));
            a1 += v;
            a2 += v * v;
        }
        s1[b] = a1;
        s2[b] = a2;
    });
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        sum += s1[b];
        sum2 += s2[b];
    }
    McEstimate est;
    est.n_paths = n_paths;
    double n = static_cast<double>(n_paths);
    est.value = sum / n;
    double var = std::max(sum2 / n - est.value * est.value, 0.0);
    est.stderr_ = std::sqrt(var / n);
    return est;
}

McEstimate heat_content_mc(const DiffusionSimulator& sim, const Point& center, double r,
                           double t, std::size_t n_paths) {
    if (r <= 0.0) throw std::invalid_argument("heat_content_mc: radius must be positive");
    const CarnotModel& g = sim.model;
    auto inside = [&](const Point& p) {
        return d_cc(g, center, p).length <= r ? 1.0 : 0.0;
    };
    return semigroup_mc(sim, inside, t, center, n_paths);
}

LogDerivatives log_derivatives(const CarnotModel& g,
                               const std::function<double(const Point&, double)>& u,
                               const Point& x, double t, double h_space, double h_time) {
    if (static_cast<int>(x.size()) != g.dim())
        throw std::invalid_argument("log_derivatives: dimension mismatch");
    if (t <= h_time) throw std::invalid_argument("log_derivatives: t too small for the time stencil");
    LogDerivatives out;
    out.value = u(x, t);
    if (!(out.value > 0.0)) throw std::invalid_argument("log_derivatives: u must be positive");
    int d = g.d(), m = g.m(), n = g.dim();
    std::vector<double> du(n);
    for (int i = 0; i < n; ++i) {
        Point xp = x, xm = x;
        xp[i] += h_space;
        xm[i] -= h_space;
        du[i] = (u(xp, t) - u(xm, t)) / (2.0 * h_space);
    }
    out.du_dt = (u(x, t + h_time) - u(x, t - h_time)) / (2.0 * h_time);
    out.lu_over_u = out.du_dt / out.value;
    for (int i = 0; i < d; ++i) {
        // X_i u = d_i u + (1/2) sum_k (B^(k)^T x)_i d_{z_k} u
        double xi = du[i];
        for (int k = 0; k < m; ++k) {
            double bx = 0.0;
            for (int j = 0; j < d; ++j) bx += g.structure_d(k, j, i) * x[j];
            xi += 0.5 * bx * du[d + k];
        }
        out.gamma_ln += (xi / out.value) * (xi / out.value);
    }
    for (int k = 0; k < m; ++k) {
        double zk = du[d + k] / out.value;
        out.gamma_z_ln += zk * zk;
    }
    return out;
}

} // namespace subrk
