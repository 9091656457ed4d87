#include "subrk/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "subrk/util.hpp"

namespace subrk {

namespace {

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

// (2*phi - sin(2*phi)) / (8*sin(phi)^2), increasing on (0, pi); equals |z|/r^2
// along the minimizing geodesic from the origin to (r, z) on the Heisenberg group.
double vertical_ratio(double phi) {
    double s = std::sin(phi);
    return (2.0 * phi - std::sin(2.0 * phi)) / (8.0 * s * s);
}

// Solve small dense symmetric systems (Gauss-Newton normal equations).
void solve_dense(std::vector<double> a, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < 1e-300) throw SolverError("singular normal equations");
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        for (int r = col + 1; r < n; ++r) {
            double f = a[r * n + col] / a[col * n + col];
            for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
        b[r] = s / a[r * n + r];
    }
}

// Normal geodesic flow of the tau-metric Hamiltonian, left-trivialized: the
// vertical covector w is constant, u = horizontal velocity satisfies
// u' = -Omega u with Omega = sum_k w_k B^(k), and
// x' = u, z_k' = <B^(k)^T x, u>/2 + tau^2 w_k.
struct GeodesicFlow {
    const CarnotModel* g;
    double tau2;
    std::vector<double> w;     // m
    std::vector<double> omega; // d x d, row major

    void set_w(const std::vector<double>& wv) {
        w = wv;
        int d = g->d(), m = g->m();
        omega.assign(static_cast<std::size_t>(d) * d, 0.0);
        for (int k = 0; k < m; ++k) {
            if (w[k] == 0.0) continue;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) omega[i * d + j] -= w[k] * g->structure_d(k, i, j);
        }
    }

    // state layout: u[0..d), x[d..2d), z[2d..2d+m)
    void deriv(const std::vector<double>& s, std::vector<double>& ds) const {
        int d = g->d(), m = g->m();
        for (int i = 0; i < d; ++i) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j) acc += omega[i * d + j] * s[j];
            ds[i] = acc;
            ds[d + i] = s[i];
        }
        for (int k = 0; k < m; ++k) {
            double acc = 0.0;
            for (int i = 0; i < d; ++i) {
                double xi = s[d + i];
                if (xi == 0.0) continue;
                for (int j = 0; j < d; ++j) acc += xi * g->structure_d(k, i, j) * s[j];
            }
            ds[2 * d + k] = 0.5 * acc + tau2 * w[k];
        }
    }
};

void rk4_step(const GeodesicFlow& flow, std::vector<double>& s, double h,
              std::vector<double>& k1, std::vector<double>& k2, std::vector<double>& k3,
              std::vector<double>& k4, std::vector<double>& tmp) {
    std::size_t n = s.size();
    flow.deriv(s, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
    flow.deriv(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
    flow.deriv(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + h * k3[i];
    flow.deriv(tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
        s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

struct ShootContext {
    const CarnotModel* g;
    double tau;
    std::vector<double> dx; // horizontal target (origin-based)
    std::vector<double> dz; // vertical target
    int base_steps;
};

int step_count(const ShootContext& ctx, const std::vector<double>& theta) {
    int d = ctx.g->d(), m = ctx.g->m();
    double wn = 0.0;
    for (int k = 0; k < m; ++k) wn += theta[d + k] * theta[d + k];
    double omega_norm = std::sqrt(wn) * ctx.g->structure_norm_bound();
    int n = ctx.base_steps + static_cast<int>(64.0 * omega_norm);
    return std::min(n, 4000);
}

// integrate unit-time flow from the origin; fills endpoint (x(1), z(1)) into out
void integrate(const ShootContext& ctx, const std::vector<double>& theta, int n_steps,
               std::vector<double>& out, std::vector<Point>* path = nullptr,
               int path_points = 0) {
    int d = ctx.g->d(), m = ctx.g->m();
    GeodesicFlow flow;
    flow.g = ctx.g;
    flow.tau2 = ctx.tau * ctx.tau;
    flow.set_w(std::vector<double>(theta.begin() + d, theta.end()));
    std::vector<double> s(2 * d + m, 0.0);
    for (int i = 0; i < d; ++i) s[i] = theta[i];
    std::vector<double> k1(s.size()), k2(s.size()), k3(s.size()), k4(s.size()), tmp(s.size());
    double h = 1.0 / n_steps;
    int record_every = path_points > 1 ? std::max(1, n_steps / (path_points - 1)) : 0;
    if (path) {
        path->clear();
        path->push_back(Point(s.begin() + d, s.end()));
    }
    for (int step = 0; step < n_steps; ++step) {
        rk4_step(flow, s, h, k1, k2, k3, k4, tmp);
        if (path && record_every > 0 && ((step + 1) % record_every == 0 || step + 1 == n_steps))
            path->push_back(Point(s.begin() + d, s.end()));
    }
    out.assign(s.begin() + d, s.end());
}

void shoot_residual(const ShootContext& ctx, const std::vector<double>& theta,
                    std::vector<double>& r) {
    int d = ctx.g->d(), m = ctx.g->m();
    std::vector<double> end;
    integrate(ctx, theta, step_count(ctx, theta), end);
    r.resize(d + m);
    for (int i = 0; i < d; ++i) r[i] = end[i] - ctx.dx[i];
    for (int k = 0; k < m; ++k) r[d + k] = end[d + k] - ctx.dz[k];
}

struct GNResult {
    std::vector<double> theta;
    double res_norm = 1e300;
    bool ok = false;
};

GNResult gauss_newton(const ShootContext& ctx, std::vector<double> theta,
                      const ShootingOptions& opts) {
    int n = static_cast<int>(theta.size());
    std::vector<double> r, r_try, jac(static_cast<std::size_t>(n) * n);
    shoot_residual(ctx, theta, r);
    double f = norm2(r);
    double lam = 1e-3;
    for (int it = 0; it < opts.max_iterations && f >= opts.bv_tol; ++it) {
        // forward-difference Jacobian of the endpoint map
        for (int j = 0; j < n; ++j) {
            double eps = 1e-6 * std::max(1.0, std::abs(theta[j]));
            std::vector<double> tp = theta;
            tp[j] += eps;
            shoot_residual(ctx, tp, r_try);
            for (int i = 0; i < n; ++i) jac[i * n + j] = (r_try[i] - r[i]) / eps;
        }
        std::vector<double> grad(n, 0.0), jtj(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k) acc += jac[k * n + i] * jac[k * n + j];
                jtj[i * n + j] = acc;
            }
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) grad[i] += jac[k * n + i] * r[k];
        bool accepted = false;
        for (int tries = 0; tries < 24; ++tries) {
            std::vector<double> a = jtj, delta(n);
            for (int i = 0; i < n; ++i) {
                a[i * n + i] += lam * std::max(jtj[i * n + i], 1e-12) + 1e-14;
                delta[i] = -grad[i];
            }
            try {
                solve_dense(a, delta, n);
            } catch (const SolverError&) {
                lam *= 10.0;
                continue;
            }
            std::vector<double> tp = theta;
            for (int i = 0; i < n; ++i) tp[i] += delta[i];
            shoot_residual(ctx, tp, r_try);
            double f_try = norm2(r_try);
            if (f_try < f) {
                theta = tp;
                r = r_try;
                f = f_try;
                lam = std::max(lam * 0.3, 1e-12);
                accepted = true;
                break;
            }
            lam *= 10.0;
            if (lam > 1e10) break;
        }
        if (!accepted) break;
    }
    GNResult out;
    out.theta = std::move(theta);
    out.res_norm = f;
    out.ok = f < opts.bv_tol;
    return out;
}

int step_count_w(const ShootContext& ctx, const std::vector<double>& w) {
    double omega_norm = norm2(w) * ctx.g->structure_norm_bound();
    return std::min(ctx.base_steps + static_cast<int>(64.0 * omega_norm), 4000);
}

// Fundamental horizontal solution for fixed w: returns M with x(1) = M u0.
void horizontal_transfer(const ShootContext& ctx, const std::vector<double>& w, int n_steps,
                         std::vector<double>& mout) {
    int d = ctx.g->d(), m = ctx.g->m();
    std::vector<double> omega(static_cast<std::size_t>(d) * d, 0.0);
    for (int k = 0; k < m; ++k) {
        if (w[k] == 0.0) continue;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) omega[i * d + j] -= w[k] * ctx.g->structure_d(k, i, j);
    }
    // state: U (u-propagator) then X = int U
    std::vector<double> s(2 * d * d, 0.0);
    for (int i = 0; i < d; ++i) s[i * d + i] = 1.0;
    auto deriv = [&](const std::vector<double>& st, std::vector<double>& ds) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double acc = 0.0;
                for (int l = 0; l < d; ++l) acc += omega[i * d + l] * st[l * d + j];
                ds[i * d + j] = acc;
                ds[d * d + i * d + j] = st[i * d + j];
            }
    };
    std::size_t n = s.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    double h = 1.0 / n_steps;
    for (int step = 0; step < n_steps; ++step) {
        deriv(s, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
        deriv(tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
        deriv(tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + h * k3[i];
        deriv(tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    mout.assign(s.begin() + d * d, s.end());
}

// Eliminate u0 = M(w)^{-1} dx and evaluate the remaining vertical residual.
bool reduced_eval(const ShootContext& ctx, const std::vector<double>& w,
                  std::vector<double>& theta_out, std::vector<double>& rz, double& full_res) {
    int d = ctx.g->d(), m = ctx.g->m();
    int n_steps = step_count_w(ctx, w);
    std::vector<double> mmat;
    horizontal_transfer(ctx, w, n_steps, mmat);
    std::vector<double> u0 = ctx.dx;
    try {
        solve_dense(mmat, u0, d);
    } catch (const SolverError&) {
        return false;
    }
    // reject unstable solves near conjugate values of w
    double chk = 0.0;
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += mmat[i * d + j] * u0[j];
        chk += (acc - ctx.dx[i]) * (acc - ctx.dx[i]);
    }
    if (!(std::sqrt(chk) <= 1e-7 * (1.0 + norm2(ctx.dx)))) return false;
    theta_out.assign(d + m, 0.0);
    for (int i = 0; i < d; ++i) theta_out[i] = u0[i];
    for (int k = 0; k < m; ++k) theta_out[d + k] = w[k];
    std::vector<double> r;
    shoot_residual(ctx, theta_out, r);
    full_res = norm2(r);
    rz.assign(r.begin() + d, r.end());
    return true;
}

struct Candidate {
    std::vector<double> theta;
    double res_norm = 1e300;
    bool ok = false;
};

// m = 1: scan a symmetric w grid, bisect every sign change of the vertical
// residual. Finds all extremals with |w| <= S joining the endpoints.
void reduced_roots_scan(const ShootContext& ctx, const ShootingOptions& opts,
                        std::vector<Candidate>& out) {
    double bnorm = std::max(ctx.g->structure_norm_bound(), 0.1);
    double S = 12.9 / bnorm;
    std::vector<double> ws;
    int grid = 64;
    for (int i = 0; i <= grid; ++i) ws.push_back(-S + 2.0 * S * i / grid);
    if (ctx.tau > 0.0) {
        double t2 = ctx.tau * ctx.tau;
        ws.push_back(ctx.dz[0] / (t2 + 0.05));
        std::sort(ws.begin(), ws.end());
    }
    std::vector<double> rz, theta;
    double fres;
    std::vector<char> valid(ws.size(), 0);
    std::vector<double> vals(ws.size(), 0.0);
    for (std::size_t i = 0; i < ws.size(); ++i) {
        if (reduced_eval(ctx, {ws[i]}, theta, rz, fres)) {
            valid[i] = 1;
            vals[i] = rz[0];
            if (fres < opts.bv_tol) out.push_back({theta, fres, true});
        }
    }
    for (std::size_t i = 0; i + 1 < ws.size(); ++i) {
        if (!valid[i] || !valid[i + 1]) continue;
        if (vals[i] == 0.0 || vals[i] * vals[i + 1] > 0.0) continue;
        double lo = ws[i], hi = ws[i + 1], flo = vals[i];
        bool bad = false;
        for (int it = 0; it < 70 && !bad; ++it) {
            double mid = 0.5 * (lo + hi);
            if (!reduced_eval(ctx, {mid}, theta, rz, fres)) {
                bad = true;
                break;
            }
            if (rz[0] == 0.0) break;
            if (rz[0] * flo > 0.0) {
                lo = mid;
                flo = rz[0];
            } else {
                hi = mid;
            }
        }
        if (bad) continue;
        if (reduced_eval(ctx, {0.5 * (lo + hi)}, theta, rz, fres) && fres < opts.bv_tol)
            out.push_back({theta, fres, true});
    }
}

// m >= 2: damped Gauss-Newton on the reduced vertical residual from a
// deterministic grid of w starts.
void reduced_roots_newton(const ShootContext& ctx, const ShootingOptions& opts,
                          std::vector<Candidate>& out) {
    int m = ctx.g->m();
    double bnorm = std::max(ctx.g->structure_norm_bound(), 0.1);
    std::vector<std::vector<double>> dirs;
    double dzn = norm2(ctx.dz);
    if (dzn > 1e-12) {
        std::vector<double> wd(m);
        for (int k = 0; k < m; ++k) wd[k] = ctx.dz[k] / dzn;
        dirs.push_back(wd);
    }
    for (int k = 0; k < m; ++k) {
        std::vector<double> e(m, 0.0);
        e[k] = 1.0;
        dirs.push_back(e);
    }
    std::vector<std::vector<double>> starts;
    starts.push_back(std::vector<double>(m, 0.0));
    if (ctx.tau > 0.0) {
        double t2 = ctx.tau * ctx.tau;
        std::vector<double> w(m);
        for (int k = 0; k < m; ++k) w[k] = ctx.dz[k] / (t2 + 0.05);
        starts.push_back(w);
    }
    for (double s : {1.0, -1.0, 3.1, -3.1, 6.3, -6.3, 9.4, -9.4}) {
        for (const auto& dir : dirs) {
            std::vector<double> w(m);
            for (int k = 0; k < m; ++k) w[k] = s * dir[k] / bnorm;
            starts.push_back(w);
        }
    }
    std::vector<double> rz, rz_try, theta;
    double fres;
    for (auto w : starts) {
        if (!reduced_eval(ctx, w, theta, rz, fres)) continue;
        double f = norm2(rz);
        double lam = 1e-3;
        for (int it = 0; it < 60 && f >= opts.bv_tol; ++it) {
            std::vector<double> jac(static_cast<std::size_t>(m) * m);
            bool jac_ok = true;
            for (int j = 0; j < m && jac_ok; ++j) {
                double eps = 1e-6 * std::max(1.0, std::abs(w[j]));
                std::vector<double> wp = w;
                wp[j] += eps;
                std::vector<double> th2;
                if (!reduced_eval(ctx, wp, th2, rz_try, fres)) {
                    jac_ok = false;
                    break;
                }
                for (int i = 0; i < m; ++i) jac[i * m + j] = (rz_try[i] - rz[i]) / eps;
            }
            if (!jac_ok) break;
            bool accepted = false;
            for (int tries = 0; tries < 20; ++tries) {
                std::vector<double> a(static_cast<std::size_t>(m) * m, 0.0), g(m, 0.0);
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j)
                        for (int k = 0; k < m; ++k) a[i * m + j] += jac[k * m + i] * jac[k * m + j];
                for (int i = 0; i < m; ++i)
                    for (int k = 0; k < m; ++k) g[i] -= jac[k * m + i] * rz[k];
                for (int i = 0; i < m; ++i) a[i * m + i] += lam * std::max(a[i * m + i], 1e-12);
                try {
                    solve_dense(a, g, m);
                } catch (const SolverError&) {
                    lam *= 10.0;
                    continue;
                }
                std::vector<double> wp = w;
                for (int i = 0; i < m; ++i) wp[i] += g[i];
                std::vector<double> th2;
                if (reduced_eval(ctx, wp, th2, rz_try, fres) && norm2(rz_try) < f) {
                    w = wp;
                    theta = th2;
                    rz = rz_try;
                    f = norm2(rz);
                    lam = std::max(lam * 0.3, 1e-12);
                    accepted = true;
                    break;
                }
                lam *= 10.0;
                if (lam > 1e10) break;
            }
            if (!accepted) break;
        }
        if (f < opts.bv_tol && reduced_eval(ctx, w, theta, rz, fres) && fres < opts.bv_tol)
            out.push_back({theta, fres, true});
    }
}

double theta_energy(const std::vector<double>& theta, int d, double tau) {
    double e = 0.0;
    for (int i = 0; i < d; ++i) e += theta[i] * theta[i];
    double t2 = tau * tau;
    for (std::size_t k = d; k < theta.size(); ++k) e += t2 * theta[k] * theta[k];
    return e;
}

// Deterministic multistart list around the target (dx, dz).
std::vector<std::vector<double>> make_starts(const ShootContext& ctx, int n_starts) {
    int d = ctx.g->d(), m = ctx.g->m();
    double bnorm = std::max(ctx.g->structure_norm_bound(), 0.1);
    std::vector<double> wdir(m, 0.0);
    double dznorm = norm2(ctx.dz);
    if (dznorm > 1e-12)
        for (int k = 0; k < m; ++k) wdir[k] = ctx.dz[k] / dznorm;
    else
        wdir[0] = 1.0;
    double dz1 = 0.0;
    for (double c : ctx.dz) dz1 += std::abs(c);
    // |u0| scale that can sweep the required signed area
    double amp = std::max(0.15, 0.8 * std::sqrt(4.0 * M_PI * dz1));

    std::vector<std::vector<double>> starts;
    auto push = [&](double wscale, int pert_axis, double pert) {
        std::vector<double> th(d + m, 0.0);
        for (int i = 0; i < d; ++i) th[i] = ctx.dx[i];
        if (pert != 0.0) th[pert_axis % d] += pert;
        for (int k = 0; k < m; ++k) th[d + k] = wscale * wdir[k] / bnorm;
        starts.push_back(std::move(th));
    };

    push(0.0, 0, 0.0);
    if (ctx.tau > 0.0) {
        std::vector<double> th(d + m, 0.0);
        for (int i = 0; i < d; ++i) th[i] = ctx.dx[i];
        double t2 = ctx.tau * ctx.tau;
        for (int k = 0; k < m; ++k) th[d + k] = ctx.dz[k] / (t2 + 0.05);
        starts.push_back(std::move(th));
    } else {
        push(12.6, 0, amp);
    }
    const double scales[] = {0.6, -0.6, 1.6, -1.6, 3.1, -3.1, 4.7, -4.7,
                             6.3, -6.3, 7.9, -7.9, 9.4, -9.4};
    int axis = 0;
    for (double s : scales) {
        if (static_cast<int>(starts.size()) >= n_starts) break;
        push(s, axis++, amp);
    }
    while (static_cast<int>(starts.size()) < n_starts) push(2.2 * starts.size(), axis++, amp);
    return starts;
}

// Full multistart boundary-value solve; early_exit_below > 0 stops as soon as
// some converged extremal is at most that long (membership queries).
GeodesicResult solve_bvp(const CarnotModel& g, const Point& x, const Point& y, double tau,
                         const ShootingOptions& opts, double early_exit_below = 0.0) {
    Point delta = group_law(g, group_inverse(g, x), y);
    int d = g.d(), m = g.m();
    ShootContext ctx;
    ctx.g = &g;
    ctx.tau = tau;
    ctx.dx.assign(delta.begin(), delta.begin() + d);
    ctx.dz.assign(delta.begin() + d, delta.end());
    ctx.base_steps = opts.base_rk_steps;

    if (norm2(ctx.dx) < 1e-14 && norm2(ctx.dz) < 1e-14) {
        GeodesicResult res;
        res.length = 0.0;
        res.converged = true;
        res.path = {x, y};
        return res;
    }

    std::vector<Candidate> cands;
    double dxn = norm2(ctx.dx), dzn = norm2(ctx.dz);
    if (dxn > 1e-9 * (1.0 + dzn)) {
        if (m == 1)
            reduced_roots_scan(ctx, opts, cands);
        else
            reduced_roots_newton(ctx, opts, cands);
    }
    bool have_reduced = false;
    for (const auto& c : cands) have_reduced = have_reduced || c.ok;
    // full boundary-value iteration for (near-)vertical targets, where the
    // horizontal transfer matrix is singular along the minimizer
    if (!have_reduced || dxn < 0.1 * std::sqrt(dzn)) {
        for (const auto& start : make_starts(ctx, opts.n_starts)) {
            GNResult r = gauss_newton(ctx, start, opts);
            cands.push_back({r.theta, r.res_norm, r.ok});
            if (r.ok && early_exit_below > 0.0 &&
                std::sqrt(theta_energy(r.theta, d, tau)) <= early_exit_below)
                break;
        }
    }
    Candidate pick;
    for (const auto& c : cands) {
        if (c.theta.empty()) continue;
        bool better;
        if (pick.theta.empty())
            better = true;
        else if (c.ok != pick.ok)
            better = c.ok;
        else if (c.ok)
            better = theta_energy(c.theta, d, tau) < theta_energy(pick.theta, d, tau);
        else
            better = c.res_norm < pick.res_norm;
        if (better) pick = c;
    }
    GeodesicResult res;
    res.converged = pick.ok;
    res.residual = pick.res_norm;
    if (!pick.theta.empty()) {
        res.length = std::sqrt(theta_energy(pick.theta, d, tau));
        std::vector<double> end;
        std::vector<Point> raw;
        integrate(ctx, pick.theta, step_count(ctx, pick.theta), end, &raw, opts.path_points);
        res.path.reserve(raw.size());
        for (const auto& p : raw) res.path.push_back(group_law(g, x, p));
    }
    return res;
}

void check_point(const CarnotModel& g, const Point& p, const char* who) {
    if (static_cast<int>(p.size()) != g.dim()) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

} // namespace

double h1_distance(double r, double z) {
    r = std::abs(r);
    z = std::abs(z);
    if (z < 1e-300) return r;
    if (r < 1e-14 * std::max(1.0, std::sqrt(z))) return 2.0 * std::sqrt(M_PI * z);
    double target = z / (r * r);
    if (target < 1e-14) return r;
    // vertical_ratio is increasing from 0 to infinity on (0, pi)
    double lo = 1e-12, hi = M_PI - 1e-12;
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        if (vertical_ratio(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    double phi = 0.5 * (lo + hi);
    return phi * r / std::sin(phi);
}

double h1_ball_z_extent(double rho, double r) {
    rho = std::abs(rho);
    if (r <= 0.0 || rho >= r) return 0.0;
    double hi = r * r;
    while (h1_distance(rho, hi) < r) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (h1_distance(rho, mid) < r)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

GeodesicResult d_cc(const CarnotModel& g, const Point& x, const Point& y,
                    const ShootingOptions& opts) {
    check_point(g, x, "d_cc");
    check_point(g, y, "d_cc");
    if (g.is_heisenberg()) {
        Point delta = group_law(g, group_inverse(g, x), y);
        double r2 = 0.0;
        for (int i = 0; i < g.d(); ++i) r2 += delta[i] * delta[i];
        GeodesicResult res;
        res.length = h1_distance(std::sqrt(r2), delta[g.d()]);
        res.converged = true;
        res.path = {x, y};
        return res;
    }
    GeodesicResult res = solve_bvp(g, x, y, 0.0, opts);
    if (!res.converged) {
        GeodesicResult fallback = path_energy_distance(g, x, y, 0.0);
        if (fallback.converged) return fallback;
    }
    return res;
}

GeodesicResult d_tau(const CarnotModel& g, const Point& x, const Point& y, double tau,
                     const ShootingOptions& opts) {
    check_point(g, x, "d_tau");
    check_point(g, y, "d_tau");
    if (tau <= 0.0) return d_cc(g, x, y, opts);
    return solve_bvp(g, x, y, tau, opts);
}

GeodesicResult path_energy_distance(const CarnotModel& g, const Point& x, const Point& y,
                                    double tau, const PathEnergyOptions& opts) {
    check_point(g, x, "path_energy_distance");
    check_point(g, y, "path_energy_distance");
    Point delta = group_law(g, group_inverse(g, x), y);
    int d = g.d(), m = g.m();
    int N = opts.segments;
    if (N < 2) throw std::invalid_argument("path_energy_distance: need at least 2 segments");
    double h = 1.0 / N;
    bool with_v = tau > 0.0;
    int params = N * d + (with_v ? N * m : 0);
    std::vector<double> dx(delta.begin(), delta.begin() + d);
    std::vector<double> dz(delta.begin() + d, delta.end());

    // forward pass + objective + analytic gradient of
    //   E + wpen * |endpoint error|^2,  E = h * sum(|u_j|^2 + |v_j|^2)
    std::vector<double> xs((N + 1) * d), xmid(N * d), zend(m), ex(d), ez(m);
    auto objective = [&](const std::vector<double>& th, double wpen, std::vector<double>* grad,
                         double* energy_out) {
        for (int i = 0; i < d; ++i) xs[i] = 0.0;
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < d; ++i) {
                double u = th[j * d + i];
                xs[(j + 1) * d + i] = xs[j * d + i] + h * u;
                xmid[j * d + i] = xs[j * d + i] + 0.5 * h * u;
            }
        std::fill(zend.begin(), zend.end(), 0.0);
        for (int k = 0; k < m; ++k) {
            double acc = 0.0;
            for (int j = 0; j < N; ++j) {
                double cross = 0.0;
                for (int i = 0; i < d; ++i) {
                    double xm = xmid[j * d + i];
                    if (xm == 0.0) continue;
                    for (int l = 0; l < d; ++l) cross += xm * g.structure_d(k, i, l) * th[j * d + l];
                }
                acc += 0.5 * cross;
                if (with_v) acc += tau * th[N * d + j * m + k];
            }
            zend[k] = h * acc;
        }
        double energy = 0.0;
        for (int p = 0; p < params; ++p) energy += th[p] * th[p];
        energy *= h;
        double err2 = 0.0;
        for (int i = 0; i < d; ++i) {
            ex[i] = xs[N * d + i] - dx[i];
            err2 += ex[i] * ex[i];
        }
        for (int k = 0; k < m; ++k) {
            ez[k] = zend[k] - dz[k];
            err2 += ez[k] * ez[k];
        }
        if (energy_out) *energy_out = energy;
        double obj = energy + wpen * err2;
        if (grad) {
            grad->assign(params, 0.0);
            for (int j = 0; j < N; ++j) {
                for (int i = 0; i < d; ++i) {
                    double gv = 2.0 * h * th[j * d + i] + 2.0 * wpen * h * ex[i];
                    // dz_k/du_j = (h/2) B^(k) (x_N - 2 x_mid_j)
                    for (int k = 0; k < m; ++k) {
                        double bx = 0.0;
                        for (int l = 0; l < d; ++l)
                            bx += g.structure_d(k, i, l) * (xs[N * d + l] - 2.0 * xmid[j * d + l]);
                        gv += wpen * ez[k] * h * bx;
                    }
                    (*grad)[j * d + i] = gv;
                }
                if (with_v)
                    for (int k = 0; k < m; ++k)
                        (*grad)[N * d + j * m + k] =
                            2.0 * h * th[N * d + j * m + k] + 2.0 * wpen * ez[k] * h * tau;
            }
        }
        return obj;
    };

    double dz1 = 0.0;
    for (double c : dz) dz1 += std::abs(c);
    double amp = std::sqrt(4.0 * M_PI * dz1);

    GeodesicResult best;
    best.residual = 1e300;
    for (int restart = 0; restart < opts.n_restarts; ++restart) {
        std::vector<double> th(params, 0.0);
        for (int j = 0; j < N; ++j) {
            for (int i = 0; i < d; ++i) th[j * d + i] = dx[i];
            if (restart > 0 && d >= 2) {
                // loop seed sweeping signed area, sign alternating with restart
                double sgn = restart % 2 == 1 ? 1.0 : -1.0;
                double ang = 2.0 * M_PI * (j + 0.5) / N;
                th[j * d + 0] += sgn * amp * std::cos(ang);
                th[j * d + 1] += sgn * amp * std::sin(ang);
            }
            if (with_v)
                for (int k = 0; k < m; ++k) th[N * d + j * m + k] = dz[k] / tau;
        }
        std::vector<double> grad, grad_new, th_new(params);
        for (double wpen : {1e2, 1e4, 1e6}) {
            double f = objective(th, wpen, &grad, nullptr);
            double alpha = 1e-3 / wpen;
            std::vector<double> th_prev, grad_prev;
            for (int it = 0; it < opts.iters_per_stage; ++it) {
                double gn2 = 0.0;
                for (double c : grad) gn2 += c * c;
                if (gn2 < 1e-24) break;
                bool moved = false;
                for (int bt = 0; bt < 50; ++bt) {
                    for (int p = 0; p < params; ++p) th_new[p] = th[p] - alpha * grad[p];
                    double f_new = objective(th_new, wpen, &grad_new, nullptr);
                    if (f_new < f) {
                        th_prev = th;
                        grad_prev = grad;
                        th = th_new;
                        grad = grad_new;
                        f = f_new;
                        moved = true;
                        break;
                    }
                    alpha *= 0.3;
                    if (alpha < 1e-18) break;
                }
                if (!moved) break;
                // Barzilai-Borwein step for the next iteration
                if (!th_prev.empty()) {
                    double sy = 0.0, yy = 0.0;
                    for (int p = 0; p < params; ++p) {
                        double sp = th[p] - th_prev[p];
                        double yp = grad[p] - grad_prev[p];
                        sy += sp * yp;
                        yy += yp * yp;
                    }
                    if (sy > 0.0 && yy > 0.0) alpha = std::clamp(sy / yy, 1e-15, 10.0);
                }
            }
        }
        double energy = 0.0;
        objective(th, 1e6, nullptr, &energy);
        double err = 0.0;
        for (int i = 0; i < d; ++i) err += ex[i] * ex[i];
        for (int k = 0; k < m; ++k) err += ez[k] * ez[k];
        err = std::sqrt(err);
        double length = std::sqrt(energy);
        bool conv = err < opts.endpoint_tol;
        bool better;
        if (best.path.empty())
            better = true;
        else if (conv != best.converged)
            better = conv;
        else if (conv)
            better = length < best.length;
        else
            better = err < best.residual;
        if (better) {
            best.length = length;
            best.residual = err;
            best.converged = err < opts.endpoint_tol;
            best.path.clear();
            best.path.reserve(N + 1);
            Point cur(g.dim(), 0.0);
            best.path.push_back(group_law(g, x, cur));
            std::vector<double> zacc(m, 0.0);
            for (int j = 0; j < N; ++j) {
                Point nxt(g.dim(), 0.0);
                for (int i = 0; i < d; ++i) nxt[i] = xs[(j + 1) * d + i];
                // vertical coordinates by the same midpoint rule
                for (int k = 0; k < m; ++k) {
                    double cross = 0.0;
                    for (int i = 0; i < d; ++i)
                        for (int l = 0; l < d; ++l)
                            cross += xmid[j * d + i] * g.structure_d(k, i, l) * th[j * d + l];
                    zacc[k] += h * (0.5 * cross + (with_v ? tau * th[N * d + j * m + k] : 0.0));
                    nxt[d + k] = zacc[k];
                }
                best.path.push_back(group_law(g, x, nxt));
            }
        }
    }
    return best;
}

MonotonicityReport monotonicity_check(const CarnotModel& g, const Point& x, const Point& y,
                                      const std::vector<double>& tau_grid, double rel_tol) {
    if (tau_grid.empty()) throw std::invalid_argument("monotonicity_check: empty tau grid");
    for (std::size_t i = 1; i < tau_grid.size(); ++i)
        if (tau_grid[i] <= tau_grid[i - 1])
            throw std::invalid_argument("monotonicity_check: tau grid must be increasing");
    MonotonicityReport rep;
    rep.taus = tau_grid;
    rep.tol = rel_tol;
    rep.dcc = d_cc(g, x, y).length;
    rep.pass = true;
    double prev = rep.dcc;
    double scale = std::max(rep.dcc, 1e-12);
    for (double tau : tau_grid) {
        double dt = d_tau(g, x, y, tau).length;
        rep.dists.push_back(dt);
        if (dt > prev + rel_tol * scale) rep.pass = false;
        prev = dt;
    }
    return rep;
}

std::vector<double> ball_bounding_box(const CarnotModel& g, const Point& x, double r, double tau) {
    check_point(g, x, "ball_bounding_box");
    if (r <= 0.0) throw std::invalid_argument("ball_bounding_box: radius must be positive");
    int d = g.d(), m = g.m();
    double bnorm = g.structure_norm_bound();
    double xh = 0.0;
    for (int i = 0; i < d; ++i) xh += x[i] * x[i];
    xh = std::sqrt(xh);
    std::vector<double> half(g.dim());
    for (int i = 0; i < d; ++i) half[i] = r;
    // |z_k(y) - z_k(x)| <= |zeta_k| + |<B x_h, xi>|/2 along y = x.(xi, zeta)
    double vert = 0.5 * bnorm * r * r + std::max(tau, 0.0) * r + 0.5 * bnorm * xh * r;
    for (int k = 0; k < m; ++k) half[d + k] = vert;
    return half;
}

VolumeEstimate ball_volume(const CarnotModel& g, const Point& x, double r, TauMetric metric,
                           std::size_t n_samples, std::uint64_t seed) {
    check_point(g, x, "ball_volume");
    if (n_samples == 0) throw std::invalid_argument("ball_volume: need samples");
    std::vector<double> half = ball_bounding_box(g, x, r, metric.tau);
    double box_vol = 1.0;
    for (double hc : half) box_vol *= 2.0 * hc;
    int n = g.dim();
    bool closed_form = metric.tau <= 0.0 && g.is_heisenberg();
    double band = 1e-9 * std::max(r, 1.0);
    Point xinv = group_inverse(g, x);

    std::atomic<std::uint64_t> twice_inside{0}, failures{0};
    parallel_for(n_samples, [&](std::size_t idx) {
        std::mt19937_64 rng = stream_rng(seed, idx);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        Point y(n);
        for (int i = 0; i < n; ++i) y[i] = x[i] + half[i] * uni(rng);
        double dist;
        if (closed_form) {
            Point delta = group_law(g, xinv, y);
            double r2 = 0.0;
            for (int i = 0; i < g.d(); ++i) r2 += delta[i] * delta[i];
            dist = h1_distance(std::sqrt(r2), delta[g.d()]);
        } else {
            ShootingOptions opts;
            GeodesicResult res = metric.tau > 0.0
                                     ? solve_bvp(g, x, y, metric.tau, opts, r)
                                     : d_cc(g, x, y, opts);
            if (!res.converged) {
                failures.fetch_add(1, std::memory_order_relaxed);
                return;
            }
            dist = res.length;
        }
        if (dist < r - band)
            twice_inside.fetch_add(2, std::memory_order_relaxed);
        else if (dist <= r + band)
            twice_inside.fetch_add(1, std::memory_order_relaxed);
    });

    VolumeEstimate est;
    est.samples = n_samples;
    est.seed = seed;
    est.failure_rate = static_cast<double>(failures.load()) / static_cast<double>(n_samples);
    if (est.failure_rate > 0.01) throw SolverError("ball_volume: too many unresolved distance solves");
    double p = static_cast<double>(twice_inside.load()) / (2.0 * static_cast<double>(n_samples));
    est.value = box_vol * p;
    est.stderr_ = box_vol * std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n_samples));
    return est;
}

BallInclusionReport ball_inclusion_check(const CarnotModel& g, const Point& x, double R,
                                         double tau, double A, std::size_t n_samples,
                                         std::uint64_t seed) {
    check_point(g, x, "ball_inclusion_check");
    if (R <= 0.0 || A <= 0.0) throw std::invalid_argument("ball_inclusion_check: R and A must be positive");
    std::vector<double> half = ball_bounding_box(g, x, R, tau);
    int n = g.dim();
    BallInclusionReport rep;
    rep.bound = A * std::sqrt(R);
    std::size_t accepted = 0, attempts = 0, max_attempts = 200 * n_samples;
    std::uint64_t stream = 0;
    ShootingOptions opts;
    while (accepted < n_samples && attempts < max_attempts) {
        std::mt19937_64 rng = stream_rng(seed, stream++);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        Point y(n);
        for (int i = 0; i < n; ++i) y[i] = x[i] + half[i] * uni(rng);
        ++attempts;
        GeodesicResult dt = d_tau(g, x, y, tau, opts);
        if (!dt.converged || dt.length > R) continue;
        ++accepted;
        GeodesicResult dc = d_cc(g, x, y, opts);
        double ratio = dc.length / rep.bound;
        rep.worst_ratio = std::max(rep.worst_ratio, ratio);
        if (!dc.converged || ratio > 1.0 + 1e-9) {
            ++rep.violations;
            if (rep.witnesses.size() < 16) rep.witnesses.push_back(y);
        }
    }
    rep.n_samples = accepted;
    if (accepted < n_samples)
        throw SolverError("ball_inclusion_check: rejection sampling starved");
    rep.pass = rep.violations == 0;
    return rep;
}

} // namespace subrk
