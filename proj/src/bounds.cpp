#include "subrk/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "subrk/quadrature.hpp"
#include "subrk/util.hpp"

namespace subrk {

namespace {

// int_V^inf (g(v) - 1/v) dv from the large-v expansion
// g(v) = 1/v - c1 v^{-5/3} + (c1^2 - c2) v^{-7/3} + O(v^{-3}).
double c0_tail(double c1, double c2, double V) {
    return -1.5 * c1 * std::pow(V, -2.0 / 3.0) + 0.75 * (c1 * c1 - c2) * std::pow(V, -4.0 / 3.0);
}

} // namespace

GrowthFunctions::GrowthFunctions(const CDParams& params) : params_(params) {
    c2_ = std::sqrt(params_.Dstar() / 2.0);
    c1_ = 1.0 + c2_;
    // C0 = int_0^1 g + int_1^inf (g - 1/v). Head integral under v = w^3 so
    // the v^{-1/3} weight in g's denominator stays smooth.
    QuadResult head = adaptive_gk15(
        [this](double w) { return g(w * w * w) * 3.0 * w * w; }, 0.0, 1.0, 1e-12);
    if (!head.converged) throw SolverError("GrowthFunctions: head integral did not converge");
    // Middle integrals under v = e^s (log-spaced panels), analytic tail beyond.
    auto log_segment = [this](double a, double b) {
        QuadResult q = adaptive_gk15(
            [this](double s) {
                double v = std::exp(s);
                return (g(v) - 1.0 / v) * v;
            },
            a, b, 1e-12, 8000);
        if (!q.converged) throw SolverError("GrowthFunctions: C0 integral did not converge");
        return q.value;
    };
    double mid = log_segment(0.0, std::log(1e7));
    double last_decade = log_segment(std::log(1e7), std::log(1e8));
    double c0_lo = head.value + mid + c0_tail(c1_, c2_, 1e7);
    double c0_hi = head.value + mid + last_decade + c0_tail(c1_, c2_, 1e8);
    if (std::abs(c0_hi - c0_lo) > 1e-9)
        throw SolverError("GrowthFunctions: C0 extraction did not stabilize");
    c0_ = c0_hi;
    c0_star_ = c0_ - std::log(2.0);
    c0_dstar_ = G(std::sqrt(std::log(2.0))) - c0_star_;
}

double GrowthFunctions::g(double v) const {
    if (!(v > 0.0)) throw std::invalid_argument("GrowthFunctions::g: v must be positive");
    double w = std::cbrt(v);
    return 1.0 / (v + c1_ * w + c2_ / w);
}

double GrowthFunctions::G(double u) const {
    if (u < 0.0) throw std::invalid_argument("GrowthFunctions::G: u must be nonnegative");
    if (u == 0.0) return 0.0;
    QuadResult q = adaptive_gk15(
        [this](double w) { return g(w * w * w) * 3.0 * w * w; }, 0.0, std::cbrt(u), 1e-12, 8000);
    if (!q.converged) throw SolverError("GrowthFunctions::G: integral did not converge");
    return q.value;
}

double GrowthFunctions::psi(double R, double u) const {
    if (!(u > 0.0)) throw std::invalid_argument("GrowthFunctions::psi: u must be positive");
    if (R < 0.0) throw std::invalid_argument("GrowthFunctions::psi: R must be nonnegative");
    return -std::log(u) - std::sqrt(params_.d * params_.rho1_minus()) * R * u;
}

double GrowthFunctions::U(double R) const {
    if (R < 0.0) throw std::invalid_argument("GrowthFunctions::U: R must be nonnegative");
    double k = std::sqrt(params_.d * params_.rho1_minus()) * R;
    if (k == 0.0) return std::exp(-c0_dstar_);
    // psi_R is strictly decreasing: bracket the level C0** and bisect.
    auto f = [&](double u) { return -std::log(u) - k * u - c0_dstar_; };
    double lo = 1e-30;
    if (!(f(lo) > 0.0)) throw SolverError("GrowthFunctions::U: bracketing failed");
    double hi = 1.0;
    while (f(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 1e30) throw SolverError("GrowthFunctions::U: bracketing failed");
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
        if (hi - lo < 1e-12 * hi) break;
    }
    return 0.5 * (lo + hi);
}

double GrowthFunctions::A(double r) const {
    double u = U(r);
    double a = std::min(u * u, 1.0);
    double k = std::sqrt(params_.d * params_.rho1_minus());
    double floor_u = 1.0 / (k * r + std::exp(c0_dstar_));
    if (a + 1e-12 < std::min(floor_u * floor_u, 1.0))
        throw SolverError("GrowthFunctions::A: sandwich bound violated");
    return a;
}

double li_yau_residual(const LogDerivatives& terms, const CDParams& params, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("li_yau_residual: t must be positive");
    double r1m = params.rho1_minus(), D = params.D();
    double lhs = terms.gamma_ln + (2.0 * params.rho2 / 3.0) * t * terms.gamma_z_ln;
    double rhs = (D / params.d + 2.0 * r1m * t / 3.0) * terms.lu_over_u +
                 params.d * r1m * r1m * t / 6.0 + r1m * D / 2.0 + D * D / (2.0 * params.d * t);
    return rhs - lhs;
}

double li_yau_tau_residual(const LogDerivatives& terms, const CDParams& params, double t,
                           double tau) {
    if (tau < 0.0) throw std::invalid_argument("li_yau_tau_residual: tau must be nonnegative");
    if (tau == 0.0) return li_yau_residual(terms, params, t);
    if (!(t > 0.0)) throw std::invalid_argument("li_yau_tau_residual: t must be positive");
    double r1m = params.rho1_minus(), D = params.D();
    double pref = 1.0 + 3.0 * tau * tau / (2.0 * params.rho2 * t);
    double lhs = (terms.gamma_ln + tau * tau * terms.gamma_z_ln) / pref;
    double rhs = (D / params.d + 2.0 * r1m * t / 3.0) * terms.lu_over_u +
                 params.d * r1m * r1m * t / 6.0 + r1m * D / 2.0 + D * D / (2.0 * params.d * t);
    return rhs - lhs;
}

double harnack_rhs(const CDParams& params, double tau, double dist, double s, double t) {
    if (!(s > 0.0) || !(t > s)) throw std::invalid_argument("harnack_rhs: need 0 < s < t");
    if (dist < 0.0) throw std::invalid_argument("harnack_rhs: dist must be nonnegative");
    if (tau < 0.0) throw std::invalid_argument("harnack_rhs: tau must be nonnegative");
    double r1m = params.rho1_minus(), D = params.D();
    double bracket = D / params.d + tau * tau * r1m / params.rho2 + r1m * (t + s) / 3.0 +
                     3.0 * tau * tau * D * std::log(t / s) / (2.0 * (t - s) * params.rho2 * params.d);
    return std::pow(t / s, D / 2.0) * std::exp(params.d * r1m * (t - s) / 4.0) *
           std::exp(dist * dist / (4.0 * (t - s)) * bracket);
}

HarnackCheck harnack_check(const CDParams& params, const Point& x, const Point& y, const Point& z,
                           double s, double t, double tau, HarnackReading reading, double tol) {
    if (!(s > 0.0) || !(t >= s)) throw std::invalid_argument("harnack_check: need 0 < s <= t");
    CarnotModel g = heisenberg(1);
    if (x.size() != 3 || y.size() != 3 || z.size() != 3)
        throw std::invalid_argument("harnack_check: expect heisenberg(1) points");
    HarnackCheck out;
    const Point& a = (reading == HarnackReading::y_to_z) ? y : x;
    const Point& b = (reading == HarnackReading::y_to_z) ? z : y;
    out.dist = (tau > 0.0) ? d_tau(g, a, b, tau).length : d_cc(g, a, b).length;
    out.lhs = h1_heat_kernel_point(s, group_law(g, group_inverse(g, x), y));
    double pt = h1_heat_kernel_point(t, group_law(g, group_inverse(g, x), z));
    double inf = std::numeric_limits<double>::infinity();
    if (t == s) {
        if (out.dist <= tol) {
            out.factor = 1.0;
            out.rhs = pt;
            out.pass = out.lhs <= out.rhs * (1.0 + tol) + tol;
        } else {
            out.factor = inf;
            out.rhs = inf;
            out.divergent = true;
            out.pass = true;
        }
        return out;
    }
    out.factor = harnack_rhs(params, tau, out.dist, s, t);
    out.rhs = out.factor * pt;
    if (!std::isfinite(out.rhs)) {
        out.divergent = true;
        out.pass = true;
    } else {
        out.pass = out.lhs <= out.rhs * (1.0 + tol) + tol;
    }
    return out;
}

double volume_upper_bound(const CDParams& params, double C_input, double R0, double R,
                          double p_xx_R0sq) {
    if (!(R0 > 0.0) || R < R0) throw std::invalid_argument("volume_upper_bound: need R >= R0 > 0");
    if (!(C_input > 0.0)) throw std::invalid_argument("volume_upper_bound: C must be positive");
    if (!(p_xx_R0sq > 0.0))
        throw std::invalid_argument("volume_upper_bound: kernel value must be positive");
    double r1m = params.rho1_minus(), D = params.D();
    return C_input * std::exp(2.0 * params.d * r1m * R0 * R0) /
           (std::pow(R0, D) * p_xx_R0sq) * std::pow(R, D) * std::exp(2.0 * params.d * r1m * R * R);
}

GDecayReport g_decay_check(const GrowthFunctions& gf, const std::vector<double>& times,
                           const std::vector<double>& pt_vals, double r, double tol) {
    if (times.size() != pt_vals.size() || times.size() < 2)
        throw std::invalid_argument("g_decay_check: need matching grids with >= 2 entries");
    const CDParams& p = gf.params();
    double k = std::sqrt(p.d * p.rho1_minus());
    std::vector<double> gvals(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0) || (i > 0 && times[i] <= times[i - 1]))
            throw std::invalid_argument("g_decay_check: times must be positive increasing");
        if (!(pt_vals[i] > 0.0) || !(pt_vals[i] < 1.0))
            throw std::invalid_argument("g_decay_check: semigroup values must lie in (0,1)");
        gvals[i] = gf.G(std::sqrt(-std::log(pt_vals[i])));
    }
    GDecayReport rep;
    rep.pass = true;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        double s = times[i], t = times[i + 1];
        GDecayCase c;
        c.s = s;
        c.t = t;
        c.slack = gvals[i + 1] -
                  (gvals[i] - 0.5 * std::log(t / s) - k * (std::sqrt(t) - std::sqrt(s)));
        c.pass = c.slack >= -tol;
        rep.pass = rep.pass && c.pass;
        rep.pairs.push_back(c);
    }
    if (r > 0.0) {
        for (std::size_t i = 0; i < times.size(); ++i) {
            double floor = std::log(r / std::sqrt(times[i])) + gf.C0_star() -
                           k * std::sqrt(times[i]);
            double slack = gvals[i] - floor;
            rep.floor_slack.push_back(slack);
            rep.pass = rep.pass && slack >= -tol;
        }
    }
    return rep;
}

SmallTimeReport small_time_check(double r, const std::vector<double>& s_grid,
                                 const std::vector<double>& ps_vals, double tol) {
    if (!(r > 0.0)) throw std::invalid_argument("small_time_check: r must be positive");
    if (s_grid.size() != ps_vals.size() || s_grid.empty())
        throw std::invalid_argument("small_time_check: need matching nonempty grids");
    SmallTimeReport rep;
    rep.limit_target = 0.25 * r * r;
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        if (!(s_grid[i] > 0.0) || (i > 0 && s_grid[i] >= s_grid[i - 1]))
            throw std::invalid_argument("small_time_check: s grid must be positive decreasing");
        if (!(ps_vals[i] > 0.0)) {
            rep.resolution_limit = true;
            break;
        }
        rep.s_grid.push_back(s_grid[i]);
        rep.values.push_back(-s_grid[i] * std::log(ps_vals[i]));
    }
    if (rep.values.empty()) {
        rep.pass = false;
        return rep;
    }
    bool increasing = true;
    for (std::size_t i = 0; i + 1 < rep.values.size(); ++i)
        increasing = increasing && rep.values[i + 1] >= rep.values[i] - 1e-6;
    rep.pass = increasing && rep.values.back() >= rep.limit_target - tol;
    return rep;
}

double kernel_lower_bound(const GrowthFunctions& gf, double vol, double dist, double t,
                          double tau) {
    if (!(t > 0.0)) throw std::invalid_argument("kernel_lower_bound: t must be positive");
    if (!(vol > 0.0)) throw std::invalid_argument("kernel_lower_bound: volume must be positive");
    if (dist < 0.0 || tau < 0.0)
        throw std::invalid_argument("kernel_lower_bound: dist, tau must be nonnegative");
    const CDParams& p = gf.params();
    double r1m = p.rho1_minus(), D = p.D();
    double base = std::pow(gf.A(0.5 * std::sqrt(t)), D / 2.0) * std::pow(2.0, -D / 2.0) *
                  std::exp(-p.d * r1m * t / 4.0) / (4.0 * vol);
    double expo = -(dist * dist / (2.0 * t)) *
                  (D / p.d + r1m * t / 2.0 +
                   (2.0 * tau * tau / t) *
                       (r1m / p.rho2 + 3.0 * D * std::log(2.0) / (2.0 * p.rho2 * p.d)));
    return base * std::exp(expo);
}

double kernel_lower_bound_diag(const GrowthFunctions& gf, double vol, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("kernel_lower_bound_diag: t must be positive");
    if (!(vol > 0.0))
        throw std::invalid_argument("kernel_lower_bound_diag: volume must be positive");
    const CDParams& p = gf.params();
    double D = p.D();
    return std::pow(gf.A(std::sqrt(0.5 * t)), D / 2.0) *
           std::exp(-p.d * p.rho1_minus() * t / 4.0) / (4.0 * vol);
}

UpperConstants traced_upper_constants(const CDParams& params, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("traced_upper_constants: eps must be positive");
    UpperConstants out;
    double a = std::pow(1.0 + eps / 4.0, 0.25) - 1.0;
    double D = params.D();
    out.alpha = a;
    out.C5 = std::pow(1.0 + a, D) *
             std::exp(D * (a + 2.0) / (4.0 * a * (a + 1.0) * params.d) +
                      1.0 / (4.0 * a * (1.0 + a) * (1.0 + a)) +
                      1.0 / (4.0 * a * (1.0 + a) * (1.0 + a) * (1.0 + a)));
    out.C6 = (2.0 + a) * (1.0 / (6.0 * a) + params.d * a / 4.0);
    return out;
}

double kernel_upper_bound(const CDParams& params, double eps, double vol_x, double vol_y,
                          double dist, double t, double C5, double C6) {
    if (!(eps > 0.0)) throw std::invalid_argument("kernel_upper_bound: eps must be positive");
    if (!(vol_x > 0.0) || !(vol_y > 0.0))
        throw std::invalid_argument("kernel_upper_bound: volumes must be positive");
    if (!(t > 0.0)) throw std::invalid_argument("kernel_upper_bound: t must be positive");
    return C5 / std::sqrt(vol_x * vol_y) * std::exp(C6 * params.rho1_minus() * t) *
           std::exp(-dist * dist / ((4.0 + eps) * t));
}

std::pair<double, double> traced_doubling_constants(const GrowthFunctions& gf, double R,
                                                    double C_cfg) {
    if (!(R > 0.0)) throw std::invalid_argument("traced_doubling_constants: R must be positive");
    if (!(C_cfg > 0.0))
        throw std::invalid_argument("traced_doubling_constants: C must be positive");
    const CDParams& p = gf.params();
    double D = p.D();
    double c3 = C_cfg * std::pow(2.0, D / 2.0 + 2.0) * std::pow(gf.A(R), -D / 2.0);
    double c4 = 12.5 * p.d;
    return {c3, c4};
}

DoublingReport doubling_check(const CDParams& params, const VolumeEstimate& vol_r,
                              const VolumeEstimate& vol_2r, double R, double C3, double C4) {
    if (!(vol_r.value > 0.0) || !(vol_2r.value > 0.0))
        throw std::invalid_argument("doubling_check: volumes must be positive");
    DoublingReport rep;
    rep.ratio = vol_2r.value / vol_r.value;
    double rel1 = vol_r.stderr_ / vol_r.value;
    double rel2 = vol_2r.stderr_ / vol_2r.value;
    rep.ratio_stderr = rep.ratio * std::sqrt(rel1 * rel1 + rel2 * rel2);
    rep.bound = C3 * std::exp(C4 * params.rho1_minus() * R * R);
    if (rep.ratio <= rep.bound)
        rep.verdict = "pass";
    else if (rep.ratio - rep.bound <= 3.0 * rep.ratio_stderr)
        rep.verdict = "inconclusive";
    else
        rep.verdict = "fail";
    return rep;
}

DistanceCmpReport distance_comparison_check(const CarnotModel& g,
                                            const std::vector<std::pair<Point, Point>>& pairs,
                                            double tau, double C7, double rho1_minus,
                                            double tol) {
    if (!(tau > 0.0) || tau > 1.0)
        throw std::invalid_argument("distance_comparison_check: need 0 < tau <= 1");
    if (rho1_minus < 0.0)
        throw std::invalid_argument("distance_comparison_check: rho1_minus must be nonnegative");
    DistanceCmpReport rep;
    rep.pass = true;
    double amp = C7 * (1.0 + std::sqrt(rho1_minus));
    for (const auto& [x, y] : pairs) {
        DistanceCmpCase c;
        GeodesicResult rc = d_cc(g, x, y);
        GeodesicResult rt = d_tau(g, x, y, tau);
        if (!rc.converged || !rt.converged)
            throw SolverError("distance_comparison_check: distance solver failed");
        c.d_cc = rc.length;
        c.d_tau = rt.length;
        double denom = std::max(std::sqrt(c.d_tau), c.d_tau);
        c.ratio = denom > 0.0 ? c.d_cc / denom : 0.0;
        c.pass = c.d_cc <= amp * denom + tol;
        rep.pass = rep.pass && c.pass;
        rep.worst_ratio = std::max(rep.worst_ratio, c.ratio);
        rep.cases.push_back(c);
    }
    rep.fitted_C7 = rep.worst_ratio / (1.0 + std::sqrt(rho1_minus));
    return rep;
}

double reverse_logsob_residual(const ReverseLogSobTerms& terms, const CDParams& params, double C,
                               double delta, double t) {
    if (C < 0.0) throw std::invalid_argument("reverse_logsob_residual: C must be nonnegative");
    if (!(delta > 0.0)) throw std::invalid_argument("reverse_logsob_residual: delta must be positive");
    if (!(t > 0.0)) throw std::invalid_argument("reverse_logsob_residual: t must be positive");
    if (!(terms.ptf > 0.0))
        throw std::invalid_argument("reverse_logsob_residual: semigroup value must be positive");
    double r1m = params.rho1_minus();
    double lhs = (t / params.rho2) * terms.ptf * terms.gamma_ln +
                 t * t * terms.ptf * terms.gamma_z_ln;
    double rhs = (1.0 / params.rho2) *
                     (1.0 + 2.0 * params.kappa / params.rho2 + 4.0 * C / params.d + 2.0 * t * r1m) *
                     terms.entropy -
                 (4.0 * C / (params.d * params.rho2)) * (t / (1.0 + delta)) * terms.lptf +
                 (2.0 * C * C / (params.d * params.rho2)) * std::log(1.0 + 1.0 / delta) * terms.ptf;
    return rhs - lhs;
}

double reverse_harnack_residual(double u, double u_t, const CDParams& params, double t) {
    if (!(u > 0.0)) throw std::invalid_argument("reverse_harnack_residual: u must be positive");
    if (!(t > 0.0)) throw std::invalid_argument("reverse_harnack_residual: t must be positive");
    double c2 = std::sqrt(params.Dstar() / 2.0);
    double c1 = 1.0 + c2;
    double w = std::cbrt(u);
    return 2.0 * t * u_t +
           (u + c1 * w + c2 / w) * (1.0 + std::sqrt(params.d * params.rho1_minus() * t));
}

double reverse_harnack_residual_gform(const GrowthFunctions& gf, double u, double u_t, double t) {
    if (!(u > 0.0) || !(t > 0.0))
        throw std::invalid_argument("reverse_harnack_residual_gform: u, t must be positive");
    const CDParams& p = gf.params();
    return 2.0 * t * u_t + (1.0 + std::sqrt(p.d * p.rho1_minus() * t)) / gf.g(u);
}

} // namespace subrk
