#ifndef SUBRK_HEAT_HPP
#define SUBRK_HEAT_HPP

#include <cstdint>
#include <functional>

#include "subrk/models.hpp"

namespace subrk {

// Heat kernel of the sub-Laplacian L = X^2 + Y^2 on the Heisenberg group at
// time t, evaluated at horizontal radius rho, vertical coordinate z:
//   p_t(rho, z) = (1/4 pi^2) int_0^inf cos(lambda z) (lambda/sinh(lambda t))
//                 exp(-lambda rho^2 coth(lambda t)/4) dlambda.
// rel_tol is relative to the on-diagonal value 1/(16 t^2).
double h1_heat_kernel(double t, double rho, double z, double rel_tol = 1e-10);

// Same, for a point of heisenberg(1) in exponential coordinates.
double h1_heat_kernel_point(double t, const Point& p, double rel_tol = 1e-10);

// int p_t over the whole group (should be 1), by radial quadrature.
double h1_kernel_mass(double t, double tol = 1e-8);

// P_t 1_{B(0,r)} (0) for the cc-ball, by radial quadrature over z-sections.
double h1_ball_heat_content(double t, double r, double tol = 1e-8);

// P_t 1_{B(0,r)^c} (0): the complement mass integrated directly, avoiding the
// catastrophic cancellation of 1 - content when the value is exponentially small.
double h1_ball_complement_content(double t, double r, double tol = 1e-12);

// int p_s(y) p_t(y^{-1}) dy, which the semigroup law says equals p_{s+t}(0).
double h1_semigroup_convolution_origin(double s, double t, double tol = 1e-8);

// Sample paths of the diffusion generated by L = sum X_i^2: horizontal
// increments sqrt(2) dW, vertical coordinates by the midpoint area rule.
// Every path is an independent RNG stream derived from (seed, path_index).
struct DiffusionSimulator {
    CarnotModel model;
    int steps_per_unit = 1000;
    std::uint64_t seed = 1;

    explicit DiffusionSimulator(CarnotModel g) : model(std::move(g)) {}

    Point endpoint(const Point& start, double t, std::uint64_t path_index) const;
};

struct McEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n_paths = 0;
};

// Monte Carlo P_t f(x). Deterministic for fixed (seed, n_paths), independent
// of the worker count.
McEstimate semigroup_mc(const DiffusionSimulator& sim,
                        const std::function<double(const Point&)>& f, double t, const Point& x,
                        std::size_t n_paths);

// Monte Carlo P_t 1_{B_cc(center, r)} (center).
McEstimate heat_content_mc(const DiffusionSimulator& sim, const Point& center, double r,
                           double t, std::size_t n_paths);

// First-order data of a positive heat semigroup solution u(x, t) at (x, t):
// horizontal/vertical carre du champ of ln u by finite differences in space,
// and Lu through the heat equation Lu = du/dt.
struct LogDerivatives {
    double value = 0.0;
    double du_dt = 0.0;
    double gamma_ln = 0.0;   // Gamma(ln u)
    double gamma_z_ln = 0.0; // Gamma^Z(ln u)
    double lu_over_u = 0.0;
};

LogDerivatives log_derivatives(const CarnotModel& g,
                               const std::function<double(const Point&, double)>& u,
                               const Point& x, double t, double h_space = 1e-4,
                               double h_time = 1e-5);

} // namespace subrk

#endif
