#ifndef SUBRK_METRICS_HPP
#define SUBRK_METRICS_HPP

#include <cstdint>
#include <vector>

#include "subrk/models.hpp"

namespace subrk {

// Control metric selector: tau = 0 is the sub-Riemannian distance, tau > 0
// the Riemannian metric making {X_i, tau Z_k} orthonormal.
struct TauMetric {
    double tau = 0.0;
};

struct GeodesicResult {
    double length = 0.0;
    std::vector<Point> path; // discretized minimizer, endpoints included
    bool converged = false;
    double residual = 0.0; // boundary mismatch norm
};

struct VolumeEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    double failure_rate = 0.0;
};

struct ShootingOptions {
    int n_starts = 16;
    int base_rk_steps = 160;
    int max_iterations = 120;
    double bv_tol = 1e-8;    // boundary-value residual, absolute
    int path_points = 33;
};

struct PathEnergyOptions {
    int segments = 64;
    int iters_per_stage = 4000;
    int n_restarts = 3;
    double endpoint_tol = 1e-5;
};

// Closed-form Carnot-Caratheodory distance from the origin on the Heisenberg
// group (vertical bracket normalization z' = <Bx, dx>/2): r horizontal norm,
// z vertical coordinate.
double h1_distance(double r, double z);

// Largest |z| with d_cc((rho, 0,.., z)) <= r on H^n; 0 if rho >= r.
double h1_ball_z_extent(double rho, double r);

// Riemannian distance d_tau via Hamiltonian geodesic shooting (tau > 0).
// tau <= 0 is routed to d_cc.
GeodesicResult d_tau(const CarnotModel& g, const Point& x, const Point& y, double tau,
                     const ShootingOptions& opts = {});

// Sub-Riemannian distance: closed form on Heisenberg models, geodesic
// shooting with path-energy fallback otherwise.
GeodesicResult d_cc(const CarnotModel& g, const Point& x, const Point& y,
                    const ShootingOptions& opts = {});

// Independent discretized path-energy minimizer (penalty + gradient descent);
// validates the closed form and the shooting solver.
GeodesicResult path_energy_distance(const CarnotModel& g, const Point& x, const Point& y,
                                    double tau, const PathEnergyOptions& opts = {});

struct MonotonicityReport {
    std::vector<double> taus;
    std::vector<double> dists; // d_tau values, same order as taus
    double dcc = 0.0;
    bool pass = false;
    double tol = 0.0;
};

// Checks d_{tau'} <= d_tau <= d_cc for tau' >= tau along an increasing grid.
MonotonicityReport monotonicity_check(const CarnotModel& g, const Point& x, const Point& y,
                                      const std::vector<double>& tau_grid, double rel_tol = 1e-4);

// Monte Carlo Lebesgue volume of the metric ball B_metric(x, r): uniform
// samples in a raw-coordinate bounding box, membership by distance solve.
VolumeEstimate ball_volume(const CarnotModel& g, const Point& x, double r, TauMetric metric,
                           std::size_t n_samples, std::uint64_t seed);

struct BallInclusionReport {
    std::size_t n_samples = 0;
    std::size_t violations = 0;
    double worst_ratio = 0.0; // max d_cc / (A sqrt(R)) over samples
    double bound = 0.0;       // A sqrt(R)
    bool pass = false;
    std::vector<Point> witnesses; // violating sample points, if any
};

// Samples points of B_tau(x, R) and checks d_cc(x, .) <= A sqrt(R).
BallInclusionReport ball_inclusion_check(const CarnotModel& g, const Point& x, double R,
                                         double tau, double A, std::size_t n_samples,
                                         std::uint64_t seed);

// Raw-coordinate half-extents of a box certified to contain B_tau(x, r)
// (horizontal chord bound |x_i| <= r; vertical Levy-area bound).
std::vector<double> ball_bounding_box(const CarnotModel& g, const Point& x, double r, double tau);

} // namespace subrk

#endif
