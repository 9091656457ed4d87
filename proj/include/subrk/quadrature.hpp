#ifndef SUBRK_QUADRATURE_HPP
#define SUBRK_QUADRATURE_HPP

#include <cmath>
#include <functional>
#include <vector>

namespace subrk {

struct QuadResult {
    double value = 0.0;
    double error = 0.0; // accumulated error estimate
    bool converged = true;
};

// Adaptive Gauss-Kronrod 15(7) on [a, b] to absolute tolerance abs_tol.
QuadResult adaptive_gk15(const std::function<double(double)>& f, double a, double b,
                         double abs_tol, int max_intervals = 4000);

// Same, but the initial interval list is pre-split into n_panels equal panels
// (for oscillatory integrands: keep a bounded phase change per panel).
QuadResult adaptive_gk15_panels(const std::function<double(double)>& f, double a, double b,
                                double abs_tol, int n_panels, int max_intervals = 8000);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace subrk

#endif
