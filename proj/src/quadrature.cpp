#include "subrk/quadrature.hpp"

#include <algorithm>
#include <queue>

namespace subrk {

namespace {

// Gauss-Kronrod 15-point nodes and weights (positive half), with the
// embedded 7-point Gauss weights on the shared nodes.
const double kGK15Nodes[8] = {
    0.000000000000000000000000000000000e+00,
    2.077849550078984676006894037732449e-01,
    4.058451513773971669066064120769615e-01,
    5.860872354676911302941448382587296e-01,
    7.415311855993944398638647732807884e-01,
    8.648644233597690727897127886409262e-01,
    9.491079123427585245261896840478513e-01,
    9.914553711208126392068546975263285e-01};

const double kGK15Weights[8] = {
    2.094821410847278280129991748917143e-01,
    2.044329400752988924141619992346491e-01,
    1.903505780647854099132564024210137e-01,
    1.690047266392679028265834265985503e-01,
    1.406532597155259187451895905102379e-01,
    1.047900103222501838398763225415180e-01,
    6.309209262997855329070066318920429e-02,
    2.293532201052922496373200805896959e-02};

const double kG7Weights[4] = {
    4.179591836734693877551020408163265e-01,
    3.818300505051189449503697754889751e-01,
    2.797053914892766679014677714237796e-01,
    1.294849661688696932706114326790820e-01};

struct Panel {
    double a, b, value, err;
    bool operator<(const Panel& o) const { return err < o.err; }
};

Panel gk15_panel(const std::function<double(double)>& f, double a, double b) {
    double hc = 0.5 * (b - a);
    double mid = 0.5 * (a + b);
    double fk = 0.0, fg = 0.0;
    double fc = f(mid);
    fk += fc * kGK15Weights[0];
    fg += fc * kG7Weights[0];
    for (int i = 1; i < 8; ++i) {
        double x = hc * kGK15Nodes[i];
        double s = f(mid - x) + f(mid + x);
        fk += s * kGK15Weights[i];
        if (i % 2 == 0) fg += s * kG7Weights[i / 2];
    }
    Panel p;
    p.a = a;
    p.b = b;
    p.value = fk * hc;
    // conservative error estimate: plain |K15 - G7| difference
    p.err = std::abs((fk - fg) * hc);
    return p;
}

QuadResult adapt(std::priority_queue<Panel>& heap, double total, double err_total,
                 const std::function<double(double)>& f, double abs_tol, int max_intervals) {
    int used = static_cast<int>(heap.size());
    while (err_total > abs_tol && used < max_intervals) {
        Panel worst = heap.top();
        heap.pop();
        total -= worst.value;
        err_total -= worst.err;
        double mid = 0.5 * (worst.a + worst.b);
        Panel l = gk15_panel(f, worst.a, mid);
        Panel r = gk15_panel(f, mid, worst.b);
        total += l.value + r.value;
        err_total += l.err + r.err;
        heap.push(l);
        heap.push(r);
        ++used;
    }
    QuadResult res;
    res.value = total;
    res.error = err_total;
    res.converged = err_total <= abs_tol;
    return res;
}

} // namespace

QuadResult adaptive_gk15_panels(const std::function<double(double)>& f, double a, double b,
                                double abs_tol, int n_panels, int max_intervals) {
    n_panels = std::max(1, n_panels);
    std::priority_queue<Panel> heap;
    double total = 0.0, err_total = 0.0;
    double h = (b - a) / n_panels;
    for (int i = 0; i < n_panels; ++i) {
        Panel p = gk15_panel(f, a + i * h, a + (i + 1) * h);
        total += p.value;
        err_total += p.err;
        heap.push(p);
    }
    return adapt(heap, total, err_total, f, abs_tol, max_intervals);
}

QuadResult adaptive_gk15(const std::function<double(double)>& f, double a, double b,
                         double abs_tol, int max_intervals) {
    return adaptive_gk15_panels(f, a, b, abs_tol, 1, max_intervals);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton iteration from the Chebyshev initial guess
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
}

} // namespace subrk
