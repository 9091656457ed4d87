#ifndef SUBRK_CDC_HPP
#define SUBRK_CDC_HPP

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "subrk/vector_field.hpp"

namespace subrk {

// Parameters of the generalized curvature-dimension inequality, with the
// derived constants used throughout the bound evaluators.
template <class C>
struct CdParamsT {
    C rho1{0};
    C rho2{0};
    C kappa{0};
    C d{0};
    bool estimated = false; // rho2/kappa obtained by numerical search, not closed form

    CdParamsT() = default;
    CdParamsT(C r1, C r2, C k, C dim, bool est = false)
        : rho1(std::move(r1)), rho2(std::move(r2)), kappa(std::move(k)), d(std::move(dim)), estimated(est) {
        if (!(rho2 > C(0))) throw std::invalid_argument("CDParams: rho2 must be > 0");
        if (kappa < C(0)) throw std::invalid_argument("CDParams: kappa must be >= 0");
        if (!(d > C(0))) throw std::invalid_argument("CDParams: d must be > 0");
    }

    C rho1_minus() const { return rho1 < C(0) ? C(-rho1) : C(0); }
    C D() const { return d * (C(1) + C(3) * kappa / (C(2) * rho2)); }
    C Dstar() const { return d * (C(1) + C(2) * kappa / rho2); }
};

using CDParams = CdParamsT<double>;
using CDParamsQ = CdParamsT<Rational>;

template <class C>
void check_same_vars(const Polynomial<C>& f, const Polynomial<C>& g) {
    if (f.vars() != g.vars()) throw std::invalid_argument("cdc: dimension mismatch");
}

// Carre du champ: Gamma(f,g) = (L(fg) - f Lg - g Lf) / 2.
template <class C>
Polynomial<C> gamma(const SubLaplacian<C>& L, const Polynomial<C>& f, const Polynomial<C>& g) {
    check_same_vars(f, g);
    if (L.vars() != f.vars()) throw std::invalid_argument("gamma: dimension mismatch");
    Polynomial<C> r = L.apply(f * g) - f * L.apply(g) - g * L.apply(f);
    return C(1) / C(2) * r;
}

// Sum-of-squares route sum_i (X_i f)(X_i g); used as an independent oracle for gamma.
template <class C>
Polynomial<C> gamma_frame(const SubLaplacian<C>& L, const Polynomial<C>& f, const Polynomial<C>& g) {
    check_same_vars(f, g);
    Polynomial<C> r(f.vars());
    for (const auto& x : L.horizontal) r += x.apply(f) * x.apply(g);
    return r;
}

// Vertical form Gamma^Z(f,g) = sum_k (Z_k f)(Z_k g).
template <class C>
Polynomial<C> gamma_z(const std::vector<VectorField<C>>& zs, const Polynomial<C>& f, const Polynomial<C>& g) {
    check_same_vars(f, g);
    if (zs.empty()) throw std::invalid_argument("gamma_z: empty vertical frame");
    Polynomial<C> r(f.vars());
    for (const auto& z : zs) {
        if (z.vars() != f.vars()) throw std::invalid_argument("gamma_z: dimension mismatch");
        r += z.apply(f) * z.apply(g);
    }
    return r;
}

// Gamma_2(f) = [L Gamma(f,f) - 2 Gamma(f, Lf)] / 2.
template <class C>
Polynomial<C> gamma2(const SubLaplacian<C>& L, const Polynomial<C>& f) {
    Polynomial<C> lf = L.apply(f);
    Polynomial<C> r = L.apply(gamma(L, f, f)) - C(2) * gamma(L, f, lf);
    return C(1) / C(2) * r;
}

// Gamma_2^Z(f) = [L Gamma^Z(f,f) - 2 Gamma^Z(f, Lf)] / 2.
template <class C>
Polynomial<C> gamma2_z(const SubLaplacian<C>& L, const std::vector<VectorField<C>>& zs,
                       const Polynomial<C>& f) {
    Polynomial<C> lf = L.apply(f);
    Polynomial<C> r = L.apply(gamma_z(zs, f, f)) - C(2) * gamma_z(zs, f, lf);
    return C(1) / C(2) * r;
}

// Gamma(f, Gamma^Z(f)) - Gamma^Z(f, Gamma(f)); identically zero where the
// commutation hypothesis between horizontal and vertical forms holds.
template <class C>
Polynomial<C> hypothesis_h2_residual(const SubLaplacian<C>& L, const std::vector<VectorField<C>>& zs,
                                     const Polynomial<C>& f) {
    return gamma(L, f, gamma_z(zs, f, f)) - gamma_z(zs, f, gamma(L, f, f));
}

// The five polynomial ingredients of the CD inequality, computed once per f.
template <class C>
struct CdTerms {
    Polynomial<C> g2;   // Gamma_2(f)
    Polynomial<C> g2z;  // Gamma_2^Z(f)
    Polynomial<C> lf;   // Lf
    Polynomial<C> g;    // Gamma(f)
    Polynomial<C> gz;   // Gamma^Z(f)
};

template <class C>
CdTerms<C> cd_terms(const SubLaplacian<C>& L, const std::vector<VectorField<C>>& zs,
                    const Polynomial<C>& f) {
    CdTerms<C> t;
    t.g2 = gamma2(L, f);
    t.g2z = gamma2_z(L, zs, f);
    t.lf = L.apply(f);
    t.g = gamma(L, f, f);
    t.gz = gamma_z(zs, f, f);
    return t;
}

template <class C>
struct CdTermsAt {
    C g2, g2z, lf, g, gz;
};

template <class C>
CdTermsAt<C> eval_terms(const CdTerms<C>& t, const std::vector<C>& point) {
    return {t.g2.eval(point), t.g2z.eval(point), t.lf.eval(point), t.g.eval(point), t.gz.eval(point)};
}

// LHS - RHS of the CD inequality at one (f, point, nu); >= 0 iff the
// inequality holds there.
template <class C>
C cd_residual(const CdTermsAt<C>& t, const CdParamsT<C>& p, const C& nu) {
    if (!(nu > C(0))) throw std::invalid_argument("cd_residual: nu must be > 0");
    return t.g2 + nu * t.g2z - t.lf * t.lf / p.d - (p.rho1 - p.kappa / nu) * t.g - p.rho2 * t.gz;
}

template <class C>
CdTermsAt<C> eval_cd_residual_terms(const SubLaplacian<C>& L, const std::vector<VectorField<C>>& zs,
                                    const Polynomial<C>& f, const std::vector<C>& point) {
    return eval_terms(cd_terms(L, zs, f), point);
}

// nu -> infinity limit: +infinity unless Gamma_2^Z vanishes at the point, in
// which case the residual tends to the nu-free bracket.
template <class C>
std::optional<C> cd_residual_limit(const CdTermsAt<C>& t, const CdParamsT<C>& p) {
    if (!(t.g2z == C(0))) return std::nullopt; // diverges to +infinity when g2z > 0
    return t.g2 - t.lf * t.lf / p.d - p.rho1 * t.g - p.rho2 * t.gz;
}

// Largest admissible rho1; "unbounded" when no sample constrains it.
struct BestRho1 {
    bool bounded = false;
    double value = 0.0;
};

struct CdSample {
    PolyD f;
    std::vector<double> point;
};

// Pointwise best rho1 over a sample spec: for each (f, point, nu) with
// Gamma(f) > 0 the residual is linear decreasing in rho1, giving the
// constraint rho1 <= base / Gamma(f).
inline BestRho1 cd_best_rho1(const SubLaplacian<double>& L, const std::vector<VectorField<double>>& zs,
                             double rho2, double kappa, double d,
                             const std::vector<CdSample>& samples, const std::vector<double>& nu_grid) {
    if (samples.empty()) throw std::invalid_argument("cd_best_rho1: empty sample spec");
    CDParams base_params(0.0, rho2, kappa, d);
    BestRho1 best;
    for (const auto& s : samples) {
        CdTerms<double> terms = cd_terms(L, zs, s.f);
        CdTermsAt<double> t = eval_terms(terms, s.point);
        if (!(t.g > 0.0)) continue;
        for (double nu : nu_grid) {
            double base = cd_residual(t, base_params, nu); // residual at rho1 = 0
            double bound = base / t.g;
            if (!best.bounded || bound < best.value) {
                best.bounded = true;
                best.value = bound;
            }
        }
        // nu -> infinity limit constraint
        if (t.g2z == 0.0) {
            double base = t.g2 - t.lf * t.lf / d - rho2 * t.gz;
            double bound = base / t.g;
            if (!best.bounded || bound < best.value) {
                best.bounded = true;
                best.value = bound;
            }
        }
    }
    return best;
}

} // namespace subrk

#endif
