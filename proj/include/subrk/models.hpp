#ifndef SUBRK_MODELS_HPP
#define SUBRK_MODELS_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "subrk/cdc.hpp"
#include "subrk/polynomial.hpp"
#include "subrk/vector_field.hpp"

namespace subrk {

// Point of a step-2 group in exponential coordinates: d horizontal entries
// followed by m vertical entries.
using Point = std::vector<double>;

// Step-2 Carnot group defined by m skew-symmetric d x d structure matrices:
// [X_i, X_j] = sum_k B^(k)_ij Z_k. Entries are exact rationals so that all
// frame/group-law identities can be checked symbolically.
class CarnotModel {
public:
    CarnotModel(int d, int m, std::vector<std::vector<std::vector<Rational>>> structure,
                std::string name = "carnot2");

    int d() const { return d_; }
    int m() const { return m_; }
    int dim() const { return d_ + m_; }
    int homogeneous_dim() const { return d_ + 2 * m_; } // Q
    const std::string& name() const { return name_; }
    bool is_heisenberg() const { return heisenberg_n_ > 0; }
    int heisenberg_n() const { return heisenberg_n_; }

    const Rational& structure(int k, int i, int j) const { return b_[k][i][j]; }
    double structure_d(int k, int i, int j) const { return b_d_[k][i][j]; }

    // Left-invariant horizontal frame X_i = d/dx_i + (1/2) sum_k (B^(k)^T x)_i d/dz_k
    // and vertical frame Z_k = d/dz_k, with exact polynomial coefficients.
    template <class C>
    SubLaplacian<C> sub_laplacian() const;
    template <class C>
    std::vector<VectorField<C>> vertical_frame() const;

    // max_k operator-norm bound on B^(k) (sum-abs row bound), used for ball boxes
    double structure_norm_bound() const;

private:
    int d_, m_;
    std::vector<std::vector<std::vector<Rational>>> b_;
    std::vector<std::vector<std::vector<double>>> b_d_;
    std::string name_;
    int heisenberg_n_ = 0;
};

CarnotModel heisenberg(int n);

// Deterministic pseudo-random step-2 group with small integer structure
// constants (entries in {-2,...,2}), for cross-model property checks.
CarnotModel random_step2_model(int d, int m, std::uint64_t seed);

// Group law (x,z).(x',z') = (x+x', z+z'+ <Bx,x'>/2), templated so the
// associativity and left-invariance checks can run in exact arithmetic.
template <class T>
std::vector<T> compose(const CarnotModel& g, const std::vector<T>& p, const std::vector<T>& q);

template <class T>
std::vector<T> inverse(const CarnotModel& g, const std::vector<T>& p);

Point group_law(const CarnotModel& g, const Point& p, const Point& q);
Point group_inverse(const CarnotModel& g, const Point& p);

// Carnot dilation (lambda x, lambda^2 z).
Point dilation(const CarnotModel& g, double lambda, const Point& p);

// Spec for a Sasakian space represented only through its CD parameters.
struct SasakianSpec {
    int n;
    double rho1;
};

CDParams cd_parameters(const SasakianSpec& spec);

// Numerical estimate of (rho2, kappa) with rho1 = 0 for a concrete step-2
// model; the result carries estimated = true.
CDParams cd_parameters(const CarnotModel& g, std::uint64_t seed = 7, int n_polys = 40, int n_points = 8);

// Model definition file support:
//   {"type":"heisenberg","n":1} | {"type":"carnot2","B":[[[...]]]} |
//   {"type":"sasakian","n":1,"rho1":-1.0}
struct ModelSpec {
    bool is_sasakian = false;
    SasakianSpec sasakian{1, 0.0};
    CarnotModel carnot = heisenberg(1);
};

ModelSpec model_from_json(const std::string& json_text);

// Deterministic random test polynomial: total degree <= max_deg, integer
// coefficients uniform in {-3,...,3} (exact when converted to rationals).
PolyD random_polynomial(int vars, int max_deg, std::mt19937_64& rng);

// ---- template definitions ----

template <class C>
SubLaplacian<C> CarnotModel::sub_laplacian() const {
    int n = dim();
    SubLaplacian<C> L;
    L.horizontal.reserve(d_);
    for (int i = 0; i < d_; ++i) {
        VectorField<C> x;
        x.coef.assign(n, Polynomial<C>::zero(n));
        x.coef[i] = Polynomial<C>::constant(n, C(1));
        for (int k = 0; k < m_; ++k) {
            Polynomial<C> vc(n);
            for (int j = 0; j < d_; ++j) {
                Rational bji = b_[k][j][i];
                if (bji == 0) continue;
                vc += coeff_cast<C>(Rational(bji / 2)) * Polynomial<C>::variable(n, j);
            }
            x.coef[d_ + k] = vc;
        }
        L.horizontal.push_back(std::move(x));
    }
    return L;
}

template <class C>
std::vector<VectorField<C>> CarnotModel::vertical_frame() const {
    int n = dim();
    std::vector<VectorField<C>> zs;
    zs.reserve(m_);
    for (int k = 0; k < m_; ++k) {
        VectorField<C> z;
        z.coef.assign(n, Polynomial<C>::zero(n));
        z.coef[d_ + k] = Polynomial<C>::constant(n, C(1));
        zs.push_back(std::move(z));
    }
    return zs;
}

namespace detail {
// Scalar-vs-polynomial coordinate dispatch for the group law.
template <class T>
struct GroupCoord {
    static T zero_like(const T&) { return T(0); }
    static T half_structure_term(const Rational& b, const T& x, const T& y) {
        return coeff_cast<T>(Rational(b / 2)) * x * y;
    }
};
template <class C>
struct GroupCoord<Polynomial<C>> {
    static Polynomial<C> zero_like(const Polynomial<C>& v) { return Polynomial<C>::zero(v.vars()); }
    static Polynomial<C> half_structure_term(const Rational& b, const Polynomial<C>& x, const Polynomial<C>& y) {
        return coeff_cast<C>(Rational(b / 2)) * (x * y);
    }
};
} // namespace detail

template <class T>
std::vector<T> compose(const CarnotModel& g, const std::vector<T>& p, const std::vector<T>& q) {
    if (static_cast<int>(p.size()) != g.dim() || static_cast<int>(q.size()) != g.dim())
        throw std::invalid_argument("compose: dimension mismatch");
    int d = g.d(), m = g.m();
    std::vector<T> r(g.dim());
    for (int i = 0; i < d; ++i) r[i] = p[i] + q[i];
    for (int k = 0; k < m; ++k) {
        T cross = detail::GroupCoord<T>::zero_like(p[0]);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                const Rational& b = g.structure(k, i, j);
                if (b == 0) continue;
                cross += detail::GroupCoord<T>::half_structure_term(b, p[i], q[j]);
            }
        }
        r[d + k] = p[d + k] + q[d + k] + cross;
    }
    return r;
}

template <class T>
std::vector<T> inverse(const CarnotModel&, const std::vector<T>& p) {
    std::vector<T> r(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) r[i] = -p[i];
    return r;
}

} // namespace subrk

#endif
