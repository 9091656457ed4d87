#ifndef SUBRK_VECTOR_FIELD_HPP
#define SUBRK_VECTOR_FIELD_HPP

#include <stdexcept>
#include <vector>

#include "subrk/polynomial.hpp"

namespace subrk {

// First-order operator sum_i a_i(x) d/dx_i with polynomial coefficients.
template <class C>
struct VectorField {
    std::vector<Polynomial<C>> coef; // one per coordinate

    int vars() const { return static_cast<int>(coef.size()); }

    Polynomial<C> apply(const Polynomial<C>& f) const {
        if (f.vars() != vars()) throw std::invalid_argument("VectorField::apply: dimension mismatch");
        Polynomial<C> r(f.vars());
        for (int i = 0; i < vars(); ++i) {
            if (coef[i].is_zero()) continue;
            r += coef[i] * f.derivative(i);
        }
        return r;
    }
};

// Lie bracket [V, W] as a first-order operator (exact for any polynomial fields).
template <class C>
VectorField<C> bracket(const VectorField<C>& v, const VectorField<C>& w) {
    if (v.vars() != w.vars()) throw std::invalid_argument("bracket: dimension mismatch");
    int n = v.vars();
    VectorField<C> r;
    r.coef.reserve(n);
    for (int i = 0; i < n; ++i) {
        r.coef.push_back(v.apply(w.coef[i]) - w.apply(v.coef[i]));
    }
    return r;
}

// L = sum_i X_i^2 for a horizontal frame {X_i}.
template <class C>
struct SubLaplacian {
    std::vector<VectorField<C>> horizontal;

    int vars() const { return horizontal.empty() ? 0 : horizontal.front().vars(); }

    Polynomial<C> apply(const Polynomial<C>& f) const {
        Polynomial<C> r(f.vars());
        for (const auto& x : horizontal) r += x.apply(x.apply(f));
        return r;
    }
};

} // namespace subrk

#endif
