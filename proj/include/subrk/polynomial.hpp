#ifndef SUBRK_POLYNOMIAL_HPP
#define SUBRK_POLYNOMIAL_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "subrk/rational.hpp"

namespace subrk {

template <class To, class From>
To coeff_cast(const From& c) { return To(c); }
template <>
inline double coeff_cast<double, Rational>(const Rational& c) { return to_double(c); }
template <>
inline Rational coeff_cast<Rational, double>(const double& c) { return rational_from_double(c); }

// Exact multivariate polynomial in canonical form (sorted monomial map, no
// zero coefficients stored). Coefficient type C is Rational for the exact
// calculus and double for large numeric sweeps.
template <class C>
class Polynomial {
public:
    using Monomial = std::vector<unsigned>;

    explicit Polynomial(int vars = 0) : vars_(vars) {}

    static Polynomial zero(int vars) { return Polynomial(vars); }

    static Polynomial constant(int vars, C c) {
        Polynomial p(vars);
        if (!(c == C(0))) p.terms_[Monomial(vars, 0u)] = std::move(c);
        return p;
    }

    static Polynomial variable(int vars, int i) {
        if (i < 0 || i >= vars) throw std::invalid_argument("Polynomial::variable: index out of range");
        Polynomial p(vars);
        Monomial m(vars, 0u);
        m[i] = 1u;
        p.terms_[m] = C(1);
        return p;
    }

    int vars() const { return vars_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    const std::map<Monomial, C>& terms() const { return terms_; }

    int degree() const {
        int deg = -1;
        for (const auto& [m, c] : terms_) {
            int d = 0;
            for (unsigned e : m) d += static_cast<int>(e);
            if (d > deg) deg = d;
        }
        return deg;
    }

    void add_term(const Monomial& m, const C& c) {
        if (static_cast<int>(m.size()) != vars_) throw std::invalid_argument("Polynomial::add_term: bad monomial");
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            if (!(c == C(0))) terms_[m] = c;
        } else {
            it->second += c;
            if (it->second == C(0)) terms_.erase(it);
        }
    }

    Polynomial& operator+=(const Polynomial& o) {
        check_vars(o);
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        check_vars(o);
        for (const auto& [m, c] : o.terms_) add_term(m, C(-c));
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    Polynomial operator-() const {
        Polynomial r(vars_);
        for (const auto& [m, c] : terms_) r.terms_[m] = C(-c);
        return r;
    }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        a.check_vars(b);
        Polynomial r(a.vars_);
        for (const auto& [ma, ca] : a.terms_) {
            for (const auto& [mb, cb] : b.terms_) {
                Monomial m(a.vars_);
                for (int i = 0; i < a.vars_; ++i) m[i] = ma[i] + mb[i];
                r.add_term(m, ca * cb);
            }
        }
        return r;
    }

    friend Polynomial operator*(const C& s, const Polynomial& p) {
        Polynomial r(p.vars_);
        if (s == C(0)) return r;
        for (const auto& [m, c] : p.terms_) r.terms_[m] = s * c;
        return r;
    }
    friend Polynomial operator*(const Polynomial& p, const C& s) { return s * p; }

    Polynomial derivative(int i) const {
        if (i < 0 || i >= vars_) throw std::invalid_argument("Polynomial::derivative: index out of range");
        Polynomial r(vars_);
        for (const auto& [m, c] : terms_) {
            if (m[i] == 0) continue;
            Monomial mm = m;
            mm[i] -= 1;
            r.add_term(mm, c * C(static_cast<int>(m[i])));
        }
        return r;
    }

    C eval(const std::vector<C>& point) const {
        if (static_cast<int>(point.size()) != vars_) throw std::invalid_argument("Polynomial::eval: bad point dimension");
        C acc(0);
        for (const auto& [m, c] : terms_) {
            C t = c;
            for (int i = 0; i < vars_; ++i) {
                for (unsigned k = 0; k < m[i]; ++k) t *= point[i];
            }
            acc += t;
        }
        return acc;
    }

    template <class To>
    Polynomial<To> convert() const {
        Polynomial<To> r(vars_);
        for (const auto& [m, c] : terms_) r.add_term(m, coeff_cast<To>(c));
        return r;
    }

    bool operator==(const Polynomial& o) const { return vars_ == o.vars_ && terms_ == o.terms_; }
    bool operator!=(const Polynomial& o) const { return !(*this == o); }

private:
    void check_vars(const Polynomial& o) const {
        if (vars_ != o.vars_) throw std::invalid_argument("Polynomial: variable count mismatch");
    }

    int vars_;
    std::map<Monomial, C> terms_;
};

using PolyQ = Polynomial<Rational>;
using PolyD = Polynomial<double>;

} // namespace subrk

#endif
