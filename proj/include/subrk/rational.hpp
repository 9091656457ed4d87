#ifndef SUBRK_RATIONAL_HPP
#define SUBRK_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

namespace subrk {

using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }
inline double to_double(double x) { return x; }

// Exact conversion: every finite double is a dyadic rational.
Rational rational_from_double(double x);

} // namespace subrk

#endif
