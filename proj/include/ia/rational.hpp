// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace ia {

// Exact arithmetic for every DoF value. Bounds like 8/3 must survive
// serialization and equality tests without rounding, and the symbol-extension
// counts grow past 64 bits for the larger (K, R, n) tuples.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Canonical "p/q" form with q > 0; integers render as "3/1".
inline std::string to_fraction(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

inline BigInt pow_big(BigInt base, int exp) {
  BigInt out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace ia
