// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <string>

namespace rddl {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Parses a decimal literal ("3", "0.25", "17.5") into an exact rational.
Rational rational_from_decimal(const std::string& text);

/// Exact rational from a double (doubles are binary rationals).
Rational rational_from_double(double v);

double rational_to_double(const Rational& r);

/// Renders r as a finite decimal when the reduced denominator is 2^a*5^b,
/// otherwise as "p/q".
std::string rational_to_string(const Rational& r);

/// Decimal rendering is possible iff denominator is of the form 2^a*5^b.
bool rational_has_finite_decimal(const Rational& r);

}  // namespace rddl
