// SPDX-License-Identifier: Apache-2.0
#include "rddl/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace rddl {

Rational rational_from_decimal(const std::string& text) {
  auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(BigInt(text));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  std::size_t frac_len = text.size() - dot - 1;
  BigInt num(digits);
  BigInt den = 1;
  for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
  return Rational(num, den);
}

Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite double");
  if (v == 0.0) return Rational(0);
  int exp = 0;
  double m = std::frexp(v, &exp);  // v = m * 2^exp, 0.5 <= |m| < 1
  // 53 bits of mantissa
  BigInt num = BigInt(static_cast<long long>(std::ldexp(m, 53)));
  exp -= 53;
  Rational r(num);
  if (exp > 0) {
    BigInt p = BigInt(1) << exp;
    r *= Rational(p);
  } else if (exp < 0) {
    BigInt p = BigInt(1) << (-exp);
    r /= Rational(p);
  }
  return r;
}

double rational_to_double(const Rational& r) {
  return static_cast<double>(r);
}

bool rational_has_finite_decimal(const Rational& r) {
  BigInt den = denominator(r);
  for (const BigInt& f : {BigInt(2), BigInt(5)}) {
    while (den % f == 0) den /= f;
  }
  return den == 1;
}

std::string rational_to_string(const Rational& r) {
  BigInt num = numerator(r);
  BigInt den = denominator(r);
  if (den == 1) return num.str();
  if (!rational_has_finite_decimal(r)) return num.str() + "/" + den.str();
  // scale denominator to a power of ten
  BigInt d = den;
  int twos = 0, fives = 0;
  while (d % 2 == 0) { d /= 2; ++twos; }
  while (d % 5 == 0) { d /= 5; ++fives; }
  int k = std::max(twos, fives);
  BigInt scale = 1;
  for (int i = twos; i < k; ++i) scale *= 2;
  for (int i = fives; i < k; ++i) scale *= 5;
  BigInt scaled = num * scale;  // value = scaled / 10^k
  bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  std::string digits = scaled.str();
  if (static_cast<int>(digits.size()) <= k)
    digits = std::string(k - digits.size() + 1, '0') + digits;
  std::string out = digits.substr(0, digits.size() - k) + "." + digits.substr(digits.size() - k);
  return (neg ? "-" : "") + out;
}

}  // namespace rddl
