// Copyright 2026 The Straight Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STRAIGHT_RATIONAL_HPP_
#define STRAIGHT_RATIONAL_HPP_

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>

namespace straight {

// Arbitrary precision rational, always kept in lowest terms.
using Rational = mpq_class;

// Parses an unsigned decimal literal ("12", "0.5", "1.25e-3") exactly.
// Throws std::invalid_argument on malformed input.
Rational rational_from_decimal(std::string_view text);

std::size_t hash_rational(const Rational& q);

// Exact Gaussian-rational number re + im*i.
class ComplexRational {
 public:
  ComplexRational() = default;
  ComplexRational(long v) : re_(v) {}  // NOLINT(google-explicit-constructor)
  ComplexRational(Rational re) : re_(std::move(re)) { re_.canonicalize(); }  // NOLINT
  ComplexRational(Rational re, Rational im) : re_(std::move(re)), im_(std::move(im)) {
    re_.canonicalize();
    im_.canonicalize();
  }

  static ComplexRational imaginary_unit() { return {Rational(0), Rational(1)}; }

  const Rational& re() const { return re_; }
  const Rational& im() const { return im_; }

  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
  bool is_one() const { return re_ == 1 && sgn(im_) == 0; }
  bool is_real() const { return sgn(im_) == 0; }

  std::complex<double> to_complex() const {
    return {re_.get_d(), im_.get_d()};
  }

  ComplexRational operator-() const { return {-re_, -im_}; }
  ComplexRational& operator+=(const ComplexRational& o);
  ComplexRational& operator-=(const ComplexRational& o);
  ComplexRational& operator*=(const ComplexRational& o);
  // Throws std::domain_error on division by zero.
  ComplexRational& operator/=(const ComplexRational& o);

  friend ComplexRational operator+(ComplexRational a, const ComplexRational& b) {
    return a += b;
  }
  friend ComplexRational operator-(ComplexRational a, const ComplexRational& b) {
    return a -= b;
  }
  friend ComplexRational operator*(ComplexRational a, const ComplexRational& b) {
    return a *= b;
  }
  friend ComplexRational operator/(ComplexRational a, const ComplexRational& b) {
    return a /= b;
  }
  friend bool operator==(const ComplexRational& a, const ComplexRational& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }

  // Integer power; negative exponents of zero throw std::domain_error.
  ComplexRational pow(std::int64_t exponent) const;

  std::size_t hash() const;

  // Rendering that reparses to the same value, e.g. "3", "1/2", "2*i",
  // "(1/2 - 3*i)".
  std::string to_string() const;

 private:
  Rational re_{0};
  Rational im_{0};
};

}  // namespace straight

#endif  // STRAIGHT_RATIONAL_HPP_
