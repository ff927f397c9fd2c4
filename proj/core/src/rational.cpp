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

#include "straight/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace straight {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  // splitmix64 finalizer over the running hash.
  std::uint64_t z = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return static_cast<std::size_t>(z ^ (z >> 31));
}

std::size_t hash_mpz(const mpz_class& z) {
  std::size_t h = static_cast<std::size_t>(sgn(z) + 2);
  const std::size_t limbs = mpz_size(z.get_mpz_t());
  for (std::size_t k = 0; k < limbs; ++k) {
    h = mix(h, static_cast<std::size_t>(mpz_getlimbn(z.get_mpz_t(), k)));
  }
  return h;
}

}  // namespace

Rational rational_from_decimal(std::string_view text) {
  std::size_t pos = 0;
  std::string digits;
  long scale = 0;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
    digits.push_back(text[pos++]);
  }
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[pos]))) {
      digits.push_back(text[pos++]);
      --scale;
    }
  }
  if (digits.empty()) {
    throw std::invalid_argument("malformed number '" + std::string(text) + "'");
  }
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    bool negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      negative = text[pos] == '-';
      ++pos;
    }
    if (pos == text.size()) {
      throw std::invalid_argument("malformed exponent in '" + std::string(text) + "'");
    }
    long exponent = 0;
    while (pos < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[pos]))) {
      exponent = exponent * 10 + (text[pos++] - '0');
      if (exponent > 100000) {
        throw std::invalid_argument("exponent out of range in '" + std::string(text) + "'");
      }
    }
    scale += negative ? -exponent : exponent;
  }
  if (pos != text.size()) {
    throw std::invalid_argument("malformed number '" + std::string(text) + "'");
  }
  mpz_class numerator(digits, 10);
  mpz_class power;
  mpz_ui_pow_ui(power.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
  Rational q = scale < 0 ? Rational(numerator, power) : Rational(numerator * power);
  q.canonicalize();
  return q;
}

std::size_t hash_rational(const Rational& q) {
  return mix(hash_mpz(q.get_num()), hash_mpz(q.get_den()));
}

ComplexRational& ComplexRational::operator+=(const ComplexRational& o) {
  re_ += o.re_;
  im_ += o.im_;
  return *this;
}

ComplexRational& ComplexRational::operator-=(const ComplexRational& o) {
  re_ -= o.re_;
  im_ -= o.im_;
  return *this;
}

ComplexRational& ComplexRational::operator*=(const ComplexRational& o) {
  if (is_real() && o.is_real()) {
    re_ *= o.re_;
    return *this;
  }
  Rational re = re_ * o.re_ - im_ * o.im_;
  Rational im = re_ * o.im_ + im_ * o.re_;
  re_ = std::move(re);
  im_ = std::move(im);
  return *this;
}

ComplexRational& ComplexRational::operator/=(const ComplexRational& o) {
  if (o.is_zero()) throw std::domain_error("division by zero");
  if (o.is_real()) {
    re_ /= o.re_;
    im_ /= o.re_;
    return *this;
  }
  const Rational norm = o.re_ * o.re_ + o.im_ * o.im_;
  Rational re = (re_ * o.re_ + im_ * o.im_) / norm;
  Rational im = (im_ * o.re_ - re_ * o.im_) / norm;
  re_ = std::move(re);
  im_ = std::move(im);
  return *this;
}

ComplexRational ComplexRational::pow(std::int64_t exponent) const {
  if (exponent < 0) {
    if (is_zero()) throw std::domain_error("zero raised to a negative power");
    return ComplexRational(1) / pow(-exponent);
  }
  ComplexRational result(1);
  ComplexRational base = *this;
  auto e = static_cast<std::uint64_t>(exponent);
  while (e != 0) {
    if (e & 1U) result *= base;
    e >>= 1U;
    if (e != 0) base *= base;
  }
  return result;
}

std::size_t ComplexRational::hash() const {
  return mix(hash_rational(re_), hash_rational(im_));
}

std::string ComplexRational::to_string() const {
  if (is_real()) return re_.get_str();
  std::string imag;
  const Rational abs_im = abs(im_);
  imag = abs_im == 1 ? "i" : abs_im.get_str() + "*i";
  if (sgn(re_) == 0) {
    return sgn(im_) < 0 ? "(-" + imag + ")" : imag;
  }
  return "(" + re_.get_str() + (sgn(im_) < 0 ? " - " : " + ") + imag + ")";
}

}  // namespace straight
