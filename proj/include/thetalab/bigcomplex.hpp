#pragma once

// Arbitrary-precision complex scalar: a pair of BigFloats plus the shared
// decimal-digit precision tag. Elementary functions (exp, log, sqrt, sin,
// cos) are built from MPFR real kernels. In-place mutators avoid temporary
// churn in the hot series loops.

#include <algorithm>
#include <string>
#include <utility>

#include "thetalab/bigfloat.hpp"
#include "thetalab/error.hpp"

namespace thetalab {

class BigComplex {
 public:
  explicit BigComplex(int digits = kDefaultDigits) : re_(digits), im_(digits) {}
  BigComplex(BigFloat re, BigFloat im) : re_(std::move(re)), im_(std::move(im)) {
    int d = std::max(re_.digits(), im_.digits());
    if (re_.digits() != d) re_ = re_ + BigFloat(d);
    if (im_.digits() != d) im_ = im_ + BigFloat(d);
  }
  BigComplex(long re, long im, int digits) : re_(re, digits), im_(im, digits) {}
  BigComplex(const std::string& re, const std::string& im, int digits)
      : re_(re, digits), im_(im, digits) {}
  static BigComplex from_real(BigFloat re) {
    int d = re.digits();
    return BigComplex(std::move(re), BigFloat(d));
  }

  const BigFloat& re() const { return re_; }
  const BigFloat& im() const { return im_; }
  BigFloat& re() { return re_; }
  BigFloat& im() { return im_; }
  int digits() const { return std::max(re_.digits(), im_.digits()); }

  bool is_finite() const { return re_.is_finite() && im_.is_finite(); }
  bool is_zero() const { return re_.is_zero() && im_.is_zero(); }

  friend BigComplex operator+(const BigComplex& a, const BigComplex& b) {
    return BigComplex(a.re_ + b.re_, a.im_ + b.im_);
  }
  friend BigComplex operator-(const BigComplex& a, const BigComplex& b) {
    return BigComplex(a.re_ - b.re_, a.im_ - b.im_);
  }
  BigComplex operator-() const { return BigComplex(-re_, -im_); }

  friend BigComplex operator*(const BigComplex& a, const BigComplex& b) {
    BigComplex r(std::max(a.digits(), b.digits()));
    mul(r, a, b);
    return r;
  }
  friend BigComplex operator/(const BigComplex& a, const BigComplex& b) {
    BigComplex r(std::max(a.digits(), b.digits()));
    div(r, a, b);
    return r;
  }
  friend BigComplex operator*(const BigComplex& a, const BigFloat& s) {
    return BigComplex(a.re_ * s, a.im_ * s);
  }
  friend BigComplex operator*(const BigComplex& a, long s) {
    return BigComplex(a.re_ * s, a.im_ * s);
  }
  friend BigComplex operator/(const BigComplex& a, const BigFloat& s) {
    return BigComplex(a.re_ / s, a.im_ / s);
  }

  BigComplex& operator+=(const BigComplex& b) { re_ += b.re_; im_ += b.im_; return *this; }
  BigComplex& operator-=(const BigComplex& b) { re_ -= b.re_; im_ -= b.im_; return *this; }
  BigComplex& operator*=(const BigComplex& b) {
    BigComplex t(digits());
    mul(t, *this, b);
    *this = std::move(t);
    return *this;
  }
  BigComplex& operator/=(const BigComplex& b) {
    BigComplex t(digits());
    div(t, *this, b);
    *this = std::move(t);
    return *this;
  }

  // out = a*b, out must not alias a or b.
  static void mul(BigComplex& out, const BigComplex& a, const BigComplex& b) {
    mpfr_fmms(out.re_.raw(), a.re_.raw(), b.re_.raw(), a.im_.raw(), b.im_.raw(), MPFR_RNDN);
    mpfr_fmma(out.im_.raw(), a.re_.raw(), b.im_.raw(), a.im_.raw(), b.re_.raw(), MPFR_RNDN);
  }
  // out += a*b, out must not alias a or b; scratch for the two products.
  static void addmul(BigComplex& out, const BigComplex& a, const BigComplex& b, BigComplex& scratch) {
    mul(scratch, a, b);
    out += scratch;
  }
  // out = a/b, out must not alias a or b.
  static void div(BigComplex& out, const BigComplex& a, const BigComplex& b) {
    if (b.is_zero()) throw Error(ErrorKind::DegenerateInput, "complex division by zero");
    BigFloat den(std::max(a.digits(), b.digits()));
    mpfr_fmma(den.raw(), b.re_.raw(), b.re_.raw(), b.im_.raw(), b.im_.raw(), MPFR_RNDN);
    mpfr_fmma(out.re_.raw(), a.re_.raw(), b.re_.raw(), a.im_.raw(), b.im_.raw(), MPFR_RNDN);
    mpfr_fmms(out.im_.raw(), a.im_.raw(), b.re_.raw(), a.re_.raw(), b.im_.raw(), MPFR_RNDN);
    out.re_ /= den;
    out.im_ /= den;
  }

  friend bool operator==(const BigComplex& a, const BigComplex& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }

  friend BigComplex conj(const BigComplex& a) { return BigComplex(a.re_, -a.im_); }
  friend BigFloat abs(const BigComplex& a) { return hypot(a.re_, a.im_); }
  friend BigFloat arg(const BigComplex& a) { return atan2(a.im_, a.re_); }
  friend BigFloat norm1(const BigComplex& a) { return abs(a.re_) + abs(a.im_); }

  friend BigComplex exp(const BigComplex& a) {
    BigFloat m = exp(a.re_);
    return BigComplex(m * cos(a.im_), m * sin(a.im_));
  }
  // Principal branch, Im in (-pi, pi].
  friend BigComplex log(const BigComplex& a) {
    if (a.is_zero()) throw Error(ErrorKind::DegenerateInput, "log of zero");
    return BigComplex(log(abs(a)), arg(a));
  }
  friend BigComplex sqrt(const BigComplex& a) {
    int d = a.digits();
    if (a.is_zero()) return BigComplex(d);
    BigFloat m = abs(a);
    if (a.re_.sgn() >= 0) {
      BigFloat x = sqrt((m + a.re_) / 2);
      return BigComplex(x, a.im_ / (x * 2));
    }
    BigFloat y = sqrt((m - a.re_) / 2);
    if (a.im_.sgn() < 0) y = -y;
    return BigComplex(a.im_ / (y * 2), y);
  }
  friend BigComplex sin(const BigComplex& a) {
    return BigComplex(sin(a.re_) * cosh(a.im_), cos(a.re_) * sinh(a.im_));
  }
  friend BigComplex cos(const BigComplex& a) {
    return BigComplex(cos(a.re_) * cosh(a.im_), -(sin(a.re_) * sinh(a.im_)));
  }
  friend BigComplex pow_si(const BigComplex& a, long e) {
    int d = a.digits();
    if (e == 0) return BigComplex(1, 0, d);
    BigComplex base = e < 0 ? BigComplex(1, 0, d) / a : a;
    unsigned long n = static_cast<unsigned long>(e < 0 ? -e : e);
    BigComplex acc(1, 0, d);
    BigComplex t(d);
    while (n) {
      if (n & 1) {
        mul(t, acc, base);
        swap(acc, t);
      }
      n >>= 1;
      if (n) {
        mul(t, base, base);
        swap(base, t);
      }
    }
    return acc;
  }

  std::string str(int ndigits = -1) const {
    return "(" + re_.str(ndigits) + ", " + im_.str(ndigits) + ")";
  }

  friend void swap(BigComplex& a, BigComplex& b) noexcept {
    swap(a.re_, b.re_);
    swap(a.im_, b.im_);
  }

 private:
  BigFloat re_, im_;
};

inline BigComplex cpx(long re, long im, int digits) { return BigComplex(re, im, digits); }

// e^{i*t}
inline BigComplex unit_phase(const BigFloat& t) {
  return BigComplex(cos(t), sin(t));
}

inline void check_finite(const BigComplex& v, const char* where) {
  if (!v.is_finite()) throw Error(ErrorKind::Internal, std::string("non-finite value in ") + where);
}

}  // namespace thetalab
