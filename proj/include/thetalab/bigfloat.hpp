#pragma once

// Arbitrary-precision real scalar on top of MPFR, tagged with a working
// precision in decimal digits. Arithmetic promotes to the max precision of
// the operands, matching the contract of the complex type built on top.

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <string>
#include <utility>

#include "thetalab/error.hpp"

namespace thetalab {

constexpr int kDefaultDigits = 50;
constexpr int kMinDigits = 30;

inline mpfr_prec_t bits_for_digits(int digits) {
  if (digits < 2) digits = 2;
  return static_cast<mpfr_prec_t>(std::ceil(digits * 3.3219280948873623)) + 16;
}

class BigFloat {
 public:
  explicit BigFloat(int digits = kDefaultDigits) : digits_(digits) {
    mpfr_init2(v_, bits_for_digits(digits));
    mpfr_set_zero(v_, 1);
  }
  BigFloat(long value, int digits) : digits_(digits) {
    mpfr_init2(v_, bits_for_digits(digits));
    mpfr_set_si(v_, value, MPFR_RNDN);
  }
  BigFloat(const std::string& s, int digits) : digits_(digits) {
    mpfr_init2(v_, bits_for_digits(digits));
    if (mpfr_set_str(v_, s.c_str(), 10, MPFR_RNDN) != 0)
      throw Error(ErrorKind::Usage, "cannot parse decimal number '" + s + "'");
  }
  static BigFloat from_double(double value, int digits) {
    BigFloat r(digits);
    mpfr_set_d(r.v_, value, MPFR_RNDN);
    return r;
  }

  BigFloat(const BigFloat& o) : digits_(o.digits_) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  BigFloat(BigFloat&& o) noexcept : digits_(o.digits_) {
    mpfr_init2(v_, 2);
    mpfr_swap(v_, o.v_);
  }
  BigFloat& operator=(const BigFloat& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
      digits_ = o.digits_;
    }
    return *this;
  }
  BigFloat& operator=(BigFloat&& o) noexcept {
    if (this != &o) {
      mpfr_swap(v_, o.v_);
      digits_ = o.digits_;
    }
    return *this;
  }
  ~BigFloat() { mpfr_clear(v_); }

  int digits() const { return digits_; }
  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sgn() const { return mpfr_sgn(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }

  // Decimal string in scientific form with an explicit digit count.
  std::string str(int ndigits = -1) const {
    if (ndigits <= 0) ndigits = digits_;
    char* s = nullptr;
    mpfr_asprintf(&s, "%.*Re", ndigits - 1, v_);
    std::string out(s);
    mpfr_free_str(s);
    return out;
  }

  static BigFloat pi(int digits) {
    static std::mutex mu;  // mpfr's constant cache is grown under lock
    std::lock_guard<std::mutex> g(mu);
    BigFloat r(digits);
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
  }

  friend BigFloat operator+(const BigFloat& a, const BigFloat& b) {
    BigFloat r(std::max(a.digits_, b.digits_));
    mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator-(const BigFloat& a, const BigFloat& b) {
    BigFloat r(std::max(a.digits_, b.digits_));
    mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator*(const BigFloat& a, const BigFloat& b) {
    BigFloat r(std::max(a.digits_, b.digits_));
    mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator/(const BigFloat& a, const BigFloat& b) {
    BigFloat r(std::max(a.digits_, b.digits_));
    mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  BigFloat operator-() const {
    BigFloat r(digits_);
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
  }

  BigFloat& operator+=(const BigFloat& b) { promote(b); mpfr_add(v_, v_, b.v_, MPFR_RNDN); return *this; }
  BigFloat& operator-=(const BigFloat& b) { promote(b); mpfr_sub(v_, v_, b.v_, MPFR_RNDN); return *this; }
  BigFloat& operator*=(const BigFloat& b) { promote(b); mpfr_mul(v_, v_, b.v_, MPFR_RNDN); return *this; }
  BigFloat& operator/=(const BigFloat& b) { promote(b); mpfr_div(v_, v_, b.v_, MPFR_RNDN); return *this; }
  BigFloat& operator*=(long k) { mpfr_mul_si(v_, v_, k, MPFR_RNDN); return *this; }
  BigFloat& operator/=(long k) { mpfr_div_si(v_, v_, k, MPFR_RNDN); return *this; }

  friend BigFloat operator*(const BigFloat& a, long k) {
    BigFloat r(a.digits_);
    mpfr_mul_si(r.v_, a.v_, k, MPFR_RNDN);
    return r;
  }
  friend BigFloat operator/(const BigFloat& a, long k) {
    BigFloat r(a.digits_);
    mpfr_div_si(r.v_, a.v_, k, MPFR_RNDN);
    return r;
  }

  friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator>(const BigFloat& a, const BigFloat& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
  friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
  friend bool operator>=(const BigFloat& a, const BigFloat& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }
  friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend bool operator!=(const BigFloat& a, const BigFloat& b) { return !(a == b); }
  bool less_than(long k) const { return mpfr_cmp_si(v_, k) < 0; }

  friend BigFloat abs(const BigFloat& a) {
    BigFloat r(a.digits_);
    mpfr_abs(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat sqrt(const BigFloat& a) {
    BigFloat r(a.digits_);
    mpfr_sqrt(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat exp(const BigFloat& a) {
    BigFloat r(a.digits_);
    mpfr_exp(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat log(const BigFloat& a) {
    BigFloat r(a.digits_);
    mpfr_log(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat log10(const BigFloat& a) {
    BigFloat r(a.digits_);
    mpfr_log10(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat sin(const BigFloat& a) {
    BigFloat r(a.digits_);
    mpfr_sin(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat cos(const BigFloat& a) {
    BigFloat r(a.digits_);
    mpfr_cos(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat sinh(const BigFloat& a) {
    BigFloat r(a.digits_);
    mpfr_sinh(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat cosh(const BigFloat& a) {
    BigFloat r(a.digits_);
    mpfr_cosh(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat atan2(const BigFloat& y, const BigFloat& x) {
    BigFloat r(std::max(y.digits_, x.digits_));
    mpfr_atan2(r.v_, y.v_, x.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat hypot(const BigFloat& x, const BigFloat& y) {
    BigFloat r(std::max(y.digits_, x.digits_));
    mpfr_hypot(r.v_, x.v_, y.v_, MPFR_RNDN);
    return r;
  }
  friend BigFloat pow_si(const BigFloat& a, long e) {
    BigFloat r(a.digits_);
    mpfr_pow_si(r.v_, a.v_, e, MPFR_RNDN);
    return r;
  }
  friend BigFloat max(const BigFloat& a, const BigFloat& b) { return a >= b ? a : b; }
  friend BigFloat min(const BigFloat& a, const BigFloat& b) { return a <= b ? a : b; }

  friend const BigFloat& maxref(const BigFloat& a, const BigFloat& b) { return a >= b ? a : b; }

  friend void swap(BigFloat& a, BigFloat& b) noexcept {
    mpfr_swap(a.v_, b.v_);
    std::swap(a.digits_, b.digits_);
  }

 private:
  void promote(const BigFloat& b) {
    if (b.digits_ > digits_) {
      mpfr_prec_round(v_, bits_for_digits(b.digits_), MPFR_RNDN);
      digits_ = b.digits_;
    }
  }

  mpfr_t v_;
  int digits_;
};

// a * 2^e
inline BigFloat mul_2si(const BigFloat& a, long e) {
  BigFloat r(a.digits());
  mpfr_mul_2si(r.raw(), a.raw(), e, MPFR_RNDN);
  return r;
}

// Rough log2 |a| (exponent-based, within 1 of the truth); -inf proxy for 0.
inline double log2_est(const BigFloat& a) {
  if (a.is_zero()) return -1e18;
  return static_cast<double>(mpfr_get_exp(a.raw()));
}

// 10^e at the given working precision.
inline BigFloat pow10(long e, int digits) {
  BigFloat r(digits);
  mpfr_ui_pow_ui(r.raw(), 10, static_cast<unsigned long>(e < 0 ? -e : e), MPFR_RNDN);
  if (e < 0) mpfr_si_div(r.raw(), 1, r.raw(), MPFR_RNDN);
  return r;
}

inline BigFloat bf(long v, int digits) { return BigFloat(v, digits); }

}  // namespace thetalab
