#pragma once

// Exact finite approximants and their algebra: the truncations Theta_n,
// scaled Jensen tables, the central sections Psi_m, the even-degree
// palindromic reduction R_m / S_m, and exact evaluation helpers.
//
// A SparseQPoly is a polynomial in one main variable (x, y or u) whose
// coefficients are integer multiples of powers of q. Exponents of q are
// stored doubled (in t-units, q = t^2) so that half-integer q-exponents
// stay integral; a term (xdeg, qexp2, c) means  c * q^{qexp2/2} * x^xdeg.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "thetalab/bigcomplex.hpp"
#include "thetalab/theta.hpp"

namespace thetalab {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

struct QTerm {
  long xdeg = 0;
  long qexp2 = 0;  // exponent of t = q^{1/2}
  BigInt coeff;
};

struct SparseQPoly {
  char var = 'x';
  std::vector<QTerm> terms;  // sorted by (xdeg, qexp2), no zero coefficients

  void normalize() {
    std::sort(terms.begin(), terms.end(), [](const QTerm& a, const QTerm& b) {
      return a.xdeg != b.xdeg ? a.xdeg < b.xdeg : a.qexp2 < b.qexp2;
    });
    std::vector<QTerm> out;
    for (auto& t : terms) {
      if (!out.empty() && out.back().xdeg == t.xdeg && out.back().qexp2 == t.qexp2)
        out.back().coeff += t.coeff;
      else
        out.push_back(t);
      if (!out.empty() && out.back().coeff == 0) out.pop_back();
    }
    terms = std::move(out);
  }

  long degree() const { return terms.empty() ? -1 : terms.back().xdeg; }
  bool integral_q_exponents() const {
    for (auto& t : terms)
      if (t.qexp2 % 2 != 0) return false;
    return true;
  }

  SparseQPoly deriv_main() const {
    SparseQPoly d;
    d.var = var;
    for (auto& t : terms)
      if (t.xdeg > 0) d.terms.push_back({t.xdeg - 1, t.qexp2, t.coeff * t.xdeg});
    return d;
  }

  // One term per line: "x_degree q_exponent coefficient"; half-integer
  // exponents print as fractions like 9/2.
  std::string dump() const {
    std::ostringstream os;
    for (auto& t : terms) {
      os << t.xdeg << ' ';
      if (t.qexp2 % 2 == 0)
        os << t.qexp2 / 2;
      else
        os << t.qexp2 << "/2";
      os << ' ' << t.coeff << '\n';
    }
    return os.str();
  }
};

inline BigComplex bigint_to_complex(const BigInt& v, int digits) {
  return BigComplex(BigFloat(v.str(), digits), BigFloat(0, digits));
}

// Evaluate with the q-argument given directly (requires integral q-exponents).
inline BigComplex eval_q(const SparseQPoly& p, const BigComplex& q, const BigComplex& x) {
  int d = std::max(q.digits(), x.digits());
  BigComplex sum(0, 0, d);
  for (auto& t : p.terms) {
    if (t.qexp2 % 2 != 0)
      throw Error(ErrorKind::DegenerateInput, "eval_q on half-integer exponent; use eval_t");
    BigComplex term = pow_si(q, t.qexp2 / 2) * pow_si(x, t.xdeg);
    sum += term * BigFloat(t.coeff.str(), d);
  }
  return sum;
}

// Evaluate with the first argument interpreted as t = q^{1/2}.
inline BigComplex eval_t(const SparseQPoly& p, const BigComplex& t, const BigComplex& x) {
  int d = std::max(t.digits(), x.digits());
  BigComplex sum(0, 0, d);
  for (auto& tm : p.terms) {
    BigComplex term = pow_si(t, tm.qexp2) * pow_si(x, tm.xdeg);
    sum += term * BigFloat(tm.coeff.str(), d);
  }
  return sum;
}

// Exact rational evaluation (integral q-exponents only).
inline BigRat eval_q_rational(const SparseQPoly& p, const BigRat& q, const BigRat& x) {
  auto rpow = [](const BigRat& b, long e) {
    BigRat acc = 1, base = b;
    long n = e;
    if (n < 0) {
      base = 1 / base;
      n = -n;
    }
    while (n) {
      if (n & 1) acc *= base;
      base *= base;
      n >>= 1;
    }
    return acc;
  };
  BigRat sum = 0;
  for (auto& t : p.terms) {
    if (t.qexp2 % 2 != 0)
      throw Error(ErrorKind::DegenerateInput, "rational eval on half-integer exponent");
    sum += BigRat(t.coeff) * rpow(q, t.qexp2 / 2) * rpow(x, t.xdeg);
  }
  return sum;
}

// Theta_n(q, x) = sum_{j=0}^n q^{j(j+1)/2} x^j
inline SparseQPoly truncation_poly(long n) {
  if (n < 0) throw Error(ErrorKind::Usage, "truncation_poly requires n >= 0");
  SparseQPoly p;
  p.var = 'x';
  for (long j = 0; j <= n; ++j) p.terms.push_back({j, j * (j + 1), BigInt(1)});
  return p;
}

// Psi_m(q) = sum_{k=0}^m (-1)^k (2k+1) q^{k(k+1)/2}, stored as a q-univariate
// (all main-variable degrees zero, q-exponents strictly increasing).
inline SparseQPoly psi_section(long m) {
  if (m < 0) throw Error(ErrorKind::Usage, "psi_section requires m >= 0");
  SparseQPoly p;
  p.var = 'x';
  for (long k = 0; k <= m; ++k)
    p.terms.push_back({0, k * (k + 1), BigInt(k % 2 == 0 ? (2 * k + 1) : -(2 * k + 1))});
  return p;
}

// Scaled Jensen table G_n = n^n g_n: coefficients n! n^{n-j}/(n-j)! at
// q^{T_j} x^j... stored against main degree j with the recorded rational
// prefactor 1/n^n.
struct ScaledJensen {
  SparseQPoly table;  // integer table
  BigRat prefactor;   // exact prefactor stripped from the integer table
};

inline ScaledJensen jensen_theta_table(long n) {
  if (n < 1) throw Error(ErrorKind::Usage, "jensen table requires n >= 1");
  ScaledJensen g;
  g.table.var = 'x';
  BigInt nfac = 1;
  for (long i = 2; i <= n; ++i) nfac *= i;
  for (long j = 0; j <= n; ++j) {
    // n! n^{n-j} / (n-j)!
    BigInt c = nfac;
    for (long i = 2; i <= n - j; ++i) c /= i;
    for (long i = 0; i < n - j; ++i) c *= n;
    g.table.terms.push_back({j, j * (j + 1), c});
  }
  BigInt nn = 1;
  for (long i = 0; i < n; ++i) nn *= n;
  g.prefactor = BigRat(1, nn);
  return g;
}

// Scaled factorial table P_n = n! p^F_n: coefficients n!/j! at q^{T_j} x^j,
// prefactor 1/n!.
inline ScaledJensen factorial_trunc_table(long n) {
  if (n < 1) throw Error(ErrorKind::Usage, "factorial table requires n >= 1");
  ScaledJensen p;
  p.table.var = 'x';
  BigInt nfac = 1;
  for (long i = 2; i <= n; ++i) nfac *= i;
  for (long j = 0; j <= n; ++j) {
    BigInt c = nfac;
    for (long i = 2; i <= j; ++i) c /= i;
    p.table.terms.push_back({j, j * (j + 1), c});
  }
  p.prefactor = BigRat(1, nfac);
  return p;
}

// Relative residual of the Jensen-truncation identity
//   n^n z^n g_n(q, 1/z) = n! q^{n(n+1)/2} p^F_n(q, n q^{-n-1} z),
// both sides evaluated from the exact integer tables.
inline BigFloat jensen_identity_check(long n, const BigComplex& q, const BigComplex& z) {
  if (n < 1) throw Error(ErrorKind::Usage, "jensen_identity_check requires n >= 1");
  if (q.is_zero() || z.is_zero())
    throw Error(ErrorKind::DegenerateInput, "jensen identity needs q != 0, z != 0");
  int d = std::max(q.digits(), z.digits());
  ScaledJensen g = jensen_theta_table(n);
  ScaledJensen pf = factorial_trunc_table(n);

  BigComplex zinv = BigComplex(1, 0, d) / z;
  BigComplex lhs = pow_si(z, n) * eval_q(g.table, q, zinv);

  BigComplex w = pow_si(q, -(n + 1)) * z * n;
  BigComplex rhs = pow_si(q, n * (n + 1) / 2) * eval_q(pf.table, q, w);

  BigFloat scale = max(BigFloat(1, d), max(abs(lhs), abs(rhs)));
  return abs(lhs - rhs) / scale;
}

// Central-factor witness: residuals of the normalized palindromic form
//   Qhat_m(q, y) = q^{T_m} Theta_{2m+1}(q, q^{-(m+1)} y)
//               = sum_{j=0}^{2m+1} q^{T_m - j(2m+1-j)/2} y^j
// and its y-derivative at y = -1. The exponents T_m - j(2m+1-j)/2 are the
// triangular numbers of |m - j| shifted, all >= 0. At a zero of Psi_m both
// residuals vanish: Qhat(q,-1) is identically zero by palindromy and
// d_y Qhat(q,-1) = (-1)^m Psi_m(q).
struct CentralWitness {
  BigFloat residual_theta;
  BigFloat residual_dtheta;
  BigFloat condition;  // sum of |q|^{exponent} term magnitudes
};

inline SparseQPoly central_palindromic_poly(long m) {
  SparseQPoly p;
  p.var = 'y';
  long tm = m * (m + 1) / 2;
  for (long j = 0; j <= 2 * m + 1; ++j) {
    long e = tm - j * (2 * m + 1 - j) / 2;
    p.terms.push_back({j, 2 * e, BigInt(1)});
  }
  p.normalize();
  return p;
}

inline CentralWitness central_factor_witness(long m, const BigComplex& q, const BigFloat& tol) {
  (void)tol;
  if (q.is_zero()) throw Error(ErrorKind::DegenerateInput, "central factor witness needs q != 0");
  int d = q.digits();
  SparseQPoly qh = central_palindromic_poly(m);
  SparseQPoly dqh = qh.deriv_main();
  BigComplex minus1(-1, 0, d);
  CentralWitness w{BigFloat(d), BigFloat(d), BigFloat(d)};
  w.residual_theta = abs(eval_q(qh, q, minus1));
  w.residual_dtheta = abs(eval_q(dqh, q, minus1));
  BigFloat aq = abs(q);
  BigFloat cond(0, d);
  for (auto& t : qh.terms) cond += pow_si(aq, t.qexp2 / 2);
  w.condition = cond;
  return w;
}

// Exact rational version; at rational spectral data the residuals vanish
// identically rather than to rounding.
inline std::pair<BigRat, BigRat> central_factor_witness_exact(long m, const BigRat& q) {
  SparseQPoly qh = central_palindromic_poly(m);
  SparseQPoly dqh = qh.deriv_main();
  return {eval_q_rational(qh, q, BigRat(-1)), eval_q_rational(dqh, q, BigRat(-1))};
}

// Even-degree reduction: R_m(t, y) = t^{m^2} Theta_{2m}(t^2, t^{-(2m+1)} y)
// with exponent table (j-m)^2, and the degree-m polynomial S_m with
// y^m S_m(t, y + 1/y) = R_m, extracted by downward elimination in the
// reciprocal-power basis y^{m+i} + y^{m-i}.
struct EvenReduction {
  SparseQPoly R;  // variable y, exponents in t-units
  SparseQPoly S;  // variable u, exponents in t-units
};

inline EvenReduction even_reduction(long m) {
  if (m < 1) throw Error(ErrorKind::Usage, "even_reduction requires m >= 1");
  EvenReduction er;
  er.R.var = 'y';
  for (long j = 0; j <= 2 * m; ++j) er.R.terms.push_back({j, (j - m) * (j - m), BigInt(1)});

  // c[i] = coefficient of y^{m+i} as a sparse t-polynomial (map exp -> coeff)
  std::vector<std::map<long, BigInt>> c(m + 1);
  for (long i = 0; i <= m; ++i) c[i][i * i] = 1;

  // (y + 1/y)^k y^m contributes binom(k, (k-i)/2) to y^{m+i} for i = k, k-2, ...
  std::vector<std::map<long, BigInt>> s(m + 1);
  for (long k = m; k >= 0; --k) {
    s[k] = c[k];
    // subtract s[k] * [(y+1/y)^k]'s lower reciprocal components
    BigInt binom = 1;
    for (long step = 1; 2 * step <= k; ++step) {
      binom = binom * (k - step + 1) / step;
      long i = k - 2 * step;
      for (auto& [e, v] : s[k]) {
        auto& slot = c[i][e];
        slot -= v * binom;
        if (slot == 0) c[i].erase(e);
      }
    }
  }
  er.S.var = 'u';
  for (long k = 0; k <= m; ++k)
    for (auto& [e, v] : s[k])
      if (v != 0) er.S.terms.push_back({k, e, v});
  er.S.normalize();
  return er;
}

// Substitute u = y + 1/y into S and multiply by y^m (round-trip check).
inline SparseQPoly expand_reciprocal(const SparseQPoly& S, long m) {
  SparseQPoly out;
  out.var = 'y';
  for (auto& term : S.terms) {
    long k = term.xdeg;
    // y^m (y + 1/y)^k = sum_i binom(k,i) y^{m + k - 2i}
    BigInt binom = 1;
    for (long i = 0; i <= k; ++i) {
      out.terms.push_back({m + k - 2 * i, term.qexp2, term.coeff * binom});
      binom = binom * (k - i) / (i + 1);
    }
  }
  out.normalize();
  return out;
}

inline bool is_palindromic(const SparseQPoly& p, long deg) {
  SparseQPoly flipped;
  flipped.var = p.var;
  for (auto& t : p.terms) flipped.terms.push_back({deg - t.xdeg, t.qexp2, t.coeff});
  flipped.normalize();
  SparseQPoly pn = p;
  pn.normalize();
  if (pn.terms.size() != flipped.terms.size()) return false;
  for (size_t i = 0; i < pn.terms.size(); ++i) {
    if (pn.terms[i].xdeg != flipped.terms[i].xdeg || pn.terms[i].qexp2 != flipped.terms[i].qexp2 ||
        pn.terms[i].coeff != flipped.terms[i].coeff)
      return false;
  }
  return true;
}

}  // namespace thetalab
