#pragma once

// Exact discriminants of SparseQPoly instances with respect to the main
// variable, as dense big-integer polynomials in q (or t when half-integer
// exponents are present).
//
// Route: the resultant Res(p, p') is computed per 62-bit prime by evaluating
// the Sylvester determinant at deg+1 points of F_p and interpolating, then
// reconstructed by CRT. Every coefficient of the determinant is bounded in
// absolute value by the product of the row 1-norms of the symbolic Sylvester
// matrix, so the prime count is provably sufficient. The result is divided
// by the leading coefficient (a monomial for every input in this project),
// and the q-power and integer content are stripped and recorded.

#include <cstdint>
#include <numeric>
#include <vector>

#include "thetalab/qpoly.hpp"

namespace thetalab {

struct IntQPoly {
  char var = 'q';                // 'q', or 't' when exponents are half-integer in q
  std::vector<BigInt> coeffs;    // reduced form, ascending powers, coeffs[0] != 0
  long prefactor_exp = 0;        // stripped power of var
  BigInt content = 1;            // stripped signed integer content

  long degree() const { return static_cast<long>(coeffs.size()) - 1; }
  bool is_zero() const { return coeffs.empty(); }

  // Coefficient of var^i in the un-reduced polynomial.
  BigInt full_coeff(long i) const {
    long j = i - prefactor_exp;
    if (j < 0 || j >= static_cast<long>(coeffs.size())) return 0;
    return coeffs[j] * content;
  }
  long full_degree() const { return degree() + prefactor_exp; }

  std::string str() const {
    std::ostringstream os;
    os << "content=" << content << " prefactor=" << var << "^" << prefactor_exp << " [";
    for (size_t i = 0; i < coeffs.size(); ++i) {
      if (i) os << ", ";
      os << coeffs[i];
    }
    os << "]";
    return os.str();
  }
};

namespace modp {

inline uint64_t mul(uint64_t a, uint64_t b, uint64_t p) {
  return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
}
inline uint64_t add(uint64_t a, uint64_t b, uint64_t p) {
  uint64_t s = a + b;
  if (s >= p || s < a) s -= p;
  return s;
}
inline uint64_t sub(uint64_t a, uint64_t b, uint64_t p) { return a >= b ? a - b : a + p - b; }
inline uint64_t pow(uint64_t a, uint64_t e, uint64_t p) {
  uint64_t r = 1;
  while (e) {
    if (e & 1) r = mul(r, a, p);
    a = mul(a, a, p);
    e >>= 1;
  }
  return r;
}
inline uint64_t inv(uint64_t a, uint64_t p) { return pow(a, p - 2, p); }

inline bool is_prime_u64(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t sp : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % sp == 0) return n == sp;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    uint64_t x = pow(a % n, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mul(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

inline std::vector<uint64_t> primes_62bit(int count) {
  std::vector<uint64_t> out;
  uint64_t c = (1ull << 62) - 1;
  while (static_cast<int>(out.size()) < count) {
    if (is_prime_u64(c)) out.push_back(c);
    c -= 2;
  }
  return out;
}

// Determinant over F_p by Gaussian elimination, destroys m.
inline uint64_t det(std::vector<std::vector<uint64_t>>& m, uint64_t p) {
  size_t n = m.size();
  uint64_t d = 1;
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    while (piv < n && m[piv][col] == 0) ++piv;
    if (piv == n) return 0;
    if (piv != col) {
      std::swap(m[piv], m[col]);
      d = p - d;
      if (d == p) d = 0;
    }
    uint64_t pv = m[col][col];
    d = mul(d, pv, p);
    uint64_t pinv = inv(pv, p);
    for (size_t row = col + 1; row < n; ++row) {
      if (m[row][col] == 0) continue;
      uint64_t f = mul(m[row][col], pinv, p);
      for (size_t k = col; k < n; ++k) m[row][k] = sub(m[row][k], mul(f, m[col][k], p), p);
    }
  }
  return d;
}

// Interpolate the unique poly of degree <= n-1 through (x_i = i+1, y_i),
// coefficients ascending, all mod p. Newton divided differences over the
// equally spaced nodes, then Horner expansion of the Newton form.
inline std::vector<uint64_t> interpolate_at_integers(const std::vector<uint64_t>& y, uint64_t p) {
  size_t n = y.size();
  std::vector<uint64_t> dd = y;
  std::vector<uint64_t> invk(n + 1, 1);
  for (size_t k = 1; k <= n; ++k) invk[k] = inv(k % p, p);
  for (size_t k = 1; k < n; ++k)
    for (size_t i = n - 1; i >= k; --i) {
      dd[i] = mul(sub(dd[i], dd[i - 1], p), invk[k], p);
      if (i == k) break;
    }
  std::vector<uint64_t> poly{dd[n - 1]};
  for (size_t i = n - 1; i-- > 0;) {
    // poly = poly*(X - x_i) + dd[i]
    uint64_t xi = (i + 1) % p;
    std::vector<uint64_t> next(poly.size() + 1, 0);
    for (size_t k = 0; k < poly.size(); ++k) {
      next[k + 1] = add(next[k + 1], poly[k], p);
      next[k] = sub(next[k], mul(poly[k], xi, p), p);
    }
    next[0] = add(next[0], dd[i], p);
    poly = std::move(next);
  }
  while (poly.size() > 1 && poly.back() == 0) poly.pop_back();
  return poly;
}

}  // namespace modp

namespace detail {

// Dense t-coefficient arrays of a SparseQPoly per main-variable degree.
inline std::vector<std::vector<BigInt>> coeff_table(const SparseQPoly& p, long deg) {
  std::vector<std::vector<BigInt>> table(deg + 1);
  for (auto& t : p.terms) {
    auto& row = table[t.xdeg];
    if (static_cast<long>(row.size()) <= t.qexp2) row.resize(t.qexp2 + 1);
    row[t.qexp2] += t.coeff;
  }
  return table;
}

inline BigInt one_norm(const std::vector<std::vector<BigInt>>& table) {
  BigInt s = 0;
  for (auto& row : table)
    for (auto& c : row) s += abs(c);
  return s;
}

inline uint64_t eval_mod(const std::vector<BigInt>& poly, uint64_t x, uint64_t p) {
  uint64_t acc = 0;
  BigInt bp(p);
  for (size_t i = poly.size(); i-- > 0;) {
    acc = modp::mul(acc, x, p);
    BigInt r = poly[i] % bp;
    if (r < 0) r += bp;
    acc = modp::add(acc, r.convert_to<uint64_t>(), p);
  }
  return acc;
}

}  // namespace detail

// Exact discriminant with respect to the main variable. Returns the reduced
// polynomial with the stripped var-power and integer content recorded.
inline IntQPoly discriminant_exact(const SparseQPoly& p, long degree_cap = 14) {
  SparseQPoly pn = p;
  pn.normalize();
  long deg = pn.degree();
  if (deg < 2) throw Error(ErrorKind::Usage, "discriminant needs degree >= 2");
  if (deg > degree_cap)
    throw Error(ErrorKind::DegreeTooLarge,
                "degree " + std::to_string(deg) + " above cap " + std::to_string(degree_cap));

  // leading coefficient must be a monomial c_l * t^{e_l}
  std::vector<QTerm> lead;
  for (auto& t : pn.terms)
    if (t.xdeg == deg) lead.push_back(t);
  if (lead.size() != 1)
    throw Error(ErrorKind::DegenerateInput, "leading coefficient is not a monomial");
  BigInt lc = lead[0].coeff;
  long le = lead[0].qexp2;

  SparseQPoly dp = pn.deriv_main();
  auto fc = detail::coeff_table(pn, deg);
  auto gc = detail::coeff_table(dp, deg - 1);

  long maxf = 0, maxg = 0;
  for (auto& row : fc)
    if (!row.empty()) maxf = std::max(maxf, static_cast<long>(row.size()) - 1);
  for (auto& row : gc)
    if (!row.empty()) maxg = std::max(maxg, static_cast<long>(row.size()) - 1);
  long dres = (deg - 1) * maxf + deg * maxg;  // t-degree bound for Res

  // coefficient bound: product of row 1-norms
  BigInt nf = detail::one_norm(fc), ng = detail::one_norm(gc);
  BigInt bound = 1;
  for (long i = 0; i < deg - 1; ++i) bound *= nf;
  for (long i = 0; i < deg; ++i) bound *= ng;
  bound = 2 * bound + 1;  // symmetric range
  long need_bits = static_cast<long>(msb(bound)) + 2;
  int nprimes = static_cast<int>((need_bits + 60) / 61);
  auto primes = modp::primes_62bit(nprimes);

  size_t npoints = static_cast<size_t>(dres) + 1;
  size_t msize = static_cast<size_t>(2 * deg - 1);

  std::vector<std::vector<uint64_t>> res_mod(primes.size());
  for (size_t pi = 0; pi < primes.size(); ++pi) {
    uint64_t prime = primes[pi];
    std::vector<uint64_t> vals(npoints);
    std::vector<std::vector<uint64_t>> m(msize, std::vector<uint64_t>(msize, 0));
    for (size_t ptx = 0; ptx < npoints; ++ptx) {
      uint64_t x = static_cast<uint64_t>(ptx + 1) % prime;
      std::vector<uint64_t> fv(deg + 1), gv(deg);
      for (long j = 0; j <= deg; ++j) fv[j] = detail::eval_mod(fc[j], x, prime);
      for (long j = 0; j <= deg - 1; ++j) gv[j] = detail::eval_mod(gc[j], x, prime);
      for (auto& row : m) std::fill(row.begin(), row.end(), 0);
      // deg-1 rows of f (descending), deg rows of f'
      for (long r = 0; r < deg - 1; ++r)
        for (long j = 0; j <= deg; ++j) m[r][r + j] = fv[deg - j];
      for (long r = 0; r < deg; ++r)
        for (long j = 0; j <= deg - 1; ++j) m[deg - 1 + r][r + j] = gv[deg - 1 - j];
      vals[ptx] = modp::det(m, prime);
    }
    res_mod[pi] = modp::interpolate_at_integers(vals, prime);
  }

  // CRT per coefficient with symmetric lift
  std::vector<BigInt> res(static_cast<size_t>(dres) + 1, 0);
  BigInt modulus = 1;
  std::vector<BigInt> partial(res.size(), 0);
  for (size_t pi = 0; pi < primes.size(); ++pi) {
    BigInt prime = primes[pi];
    if (pi == 0) {
      for (size_t i = 0; i < res.size(); ++i)
        partial[i] = (i < res_mod[pi].size()) ? BigInt(res_mod[pi][i]) : BigInt(0);
      modulus = prime;
    } else {
      BigInt minv_b;
      {
        uint64_t mm = BigInt(modulus % prime).convert_to<uint64_t>();
        minv_b = modp::inv(mm, primes[pi]);
      }
      for (size_t i = 0; i < res.size(); ++i) {
        BigInt ri = (i < res_mod[pi].size()) ? BigInt(res_mod[pi][i]) : BigInt(0);
        BigInt cur = partial[i] % prime;
        BigInt t = ((ri - cur) % prime + prime) % prime;
        t = (t * minv_b) % prime;
        partial[i] += t * modulus;
      }
      modulus *= prime;
    }
  }
  BigInt half = modulus / 2;
  for (size_t i = 0; i < res.size(); ++i) {
    res[i] = partial[i] % modulus;
    if (res[i] > half) res[i] -= modulus;
  }

  // disc = (-1)^{deg(deg-1)/2} Res / (lc * t^{le})
  bool negate = ((deg * (deg - 1) / 2) % 2) != 0;
  for (long i = 0; i < le; ++i)
    if (i < static_cast<long>(res.size()) && res[i] != 0)
      throw Error(ErrorKind::Internal, "resultant not divisible by leading monomial power");
  std::vector<BigInt> disc;
  for (size_t i = le; i < res.size(); ++i) {
    BigInt q = res[i] / lc;
    if (q * lc != res[i]) throw Error(ErrorKind::Internal, "resultant not divisible by lc");
    disc.push_back(negate ? -q : q);
  }
  while (!disc.empty() && disc.back() == 0) disc.pop_back();

  IntQPoly out;
  if (disc.empty()) {
    out.coeffs.clear();
    out.content = 0;
    return out;
  }
  size_t first = 0;
  while (disc[first] == 0) ++first;
  out.prefactor_exp = static_cast<long>(first);
  out.coeffs.assign(disc.begin() + first, disc.end());
  BigInt g = 0;
  for (auto& c : out.coeffs) g = gcd(g, c);
  if (out.coeffs[0] < 0) g = -g;
  out.content = g;
  for (auto& c : out.coeffs) c /= g;

  // fold t^2 -> q when every exponent is even
  bool even_ok = (out.prefactor_exp % 2 == 0) && pn.integral_q_exponents();
  if (even_ok) {
    for (size_t i = 1; i < out.coeffs.size(); i += 2)
      if (out.coeffs[i] != 0) even_ok = false;
  }
  if (even_ok) {
    std::vector<BigInt> folded;
    for (size_t i = 0; i < out.coeffs.size(); i += 2) folded.push_back(out.coeffs[i]);
    out.coeffs = std::move(folded);
    out.prefactor_exp /= 2;
    out.var = 'q';
  } else {
    out.var = 't';
  }
  return out;
}

// Dense product of two integer polynomials (ascending).
inline std::vector<BigInt> poly_mul(const std::vector<BigInt>& a, const std::vector<BigInt>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<BigInt> out(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  while (!out.empty() && out.back() == 0) out.pop_back();
  return out;
}

// Evaluate the main variable at +/-1, returning a dense t-polynomial.
inline std::vector<BigInt> eval_main_pm1(const SparseQPoly& p, int sign) {
  std::vector<BigInt> out;
  for (auto& t : p.terms) {
    if (static_cast<long>(out.size()) <= t.qexp2) out.resize(t.qexp2 + 1);
    bool neg = sign < 0 && (t.xdeg % 2 != 0);
    out[t.qexp2] += neg ? -t.coeff : t.coeff;
  }
  while (!out.empty() && out.back() == 0) out.pop_back();
  return out;
}

// Exact division from the constant term up; requires divisor[0] = +/-1.
// Returns true and fills quotient when divisor divides dividend exactly.
inline bool divides_exactly(const std::vector<BigInt>& dividend, const std::vector<BigInt>& divisor,
                            std::vector<BigInt>* quotient = nullptr) {
  if (divisor.empty() || !(divisor[0] == 1 || divisor[0] == -1)) return false;
  if (dividend.empty()) {
    if (quotient) quotient->clear();
    return true;
  }
  if (dividend.size() < divisor.size()) return false;
  std::vector<BigInt> rem = dividend;
  std::vector<BigInt> quot(dividend.size() - divisor.size() + 1, 0);
  for (size_t i = 0; i < quot.size(); ++i) {
    BigInt c = rem[i] * divisor[0];  // divisor[0] is +/-1
    quot[i] = c;
    if (c != 0)
      for (size_t j = 0; j < divisor.size(); ++j) rem[i + j] -= c * divisor[j];
  }
  for (auto& r : rem)
    if (r != 0) return false;
  if (quotient) *quotient = std::move(quot);
  return true;
}

// Structure report for the even-degree factorization
//   disc_y R_m = unit * R_m(t,1) R_m(t,-1) disc_u(S_m)^2,  unit = +/- t^k.
struct EvenFactorizationReport {
  long m = 0;
  bool holds = false;
  int unit_sign = 0;
  long unit_tpow = 0;
  std::vector<BigInt> C;  // R(t,1) R(t,-1), dense in t
  std::vector<BigInt> B;  // disc_u S_m, dense in t
};

inline EvenFactorizationReport even_factorization_check(long m, long degree_cap = 14) {
  EvenFactorizationReport rep;
  rep.m = m;
  EvenReduction er = even_reduction(m);

  IntQPoly dR = discriminant_exact(er.R, degree_cap);
  std::vector<BigInt> dR_full(dR.prefactor_exp, 0);
  for (auto& c : dR.coeffs) dR_full.push_back(c * dR.content);
  if (dR.var == 'q') {
    // re-expand to t-units for uniform comparison
    std::vector<BigInt> t_ex;
    for (size_t i = 0; i < dR_full.size(); ++i) {
      t_ex.push_back(dR_full[i]);
      if (i + 1 < dR_full.size()) t_ex.push_back(0);
    }
    dR_full = std::move(t_ex);
  }

  rep.C = poly_mul(eval_main_pm1(er.R, +1), eval_main_pm1(er.R, -1));

  if (m == 1) {
    rep.B = {BigInt(1)};  // disc of a linear polynomial
  } else {
    IntQPoly dS = discriminant_exact(er.S, degree_cap);
    rep.B.assign(dS.prefactor_exp, 0);
    for (auto& c : dS.coeffs) rep.B.push_back(c * dS.content);
    if (dS.var == 'q') {
      std::vector<BigInt> t_ex;
      for (size_t i = 0; i < rep.B.size(); ++i) {
        t_ex.push_back(rep.B[i]);
        if (i + 1 < rep.B.size()) t_ex.push_back(0);
      }
      rep.B = std::move(t_ex);
    }
  }

  std::vector<BigInt> rhs = poly_mul(rep.C, poly_mul(rep.B, rep.B));

  // unit check: dR_full == +/- t^k * rhs
  auto lowest = [](const std::vector<BigInt>& v) -> long {
    for (size_t i = 0; i < v.size(); ++i)
      if (v[i] != 0) return static_cast<long>(i);
    return -1;
  };
  long llhs = lowest(dR_full), lrhs = lowest(rhs);
  if (llhs < 0 || lrhs < 0) return rep;
  long k = llhs - lrhs;
  BigInt a = dR_full[llhs], b = rhs[lrhs];
  if (a != b && a != -b) return rep;
  int sign = (a == b) ? 1 : -1;
  long dl = static_cast<long>(dR_full.size()) - 1 - llhs;
  long dr = static_cast<long>(rhs.size()) - 1 - lrhs;
  if (dl != dr) return rep;
  for (long i = 0; i <= dl; ++i) {
    BigInt L = dR_full[llhs + i];
    BigInt R = rhs[lrhs + i];
    if (L != (sign > 0 ? R : -R)) return rep;
  }
  rep.holds = true;
  rep.unit_sign = sign;
  rep.unit_tpow = k;
  return rep;
}

// Dense q-coefficients of a q-univariate SparseQPoly (main degree 0 terms).
inline std::vector<BigInt> dense_q_coeffs(const SparseQPoly& p) {
  std::vector<BigInt> out;
  for (auto& t : p.terms) {
    if (t.xdeg != 0)
      throw Error(ErrorKind::DegenerateInput, "dense_q_coeffs expects a q-univariate poly");
    if (t.qexp2 % 2 != 0)
      throw Error(ErrorKind::DegenerateInput, "dense_q_coeffs expects integral exponents");
    long e = t.qexp2 / 2;
    if (static_cast<long>(out.size()) <= e) out.resize(e + 1);
    out[e] += t.coeff;
  }
  while (!out.empty() && out.back() == 0) out.pop_back();
  return out;
}

}  // namespace thetalab
