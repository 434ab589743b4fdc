#pragma once

// Certified-tail evaluation of the partial theta function
//
//   Theta(q, z) = sum_{j>=0} q^{j(j+1)/2} z^j,   |q| < 1,
//
// its derivative jet (d_z, d_q, d_z^2, d_q d_z), the eta-cubed series
//
//   psi(q) = sum_{k>=0} (-1)^k (2k+1) q^{k(k+1)/2} = prod_{v>=1} (1-q^v)^3,
//
// and the moving-window functions
//
//   H_N(q, u) = sum_{s=-N}^{inf} (-1)^s q^{s(s+1)/2} e^{su}.
//
// All series share the same tail-bound scheme: once the term ratio
// |q|^{j+1}|z| * W(j) drops below 1/2 (W = worst polynomial-weight ratio
// across the series summed together), the omitted tail is geometrically
// dominated by the last computed term. The reported tail_bound carries an
// extra factor 2 of slack.

#include <cstdint>
#include <utility>

#include "thetalab/bigcomplex.hpp"

namespace thetalab {

constexpr long kSeriesTermCap = 1000000;

struct ThetaJet {
  BigComplex value, dz, dq, dzz, dqz;
  long terms_used = 0;
  BigFloat tail_bound;

  explicit ThetaJet(int digits = kDefaultDigits)
      : value(digits), dz(digits), dq(digits), dzz(digits), dqz(digits), tail_bound(digits) {}
};

struct WindowJet {
  BigComplex h, hu;
  long N = 0;
  long terms_used = 0;
  BigFloat tail_bound;

  explicit WindowJet(int digits = kDefaultDigits) : h(digits), hu(digits), tail_bound(digits) {}
};

// Extension used by the boundary-window solver and phi_reduction: second
// u-derivative and the two q-derivatives.
struct WindowJetExt {
  BigComplex h, hu, huu, hq, hqu;
  long N = 0;
  long terms_used = 0;
  BigFloat tail_bound;

  explicit WindowJetExt(int digits = kDefaultDigits)
      : h(digits), hu(digits), huu(digits), hq(digits), hqu(digits), tail_bound(digits) {}
};

namespace detail {

// Worst-case weight growth ratio across the five jet series at index j:
// weights are 1, j, T_j, j(j-1), j*T_j whose step ratios are all covered by
// (j+1)(j+2)/(j*max(j-1,1)) for j >= 1. Evaluated with a small safety pad.
inline double jet_weight_ratio(long j) {
  if (j < 2) return 8.0;
  double a = double(j + 2) / double(j);
  double b = double(j + 1) / double(j - 1);
  double c = double(j + 1) * double(j + 2) / (double(j) * double(j));
  double w = a > b ? a : b;
  if (c > w) w = c;
  return w * (1.0 + 1e-12);
}

}  // namespace detail

// Full derivative jet of Theta at (q, z) with a common series cutoff.
// min_terms forces extra terms past the stopping test (used by the tail
// soundness self-check).
inline ThetaJet theta_jet(const BigComplex& q, const BigComplex& z, const BigFloat& tol,
                          long term_cap = kSeriesTermCap, long min_terms = 0) {
  int d = std::max(q.digits(), z.digits());
  BigFloat aq = abs(q);
  if (!(aq < BigFloat(1, d)))
    throw Error(ErrorKind::NonConvergent, "theta_jet requires |q| < 1");
  if (!(BigFloat(0, d) < tol)) throw Error(ErrorKind::Usage, "theta_jet requires tol > 0");
  if (!z.is_finite() || log2_est(abs(z)) > 1e5)
    throw Error(ErrorKind::NonConvergent, "theta_jet argument z out of range");

  ThetaJet jet(d);
  BigFloat az = abs(z);

  BigComplex qp(1, 0, d);    // q^{T_j}
  BigComplex qpm(1, 0, d);   // q^{T_j - 1}, valid from j = 1
  BigComplex zp(1, 0, d);    // z^j
  BigComplex zp1(0, 0, d);   // z^{j-1}
  BigComplex zp2(0, 0, d);   // z^{j-2}
  BigFloat aqp(1, d), aqpm(1, d), azp(1, d), azp1(0, d), azp2(0, d);
  BigFloat aqstep(1, d);  // |q|^j
  BigComplex qstep(1, 0, d);

  BigComplex term(d), scratch(d);
  BigFloat half = BigFloat(1, d) / 2;

  for (long j = 0; j <= term_cap; ++j) {
    long tj = j * (j + 1) / 2;
    // value
    BigComplex::mul(term, qp, zp);
    jet.value += term;
    BigFloat a_value = aqp * azp;
    // dz
    BigFloat a_dz(0, d), a_dq(0, d), a_dzz(0, d), a_dqz(0, d);
    if (j >= 1) {
      BigComplex::mul(term, qp, zp1);
      term.re() *= j;
      term.im() *= j;
      jet.dz += term;
      a_dz = aqp * azp1 * j;
      BigComplex::mul(term, qpm, zp);
      term.re() *= tj;
      term.im() *= tj;
      jet.dq += term;
      a_dq = aqpm * azp * tj;
      BigComplex::mul(term, qpm, zp1);
      long w = j * tj;
      term.re() *= w;
      term.im() *= w;
      jet.dqz += term;
      a_dqz = aqpm * azp1 * w;
    }
    if (j >= 2) {
      BigComplex::mul(term, qp, zp2);
      long w = j * (j - 1);
      term.re() *= w;
      term.im() *= w;
      jet.dzz += term;
      a_dzz = aqp * azp2 * w;
    }

    // Stopping test: tail after index j is dominated once
    // rho = |q|^{j+1} |z| W(j) <= 1/2, with bound maxterm * rho/(1-rho).
    if (j >= 3 && j >= min_terms) {
      BigFloat rho = aqstep * aq * az * BigFloat::from_double(detail::jet_weight_ratio(j), d);
      if (rho <= half) {
        BigFloat m = max(a_value, max(a_dz, max(a_dq, max(a_dzz, a_dqz))));
        BigFloat bound = m * rho / (BigFloat(1, d) - rho) * 2;
        if (bound <= tol) {
          jet.terms_used = j + 1;
          jet.tail_bound = bound;
          return jet;
        }
      }
    }

    // roll powers to j+1
    BigComplex::mul(scratch, qstep, q);  // q^{j+1}
    swap(qstep, scratch);
    aqstep *= aq;
    BigComplex::mul(scratch, qp, qstep);  // q^{T_{j+1}} = q^{T_j} * q^{j+1}
    swap(qp, scratch);
    aqp *= aqstep;
    if (j >= 1) {
      BigComplex::mul(scratch, qpm, qstep);
      swap(qpm, scratch);
      aqpm *= aqstep;
    }  // at j=0, qpm stays 1 = q^{T_1-1}
    swap(zp2, zp1);
    swap(zp1, zp);
    BigComplex::mul(zp, zp1, z);
    swap(azp2, azp1);
    swap(azp1, azp);
    azp = azp1 * az;
  }
  throw Error(ErrorKind::ToleranceUnreachable, "theta_jet hit the term cap");
}

// Jet of the degree-n truncation Theta_n (exact finite sum, tail_bound = 0).
inline ThetaJet theta_trunc_jet(long n, const BigComplex& q, const BigComplex& z) {
  int d = std::max(q.digits(), z.digits());
  if (!q.is_finite() || !z.is_finite() || log2_est(abs(z)) > 1e5 || log2_est(abs(q)) > 1e5)
    throw Error(ErrorKind::NonConvergent, "theta_trunc_jet argument out of range");
  ThetaJet jet(d);
  BigComplex qp(1, 0, d), qpm(1, 0, d), zp(1, 0, d), zp1(0, 0, d), zp2(0, 0, d);
  BigComplex qstep(1, 0, d), term(d), scratch(d);
  for (long j = 0; j <= n; ++j) {
    long tj = j * (j + 1) / 2;
    BigComplex::mul(term, qp, zp);
    jet.value += term;
    if (j >= 1) {
      BigComplex::mul(term, qp, zp1);
      term.re() *= j;
      term.im() *= j;
      jet.dz += term;
      BigComplex::mul(term, qpm, zp);
      term.re() *= tj;
      term.im() *= tj;
      jet.dq += term;
      BigComplex::mul(term, qpm, zp1);
      long w = j * tj;
      term.re() *= w;
      term.im() *= w;
      jet.dqz += term;
    }
    if (j >= 2) {
      BigComplex::mul(term, qp, zp2);
      long w = j * (j - 1);
      term.re() *= w;
      term.im() *= w;
      jet.dzz += term;
    }
    if (j == n) break;
    BigComplex::mul(scratch, qstep, q);
    swap(qstep, scratch);
    BigComplex::mul(scratch, qp, qstep);
    swap(qp, scratch);
    if (j >= 1) {
      BigComplex::mul(scratch, qpm, qstep);
      swap(qpm, scratch);
    }
    swap(zp2, zp1);
    swap(zp1, zp);
    BigComplex::mul(zp, zp1, z);
  }
  jet.terms_used = n + 1;
  return jet;
}

enum class PsiMode { Series, Product };

// psi(q) by either route; both deliver absolute truncation error <= tol.
inline BigComplex psi_eval(const BigComplex& q, const BigFloat& tol, PsiMode mode,
                           long term_cap = kSeriesTermCap) {
  int d = q.digits();
  BigFloat aq = abs(q);
  BigFloat one(1, d);
  if (!(aq < one)) throw Error(ErrorKind::NonConvergent, "psi_eval requires |q| < 1");

  if (mode == PsiMode::Series) {
    BigComplex sum(0, 0, d), qp(1, 0, d), qstep(1, 0, d), term(d), scratch(d);
    BigFloat aqp(1, d), aqstep(1, d);
    BigFloat half = one / 2;
    for (long k = 0; k <= term_cap; ++k) {
      long w = 2 * k + 1;
      term = qp * ((k % 2 == 0) ? w : -w);
      sum += term;
      BigFloat aterm = aqp * w;
      if (k >= 1) {
        double wr = (double(2 * k + 3) / double(2 * k + 1)) * (1.0 + 1e-12);
        BigFloat rho = aqstep * aq * BigFloat::from_double(wr, d);
        if (rho <= half) {
          BigFloat bound = aterm * rho / (one - rho) * 2;
          if (bound <= tol) return sum;
        }
      }
      BigComplex::mul(scratch, qstep, q);
      swap(qstep, scratch);
      aqstep *= aq;
      BigComplex::mul(scratch, qp, qstep);
      swap(qp, scratch);
      aqp *= aqstep;
    }
    throw Error(ErrorKind::ToleranceUnreachable, "psi series hit the term cap");
  }

  // Product mode: prod (1-q^v)^3 with the logarithm-sum remainder
  // 3 |q|^{v+1} / (1-|q|)^2 controlling the relative tail.
  BigComplex prod(1, 0, d), qv(1, 0, d), f(d), scratch(d);
  BigFloat aqv(1, d);
  BigFloat denom = (one - aq) * (one - aq);
  for (long v = 1; v <= term_cap; ++v) {
    BigComplex::mul(scratch, qv, q);
    swap(qv, scratch);
    aqv *= aq;
    f = BigComplex(1, 0, d) - qv;
    BigComplex::mul(scratch, prod, f);
    swap(prod, scratch);
    BigComplex::mul(scratch, prod, f);
    swap(prod, scratch);
    BigComplex::mul(scratch, prod, f);
    swap(prod, scratch);
    BigFloat delta = aqv * aq * 3 / denom;
    if (delta <= BigFloat::from_double(0.5, d)) {
      BigFloat bound = abs(prod) * delta * 2;
      if (bound <= tol) return prod;
    }
  }
  throw Error(ErrorKind::ToleranceUnreachable, "psi product hit the term cap");
}

// Series value and q-derivative of psi, used by the boundary solver.
inline std::pair<BigComplex, BigComplex> psi_jet(const BigComplex& q, const BigFloat& tol,
                                                 long term_cap = kSeriesTermCap) {
  int d = q.digits();
  BigFloat aq = abs(q);
  BigFloat one(1, d);
  if (!(aq < one)) throw Error(ErrorKind::NonConvergent, "psi_jet requires |q| < 1");
  BigComplex sum(0, 0, d), dsum(0, 0, d), qp(1, 0, d), qpm(1, 0, d), qstep(1, 0, d);
  BigComplex term(d), scratch(d);
  BigFloat aqp(1, d), aqpm(1, d), aqstep(1, d);
  BigFloat half = one / 2;
  for (long k = 0; k <= term_cap; ++k) {
    long w = 2 * k + 1;
    long tk = k * (k + 1) / 2;
    long sign = (k % 2 == 0) ? 1 : -1;
    term = qp * (sign * w);
    sum += term;
    if (k >= 1) {
      term = qpm * (sign * w);
      term.re() *= tk;
      term.im() *= tk;
      dsum += term;
    }
    if (k >= 2) {
      double wr = (double(2 * k + 3) / double(2 * k + 1)) *
                  (double(k + 2) / double(k)) * (1.0 + 1e-12);
      BigFloat rho = aqstep * aq * BigFloat::from_double(wr, d);
      if (rho <= half) {
        BigFloat aterm = max(aqp * w, aqpm * (w * tk));
        BigFloat bound = aterm * rho / (one - rho) * 2;
        if (bound <= tol) return {sum, dsum};
      }
    }
    BigComplex::mul(scratch, qstep, q);
    swap(qstep, scratch);
    aqstep *= aq;
    BigComplex::mul(scratch, qp, qstep);
    swap(qp, scratch);
    aqp *= aqstep;
    if (k >= 1) {
      BigComplex::mul(scratch, qpm, qstep);
      swap(qpm, scratch);
      aqpm *= aqstep;
    }
  }
  throw Error(ErrorKind::ToleranceUnreachable, "psi_jet hit the term cap");
}

namespace detail {

// Shared engine for H_N jets. Accumulates h, hu and (if ext) huu, hq, hqu.
//
//   H_N(q,u)      = sum_{s=-N}^{inf} (-1)^s q^{s(s+1)/2} e^{su}
//   d_u H_N       = termwise * s
//   d_u^2 H_N     = termwise * s^2
//   d_q H_N       = termwise * T_s / q
//   d_q d_u H_N   = termwise * s T_s / q
//
// The negative wing s = -1..-N is a finite sum; the positive wing uses the
// same geometric-domination cutoff as theta_jet with e^{Re u} playing |z|.
template <bool Ext, typename Jet>
inline void window_jet_impl(Jet& jet, const BigComplex& q, const BigComplex& u, long N,
                            const BigFloat& tol, long term_cap) {
  int d = std::max(q.digits(), u.digits());
  BigFloat aq = abs(q);
  BigFloat one(1, d);
  if (!(aq < one)) throw Error(ErrorKind::NonConvergent, "window_jet requires |q| < 1");
  if (N < 0) throw Error(ErrorKind::Usage, "window_jet requires N >= 0");

  BigComplex eu = exp(u);
  BigComplex eum = BigComplex(1, 0, d) / eu;
  BigFloat aeu = abs(eu);

  BigComplex term(d), scratch(d), base(d);

  auto add_term = [&](long s, const BigComplex& qpow_ts, const BigComplex& qpow_tsm1,
                      const BigComplex& epow) {
    long sign = ((s % 2) + 2) % 2 == 0 ? 1 : -1;
    long ts = 0;
    // T_s for negative s fits in long for |s| <= ~3e9
    ts = s * (s + 1) / 2;
    BigComplex::mul(base, qpow_ts, epow);
    if (sign < 0) base = -base;
    jet.h += base;
    term = base * s;
    jet.hu += term;
    if constexpr (Ext) {
      term = base * (s * s);
      jet.huu += term;
      if (ts != 0) {
        BigComplex::mul(term, qpow_tsm1, epow);
        if (sign < 0) term = -term;
        jet.hq += term * ts;
        jet.hqu += term * (ts * s);
      }
    }
    return abs(base);
  };

  // negative wing: s = -1, -2, ..., -N. Stepping s -> s-1 multiplies the
  // q-power by q^{-s} and the exponential by e^{-u}.
  {
    BigComplex qpow(1, 0, d);   // q^{T_s}, T_{-1} = 0
    BigComplex qpow1(d);        // q^{T_s - 1}
    BigComplex epow(1, 0, d);   // e^{su}
    BigComplex qstep(1, 0, d);  // q^{-s-1}: at s=-1 this is q^0
    bool qpow1_valid = false;
    for (long s = -1; s >= -N; --s) {
      BigComplex::mul(scratch, epow, eum);
      swap(epow, scratch);
      if (s < -1) {
        // entering s: multiply q-powers by q^{-s-1+1} = q^{-s} step sequence
        BigComplex::mul(scratch, qstep, q);
        swap(qstep, scratch);  // q^{-s-1}
        BigComplex::mul(scratch, qpow, qstep);
        swap(qpow, scratch);  // q^{T_s}
        if (!qpow1_valid) {
          // T_{-2} = 1 so q^{T_s - 1} = q^0
          qpow1 = BigComplex(1, 0, d);
          qpow1_valid = true;
        } else {
          BigComplex::mul(scratch, qpow1, qstep);
          swap(qpow1, scratch);
        }
      }
      add_term(s, qpow, qpow1, epow);
    }
  }

  // s = 0 and the positive wing.
  {
    BigComplex qpow(1, 0, d), qpow1(1, 0, d), epow(1, 0, d), qstep(1, 0, d);
    BigFloat aqpow(1, d), aqpow1(1, d), aepow(1, d), aqstep(1, d);
    BigFloat half = one / 2;
    for (long s = 0; s <= term_cap; ++s) {
      if (s > 0) {
        BigComplex::mul(scratch, qstep, q);
        swap(qstep, scratch);
        aqstep *= aq;
        BigComplex::mul(scratch, qpow, qstep);
        swap(qpow, scratch);
        aqpow *= aqstep;
        if (s >= 2) {
          BigComplex::mul(scratch, qpow1, qstep);
          swap(qpow1, scratch);
          aqpow1 *= aqstep;
        }
        BigComplex::mul(scratch, epow, eu);
        swap(epow, scratch);
        aepow *= aeu;
      }
      BigFloat aterm = add_term(s, qpow, qpow1, epow);
      if (s >= 3) {
        double wr = Ext ? (double(s + 2) * double(s + 2) / (double(s) * double(s)))
                        : (double(s + 1) / double(s));
        wr *= (double(s + 2) / double(s)) * (1.0 + 1e-12);
        BigFloat rho = aqstep * aq * aeu * BigFloat::from_double(wr, d);
        if (rho <= half) {
          // largest per-series term magnitude at index s: the q-derivative
          // series carry q^{T_s - 1}, tracked separately
          long ts = s * (s + 1) / 2;
          BigFloat m = aterm * s;
          if constexpr (Ext) {
            m = max(m, aterm * (s * s));
            m = max(m, aqpow1 * aepow * (ts * (s + 1)));
          }
          BigFloat bound = m * rho / (one - rho) * 2;
          if (bound <= tol) {
            jet.terms_used = N + s + 1;
            jet.tail_bound = bound;
            jet.N = N;
            return;
          }
        }
      }
    }
  }
  throw Error(ErrorKind::ToleranceUnreachable, "window_jet hit the term cap");
}

}  // namespace detail

inline WindowJet window_jet(const BigComplex& q, const BigComplex& u, long N, const BigFloat& tol,
                            long term_cap = kSeriesTermCap) {
  WindowJet jet(std::max(q.digits(), u.digits()));
  detail::window_jet_impl<false>(jet, q, u, N, tol, term_cap);
  return jet;
}

inline WindowJetExt window_jet_ext(const BigComplex& q, const BigComplex& u, long N,
                                   const BigFloat& tol, long term_cap = kSeriesTermCap) {
  WindowJetExt jet(std::max(q.digits(), u.digits()));
  detail::window_jet_impl<true>(jet, q, u, N, tol, term_cap);
  return jet;
}

// |Theta(q, -q^{-N} e^u) - (-1)^N q^{-N(N-1)/2} e^{Nu} H_N(q, u)|,
// both sides evaluated independently at matched precision. Throws
// ScaleOverflow when the prefactor's decimal magnitude exceeds half the
// working precision (the identity must then be checked in normalized form).
inline BigFloat window_identity_residual(const BigComplex& q, const BigComplex& u, long N,
                                         const BigFloat& tol) {
  int d = std::max(q.digits(), u.digits());
  BigFloat aq = abs(q);
  if (!(aq < BigFloat(1, d)))
    throw Error(ErrorKind::NonConvergent, "window identity requires |q| < 1");
  if (aq.is_zero()) throw Error(ErrorKind::DegenerateInput, "window identity requires q != 0");

  BigFloat ln10 = log(BigFloat(10, d));
  BigFloat mag = (log(aq) * (-N * (N - 1) / 2) + u.re() * N) / ln10;
  if (abs(mag) > BigFloat(d, d) / 2)
    throw Error(ErrorKind::ScaleOverflow,
                "prefactor magnitude 10^" + mag.str(4) + " exceeds the precision budget");

  BigComplex x = -(pow_si(q, -N) * exp(u));
  BigComplex pref = pow_si(q, -(N * (N - 1) / 2)) * exp(u * N);
  if (N % 2 != 0) pref = -pref;
  // the prefactor multiplies the window-side truncation error
  BigFloat tol_theta = tol / 4;
  BigFloat tol_window = tol / (max(BigFloat(1, d), abs(pref)) * 4);
  BigComplex lhs = theta_jet(q, x, tol_theta).value;
  WindowJet wj = window_jet(q, u, N, tol_window);
  BigComplex rhs = pref * wj.h;
  return abs(lhs - rhs);
}

}  // namespace thetalab
