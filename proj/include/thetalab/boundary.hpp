#pragma once

// Near-boundary spectral points at roots of unity: the scaling
// q = omega exp(-tau/N), u = v/N turns H_N = d_u H_N = 0 into a normalized
// system whose limit is sin v + mu0 e^{-xi-v} = cos v - mu0 e^{-xi-v} = 0.
// The solver works on exact numerics of H_N, psi and the tail multiplier
// E_r; the asymptotic expansions only choose the seed (tau*, 3pi/4).
//
// Cancellation note: near the matching point |psi(q_N)| ~ 10^{-0.682 N/b}
// while the individual terms of H_N are O(1), so the working precision must
// grow linearly in N/b; boundary_digits() implements that schedule.

#include <numeric>
#include <string>
#include <vector>

#include "thetalab/theta.hpp"

namespace thetalab {

inline int boundary_digits(long N, long b) {
  int d = static_cast<int>(std::ceil(0.6822 * double(N) / double(b))) + 45;
  return std::max(d, 50);
}

struct WindowParams {
  long a = 0, b = 1;
  long N = 0;
  long r = 0;  // residue class with E_r(tau0) != 0, N == r (mod b)
  int digits = kDefaultDigits;
  BigFloat tau0;     // pi / b
  BigFloat v0;       // 3 pi / 4
  BigComplex mu0;    // -e^{3pi/4}/sqrt(2)
  BigComplex omega;  // e^{2 pi i a / b}

  WindowParams() : tau0(kDefaultDigits), v0(kDefaultDigits), mu0(kDefaultDigits), omega(kDefaultDigits) {}
};

struct BoundarySolution {
  WindowParams params;
  BigComplex tau, v, q, u;
  BigFloat residual_h, residual_hu;  // normalized: |N H/psi|, |H_u/psi|
  BigFloat dist_to_omega;

  BoundarySolution()
      : tau(kDefaultDigits), v(kDefaultDigits), q(kDefaultDigits), u(kDefaultDigits),
        residual_h(kDefaultDigits), residual_hu(kDefaultDigits), dist_to_omega(kDefaultDigits) {}
};

// E_r(tau) = sum_l (-1)^l omega^{r l + l(l+1)/2} e^{-tau l}, Re tau > 0,
// with the alternating-geometric bound e^{-L Re tau}/(1 - e^{-Re tau}).
// Returns the value; *deriv (optional) receives d/dtau.
inline BigComplex tail_E_r(const WindowParams& p, const BigComplex& tau, const BigFloat& tol,
                           BigComplex* deriv = nullptr, long term_cap = kSeriesTermCap) {
  int d = p.digits;
  if (!(tau.re() > BigFloat(0, d)))
    throw Error(ErrorKind::NonConvergent, "E_r needs Re tau > 0");
  std::vector<BigComplex> omega_pow;
  BigFloat two_pi = BigFloat::pi(d) * 2;
  for (long j = 0; j < p.b; ++j) omega_pow.push_back(unit_phase(two_pi * (p.a * j % p.b) / p.b));

  BigComplex efac = exp(-tau);
  BigComplex epow(1, 0, d);
  BigFloat aefac = abs(efac), aepow(1, d);
  BigComplex sum(0, 0, d), dsum(0, 0, d), term(d), scratch(d);
  BigFloat denom = BigFloat(1, d) - aefac;
  for (long l = 0; l <= term_cap; ++l) {
    long e = static_cast<long>(((__int128(p.r) * l + __int128(l) * (l + 1) / 2) % p.b + p.b) % p.b);
    term = omega_pow[e] * ((l % 2 == 0) ? 1 : -1);
    BigComplex::mul(scratch, term, epow);
    sum += scratch;
    if (deriv) dsum += scratch * (-l);
    // value tail: e^{-(l+1) Re tau}/(1 - e^{-Re tau}); the derivative series
    // carries an extra weight l, absorbed by (l+2)/denom
    BigFloat bound = aepow * aefac / (denom * denom) * (l + 2);
    if (bound <= tol) break;
    BigComplex::mul(scratch, epow, efac);
    swap(epow, scratch);
    aepow *= aefac;
    if (l == term_cap)
      throw Error(ErrorKind::ToleranceUnreachable, "E_r series hit the term cap");
  }
  if (deriv) *deriv = dsum;
  return sum;
}

// argmax_r |E_r(tau0)| over residue classes mod b (guaranteed nonzero for
// some r; ties resolved to the smallest r).
inline long choose_residue(long a, long b, int digits) {
  if (b < 1 || std::gcd(a, b) != 1)
    throw Error(ErrorKind::Usage, "choose_residue needs gcd(a,b) = 1, b >= 1");
  WindowParams p;
  p.a = a;
  p.b = b;
  p.digits = digits;
  p.tau0 = BigFloat::pi(digits) / b;
  long best_r = 0;
  BigFloat best(0, digits);
  for (long r = 0; r < b; ++r) {
    p.r = r;
    BigComplex e = tail_E_r(p, BigComplex(p.tau0, BigFloat(0, digits)), pow10(-digits + 10, digits));
    BigFloat m = abs(e);
    if (m > best) {
      best = m;
      best_r = r;
    }
  }
  return best_r;
}

inline WindowParams make_window_params(long a, long b, long N, int digits = 0) {
  if (b < 1 || std::gcd(((a % b) + b) % b, b) != 1)
    throw Error(ErrorKind::Usage, "window params need gcd(a,b) = 1");
  WindowParams p;
  p.a = ((a % b) + b) % b;
  p.b = b;
  p.N = N;
  p.digits = digits > 0 ? digits : boundary_digits(N, b);
  int d = p.digits;
  p.tau0 = BigFloat::pi(d) / b;
  p.v0 = BigFloat::pi(d) * 3 / 4;
  p.mu0 = BigComplex(-(exp(p.v0) / sqrt(BigFloat(2, d))), BigFloat(0, d));
  BigFloat two_pi = BigFloat::pi(d) * 2;
  p.omega = unit_phase(two_pi * p.a / p.b);
  p.r = choose_residue(p.a, p.b, std::min(d, 60));
  if (N > 0 && (N % b) != p.r)
    throw Error(ErrorKind::Usage, "N = " + std::to_string(N) + " is not in the residue class r = " +
                                      std::to_string(p.r) + " mod " + std::to_string(b));
  return p;
}

// f_b(tau) = pi^2/(2 b^2 tau) - tau/2; f_b(tau0) = 0, f_b'(tau0) = -1.
inline BigComplex f_b(long b, const BigComplex& tau) {
  int d = tau.digits();
  BigFloat pi = BigFloat::pi(d);
  BigComplex num = BigComplex(pi * pi / (2 * b * b), BigFloat(0, d));
  return num / tau - tau * BigFloat("0.5", d);
}

namespace detail {

struct LambdaPieces {
  BigComplex q, psi, dpsi, E, dE;
  BigComplex log_lambda;   // with principal log psi
  BigComplex dlog_dtau;
  BigComplex lambda;
  LambdaPieces(int d)
      : q(d), psi(d), dpsi(d), E(d), dE(d), log_lambda(d), dlog_dtau(d), lambda(d) {}
};

inline BigFloat phase_angle(const WindowParams& p) {
  int d = p.digits;
  BigFloat two_pi = BigFloat::pi(d) * 2;
  long tmod = static_cast<long>((__int128(p.N) * (p.N + 1) / 2) % p.b);
  BigFloat ang = two_pi * ((p.a * tmod) % p.b) / p.b;
  if (p.N % 2 != 0) ang += BigFloat::pi(d);
  return ang;
}

// lambda_N(tau) = N (-1)^N q^{N(N+1)/2} E_r(tau) / psi(q), q = omega e^{-tau/N},
// assembled in log form to avoid the exponential scales.
inline LambdaPieces lambda_pieces(const WindowParams& p, const BigComplex& tau,
                                  long term_cap = kSeriesTermCap) {
  int d = p.digits;
  LambdaPieces out(d);
  out.q = p.omega * exp(-(tau / BigFloat(p.N, d)));
  try {
    auto [psi, dpsi] = psi_jet(out.q, pow10(-d + 4, d), term_cap);
    out.psi = psi;
    out.dpsi = dpsi;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ToleranceUnreachable)
      throw Error(ErrorKind::PrecisionExhausted, "psi series needs more terms than the cap");
    throw;
  }
  out.E = tail_E_r(p, tau, pow10(-d + 4, d), &out.dE, term_cap);

  BigFloat lnN = log(BigFloat(p.N, d));
  BigComplex half_tau_term = tau * (BigFloat(p.N + 1, d) / 2);
  out.log_lambda = BigComplex(lnN, phase_angle(p)) - half_tau_term - log(out.psi) + log(out.E);
  // d/dtau: -(N+1)/2 + (psi'/psi) q / N + E'/E
  BigComplex dlog = BigComplex(-(BigFloat(p.N + 1, d) / 2), BigFloat(0, d));
  dlog += (out.dpsi / out.psi) * out.q / BigFloat(p.N, d);
  dlog += out.dE / out.E;
  out.dlog_dtau = dlog;
  out.lambda = exp(out.log_lambda);
  return out;
}

}  // namespace detail

// Public single-point evaluation, Re tau in [tau0/2, 2 tau0]. The internal
// series tolerances are tied to the working precision; tol is accepted for
// interface symmetry with the other evaluators.
inline BigComplex lambda_N(const WindowParams& p, const BigComplex& tau, const BigFloat& tol,
                           long term_cap = kSeriesTermCap) {
  (void)tol;
  if (!(tau.re() >= p.tau0 / 2) || !(tau.re() <= p.tau0 * 2))
    throw Error(ErrorKind::Usage, "lambda_N expects Re tau in [tau0/2, 2 tau0]");
  return detail::lambda_pieces(p, tau, term_cap).lambda;
}

// One-variable matching: Newton on log lambda_N(tau) = log mu0 (continuous
// branch from tau0; the branch of log psi is tracked by first-order
// prediction across steps, and the 2 pi i multiple of the target is fixed
// at tau0). Solution must stay within C log N / N of tau0 (C = 5).
inline BigComplex match_tau(const WindowParams& p, const BigFloat& rel_tol,
                            long term_cap = kSeriesTermCap) {
  int d = p.digits;
  BigComplex tau(p.tau0, BigFloat(0, d));
  BigFloat window = log(BigFloat(p.N, d)) / p.N * 5;
  BigFloat two_pi = BigFloat::pi(d) * 2;

  detail::LambdaPieces pieces = detail::lambda_pieces(p, tau, term_cap);
  BigComplex log_psi_branch = log(pieces.psi);  // running continuous branch
  BigComplex log_mu0 = log(p.mu0);              // Im = pi

  auto branch_log_lambda = [&](const detail::LambdaPieces& pc,
                               const BigComplex& log_psi_cont) {
    BigFloat lnN = log(BigFloat(p.N, d));
    return BigComplex(lnN, detail::phase_angle(p)) - tau * (BigFloat(p.N + 1, d) / 2) -
           log_psi_cont + log(pc.E);
  };

  BigComplex g = branch_log_lambda(pieces, log_psi_branch) - log_mu0;
  long k0 = std::lround((g.im() / two_pi).to_double());
  g -= BigComplex(BigFloat(0, d), two_pi * k0);

  BigFloat step_cap = p.tau0 / 10;
  for (int iter = 0; iter < 60; ++iter) {
    if (max(abs(g.re()), abs(g.im())) < rel_tol) {
      BigFloat dist = abs(tau - BigComplex(p.tau0, BigFloat(0, d)));
      if (!(dist <= window))
        throw Error(ErrorKind::NoMatchInWindow,
                    "matched tau is outside the C log N / N window");
      return tau;
    }
    BigComplex step = g / pieces.dlog_dtau;
    BigFloat astep = abs(step);
    if (astep > step_cap) step = step * (step_cap / astep);
    BigComplex tau_next = tau - step;
    if (!(tau_next.re() > p.tau0 / 2) || !(tau_next.re() < p.tau0 * 2))
      throw Error(ErrorKind::NoMatchInWindow, "matching iterate left the tau window");

    // d log psi(q(tau)) / d tau = (psi'/psi) dq/dtau = -(psi'/psi) q / N
    BigComplex dlogpsi = (pieces.dpsi / pieces.psi) * pieces.q / BigFloat(p.N, d);
    BigComplex predicted = log_psi_branch - dlogpsi * (tau_next - tau);

    tau = tau_next;
    pieces = detail::lambda_pieces(p, tau, term_cap);
    BigComplex principal = log(pieces.psi);
    long wraps = std::lround(((predicted.im() - principal.im()) / two_pi).to_double());
    log_psi_branch = principal + BigComplex(BigFloat(0, d), two_pi * wraps);

    g = branch_log_lambda(pieces, log_psi_branch) - log_mu0 -
        BigComplex(BigFloat(0, d), two_pi * k0);
  }
  throw Error(ErrorKind::NoMatchInWindow, "matching Newton did not converge");
}

// Two-variable lifting: damped Newton on the normalized system
//   F1 = N H_N(q_N(tau), v/N) / psi(q_N(tau)),
//   F2 = d_u H_N(q_N(tau), v/N) / psi(q_N(tau)),
// seeded at (tau*, 3 pi/4). Success iff max(|F1|, |F2|) <= tol with
// Re tau > 0.
inline BoundarySolution lift_solution(const WindowParams& p, const BigFloat& tol,
                                      long term_cap = kSeriesTermCap) {
  int d = p.digits;
  BigComplex tau(match_tau(p, pow10(-10, d), term_cap));
  BigComplex v(p.v0, BigFloat(0, d));

  auto eval = [&](const BigComplex& tau_c, const BigComplex& v_c, BigComplex F[2],
                  BigComplex J[2][2], BigFloat* out_apsi) {
    BigComplex q = p.omega * exp(-(tau_c / BigFloat(p.N, d)));
    auto [psi, dpsi] = psi_jet(q, pow10(-d + 6, d), term_cap);
    BigFloat apsi = abs(psi);
    if (out_apsi) *out_apsi = apsi;
    BigComplex u = v_c / BigFloat(p.N, d);
    BigFloat jet_tol = apsi * tol * pow10(-5, d);
    WindowJetExt jet = window_jet_ext(q, u, p.N, jet_tol, term_cap);
    BigComplex Nc(BigFloat(p.N, d), BigFloat(0, d));
    F[0] = jet.h * Nc / psi;
    F[1] = jet.hu / psi;
    if (J) {
      BigComplex logpsi_tau = (dpsi / psi) * q / Nc;  // = -d log psi / d tau
      J[0][0] = -(q * jet.hq) / psi + F[0] * logpsi_tau;
      J[0][1] = jet.hu / psi;
      J[1][0] = -(q * jet.hqu) / (Nc * psi) + F[1] * logpsi_tau;
      J[1][1] = jet.huu / (Nc * psi);
    }
  };

  BigComplex F[2] = {BigComplex(d), BigComplex(d)};
  BigComplex J[2][2] = {{BigComplex(d), BigComplex(d)}, {BigComplex(d), BigComplex(d)}};
  BigFloat apsi(d);
  BigFloat res(d);
  for (int iter = 0; iter < 80; ++iter) {
    if (!(tau.re() > BigFloat(0, d)))
      throw Error(ErrorKind::LeftWindow, "Re tau <= 0 during the lift");
    if (!(abs(tau - BigComplex(p.tau0, BigFloat(0, d))) < p.tau0) ||
        !(abs(v - BigComplex(p.v0, BigFloat(0, d))) < BigFloat(2, d)))
      throw Error(ErrorKind::LeftWindow, "lift iterate left the boundary window");
    eval(tau, v, F, J, &apsi);
    res = max(abs(F[0]), abs(F[1]));
    if (res <= tol) break;
    BigComplex det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    if (det.is_zero()) throw Error(ErrorKind::Diverged, "singular lift Jacobian");
    BigComplex dtau = (F[0] * J[1][1] - F[1] * J[0][1]) / det;
    BigComplex dv = (J[0][0] * F[1] - J[1][0] * F[0]) / det;
    bool moved = false;
    for (int half = 0; half < 20; ++half) {
      BigComplex tn = tau - dtau, vn = v - dv;
      if (tn.re() > BigFloat(0, d)) {
        BigComplex Ft[2] = {BigComplex(d), BigComplex(d)};
        eval(tn, vn, Ft, nullptr, nullptr);
        if (max(abs(Ft[0]), abs(Ft[1])) < res) {
          tau = tn;
          v = vn;
          moved = true;
          break;
        }
      }
      dtau = dtau * BigFloat("0.5", d);
      dv = dv * BigFloat("0.5", d);
    }
    if (!moved) throw Error(ErrorKind::Diverged, "lift Newton stalled");
    if (iter == 79) throw Error(ErrorKind::Diverged, "lift Newton did not converge");
  }

  BoundarySolution sol;
  sol.params = p;
  sol.tau = tau;
  sol.v = v;
  sol.q = p.omega * exp(-(tau / BigFloat(p.N, d)));
  sol.u = v / BigFloat(p.N, d);
  eval(tau, v, F, nullptr, nullptr);
  sol.residual_h = abs(F[0]);
  sol.residual_hu = abs(F[1]);
  if (!(sol.residual_h <= tol) || !(sol.residual_hu <= tol))
    throw Error(ErrorKind::Diverged, "lift residuals above tolerance");
  sol.dist_to_omega = abs(sol.q - p.omega);
  if (!(abs(sol.q) < BigFloat(1, d)))
    throw Error(ErrorKind::LeftWindow, "lifted q left the unit disk");
  return sol;
}

// Critical-value reduction: Newton in u from 0 on d_u H_N(q, u) = 0, with
// the hypothesis gate |d_u H / d_u^2 H|(q, 0) <= 0.75 and |u| <= 2 along
// the way. Returns the critical point and critical value Phi = H(q, u_N(q)).
struct PhiReduction {
  BigComplex u_crit, phi;
  BigComplex B, C;  // d_u H_N(q,0), d_u^2 H_N(q,0)
  PhiReduction(int d) : u_crit(d), phi(d), B(d), C(d) {}
};

inline PhiReduction phi_reduction(const BigComplex& q, long N, const BigFloat& tol,
                                  long term_cap = kSeriesTermCap) {
  int d = q.digits();
  BigFloat jet_tol = min(tol, pow10(-d + 8, d));
  PhiReduction out(d);
  WindowJetExt jet0 = window_jet_ext(q, BigComplex(0, 0, d), N, jet_tol, term_cap);
  out.B = jet0.hu;
  out.C = jet0.huu;
  if (abs(out.C).is_zero() || !(abs(out.B) / abs(out.C) <= BigFloat::from_double(1.5, d)))
    throw Error(ErrorKind::HypothesisFailed,
                "critical-value reduction hypotheses fail: |B/C| too large");
  BigComplex u(0, 0, d);
  BigFloat step_tol = pow10(-(d - 10), d);
  for (int iter = 0; iter < 60; ++iter) {
    WindowJetExt jet = window_jet_ext(q, u, N, jet_tol, term_cap);
    if (jet.huu.is_zero()) throw Error(ErrorKind::HypothesisFailed, "second derivative vanished");
    // the derivative residual cannot be resolved below the evaluation floor
    if (abs(jet.hu) <= jet_tol * 50) {
      out.u_crit = u;
      out.phi = jet.h;
      return out;
    }
    BigComplex step = jet.hu / jet.huu;
    u -= step;
    if (!(abs(u) <= BigFloat(2, d)))
      throw Error(ErrorKind::HypothesisFailed, "critical point left |u| <= 2");
    if (abs(step) <= step_tol * (BigFloat(1, d) + abs(u))) {
      out.u_crit = u;
      out.phi = window_jet_ext(q, u, N, jet_tol, term_cap).h;
      return out;
    }
  }
  throw Error(ErrorKind::HypothesisFailed, "critical-point Newton did not converge");
}

}  // namespace thetalab
