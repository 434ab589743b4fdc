#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "thetalab/boundary.hpp"

using namespace thetalab;

namespace {
BigFloat tol10(int e, int d = kDefaultDigits) { return pow10(e, d); }
}

TEST_CASE("mu0 and v0 satisfy the defining identities") {
  WindowParams p = make_window_params(0, 1, 0, 60);
  int d = p.digits;
  // sin v0 + mu0 e^{-v0} = 0 and cos v0 - mu0 e^{-v0} = 0
  BigComplex s = sin(BigComplex(p.v0, BigFloat(0, d))) + p.mu0 * exp(-p.v0);
  BigComplex c = cos(BigComplex(p.v0, BigFloat(0, d))) - p.mu0 * exp(-p.v0);
  CHECK(abs(s) < tol10(-(d - 8), d));
  CHECK(abs(c) < tol10(-(d - 8), d));
  CHECK(abs(p.tau0 - BigFloat::pi(d)) < tol10(-(d - 5), d));
}

TEST_CASE("E_0 at b=1 matches the geometric closed form 1/(1+e^-tau)") {
  WindowParams p = make_window_params(0, 1, 0, 50);
  int d = p.digits;
  BigComplex tau(BigFloat::pi(d), BigFloat(0, d));
  BigComplex e = tail_E_r(p, tau, tol10(-40, d));
  BigComplex closed = BigComplex(1, 0, d) / (BigComplex(1, 0, d) + exp(-tau));
  CHECK(abs(e - closed) < tol10(-38, d));
  CHECK(abs(e - BigComplex("0.958577", "0", d)) < tol10(-5, d));
}

TEST_CASE("E_r at large Re tau reduces to the l=0 term") {
  WindowParams p = make_window_params(0, 1, 0, 50);
  int d = p.digits;
  BigComplex e = tail_E_r(p, BigComplex(50, 0, d), tol10(-30, d));
  CHECK(abs(e - BigComplex(1, 0, d)) < tol10(-20, d));
}

TEST_CASE("E_r truncation obeys the alternating-geometric bound") {
  WindowParams p = make_window_params(1, 3, 0, 50);
  int d = p.digits;
  BigComplex tau(p.tau0, BigFloat("0.1", d));
  // compare a crude truncation against the converged value
  BigComplex full = tail_E_r(p, tau, tol10(-45, d));
  for (long L : {5L, 10L, 20L}) {
    BigComplex partial(0, 0, d);
    BigFloat two_pi = BigFloat::pi(d) * 2;
    BigComplex epow(1, 0, d);
    BigComplex efac = exp(-tau);
    for (long l = 0; l <= L; ++l) {
      long e = static_cast<long>(((__int128(p.r) * l + __int128(l) * (l + 1) / 2) % p.b + p.b) % p.b);
      BigComplex w = unit_phase(two_pi * (p.a * e % p.b) / p.b);
      partial += w * ((l % 2 == 0) ? 1 : -1) * epow;
      epow *= efac;
    }
    BigFloat bound = exp(-(tau.re() * L)) / (BigFloat(1, d) - exp(-tau.re()));
    CHECK(abs(full - partial) <= bound);
  }
}

TEST_CASE("at b=2 the chosen residue class has |E_r(pi/2)| > 1/2") {
  int d = 50;
  WindowParams p = make_window_params(1, 2, 0, d);
  BigComplex e = tail_E_r(p, BigComplex(p.tau0, BigFloat(0, d)), tol10(-30, d));
  CHECK(abs(e) > BigFloat(1, d) / 2);
}

TEST_CASE("choose_residue: b=1 gives 0; b=2 and b=3 pick the largest |E_r|") {
  CHECK(choose_residue(0, 1, 50) == 0);
  long r2 = choose_residue(1, 2, 50);
  {
    WindowParams p = make_window_params(1, 2, 0, 50);
    int d = p.digits;
    BigComplex t0(p.tau0, BigFloat(0, d));
    BigFloat best(0, d);
    long arg_best = -1;
    for (long r = 0; r < 2; ++r) {
      WindowParams pr = p;
      pr.r = r;
      BigFloat m = abs(tail_E_r(pr, t0, tol10(-40, d)));
      if (m > best) {
        best = m;
        arg_best = r;
      }
    }
    CHECK(r2 == arg_best);
  }
  long r3 = choose_residue(1, 3, 50);
  CHECK(r3 >= 0);
  CHECK(r3 < 3);
}

TEST_CASE("f_b sanity: f_1(pi) = 0 with slope -1") {
  int d = 50;
  BigComplex pi_c(BigFloat::pi(d), BigFloat(0, d));
  CHECK(abs(f_b(1, pi_c)) < tol10(-45, d));
  BigFloat h = tol10(-15, d);
  BigComplex up = f_b(1, pi_c + BigComplex(h, BigFloat(0, d)));
  BigComplex dn = f_b(1, pi_c - BigComplex(h, BigFloat(0, d)));
  BigComplex slope = (up - dn) / (h * 2);
  CHECK(abs(slope + BigComplex(1, 0, d)) < tol10(-12, d));
}

TEST_CASE("lambda_N decays away from tau0 in the f_b' = -1 direction") {
  WindowParams p = make_window_params(0, 1, 40);
  int d = p.digits;
  BigComplex l0 = lambda_N(p, BigComplex(p.tau0, BigFloat(0, d)), tol10(-30, d));
  BigComplex l1 = lambda_N(p, BigComplex(p.tau0 + BigFloat("0.2", d), BigFloat(0, d)),
                           tol10(-30, d));
  CHECK(abs(l1) < abs(l0));
  CHECK(!abs(l0).is_zero());
  // log|lambda| = O(log N) near tau0
  CHECK(abs(log(abs(l0))) < log(BigFloat(40, d)) * 6 + BigFloat(20, d));
}

TEST_CASE("match_tau lands within the C log N / N window and shrinks with N") {
  WindowParams p40 = make_window_params(0, 1, 40);
  BigComplex t40 = match_tau(p40, pow10(-10, p40.digits));
  BigFloat d40 = abs(t40 - BigComplex(p40.tau0, BigFloat(0, p40.digits)));
  CHECK(d40 < log(BigFloat(40, p40.digits)) / 40 * 5);

  WindowParams p80 = make_window_params(0, 1, 80);
  BigComplex t80 = match_tau(p80, pow10(-10, p80.digits));
  BigFloat d80 = abs(t80 - BigComplex(p80.tau0, BigFloat(0, p80.digits)));
  CHECK((d80 + BigFloat(0, p40.digits)) < d40);

  // the matched point satisfies lambda(tau*) = mu0
  BigComplex lam = lambda_N(p40, t40, pow10(-20, p40.digits));
  CHECK(abs(lam - p40.mu0) < abs(p40.mu0) * pow10(-9, p40.digits));
}

TEST_CASE("match_tau near b=2 lands near pi/2") {
  WindowParams p = make_window_params(1, 2, 32);
  BigComplex t = match_tau(p, pow10(-10, p.digits));
  CHECK(abs(t - BigComplex(p.tau0, BigFloat(0, p.digits))) < BigFloat("0.3", p.digits));
}

TEST_CASE("limiting Jacobian determinant at (0, 3pi/4) is -1") {
  // the limiting system sin v + mu0 e^{-xi-v}, cos v - mu0 e^{-xi-v} has
  // Jacobian determinant -2 sin^2 v0 = -1 at the seed
  int d = 50;
  BigFloat v0 = BigFloat::pi(d) * 3 / 4;
  BigComplex mu0(-(exp(v0) / sqrt(BigFloat(2, d))), BigFloat(0, d));
  BigComplex e = mu0 * exp(-v0);  // = -sin v0
  BigComplex j11 = -e, j12 = cos(BigComplex(v0, BigFloat(0, d))) - e;
  BigComplex j21 = e, j22 = -sin(BigComplex(v0, BigFloat(0, d))) + e;
  BigComplex det = j11 * j22 - j12 * j21;
  CHECK(abs(det + BigComplex(1, 0, d)) < tol10(-(d - 8), d));
}

TEST_CASE("lift at b=1: |q| < 1, q near 1, residuals below tolerance") {
  WindowParams p = make_window_params(0, 1, 40);
  int d = p.digits;
  BigFloat tol = tol10(-20, d);
  BoundarySolution sol = lift_solution(p, tol);
  CHECK(abs(sol.q) < BigFloat(1, d));
  CHECK(sol.residual_h <= tol);
  CHECK(sol.residual_hu <= tol);
  // |q - 1| <= 2 pi / N
  CHECK(sol.dist_to_omega <= BigFloat::pi(d) * 2 / p.N);
  // v stays near 3 pi / 4
  CHECK(abs(sol.v - BigComplex(p.v0, BigFloat(0, d))) < BigFloat(1, d));
}

TEST_CASE("lift validates against doubled precision") {
  WindowParams p = make_window_params(0, 1, 32);
  BigFloat tol = tol10(-20, p.digits);
  BoundarySolution sol = lift_solution(p, tol);
  int d2 = p.digits * 2;
  BigComplex tau2(sol.tau.re() + BigFloat(d2), sol.tau.im() + BigFloat(d2));
  BigComplex q2 = unit_phase(BigFloat::pi(d2) * 2 * p.a / p.b) * exp(-(tau2 / BigFloat(p.N, d2)));
  BigComplex u2 = (sol.v + BigComplex(0, 0, d2)) / BigFloat(p.N, d2);
  auto [psi2, dpsi2] = psi_jet(q2, pow10(-d2 + 6, d2));
  WindowJetExt jet = window_jet_ext(q2, u2, p.N, abs(psi2) * pow10(-30, d2));
  BigFloat r1 = abs(jet.h * BigFloat(p.N, d2) / psi2);
  BigFloat r2 = abs(jet.hu / psi2);
  CHECK(r1 <= tol * 10);
  CHECK(r2 <= tol * 10);
}

TEST_CASE("lift at b=2 approaches -1 along the progression") {
  BigFloat d24(0, 60), d32(0, 60);
  {
    WindowParams p = make_window_params(1, 2, 24);
    BoundarySolution s = lift_solution(p, tol10(-20, p.digits));
    CHECK(abs(s.q - BigComplex(-1, 0, p.digits)) < BigFloat("0.2", p.digits));
    d24 = s.dist_to_omega + BigFloat(0, 60);
  }
  {
    WindowParams p = make_window_params(1, 2, 32);
    BoundarySolution s = lift_solution(p, tol10(-20, p.digits));
    d32 = s.dist_to_omega + BigFloat(0, 60);
  }
  CHECK(d32 < d24);
}

TEST_CASE("lift toward the imaginary direction produces arg q near pi/2") {
  WindowParams p = make_window_params(1, 4, 25);
  int d = p.digits;
  BoundarySolution s = lift_solution(p, tol10(-20, d));
  CHECK(abs(arg(s.q) - BigFloat::pi(d) / 2) < BigFloat("0.05", d));
  CHECK(abs(s.q) < BigFloat(1, d));
  CHECK(s.dist_to_omega < BigFloat("0.1", d));
}

TEST_CASE("window params reject N outside the residue class") {
  // for b=2 the chosen class is even; odd N must be rejected
  CHECK_THROWS_AS(make_window_params(1, 2, 33), Error);
}

TEST_CASE("phi_reduction: first-order critical point at small q") {
  int d = 50;
  BigComplex q("0.2", "0", d);
  PhiReduction pr = phi_reduction(q, 20, tol10(-30, d));
  BigComplex first_order = -(pr.B / pr.C);
  CHECK(abs(pr.u_crit - first_order) < abs(pr.u_crit) * BigFloat("0.5", d));
  // the critical point actually kills d_u H
  WindowJetExt jet = window_jet_ext(q, pr.u_crit, 20, tol10(-40, d));
  CHECK(abs(jet.hu) < tol10(-35, d));
}

TEST_CASE("phi_reduction matches the second-order expansion at q=0.5, N=60") {
  int d = 50;
  BigComplex q("0.5", "0", d);
  PhiReduction pr = phi_reduction(q, 60, tol10(-30, d));
  WindowJetExt jet0 = window_jet_ext(q, BigComplex(0, 0, d), 60, tol10(-40, d));
  BigComplex A = jet0.h;
  BigComplex second_order = A - (pr.B * pr.B) / (pr.C * 2);
  // mismatch is bounded by the cubic term ~ |u|^3 |H_uuu|/6
  BigFloat u3 = pow_si(abs(pr.u_crit), 3);
  CHECK(abs(pr.phi - second_order) < u3 * BigFloat(40, d) + tol10(-40, d));
}

TEST_CASE("phi vanishes at a lifted solution's q") {
  WindowParams p = make_window_params(0, 1, 32);
  int d = p.digits;
  BigFloat tol = tol10(-20, d);
  BoundarySolution sol = lift_solution(p, tol);
  PhiReduction pr = phi_reduction(sol.q, p.N, tol);
  // |Phi| at the solution is the unnormalized residual ~ |psi| tol / N
  auto [psi, dpsi] = psi_jet(sol.q, pow10(-d + 6, d));
  CHECK(abs(pr.phi) <= abs(psi) * tol * 10);
  CHECK(abs(pr.u_crit - sol.u) < pow10(-15, d));
}

TEST_CASE("tail_E_r rejects Re tau <= 0") {
  WindowParams p = make_window_params(0, 1, 0, 50);
  CHECK_THROWS_AS(tail_E_r(p, BigComplex(-1, 1, 50), tol10(-20, 50)), Error);
}
