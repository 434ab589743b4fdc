#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "thetalab/theta.hpp"

using namespace thetalab;

namespace {

BigFloat tol10(int e, int digits = kDefaultDigits) { return pow10(e, digits); }

// deterministic generator for property-style sampling
struct SplitMix {
  uint64_t s;
  explicit SplitMix(uint64_t seed) : s(seed) {}
  uint64_t next() {
    s += 0x9e3779b97f4a7c15ull;
    uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return double(next() >> 11) * (1.0 / 9007199254740992.0); }
};

BigComplex rand_disk(SplitMix& rng, double rmax, int digits) {
  double a = rng.uniform() * 6.283185307179586;
  double r = rmax * std::sqrt(rng.uniform());
  return BigComplex(BigFloat::from_double(r * std::cos(a), digits),
                    BigFloat::from_double(r * std::sin(a), digits));
}

}  // namespace

TEST_CASE("theta jet at q=0 keeps only the first two terms") {
  int d = 50;
  ThetaJet jet = theta_jet(BigComplex(0, 0, d), BigComplex(5, 0, d), tol10(-40, d));
  CHECK(abs(jet.value - BigComplex(1, 0, d)) < tol10(-45, d));
  CHECK(abs(jet.dz) < tol10(-45, d));
  CHECK(abs(jet.dq - BigComplex(5, 0, d)) < tol10(-45, d));
  CHECK(abs(jet.dzz) < tol10(-45, d));
  CHECK(abs(jet.dqz - BigComplex(1, 0, d)) < tol10(-45, d));
}

TEST_CASE("theta jet at z=0: value 1, dz = q") {
  int d = 50;
  BigComplex q("0.3", "0", d);
  ThetaJet jet = theta_jet(q, BigComplex(0, 0, d), tol10(-40, d));
  CHECK(abs(jet.value - BigComplex(1, 0, d)) < tol10(-45, d));
  CHECK(abs(jet.dz - q) < tol10(-45, d));
}

TEST_CASE("first spectral point nearly annihilates value and dz") {
  int d = 50;
  BigComplex q("0.309249338600", "0", d);
  BigComplex z("-7.503255964244", "0", d);
  ThetaJet jet = theta_jet(q, z, tol10(-30, d));
  CHECK(abs(jet.value) < tol10(-11, d));
  CHECK(abs(jet.dz) < tol10(-11, d));
}

TEST_CASE("theta jet rejects |q| >= 1 and bad tolerances") {
  int d = 40;
  CHECK_THROWS_AS(theta_jet(BigComplex(1, 0, d), BigComplex(1, 0, d), tol10(-30, d)), Error);
  CHECK_THROWS_AS(theta_jet(BigComplex("1.3", "0.2", d), BigComplex(1, 0, d), tol10(-30, d)),
                  Error);
}

TEST_CASE("tail soundness: 10 extra terms move components less than tail_bound") {
  int d = 50;
  SplitMix rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    BigComplex q = rand_disk(rng, 0.8, d);
    BigComplex z = rand_disk(rng, 10.0, d);
    ThetaJet a = theta_jet(q, z, tol10(-35, d));
    ThetaJet b = theta_jet(q, z, tol10(-35, d), kSeriesTermCap, a.terms_used + 10);
    CHECK(b.terms_used >= a.terms_used + 10);
    CHECK(abs(a.value - b.value) <= a.tail_bound);
    CHECK(abs(a.dz - b.dz) <= a.tail_bound);
    CHECK(abs(a.dq - b.dq) <= a.tail_bound);
    CHECK(abs(a.dzz - b.dzz) <= a.tail_bound);
    CHECK(abs(a.dqz - b.dqz) <= a.tail_bound);
    CHECK(a.tail_bound <= tol10(-35, d));
  }
}

TEST_CASE("conjugation symmetry is exact at matched precision") {
  int d = 50;
  SplitMix rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    BigComplex q = rand_disk(rng, 0.7, d);
    BigComplex z = rand_disk(rng, 5.0, d);
    ThetaJet a = theta_jet(q, z, tol10(-40, d));
    ThetaJet b = theta_jet(conj(q), conj(z), tol10(-40, d));
    CHECK(b.value == conj(a.value));
    CHECK(b.dz == conj(a.dz));
  }
}

TEST_CASE("finite truncation jet matches the full jet for tiny q") {
  int d = 50;
  BigComplex q("0.01", "0", d), z("2", "0", d);
  ThetaJet full = theta_jet(q, z, tol10(-45, d));
  ThetaJet fin = theta_trunc_jet(40, q, z);
  CHECK(abs(full.value - fin.value) < tol10(-40, d));
  CHECK(abs(full.dq - fin.dq) < tol10(-40, d));
}

TEST_CASE("psi at q=0 is 1 in both modes") {
  int d = 50;
  CHECK(abs(psi_eval(BigComplex(0, 0, d), tol10(-30, d), PsiMode::Series) - BigComplex(1, 0, d)) <
        tol10(-45, d));
  CHECK(abs(psi_eval(BigComplex(0, 0, d), tol10(-30, d), PsiMode::Product) - BigComplex(1, 0, d)) <
        tol10(-45, d));
}

TEST_CASE("psi series and product agree at q=1/3 to 1e-28") {
  int d = 50;
  BigComplex q = BigComplex(1, 0, d) / BigComplex(3, 0, d);
  BigComplex s = psi_eval(q, tol10(-30, d), PsiMode::Series);
  BigComplex p = psi_eval(q, tol10(-30, d), PsiMode::Product);
  CHECK(abs(s - p) < tol10(-28, d));
}

TEST_CASE("psi is tiny near the cusp q=0.99") {
  int d = 60;
  BigComplex q("0.99", "0", d);
  BigComplex p = psi_eval(q, tol10(-20, d), PsiMode::Product);
  CHECK(abs(p) < tol10(-3, d));
  BigComplex s = psi_eval(q, tol10(-20, d), PsiMode::Series);
  CHECK(abs(s - p) < tol10(-19, d) * 2);
}

TEST_CASE("psi series/product agreement over random |q| <= 0.9") {
  int d = 50;
  SplitMix rng(23);
  BigFloat tol = tol10(-30, d);
  for (int trial = 0; trial < 40; ++trial) {
    BigComplex q = rand_disk(rng, 0.9, d);
    BigComplex s = psi_eval(q, tol, PsiMode::Series);
    BigComplex p = psi_eval(q, tol, PsiMode::Product);
    CHECK(abs(s - p) <= tol * 2);
  }
}

TEST_CASE("window H_0 equals theta at x = -e^u") {
  int d = 50;
  BigComplex q("0.2", "0", d), u("0.1", "0", d);
  WindowJet wj = window_jet(q, u, 0, tol10(-30, d));
  BigComplex x = -exp(u);
  ThetaJet jet = theta_jet(q, x, tol10(-30, d));
  CHECK(abs(wj.h - jet.value) < tol10(-28, d));
}

TEST_CASE("bilateral limit: H(0.5, 0) = 0 and d_u H(0.5, 0) = psi(0.5)") {
  int d = 50;
  BigComplex q("0.5", "0", d), u(0, 0, d);
  WindowJet wj = window_jet(q, u, 60, tol10(-30, d));
  CHECK(abs(wj.h) < tol10(-25, d));
  BigComplex psi = psi_eval(q, tol10(-30, d), PsiMode::Series);
  CHECK(abs(wj.hu - psi) < tol10(-25, d));
}

TEST_CASE("window jet tail bound is assigned and small") {
  int d = 50;
  WindowJet wj = window_jet(BigComplex("0.4", "0.1", d), BigComplex("0.2", "-0.3", d), 12,
                            tol10(-35, d));
  CHECK(wj.tail_bound <= tol10(-35, d));
  CHECK(wj.N == 12);
  CHECK(wj.terms_used > 12);
}

TEST_CASE("extended window jet: finite differences match hu, huu, hq") {
  int d = 60;
  BigComplex q("0.35", "0.1", d), u("0.15", "0.2", d);
  BigFloat tol = tol10(-45, d);
  WindowJetExt jet = window_jet_ext(q, u, 8, tol);
  BigFloat h = tol10(-20, d);
  BigComplex du = BigComplex(h, BigFloat(0, d));

  WindowJetExt up = window_jet_ext(q, u + du, 8, tol);
  WindowJetExt dn = window_jet_ext(q, u - du, 8, tol);
  BigComplex fd_hu = (up.h - dn.h) / (h * 2);
  CHECK(abs(fd_hu - jet.hu) < tol10(-17, d));
  BigComplex fd_huu = (up.hu - dn.hu) / (h * 2);
  CHECK(abs(fd_huu - jet.huu) < tol10(-17, d));

  WindowJetExt qup = window_jet_ext(q + du, u, 8, tol);
  WindowJetExt qdn = window_jet_ext(q - du, u, 8, tol);
  BigComplex fd_hq = (qup.h - qdn.h) / (h * 2);
  CHECK(abs(fd_hq - jet.hq) < tol10(-17, d));
  BigComplex fd_hqu = (qup.hu - qdn.hu) / (h * 2);
  CHECK(abs(fd_hqu - jet.hqu) < tol10(-17, d));
}

TEST_CASE("d_u consistency at the precision-scaled finite-difference step") {
  int d = 50;
  SplitMix rng(41);
  BigFloat h = tol10(-d / 3, d);
  for (int trial = 0; trial < 10; ++trial) {
    BigComplex q = rand_disk(rng, 0.6, d);
    BigComplex u = rand_disk(rng, 0.5, d);
    long N = 1 + long(rng.next() % 8);
    WindowJet jet = window_jet(q, u, N, tol10(-45, d));
    BigComplex du = BigComplex(h, BigFloat(0, d));
    WindowJet up = window_jet(q, u + du, N, tol10(-45, d));
    WindowJet dn = window_jet(q, u - du, N, tol10(-45, d));
    BigComplex fd = (up.h - dn.h) / (h * 2);
    // central difference error is O(h^2) ~ 1e-33 at 50 digits
    CHECK(abs(fd - jet.hu) < tol10(-d / 3 * 2 + 3, d) * (abs(jet.hu) + BigFloat(1, d)));
  }
}

TEST_CASE("window identity residual: definitional at N=0") {
  int d = 50;
  BigFloat r = window_identity_residual(BigComplex("0.3", "0", d), BigComplex("0.2", "0", d), 0,
                                        tol10(-40, d));
  CHECK(r < tol10(-30, d));
}

TEST_CASE("window identity residual: N=3 complex u at 40 digits") {
  int d = 40;
  BigFloat r = window_identity_residual(BigComplex("0.4", "0", d),
                                        BigComplex("0.5", "0.3", d), 3, tol10(-30, d));
  CHECK(r < tol10(-25, d));
}

TEST_CASE("window identity residual: N=8 needs 60 digits for the q^-28 prefactor") {
  int d = 60;
  BigFloat r = window_identity_residual(BigComplex("0.1", "0", d), BigComplex(0, 0, d), 8,
                                        tol10(-40, d));
  CHECK(r < tol10(-15, d));
}

TEST_CASE("window identity residual property over random inputs") {
  int d = 60;
  SplitMix rng(51);
  BigFloat tol = tol10(-30, d);
  for (int trial = 0; trial < 25; ++trial) {
    BigComplex q = rand_disk(rng, 0.6, d);
    if (abs(q) < BigFloat("0.05", d)) continue;
    BigComplex u = rand_disk(rng, 0.6, d);
    long N = long(rng.next() % 11);
    try {
      BigFloat r = window_identity_residual(q, u, N, tol);
      CHECK(r <= tol * 10);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ScaleOverflow);
    }
  }
}

TEST_CASE("psi rejects |q| >= 1 in both modes") {
  int d = 40;
  CHECK_THROWS_AS(psi_eval(BigComplex(1, 0, d), tol10(-20, d), PsiMode::Series), Error);
  CHECK_THROWS_AS(psi_eval(BigComplex("0.8", "0.7", d), tol10(-20, d), PsiMode::Product), Error);
}

TEST_CASE("window jet reports ToleranceUnreachable when the term cap is hit") {
  int d = 40;
  try {
    window_jet(BigComplex("0.99999", "0", d), BigComplex(0, 0, d), 2, tol10(-35, d), 50);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ToleranceUnreachable);
  }
}

TEST_CASE("scale overflow triggers for large N at small q") {
  int d = 40;
  CHECK_THROWS_AS(
      window_identity_residual(BigComplex("0.05", "0", d), BigComplex(0, 0, d), 12, tol10(-30, d)),
      Error);
}
