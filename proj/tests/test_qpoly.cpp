#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "thetalab/polyroot.hpp"
#include "thetalab/qpoly.hpp"

using namespace thetalab;

namespace {
BigFloat tol10(int e, int d = kDefaultDigits) { return pow10(e, d); }
}

TEST_CASE("truncation polynomial term tables") {
  SparseQPoly t0 = truncation_poly(0);
  REQUIRE(t0.terms.size() == 1);
  CHECK(t0.terms[0].xdeg == 0);
  CHECK(t0.terms[0].qexp2 == 0);
  CHECK(t0.terms[0].coeff == 1);

  SparseQPoly t2 = truncation_poly(2);
  REQUIRE(t2.terms.size() == 3);
  CHECK(t2.terms[1].qexp2 == 2);   // q^1
  CHECK(t2.terms[2].qexp2 == 6);   // q^3

  SparseQPoly t5 = truncation_poly(5);
  std::vector<long> expect{0, 1, 3, 6, 10, 15};
  REQUIRE(t5.terms.size() == 6);
  for (size_t j = 0; j < 6; ++j) {
    CHECK(t5.terms[j].qexp2 == 2 * expect[j]);
    CHECK(t5.terms[j].coeff == 1);
  }
}

TEST_CASE("psi sections: 1, 1-3q, 1-3q+5q^3") {
  CHECK(psi_section(0).dump() == "0 0 1\n");
  CHECK(psi_section(1).dump() == "0 0 1\n0 1 -3\n");
  CHECK(psi_section(2).dump() == "0 0 1\n0 1 -3\n0 3 5\n");
}

TEST_CASE("psi section degree and leading coefficient") {
  for (long m : {3L, 7L, 16L}) {
    SparseQPoly p = psi_section(m);
    CHECK(p.terms.back().qexp2 == m * (m + 1));
    BigInt lead = p.terms.back().coeff;
    CHECK(lead == BigInt((m % 2 == 0 ? 1 : -1) * (2 * m + 1)));
    CHECK(p.terms.front().coeff == 1);
  }
}

TEST_CASE("psi section coefficients agree with the eta-cubed series") {
  // section m is the full series through q-degree N_m
  SparseQPoly p = psi_section(6);
  long k = 0;
  for (auto& t : p.terms) {
    CHECK(t.qexp2 == k * (k + 1));
    CHECK(t.coeff == BigInt((k % 2 == 0 ? 1 : -1) * (2 * k + 1)));
    ++k;
  }
}

TEST_CASE("psi section evaluates close to psi inside the disk") {
  int d = 50;
  BigComplex q("0.4", "0.2", d);
  BigComplex full = psi_eval(q, tol10(-40, d), PsiMode::Series);
  BigComplex sec = eval_q(psi_section(20), q, BigComplex(1, 0, d));
  CHECK(abs(full - sec) < tol10(-25, d));
}

TEST_CASE("jensen identity at n=1: both sides are z+q") {
  int d = 50;
  BigComplex q("0.5", "0", d), z(2, 0, d);
  BigFloat r = jensen_identity_check(1, q, z);
  CHECK(r < tol10(-45, d));
  // LHS = z + q = 2.5
  ScaledJensen g = jensen_theta_table(1);
  BigComplex lhs = pow_si(z, 1) * eval_q(g.table, q, BigComplex(1, 0, d) / z);
  CHECK(abs(lhs - BigComplex("2.5", "0", d)) < tol10(-45, d));
}

TEST_CASE("jensen identity for random points in the annulus") {
  int d = 50;
  uint64_t s = 99;
  auto next = [&]() {
    s = s * 6364136223846793005ull + 1442695040888963407ull;
    return double(s >> 11) / 9007199254740992.0;
  };
  for (int trial = 0; trial < 30; ++trial) {
    long n = 2 + long(next() * 9);
    double rq = 0.1 + 0.85 * next(), aq = 6.2831853 * next();
    double rz = 0.1 + 0.85 * next(), az = 6.2831853 * next();
    BigComplex q(BigFloat::from_double(rq * std::cos(aq), d),
                 BigFloat::from_double(rq * std::sin(aq), d));
    BigComplex z(BigFloat::from_double(rz * std::cos(az), d),
                 BigFloat::from_double(rz * std::sin(az), d));
    BigFloat r = jensen_identity_check(n, q, z);
    CHECK(r < tol10(-(d - 5), d));
  }
}

TEST_CASE("jensen identity at n=8 with complex inputs") {
  int d = 50;
  BigComplex q("0", "0.3", d), z(1, 1, d);
  CHECK(jensen_identity_check(8, q, z) < tol10(-(d - 5), d));
}

TEST_CASE("jensen identity rejects degenerate inputs") {
  int d = 40;
  CHECK_THROWS_AS(jensen_identity_check(3, BigComplex(0, 0, d), BigComplex(1, 0, d)), Error);
  CHECK_THROWS_AS(jensen_identity_check(3, BigComplex(1, 0, d), BigComplex(0, 0, d)), Error);
}

TEST_CASE("central factor witness is exact in rational arithmetic at m=1, q=1/3") {
  auto [rt, rd] = central_factor_witness_exact(1, BigRat(1, 3));
  CHECK(rt == 0);
  CHECK(rd == 0);
  // x = -9 is a double root of Theta_3(1/3, x)
  SparseQPoly t3 = truncation_poly(3);
  CHECK(eval_q_rational(t3, BigRat(1, 3), BigRat(-9)) == 0);
  CHECK(eval_q_rational(t3.deriv_main(), BigRat(1, 3), BigRat(-9)) == 0);
}

TEST_CASE("central factor witness at the real root of Psi_2 near -0.9") {
  int d = 50;
  IntQPoly psi2;
  psi2.coeffs = dense_q_coeffs(psi_section(2));
  RootSet rs = roots_all(psi2, d);
  // pick the real root near -0.9
  BigComplex root(d);
  bool found = false;
  for (auto& r : rs.roots) {
    if (abs(r.im()) < tol10(-20, d) && r.re() < BigFloat(0, d)) {
      root = r;
      found = true;
    }
  }
  REQUIRE(found);
  CHECK(abs(root.re() - BigFloat("-0.906", d)) < BigFloat("0.01", d));
  CentralWitness w = central_factor_witness(2, root, tol10(-30, d));
  CHECK(w.residual_theta < tol10(-30, d));
  CHECK(w.residual_dtheta < tol10(-30, d));
}

TEST_CASE("central factor witness across all 136 zeros of Psi_16") {
  int d = 50;
  IntQPoly psi16;
  psi16.coeffs = dense_q_coeffs(psi_section(16));
  RootSet rs = roots_all(psi16, d);
  REQUIRE(rs.converged);
  long total = 0, good = 0;
  for (size_t i = 0; i < rs.roots.size(); ++i) {
    total += rs.multiplicity[i];
    CentralWitness w = central_factor_witness(16, rs.roots[i], tol10(-25, d));
    if (w.residual_theta < tol10(-25, d) && w.residual_dtheta < tol10(-25, d))
      good += rs.multiplicity[i];
  }
  CHECK(total == 136);
  CHECK(good == 136);
}

TEST_CASE("even reduction at m=1: R = t + y + t y^2, S = 1 + t u") {
  EvenReduction er = even_reduction(1);
  CHECK(er.R.dump() == "0 1/2 1\n1 0 1\n2 1/2 1\n");
  CHECK(er.S.dump() == "0 0 1\n1 1/2 1\n");
}

TEST_CASE("even reduction at m=2 reconstructs R from S") {
  EvenReduction er = even_reduction(2);
  CHECK(er.R.terms.size() == 5);
  SparseQPoly back = expand_reciprocal(er.S, 2);
  SparseQPoly rn = er.R;
  rn.normalize();
  REQUIRE(back.terms.size() == rn.terms.size());
  for (size_t i = 0; i < rn.terms.size(); ++i) {
    CHECK(back.terms[i].xdeg == rn.terms[i].xdeg);
    CHECK(back.terms[i].qexp2 == rn.terms[i].qexp2);
    CHECK(back.terms[i].coeff == rn.terms[i].coeff);
  }
}

TEST_CASE("round trip and palindromicity for m up to 10") {
  for (long m = 1; m <= 10; ++m) {
    EvenReduction er = even_reduction(m);
    CHECK(is_palindromic(er.R, 2 * m));
    SparseQPoly back = expand_reciprocal(er.S, m);
    SparseQPoly rn = er.R;
    rn.normalize();
    REQUIRE(back.terms.size() == rn.terms.size());
    bool same = true;
    for (size_t i = 0; i < rn.terms.size(); ++i)
      same = same && back.terms[i].xdeg == rn.terms[i].xdeg &&
             back.terms[i].qexp2 == rn.terms[i].qexp2 && back.terms[i].coeff == rn.terms[i].coeff;
    CHECK(same);
  }
}

TEST_CASE("term dump uses the one-term-per-line format") {
  SparseQPoly t2 = truncation_poly(2);
  CHECK(t2.dump() == "0 0 1\n1 1 1\n2 3 1\n");
}
