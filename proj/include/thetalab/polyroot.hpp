#pragma once

// Arbitrary-precision polynomial root finding (Aberth-Ehrlich simultaneous
// iteration with Newton-polygon starting points), plus the zero-distribution
// statistics and the outer-localization check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "thetalab/discriminant.hpp"
#include "thetalab/qpoly.hpp"

namespace thetalab {

struct RootSet {
  std::vector<BigComplex> roots;   // cluster representatives
  std::vector<int> multiplicity;   // sum equals the polynomial degree
  long source_degree = 0;
  BigFloat certified_separation;   // min pairwise distance between representatives
  bool converged = true;
  int digits = kDefaultDigits;

  RootSet() : certified_separation(kDefaultDigits) {}
};

namespace detail {

// Newton-polygon (upper convex hull of (i, log2|a_i|)) starting points.
inline std::vector<BigComplex> aberth_initial(const std::vector<BigComplex>& a, int digits) {
  long n = static_cast<long>(a.size()) - 1;
  std::vector<std::pair<long, double>> pts;
  for (long i = 0; i <= n; ++i) {
    BigFloat m = abs(a[i]);
    if (!m.is_zero()) pts.push_back({i, log2_est(m)});
  }
  // upper hull, left to right
  std::vector<std::pair<long, double>> hull;
  for (auto& p : pts) {
    while (hull.size() >= 2) {
      auto& b = hull[hull.size() - 1];
      auto& c = hull[hull.size() - 2];
      double cross = (b.first - c.first) * (p.second - c.second) -
                     (p.first - c.first) * (b.second - c.second);
      if (cross >= 0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  std::vector<BigComplex> z;
  z.reserve(n);
  double two_pi = 6.283185307179586;
  for (size_t e = 0; e + 1 < hull.size(); ++e) {
    long i1 = hull[e].first, i2 = hull[e + 1].first;
    double l1 = hull[e].second, l2 = hull[e + 1].second;
    long k = i2 - i1;
    double lr = (l1 - l2) / double(k);  // log2 radius
    long ip = static_cast<long>(std::floor(lr));
    BigFloat radius = mul_2si(BigFloat::from_double(std::pow(2.0, lr - ip), digits), ip);
    for (long j = 0; j < k; ++j) {
      double ang = two_pi * (double(j) + 0.3917 + 0.133 * double(e)) / double(k);
      z.push_back(BigComplex(radius * BigFloat::from_double(std::cos(ang), digits),
                             radius * BigFloat::from_double(std::sin(ang), digits)));
    }
  }
  while (static_cast<long>(z.size()) < n) z.push_back(BigComplex(1, 1, digits));
  return z;
}

// One full evaluation: value, derivative and the positive majorant
// sum |a_k| |z|^k at z.
inline void horner_with_majorant(const std::vector<BigComplex>& a, const BigComplex& z,
                                 BigComplex& val, BigComplex& der, BigFloat& maj,
                                 BigComplex& scratch) {
  int d = z.digits();
  long n = static_cast<long>(a.size()) - 1;
  val = a[n];
  der = BigComplex(0, 0, d);
  BigFloat az = abs(z);
  maj = abs(a[n]);
  for (long k = n - 1; k >= 0; --k) {
    BigComplex::mul(scratch, der, z);
    swap(der, scratch);
    der += val;
    BigComplex::mul(scratch, val, z);
    swap(val, scratch);
    val += a[k];
    maj *= az;
    maj += abs(a[k]);
  }
}

inline void aberth_sweeps(const std::vector<BigComplex>& a, std::vector<BigComplex>& z,
                          std::vector<bool>& done, const BigFloat& stop_eps, int max_sweeps,
                          int digits) {
  long n = static_cast<long>(z.size());
  BigComplex val(digits), der(digits), scratch(digits), ratio(digits), acc(digits), diff(digits),
      corr(digits), one(1, 0, digits);
  BigFloat maj(digits);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool all_done = true;
    for (long i = 0; i < n; ++i) {
      if (done[i]) continue;
      horner_with_majorant(a, z[i], val, der, maj, scratch);
      if (abs(val) <= stop_eps * maj) {
        done[i] = true;
        continue;
      }
      all_done = false;
      if (der.is_zero()) {
        // nudge off the stationary point deterministically
        z[i] += BigComplex(BigFloat::from_double(1e-3, digits) * (abs(z[i]) + BigFloat(1, digits)),
                           BigFloat(0, digits));
        continue;
      }
      BigComplex::div(ratio, val, der);
      acc = BigComplex(0, 0, digits);
      for (long j = 0; j < n; ++j) {
        if (j == i) continue;
        diff = z[i] - z[j];
        if (diff.is_zero()) {
          diff = BigComplex(BigFloat::from_double(1e-20, digits), BigFloat(0, digits));
        }
        BigComplex::div(scratch, one, diff);
        acc += scratch;
      }
      BigComplex::mul(scratch, ratio, acc);
      BigComplex denom = one - scratch;
      if (denom.is_zero()) denom = one;
      BigComplex::div(corr, ratio, denom);
      z[i] -= corr;
    }
    if (all_done) return;
  }
}

}  // namespace detail

// All roots of a complex-coefficient polynomial, ascending coefficients.
// Backward-error stop: |p(root)| <= sum_k |a_k||root|^k * 10^{-digits+g},
// documented guard g = 10. Near-coincident roots (separation below
// 10^{-digits/2} * scale) are merged into one representative with a
// multiplicity tag.
inline RootSet roots_all_complex(std::vector<BigComplex> coeffs, int digits) {
  RootSet rs;
  rs.digits = digits;
  while (!coeffs.empty() && abs(coeffs.back()).is_zero()) coeffs.pop_back();
  long n = static_cast<long>(coeffs.size()) - 1;
  if (n < 1) throw Error(ErrorKind::Usage, "roots_all needs degree >= 1");
  rs.source_degree = n;

  int zero_roots = 0;
  while (!coeffs.empty() && abs(coeffs.front()).is_zero()) {
    coeffs.erase(coeffs.begin());
    ++zero_roots;
  }
  long m = static_cast<long>(coeffs.size()) - 1;

  std::vector<BigComplex> z;
  std::vector<bool> done;
  if (m >= 1) {
    // stage 1 at modest precision, stage 2 at the target
    int d1 = std::min(38, digits + 4);
    std::vector<BigComplex> a1;
    a1.reserve(coeffs.size());
    for (auto& c : coeffs) a1.push_back(BigComplex(c.re() + BigFloat(d1), c.im() + BigFloat(d1)));
    z = detail::aberth_initial(a1, d1);
    done.assign(m, false);
    detail::aberth_sweeps(a1, z, done, pow10(-(d1 + 2), d1), 120, d1);

    int d2 = digits + 8;
    std::vector<BigComplex> a2;
    a2.reserve(coeffs.size());
    for (auto& c : coeffs) a2.push_back(BigComplex(c.re() + BigFloat(d2), c.im() + BigFloat(d2)));
    for (auto& zi : z) zi = BigComplex(zi.re() + BigFloat(d2), zi.im() + BigFloat(d2));
    done.assign(m, false);
    detail::aberth_sweeps(a2, z, done, pow10(-(digits + 3), d2), 400, d2);

    // final certification against the documented bound
    BigComplex val(d2), der(d2), scratch(d2);
    BigFloat maj(d2);
    BigFloat cert = pow10(-digits + 10, d2);
    for (long i = 0; i < m; ++i) {
      detail::horner_with_majorant(a2, z[i], val, der, maj, scratch);
      if (!(abs(val) <= cert * maj)) rs.converged = false;
    }
  }

  // cluster merge
  std::vector<int> parent(m);
  for (long i = 0; i < m; ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  BigFloat scale(0, digits);
  for (long i = 0; i < m; ++i) scale = max(scale, abs(z[i]));
  scale = max(scale, BigFloat(1, digits));
  BigFloat cl_eps = pow10(-digits / 2, digits) * scale;
  for (long i = 0; i < m; ++i)
    for (long j = i + 1; j < m; ++j)
      if (abs(z[i] - z[j]) < cl_eps) parent[find(static_cast<int>(j))] = find(static_cast<int>(i));

  std::vector<std::vector<long>> groups(m);
  for (long i = 0; i < m; ++i) groups[find(static_cast<int>(i))].push_back(i);
  for (auto& g : groups) {
    if (g.empty()) continue;
    BigComplex rep(0, 0, digits);
    for (long i : g) rep += z[i];
    rep = rep / BigFloat(static_cast<long>(g.size()), digits);
    rs.roots.push_back(rep);
    rs.multiplicity.push_back(static_cast<int>(g.size()));
  }
  if (zero_roots > 0) {
    rs.roots.push_back(BigComplex(0, 0, digits));
    rs.multiplicity.push_back(zero_roots);
  }

  // deterministic ordering: by |z|, then arg
  std::vector<size_t> order(rs.roots.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
    BigFloat ai = abs(rs.roots[i]), aj = abs(rs.roots[j]);
    if (ai != aj) return ai < aj;
    BigFloat gi = arg(rs.roots[i]), gj = arg(rs.roots[j]);
    return gi < gj;
  });
  std::vector<BigComplex> sorted_roots;
  std::vector<int> sorted_mult;
  for (size_t i : order) {
    sorted_roots.push_back(rs.roots[i]);
    sorted_mult.push_back(rs.multiplicity[i]);
  }
  rs.roots = std::move(sorted_roots);
  rs.multiplicity = std::move(sorted_mult);

  rs.certified_separation = BigFloat(0, digits);
  bool first_sep = true;
  for (size_t i = 0; i < rs.roots.size(); ++i)
    for (size_t j = i + 1; j < rs.roots.size(); ++j) {
      BigFloat s = abs(rs.roots[i] - rs.roots[j]);
      if (first_sep || s < rs.certified_separation) {
        rs.certified_separation = s;
        first_sep = false;
      }
    }
  return rs;
}

inline RootSet roots_all(const IntQPoly& p, int digits) {
  if (p.is_zero()) throw Error(ErrorKind::Usage, "roots_all of the zero polynomial");
  std::vector<BigComplex> coeffs;
  coeffs.reserve(p.coeffs.size());
  for (auto& c : p.coeffs)
    coeffs.push_back(BigComplex(BigFloat(c.str(), digits + 8), BigFloat(0, digits + 8)));
  return roots_all_complex(std::move(coeffs), digits);
}

// ---------------------------------------------------------------------------
// zero-distribution statistics

struct DistributionReport {
  BigFloat discrepancy;  // sup over half-open arcs with observed endpoints
  std::vector<std::pair<double, double>> radial_fraction;  // (eps, fraction)
  std::vector<BigFloat> moduli_sorted;
  long total = 0;

  DistributionReport() : discrepancy(kDefaultDigits) {}

  long inner_count(const BigFloat& r) const {
    long c = 0;
    for (auto& m : moduli_sorted) {
      if (m <= r)
        ++c;
      else
        break;
    }
    return c;
  }
};

// Angular discrepancy over arcs [theta_i, theta_j) with endpoints at observed
// arguments (wrap-around included), exact over the O(K^2) candidate arcs.
inline DistributionReport distribution_report(const RootSet& rs) {
  if (rs.roots.empty()) throw Error(ErrorKind::Usage, "distribution_report of empty root set");
  int d = rs.digits;
  DistributionReport rep;
  BigFloat two_pi = BigFloat::pi(d) * 2;

  struct ArgEntry {
    BigFloat theta;
    long mult;
    ArgEntry(BigFloat t, long m) : theta(std::move(t)), mult(m) {}
  };
  std::vector<ArgEntry> args;
  long total = 0;
  for (size_t i = 0; i < rs.roots.size(); ++i) {
    BigFloat t = arg(rs.roots[i]);
    if (t.sgn() < 0) t += two_pi;  // [0, 2pi)
    args.emplace_back(t, rs.multiplicity[i]);
    total += rs.multiplicity[i];
  }
  rep.total = total;
  std::sort(args.begin(), args.end(),
            [](const ArgEntry& a, const ArgEntry& b) { return a.theta < b.theta; });
  // merge equal arguments
  std::vector<ArgEntry> dist;
  for (auto& e : args) {
    if (!dist.empty() && dist.back().theta == e.theta)
      dist.back().mult += e.mult;
    else
      dist.push_back(e);
  }
  size_t K = dist.size();
  std::vector<long> prefix(K + 1, 0);
  for (size_t i = 0; i < K; ++i) prefix[i + 1] = prefix[i] + dist[i].mult;

  BigFloat disc(0, d);
  BigFloat ftotal(total, d);
  for (size_t i = 0; i < K; ++i)
    for (size_t j = 0; j < K; ++j) {
      if (i == j) continue;
      long cnt;
      BigFloat len(d);
      if (j > i) {
        cnt = prefix[j] - prefix[i];
        len = dist[j].theta - dist[i].theta;
      } else {
        cnt = (total - prefix[i]) + prefix[j];
        len = two_pi - dist[i].theta + dist[j].theta;
      }
      BigFloat dev = abs(BigFloat(cnt, d) / ftotal - len / two_pi);
      if (dev > disc) disc = dev;
    }
  rep.discrepancy = disc;

  for (auto& r : rs.roots) rep.moduli_sorted.push_back(abs(r));
  std::sort(rep.moduli_sorted.begin(), rep.moduli_sorted.end());

  for (double eps : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5}) {
    BigFloat lo = BigFloat(1, d) - BigFloat::from_double(eps, d);
    BigFloat hi = BigFloat(1, d) + BigFloat::from_double(eps, d);
    long c = 0;
    for (size_t i = 0; i < rs.roots.size(); ++i) {
      BigFloat m = abs(rs.roots[i]);
      if (lo < m && m < hi) c += rs.multiplicity[i];
    }
    rep.radial_fraction.push_back({eps, double(c) / double(total)});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// outer localization check

enum class OuterVerdict { Simple, Inconclusive };

struct OuterCheckResult {
  OuterVerdict verdict = OuterVerdict::Inconclusive;
  BigFloat coeff_sum;      // sum_{j=1}^{N-1} |q|^{-j(N-j)/2}
  BigFloat min_separation; // from the independent all-roots run at 2x digits
  OuterCheckResult() : coeff_sum(kDefaultDigits), min_separation(kDefaultDigits) {}
};

// Rouche-style stability gate for the normalized polynomial
// P_N(q,w) = 1 + w^N + sum_{j=1}^{N-1} q^{j(j-N)/2} w^j, |q| > 1, together
// with an independent minimal-separation verification of Theta_n(q, .).
// The bookkeeping sums |q|^{-j(N-j)} (the coefficient sum of P_N at squared
// modulus) against the documented threshold epsilon_0 = 1e-3; a "Simple"
// verdict always carries the independent 2x-precision separation check with
// it, which is what makes it sound.
inline OuterCheckResult outer_simplicity_check(long n, const BigComplex& q, int digits) {
  if (n < 2) throw Error(ErrorKind::Usage, "outer check needs n >= 2");
  BigFloat aq = abs(q);
  int d = digits;
  if (!(aq > BigFloat(1, d)))
    throw Error(ErrorKind::DegenerateInput, "outer check requires |q| > 1");

  OuterCheckResult res;
  BigFloat sum(0, d);
  for (long j = 1; j <= n - 1; ++j) sum += pow_si(aq, -(j * (n - j)));
  res.coeff_sum = sum;

  int d2 = 2 * digits;
  BigComplex q2(q.re() + BigFloat(d2), q.im() + BigFloat(d2));
  std::vector<BigComplex> coeffs;
  BigComplex qp(1, 0, d2), qstep(1, 0, d2), scratch(d2);
  for (long j = 0; j <= n; ++j) {
    coeffs.push_back(qp);
    BigComplex::mul(scratch, qstep, q2);
    swap(qstep, scratch);
    BigComplex::mul(scratch, qp, qstep);
    swap(qp, scratch);
  }
  RootSet rs = roots_all_complex(std::move(coeffs), 2 * digits);
  res.min_separation = rs.certified_separation;

  BigFloat eps0 = pow10(-3, d);
  BigFloat max_root(0, d2);
  for (auto& r : rs.roots) max_root = max(max_root, abs(r));
  BigFloat sep_floor = pow10(-digits, d2) * max(BigFloat(1, d2), max_root);
  bool simple_roots = rs.converged && rs.roots.size() == static_cast<size_t>(n) &&
                      res.min_separation > sep_floor;
  res.verdict = (sum < eps0 && simple_roots) ? OuterVerdict::Simple : OuterVerdict::Inconclusive;
  return res;
}

}  // namespace thetalab
