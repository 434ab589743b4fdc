#pragma once

// Truncation-seeded search for spectral values of the partial theta
// function: parameters q in the unit disk where Theta(q, .) has a multiple
// zero. Seeds come from exact truncation discriminants (branch points of
// Theta_n), are refined by damped Newton iteration on the infinite system
// (Theta, d_z Theta) = 0, filtered by a bounded-double-root test, clustered,
// and finally certified a posteriori by a Newton-Kantorovich test with
// series majorants.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thetalab/parallel.hpp"
#include "thetalab/polyroot.hpp"
#include "thetalab/theta.hpp"

namespace thetalab {

struct SeedPair {
  BigComplex q, z;
  int degree = 0;      // truncation degree n
  int root_index = 0;  // index into the discriminant root list
  std::string tag;     // "disc" or "grid"
  BigFloat residual;   // finite-system residual at the seed

  SeedPair() : residual(kDefaultDigits) {}
};

struct SpectralCandidate {
  BigComplex q, z;
  BigFloat residual;  // max(|Theta|, |d_z Theta|)
  std::vector<std::string> sources;
  int cluster_id = -1;
  bool certified = false;
  BigFloat rho;  // Newton-Kantorovich radius when certified
  std::string failure;

  SpectralCandidate() : residual(kDefaultDigits), rho(kDefaultDigits) {}
};

// Refinement step policy. PlainGuarded takes full Newton steps and lets
// out-of-basin seeds diverge against the guards; DampedMonotone halves the
// step until the residual decreases, which is more tenacious and can carry a
// basin-edge seed into an attractor far from its truncation branch point.
enum class NewtonPolicy { PlainGuarded, DampedMonotone };

struct PipelineConfig {
  std::vector<int> degrees{8, 10, 12, 14};
  int digits = kDefaultDigits;
  double seed_radius = 0.82;   // keep discriminant roots with |q| < seed_radius
  double retain_radius = 0.8;  // final table gate |q| <= retain_radius
  double z_bound = 25.0;       // bounded-double-root filter
  double cluster_eps = 1e-8;
  int residual_exp = -30;  // refinement target 10^{residual_exp}
  int max_iter = 80;
  long disc_degree_cap = 14;
  int workers = 1;
  bool certify_candidates = true;
  NewtonPolicy policy = NewtonPolicy::PlainGuarded;
};

struct PipelineResult {
  std::vector<SpectralCandidate> table;       // final, sorted by (|q|, Im q)
  std::vector<SpectralCandidate> caustic_suspects;
  std::vector<SeedPair> seeds;
  std::vector<std::string> failures;          // per-seed diagnostics, non-fatal
};

// --------------------------------------------------------------------------
// seeds

namespace detail {

// Double-root extraction at a branch point q of Theta_n: among the roots of
// Theta_n(q, .), take the one minimizing |d_z Theta_n| (ties by smaller |z|),
// then polish with one damped Newton step on the finite 2x2 system.
inline std::optional<SeedPair> extract_seed(int n, const BigComplex& q, int digits,
                                            int root_index) {
  int d = digits;
  std::vector<BigComplex> coeffs;
  BigComplex qp(1, 0, d), qstep(1, 0, d), scratch(d);
  for (long j = 0; j <= n; ++j) {
    coeffs.push_back(qp);
    BigComplex::mul(scratch, qstep, q);
    swap(qstep, scratch);
    BigComplex::mul(scratch, qp, qstep);
    swap(qp, scratch);
  }
  RootSet rs = roots_all_complex(std::move(coeffs), d);
  if (rs.roots.empty()) return std::nullopt;

  BigComplex best(d);
  BigFloat best_key(d);
  BigFloat best_az(d);
  bool first = true;
  for (auto& z : rs.roots) {
    ThetaJet jet = theta_trunc_jet(n, q, z);
    BigFloat key = abs(jet.dz);
    BigFloat az = abs(z);
    if (first || key < best_key || (key == best_key && az < best_az)) {
      best = z;
      best_key = key;
      best_az = az;
      first = false;
    }
  }

  SeedPair seed;
  seed.q = q;
  seed.z = best;
  seed.degree = n;
  seed.root_index = root_index;
  seed.tag = "disc";

  // one damped Newton step on (Theta_n, d_z Theta_n)
  ThetaJet jet = theta_trunc_jet(n, seed.q, seed.z);
  BigComplex det = jet.dq * jet.dzz - jet.dz * jet.dqz;
  if (!det.is_zero()) {
    BigComplex dq = (jet.value * jet.dzz - jet.dz * jet.dz) / det;
    BigComplex dz = (jet.dq * jet.dz - jet.value * jet.dqz) / det;
    BigFloat r0 = max(abs(jet.value), abs(jet.dz));
    for (int half = 0; half < 8; ++half) {
      ThetaJet trial = theta_trunc_jet(n, seed.q - dq, seed.z - dz);
      if (max(abs(trial.value), abs(trial.dz)) < r0) {
        seed.q = seed.q - dq;
        seed.z = seed.z - dz;
        break;
      }
      dq = dq * BigFloat("0.5", d);
      dz = dz * BigFloat("0.5", d);
    }
  }
  ThetaJet fin = theta_trunc_jet(n, seed.q, seed.z);
  seed.residual = max(abs(fin.value), abs(fin.dz));
  return seed;
}

}  // namespace detail

// Branch-point seeds for degree n: exact reduced discriminant roots inside
// |q| < radius, each paired with its double root. Even degrees go through
// the palindromic split disc_y R_m = unit * C * B^2 (same exact root set,
// with the squared factor de-duplicated), odd degrees through the direct
// discriminant.
inline std::vector<SeedPair> branch_point_seeds(int n, double radius, int digits,
                                                long disc_degree_cap = 14) {
  if (n < 2) throw Error(ErrorKind::Usage, "branch_point_seeds needs n >= 2");
  int d = digits;
  BigFloat rad = BigFloat::from_double(radius, d);
  std::vector<BigComplex> branch_points;

  if (n % 2 == 0) {
    EvenFactorizationReport rep = even_factorization_check(n / 2, disc_degree_cap);
    if (!rep.holds) throw Error(ErrorKind::Internal, "even factorization failed");
    for (const std::vector<BigInt>* fac : {&rep.C, &rep.B}) {
      if (fac->size() < 2) continue;
      IntQPoly pt;
      size_t lo = 0;
      while (lo < fac->size() && (*fac)[lo] == 0) ++lo;
      pt.coeffs.assign(fac->begin() + lo, fac->end());
      pt.var = 't';
      RootSet rs = roots_all(pt, d);
      if (!rs.converged)
        throw Error(ErrorKind::NonConvergence, "discriminant factor roots did not certify");
      for (auto& t : rs.roots) {
        BigComplex q = t * t;
        if (abs(q) < rad && !q.is_zero()) branch_points.push_back(q);
      }
    }
  } else {
    IntQPoly disc = discriminant_exact(truncation_poly(n), disc_degree_cap);
    RootSet rs = roots_all(disc, d);
    if (!rs.converged)
      throw Error(ErrorKind::NonConvergence, "discriminant roots did not certify");
    for (auto& q : rs.roots)
      if (abs(q) < rad && !q.is_zero()) branch_points.push_back(q);
  }

  // de-duplicate (the +-t pair of the even route lands on the same q)
  std::sort(branch_points.begin(), branch_points.end(),
            [](const BigComplex& a, const BigComplex& b) {
              BigFloat ma = abs(a), mb = abs(b);
              if (ma != mb) return ma < mb;
              if (a.im() != b.im()) return a.im() < b.im();
              return a.re() < b.re();
            });
  std::vector<BigComplex> uniq;
  BigFloat dedup = pow10(-20, d);
  for (auto& q : branch_points) {
    if (!uniq.empty() && abs(q - uniq.back()) < dedup) continue;
    uniq.push_back(q);
  }

  std::vector<SeedPair> seeds;
  BigFloat seed_tol = pow10(-6, d);
  for (size_t i = 0; i < uniq.size(); ++i) {
    auto seed = detail::extract_seed(n, uniq[i], d, static_cast<int>(i));
    if (seed && seed->residual < seed_tol) seeds.push_back(*seed);
  }
  return seeds;
}

// Alternative seed source for degrees beyond the exact-discriminant cap:
// multi-start damped Newton on the finite system from a deterministic polar
// grid of q values (double root guessed from the minimal-|d_z| root).
inline std::vector<SeedPair> grid_seeds(int n, double radius, int digits, int radial = 12,
                                        int angular = 24) {
  int d = digits;
  std::vector<SeedPair> seeds;
  BigFloat seed_tol = pow10(-8, d);
  int idx = 0;
  for (int ir = 1; ir <= radial; ++ir) {
    double r = 0.1 + (radius - 0.1) * ir / double(radial);
    for (int ia = 0; ia < angular; ++ia) {
      double th = 6.283185307179586 * (ia + 0.5) / angular;
      BigComplex q(BigFloat::from_double(r * std::cos(th), d),
                   BigFloat::from_double(r * std::sin(th), d));
      auto seed = detail::extract_seed(n, q, d, idx++);
      if (!seed) continue;
      // polish on the finite system until it either locks or wanders
      bool ok = false;
      BigComplex cq = seed->q, cz = seed->z;
      BigFloat z_cap = BigFloat::from_double(1e12, d);
      for (int it = 0; it < 40; ++it) {
        ThetaJet jet = theta_trunc_jet(n, cq, cz);
        BigFloat res = max(abs(jet.value), abs(jet.dz));
        if (res < seed_tol) {
          ok = true;
          break;
        }
        BigComplex det = jet.dq * jet.dzz - jet.dz * jet.dqz;
        if (det.is_zero()) break;
        cq = cq - (jet.value * jet.dzz - jet.dz * jet.dz) / det;
        cz = cz - (jet.dq * jet.dz - jet.value * jet.dqz) / det;
        if (!cq.is_finite() || !cz.is_finite()) break;
        if (!(abs(cq) < BigFloat::from_double(0.95, d)) || !(abs(cz) < z_cap)) break;
      }
      if (ok && abs(cq) < BigFloat::from_double(radius, d)) {
        seed->q = cq;
        seed->z = cz;
        seed->tag = "grid";
        ThetaJet fin = theta_trunc_jet(n, cq, cz);
        seed->residual = max(abs(fin.value), abs(fin.dz));
        seeds.push_back(*seed);
      }
    }
  }
  return seeds;
}

// --------------------------------------------------------------------------
// refinement

// Newton iteration on F(q, z) = (Theta, d_z Theta) with the analytic
// Jacobian [[dq, dz], [dqz, dzz]]. Success iff the residual reaches tol
// inside |q| <= 0.95 with |z| bounded.
inline SpectralCandidate newton_refine(const SeedPair& seed, const BigFloat& tol, int max_iter,
                                       int digits,
                                       NewtonPolicy policy = NewtonPolicy::PlainGuarded) {
  int d = digits;
  BigComplex q(seed.q.re() + BigFloat(d), seed.q.im() + BigFloat(d));
  BigComplex z(seed.z.re() + BigFloat(d), seed.z.im() + BigFloat(d));
  BigFloat eval_tol = pow10(-d - 8, d);
  BigFloat guard = BigFloat::from_double(0.95, d);
  BigFloat det_floor = pow10(-d / 2, d);
  BigFloat z_cap = BigFloat::from_double(1e9, d);

  for (int iter = 0; iter <= max_iter; ++iter) {
    if (!(abs(q) < guard))
      throw Error(ErrorKind::Diverged, "iterate left |q| <= 0.95 at iteration " +
                                           std::to_string(iter));
    if (!q.is_finite() || !z.is_finite() || !(abs(z) < z_cap))
      throw Error(ErrorKind::Diverged, "double-root iterate out of range");
    ThetaJet jet = theta_jet(q, z, eval_tol);
    BigFloat res = max(abs(jet.value), abs(jet.dz));
    if (res <= tol) {
      SpectralCandidate cand;
      cand.q = q;
      cand.z = z;
      cand.residual = res;
      cand.sources.push_back(seed.tag + ":n=" + std::to_string(seed.degree) +
                             ":i=" + std::to_string(seed.root_index));
      return cand;
    }
    BigComplex det = jet.dq * jet.dzz - jet.dz * jet.dqz;
    BigFloat scale = max(abs(jet.dq) * abs(jet.dzz), abs(jet.dz) * abs(jet.dqz));
    if (abs(det) <= scale * det_floor)
      throw Error(ErrorKind::SingularJacobian, "Jacobian determinant below threshold");
    BigComplex dq = (jet.value * jet.dzz - jet.dz * jet.dz) / det;
    BigComplex dz = (jet.dq * jet.dz - jet.value * jet.dqz) / det;

    if (policy == NewtonPolicy::PlainGuarded) {
      q -= dq;
      z -= dz;
      continue;
    }
    // DampedMonotone: halve the step while the residual does not decrease
    bool moved = false;
    for (int half = 0; half < 25; ++half) {
      BigComplex nq = q - dq, nz = z - dz;
      if (abs(nq) < guard) {
        ThetaJet trial = theta_jet(nq, nz, eval_tol);
        BigFloat tres = max(abs(trial.value), abs(trial.dz));
        if (tres < res) {
          q = nq;
          z = nz;
          moved = true;
          break;
        }
      }
      dq = dq * BigFloat("0.5", d);
      dz = dz * BigFloat("0.5", d);
    }
    if (!moved)
      throw Error(ErrorKind::Diverged, "no residual decrease along the Newton direction");
  }
  throw Error(ErrorKind::Diverged, "max_iter exhausted");
}

// --------------------------------------------------------------------------
// filtering, clustering

inline std::vector<SpectralCandidate> bounded_root_filter(
    const std::vector<SpectralCandidate>& cands, double R,
    std::vector<SpectralCandidate>* caustic_suspects = nullptr) {
  std::vector<SpectralCandidate> kept;
  for (auto& c : cands) {
    if (abs(c.z) > BigFloat::from_double(R, c.z.digits())) {
      if (caustic_suspects) {
        SpectralCandidate dropped = c;
        dropped.failure = "caustic-suspect: |z| > " + std::to_string(R);
        caustic_suspects->push_back(dropped);
      }
    } else {
      kept.push_back(c);
    }
  }
  return kept;
}

// Union-find clustering on max(|dq|, |dz|) < eps; one representative per
// class (smallest residual), sources merged, deterministic (|q|, Im q, Re q)
// output order.
inline std::vector<SpectralCandidate> cluster(const std::vector<SpectralCandidate>& cands,
                                              double eps) {
  size_t n = cands.size();
  std::vector<int> parent(n);
  for (size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  if (n == 0) return {};
  int d = cands[0].q.digits();
  BigFloat e = BigFloat::from_double(eps, d);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      BigFloat dq = abs(cands[i].q - cands[j].q);
      BigFloat dz = abs(cands[i].z - cands[j].z);
      if (max(dq, dz) < e) parent[find(static_cast<int>(j))] = find(static_cast<int>(i));
    }
  std::map<int, SpectralCandidate> reps;
  for (size_t i = 0; i < n; ++i) {
    int r = find(static_cast<int>(i));
    auto it = reps.find(r);
    if (it == reps.end()) {
      reps[r] = cands[i];
    } else {
      for (auto& s : cands[i].sources) it->second.sources.push_back(s);
      if (cands[i].residual < it->second.residual) {
        auto sources = it->second.sources;
        it->second = cands[i];
        it->second.sources = sources;
      }
    }
  }
  std::vector<SpectralCandidate> out;
  for (auto& [k, v] : reps) out.push_back(v);
  std::sort(out.begin(), out.end(), [&](const SpectralCandidate& a, const SpectralCandidate& b) {
    // conjugate pairs carry |q| values equal only to working precision;
    // rank them equal and order by Im (negative first, matching the table)
    BigFloat ma = abs(a.q), mb = abs(b.q);
    BigFloat rank_eps = BigFloat::from_double(1e-12, ma.digits()) * (BigFloat(1, ma.digits()) + ma);
    if (abs(ma - mb) > rank_eps) return ma < mb;
    if (abs(a.q.im() - b.q.im()) > rank_eps) return a.q.im() < b.q.im();
    return a.q.re() < b.q.re();
  });
  for (size_t i = 0; i < out.size(); ++i) {
    out[i].cluster_id = static_cast<int>(i);
    std::sort(out[i].sources.begin(), out[i].sources.end());
    out[i].sources.erase(std::unique(out[i].sources.begin(), out[i].sources.end()),
                         out[i].sources.end());
  }
  return out;
}

// --------------------------------------------------------------------------
// a posteriori certification (Newton-Kantorovich with series majorants)

namespace detail {

// Majorant sum_j [T_j]_a [j]_b rq^{T_j - a} rz^{j - b} with geometric tail,
// bounding |d_q^a d_z^b Theta| on the closed polydisc (rq, rz). Falling
// factorials vanish for T_j < a or j < b; the step ratio of any of the
// weights here (a <= 2, b <= 3) is covered by ((j+2)/(j-2))^3 for j >= 3.
inline BigFloat theta_majorant(const BigFloat& rq, const BigFloat& rz, int a, int b,
                               long cap = kSeriesTermCap) {
  int d = std::max(rq.digits(), rz.digits());
  BigFloat one(1, d), half = BigFloat(1, d) / 2;
  if (!(rq < one)) throw Error(ErrorKind::NonConvergent, "majorant needs rq < 1");
  BigFloat sum(0, d), term(0, d);
  for (long j = 0; j <= cap; ++j) {
    long tj = j * (j + 1) / 2;
    BigInt w = 1;
    for (int i = 0; i < a; ++i) w *= BigInt(std::max<long>(tj - i, 0));
    for (int i = 0; i < b; ++i) w *= BigInt(std::max<long>(j - i, 0));
    if (w > 0) {
      term = BigFloat(w.str(), d) * pow_si(rq, tj - a) * pow_si(rz, j - b);
      sum += term;
      if (j >= 3) {
        double wr = std::pow(double(j + 2) / double(j - 2 > 0 ? j - 2 : 1), 3) * (1 + 1e-12);
        BigFloat rho = pow_si(rq, j + 1) * rz * BigFloat::from_double(wr, d);
        if (rho <= half) {
          BigFloat tail = term * rho / (one - rho) * 2;
          if (tail <= sum * pow10(-10, d)) return sum + tail;
        }
      }
    }
  }
  throw Error(ErrorKind::ToleranceUnreachable, "majorant did not converge");
}

}  // namespace detail

// Kantorovich data: with eta >= ||J^{-1}F||, beta >= ||J^{-1}||, L a
// Lipschitz bound for J on the max-norm ball of radius R, h = eta beta L <=
// 1/2 certifies a unique zero within rho = (1 - sqrt(1-2h))/(beta L).
inline SpectralCandidate certify(const SpectralCandidate& cand, int digits = 0) {
  SpectralCandidate out = cand;
  int d = digits > 0 ? digits : cand.q.digits();
  out.certified = false;

  BigFloat pre = pow10(-20, d);
  if (!(cand.residual < pre)) {
    out.failure = "certification precondition: residual >= 1e-20";
    return out;
  }

  BigComplex q(cand.q.re() + BigFloat(d), cand.q.im() + BigFloat(d));
  BigComplex z(cand.z.re() + BigFloat(d), cand.z.im() + BigFloat(d));
  BigFloat eval_tol = pow10(-d - 5, d);
  ThetaJet jet = theta_jet(q, z, eval_tol);

  // radius of the certification ball
  BigFloat aq = abs(q);
  BigFloat R = min(BigFloat("0.001", d), (BigFloat("0.999", d) - aq) / 2);
  if (R.sgn() <= 0) {
    out.failure = "no room inside |q| < 1 for a certification ball";
    return out;
  }
  BigFloat rq = aq + R;
  BigFloat rz = abs(z) + R;

  BigFloat tail = jet.tail_bound;
  BigFloat f1 = abs(jet.value) + tail, f2 = abs(jet.dz) + tail;
  BigFloat a11 = abs(jet.dq), a12 = abs(jet.dz), a21 = abs(jet.dqz), a22 = abs(jet.dzz);
  BigComplex det = jet.dq * jet.dzz - jet.dz * jet.dqz;
  BigFloat adet = abs(det);
  // perturb the determinant for the series tails
  BigFloat det_err = tail * (a11 + a12 + a21 + a22 + tail * 2) * 2;
  if (!(adet > det_err * 4)) {
    out.failure = "Jacobian determinant not resolved by the series tails";
    return out;
  }
  BigFloat adet_lo = adet - det_err;

  // ||J^{-1}||_inf = max row sum of [[dzz, -dz], [-dqz, dq]] / det
  BigFloat beta = max(a22 + a12 + tail * 2, a21 + a11 + tail * 2) / adet_lo;
  BigFloat eta = beta * max(f1, f2) * 2;

  try {
    BigFloat mqq = detail::theta_majorant(rq, rz, 2, 0);
    BigFloat mqz = detail::theta_majorant(rq, rz, 1, 1);
    BigFloat mzz = detail::theta_majorant(rq, rz, 0, 2);
    BigFloat mqqz = detail::theta_majorant(rq, rz, 2, 1);
    BigFloat mqzz = detail::theta_majorant(rq, rz, 1, 2);
    BigFloat mzzz = detail::theta_majorant(rq, rz, 0, 3);
    BigFloat L1 = mqq + mqz + mqz + mzz;
    BigFloat L2 = mqqz + mqzz + mqzz + mzzz;
    BigFloat L = max(L1, L2);

    BigFloat h = eta * beta * L;
    if (!(h <= BigFloat("0.5", d))) {
      out.failure = "Kantorovich condition h <= 1/2 failed";
      return out;
    }
    BigFloat rho = (BigFloat(1, d) - sqrt(BigFloat(1, d) - h * 2)) / (beta * L);
    if (!(rho <= R)) {
      out.failure = "certified radius exceeds the majorant ball";
      return out;
    }
    out.certified = true;
    out.rho = rho;
    out.failure.clear();
  } catch (const Error& e) {
    out.failure = std::string("majorant failure: ") + e.what();
  }
  return out;
}

// --------------------------------------------------------------------------
// pipeline

inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  PipelineResult result;
  int d = cfg.digits;

  for (int n : cfg.degrees) {
    std::vector<SeedPair> seeds;
    if (n <= cfg.disc_degree_cap) {
      seeds = branch_point_seeds(n, cfg.seed_radius, d, cfg.disc_degree_cap);
    } else {
      seeds = grid_seeds(n, cfg.seed_radius, d);
    }
    for (auto& s : seeds) result.seeds.push_back(s);
  }

  BigFloat tol = pow10(cfg.residual_exp, d);
  std::vector<std::optional<SpectralCandidate>> refined(result.seeds.size());
  std::vector<std::string> errors(result.seeds.size());
  run_indexed(cfg.workers, result.seeds.size(), [&](size_t i) {
    try {
      refined[i] = newton_refine(result.seeds[i], tol, cfg.max_iter, d, cfg.policy);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  std::vector<SpectralCandidate> converged;
  for (size_t i = 0; i < refined.size(); ++i) {
    if (refined[i])
      converged.push_back(*refined[i]);
    else
      result.failures.push_back("seed " + std::to_string(i) + " (n=" +
                                std::to_string(result.seeds[i].degree) + "): " + errors[i]);
  }

  std::vector<SpectralCandidate> bounded =
      bounded_root_filter(converged, cfg.z_bound, &result.caustic_suspects);
  std::vector<SpectralCandidate> clustered = cluster(bounded, cfg.cluster_eps);

  std::vector<SpectralCandidate> retained;
  BigFloat rr = BigFloat::from_double(cfg.retain_radius, d);
  for (auto& c : clustered)
    if (abs(c.q) <= rr) retained.push_back(c);

  if (cfg.certify_candidates) {
    std::vector<SpectralCandidate> certified(retained.size());
    run_indexed(cfg.workers, retained.size(), [&](size_t i) { certified[i] = certify(retained[i], d); });
    retained = std::move(certified);
  }
  for (size_t i = 0; i < retained.size(); ++i) retained[i].cluster_id = static_cast<int>(i);
  result.table = std::move(retained);
  return result;
}

}  // namespace thetalab
