#pragma once

// Radial monodromy with the small-circle convention: zeros of Theta(q, .)
// are labelled at the base point 0.1 e^{i arg q*} (the intrinsic point -0.1
// on the negative ray) by increasing modulus and continued along the radial
// segment to a spectral point q*; the collision there exchanges two labels.
//
// Roots are tracked in per-label moving-window coordinates z = -q^{-w} e^u
// (direct z values span |z| ~ 10^k at the base point and the series for
// Theta cancels catastrophically there; the window function H_w stays O(1)
// and well conditioned). The window index w re-anchors along the path so
// that |Re u| stays below ~0.6 ln(1/|q|).

#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "thetalab/theta.hpp"

namespace thetalab {

struct WindowCoord {
  long w = 1;
  BigComplex u;
  explicit WindowCoord(int digits = kDefaultDigits) : u(digits) {}
};

inline BigComplex window_z(const WindowCoord& c, const BigComplex& q) {
  return -(pow_si(q, -c.w) * exp(c.u));
}

struct RootLabeling {
  BigComplex base;
  BigFloat theta;
  bool negative_ray = false;
  int K = 0;
  int digits = kDefaultDigits;
  std::vector<WindowCoord> coords;  // label k at index k-1, window w = k
  std::vector<BigComplex> z;

  RootLabeling() : base(kDefaultDigits), theta(kDefaultDigits) {}
};

struct PathSample {
  BigFloat r;
  std::vector<BigComplex> z;
  PathSample() : r(kDefaultDigits) {}
};

struct ContinuationControls {
  double d_stop_frac = 1e-4;     // stop distance before q*, relative to |q*|
  double gap_frac = 0.10;        // corrector budget: fraction of local pair gap
  double max_step_frac = 0.02;   // radial step cap, relative to current r
  double grow = 1.25;            // step growth after an accepted step
  double collision_gap = 1e-3;   // relative pair gap that flags a collision
  double step_floor_frac = 1e-13;
  int digits = 40;
  int corrector_iters = 8;
  long max_steps = 100000;
  std::vector<PathSample>* recorder = nullptr;  // accepted-step samples
};

enum class ContinuationMethod { Forward, Backward, Both };

struct MonodromyRecord {
  BigComplex q_star, z_star;
  int i = 0, j = 0;  // colliding labels, i < j
  long path_steps = 0;
  BigFloat min_pair_gap;
  ContinuationMethod method = ContinuationMethod::Both;
  int digits_used = 0;

  MonodromyRecord() : q_star(kDefaultDigits), z_star(kDefaultDigits), min_pair_gap(kDefaultDigits) {}
};

namespace detail {

// Newton in u on H_w(q, u) = 0. Returns nullopt when it fails to settle.
inline std::optional<BigComplex> window_newton(const BigComplex& q, long w, BigComplex u,
                                               int digits, int iters = 12) {
  BigFloat jet_tol = pow10(-(digits - 4), digits);
  BigFloat step_tol = pow10(-(digits - 10), digits);
  for (int it = 0; it < iters; ++it) {
    WindowJet jet = window_jet(q, u, w, jet_tol);
    if (jet.hu.is_zero()) return std::nullopt;
    BigComplex step = jet.h / jet.hu;
    u -= step;
    if (abs(step) <= step_tol * (BigFloat(1, digits) + abs(u))) return u;
  }
  return std::nullopt;
}

struct TrackResult {
  std::vector<WindowCoord> states;
  long steps = 0;
  BigFloat min_pair_gap;
  TrackResult() : min_pair_gap(kDefaultDigits) {}
};

// Relative pair gap of the tracked roots at a common q.
inline BigFloat relative_min_gap(const std::vector<WindowCoord>& states, const BigComplex& q,
                                 int digits) {
  std::vector<BigComplex> zs;
  for (auto& s : states) zs.push_back(window_z(s, q));
  BigFloat best(digits);
  bool first = true;
  for (size_t i = 0; i < zs.size(); ++i)
    for (size_t j = i + 1; j < zs.size(); ++j) {
      BigFloat g = abs(zs[i] - zs[j]) / min(abs(zs[i]), abs(zs[j]));
      if (first || g < best) {
        best = g;
        first = false;
      }
    }
  if (first) best = BigFloat(1000, digits);
  return best;
}

// Predictor-corrector continuation of the tracked roots along the radial
// segment r_from -> r_to at fixed angle theta. collision_guard throws
// PathCollision when roots pinch before the endpoint neighborhood.
inline TrackResult track_radial(const BigFloat& theta, const BigFloat& r_from,
                                const BigFloat& r_to, std::vector<WindowCoord> states,
                                const ContinuationControls& ctl, bool collision_guard,
                                const BigFloat& endpoint_slack) {
  int d = ctl.digits;
  BigComplex ray = unit_phase(theta);
  BigFloat jet_tol = pow10(-(d - 4), d);
  BigFloat one(1, d);

  TrackResult out;
  out.min_pair_gap = relative_min_gap(states, ray * r_from, d);

  bool forward = r_to > r_from;
  BigFloat r = r_from;
  BigFloat span = abs(r_to - r_from);
  BigFloat dr = span * BigFloat::from_double(0.01, d);
  BigFloat dr_cap_frac = BigFloat::from_double(ctl.max_step_frac, d);
  BigFloat dr_floor = span * BigFloat::from_double(ctl.step_floor_frac, d);
  BigFloat gap_frac = BigFloat::from_double(ctl.gap_frac, d);
  BigFloat grow = BigFloat::from_double(ctl.grow, d);

  long steps = 0;
  while (abs(r_to - r) > span * pow10(-d + 6, d)) {
    if (++steps > ctl.max_steps)
      throw Error(ErrorKind::StepUnderflow, "continuation exceeded the step budget");
    BigFloat remaining = abs(r_to - r);
    if (dr > remaining) dr = remaining;
    if (dr > dr_cap_frac * r) dr = dr_cap_frac * r;

    for (;;) {
      BigFloat r_next = forward ? r + dr : r - dr;
      BigComplex q_cur = ray * r;
      BigComplex q_next = ray * r_next;
      BigComplex dq = q_next - q_cur;

      std::vector<WindowCoord> trial = states;
      BigFloat gap = relative_min_gap(states, q_cur, d);
      bool ok = true;
      for (auto& s : trial) {
        WindowJetExt jet = window_jet_ext(q_cur, s.u, s.w, jet_tol);
        if (jet.hu.is_zero()) {
          ok = false;
          break;
        }
        BigComplex du = -(jet.hq * dq) / jet.hu;  // implicit-function predictor
        BigComplex u_pred = s.u + du;
        auto u_corr = window_newton(q_next, s.w, u_pred, d, ctl.corrector_iters);
        if (!u_corr) {
          ok = false;
          break;
        }
        BigFloat corr = abs(*u_corr - u_pred);
        if (corr > gap_frac * gap) {
          ok = false;
          break;
        }
        s.u = *u_corr;
      }
      if (ok) {
        states = std::move(trial);
        r = r_next;
        // window re-anchoring keeps |Re u| < 0.6 ln(1/r)
        BigFloat L = log(one / r);
        BigComplex logq = BigComplex(log(r), theta);
        for (auto& s : states) {
          while (s.u.re() > L * BigFloat::from_double(0.6, d) && s.w < 64) {
            s.w += 1;
            s.u += logq;
          }
          while (s.u.re() < L * BigFloat::from_double(-0.6, d) && s.w > 1) {
            s.w -= 1;
            s.u -= logq;
          }
        }
        BigFloat g = relative_min_gap(states, ray * r, d);
        if (g < out.min_pair_gap) out.min_pair_gap = g;
        if (ctl.recorder) {
          PathSample sample;
          sample.r = r;
          BigComplex q_now = ray * r;
          for (auto& s : states) sample.z.push_back(window_z(s, q_now));
          ctl.recorder->push_back(std::move(sample));
        }
        if (collision_guard && g < BigFloat::from_double(ctl.collision_gap, d) &&
            abs(r_to - r) > endpoint_slack)
          throw Error(ErrorKind::PathCollision,
                      "tracked roots pinched before the endpoint neighborhood");
        dr = dr * grow;
        break;
      }
      dr = dr / 2;
      if (dr < dr_floor)
        throw Error(ErrorKind::StepUnderflow, "continuation step underflow at r = " + r.str(8));
    }
  }
  out.states = std::move(states);
  out.steps = steps;
  return out;
}

}  // namespace detail

// Labels 1..K: the K smallest-modulus zeros of Theta(base, .), each solved
// by Newton in its own window coordinate (z_k = -base^{-k} e^{u_k}, u_k
// small at |base| = 0.1).
inline RootLabeling base_labels(const BigFloat& theta_in, int K, bool negative_ray, int digits) {
  if (K < 1 || K > 12) throw Error(ErrorKind::Usage, "base_labels supports 1 <= K <= 12");
  int d = digits;
  RootLabeling lab;
  lab.theta = negative_ray ? BigFloat::pi(d) : (theta_in + BigFloat(0, d));
  lab.negative_ray = negative_ray;
  lab.K = K;
  lab.digits = d;
  lab.base = unit_phase(lab.theta) * (BigFloat(1, d) / 10);

  for (int k = 1; k <= K; ++k) {
    auto u = detail::window_newton(lab.base, k, BigComplex(0, 0, d), d);
    if (!u) throw Error(ErrorKind::NonConvergence, "window Newton failed at label " +
                                                        std::to_string(k));
    WindowCoord c(d);
    c.w = k;
    c.u = *u;
    lab.coords.push_back(c);
    lab.z.push_back(window_z(c, lab.base));
  }

  // strict modulus ordering and small-q asymptotics z_k ~ -base^{-k}
  for (int k = 0; k < K; ++k) {
    BigComplex asym = lab.z[k] * pow_si(lab.base, k + 1);
    if (!(abs(asym + BigComplex(1, 0, d)) < BigFloat::from_double(0.4, d)))
      throw Error(ErrorKind::Internal, "label asymptotics violated at k=" + std::to_string(k + 1));
    if (k > 0) {
      BigFloat lo = abs(lab.z[k - 1]), hi = abs(lab.z[k]);
      if (!(lo < hi)) throw Error(ErrorKind::LabelAmbiguity, "labels out of order");
      if (abs(hi - lo) < BigFloat::from_double(1e-6, d) * hi)
        throw Error(ErrorKind::LabelAmbiguity, "adjacent label moduli within 1e-6");
    }
  }
  return lab;
}

struct TrackedEndpoints {
  std::vector<WindowCoord> coords;
  std::vector<BigComplex> z;
  long steps = 0;
  BigFloat min_pair_gap;
  TrackedEndpoints() : min_pair_gap(kDefaultDigits) {}
};

// Continue all K labelled roots radially from the base circle to
// |q| = |q_star| - d_stop on the labeling's ray.
inline TrackedEndpoints continue_radial(const RootLabeling& lab, const BigComplex& q_star,
                                        const ContinuationControls& ctl) {
  int d = lab.digits;
  BigFloat aq = abs(q_star);
  if (!(aq < BigFloat(1, d)) || !(aq > BigFloat(1, d) / 10))
    throw Error(ErrorKind::Usage, "q_star must satisfy 0.1 < |q_star| < 1");
  BigFloat dtheta = arg(q_star) - lab.theta;
  BigFloat two_pi = BigFloat::pi(d) * 2;
  while (dtheta > BigFloat::pi(d)) dtheta -= two_pi;
  while (dtheta < -BigFloat::pi(d)) dtheta += two_pi;
  if (!(abs(dtheta) < pow10(-15, d)))
    throw Error(ErrorKind::Usage, "q_star is not on the labeling's ray");

  BigFloat d_stop = aq * BigFloat::from_double(ctl.d_stop_frac, d);
  BigFloat r_to = aq - d_stop;
  detail::TrackResult res = detail::track_radial(lab.theta, BigFloat(1, d) / 10, r_to, lab.coords,
                                                 ctl, true, d_stop * 12);
  TrackedEndpoints out;
  out.coords = res.states;
  BigComplex q_end = unit_phase(lab.theta) * r_to;
  for (auto& c : out.coords) out.z.push_back(window_z(c, q_end));
  out.steps = res.steps;
  out.min_pair_gap = res.min_pair_gap;
  return out;
}

// Full collision record for a refined spectral point: square-root seeding of
// the two local branches near (q*, z*), backward continuation to the base
// point, label matching, and forward cross-validation. Precision doubles on
// MatchFailure (up to two escalations).
inline MonodromyRecord collision_label(const BigComplex& q_star_in, const BigComplex& z_star_in,
                                       int K, ContinuationControls ctl = {}) {
  Error last(ErrorKind::Internal, "unreachable");
  for (int attempt = 0; attempt < 3; ++attempt, ctl.digits *= 2) {
    int d = ctl.digits;
    try {
      BigComplex q_star(q_star_in.re() + BigFloat(d), q_star_in.im() + BigFloat(d));
      BigComplex z_star(z_star_in.re() + BigFloat(d), z_star_in.im() + BigFloat(d));

      ThetaJet jet = theta_jet(q_star, z_star, pow10(-(d - 4), d));
      BigFloat floor = pow10(-10, d);
      if (!(abs(jet.dq) > floor) || !(abs(jet.dzz) > floor))
        throw Error(ErrorKind::DegenerateSingularity,
                    "Theta_q or Theta_zz vanishes at the spectral point");
      if (!(max(abs(jet.value), abs(jet.dz)) < pow10(-18, d)))
        throw Error(ErrorKind::Usage, "collision_label needs a refined spectral candidate");

      bool negative_ray = abs(q_star.im()) < pow10(-25, d) && q_star.re().sgn() < 0;
      BigFloat theta = negative_ray ? BigFloat::pi(d) : arg(q_star);
      RootLabeling lab = base_labels(theta, K, negative_ray, d);

      // local square-root model: z ~ z* +- sqrt(A dq), A = -2 Theta_q / Theta_zz
      BigComplex A = -(jet.dq * 2) / jet.dzz;
      BigFloat aq = abs(q_star);
      BigFloat delta_target = BigFloat::from_double(1e-3, d) * max(BigFloat(1, d), abs(z_star));
      BigFloat h = delta_target * delta_target / (abs(A) * 4);
      h = min(h, aq * BigFloat::from_double(1e-3, d));
      h = max(h, aq * pow10(-12, d));

      BigFloat r_h = aq - h;
      BigComplex q_h = unit_phase(theta) * r_h;
      BigComplex dq = q_h - q_star;
      BigComplex sq = sqrt(A * dq);
      BigFloat delta = abs(sq) * 2;

      long w_star = std::lround((log(abs(z_star)) / log(BigFloat(1, d) / aq)).to_double());
      if (w_star < 1) w_star = 1;
      if (w_star > K + 2) w_star = K + 2;
      BigComplex logq_h = BigComplex(log(r_h), theta);
      BigFloat two_pi = BigFloat::pi(d) * 2;

      std::vector<WindowCoord> branches;
      for (int sgn : {+1, -1}) {
        BigComplex zb = sgn > 0 ? z_star + sq : z_star - sq;
        WindowCoord c(d);
        c.w = w_star;
        c.u = log(-zb) + logq_h * BigFloat(w_star, d);
        long wraps = std::lround((c.u.im() / two_pi).to_double());
        c.u -= BigComplex(BigFloat(0, d), two_pi * wraps);
        auto polished = detail::window_newton(q_h, c.w, c.u, d);
        if (!polished)
          throw Error(ErrorKind::MatchFailure, "branch polish failed near the spectral point");
        c.u = *polished;
        branches.push_back(c);
      }
      BigComplex zp = window_z(branches[0], q_h);
      BigComplex zm = window_z(branches[1], q_h);
      BigFloat sep = abs(zp - zm);
      if (!(sep > delta / 4) || !(sep < delta * 4))
        throw Error(ErrorKind::MatchFailure, "square-root branches failed to separate");

      // backward to the base circle
      detail::TrackResult back = detail::track_radial(theta, r_h, BigFloat(1, d) / 10, branches,
                                                      ctl, false, BigFloat(0, d));
      BigComplex q_base = lab.base;
      int match[2] = {-1, -1};
      for (int bidx = 0; bidx < 2; ++bidx) {
        BigComplex z_end = window_z(back.states[bidx], q_base);
        BigFloat best(d), second(d);
        int best_k = -1;
        bool have_best = false, have_second = false;
        for (int k = 0; k < K; ++k) {
          BigFloat dist = abs(z_end - lab.z[k]) / abs(lab.z[k]);
          if (!have_best || dist < best) {
            if (have_best) {
              second = best;
              have_second = true;
            }
            best = dist;
            best_k = k;
            have_best = true;
          } else if (!have_second || dist < second) {
            second = dist;
            have_second = true;
          }
        }
        bool unique = have_second ? (best < second / 2) : true;
        if (!unique || !(best < BigFloat::from_double(0.45, d)))
          throw Error(ErrorKind::MatchFailure, "backward endpoint does not match a unique label");
        match[bidx] = best_k + 1;
      }
      if (match[0] == match[1])
        throw Error(ErrorKind::MatchFailure, "both branches matched the same label");

      // forward cross-validation of the two matched labels
      std::vector<WindowCoord> fwd_states{lab.coords[match[0] - 1], lab.coords[match[1] - 1]};
      detail::TrackResult fwd = detail::track_radial(theta, BigFloat(1, d) / 10, r_h, fwd_states,
                                                     ctl, false, BigFloat(0, d));
      for (int fidx = 0; fidx < 2; ++fidx) {
        BigComplex z_end = window_z(fwd.states[fidx], q_h);
        BigComplex z_expect = fidx == 0 ? zp : zm;  // branch order matches label order
        BigComplex z_other = fidx == 0 ? zm : zp;
        if (!(abs(z_end - z_expect) < abs(z_end - z_other)))
          throw Error(ErrorKind::MatchFailure, "forward endpoints swapped against backward");
        if (!(abs(z_end - z_expect) < sep * BigFloat::from_double(0.3, d)))
          throw Error(ErrorKind::MatchFailure, "forward endpoint missed the local branch");
      }

      MonodromyRecord rec;
      rec.q_star = q_star;
      rec.z_star = z_star;
      rec.i = std::min(match[0], match[1]);
      rec.j = std::max(match[0], match[1]);
      rec.path_steps = back.steps + fwd.steps;
      rec.min_pair_gap = back.min_pair_gap;
      rec.method = ContinuationMethod::Both;
      rec.digits_used = d;
      return rec;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::MatchFailure || e.kind() == ErrorKind::StepUnderflow) {
        last = e;
        continue;  // escalate precision
      }
      throw;
    }
  }
  throw last;
}

// --------------------------------------------------------------------------
// rational-direction report

struct LabeledPoint {
  BigComplex q, z;
  int i = 0, j = 0;
  LabeledPoint() : q(kDefaultDigits), z(kDefaultDigits) {}
};

struct RationalDirectionReport {
  long a = 0, b = 1;
  BigFloat ray_angle;
  struct Entry {
    LabeledPoint point;
    long residue = 0;    // label i mod b
    bool matches = false;  // j - i == b
  };
  std::vector<Entry> entries;
  long matched = 0, unmatched = 0;
  std::string notice;

  RationalDirectionReport() : ray_angle(kDefaultDigits) {}
};

// Groups the supplied labelled points near the ray 2 pi a / b by the residue
// class of their lower label mod b and reports which transpositions follow
// the (r + mb, r + (m+1)b) pattern. Purely descriptive.
inline RationalDirectionReport rational_direction_report(long a, long b,
                                                         const std::vector<LabeledPoint>& points,
                                                         double angle_tol = -1.0) {
  if (b < 1 || std::gcd(a, b) != 1)
    throw Error(ErrorKind::Usage, "rational direction needs gcd(a, b) = 1, b >= 1");
  int d = kDefaultDigits;
  RationalDirectionReport rep;
  rep.a = a;
  rep.b = b;
  BigFloat two_pi = BigFloat::pi(d) * 2;
  rep.ray_angle = two_pi * a / b;
  BigFloat tol = angle_tol > 0 ? BigFloat::from_double(angle_tol, d)
                               : BigFloat::pi(d) / (2 * b);
  for (auto& p : points) {
    BigFloat diff = arg(p.q) - rep.ray_angle;
    while (diff > BigFloat::pi(d)) diff -= two_pi;
    while (diff < -BigFloat::pi(d)) diff += two_pi;
    if (!(abs(diff) <= tol)) continue;
    RationalDirectionReport::Entry e;
    e.point = p;
    e.residue = ((p.i % b) + b) % b;
    e.matches = (p.j - p.i == b);
    if (e.matches)
      ++rep.matched;
    else
      ++rep.unmatched;
    rep.entries.push_back(e);
  }
  if (rep.entries.empty())
    rep.notice = "no candidates within the angular window of this direction";
  return rep;
}

}  // namespace thetalab
