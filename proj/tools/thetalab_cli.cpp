// thetalab command-line surface: multiprecision evaluation of the partial
// theta function, the truncation-seeded spectral search, radial monodromy
// labels, near-boundary lifting, and zero-distribution statistics, with
// deterministic JSON/CSV outputs.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "thetalab/boundary.hpp"
#include "thetalab/config.hpp"
#include "thetalab/monodromy.hpp"
#include "thetalab/parallel.hpp"
#include "thetalab/polyroot.hpp"
#include "thetalab/serialize.hpp"
#include "thetalab/spectrum.hpp"

using namespace thetalab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitPartial = 3;

struct GlobalOpts {
  RunConfig cfg;
  std::string tol_override;
  bool have_tol = false;
};

BigFloat tol_or(const GlobalOpts& g, int default_exp) {
  int d = g.cfg.precision_digits;
  if (g.have_tol) return BigFloat(g.tol_override, d);
  return pow10(default_exp, d);
}

void ensure_outdir(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
}

void emit(const RunConfig& cfg, const std::string& name, const Json& json,
          const std::string& csv) {
  ensure_outdir(cfg);
  std::string jtext = json.dump(2);
  jtext += "\n";
  write_text_file(cfg.output_dir + "/" + name + ".json", jtext);
  if (!csv.empty()) write_text_file(cfg.output_dir + "/" + name + ".csv", csv);
  std::cout << jtext;
}

// ---------------------------------------------------------------------- eval

int run_eval(const GlobalOpts& g, const std::string& kind, std::vector<std::string> args) {
  int d = g.cfg.precision_digits;
  if (kind == "theta") {
    if (args.size() != 2) throw Error(ErrorKind::Usage, "eval theta <q> <z>");
    BigComplex q = parse_complex(args[0], d);
    BigComplex z = parse_complex(args[1], d);
    ThetaJet jet = theta_jet(q, z, tol_or(g, -(d - 10)));
    std::cout << "value = " << jet.value.str() << "\n";
    std::cout << "dz    = " << jet.dz.str() << "\n";
    std::cout << "dq    = " << jet.dq.str() << "\n";
    std::cout << "dzz   = " << jet.dzz.str() << "\n";
    std::cout << "dqz   = " << jet.dqz.str() << "\n";
    std::cout << "terms_used = " << jet.terms_used << "\n";
    std::cout << "tail_bound = " << jet.tail_bound.str(4) << "\n";
    return kExitOk;
  }
  if (kind == "psi") {
    if (args.size() != 1) throw Error(ErrorKind::Usage, "eval psi <q>");
    BigComplex q = parse_complex(args[0], d);
    BigFloat tol = tol_or(g, -(d - 10));
    BigComplex s = psi_eval(q, tol, PsiMode::Series);
    BigComplex p = psi_eval(q, tol, PsiMode::Product);
    std::cout << "series  = " << s.str() << "\n";
    std::cout << "product = " << p.str() << "\n";
    std::cout << "agreement |series - product| = " << abs(s - p).str(4) << "\n";
    return kExitOk;
  }
  if (kind == "window") {
    if (args.size() != 3) throw Error(ErrorKind::Usage, "eval window <q> <u> <N>");
    BigComplex q = parse_complex(args[0], d);
    BigComplex u = parse_complex(args[1], d);
    long N = std::stol(args[2]);
    WindowJet jet = window_jet(q, u, N, tol_or(g, -(d - 10)));
    std::cout << "h  = " << jet.h.str() << "\n";
    std::cout << "hu = " << jet.hu.str() << "\n";
    std::cout << "terms_used = " << jet.terms_used << "\n";
    std::cout << "tail_bound = " << jet.tail_bound.str(4) << "\n";
    return kExitOk;
  }
  throw Error(ErrorKind::Usage, "eval kind must be theta, psi or window");
}

// --------------------------------------------------------------------- table

int run_table(const GlobalOpts& g, bool dump_seeds, const std::string& policy) {
  const RunConfig& rc = g.cfg;
  PipelineConfig cfg;
  cfg.degrees = rc.degrees;
  cfg.digits = rc.precision_digits;
  cfg.seed_radius = rc.seed_radius;
  cfg.retain_radius = rc.retain_radius;
  cfg.z_bound = rc.z_bound;
  cfg.cluster_eps = rc.cluster_eps;
  cfg.residual_exp = rc.residual_exp;
  cfg.workers = rc.workers;
  cfg.policy = policy == "damped" ? NewtonPolicy::DampedMonotone : NewtonPolicy::PlainGuarded;

  PipelineResult res = run_pipeline(cfg);
  int d = cfg.digits;

  Json out;
  out["precision_digits"] = d;
  out["degrees"] = cfg.degrees;
  out["candidates"] = Json::array();
  std::string csv = "no,q_re,q_im,z_re,z_im,abs_q,abs_z,residual_log10,certified,rho,sources\n";
  bool all_certified = !res.table.empty();
  for (size_t i = 0; i < res.table.size(); ++i) {
    const SpectralCandidate& c = res.table[i];
    Json row;
    row["q_re"] = dec(c.q.re(), d);
    row["q_im"] = dec(c.q.im(), d);
    row["z_re"] = dec(c.z.re(), d);
    row["z_im"] = dec(c.z.im(), d);
    row["abs_q"] = dec(abs(c.q), d);
    row["abs_z"] = dec(abs(c.z), d);
    row["residual_log10"] = dec_log10(c.residual);
    row["certified"] = c.certified;
    row["rho"] = c.certified ? dec(c.rho, 8) : "";
    row["sources"] = c.sources;
    out["candidates"].push_back(row);
    all_certified = all_certified && c.certified;
    std::string srcs;
    for (auto& s : c.sources) srcs += (srcs.empty() ? "" : ";") + s;
    csv += csv_join({std::to_string(i + 1), dec(c.q.re(), d), dec(c.q.im(), d), dec(c.z.re(), d),
                     dec(c.z.im(), d), dec(abs(c.q), d), dec(abs(c.z), d),
                     dec_log10(c.residual), c.certified ? "1" : "0",
                     c.certified ? dec(c.rho, 8) : "", srcs}) +
           "\n";
  }
  out["caustic_suspects"] = Json::array();
  for (auto& c : res.caustic_suspects) {
    Json row;
    row["q_re"] = dec(c.q.re(), d);
    row["q_im"] = dec(c.q.im(), d);
    row["abs_z"] = dec(abs(c.z), d);
    row["note"] = c.failure;
    out["caustic_suspects"].push_back(row);
  }
  out["seed_count"] = res.seeds.size();
  out["refinement_failures"] = res.failures;
  emit(rc, "candidates", out, csv);

  if (dump_seeds) {
    std::string scsv = "degree,index,q_re,q_im,z_re,z_im,residual_log10\n";
    for (auto& s : res.seeds)
      scsv += csv_join({std::to_string(s.degree), std::to_string(s.root_index),
                        dec(s.q.re(), d), dec(s.q.im(), d), dec(s.z.re(), d), dec(s.z.im(), d),
                        dec_log10(s.residual)}) +
              "\n";
    write_text_file(rc.output_dir + "/seeds.csv", scsv);
  }
  for (auto& f : res.failures) std::cerr << "note: " << f << "\n";
  return all_certified ? kExitOk : kExitPartial;
}

// ----------------------------------------------------------------- monodromy

int run_monodromy(const GlobalOpts& g, const std::string& candidates_file, int K,
                  const std::string& expected_file, bool dump_paths) {
  const RunConfig& rc = g.cfg;
  int d = std::max(50, rc.precision_digits);

  std::ifstream in(candidates_file);
  if (!in) throw Error(ErrorKind::Usage, "cannot open " + candidates_file);
  Json doc = Json::parse(in);
  const Json& cands = doc.contains("candidates") ? doc["candidates"] : doc;
  if (!cands.is_array()) throw Error(ErrorKind::Usage, "candidates file must hold an array");

  struct Item {
    BigComplex q, z;
    Item(int dd) : q(dd), z(dd) {}
  };
  std::vector<Item> items;
  for (auto& row : cands) {
    Item it(d);
    it.q = BigComplex(row["q_re"].get<std::string>(), row["q_im"].get<std::string>(), d);
    it.z = BigComplex(row["z_re"].get<std::string>(), row["z_im"].get<std::string>(), d);
    items.push_back(it);
  }

  std::vector<std::pair<int, int>> expected;
  if (!expected_file.empty()) {
    std::ifstream ef(expected_file);
    if (!ef) throw Error(ErrorKind::Usage, "cannot open " + expected_file);
    int i, j;
    while (ef >> i >> j) expected.push_back({i, j});
  }

  struct Outcome {
    bool ok = false;
    MonodromyRecord rec;
    std::string error;
  };
  std::vector<Outcome> outcomes(items.size());
  run_indexed(rc.workers, items.size(), [&](size_t idx) {
    try {
      SeedPair s;
      s.q = items[idx].q;
      s.z = items[idx].z;
      s.tag = "cand";
      SpectralCandidate c = newton_refine(s, pow10(-30, d), 60, d);
      outcomes[idx].rec = collision_label(c.q, c.z, K);
      outcomes[idx].ok = true;
    } catch (const Error& e) {
      outcomes[idx].error = e.what();
    }
  });

  Json out;
  out["precision_digits"] = d;
  out["records"] = Json::array();
  std::string csv = "no,q_re,q_im,z_re,z_im,i,j,method,path_steps,min_pair_gap,base_re,base_im\n";
  int failures = 0, mismatches = 0;
  for (size_t idx = 0; idx < outcomes.size(); ++idx) {
    Json row;
    const Item& it = items[idx];
    row["q_star_re"] = dec(it.q.re(), 20);
    row["q_star_im"] = dec(it.q.im(), 20);
    row["z_star_re"] = dec(it.z.re(), 20);
    row["z_star_im"] = dec(it.z.im(), 20);
    if (outcomes[idx].ok) {
      const MonodromyRecord& r = outcomes[idx].rec;
      bool negative_ray = abs(it.q.im()) < pow10(-18, d) && it.q.re().sgn() < 0;
      BigFloat theta = negative_ray ? BigFloat::pi(d) : arg(it.q);
      BigComplex base = unit_phase(theta) * (BigFloat(1, d) / 10);
      row["base_re"] = dec(base.re(), 20);
      row["base_im"] = dec(base.im(), 20);
      row["i"] = r.i;
      row["j"] = r.j;
      row["method"] = "both";
      row["path_steps"] = r.path_steps;
      row["min_pair_gap"] = dec(r.min_pair_gap, 8);
      if (idx < expected.size()) {
        bool match = expected[idx].first == r.i && expected[idx].second == r.j;
        row["matches_expected"] = match;
        if (!match) ++mismatches;
      }
      csv += csv_join({std::to_string(idx + 1), dec(it.q.re(), 20), dec(it.q.im(), 20),
                       dec(it.z.re(), 20), dec(it.z.im(), 20), std::to_string(r.i),
                       std::to_string(r.j), "both", std::to_string(r.path_steps),
                       dec(r.min_pair_gap, 8), dec(base.re(), 20), dec(base.im(), 20)}) +
             "\n";
    } else {
      row["error"] = outcomes[idx].error;
      ++failures;
    }
    out["records"].push_back(row);
  }
  emit(rc, "monodromy", out, csv);

  if (dump_paths) {
    std::string pcsv = "record,r,label,z_re,z_im\n";
    for (size_t idx = 0; idx < items.size(); ++idx) {
      if (!outcomes[idx].ok) continue;
      const Item& it = items[idx];
      bool negative_ray = abs(it.q.im()) < pow10(-18, d) && it.q.re().sgn() < 0;
      int dd = 40;
      BigFloat theta = negative_ray ? BigFloat::pi(dd) : arg(it.q);
      RootLabeling lab = base_labels(theta, K, negative_ray, dd);
      std::vector<PathSample> samples;
      ContinuationControls ctl;
      ctl.recorder = &samples;
      try {
        continue_radial(lab, BigComplex(it.q.re() + BigFloat(dd), it.q.im() + BigFloat(dd)), ctl);
      } catch (const Error&) {
        continue;  // collisions on the segment leave a partial path, still useful
      }
      size_t stride = std::max<size_t>(1, samples.size() / 120);
      for (size_t s = 0; s < samples.size(); s += stride)
        for (size_t k = 0; k < samples[s].z.size(); ++k)
          pcsv += csv_join({std::to_string(idx + 1), dec(samples[s].r, 12),
                            std::to_string(k + 1), dec(samples[s].z[k].re(), 12),
                            dec(samples[s].z[k].im(), 12)}) +
                  "\n";
    }
    write_text_file(rc.output_dir + "/monodromy_paths.csv", pcsv);
  }
  return (failures || mismatches) ? kExitPartial : kExitOk;
}

// ------------------------------------------------------------------ boundary

int run_boundary(const GlobalOpts& g, long a, long b, const std::vector<long>& Ns) {
  const RunConfig& rc = g.cfg;
  Json out;
  out["a"] = a;
  out["b"] = b;
  out["solutions"] = Json::array();
  std::string csv = "a,b,r,N,tau_re,tau_im,v_re,v_im,q_re,q_im,abs_q,dist_to_omega,residual_h,residual_hu\n";
  int failures = 0;

  struct Slot {
    bool ok = false;
    BoundarySolution sol;
    std::string error;
    long N = 0;
  };
  std::vector<Slot> slots(Ns.size());
  run_indexed(rc.workers, Ns.size(), [&](size_t i) {
    slots[i].N = Ns[i];
    try {
      WindowParams p = make_window_params(a, b, Ns[i]);
      BigFloat tol = pow10(rc.boundary_exp, p.digits);
      slots[i].sol = lift_solution(p, tol);
      slots[i].ok = true;
    } catch (const Error& e) {
      slots[i].error = e.what();
    }
  });

  std::string prev_dist;
  bool dist_decreasing = true;
  BigFloat last_dist(0, 60);
  bool have_last = false;
  for (auto& s : slots) {
    Json row;
    row["N"] = s.N;
    if (s.ok) {
      const BoundarySolution& sol = s.sol;
      int d = sol.params.digits;
      row["r"] = sol.params.r;
      row["digits"] = d;
      row["tau_re"] = dec(sol.tau.re(), 25);
      row["tau_im"] = dec(sol.tau.im(), 25);
      row["v_re"] = dec(sol.v.re(), 25);
      row["v_im"] = dec(sol.v.im(), 25);
      row["q_re"] = dec(sol.q.re(), 30);
      row["q_im"] = dec(sol.q.im(), 30);
      row["abs_q"] = dec(abs(sol.q), 30);
      row["dist_to_omega"] = dec(sol.dist_to_omega, 20);
      row["residual_h"] = dec_log10(sol.residual_h);
      row["residual_hu"] = dec_log10(sol.residual_hu);
      csv += csv_join({std::to_string(a), std::to_string(b), std::to_string(sol.params.r),
                       std::to_string(s.N), dec(sol.tau.re(), 25), dec(sol.tau.im(), 25),
                       dec(sol.v.re(), 25), dec(sol.v.im(), 25), dec(sol.q.re(), 30),
                       dec(sol.q.im(), 30), dec(abs(sol.q), 30), dec(sol.dist_to_omega, 20),
                       dec_log10(sol.residual_h), dec_log10(sol.residual_hu)}) +
             "\n";
      BigFloat dd = sol.dist_to_omega + BigFloat(0, 60);
      if (have_last && !(dd < last_dist)) dist_decreasing = false;
      last_dist = dd;
      have_last = true;
    } else {
      row["error"] = s.error;
      ++failures;
    }
    out["solutions"].push_back(row);
  }
  out["dist_to_omega_decreasing"] = dist_decreasing;
  emit(rc, "boundary", out, csv);
  return failures ? kExitPartial : kExitOk;
}

// --------------------------------------------------------------------- stats

int run_stats(const GlobalOpts& g, const std::vector<long>& ms) {
  const RunConfig& rc = g.cfg;
  int d = rc.precision_digits;
  Json out;
  out["reports"] = Json::array();
  ensure_outdir(rc);
  std::string prev;
  bool non_increasing = true;
  BigFloat last(0, d);
  bool have_last = false;
  for (long m : ms) {
    if (m < 1 || m > 64) throw Error(ErrorKind::Usage, "stats supports 1 <= m <= 64");
    IntQPoly p;
    p.coeffs = dense_q_coeffs(psi_section(m));
    RootSet rs = roots_all(p, d);
    DistributionReport rep = distribution_report(rs);
    Json row;
    row["m"] = m;
    row["degree"] = p.degree();
    row["roots"] = rs.roots.size();
    row["converged"] = rs.converged;
    row["discrepancy"] = dec(rep.discrepancy, 12);
    row["radial_fraction"] = Json::array();
    for (auto& [eps, f] : rep.radial_fraction) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.6f", f);
      row["radial_fraction"].push_back({{"eps", eps}, {"fraction", std::string(buf)}});
    }
    row["inner_count_0.8"] = rep.inner_count(BigFloat("0.8", d));
    out["reports"].push_back(row);

    std::string csv = "re,im,abs,arg,multiplicity\n";
    for (size_t i = 0; i < rs.roots.size(); ++i)
      csv += csv_join({dec(rs.roots[i].re(), 20), dec(rs.roots[i].im(), 20),
                       dec(abs(rs.roots[i]), 20), dec(arg(rs.roots[i]), 20),
                       std::to_string(rs.multiplicity[i])}) +
             "\n";
    write_text_file(rc.output_dir + "/psi_roots_m" + std::to_string(m) + ".csv", csv);

    if (have_last && rep.discrepancy > last) non_increasing = false;
    last = rep.discrepancy;
    have_last = true;
  }
  out["discrepancy_non_increasing"] = non_increasing;
  std::string jtext = out.dump(2);
  jtext += "\n";
  write_text_file(rc.output_dir + "/stats.json", jtext);
  std::cout << jtext;
  return kExitOk;
}

// ------------------------------------------------------------------ even-fact

int run_even_fact(const GlobalOpts& g, const std::vector<long>& ms, bool dump_polys) {
  Json out;
  out["reports"] = Json::array();
  bool all_hold = true;
  for (long m : ms) {
    EvenFactorizationReport rep = even_factorization_check(m);
    if (dump_polys) {
      ensure_outdir(g.cfg);
      EvenReduction er = even_reduction(m);
      write_text_file(g.cfg.output_dir + "/R_m" + std::to_string(m) + ".terms", er.R.dump());
      write_text_file(g.cfg.output_dir + "/S_m" + std::to_string(m) + ".terms", er.S.dump());
    }
    Json row;
    row["m"] = m;
    row["holds"] = rep.holds;
    row["unit_sign"] = rep.unit_sign;
    row["unit_tpow"] = rep.unit_tpow;
    auto poly_terms = [](const std::vector<BigInt>& v) {
      Json arr = Json::array();
      for (size_t i = 0; i < v.size(); ++i)
        if (v[i] != 0) arr.push_back(std::to_string(i) + " " + v[i].str());
      return arr;
    };
    row["C_t_terms"] = poly_terms(rep.C);
    row["B_t_terms"] = poly_terms(rep.B);
    out["reports"].push_back(row);
    all_hold = all_hold && rep.holds;
  }
  emit(g.cfg, "even_fact", out, "");
  return all_hold ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------- outer-check

int run_outer(const GlobalOpts& g, long n, const std::string& q_str, int samples,
              const std::string& modulus) {
  int d = g.cfg.precision_digits;
  Json out;
  out["n"] = n;
  out["checks"] = Json::array();
  bool all_simple = true;
  auto check_one = [&](const BigComplex& q) {
    OuterCheckResult res = outer_simplicity_check(n, q, d);
    Json row;
    row["q_re"] = dec(q.re(), 20);
    row["q_im"] = dec(q.im(), 20);
    row["verdict"] = res.verdict == OuterVerdict::Simple ? "Simple" : "Inconclusive";
    row["coeff_sum"] = dec(res.coeff_sum, 8);
    row["min_separation"] = dec(res.min_separation, 8);
    out["checks"].push_back(row);
    all_simple = all_simple && res.verdict == OuterVerdict::Simple;
  };
  if (!q_str.empty()) {
    check_one(parse_complex(q_str, d));
  } else {
    BigFloat mod(modulus.empty() ? std::string("1.5") : modulus, d);
    for (int k = 0; k < samples; ++k) {
      BigFloat theta = BigFloat::pi(d) * (2 * k + 1) / (2 * samples + 1);
      check_one(unit_phase(theta) * mod);
    }
  }
  emit(g.cfg, "outer_check", out, "");
  std::cout << (all_simple ? "all Simple\n" : "Inconclusive present\n");
  return kExitOk;
}

// --------------------------------------------------------------- jensen-check

int run_jensen(const GlobalOpts& g, long n, const std::string& q_str, const std::string& z_str) {
  int d = g.cfg.precision_digits;
  BigComplex q = parse_complex(q_str, d);
  BigComplex z = parse_complex(z_str, d);
  BigFloat r = jensen_identity_check(n, q, z);
  std::cout << "relative_residual = " << r.str(6) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thetalab: a multiprecision laboratory for the partial theta function"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  std::string config_path;
  app.add_option("--config", config_path, "flat key=value run configuration file");
  auto* prec_opt =
      app.add_option("--prec", g.cfg.precision_digits, "working precision in decimal digits");
  auto* tol_opt = app.add_option("--tol", g.tol_override, "tolerance override (decimal)");
  auto* out_opt = app.add_option("--out", g.cfg.output_dir, "output directory");
  auto* fmt_opt = app.add_option("--format", g.cfg.format, "json|csv (csv mirrors json)");
  auto* wrk_opt = app.add_option("--workers", g.cfg.workers, "worker threads");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate theta, psi or the window function");
  std::string eval_kind;
  std::vector<std::string> eval_args;
  eval_cmd->add_option("kind", eval_kind, "theta|psi|window")->required();
  eval_cmd->add_option("args", eval_args, "arguments");

  auto* table_cmd = app.add_subcommand("table", "truncation-seeded spectral candidate table");
  bool dump_seeds = false;
  std::string policy = "plain";
  std::vector<int> degrees_flag;
  double radius_flag = -1, retain_flag = -1;
  table_cmd->add_option("--degrees", degrees_flag, "truncation degrees")->delimiter(',');
  table_cmd->add_option("--radius", radius_flag, "seed radius gate (|q| < radius)");
  table_cmd->add_option("--retain", retain_flag, "final table gate (|q| <= retain)");
  table_cmd->add_flag("--dump-seeds", dump_seeds, "write seeds.csv");
  table_cmd->add_option("--newton", policy, "plain|damped refinement policy");

  auto* mono_cmd = app.add_subcommand("monodromy", "radial collision labels for candidates");
  std::string cand_file, expected_file;
  int K = 10;
  bool dump_paths = false;
  mono_cmd->add_option("candidates", cand_file, "candidates JSON file")->required();
  mono_cmd->add_option("--labels", K, "number of base labels K (<= 12)");
  mono_cmd->add_option("--expected", expected_file, "file of expected 'i j' pairs per record");
  mono_cmd->add_flag("--paths", dump_paths, "write monodromy_paths.csv");

  auto* bound_cmd = app.add_subcommand("boundary", "root-of-unity lifting solutions");
  long ba = 0, bb = 1;
  std::vector<long> bNs;
  bound_cmd->add_option("a", ba, "numerator of the rational direction")->required();
  bound_cmd->add_option("b", bb, "denominator (omega = e^{2 pi i a/b})")->required();
  bound_cmd->add_option("N", bNs, "window indices N (progression members)")->required();

  auto* stats_cmd = app.add_subcommand("stats", "zero-distribution statistics of the psi sections");
  std::vector<long> stat_ms;
  stats_cmd->add_option("m", stat_ms, "section indices m")->required();

  auto* even_cmd = app.add_subcommand("even-fact", "even-degree discriminant factorization check");
  std::vector<long> even_ms;
  bool even_dump = false;
  even_cmd->add_option("m", even_ms, "half-degrees m")->required();
  even_cmd->add_flag("--dump-polys", even_dump, "write R_m/S_m term tables");

  auto* outer_cmd = app.add_subcommand("outer-check", "outer localization simplicity check");
  long outer_n = 30;
  std::string outer_q, outer_mod;
  int outer_samples = 8;
  outer_cmd->add_option("n", outer_n, "truncation degree")->required();
  outer_cmd->add_option("q", outer_q, "single complex q with |q| > 1");
  outer_cmd->add_option("--samples", outer_samples, "deterministic ray samples when q omitted");
  outer_cmd->add_option("--modulus", outer_mod, "|q| for sampled rays (default 1.5)");

  auto* jensen_cmd = app.add_subcommand("jensen-check", "Jensen-truncation identity residual");
  long jn = 5;
  std::string jq, jz;
  jensen_cmd->add_option("n", jn, "degree")->required();
  jensen_cmd->add_option("q", jq, "complex q")->required();
  jensen_cmd->add_option("z", jz, "complex z")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!config_path.empty()) {
      RunConfig from_file;
      apply_config(from_file, read_config_file(config_path));
      // explicit flags override the file
      if (prec_opt->count() == 0) g.cfg.precision_digits = from_file.precision_digits;
      if (out_opt->count() == 0) g.cfg.output_dir = from_file.output_dir;
      if (fmt_opt->count() == 0) g.cfg.format = from_file.format;
      if (wrk_opt->count() == 0) g.cfg.workers = from_file.workers;
      g.cfg.degrees = from_file.degrees;
      g.cfg.seed_radius = from_file.seed_radius;
      g.cfg.retain_radius = from_file.retain_radius;
      g.cfg.z_bound = from_file.z_bound;
      g.cfg.cluster_eps = from_file.cluster_eps;
      g.cfg.residual_exp = from_file.residual_exp;
      g.cfg.boundary_exp = from_file.boundary_exp;
      g.cfg.tolerances = from_file.tolerances;
    }
    g.have_tol = tol_opt->count() > 0;
    if (const char* env = std::getenv("THETA_LAB_PREC")) {
      g.cfg.precision_digits = std::stoi(env);  // env overrides --prec
    }
    if (g.cfg.precision_digits < 30)
      throw Error(ErrorKind::Usage, "precision must be >= 30 digits");

    if (*eval_cmd) return run_eval(g, eval_kind, eval_args);
    if (*table_cmd) {
      if (!degrees_flag.empty()) g.cfg.degrees = degrees_flag;
      if (radius_flag > 0) g.cfg.seed_radius = radius_flag;
      if (retain_flag > 0) g.cfg.retain_radius = retain_flag;
      return run_table(g, dump_seeds, policy);
    }
    if (*mono_cmd) return run_monodromy(g, cand_file, K, expected_file, dump_paths);
    if (*bound_cmd) return run_boundary(g, ba, bb, bNs);
    if (*stats_cmd) return run_stats(g, stat_ms);
    if (*even_cmd) return run_even_fact(g, even_ms, even_dump);
    if (*outer_cmd) return run_outer(g, outer_n, outer_q, outer_samples, outer_mod);
    if (*jensen_cmd) return run_jensen(g, jn, jq, jz);
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Usage ? kExitUsage : kExitPartial;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
