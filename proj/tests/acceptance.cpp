// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. The CLI binary path is taken from argv[1] (used by the
// determinism criterion).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "reference_values.hpp"
#include "thetalab/boundary.hpp"
#include "thetalab/monodromy.hpp"
#include "thetalab/polyroot.hpp"
#include "thetalab/qpoly.hpp"
#include "thetalab/spectrum.hpp"

using namespace thetalab;

namespace {

std::string g_cli;
int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail, double seconds) {
  std::printf("criterion %2d %s  %s  (%.1f s)\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run_criterion(int n, const std::function<std::pair<bool, std::string>()>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    auto [p, d] = fn();
    pass = p;
    detail = d;
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(n, pass, detail, dt);
}

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

BigComplex rand_annulus(SplitMix& rng, double rmin, double rmax, int digits) {
  double a = rng.uniform() * 6.283185307179586;
  double r = rmin + (rmax - rmin) * rng.uniform();
  return BigComplex(BigFloat::from_double(r * std::cos(a), digits),
                    BigFloat::from_double(r * std::sin(a), digits));
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// parsed rows of the `table` subcommand's candidates.json (criteria 1, 2, 10)
struct TableRow {
  BigComplex q, z;
  double residual_log10 = 0;
  bool certified = false;
  BigFloat rho;
  TableRow() : q(50), z(50), rho(50) {}
};
std::vector<TableRow> g_table;

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli = argv[1];

  // ---- criterion 1: full table reproduction through the CLI ---------------
  run_criterion(1, []() -> std::pair<bool, std::string> {
    if (g_cli.empty()) return {false, "CLI path not supplied"};
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "thetalab_acceptance_table";
    fs::remove_all(dir);
    int rc = std::system((g_cli + " table --degrees 8,10,12,14 --radius 0.82 --retain 0.8 "
                                  "--prec 50 --workers 2 --out " +
                          dir.string() + " > /dev/null 2>&1")
                             .c_str());
    if (WEXITSTATUS(rc) != 0)
      return {false, "table subcommand exited " + std::to_string(WEXITSTATUS(rc))};
    auto doc = nlohmann::ordered_json::parse(slurp((dir / "candidates.json").string()));
    int d = 50;
    for (auto& row : doc["candidates"]) {
      TableRow r;
      r.q = BigComplex(row["q_re"].get<std::string>(), row["q_im"].get<std::string>(), d);
      r.z = BigComplex(row["z_re"].get<std::string>(), row["z_im"].get<std::string>(), d);
      r.residual_log10 = std::stod(row["residual_log10"].get<std::string>());
      r.certified = row["certified"].get<bool>();
      if (r.certified) r.rho = BigFloat(row["rho"].get<std::string>(), d);
      g_table.push_back(std::move(r));
    }
    if (g_table.size() != 30)
      return {false, "expected 30 clusters, got " + std::to_string(g_table.size())};
    BigFloat tol = pow10(-9, d);
    int matched = 0;
    for (size_t i = 0; i < 30; ++i) {
      const auto& ref = thetalab_test::kReferenceTable[i];
      const auto& c = g_table[i];
      BigComplex rq(std::string(ref.q_re), std::string(ref.q_im), d);
      BigComplex rz(std::string(ref.z_re), std::string(ref.z_im), d);
      bool ok = abs(c.q - rq) < tol && abs(c.z - rz) < tol && c.residual_log10 < -30;
      if (ok) ++matched;
    }
    // every non-real candidate must have its conjugate in the table
    bool conj_closed = true;
    for (auto& c : g_table) {
      if (abs(c.q.im()) < pow10(-20, d)) continue;
      bool found = false;
      for (auto& o : g_table)
        if (abs(o.q - conj(c.q)) < pow10(-18, d)) found = true;
      conj_closed = conj_closed && found;
    }
    return {matched == 30 && conj_closed,
            "table reproduction: " + std::to_string(matched) +
                "/30 rows match to 1e-9 with residuals < 1e-30, conjugate-closed"};
  });

  // ---- criterion 2: real spectral values ----------------------------------
  run_criterion(2, []() -> std::pair<bool, std::string> {
    int d = 50;
    BigFloat tol = pow10(-10, d);
    int found = 0;
    auto present = [&](const std::string& s) {
      BigComplex target(s, "0", d);
      for (auto& c : g_table)
        if (abs(c.q.im()) < tol && abs(c.q - target) < tol) return true;
      return false;
    };
    for (auto s : thetalab_test::kPositiveReals) found += present(std::string(s)) ? 1 : 0;
    for (auto s : thetalab_test::kNegativeReals) found += present(std::string(s)) ? 1 : 0;
    return {found == 6, "real spectral values: " + std::to_string(found) +
                            "/6 reproduced to 1e-10"};
  });

  // ---- criterion 3: monodromy table ---------------------------------------
  run_criterion(3, []() -> std::pair<bool, std::string> {
    int ok = 0;
    std::vector<std::string> misses;
    std::vector<int> results(thetalab_test::kReferenceMonodromy.size(), 0);
    run_indexed(2, thetalab_test::kReferenceMonodromy.size(), [&](size_t k) {
      const auto& r = thetalab_test::kReferenceMonodromy[k];
      int d = 50;
      SeedPair s;
      s.q = BigComplex(std::string(r.q_re), std::string(r.q_im), d);
      s.z = BigComplex(std::string(r.z_re), std::string(r.z_im), d);
      s.tag = "ref";
      SpectralCandidate c = newton_refine(s, pow10(-32, d), 40, d);
      MonodromyRecord rec = collision_label(c.q, c.z, 10);
      if (rec.i == r.label_i && rec.j == r.label_j && rec.method == ContinuationMethod::Both)
        results[k] = 1;
    });
    for (int v : results) ok += v;
    return {ok == 14, "monodromy: " + std::to_string(ok) +
                          "/14 records reproduce the printed transpositions (forward+backward)"};
  });

  // ---- criterion 4: central factor witnesses ------------------------------
  run_criterion(4, []() -> std::pair<bool, std::string> {
    auto [rt, rd] = central_factor_witness_exact(1, BigRat(1, 3));
    if (rt != 0 || rd != 0) return {false, "m=1 rational witness is not exactly zero"};
    int d = 50;
    BigFloat tol = pow10(-25, d);
    long total = 0, good = 0;
    for (long m = 1; m <= 10; ++m) {
      IntQPoly p;
      p.coeffs = dense_q_coeffs(psi_section(m));
      RootSet rs = roots_all(p, d);
      for (size_t i = 0; i < rs.roots.size(); ++i) {
        total += rs.multiplicity[i];
        CentralWitness w = central_factor_witness(m, rs.roots[i], tol);
        if (w.residual_theta < tol && w.residual_dtheta < tol) good += rs.multiplicity[i];
      }
    }
    return {good == total && total == 220,
            "central factor: " + std::to_string(good) + "/" + std::to_string(total) +
                " roots of Psi_1..Psi_10 give witness residuals < 1e-25"};
  });

  // ---- criterion 5: identity suites (200 samples each) --------------------
  run_criterion(5, []() -> std::pair<bool, std::string> {
    int d = 50;
    long bad = 0;
    {
      SplitMix rng(101);
      BigFloat bound = pow10(-(d - 5), d);
      for (int t = 0; t < 200; ++t) {
        long n = 1 + long(rng.next() % 10);
        BigComplex q = rand_annulus(rng, 0.1, 0.95, d);
        BigComplex z = rand_annulus(rng, 0.1, 0.95, d);
        if (!(jensen_identity_check(n, q, z) < bound)) ++bad;
      }
    }
    {
      SplitMix rng(202);
      BigFloat tol = pow10(-30, d);
      for (int t = 0; t < 200; ++t) {
        BigComplex q = rand_annulus(rng, 0.0, 0.9, d);
        BigComplex s = psi_eval(q, tol, PsiMode::Series);
        BigComplex p = psi_eval(q, tol, PsiMode::Product);
        if (!(abs(s - p) <= tol * 2)) ++bad;
      }
    }
    long overflow_skips = 0;
    {
      int dw = 60;
      SplitMix rng(303);
      BigFloat tol = pow10(-30, dw);
      for (int t = 0; t < 200; ++t) {
        BigComplex q = rand_annulus(rng, 0.05, 0.6, dw);
        BigComplex u = rand_annulus(rng, 0.0, 0.6, dw);
        long N = long(rng.next() % 11);
        try {
          if (!(window_identity_residual(q, u, N, tol) <= tol * 10)) ++bad;
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::ScaleOverflow)
            ++overflow_skips;
          else
            ++bad;
        }
      }
      if (overflow_skips > 60) ++bad;  // the sample must mostly be in budget
    }
    {
      SplitMix rng(404);
      BigFloat h = pow10(-d / 3, d);
      for (int t = 0; t < 200; ++t) {
        BigComplex q = rand_annulus(rng, 0.0, 0.6, d);
        BigComplex u = rand_annulus(rng, 0.0, 0.5, d);
        long N = 1 + long(rng.next() % 9);
        WindowJet jet = window_jet(q, u, N, pow10(-45, d));
        BigComplex du = BigComplex(h, BigFloat(0, d));
        WindowJet up = window_jet(q, u + du, N, pow10(-45, d));
        WindowJet dn = window_jet(q, u - du, N, pow10(-45, d));
        BigComplex fd = (up.h - dn.h) / (h * 2);
        BigFloat err_bound = pow10(-d / 3 * 2 + 3, d) * (abs(jet.hu) + BigFloat(1, d));
        if (!(abs(fd - jet.hu) < err_bound)) ++bad;
      }
    }
    return {bad == 0, "identity suites (4 x 200 samples): " + std::to_string(bad) +
                          " violations, " + std::to_string(overflow_skips) +
                          " scale-overflow exemptions"};
  });

  // ---- criterion 6: even factorization ------------------------------------
  run_criterion(6, []() -> std::pair<bool, std::string> {
    int ok = 0;
    for (long m = 1; m <= 4; ++m) {
      EvenFactorizationReport rep = even_factorization_check(m);
      if (rep.holds && (rep.unit_sign == 1 || rep.unit_sign == -1)) ++ok;
    }
    return {ok == 4, "even factorization: " + std::to_string(ok) +
                         "/4 identities hold exactly up to a unit +-t^k"};
  });

  // ---- criterion 7: equidistribution trend --------------------------------
  run_criterion(7, []() -> std::pair<bool, std::string> {
    int d = 40;
    std::vector<long> ms{8, 16, 24, 32};
    std::vector<BigFloat> disc;
    double frac32 = 0;
    long inner32 = 0;
    for (long m : ms) {
      IntQPoly p;
      p.coeffs = dense_q_coeffs(psi_section(m));
      RootSet rs = roots_all(p, d);
      DistributionReport rep = distribution_report(rs);
      disc.push_back(rep.discrepancy);
      if (m == 32) {
        for (auto& [eps, f] : rep.radial_fraction)
          if (eps == 0.1) frac32 = f;
        inner32 = rep.inner_count(BigFloat("0.8", d));
      }
    }
    bool trend = true;
    for (size_t i = 1; i < disc.size(); ++i)
      if (!(disc[i] <= disc[i - 1] * BigFloat::from_double(1.1, d))) trend = false;
    bool inner_small = inner32 <= long(0.05 * 528);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "equidistribution: discrepancies %.4f %.4f %.4f %.4f, Psi_32 fraction in "
                  "(0.9,1.1) = %.3f, inner(0.8) = %ld",
                  disc[0].to_double(), disc[1].to_double(), disc[2].to_double(),
                  disc[3].to_double(), frac32, inner32);
    return {trend && frac32 > 0.9 && inner_small, buf};
  });

  // ---- criterion 8: outer localization ------------------------------------
  run_criterion(8, []() -> std::pair<bool, std::string> {
    int d = 40;
    SplitMix rng(777);
    int simple = 0;
    for (int k = 0; k < 8; ++k) {
      double theta = rng.uniform() * 6.283185307179586;
      BigComplex q = unit_phase(BigFloat::from_double(theta, d)) * BigFloat("1.5", d);
      OuterCheckResult res = outer_simplicity_check(30, q, d);
      if (res.verdict == OuterVerdict::Simple && res.min_separation > BigFloat(0, 2 * d))
        ++simple;
    }
    return {simple == 8, "outer localization: " + std::to_string(simple) +
                             "/8 random |q|=1.5 points verified Simple at n=30"};
  });

  // ---- criterion 9: boundary lifting --------------------------------------
  run_criterion(9, []() -> std::pair<bool, std::string> {
    struct Prog {
      long a, b;
      std::vector<long> Ns;
    };
    std::vector<Prog> progs{{0, 1, {24, 32, 40}}, {1, 2, {24, 28, 32}}};
    int ok_prog = 0;
    std::string note;
    for (auto& pr : progs) {
      bool all_ok = true, decreasing = true;
      BigFloat last(0, 60);
      bool have_last = false;
      for (long N : pr.Ns) {
        WindowParams p = make_window_params(pr.a, pr.b, N);
        BigFloat tol = pow10(-20, p.digits);
        BoundarySolution sol = lift_solution(p, tol);
        if (!(abs(sol.q) < BigFloat(1, p.digits)) || !(sol.residual_h <= tol) ||
            !(sol.residual_hu <= tol))
          all_ok = false;
        BigFloat dd = sol.dist_to_omega + BigFloat(0, 60);
        if (have_last && !(dd < last)) decreasing = false;
        last = dd;
        have_last = true;
      }
      if (all_ok && decreasing) ++ok_prog;
      note += "(" + std::to_string(pr.a) + "," + std::to_string(pr.b) + ")" +
              (all_ok && decreasing ? " ok " : " FAIL ");
    }
    return {ok_prog == 2, "boundary lifting: " + note +
                              "- |q|<1, residuals < 1e-20, dist_to_omega strictly decreasing"};
  });

  // ---- criterion 10: certification ----------------------------------------
  run_criterion(10, []() -> std::pair<bool, std::string> {
    int d = 50;
    if (g_table.size() != 30) return {false, "candidate table missing"};
    int certified = 0;
    BigFloat rho_bound = pow10(-6, d);
    for (auto& c : g_table)
      if (c.certified && c.rho < rho_bound) ++certified;
    SpectralCandidate corrupted;
    corrupted.q = g_table[0].q;
    corrupted.z = g_table[0].z * BigFloat::from_double(1e6, d);
    ThetaJet jet = theta_jet(corrupted.q, corrupted.z, pow10(-40, d));
    corrupted.residual = max(abs(jet.value), abs(jet.dz));
    SpectralCandidate cert = certify(corrupted, d);
    bool corrupted_fails = !cert.certified;
    return {certified == 30 && corrupted_fails,
            "certification: " + std::to_string(certified) +
                "/30 candidates carry rho < 1e-6; corrupted candidate " +
                (corrupted_fails ? "rejected" : "WRONGLY ACCEPTED")};
  });

  // ---- criterion 11: determinism ------------------------------------------
  run_criterion(11, []() -> std::pair<bool, std::string> {
    if (g_cli.empty()) return {false, "CLI path not supplied"};
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "thetalab_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto sh = [&](const std::string& cmd) {
      int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
      return WEXITSTATUS(rc);
    };
    int rc1 = sh(g_cli + " table --degrees 2,3 --workers 1 --out " + (dir / "t1").string());
    int rc2 = sh(g_cli + " table --degrees 2,3 --workers 2 --out " + (dir / "t2").string());
    int rc3 = sh(g_cli + " stats 8 --out " + (dir / "s1").string());
    int rc4 = sh(g_cli + " stats 8 --workers 2 --out " + (dir / "s2").string());
    int rc5 = sh(g_cli + " boundary 0 1 24 32 --workers 1 --out " + (dir / "b1").string());
    int rc6 = sh(g_cli + " boundary 0 1 24 32 --workers 2 --out " + (dir / "b2").string());
    bool codes = rc1 == 0 && rc2 == 0 && rc3 == 0 && rc4 == 0 && rc5 == 0 && rc6 == 0;
    bool tables = slurp((dir / "t1" / "candidates.json").string()) ==
                      slurp((dir / "t2" / "candidates.json").string()) &&
                  slurp((dir / "t1" / "candidates.csv").string()) ==
                      slurp((dir / "t2" / "candidates.csv").string());
    bool stats = slurp((dir / "s1" / "stats.json").string()) ==
                     slurp((dir / "s2" / "stats.json").string()) &&
                 slurp((dir / "s1" / "psi_roots_m8.csv").string()) ==
                     slurp((dir / "s2" / "psi_roots_m8.csv").string());
    bool bounds = slurp((dir / "b1" / "boundary.json").string()) ==
                  slurp((dir / "b2" / "boundary.json").string());
    bool nonempty = !slurp((dir / "t1" / "candidates.json").string()).empty();
    return {codes && tables && stats && bounds && nonempty,
            std::string("determinism: table/stats/boundary byte-identical across worker counts") +
                (codes ? "" : " (exit codes differ)")};
  });

  std::printf("ACCEPTANCE: %d/11 criteria passed\n", 11 - g_failures);
  return g_failures;
}
