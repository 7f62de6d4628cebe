// Acceptance suite: runs every headline criterion at its stated scale and
// tolerance and prints one PASS/FAIL line per criterion. Exit code is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hiblock/bench.hpp"
#include "hiblock/certificates.hpp"
#include "hiblock/inequalities.hpp"
#include "hiblock/io.hpp"
#include "hiblock/recovery.hpp"

using namespace hiblock;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail = "") {
  std::printf("%s  %s%s%s\n", pass ? "PASS" : "FAIL", name.c_str(),
              detail.empty() ? "" : " — ", detail.c_str());
  if (!pass) ++g_failures;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// --- 1. inequality suites ---------------------------------------------------

void criterion_inequality_suites() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (IneqKind kind : all_inequality_kinds()) {
    const auto res = run_suite(kind, 1000, 20250810);
    if (res.premise_ok < 1000 || res.violations != 0) {
      ok = false;
      detail += to_string(kind) + ": premise_ok=" + std::to_string(res.premise_ok) +
                " violations=" + std::to_string(res.violations) + "; ";
    }
  }
  const double secs = elapsed_s(t0);
  if (secs > 120.0) {
    ok = false;
    detail += "runtime " + std::to_string(secs) + " s exceeds 2 min";
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "14 suites x 1000 instances in %.1f s", secs);
  report("mixed-norm and coherence inequality suites", ok,
         detail.empty() ? buf : detail);
}

// --- 2. coherence surrogate dominance ----------------------------------------

// PSI flavors whose per-child coverage stays uniform (whole known blocks and
// pool-exhausting augmentation), so the delta parameters are defined.
PriorSupport uniform_psi(int flavor, const HierStructure& s, const HierSignal& x,
                         std::uint64_t seed) {
  std::vector<PsiOverlaps> ov(s.n);
  WeightStrategy w = WeightStrategy::zero();
  if (flavor == 1) {
    ov[0].alpha_bar = 1;
  } else if (flavor == 2) {
    long truth_per_block = 1;
    for (int t = 1; t < s.n; ++t) truth_per_block *= s.sparsity[t];
    ov[0].alpha_star_delta =
        (s.mode_block_units(1) - truth_per_block) * s.sparsity[0];
    w = WeightStrategy::scaled(1.0);
  }
  return sample_psi(s, x, ov, w, seed);
}

void criterion_dominance() {
  Rng rng(101);
  long compared = 0, counterexamples = 0, surrogate_certified = 0;
  int flavor = 0;
  while (compared < 500) {
    const auto s = make_structure({4, 3}, 2, {2, 2});
    const double p = 0.02 + 0.1 * rng.uniform();
    const MatrixXd D = near_orthogonal_matrix(24, 24, p, rng);
    const auto x = sample_signal(s, SignalDist::two_pam, rng.next_u64());
    const auto psi = uniform_psi(flavor, s, x, rng.next_u64());
    flavor = (flavor + 1) % 3;
    const VectorXd y = D * x.coeffs;
    std::vector<StepInfo> infos;
    hibomp_p(D, y, s, psi, default_eps(y), [&](const StepInfo& i) {
      if (!i.known) infos.push_back(i);
    });
    ProfileCache cache(D, 2);
    for (const auto& info : infos) {
      const auto ctx = build_step_context(s, x, psi, info);
      const auto t1 = exact_step_terms(D, ctx);
      const auto t2 = coherence_step_terms(s, ctx, cache);
      if (!t1.premise_ok || !t2.premise_ok) continue;
      ++compared;
      if (t2.gbar_star + t2.gbar_circ < 1.0) ++surrogate_certified;
      const bool dominated = t2.gbar_star >= t1.g_star - 1e-9 &&
                             t2.gbar_circ >= t1.g_circ - 1e-9;
      const bool implication = !(t2.gbar_star + t2.gbar_circ < 1.0) ||
                               (t1.g_star + t1.g_circ < 1.0);
      if (!dominated || !implication) ++counterexamples;
    }
  }
  report("coherence surrogate dominates the exact step terms",
         compared >= 500 && counterexamples == 0 && surrogate_certified > 100,
         std::to_string(compared) + " premise-satisfying step comparisons (" +
             std::to_string(surrogate_certified) + " with Gbar sum < 1), " +
             std::to_string(counterexamples) + " counterexamples");
}

// --- 3. ERC soundness --------------------------------------------------------

void criterion_erc_soundness() {
  Rng rng(102);
  long certified = 0, mismatches = 0, attempts = 0;
  int flavor = 0;
  while (certified < 500 && attempts < 5000) {
    ++attempts;
    const auto s = make_structure({6, 3}, 2, {2, 2});
    const MatrixXd D =
        near_orthogonal_matrix(36, 36, 0.02 + 0.04 * rng.uniform(), rng);
    const auto x = sample_signal(s, SignalDist::two_pam, rng.next_u64());
    const auto psi = uniform_psi(flavor, s, x, rng.next_u64());
    flavor = (flavor + 1) % 3;
    const auto report_ = erc_certify(D, x, s, psi);
    if (report_.overall != StepVerdict::certified) continue;
    ++certified;
    if (!report_.support_exact) ++mismatches;
  }
  report("ERC soundness (noiseless)", certified >= 500 && mismatches == 0,
         std::to_string(certified) + " certified instances, " +
             std::to_string(mismatches) + " support mismatches");

  // Noisy analogue: the per-step noise-vector condition implies correct selections.
  long held = 0, wrong = 0;
  attempts = 0;
  while (held < 200 && attempts < 4000) {
    ++attempts;
    const auto s = make_structure({4, 3}, 2, {2, 2});
    const MatrixXd D =
        near_orthogonal_matrix(24, 24, 0.008 + 0.02 * rng.uniform(), rng);
    const auto x = sample_signal(s, SignalDist::two_pam, rng.next_u64());
    const VectorXd clean = D * x.coeffs;
    VectorXd noise(D.rows());
    for (long i = 0; i < noise.size(); ++i) noise[i] = rng.gaussian();
    noise *= (1e-3 * clean.norm()) / noise.norm();
    const double eps = noise.norm();
    const VectorXd y = clean + noise;

    const auto psi = PriorSupport::none(s);
    std::vector<StepInfo> infos;
    const auto run = hibomp_p(D, y, s, psi, eps, [&](const StepInfo& i) {
      if (!i.known) infos.push_back(i);
    });
    ProfileCache cache(D, 2);
    bool all_hold = !infos.empty();
    for (const auto& info : infos) {
      const auto ctx = build_step_context(s, x, psi, info);
      const auto v = noisy_conditions(D, s, ctx, cache, eps, &noise);
      if (!v.premise_ok || !v.holds_noise_vector) {
        all_hold = false;
        break;
      }
    }
    if (!all_hold) continue;
    ++held;
    for (long u : run.support)
      if (!std::binary_search(x.flat_support.begin(), x.flat_support.end(), u))
        ++wrong;
  }
  report("ERC soundness (noisy per-step condition)", held >= 200 && wrong == 0,
         std::to_string(held) + " instances with the condition holding, " +
             std::to_string(wrong) + " wrong selections");
}

// --- 4. paper numerics -------------------------------------------------------

void criterion_paper_numerics() {
  bool ok = true;
  std::string detail;

  const double welch = welch_bound(128, 512);
  if (std::abs(welch - 0.077) > 1e-3 || std::abs(welch - 0.0766218) > 1e-5) {
    ok = false;
    detail += "welch(128,512)=" + std::to_string(welch) + "; ";
  }

  const double eldar = eldar_bound(0.14, 2, 0.0);
  const long k_eldar = static_cast<long>(std::floor((eldar - 1e-12) / 2.0));
  if (std::abs(eldar - 4.5714285714) > 1e-6 || k_eldar != 2) {
    ok = false;
    detail += "eldar=" + std::to_string(eldar) + "; ";
  }

  // Reconstructible-sparsity pipeline at mu_16 = 0.05: nu = 0.077 gives
  // < 6.45 => k_out = 0,
  // nu = 0 gives < 18 => k_out <= 1 (block length 16).
  const double tight = true_block_sparsity_bound(0.05, 0.077, 16, 16, 1.0);
  const double loose = true_block_sparsity_bound(0.05, 0.0, 16, 16, 1.0);
  const long k_tight = static_cast<long>(std::floor((tight - 1e-12) / 16.0));
  const long k_loose = static_cast<long>(std::floor((loose - 1e-12) / 16.0));
  if (std::abs(tight - 6.45) > 0.05 || k_tight != 0) {
    ok = false;
    detail += "welch-nu bound=" + std::to_string(tight) + "; ";
  }
  if (std::abs(loose - 18.0) > 0.05 || k_loose != 1) {
    ok = false;
    detail += "nu=0 bound=" + std::to_string(loose) + "; ";
  }

  if (mu_n_threshold(2, 1, 0) != 0.5) {
    ok = false;
    detail += "mu_n threshold; ";
  }

  // Informational: the empirical max-spectral mu_B of the 128x512 Gaussian
  // ensemble at d = 2 (the reported 0.14 is the formula input, not a value
  // this ensemble's worst-case statistic concentrates on).
  const auto s = make_structure({32, 8}, 2, {1, 6});
  double mu_b_acc = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed)
    mu_b_acc += block_coherence(sample_matrix(128, s, seed).entries, 2);
  const double mu_b_mean = mu_b_acc / 3.0;

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "welch=%.4f eldar=%.3f bounds=(%.2f, %.1f) mu_n=0.5 "
                "(empirical max mu_B=%.3f, informational)",
                welch, eldar, tight, loose, mu_b_mean);
  report("reported numeric values (welch, eldar, sparsity pipeline, mu_n)", ok,
         detail.empty() ? buf : detail);
}

// --- 5. degeneration identities ----------------------------------------------

void criterion_degenerations() {
  Rng rng(103);
  bool ok = true;
  std::string detail;

  auto identical = [](const RecoveryResult& a, const RecoveryResult& b) {
    return a.support == b.support && a.estimate == b.estimate;
  };

  long bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = make_structure({12}, 2, {3});
    const auto D = sample_matrix(20, s, rng.next_u64());
    const auto x = sample_signal(s, SignalDist::gaussian, rng.next_u64());
    const VectorXd y = D.entries * x.coeffs;
    const double eps = default_eps(y);
    if (!identical(hibomp_p(D.entries, y, s, PriorSupport::none(s), eps),
                   bomp(D.entries, y, 2, 3, eps)))
      ++bad;
  }
  if (bad) {
    ok = false;
    detail += "hibomp_p(empty,n=1) vs bomp: " + std::to_string(bad) + " diffs; ";
  }

  bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = make_structure({6, 4}, 1, {2, 2});
    const auto D = sample_matrix(18, s, rng.next_u64());
    const auto x = sample_signal(s, SignalDist::gaussian, rng.next_u64());
    const VectorXd y = D.entries * x.coeffs;
    const double eps = default_eps(y);
    if (!identical(hibomp(D.entries, y, s, eps), hiomp(D.entries, y, s, eps)))
      ++bad;
  }
  if (bad) {
    ok = false;
    detail += "hibomp(d=1) vs hiomp: " + std::to_string(bad) + " diffs; ";
  }

  bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = make_structure({8, 4}, 2, {2, 2});
    const auto D = sample_matrix(32, s, rng.next_u64());
    const auto x = sample_signal(s, SignalDist::gaussian, rng.next_u64());
    std::vector<PsiOverlaps> ov(2);
    ov[0].alpha_star_delta = 2;
    const auto psi =
        sample_psi(s, x, ov, WeightStrategy::zero(), rng.next_u64());
    const VectorXd y = D.entries * x.coeffs;
    const double eps = default_eps(y);
    if (!identical(hibomp_p(D.entries, y, s, psi, eps),
                   hibomp(D.entries, y, s, eps)))
      ++bad;
  }
  if (bad) {
    ok = false;
    detail += "zero-weight hibomp_p vs hibomp: " + std::to_string(bad) + " diffs; ";
  }

  report("degeneration identities (3 x 100 seeded instances, bit-identical)",
         ok, detail.empty() ? "300/300 identical" : detail);
}

// --- 6. brute-force equivalence ----------------------------------------------

namespace brute {

void enumerate(const HierStructure& s, int mode, const std::vector<long>& parents,
               std::vector<long>& chosen,
               const std::function<void(const std::vector<long>&)>& emit) {
  if (mode > s.n) {
    emit(chosen);
    return;
  }
  const int nt = s.dims[mode - 1], kt = s.sparsity[mode - 1];
  std::vector<std::vector<long>> picks;
  std::function<void(std::size_t)> per_parent = [&](std::size_t pi) {
    if (pi == parents.size()) {
      std::vector<long> next;
      for (const auto& sel : picks) next.insert(next.end(), sel.begin(), sel.end());
      if (mode == s.n) {
        chosen = next;
        emit(chosen);
      } else {
        enumerate(s, mode + 1, next, chosen, emit);
      }
      return;
    }
    std::vector<int> combo(kt);
    std::function<void(int, int)> choose = [&](int start, int depth) {
      if (depth == kt) {
        std::vector<long> sel;
        for (int c : combo) sel.push_back(parents[pi] * nt + c);
        picks.push_back(sel);
        per_parent(pi + 1);
        picks.pop_back();
        return;
      }
      for (int c = start; c <= nt - (kt - depth); ++c) {
        combo[depth] = c;
        choose(c + 1, depth + 1);
      }
    };
    choose(0, 0);
  };
  per_parent(0);
}

std::vector<long> best_support(const MatrixXd& D, const VectorXd& y,
                               const HierStructure& s) {
  std::vector<long> best, scratch;
  double best_res = std::numeric_limits<double>::infinity();
  enumerate(s, 1, {0}, scratch, [&](const std::vector<long>& units) {
    MatrixXd A(D.rows(), static_cast<long>(units.size()) * s.unit_block);
    for (std::size_t i = 0; i < units.size(); ++i)
      A.middleCols(static_cast<long>(i) * s.unit_block, s.unit_block) =
          D.middleCols(units[i] * s.unit_block, s.unit_block);
    const VectorXd c = (A.transpose() * A).ldlt().solve(A.transpose() * y);
    const double res = (y - A * c).norm();
    if (res < best_res) {
      best_res = res;
      best = units;
      std::sort(best.begin(), best.end());
    }
  });
  return best;
}

}  // namespace brute

void criterion_brute_force() {
  Rng rng(104);
  long certified = 0, mismatches = 0, attempts = 0;
  while (certified < 100 && attempts < 1500) {
    ++attempts;
    const auto s = make_structure({8, 4}, 2, {2, 2});  // N = 64, k = 4
    const MatrixXd D =
        near_orthogonal_matrix(64, 64, 0.02 + 0.05 * rng.uniform(), rng);
    const auto x = sample_signal(s, SignalDist::two_pam, rng.next_u64());
    const auto cert = erc_certify(D, x, s, PriorSupport::none(s));
    if (cert.overall != StepVerdict::certified) continue;
    ++certified;
    const VectorXd y = D * x.coeffs;
    const auto run = hibomp(D, y, s, default_eps(y));
    if (run.support != brute::best_support(D, y, s)) ++mismatches;
  }
  report("brute-force equivalence (N=64, k=4, ERC-certified instances)",
         certified >= 100 && mismatches == 0,
         std::to_string(certified) + " certified, " +
             std::to_string(mismatches) + " mismatches");
}

// --- 7. figure reproduction at desk scale -------------------------------------

double err_of(const std::vector<SweepRow>& rows, double point,
              const std::string& alg) {
  for (const auto& r : rows)
    if (r.point == point && r.algorithm == alg) return r.err;
  return -1;
}

double bernoulli_se(double p, int n) {
  return std::sqrt(std::max(p * (1 - p), 1e-9) / n);
}

void criterion_figures() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;

  auto all = presets();
  auto fig3 = all["fig3-sub-a"];
  fig3.trials = 100;
  fig3.master_seed = 2025;
  const auto rows3 = sweep(fig3);

  // ERR non-increasing in k_out within 2 standard errors, per algorithm.
  for (const auto& alg : fig3.algorithms) {
    if (!alg.enabled) continue;
    for (std::size_t i = 1; i < fig3.axis.values.size(); ++i) {
      const double prev = err_of(rows3, fig3.axis.values[i - 1], alg.id);
      const double cur = err_of(rows3, fig3.axis.values[i], alg.id);
      const double slack = 2.0 * std::hypot(bernoulli_se(prev, 100),
                                            bernoulli_se(cur, 100));
      if (cur > prev + slack) {
        ok = false;
        detail += alg.id + " ERR increases at k_out=" +
                  std::to_string(fig3.axis.values[i]) + "; ";
      }
    }
  }

  // Mean ERR ordering on shared trials: P3 >= HiBOMP >= BOMP >= OMP.
  const std::vector<std::string> order = {"hibomp-p3", "hibomp", "bomp", "omp"};
  for (double point : fig3.axis.values) {
    for (std::size_t i = 1; i < order.size(); ++i) {
      const double hi = err_of(rows3, point, order[i - 1]);
      const double lo = err_of(rows3, point, order[i]);
      const double slack = 2.0 * std::hypot(bernoulli_se(hi, 100),
                                            bernoulli_se(lo, 100));
      if (hi < lo - slack) {
        ok = false;
        detail += order[i - 1] + " < " + order[i] + " at k_out=" +
                  std::to_string(point) + "; ";
      }
    }
  }

  // fig4 presets: at the top SNR point P3's mean NMSE is at most HiBOMP's.
  for (const char* name : {"fig4-a", "fig4-b"}) {
    auto fig4 = all[name];
    fig4.trials = 100;
    fig4.master_seed = 2025;
    const auto rows4 = sweep(fig4);
    const double top = fig4.axis.values.back();
    double nmse_p3 = -1, nmse_h = -1;
    for (const auto& r : rows4) {
      if (r.point != top) continue;
      if (r.algorithm == "hibomp-p3") nmse_p3 = r.nmse_mean;
      if (r.algorithm == "hibomp") nmse_h = r.nmse_mean;
    }
    if (!(nmse_p3 >= 0 && nmse_h >= 0 && nmse_p3 <= nmse_h)) {
      ok = false;
      detail += std::string(name) + " top-SNR NMSE p3=" +
                std::to_string(nmse_p3) + " vs hibomp=" + std::to_string(nmse_h) +
                "; ";
    }
  }

  // Trend check only (not asserted): non-support PSI should not help, so
  // HiBOMP-P2's mean ERR tends to sit at or below plain HiBOMP's.
  double p2_mean = 0, h_mean = 0;
  for (const auto& r : rows3) {
    if (r.algorithm == "hibomp-p2") p2_mean += r.err;
    if (r.algorithm == "hibomp") h_mean += r.err;
  }
  p2_mean /= static_cast<double>(fig3.axis.values.size());
  h_mean /= static_cast<double>(fig3.axis.values.size());

  const double secs = elapsed_s(t0);
  if (secs > 600) {
    ok = false;
    detail += "runtime " + std::to_string(secs) + " s exceeds 10 min";
  }
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "100 trials/point in %.1f s (trend: mean ERR p2=%.3f vs "
                "hibomp=%.3f)",
                secs, p2_mean, h_mean);
  report("fig 3/4 qualitative reproduction at desk scale", ok,
         detail.empty() ? buf : detail);
}

// --- 8. determinism across worker counts --------------------------------------

void criterion_determinism() {
  auto cfg = presets()["fig3-sub-a"];
  cfg.trials = 20;
  cfg.master_seed = 7;
  cfg.axis.values = {1, 3};
  const std::string w1 = sweep_csv(sweep(cfg, 1));
  const std::string w2 = sweep_csv(sweep(cfg, 2));
  const std::string w5 = sweep_csv(sweep(cfg, 5));
  const std::string re = sweep_csv(sweep(cfg, 2));
  const bool ok = w1 == w2 && w1 == w5 && w1 == re;
  report("sweep determinism across worker counts (byte-identical CSV)", ok);
}

// --- 9. sensitivity signs ------------------------------------------------------

void criterion_sensitivity() {
  Rng rng(105);
  bool ok = true;
  std::string detail;

  // K* partial derivative signs at 20 admissible points.
  for (int trial = 0; trial < 20; ++trial) {
    const double mu = 0.02 + 0.1 * rng.uniform();
    const double nu = 0.01 + 0.05 * rng.uniform();
    const int d_star = 2 + static_cast<int>(rng.below(6));
    const int d_delta = 1 + static_cast<int>(rng.below(6));
    const double kp = 1.0 + static_cast<double>(rng.below(4));
    const double base = kstar_bound(mu, nu, d_star, d_delta, kp);
    if (!(kstar_bound(mu + 1e-5, nu, d_star, d_delta, kp) < base) ||
        !(kstar_bound(mu, nu + 1e-5, d_star, d_delta, kp) < base) ||
        !(kstar_bound(mu, nu, d_star, d_delta + d_star, kp) < base)) {
      ok = false;
      detail += "K* sign failure at trial " + std::to_string(trial) + "; ";
    }
  }

  // Exact-step-term norm sensitivity signs at 20 admissible step contexts.
  int checked = 0;
  while (checked < 20) {
    const auto s = make_structure({5, 3}, 2, {2, 2});
    const MatrixXd D = near_orthogonal_matrix(30, 30, 0.08, rng);
    const auto x = sample_signal(s, SignalDist::gaussian, rng.next_u64());
    const auto psi = PriorSupport::none(s);
    const VectorXd y = D * x.coeffs;
    std::vector<StepInfo> infos;
    hibomp_p(D, y, s, psi, default_eps(y), [&](const StepInfo& i) {
      if (!i.known) infos.push_back(i);
    });
    for (const auto& info : infos) {
      const auto ctx = build_step_context(s, x, psi, info);
      const auto base = exact_step_terms(D, ctx);
      if (!base.premise_ok || base.norm_circ == 0.0) continue;
      auto scaled = [&](const std::vector<std::vector<long>>& groups, double f) {
        StepContext c2 = ctx;
        for (const auto& g : groups)
          for (long u : g) c2.x_rem.segment(u * 2, 2) *= f;
        return exact_step_terms(D, c2);
      };
      const auto up_circ = scaled(ctx.circ_groups, 1.05);
      const auto up_star = scaled(ctx.star_groups, 1.05);
      if (!up_circ.premise_ok || !up_star.premise_ok) continue;
      if (!(up_circ.g_star > base.g_star && up_circ.g_circ > base.g_circ &&
            up_star.g_star < base.g_star && up_star.g_circ < base.g_circ)) {
        ok = false;
        detail += "step-term sign failure; ";
      }
      ++checked;
      break;
    }
  }

  report("sensitivity signs (K* and step-term norm partials)", ok,
         detail.empty() ? "20 points each, all signs correct" : detail);
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion_inequality_suites();
  criterion_dominance();
  criterion_erc_soundness();
  criterion_paper_numerics();
  criterion_degenerations();
  criterion_brute_force();
  criterion_figures();
  criterion_determinism();
  criterion_sensitivity();
  std::printf("acceptance finished in %.1f s with %d failure(s)\n",
              elapsed_s(t0), g_failures);
  return g_failures;
}
