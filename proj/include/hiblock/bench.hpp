#pragma once

// Monte Carlo experiment engine: per-trial data generation, metric
// computation, deterministic parallel sweeps and the benchmark-preset
// configurations. Per-trial seeds are a splittable hash of
// (master_seed, point, trial), so results are independent of worker count
// and of which other points are in the sweep.

#include <Eigen/Dense>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "hiblock/model.hpp"
#include "hiblock/recovery.hpp"

namespace hiblock {

enum class AlgoKind { omp, bomp, mols, hiomp, hibomp, hibomp_p };
enum class PsiVariant { none, p1, p2, p3 };

struct AlgoSpec {
  std::string id;
  AlgoKind kind = AlgoKind::omp;
  PsiVariant psi = PsiVariant::none;
  bool enabled = true;
  std::string note;
};

struct NoiseSpec {
  enum class Kind { none, snr_db };
  Kind kind = Kind::none;
  double snr_db = 0.0;
};

struct SweepAxis {
  enum class Kind { k_out, snr };
  Kind kind = Kind::k_out;
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string name;
  int M = 0;
  HierStructure structure;
  SignalDist dist = SignalDist::gaussian;
  NoiseSpec noise;
  std::vector<AlgoSpec> algorithms;
  int trials = 1;
  std::uint64_t master_seed = 0;
  SweepAxis axis;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  std::string algorithm;
  bool exact = false;
  double nmse = 0.0;
  double false_alarm = 0.0;
  int iterations = 0;
  long runtime_ns = 0;
  bool psi_infeasible = false;
};

inline double metric_err(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw DomainError("metric_err: empty record set");
  long exact = 0;
  for (const auto& r : records) exact += r.exact ? 1 : 0;
  return static_cast<double>(exact) / static_cast<double>(records.size());
}

inline double metric_nmse(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw DomainError("metric_nmse: empty record set");
  double acc = 0.0;
  for (const auto& r : records) acc += r.nmse;
  return acc / static_cast<double>(records.size());
}

// |est \ truth| / denom, with sets at unit-block granularity and denom in
// coefficients (k_out k_in d).
inline double metric_false_alarm(const std::vector<long>& est_support,
                                 const std::vector<long>& true_support, int d,
                                 long denom_coeffs) {
  if (denom_coeffs <= 0) throw DomainError("metric_false_alarm: bad denominator");
  long wrong = 0;
  for (long u : est_support)
    if (!std::binary_search(true_support.begin(), true_support.end(), u)) ++wrong;
  return static_cast<double>(wrong * d) / static_cast<double>(denom_coeffs);
}

// PSI overlap counts for the benchmark P1/P2/P3 variants against a structure.
inline std::vector<PsiOverlaps> psi_variant_overlaps(PsiVariant variant,
                                                     const HierStructure& s) {
  std::vector<PsiOverlaps> ov(s.n);
  const long k_out = s.sparsity[0];
  switch (variant) {
    case PsiVariant::none:
      break;
    case PsiVariant::p1:
      ov[0].alpha_bar = static_cast<long>(std::ceil(0.2 * k_out));
      break;
    case PsiVariant::p2:
      ov[0].alpha_bar = static_cast<long>(std::ceil(0.2 * k_out));
      ov[0].beta = static_cast<long>(std::ceil(0.2 * s.sparsity[s.n - 1]));
      break;
    case PsiVariant::p3:
      if (s.n >= 2) {
        // Additional-support slots per active outer block (d_out/d - k_in in
        // the 2-mode case), totalled over the k_out active blocks; this
        // exhausts the pool, so every active block gets the same count.
        const long units_per_block = s.mode_block_units(1);
        long true_per_block = 1;
        for (int t = 1; t < s.n; ++t) true_per_block *= s.sparsity[t];
        ov[0].alpha_star_delta = (units_per_block - true_per_block) * k_out;
      }
      break;
  }
  return ov;
}

inline WeightStrategy psi_variant_weights(PsiVariant variant) {
  return variant == PsiVariant::p3 ? WeightStrategy::scaled(1.0)
                                   : WeightStrategy::zero();
}

namespace detail {

inline HierStructure structure_at_point(const ExperimentConfig& cfg, double point) {
  HierStructure s = cfg.structure;
  if (cfg.axis.kind == SweepAxis::Kind::k_out)
    s.sparsity[0] = static_cast<int>(point);
  return s;
}

inline NoiseSpec noise_at_point(const ExperimentConfig& cfg, double point) {
  NoiseSpec n = cfg.noise;
  if (cfg.axis.kind == SweepAxis::Kind::snr) {
    n.kind = NoiseSpec::Kind::snr_db;
    n.snr_db = point;
  }
  return n;
}

}  // namespace detail

inline std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg,
                                          int point_index, int trial_index) {
  const double point = cfg.axis.values.at(point_index);
  const HierStructure s = detail::structure_at_point(cfg, point);
  const NoiseSpec noise = detail::noise_at_point(cfg, point);
  const std::uint64_t trial_seed =
      derive_seed(cfg.master_seed, static_cast<std::uint64_t>(point_index),
                  static_cast<std::uint64_t>(trial_index));

  const MeasurementMatrix D = sample_matrix(cfg.M, s, derive_seed(trial_seed, 1));
  const HierSignal x = sample_signal(s, cfg.dist, derive_seed(trial_seed, 2));
  VectorXd y = D.entries * x.coeffs;
  double eps = default_eps(y);
  if (noise.kind == NoiseSpec::Kind::snr_db) {
    Rng rng(derive_seed(trial_seed, 3));
    VectorXd n(y.size());
    for (long i = 0; i < n.size(); ++i) n[i] = rng.gaussian();
    const double target = y.norm() * std::pow(10.0, -noise.snr_db / 20.0);
    if (n.norm() > 0) n *= target / n.norm();
    y += n;
    eps = target;  // stopping rule ||r|| <= eps with eps the noise bound
  }

  std::vector<TrialRecord> records;
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    const AlgoSpec& spec = cfg.algorithms[a];
    if (!spec.enabled) continue;
    TrialRecord rec;
    rec.seed = trial_seed;
    rec.algorithm = spec.id;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      RecoveryResult result;
      switch (spec.kind) {
        case AlgoKind::omp:
          result = omp(D.entries, y,
                       static_cast<int>(s.block_sparsity()) * s.unit_block, eps);
          break;
        case AlgoKind::bomp:
          result = bomp(D.entries, y, s.unit_block,
                        static_cast<int>(s.block_sparsity()), eps);
          break;
        case AlgoKind::mols:
          result = mols(D.entries, y, s, eps);
          break;
        case AlgoKind::hiomp:
          result = hiomp(D.entries, y, s, eps);
          break;
        case AlgoKind::hibomp:
          result = hibomp(D.entries, y, s, eps);
          break;
        case AlgoKind::hibomp_p: {
          const PriorSupport psi =
              sample_psi(s, x, psi_variant_overlaps(spec.psi, s),
                         psi_variant_weights(spec.psi),
                         derive_seed(trial_seed, 4, static_cast<std::uint64_t>(a)));
          result = hibomp_p(D.entries, y, s, psi, eps);
          break;
        }
      }
      rec.iterations = static_cast<int>(result.residual_norm_history.size()) - 1;
      const double xnorm2 = x.coeffs.squaredNorm();
      rec.nmse = (result.estimate - x.coeffs).squaredNorm() / xnorm2;
      // Compare supports at coefficient granularity: omp/hiomp run on the
      // d = 1 reinterpretation, everything else emits d-length unit blocks.
      const int d_alg =
          (spec.kind == AlgoKind::omp || spec.kind == AlgoKind::hiomp)
              ? 1
              : s.unit_block;
      std::vector<long> est_coeffs, true_coeffs;
      for (long u : result.support)
        for (int j = 0; j < d_alg; ++j) est_coeffs.push_back(u * d_alg + j);
      for (long u : x.flat_support)
        for (int j = 0; j < s.unit_block; ++j)
          true_coeffs.push_back(u * s.unit_block + j);
      rec.false_alarm = metric_false_alarm(est_coeffs, true_coeffs, 1,
                                           s.block_sparsity() * s.unit_block);
      const bool support_equal = est_coeffs == true_coeffs;
      const bool noiseless = noise.kind == NoiseSpec::Kind::none;
      rec.exact = support_equal && (!noiseless || std::sqrt(rec.nmse) < 1e-6);
    } catch (const PsiInfeasible&) {
      rec.psi_infeasible = true;
      rec.exact = false;
      rec.nmse = 1.0;
      rec.false_alarm = 1.0;
    }
    rec.runtime_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    records.push_back(std::move(rec));
  }
  return records;
}

struct SweepRow {
  double point = 0.0;
  std::string algorithm;
  double err = 0.0;
  double nmse_mean = 0.0;
  double false_alarm_mean = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

inline int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HIBLK_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Trials are independent work items written into preallocated slots, so the
// aggregation is identical for any worker count.
inline std::vector<SweepRow> sweep(const ExperimentConfig& cfg, int workers = 0) {
  if (cfg.trials < 1) throw DomainError("sweep: trials must be >= 1");
  for (std::size_t i = 1; i < cfg.axis.values.size(); ++i)
    if (!(cfg.axis.values[i - 1] < cfg.axis.values[i]))
      throw DomainError("sweep: axis values must be strictly increasing");

  const int npoints = static_cast<int>(cfg.axis.values.size());
  const long total = static_cast<long>(npoints) * cfg.trials;
  std::vector<std::vector<TrialRecord>> slots(total);

  const int nworkers = worker_count(workers);
  std::atomic<long> cursor{0};
  auto work = [&] {
    for (long idx = cursor.fetch_add(1); idx < total; idx = cursor.fetch_add(1)) {
      const int p = static_cast<int>(idx / cfg.trials);
      const int t = static_cast<int>(idx % cfg.trials);
      slots[idx] = run_trial(cfg, p, t);
    }
  };
  if (nworkers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nworkers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::vector<SweepRow> rows;
  for (int p = 0; p < npoints; ++p) {
    for (const auto& spec : cfg.algorithms) {
      if (!spec.enabled) continue;
      std::vector<TrialRecord> per_alg;
      for (int t = 0; t < cfg.trials; ++t)
        for (const auto& rec : slots[static_cast<long>(p) * cfg.trials + t])
          if (rec.algorithm == spec.id) per_alg.push_back(rec);
      if (per_alg.empty()) continue;
      SweepRow row;
      row.point = cfg.axis.values[p];
      row.algorithm = spec.id;
      row.err = metric_err(per_alg);
      row.nmse_mean = metric_nmse(per_alg);
      double fa = 0.0;
      for (const auto& rec : per_alg) fa += rec.false_alarm;
      row.false_alarm_mean = fa / static_cast<double>(per_alg.size());
      row.trials = static_cast<int>(per_alg.size());
      row.seed = cfg.master_seed;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// --- Paper presets ---------------------------------------------------------

namespace detail {

inline std::vector<AlgoSpec> paper_roster() {
  return {
      {"omp", AlgoKind::omp, PsiVariant::none, true, ""},
      {"bomp", AlgoKind::bomp, PsiVariant::none, true, ""},
      {"mols", AlgoKind::mols, PsiVariant::none, false,
       "external baseline; register recovery MolsSlot::hook to enable"},
      {"hiomp", AlgoKind::hiomp, PsiVariant::none, true, ""},
      {"hibomp", AlgoKind::hibomp, PsiVariant::none, true, ""},
      {"hibomp-p1", AlgoKind::hibomp_p, PsiVariant::p1, true, ""},
      {"hibomp-p2", AlgoKind::hibomp_p, PsiVariant::p2, true, ""},
      {"hibomp-p3", AlgoKind::hibomp_p, PsiVariant::p3, true, ""},
  };
}

}  // namespace detail

inline std::map<std::string, ExperimentConfig> presets() {
  std::map<std::string, ExperimentConfig> out;

  // N=400, d_out=16, d=4, k_in=2: dims {25, 4}.
  auto small = [](int k_out) {
    return make_structure({25, 4}, 4, {k_out, 2});
  };
  // N=512, d_out=16, d=2, k_in=6: dims {32, 8}.
  auto main_cfg = [](int k_out) {
    return make_structure({32, 8}, 2, {k_out, 6});
  };

  {
    ExperimentConfig c;
    c.name = "fig3-sub-a";
    c.M = 80;
    c.structure = small(1);
    c.dist = SignalDist::two_pam;
    c.algorithms = detail::paper_roster();
    c.trials = 1000;
    c.axis = {SweepAxis::Kind::k_out, {1, 2, 3, 4, 5}};
    out[c.name] = c;
  }
  {
    ExperimentConfig c;
    c.name = "fig3-sub-b";
    c.M = 40;
    c.structure = small(1);
    c.dist = SignalDist::two_pam;
    c.algorithms = detail::paper_roster();
    c.trials = 1000;
    c.axis = {SweepAxis::Kind::k_out, {1, 2, 3, 4, 5}};
    out[c.name] = c;
  }
  {
    ExperimentConfig c;
    c.name = "fig3-main";
    c.M = 128;
    c.structure = main_cfg(1);
    c.dist = SignalDist::two_pam;
    c.algorithms = detail::paper_roster();
    c.trials = 1000;
    c.axis = {SweepAxis::Kind::k_out, {1, 2, 3, 4}};
    out[c.name] = c;
  }
  {
    ExperimentConfig c;
    c.name = "fig4-a";
    c.M = 80;
    c.structure = small(1);
    c.dist = SignalDist::gaussian;
    c.noise = {NoiseSpec::Kind::snr_db, 0.0};
    c.algorithms = detail::paper_roster();
    c.trials = 1000;
    c.axis = {SweepAxis::Kind::snr, {0, 10, 20, 30}};
    out[c.name] = c;
  }
  {
    ExperimentConfig c;
    c.name = "fig4-b";
    c.M = 40;
    c.structure = small(2);
    c.dist = SignalDist::gaussian;
    c.noise = {NoiseSpec::Kind::snr_db, 0.0};
    c.algorithms = detail::paper_roster();
    c.trials = 1000;
    c.axis = {SweepAxis::Kind::snr, {0, 10, 20, 30}};
    out[c.name] = c;
  }
  return out;
}

}  // namespace hiblock
