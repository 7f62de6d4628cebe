#pragma once

// Hierarchical block-sparse signal model: the n-mode structure, signal /
// measurement-matrix ensembles and prior-support-information (PSI) index
// sets. Unit-block indices are 0-based throughout; an index names one block
// of d consecutive coefficients.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hiblock/rng.hpp"

namespace hiblock {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Domain errors map to CLI exit code 1.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PsiInfeasible : DomainError {
  using DomainError::DomainError;
};

struct HierStructure {
  int n = 0;                  // number of hierarchical modes
  std::vector<int> dims;      // N_1..N_n
  int unit_block = 1;         // d
  std::vector<int> sparsity;  // k_1..k_n

  long total_dim() const {  // ambient dimension N
    long v = unit_block;
    for (int m : dims) v *= m;
    return v;
  }
  long unit_count() const { return total_dim() / unit_block; }
  long block_sparsity() const {  // k = k_1 * ... * k_n
    long v = 1;
    for (int k : sparsity) v *= k;
    return v;
  }
  // Units per mode-t block, i.e. N_{t+1}*...*N_n  (t in 1..n).
  long mode_block_units(int t) const {
    long v = 1;
    for (int j = t; j < n; ++j) v *= dims[j];
    return v;
  }
  long mode_block_len(int t) const { return mode_block_units(t) * unit_block; }
  // Total number of mode-t blocks, N_1*...*N_t.
  long mode_block_count(int t) const {
    long v = 1;
    for (int j = 0; j < t; ++j) v *= dims[j];
    return v;
  }
};

inline HierStructure make_structure(const std::vector<int>& dims, int d,
                                    const std::vector<int>& sparsity) {
  if (dims.empty() || dims.size() != sparsity.size())
    throw DomainError("make_structure: dims/sparsity length mismatch");
  if (d <= 0) throw DomainError("make_structure: unit block must be positive");
  for (std::size_t t = 0; t < dims.size(); ++t) {
    if (dims[t] <= 0) throw DomainError("make_structure: non-positive dimension");
    if (sparsity[t] <= 0 || sparsity[t] > dims[t])
      throw DomainError("make_structure: sparsity k_" + std::to_string(t + 1) +
                        " out of range [1, N_" + std::to_string(t + 1) + "]");
  }
  HierStructure s;
  s.n = static_cast<int>(dims.size());
  s.dims = dims;
  s.unit_block = d;
  s.sparsity = sparsity;
  return s;
}

// Contiguous coefficient range [first, last) of the block named by `path`
// (one child index per mode, up to `mode` entries).
inline std::pair<long, long> block_indices(const HierStructure& s, int mode,
                                           const std::vector<int>& path) {
  if (mode < 0 || mode > s.n || static_cast<int>(path.size()) != mode)
    throw DomainError("block_indices: path length must equal mode");
  long first = 0;
  for (int t = 0; t < mode; ++t) {
    if (path[t] < 0 || path[t] >= s.dims[t])
      throw DomainError("block_indices: path entry out of range");
    first += static_cast<long>(path[t]) * s.mode_block_len(t + 1);
  }
  return {first, first + s.mode_block_len(mode)};
}

// Same range expressed in unit-block indices.
inline std::pair<long, long> block_units(const HierStructure& s, int mode,
                                         const std::vector<int>& path) {
  auto [a, b] = block_indices(s, mode, path);
  return {a / s.unit_block, b / s.unit_block};
}

struct HierSignal {
  VectorXd coeffs;                             // length N
  std::vector<std::vector<long>> support_tree;  // per mode: global block ids, sorted
  std::vector<long> flat_support;               // nonzero unit blocks, sorted
};

enum class SignalDist { gaussian, two_pam };

inline HierSignal sample_signal(const HierStructure& s, SignalDist dist,
                                std::uint64_t rng_seed) {
  Rng rng(derive_seed(rng_seed, 0x5167u));
  HierSignal x;
  x.coeffs = VectorXd::Zero(s.total_dim());
  x.support_tree.resize(s.n);

  // Active block ids per mode, grown breadth-first: each active mode-(t-1)
  // block draws k_t of its N_t children uniformly without replacement.
  std::vector<long> parents = {0};
  for (int t = 1; t <= s.n; ++t) {
    std::vector<long> actives;
    for (long p : parents) {
      std::vector<int> pool(s.dims[t - 1]);
      for (int i = 0; i < s.dims[t - 1]; ++i) pool[i] = i;
      for (int j = 0; j < s.sparsity[t - 1]; ++j) {
        const std::size_t pick = j + rng.below(pool.size() - j);
        std::swap(pool[j], pool[pick]);
        actives.push_back(p * s.dims[t - 1] + pool[j]);
      }
    }
    std::sort(actives.begin(), actives.end());
    x.support_tree[t - 1] = actives;
    parents = actives;
  }
  // Innermost actives are the nonzero unit blocks.
  x.flat_support = x.support_tree.back();
  for (long u : x.flat_support) {
    for (int j = 0; j < s.unit_block; ++j) {
      const long idx = u * s.unit_block + j;
      x.coeffs[idx] = (dist == SignalDist::gaussian) ? rng.gaussian() : rng.sign();
    }
  }
  return x;
}

// Annotates a raw coefficient vector with its support tree; rejects vectors
// whose nonzero pattern does not fit the structure's per-mode sparsity.
inline HierSignal signal_from_coeffs(const HierStructure& s, VectorXd coeffs) {
  if (coeffs.size() != s.total_dim())
    throw DomainError("signal_from_coeffs: wrong coefficient length");
  HierSignal x;
  x.coeffs = std::move(coeffs);
  for (long u = 0; u < s.unit_count(); ++u)
    if (x.coeffs.segment(u * s.unit_block, s.unit_block).norm() > 0)
      x.flat_support.push_back(u);
  x.support_tree.assign(s.n, {});
  x.support_tree[s.n - 1] = x.flat_support;
  for (int t = s.n - 1; t >= 1; --t) {
    std::set<long> parents;
    for (long b : x.support_tree[t]) parents.insert(b / s.dims[t]);
    x.support_tree[t - 1].assign(parents.begin(), parents.end());
  }
  // Per-parent child counts must match the sparsity pattern exactly.
  for (int t = 1; t <= s.n; ++t) {
    std::map<long, long> children_of;
    for (long b : x.support_tree[t - 1]) ++children_of[t >= 2 ? b / s.dims[t - 1] : 0];
    for (const auto& [parent, count] : children_of)
      if (count != s.sparsity[t - 1])
        throw DomainError(
            "signal_from_coeffs: support does not match sparsity at mode " +
            std::to_string(t));
  }
  return x;
}

struct MeasurementMatrix {
  MatrixXd entries;
  bool column_norms_unit = false;
};

inline MeasurementMatrix sample_matrix(int M, const HierStructure& s,
                                       std::uint64_t rng_seed) {
  if (M < 1) throw DomainError("sample_matrix: M must be >= 1");
  Rng rng(derive_seed(rng_seed, 0xd1c7u));
  const long N = s.total_dim();
  MeasurementMatrix D;
  D.entries.resize(M, N);
  const double sigma = 1.0 / std::sqrt(static_cast<double>(M));
  for (long j = 0; j < N; ++j)
    for (int i = 0; i < M; ++i) D.entries(i, j) = sigma * rng.gaussian();
  for (long j = 0; j < N; ++j) {
    const double nrm = D.entries.col(j).norm();
    if (nrm > 0) D.entries.col(j) /= nrm;
  }
  D.column_norms_unit = true;
  return D;
}

// --- Prior support information -------------------------------------------

struct WeightStrategy {
  enum class Kind { zero, scaled_correlation, user_supplied };
  Kind kind = Kind::scaled_correlation;
  double c = 1.0;       // scale for scaled_correlation
  VectorXd weights;     // length-N vector for user_supplied

  static WeightStrategy zero() { return {Kind::zero, 0.0, {}}; }
  static WeightStrategy scaled(double c = 1.0) {
    return {Kind::scaled_correlation, c, {}};
  }
  static WeightStrategy user(VectorXd w) {
    return {Kind::user_supplied, 0.0, std::move(w)};
  }
};

// Requested overlap counts for one mode (totals per mode; alpha_bar counts
// whole mode-t blocks, everything else counts unit blocks).
struct PsiOverlaps {
  long alpha_star = 0;
  long alpha_bar = 0;
  long alpha_delta = 0;
  long alpha_star_delta = 0;
  long beta = 0;
  long gamma = 0;
  bool all_zero() const {
    return !(alpha_star | alpha_bar | alpha_delta | alpha_star_delta | beta | gamma);
  }
};

struct PsiMode {
  // The four disjoint partitions of theta (unit-block ids, sorted).
  std::vector<long> theta_star, theta_delta, theta_minus, theta_circ;
  // Disjoint augmentation set (unit-block ids, sorted).
  std::vector<long> theta_star_delta;
  PsiOverlaps counts;  // as drawn

  std::vector<long> theta() const {
    std::vector<long> all;
    all.reserve(theta_star.size() + theta_delta.size() + theta_minus.size() +
                theta_circ.size());
    all.insert(all.end(), theta_star.begin(), theta_star.end());
    all.insert(all.end(), theta_delta.begin(), theta_delta.end());
    all.insert(all.end(), theta_minus.begin(), theta_minus.end());
    all.insert(all.end(), theta_circ.begin(), theta_circ.end());
    std::sort(all.begin(), all.end());
    return all;
  }
  bool empty() const {
    return theta_star.empty() && theta_delta.empty() && theta_minus.empty() &&
           theta_circ.empty() && theta_star_delta.empty();
  }
};

struct PriorSupport {
  std::vector<PsiMode> modes;  // one per hierarchical mode
  WeightStrategy weight_strategy = WeightStrategy::scaled(1.0);

  static PriorSupport none(const HierStructure& s) {
    PriorSupport p;
    p.modes.resize(s.n);
    p.weight_strategy = WeightStrategy::zero();
    return p;
  }
  bool theta_empty() const {
    for (const auto& m : modes)
      if (!m.theta_star.empty() || !m.theta_delta.empty() ||
          !m.theta_minus.empty() || !m.theta_circ.empty())
        return false;
    return true;
  }
  bool empty() const {
    for (const auto& m : modes)
      if (!m.empty()) return false;
    return true;
  }
};

namespace detail {

inline std::vector<long> draw_without_replacement(std::vector<long> pool,
                                                  long count, Rng& rng) {
  std::vector<long> out;
  out.reserve(count);
  for (long j = 0; j < count; ++j) {
    const std::size_t pick = j + rng.below(pool.size() - j);
    std::swap(pool[j], pool[pick]);
    out.push_back(pool[j]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Per-mode category pools at unit-block granularity (sampling-time view).
struct PsiPools {
  std::vector<long> active_blocks;  // active mode-t block ids
  std::vector<long> true_units;     // inside active mode-t blocks, nonzero
  std::vector<long> delta_units;    // inside active mode-t blocks, zero
  std::vector<long> minus_units;    // inactive mode-t blocks under active parents
  std::vector<long> circ_units;     // under inactive mode-(t-1) parents
};

inline PsiPools psi_pools(const HierStructure& s, const HierSignal& x, int t) {
  PsiPools p;
  p.active_blocks = x.support_tree[t - 1];
  const long upm = s.mode_block_units(t);  // units per mode-t block
  const std::set<long> truth(x.flat_support.begin(), x.flat_support.end());
  std::set<long> in_active;
  for (long b : p.active_blocks)
    for (long u = b * upm; u < (b + 1) * upm; ++u) in_active.insert(u);
  for (long u : in_active)
    (truth.count(u) ? p.true_units : p.delta_units).push_back(u);
  // Units under active mode-(t-1) parents.
  const std::vector<long> parents =
      (t == 1) ? std::vector<long>{0} : x.support_tree[t - 2];
  const long upp = s.mode_block_units(t - 1);
  for (long par : parents)
    for (long u = par * upp; u < (par + 1) * upp; ++u)
      if (!in_active.count(u)) p.minus_units.push_back(u);
  std::set<long> under_active(p.minus_units.begin(), p.minus_units.end());
  under_active.insert(in_active.begin(), in_active.end());
  for (long u = 0; u < s.unit_count(); ++u)
    if (!under_active.count(u)) p.circ_units.push_back(u);
  return p;
}

}  // namespace detail

// Draws the PSI index sets with the requested per-mode overlap counts.
// Whole-block overlaps are drawn first, then unit-level overlaps from the
// remainder; infeasible counts fail loudly.
inline PriorSupport sample_psi(const HierStructure& s, const HierSignal& x,
                               const std::vector<PsiOverlaps>& overlaps,
                               const WeightStrategy& strategy,
                               std::uint64_t rng_seed) {
  if (static_cast<int>(overlaps.size()) != s.n)
    throw PsiInfeasible("sample_psi: need one overlap spec per mode");
  Rng rng(derive_seed(rng_seed, 0x9517u));
  PriorSupport psi;
  psi.weight_strategy = strategy;
  psi.modes.resize(s.n);

  for (int t = 1; t <= s.n; ++t) {
    const PsiOverlaps& want = overlaps[t - 1];
    PsiMode& mode = psi.modes[t - 1];
    mode.counts = want;
    if (want.all_zero()) continue;

    auto pools = detail::psi_pools(s, x, t);
    const long upm = s.mode_block_units(t);
    auto require = [&](bool ok, const std::string& what) {
      if (!ok)
        throw PsiInfeasible("sample_psi: mode " + std::to_string(t) +
                            ": requested " + what + " exceeds its pool");
    };

    // Whole-block overlaps first.
    require(want.alpha_bar <= static_cast<long>(pools.active_blocks.size()),
            "alpha_bar");
    const auto bar_blocks =
        detail::draw_without_replacement(pools.active_blocks, want.alpha_bar, rng);
    std::set<long> covered;
    for (long b : bar_blocks)
      for (long u = b * upm; u < (b + 1) * upm; ++u) {
        covered.insert(u);
        mode.theta_star.push_back(u);
      }
    auto remove_covered = [&](std::vector<long>& v) {
      v.erase(std::remove_if(v.begin(), v.end(),
                             [&](long u) { return covered.count(u) != 0; }),
              v.end());
    };
    remove_covered(pools.true_units);
    remove_covered(pools.delta_units);

    require(want.alpha_star <= static_cast<long>(pools.true_units.size()),
            "alpha_star");
    const auto star =
        detail::draw_without_replacement(pools.true_units, want.alpha_star, rng);
    mode.theta_star.insert(mode.theta_star.end(), star.begin(), star.end());
    std::sort(mode.theta_star.begin(), mode.theta_star.end());

    require(want.alpha_delta <= static_cast<long>(pools.delta_units.size()),
            "alpha_delta");
    mode.theta_delta =
        detail::draw_without_replacement(pools.delta_units, want.alpha_delta, rng);

    require(want.beta <= static_cast<long>(pools.minus_units.size()), "beta");
    mode.theta_minus =
        detail::draw_without_replacement(pools.minus_units, want.beta, rng);

    require(want.gamma <= static_cast<long>(pools.circ_units.size()), "gamma");
    mode.theta_circ =
        detail::draw_without_replacement(pools.circ_units, want.gamma, rng);

    // Theta^{*Delta} is disjoint from theta: draw from the leftover
    // additional-support pool.
    std::set<long> taken(mode.theta_delta.begin(), mode.theta_delta.end());
    std::vector<long> sd_pool;
    for (long u : pools.delta_units)
      if (!taken.count(u)) sd_pool.push_back(u);
    require(want.alpha_star_delta <= static_cast<long>(sd_pool.size()),
            "alpha_star_delta");
    mode.theta_star_delta =
        detail::draw_without_replacement(sd_pool, want.alpha_star_delta, rng);
  }
  return psi;
}

// Re-derives the overlap counts of an existing PSI against the realized
// support (round-trip check for sample_psi). Whole-block coverage is
// classified first, mirroring the draw order.
inline PsiOverlaps classify_psi(const HierStructure& s, const HierSignal& x,
                                const PriorSupport& psi, int t) {
  const PsiMode& mode = psi.modes[t - 1];
  auto pools = detail::psi_pools(s, x, t);
  const long upm = s.mode_block_units(t);
  const std::set<long> theta_set = [&] {
    auto v = mode.theta();
    return std::set<long>(v.begin(), v.end());
  }();

  PsiOverlaps got;
  std::set<long> covered;
  // At the last mode a whole block is a single unit, so whole-block and
  // unit-level overlaps coincide; attribute those to alpha_star.
  if (upm > 1) {
    for (long b : pools.active_blocks) {
      bool whole = true;
      for (long u = b * upm; u < (b + 1) * upm && whole; ++u)
        if (!theta_set.count(u)) whole = false;
      if (whole) {
        ++got.alpha_bar;
        for (long u = b * upm; u < (b + 1) * upm; ++u) covered.insert(u);
      }
    }
  }
  auto count_in = [&](const std::vector<long>& pool) {
    long c = 0;
    for (long u : pool)
      if (!covered.count(u) && theta_set.count(u)) ++c;
    return c;
  };
  got.alpha_star = count_in(pools.true_units);
  got.alpha_delta = count_in(pools.delta_units);
  got.beta = count_in(pools.minus_units);
  got.gamma = count_in(pools.circ_units);
  got.alpha_star_delta = static_cast<long>(mode.theta_star_delta.size());
  return got;
}

}  // namespace hiblock
