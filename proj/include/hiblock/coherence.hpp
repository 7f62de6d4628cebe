#pragma once

// Every coherence quantity used by the recovery analysis: conventional
// coherence mu, block coherence mu_B, sub-coherence nu, and the hierarchical
// quantities mu_{d*} / nu_{d*} over disjoint unions of unit blocks. Exact
// enumeration at small scale, seeded sampling (a certified lower bound)
// beyond a configurable pair cap.

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "hiblock/core.hpp"
#include "hiblock/rng.hpp"

namespace hiblock {

inline double mutual_coherence(const MatrixXd& D) {
  if (D.cols() < 2) throw DomainError("mutual_coherence: need at least 2 columns");
  const MatrixXd G = D.transpose() * D;
  double best = 0.0;
  for (long i = 0; i < G.rows(); ++i)
    for (long j = 0; j < G.cols(); ++j)
      if (i != j) best = std::max(best, std::abs(G(i, j)));
  return best;
}

// mu_B over consecutive d-column blocks: max_{i != j} ||D_[i]^H D_[j]||_2 / d.
inline double block_coherence(const MatrixXd& D, int d) {
  if (d <= 0 || D.cols() % d != 0)
    throw DomainError("block_coherence: d must divide the column count");
  const long nb = D.cols() / d;
  const MatrixXd G = D.transpose() * D;
  double best = 0.0;
  for (long i = 0; i < nb; ++i)
    for (long j = i + 1; j < nb; ++j)
      best = std::max(best, spectral_norm(G.block(i * d, j * d, d, d)));
  return best / d;
}

// nu: max within-block off-diagonal |inner product| over consecutive d-blocks.
inline double sub_coherence(const MatrixXd& D, int d) {
  if (d <= 0 || D.cols() % d != 0)
    throw DomainError("sub_coherence: d must divide the column count");
  const long nb = D.cols() / d;
  const MatrixXd G = D.transpose() * D;
  double best = 0.0;
  for (long b = 0; b < nb; ++b)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        best = std::max(best, std::abs(G(b * d + i, b * d + j)));
  return best;
}

struct HierStrategy {
  enum class Kind { exact, sampled };
  Kind kind = Kind::exact;
  long sample_count = 0;
  std::uint64_t seed = 0;

  static HierStrategy exact() { return {Kind::exact, 0, 0}; }
  static HierStrategy sampled(long count, std::uint64_t seed) {
    return {Kind::sampled, count, seed};
  }
};

struct HierEstimate {
  double value = 0.0;
  bool exact = true;       // sampled results are lower bounds
  long pairs_evaluated = 0;
  long sample_count = 0;
  std::uint64_t seed = 0;
};

inline constexpr long kDefaultPairCap = 2'000'000;

namespace detail {

inline double pair_cross_norm(const MatrixXd& G, const std::vector<int>& A,
                              const std::vector<int>& B, int d) {
  MatrixXd M(static_cast<long>(A.size()) * d, static_cast<long>(B.size()) * d);
  for (std::size_t a = 0; a < A.size(); ++a)
    for (std::size_t b = 0; b < B.size(); ++b)
      M.block(a * d, b * d, d, d) = G.block(A[a] * d, B[b] * d, d, d);
  return spectral_norm(M);
}

// Unordered disjoint pairs of c-subsets of {0..n-1}: C(n,c) * C(n-c,c) / 2.
inline std::optional<long> disjoint_pair_count(long n, long c) {
  auto choose = [](long n_, long k_) -> std::optional<long> {
    if (k_ < 0 || k_ > n_) return 0L;
    long r = 1;
    for (long i = 1; i <= k_; ++i) {
      if (r > (1L << 56) / n_) return std::nullopt;  // overflow guard
      r = r * (n_ - k_ + i) / i;
    }
    return r;
  };
  auto a = choose(n, c), b = choose(n - c, c);
  if (!a || !b) return std::nullopt;
  if (*a > 0 && *b > (1L << 60) / *a) return std::nullopt;
  return (*a) * (*b) / 2;
}

template <typename Fn>
void for_each_combination(long n, long c, Fn&& fn) {
  std::vector<int> idx(c);
  for (long i = 0; i < c; ++i) idx[i] = static_cast<int>(i);
  while (true) {
    fn(idx);
    long i = c - 1;
    while (i >= 0 && idx[i] == n - c + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (long j = i + 1; j < c; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

// Hierarchical block coherence mu_{d*}: max over disjoint pairs of
// unit-block selections of size d*/d of ||D_{Xi_i}^H D_{Xi_j}||_2 / d*.
inline HierEstimate hier_block_coherence(const MatrixXd& D, int d, int d_star,
                                         HierStrategy strategy,
                                         long pair_cap = kDefaultPairCap) {
  if (d <= 0 || d_star % d != 0 || D.cols() % d != 0)
    throw DomainError("hier_block_coherence: need d | d_star and d | N");
  const long n_units = D.cols() / d;
  const long c = d_star / d;
  if (2 * c > n_units)
    throw DomainError("hier_block_coherence: no disjoint pair of that size exists");
  const MatrixXd G = D.transpose() * D;

  HierEstimate est;
  if (strategy.kind == HierStrategy::Kind::exact) {
    const auto total = detail::disjoint_pair_count(n_units, c);
    if (!total || *total > pair_cap)
      throw DomainError(
          "hier_block_coherence: exact enumeration exceeds the pair cap; "
          "request the sampled strategy");
    double best = 0.0;
    long pairs = 0;
    detail::for_each_combination(n_units, c, [&](const std::vector<int>& A) {
      std::vector<int> rest;
      rest.reserve(n_units - c);
      std::size_t ai = 0;
      for (long u = 0; u < n_units; ++u) {
        if (ai < A.size() && A[ai] == u) {
          ++ai;
          continue;
        }
        rest.push_back(static_cast<int>(u));
      }
      detail::for_each_combination(rest.size(), c, [&](const std::vector<int>& bi) {
        std::vector<int> B(c);
        for (long j = 0; j < c; ++j) B[j] = rest[bi[j]];
        if (B[0] < A[0]) return;  // count each unordered pair once
        best = std::max(best, detail::pair_cross_norm(G, A, B, d));
        ++pairs;
      });
    });
    est.value = best / d_star;
    est.exact = true;
    est.pairs_evaluated = pairs;
  } else {
    Rng rng(derive_seed(strategy.seed, 0xc0117u));
    double best = 0.0;
    for (long trial = 0; trial < strategy.sample_count; ++trial) {
      std::vector<long> pool(n_units);
      for (long u = 0; u < n_units; ++u) pool[u] = u;
      std::vector<int> A(c), B(c);
      for (long j = 0; j < 2 * c; ++j) {
        const std::size_t pick = j + rng.below(pool.size() - j);
        std::swap(pool[j], pool[pick]);
        (j < c ? A[j] : B[j - c]) = static_cast<int>(pool[j]);
      }
      std::sort(A.begin(), A.end());
      std::sort(B.begin(), B.end());
      best = std::max(best, detail::pair_cross_norm(G, A, B, d));
    }
    est.value = best / d_star;
    est.exact = false;
    est.sample_count = strategy.sample_count;
    est.seed = strategy.seed;
  }
  return est;
}

// Hierarchical sub-coherence nu_{d*}: the max |inner product| over distinct
// column pairs within one mode block that fit in a single admissible
// size-d*/d unit selection. For d*/d >= 2 that is every pair in the mode
// block; for d*/d == 1 only within-unit pairs remain (a lone unit is still a
// valid selection, and its internal coherence is what the eigenvalue bounds
// consume).
inline double hier_sub_coherence(const MatrixXd& D, int d, int d_star,
                                 long mode_block_len) {
  if (d <= 0 || d_star % d != 0)
    throw DomainError("hier_sub_coherence: need d | d_star");
  if (mode_block_len <= 0 || D.cols() % mode_block_len != 0 ||
      mode_block_len % d != 0)
    throw DomainError("hier_sub_coherence: mode blocks must tile the columns");
  const bool cross_units = d_star / d >= 2;
  const long nblocks = D.cols() / mode_block_len;
  double best = 0.0;
  for (long b = 0; b < nblocks; ++b) {
    const MatrixXd sub = D.middleCols(b * mode_block_len, mode_block_len);
    const MatrixXd G = sub.transpose() * sub;
    for (long i = 0; i < G.rows(); ++i)
      for (long j = i + 1; j < G.cols(); ++j)
        if (cross_units || i / d == j / d)
          best = std::max(best, std::abs(G(i, j)));
  }
  return best;
}

inline double welch_bound(long M, long N) {
  if (M < 1 || N < 2 || M > N) throw DomainError("welch_bound: need 1 <= M <= N, N >= 2");
  return std::sqrt(static_cast<double>(N - M) /
                   (static_cast<double>(M) * static_cast<double>(N - 1)));
}

struct CoherenceProfile {
  double mu = 0.0;
  double mu_block = 0.0;
  double nu_sub = 0.0;
  int d = 1;
  std::map<int, HierEstimate> mu_hier;                   // d* -> estimate
  std::map<std::pair<int, long>, double> nu_hier;        // (d*, mode block) -> value
};

// Lazily computed, cached coherence quantities for one matrix.
class ProfileCache {
 public:
  ProfileCache(const MatrixXd& D, int d, HierStrategy strategy = HierStrategy::exact(),
               long pair_cap = kDefaultPairCap)
      : D_(D), strategy_(strategy), pair_cap_(pair_cap) {
    profile_.d = d;
    profile_.mu = mutual_coherence(D);
    profile_.mu_block = block_coherence(D, d);
    profile_.nu_sub = sub_coherence(D, d);
  }

  double mu() const { return profile_.mu; }
  double mu_block() const { return profile_.mu_block; }
  double nu() const { return profile_.nu_sub; }

  const HierEstimate& mu_hier(int d_star) {
    auto it = profile_.mu_hier.find(d_star);
    if (it == profile_.mu_hier.end())
      it = profile_.mu_hier
               .emplace(d_star, hier_block_coherence(D_, profile_.d, d_star,
                                                     strategy_, pair_cap_))
               .first;
    return it->second;
  }
  double nu_hier(int d_star, long mode_block_len) {
    auto key = std::make_pair(d_star, mode_block_len);
    auto it = profile_.nu_hier.find(key);
    if (it == profile_.nu_hier.end())
      it = profile_.nu_hier
               .emplace(key, hier_sub_coherence(D_, profile_.d, d_star,
                                                mode_block_len))
               .first;
    return it->second;
  }
  const CoherenceProfile& snapshot() const { return profile_; }

 private:
  const MatrixXd& D_;
  HierStrategy strategy_;
  long pair_cap_;
  CoherenceProfile profile_;
};

}  // namespace hiblock
