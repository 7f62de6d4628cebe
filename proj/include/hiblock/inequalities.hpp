#pragma once

// Randomized numeric verification of the mixed-norm and coherence
// inequalities the recovery analysis rests on. Each kind draws a seeded
// premise-satisfying instance and checks lhs/rhs; suites count violations
// and keep the offending seeds for replay.

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hiblock/coherence.hpp"
#include "hiblock/core.hpp"
#include "hiblock/rng.hpp"

namespace hiblock {

inline constexpr double kIneqTol = 1e-9;

inline MatrixXd random_matrix(int rows, long cols, Rng& rng) {
  MatrixXd m(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.gaussian();
  return m;
}

inline void normalize_columns(MatrixXd& m) {
  for (long j = 0; j < m.cols(); ++j) {
    const double n = m.col(j).norm();
    if (n > 0) m.col(j) /= n;
  }
}

// Unit-norm columns with coherence on the order of `perturbation`; needs
// rows >= cols. Used wherever a premise demands small mu / nu.
inline MatrixXd near_orthogonal_matrix(int rows, long cols, double perturbation,
                                       Rng& rng) {
  MatrixXd g = random_matrix(rows, cols, rng);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(rows, cols);
  q += perturbation * random_matrix(rows, cols, rng);
  normalize_columns(q);
  return q;
}

enum class IneqKind {
  spectral_rho,      // ||D||_2 <= sqrt(rho_c rho_r)
  rho_submultiplicative,  // rho_c(AB) <= rho_c(A) rho_c(B)
  rho_vector_bound,  // ||A^H x||_{(d2)2,inf} <= rho_c(A) ||x||_{(d1)2,inf}
  rho_ceiling_refinement,  // rho_c(A,(d1,d2)) <= ceil(d2/d1) rho_c(Abar,(d1,d1))
  partition_sandwich,  // vector-set two-way partition sandwich
  blockwise_sandwich,
  submatrix_spectral,  // ||column submatrix||_2 <= ||D||_2
  gram_eigen_sandwich,  // eigenvalue sandwich of a block Gram
  projected_gram_bounds,  // projected Gram lower/upper bounds + sigma_min
  projected_gram_bounds_hier,  // hierarchical-coherence version of the same
  pinv_norm_sandwich,  // pseudoinverse norm sandwich
  projected_pinv_sandwich,  // projected pseudoinverse variant
  coherence_ordering,  // mu_{d*} <= mu_B <= mu and nu <= nu_{d*} <= mu
  block_orthogonality,  // block-orthonormal modes: mu_{dhat} <= 1/dhat
};

inline std::vector<IneqKind> all_inequality_kinds() {
  return {IneqKind::spectral_rho,          IneqKind::rho_submultiplicative,
          IneqKind::rho_vector_bound,   IneqKind::rho_ceiling_refinement,
          IneqKind::partition_sandwich, IneqKind::blockwise_sandwich,
          IneqKind::submatrix_spectral,      IneqKind::gram_eigen_sandwich,
          IneqKind::projected_gram_bounds,      IneqKind::projected_gram_bounds_hier,
          IneqKind::pinv_norm_sandwich,      IneqKind::projected_pinv_sandwich,
          IneqKind::coherence_ordering, IneqKind::block_orthogonality};
}

inline std::string to_string(IneqKind k) {
  switch (k) {
    case IneqKind::spectral_rho: return "spectral-rho";
    case IneqKind::rho_submultiplicative: return "rho-submultiplicative";
    case IneqKind::rho_vector_bound: return "rho-vector-bound";
    case IneqKind::rho_ceiling_refinement: return "rho-ceiling-refinement";
    case IneqKind::partition_sandwich: return "partition-sandwich";
    case IneqKind::blockwise_sandwich: return "blockwise-sandwich";
    case IneqKind::submatrix_spectral: return "submatrix-spectral";
    case IneqKind::gram_eigen_sandwich: return "gram-eigen-sandwich";
    case IneqKind::projected_gram_bounds: return "projected-gram-bounds";
    case IneqKind::projected_gram_bounds_hier: return "projected-gram-bounds-hier";
    case IneqKind::pinv_norm_sandwich: return "pinv-norm-sandwich";
    case IneqKind::projected_pinv_sandwich: return "projected-pinv-sandwich";
    case IneqKind::coherence_ordering: return "coherence-ordering";
    case IneqKind::block_orthogonality: return "block-orthogonality";
  }
  return "?";
}

struct IneqOutcome {
  bool premise_ok = true;
  bool holds = true;
  double lhs = 0.0, rhs = 0.0;
};

namespace detail {

inline std::vector<int> pick_disjoint(long pool, long count, Rng& rng) {
  std::vector<long> idx(pool);
  for (long i = 0; i < pool; ++i) idx[i] = i;
  std::vector<int> out;
  for (long j = 0; j < count; ++j) {
    const std::size_t p = j + rng.below(pool - j);
    std::swap(idx[j], idx[p]);
    out.push_back(static_cast<int>(idx[j]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline MatrixXd block_columns(const MatrixXd& D, const std::vector<int>& blocks,
                              int d) {
  MatrixXd out(D.rows(), static_cast<long>(blocks.size()) * d);
  for (std::size_t i = 0; i < blocks.size(); ++i)
    out.middleCols(static_cast<long>(i) * d, d) =
        D.middleCols(static_cast<long>(blocks[i]) * d, d);
  return out;
}

}  // namespace detail

inline IneqOutcome check_inequality(IneqKind kind, std::uint64_t seed) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(kind) + 0x1eaf));
  IneqOutcome out;
  switch (kind) {
    case IneqKind::spectral_rho: {
      const int q = 1 + static_cast<int>(rng.below(3));
      const int d = 1 + static_cast<int>(rng.below(3));
      const int m = 1 + static_cast<int>(rng.below(4));
      const int n = 1 + static_cast<int>(rng.below(4));
      const MatrixXd D = random_matrix(m * q, static_cast<long>(n) * d, rng);
      out.lhs = spectral_norm(D);
      out.rhs = std::sqrt(rho_c(D, {q, d}) * rho_r(D, {q, d}));
      break;
    }
    case IneqKind::rho_submultiplicative: {
      const int d1 = 1 + static_cast<int>(rng.below(3));
      const int d2 = 1 + static_cast<int>(rng.below(3));
      const int d3 = 1 + static_cast<int>(rng.below(3));
      const int m = 1 + static_cast<int>(rng.below(3));
      const int n = 1 + static_cast<int>(rng.below(3));
      const int g = 1 + static_cast<int>(rng.below(3));
      const MatrixXd A = random_matrix(m * d1, static_cast<long>(n) * d2, rng);
      const MatrixXd B =
          random_matrix(n * d2, static_cast<long>(g) * d3, rng);
      out.lhs = rho_c(A * B, {d1, d3});
      out.rhs = rho_c(A, {d1, d2}) * rho_c(B, {d2, d3});
      break;
    }
    case IneqKind::rho_vector_bound: {
      // Conjugated vector form: ||A^H x||_{(d2)2,inf} <= rho_c(A) ||x||_{(d1)2,inf}.
      const int d1 = 1 + static_cast<int>(rng.below(3));
      const int d2 = 1 + static_cast<int>(rng.below(3));
      const int m = 1 + static_cast<int>(rng.below(4));
      const int n = 1 + static_cast<int>(rng.below(4));
      const MatrixXd A = random_matrix(m * d1, static_cast<long>(n) * d2, rng);
      VectorXd x(m * d1);
      for (long i = 0; i < x.size(); ++i) x[i] = rng.gaussian();
      out.lhs = mixed_norm(A.transpose() * x, d2, MixedP::inf);
      out.rhs = rho_c(A, {d1, d2}) * mixed_norm(x, d1, MixedP::inf);
      break;
    }
    case IneqKind::rho_ceiling_refinement: {
      const int d1 = 1 + static_cast<int>(rng.below(4));
      const int d2 = 1 + static_cast<int>(rng.below(5));  // divisibility not required
      const int m = 1 + static_cast<int>(rng.below(3));
      const int n = 1 + static_cast<int>(rng.below(4));
      const MatrixXd A = random_matrix(m * d1, static_cast<long>(n) * d2, rng);
      const MatrixXd padded = pad_column_blocks(A, d2, d1);
      out.lhs = rho_c(A, {d1, d2});
      out.rhs = std::ceil(static_cast<double>(d2) / d1) * rho_c(padded, {d1, d1});
      break;
    }
    case IneqKind::partition_sandwich:
    case IneqKind::blockwise_sandwich: {
      const int nvec = 2 + static_cast<int>(rng.below(6));
      const int len = 2 + static_cast<int>(rng.below(8));
      const int split = 1 + static_cast<int>(rng.below(len - 1));
      std::vector<VectorXd> xs(nvec);
      for (auto& v : xs) {
        v.resize(len);
        for (int i = 0; i < len; ++i) v[i] = rng.gaussian();
      }
      double max_full = 0, max_a = 0, max_b = 0;
      double min_a = std::numeric_limits<double>::infinity(), min_b = min_a;
      for (const auto& v : xs) {
        const double a = v.head(split).squaredNorm();
        const double b = v.tail(len - split).squaredNorm();
        max_full = std::max(max_full, v.squaredNorm());
        max_a = std::max(max_a, a);
        max_b = std::max(max_b, b);
        min_a = std::min(min_a, a);
        min_b = std::min(min_b, b);
      }
      out.lhs = std::max(max_a + min_b, max_b + min_a);
      out.rhs = max_a + max_b;
      out.holds = out.lhs <= max_full + kIneqTol && max_full <= out.rhs + kIneqTol;
      return out;
    }
    case IneqKind::submatrix_spectral: {
      const int m = 2 + static_cast<int>(rng.below(8));
      const long n = 2 + static_cast<long>(rng.below(8));
      const MatrixXd D = random_matrix(m, n, rng);
      const long keep = 1 + static_cast<long>(rng.below(n));
      const auto cols = detail::pick_disjoint(n, keep, rng);
      MatrixXd sub(m, keep);
      for (long j = 0; j < keep; ++j) sub.col(j) = D.col(cols[j]);
      out.lhs = spectral_norm(sub);
      out.rhs = spectral_norm(D);
      break;
    }
    case IneqKind::gram_eigen_sandwich: {
      const int d = 1 + static_cast<int>(rng.below(3));
      const int k = 2 + static_cast<int>(rng.below(4));
      const int m = k * d + 4 + static_cast<int>(rng.below(12));
      const MatrixXd D =
          near_orthogonal_matrix(m, static_cast<long>(k) * d, 0.02 + 0.1 * rng.uniform(), rng);
      const double nu = sub_coherence(D, d);
      const double mu_b = block_coherence(D, d);
      const double spread = (d - 1) * nu + (k - 1) * d * mu_b;
      out.premise_ok = spread < 1.0;
      if (!out.premise_ok) return out;
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(D.transpose() * D,
                                                 Eigen::EigenvaluesOnly);
      const double lmin = es.eigenvalues().minCoeff();
      const double lmax = es.eigenvalues().maxCoeff();
      out.lhs = 1.0 - spread;  // claimed lower bound
      out.rhs = 1.0 + spread;  // claimed upper bound
      out.holds = out.lhs <= lmin + kIneqTol && lmax <= out.rhs + kIneqTol;
      return out;
    }
    case IneqKind::projected_gram_bounds:
    case IneqKind::projected_pinv_sandwich: {
      const int d = 1 + static_cast<int>(rng.below(3));
      const int s_blocks = 1 + static_cast<int>(rng.below(3));
      const int r_blocks = 1 + static_cast<int>(rng.below(3));
      const int total = s_blocks + r_blocks + 2 + static_cast<int>(rng.below(4));
      const int m = total * d + 8;
      const MatrixXd D = near_orthogonal_matrix(
          m, static_cast<long>(total) * d, 0.02 + 0.08 * rng.uniform(), rng);
      const double nu = sub_coherence(D, d);
      const double mu_b = block_coherence(D, d);
      const double ps = (d - 1) * nu + (s_blocks - 1) * d * mu_b;
      const double pr = (d - 1) * nu + (r_blocks - 1) * d * mu_b;
      out.premise_ok = ps < 1.0 && pr < 1.0;
      if (!out.premise_ok) return out;
      auto blocks = detail::pick_disjoint(total, s_blocks + r_blocks, rng);
      const std::vector<int> xi(blocks.begin(), blocks.begin() + s_blocks);
      const std::vector<int> th(blocks.begin() + s_blocks, blocks.end());
      const MatrixXd D_xi = detail::block_columns(D, xi, d);
      const MatrixXd D_th = detail::block_columns(D, th, d);
      const MatrixXd A = proj_complement(D_th).apply(D_xi);
      const double lower =
          (1.0 - ps) - (d * d * mu_b * mu_b * r_blocks * s_blocks) / (1.0 - pr);
      VectorXd xv(static_cast<long>(s_blocks) * d);
      for (long i = 0; i < xv.size(); ++i) xv[i] = rng.gaussian();
      if (kind == IneqKind::projected_gram_bounds) {
        const double smin = min_singular(A.transpose() * A);
        const double q = (A * xv).squaredNorm() / xv.squaredNorm();
        out.lhs = lower;
        out.rhs = smin;
        out.holds = smin >= lower - kIneqTol && q >= lower - kIneqTol &&
                    q <= 1.0 + ps + kIneqTol;
      } else {
        // ((1-ps) - d^2 mu^2 rs/(1-pr))^{1/2} ||(Apinv)^H x|| <= ||x||
        //   <= sqrt(1+ps) ||(Apinv)^H x||
        if (lower <= 0.0) {
          out.premise_ok = false;
          return out;
        }
        Eigen::ColPivHouseholderQR<MatrixXd> qr(A);
        const MatrixXd pinv_h =
            qr.solve(MatrixXd::Identity(A.rows(), A.rows())).transpose();
        const double mapped = (pinv_h * xv).norm();
        out.lhs = std::sqrt(lower) * mapped;
        out.rhs = std::sqrt(1.0 + ps) * mapped;
        const double mid = xv.norm();
        out.holds = out.lhs <= mid + kIneqTol && mid <= out.rhs + kIneqTol;
      }
      return out;
    }
    case IneqKind::projected_gram_bounds_hier: {
      const int d = 1 + static_cast<int>(rng.below(2));
      const int c = 1 + static_cast<int>(rng.below(2));  // units per hier block
      const int d_star = c * d;
      const int k_t = 1 + static_cast<int>(rng.below(3));
      const int r_units = static_cast<int>(rng.below(3));
      const int units = k_t * c + r_units + c + 2;
      const int m = units * d + 8;
      const MatrixXd D = near_orthogonal_matrix(
          m, static_cast<long>(units) * d, 0.02 + 0.06 * rng.uniform(), rng);
      const double mu_ds = hier_block_coherence(D, d, d_star, HierStrategy::exact()).value;
      const double nu_ds =
          hier_sub_coherence(D, d, d_star, D.cols());
      const double rd = static_cast<double>(r_units) * d;
      const double pk = (d_star - 1) * nu_ds + (k_t - 1) * d_star * mu_ds;
      const double pr =
          (d_star - 1) * nu_ds + (std::ceil(rd / d_star) - 1.0) * d_star * mu_ds;
      out.premise_ok = pk < 1.0 && pr < 1.0;
      if (!out.premise_ok) return out;
      auto picked = detail::pick_disjoint(units, k_t * c + r_units, rng);
      const std::vector<int> xi(picked.begin(), picked.begin() + k_t * c);
      const std::vector<int> th(picked.begin() + k_t * c, picked.end());
      const MatrixXd D_xi = detail::block_columns(D, xi, d);
      MatrixXd A = D_xi;
      if (!th.empty()) A = proj_complement(detail::block_columns(D, th, d)).apply(D_xi);
      const double lower =
          (1.0 - pk) -
          (d_star * d_star * mu_ds * mu_ds * std::ceil(rd / d_star) * k_t) / (1.0 - pr);
      VectorXd xv(A.cols());
      for (long i = 0; i < xv.size(); ++i) xv[i] = rng.gaussian();
      const double q = (A * xv).squaredNorm() / xv.squaredNorm();
      out.lhs = lower;
      out.rhs = 1.0 + pk;
      out.holds = q >= lower - kIneqTol && q <= out.rhs + kIneqTol;
      return out;
    }
    case IneqKind::pinv_norm_sandwich: {
      const int d = 1 + static_cast<int>(rng.below(3));
      const int s_blocks = 1 + static_cast<int>(rng.below(3));
      const int total = s_blocks + 2 + static_cast<int>(rng.below(4));
      const int m = total * d + 8;
      const MatrixXd D = near_orthogonal_matrix(
          m, static_cast<long>(total) * d, 0.02 + 0.1 * rng.uniform(), rng);
      const double nu = sub_coherence(D, d);
      const double mu_b = block_coherence(D, d);
      const double ps = (d - 1) * nu + (s_blocks - 1) * d * mu_b;
      out.premise_ok = ps < 1.0;
      if (!out.premise_ok) return out;
      const auto xi = detail::pick_disjoint(total, s_blocks, rng);
      const MatrixXd A = detail::block_columns(D, xi, d);
      Eigen::ColPivHouseholderQR<MatrixXd> qr(A);
      const MatrixXd pinv_h =
          qr.solve(MatrixXd::Identity(A.rows(), A.rows())).transpose();
      VectorXd xv(A.cols());
      for (long i = 0; i < xv.size(); ++i) xv[i] = rng.gaussian();
      const double mapped = (pinv_h * xv).norm();
      out.lhs = std::sqrt(1.0 - ps) * mapped;
      out.rhs = std::sqrt(1.0 + ps) * mapped;
      const double mid = xv.norm();
      out.holds = out.lhs <= mid + kIneqTol && mid <= out.rhs + kIneqTol;
      return out;
    }
    case IneqKind::coherence_ordering: {
      const int d = 1 + static_cast<int>(rng.below(2));
      const int c = 2 + static_cast<int>(rng.below(2));
      const int units = 2 * c + 2 + static_cast<int>(rng.below(4));
      const int m = 4 + static_cast<int>(rng.below(20));
      MatrixXd D = random_matrix(m, static_cast<long>(units) * d, rng);
      normalize_columns(D);
      const int d_star = c * d;
      const double mu = mutual_coherence(D);
      const double mu_b = block_coherence(D, d);
      const double mu_ds = hier_block_coherence(D, d, d_star, HierStrategy::exact()).value;
      const double nu = sub_coherence(D, d);
      const double nu_ds = hier_sub_coherence(D, d, d_star, D.cols());
      out.lhs = mu_ds;
      out.rhs = mu_b;
      out.holds = mu_ds <= mu_b + kIneqTol && mu_b <= mu + kIneqTol &&
                  nu <= nu_ds + kIneqTol && nu_ds <= mu + kIneqTol;
      return out;
    }
    case IneqKind::block_orthogonality: {
      const int dhat = 2 + static_cast<int>(rng.below(4));
      const int blocks = 2 + static_cast<int>(rng.below(3));
      const int m = blocks * dhat + 4 + static_cast<int>(rng.below(8));
      MatrixXd D(m, static_cast<long>(blocks) * dhat);
      for (int b = 0; b < blocks; ++b) {
        const MatrixXd g = random_matrix(m, dhat, rng);
        Eigen::HouseholderQR<MatrixXd> qr(g);
        D.middleCols(static_cast<long>(b) * dhat, dhat) =
            qr.householderQ() * MatrixXd::Identity(m, dhat);
      }
      // Unit blocks of length dhat: nu_{dhat} within a mode block is 0 by
      // construction, and mu_{dhat} <= 1/dhat.
      out.lhs = hier_block_coherence(D, dhat, dhat, HierStrategy::exact()).value;
      out.rhs = 1.0 / dhat;
      const double nu_dhat = sub_coherence(D, dhat);
      out.holds = out.lhs <= out.rhs + kIneqTol && nu_dhat <= kIneqTol;
      return out;
    }
  }
  out.holds = out.lhs <= out.rhs + kIneqTol;
  return out;
}

struct SuiteResult {
  IneqKind kind;
  long trials = 0;
  long premise_ok = 0;
  long violations = 0;
  std::vector<std::uint64_t> counterexample_seeds;
};

// Runs `count` premise-satisfying instances (resampling on premise misses,
// bounded retries per slot).
inline SuiteResult run_suite(IneqKind kind, long count, std::uint64_t master_seed) {
  SuiteResult res;
  res.kind = kind;
  for (long i = 0; i < count; ++i) {
    IneqOutcome out;
    std::uint64_t seed = 0;
    bool ok = false;
    for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
      seed = derive_seed(master_seed, static_cast<std::uint64_t>(i), attempt);
      out = check_inequality(kind, seed);
      ok = out.premise_ok;
    }
    ++res.trials;
    if (!ok) continue;  // could not draw a premise-satisfying instance
    ++res.premise_ok;
    if (!out.holds) {
      ++res.violations;
      if (res.counterexample_seeds.size() < 16)
        res.counterexample_seeds.push_back(seed);
    }
  }
  return res;
}

}  // namespace hiblock
