#pragma once

// Block-structured linear algebra: mixed l2/lp norms, the rho row/column
// mixed matrix norms, orthogonal complement projections and least squares.
// Non-divisible partitions are zero-padded (tail padding, which leaves every
// block spectral norm unchanged); grouped variants take explicit block
// boundaries for ragged layouts.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hiblock/model.hpp"

namespace hiblock {

struct RankError : DomainError {
  using DomainError::DomainError;
};

inline constexpr double kRankTol = 1e-10;

enum class MixedP { one, two, inf };

struct BlockPartition {
  int row_block = 1;  // q
  int col_block = 1;  // d
};

namespace detail {

inline std::vector<int> uniform_groups(long total, int block) {
  if (block <= 0) throw DomainError("block length must be positive");
  std::vector<int> g(static_cast<std::size_t>((total + block - 1) / block), block);
  return g;  // last group conceptually zero-padded up to `block`
}

inline std::vector<long> group_offsets(const std::vector<int>& groups) {
  std::vector<long> off(groups.size() + 1, 0);
  for (std::size_t i = 0; i < groups.size(); ++i) off[i + 1] = off[i] + groups[i];
  return off;
}

}  // namespace detail

inline double mixed_norm_grouped(const VectorXd& x, const std::vector<int>& groups,
                                 MixedP p) {
  const auto off = detail::group_offsets(groups);
  double acc = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const long lo = off[i];
    const long len = std::min<long>(groups[i], x.size() - lo);
    const double b = (len > 0) ? x.segment(lo, len).norm() : 0.0;
    switch (p) {
      case MixedP::one: acc += b; break;
      case MixedP::two: acc += b * b; break;
      case MixedP::inf: acc = std::max(acc, b); break;
    }
  }
  return p == MixedP::two ? std::sqrt(acc) : acc;
}

// l_p norm of the vector of per-block l2 norms, consecutive blocks of size d.
inline double mixed_norm(const VectorXd& x, int d, MixedP p) {
  if (d <= 0 || x.size() % d != 0)
    throw DomainError("mixed_norm: block length must divide the vector length");
  return mixed_norm_grouped(x, detail::uniform_groups(x.size(), d), p);
}

inline double spectral_norm(const MatrixXd& D) {
  if (D.size() == 0) return 0.0;
  if (!D.allFinite()) throw DomainError("spectral_norm: non-finite entries");
  if (D.rows() == 1 || D.cols() == 1) return D.norm();
  return Eigen::JacobiSVD<MatrixXd>(D).singularValues()(0);
}

// Smallest eigenvalue of a symmetric Gram matrix (sigma_min(A^H A) semantics).
inline double min_singular(const MatrixXd& G) {
  if (G.rows() != G.cols()) throw DomainError("min_singular: matrix not square");
  if (!G.allFinite()) throw DomainError("min_singular: non-finite entries");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (G + G.transpose()),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Max over column groups of the sum over row groups of block spectral norms.
inline double rho_c_grouped(const MatrixXd& D, const std::vector<int>& row_groups,
                            const std::vector<int>& col_groups) {
  if (D.size() == 0) return 0.0;
  const auto roff = detail::group_offsets(row_groups);
  const auto coff = detail::group_offsets(col_groups);
  double best = 0.0;
  for (std::size_t j = 0; j < col_groups.size(); ++j) {
    const long c0 = coff[j];
    const long cw = std::min<long>(col_groups[j], D.cols() - c0);
    if (cw <= 0) continue;
    double colsum = 0.0;
    for (std::size_t i = 0; i < row_groups.size(); ++i) {
      const long r0 = roff[i];
      const long rh = std::min<long>(row_groups[i], D.rows() - r0);
      if (rh <= 0) continue;
      colsum += spectral_norm(D.block(r0, c0, rh, cw));
    }
    best = std::max(best, colsum);
  }
  return best;
}

inline double rho_r_grouped(const MatrixXd& D, const std::vector<int>& row_groups,
                            const std::vector<int>& col_groups) {
  return rho_c_grouped(D.transpose(), col_groups, row_groups);
}

inline double rho_c(const MatrixXd& D, BlockPartition part) {
  if (D.size() == 0) throw DomainError("rho_c: empty matrix");
  return rho_c_grouped(D, detail::uniform_groups(D.rows(), part.row_block),
                       detail::uniform_groups(D.cols(), part.col_block));
}

inline double rho_r(const MatrixXd& D, BlockPartition part) {
  if (D.size() == 0) throw DomainError("rho_r: empty matrix");
  return rho_r_grouped(D, detail::uniform_groups(D.rows(), part.row_block),
                       detail::uniform_groups(D.cols(), part.col_block));
}

// Pads each d2-wide column block of A with zero columns up to ceil(d2/d1)*d1,
// so the result carries a regular d1-partition (the Abar construction used by
// the ceiling refinement).
inline MatrixXd pad_column_blocks(const MatrixXd& A, int d2, int d1) {
  if (d2 <= 0 || d1 <= 0 || A.cols() % d2 != 0)
    throw DomainError("pad_column_blocks: d2 must divide the column count");
  const long nblocks = A.cols() / d2;
  const long padded = ((d2 + d1 - 1) / d1) * static_cast<long>(d1);
  MatrixXd out = MatrixXd::Zero(A.rows(), nblocks * padded);
  for (long j = 0; j < nblocks; ++j)
    out.block(0, j * padded, A.rows(), d2) = A.block(0, j * d2, A.rows(), d2);
  return out;
}

namespace detail {

// Thin orthonormal basis of span(B) with a relative rank check.
inline MatrixXd orthonormal_basis(const MatrixXd& B, double rank_tol,
                                  const char* who) {
  if (B.cols() == 0) return MatrixXd(B.rows(), 0);
  if (!B.allFinite()) throw DomainError(std::string(who) + ": non-finite entries");
  Eigen::ColPivHouseholderQR<MatrixXd> qr(B);
  const MatrixXd& R = qr.matrixR();
  const long n = std::min(B.rows(), B.cols());
  const double top = std::abs(R(0, 0));
  if (top == 0.0 || B.cols() > B.rows() ||
      std::abs(R(n - 1, n - 1)) <= rank_tol * top)
    throw RankError(std::string(who) + ": basis is rank deficient");
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(B.rows(), B.cols());
  return Q;
}

}  // namespace detail

// Lazy orthogonal-complement projector v -> v - basis (basis^+ v).
class ComplementProjector {
 public:
  ComplementProjector() = default;
  explicit ComplementProjector(const MatrixXd& basis, double rank_tol = kRankTol)
      : q_(detail::orthonormal_basis(basis, rank_tol, "proj_complement")) {}

  VectorXd apply(const VectorXd& v) const {
    if (q_.cols() == 0) return v;
    return v - q_ * (q_.transpose() * v);
  }
  MatrixXd apply(const MatrixXd& M) const {
    if (q_.cols() == 0) return M;
    return M - q_ * (q_.transpose() * M);
  }
  long rank() const { return q_.cols(); }

 private:
  MatrixXd q_;
};

inline ComplementProjector proj_complement(const MatrixXd& basis,
                                           double rank_tol = kRankTol) {
  return ComplementProjector(basis, rank_tol);
}

// Least-squares minimizer of ||y - D_S x||_2 via Householder QR.
inline VectorXd ls_solve(const MatrixXd& D_S, const VectorXd& y,
                         double rank_tol = kRankTol) {
  if (D_S.cols() == 0) return VectorXd(0);
  if (!D_S.allFinite() || !y.allFinite())
    throw DomainError("ls_solve: non-finite entries");
  Eigen::ColPivHouseholderQR<MatrixXd> qr(D_S);
  const MatrixXd& R = qr.matrixR();
  const long n = std::min(D_S.rows(), D_S.cols());
  const double top = std::abs(R(0, 0));
  if (top == 0.0 || D_S.cols() > D_S.rows() ||
      std::abs(R(n - 1, n - 1)) <= rank_tol * top)
    throw RankError("ls_solve: design matrix is rank deficient");
  return qr.solve(y);
}

}  // namespace hiblock
