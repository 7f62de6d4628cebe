#pragma once

// HiBOMP-P: recursive hierarchical block OMP with prior support information,
// plus the OMP / BOMP / HiOMP / HiBOMP degenerations used as baselines.
//
// Selection at mode t within the current parent block maximizes
// ||(P^perp_{D_{Xi u Theta^t}} D_[i])^H r||_2 over unvisited children, with
// the residual augmented by D_{Theta^{*Delta t}} x_{*Delta} before mode-t<n
// selections and restored afterwards. Children whose full unit range is
// covered by Theta^t are consumed as pre-known without a selection step.
// Every appended unit block triggers an LS refit over the accumulated
// support and a residual update.

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <vector>

#include "hiblock/core.hpp"
#include "hiblock/model.hpp"

namespace hiblock {

enum class RecoveryStatus { converged_tol, max_sparsity, rank_failure };

struct Selection {
  int mode = 0;
  std::vector<int> path;  // block path including the chosen child
  int step = 0;           // global visit counter
  bool known = false;     // consumed from PSI, no argmax
};

struct RecoveryResult {
  std::vector<long> support;  // sorted unit-block ids
  VectorXd estimate;          // length N
  std::vector<double> residual_norm_history;
  std::vector<Selection> selections;
  RecoveryStatus status = RecoveryStatus::max_sparsity;
};

// Fired before each child is consumed; gives certificates enough state to
// rebuild the selection step exactly.
struct StepInfo {
  int mode = 0;
  std::vector<int> parent_path;
  std::vector<long> selected_units;   // accumulated support before this step
  std::vector<long> conditioning;     // selected_units u Theta^t
  int chosen_child = -1;
  bool known = false;
  std::vector<long> weight_units;     // Theta^{*Delta t} (unit ids)
  VectorXd weights;                   // x_{*Delta} used at this step
};
using StepObserver = std::function<void(const StepInfo&)>;

inline double default_eps(const VectorXd& y) { return 1e-6 * y.norm(); }

namespace detail {

inline MatrixXd columns_of_units(const MatrixXd& D, const std::vector<long>& units,
                                 int d) {
  MatrixXd out(D.rows(), static_cast<long>(units.size()) * d);
  for (std::size_t i = 0; i < units.size(); ++i)
    out.middleCols(static_cast<long>(i) * d, d) = D.middleCols(units[i] * d, d);
  return out;
}

class HibompEngine {
 public:
  HibompEngine(const MatrixXd& D, const VectorXd& y, const HierStructure& s,
               const PriorSupport& psi, double eps, StepObserver observer)
      : D_(D), y_(y), s_(s), psi_(psi), eps_(eps), observer_(std::move(observer)) {
    if (D_.cols() != s_.total_dim())
      throw DomainError("hibomp_p: matrix width does not match the structure");
    if (D_.rows() != y_.size())
      throw DomainError("hibomp_p: measurement length does not match the matrix");
    if (static_cast<int>(psi_.modes.size()) != s_.n)
      throw DomainError("hibomp_p: PSI must carry one mode entry per level");
    residual_ = y_;
    result_.estimate = VectorXd::Zero(D_.cols());
  }

  RecoveryResult run() {
    result_.residual_norm_history.push_back(residual_.norm());
    search(1, {});
    finalize();
    return std::move(result_);
  }

 private:
  bool stop() const { return rank_failed_ || residual_.norm() <= eps_; }

  bool covered_by(const std::vector<long>& theta, const std::vector<int>& path,
                  int t) const {
    if (theta.empty()) return false;
    const auto [lo, hi] = block_units(s_, t, path);
    for (long u = lo; u < hi; ++u)
      if (!std::binary_search(theta.begin(), theta.end(), u)) return false;
    return true;
  }

  void search(int t, const std::vector<int>& parent_path) {
    const int children = s_.dims[t - 1];
    const int budget = s_.sparsity[t - 1];
    const auto& mode_psi = psi_.modes[t - 1];
    const std::vector<long> theta = mode_psi.theta();
    std::vector<bool> visited(children, false);

    int used = 0;
    // PSI-known children first: full unit coverage by Theta^t.
    for (int i = 0; i < children && used < budget; ++i) {
      if (stop()) return;
      auto path = parent_path;
      path.push_back(i);
      if (!covered_by(theta, path, t)) continue;
      visit(t, path, /*known=*/true, theta);
      visited[i] = true;
      ++used;
    }
    while (used < budget && !stop()) {
      const int pick = select_child(t, parent_path, visited, theta);
      if (pick < 0) break;  // no unvisited candidate left
      auto path = parent_path;
      path.push_back(pick);
      visit(t, path, /*known=*/false, theta);
      visited[pick] = true;
      ++used;
    }
  }

  void visit(int t, const std::vector<int>& path, bool known,
             const std::vector<long>& theta) {
    if (observer_) {
      StepInfo info;
      info.mode = t;
      info.parent_path.assign(path.begin(), path.end() - 1);
      info.selected_units = sorted_selected();
      info.conditioning = merge(info.selected_units, theta);
      info.chosen_child = path.back();
      info.known = known;
      if (t < s_.n && !psi_.modes[t - 1].theta_star_delta.empty()) {
        info.weight_units = psi_.modes[t - 1].theta_star_delta;
        info.weights = augment_weights(t);
      }
      observer_(info);
    }
    result_.selections.push_back(
        {t, path, static_cast<int>(result_.selections.size()), known});
    if (t < s_.n) {
      search(t + 1, path);
    } else {
      append_unit(block_units(s_, t, path).first);
    }
  }

  // argmax_i || D_[i]^H P^perp (r + D_{Theta*Delta} w) ||_2, ties to the
  // lowest index.
  int select_child(int t, const std::vector<int>& parent_path,
                   const std::vector<bool>& visited, const std::vector<long>& theta) {
    VectorXd r = residual_;
    if (t < s_.n) augment(t, r, +1.0);
    VectorXd v;
    try {
      v = projector(theta).apply(r);
    } catch (const RankError&) {
      rank_failed_ = true;
      return -1;
    }
    const VectorXd corr = D_.transpose() * v;
    int best = -1;
    double best_score = -1.0;
    for (int i = 0; i < s_.dims[t - 1]; ++i) {
      if (visited[i]) continue;
      auto path = parent_path;
      path.push_back(i);
      const auto [lo, hi] = block_indices(s_, t, path);
      const double score = corr.segment(lo, hi - lo).norm();
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    return best;
  }

  ComplementProjector projector(const std::vector<long>& theta) const {
    const auto cond = merge(sorted_selected(), theta);
    if (cond.empty()) return ComplementProjector{};
    return ComplementProjector(columns_of_units(D_, cond, s_.unit_block));
  }

  VectorXd augment_weights(int t) const {
    const auto& sd = psi_.modes[t - 1].theta_star_delta;
    const auto& ws = psi_.weight_strategy;
    VectorXd w = VectorXd::Zero(static_cast<long>(sd.size()) * s_.unit_block);
    switch (ws.kind) {
      case WeightStrategy::Kind::zero:
        break;
      case WeightStrategy::Kind::scaled_correlation:
        w = ws.c * (columns_of_units(D_, sd, s_.unit_block).transpose() * residual_);
        break;
      case WeightStrategy::Kind::user_supplied: {
        if (ws.weights.size() != D_.cols())
          throw DomainError("hibomp_p: user weight vector must have length N");
        for (std::size_t i = 0; i < sd.size(); ++i)
          w.segment(static_cast<long>(i) * s_.unit_block, s_.unit_block) =
              ws.weights.segment(sd[i] * s_.unit_block, s_.unit_block);
        break;
      }
    }
    return w;
  }

  void augment(int t, VectorXd& r, double direction) const {
    const auto& sd = psi_.modes[t - 1].theta_star_delta;
    if (sd.empty() || psi_.weight_strategy.kind == WeightStrategy::Kind::zero)
      return;
    r += direction * (columns_of_units(D_, sd, s_.unit_block) * augment_weights(t));
  }

  void append_unit(long unit) {
    selected_.push_back(unit);
    try {
      const MatrixXd A = columns_of_units(D_, selected_, s_.unit_block);
      coef_ = ls_solve(A, y_);
      residual_ = y_ - A * coef_;
    } catch (const RankError&) {
      rank_failed_ = true;
      selected_.pop_back();
      return;
    }
    result_.residual_norm_history.push_back(residual_.norm());
  }

  std::vector<long> sorted_selected() const {
    auto v = selected_;
    std::sort(v.begin(), v.end());
    return v;
  }

  static std::vector<long> merge(std::vector<long> a, const std::vector<long>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
  }

  void finalize() {
    for (std::size_t i = 0; i < selected_.size(); ++i)
      result_.estimate.segment(selected_[i] * s_.unit_block, s_.unit_block) =
          coef_.segment(static_cast<long>(i) * s_.unit_block, s_.unit_block);
    result_.support = sorted_selected();
    if (rank_failed_)
      result_.status = RecoveryStatus::rank_failure;
    else if (residual_.norm() <= eps_)
      result_.status = RecoveryStatus::converged_tol;
    else
      result_.status = RecoveryStatus::max_sparsity;
  }

  const MatrixXd& D_;
  const VectorXd& y_;
  const HierStructure& s_;
  const PriorSupport& psi_;
  double eps_;
  StepObserver observer_;

  std::vector<long> selected_;  // unit ids in append order
  VectorXd coef_;               // LS coefficients over selected_
  VectorXd residual_;
  bool rank_failed_ = false;
  RecoveryResult result_;
};

}  // namespace detail

inline RecoveryResult hibomp_p(const MatrixXd& D, const VectorXd& y,
                               const HierStructure& s, const PriorSupport& psi,
                               double eps, StepObserver observer = nullptr) {
  return detail::HibompEngine(D, y, s, psi, eps, std::move(observer)).run();
}

inline RecoveryResult hibomp(const MatrixXd& D, const VectorXd& y,
                             const HierStructure& s, double eps,
                             StepObserver observer = nullptr) {
  return hibomp_p(D, y, s, PriorSupport::none(s), eps, std::move(observer));
}

// d = 1 reinterpretation: unit blocks of length d become one extra fully
// dense hierarchical mode, so no block structure is exploited.
inline HierStructure flatten_unit_blocks(const HierStructure& s) {
  if (s.unit_block == 1) return s;
  HierStructure f = s;
  f.dims.push_back(s.unit_block);
  f.sparsity.push_back(s.unit_block);
  f.unit_block = 1;
  f.n = s.n + 1;
  return f;
}

inline RecoveryResult hiomp(const MatrixXd& D, const VectorXd& y,
                            const HierStructure& s, double eps) {
  return hibomp(D, y, flatten_unit_blocks(s), eps);
}

inline RecoveryResult bomp(const MatrixXd& D, const VectorXd& y, int d, int k,
                           double eps) {
  if (d <= 0 || D.cols() % d != 0)
    throw DomainError("bomp: d must divide the column count");
  if (k == 0) {
    RecoveryResult r;
    r.estimate = VectorXd::Zero(D.cols());
    r.residual_norm_history.push_back(y.norm());
    r.status = y.norm() == 0.0 ? RecoveryStatus::converged_tol
                               : RecoveryStatus::max_sparsity;
    return r;
  }
  const HierStructure s =
      make_structure({static_cast<int>(D.cols() / d)}, d, {k});
  return hibomp(D, y, s, eps);
}

inline RecoveryResult omp(const MatrixXd& D, const VectorXd& y, int K,
                          double eps) {
  return bomp(D, y, 1, K, eps);
}

// The MOLS baseline is external work; this is the named plug-in slot.
struct MolsSlot {
  using Fn = std::function<RecoveryResult(const MatrixXd&, const VectorXd&,
                                          const HierStructure&, double)>;
  static Fn& hook() {
    static Fn fn;
    return fn;
  }
};

inline RecoveryResult mols(const MatrixXd& D, const VectorXd& y,
                           const HierStructure& s, double eps) {
  if (!MolsSlot::hook())
    throw DomainError("mols: external baseline not registered (MolsSlot::hook)");
  return MolsSlot::hook()(D, y, s, eps);
}

}  // namespace hiblock
