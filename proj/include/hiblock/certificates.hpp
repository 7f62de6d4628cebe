#pragma once

// Numeric certificates for every recovery condition: the exact per-step
// terms G*/G_circ, their coherence-only surrogates Gbar*/Gbar_circ with the
// delta-parameter set, the per-instance ERC replay, noisy-selection
// conditions, and the closed-form reconstructible-sparsity bounds.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hiblock/coherence.hpp"
#include "hiblock/core.hpp"
#include "hiblock/model.hpp"
#include "hiblock/recovery.hpp"

namespace hiblock {

struct FormulaDomainError : DomainError {
  using DomainError::DomainError;
};

// One selection step of HiBOMP-P, seen from the analysis side: the true
// index sets split per child block of the currently searched parent.
struct StepContext {
  int mode = 0;
  std::vector<int> parent_path;
  long k_t = 0;  // mode budget

  // Unit-block ids, grouped per child block (column order of the analysis).
  std::vector<std::vector<long>> star_groups;   // [Xi*\Theta, Theta^{*D}] per active child
  std::vector<std::vector<long>> delta_groups;  // Xi^D \ Theta \ Theta^{*D} per active child
  std::vector<std::vector<long>> bar_groups;    // inactive-child units \ Theta
  std::vector<std::vector<long>> circ_groups;   // remaining outside support \ Theta, d°-chunks
  std::vector<long> conditioning;               // selected u Theta^t

  // Column-wise block lengths (coefficients); uniform per-child lengths when
  // `uniform` holds, otherwise the maxima of ragged groups.
  int d_star = 0, d_delta = 0, d_star_delta = 0, d_bar = 0, d_circ = 0;
  bool uniform = true;

  long alpha_star = 0, alpha_bar = 0, alpha_delta = 0, alpha_star_delta = 0;
  long beta = 0, gamma = 0, r = 0, k_circ = 0;

  VectorXd x_rem;  // x^l: remaining signal, with augmentation weights on Theta^{*D}
  int unit_block = 1;
  long parent_block_len = 0;  // mode-(t-1) block length, for nu lookups
};

namespace detail {

inline std::vector<int> group_sizes(const std::vector<std::vector<long>>& groups,
                                    int d) {
  std::vector<int> sz;
  sz.reserve(groups.size());
  for (const auto& g : groups) sz.push_back(static_cast<int>(g.size()) * d);
  return sz;
}

inline std::vector<long> flatten_groups(const std::vector<std::vector<long>>& groups) {
  std::vector<long> all;
  for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
  return all;
}

inline VectorXd gather(const VectorXd& x, const std::vector<long>& units, int d) {
  VectorXd out(static_cast<long>(units.size()) * d);
  for (std::size_t i = 0; i < units.size(); ++i)
    out.segment(static_cast<long>(i) * d, d) = x.segment(units[i] * d, d);
  return out;
}

inline bool all_equal(const std::vector<std::vector<long>>& groups) {
  if (groups.empty()) return true;
  for (const auto& g : groups)
    if (g.size() != groups.front().size()) return false;
  return true;
}

}  // namespace detail

// Builds the analysis context for one argmax step of the engine, given the
// true signal. Selected units are removed from every set; PSI entries on the
// current mode are split by where they land.
inline StepContext build_step_context(const HierStructure& s, const HierSignal& x,
                                      const PriorSupport& psi, const StepInfo& info) {
  const int t = info.mode;
  StepContext ctx;
  ctx.mode = t;
  ctx.parent_path = info.parent_path;
  ctx.k_t = s.sparsity[t - 1];
  ctx.unit_block = s.unit_block;
  ctx.parent_block_len = s.mode_block_len(t - 1);
  ctx.conditioning = info.conditioning;

  const auto& mode_psi = psi.modes[t - 1];
  const auto theta_vec = mode_psi.theta();
  const std::set<long> theta(theta_vec.begin(), theta_vec.end());
  const std::set<long> star_delta(mode_psi.theta_star_delta.begin(),
                                  mode_psi.theta_star_delta.end());
  const std::set<long> selected(info.selected_units.begin(),
                                info.selected_units.end());
  const std::set<long> truth(x.flat_support.begin(), x.flat_support.end());
  const std::set<long> active_t(x.support_tree[t - 1].begin(),
                                x.support_tree[t - 1].end());

  // Remaining signal: selected entries zeroed, augmentation weights written
  // onto the Theta^{*Delta} slots used at this step.
  ctx.x_rem = x.coeffs;
  for (long u : info.selected_units)
    ctx.x_rem.segment(u * s.unit_block, s.unit_block).setZero();
  for (std::size_t i = 0; i < info.weight_units.size(); ++i)
    ctx.x_rem.segment(info.weight_units[i] * s.unit_block, s.unit_block) =
        info.weights.segment(static_cast<long>(i) * s.unit_block, s.unit_block);

  const long upm = s.mode_block_units(t);
  const auto [plo, phi] = block_units(s, t - 1, info.parent_path);
  const long first_child = plo / upm;

  for (int i = 0; i < s.dims[t - 1]; ++i) {
    const long lo = (first_child + i) * upm, hi = lo + upm;
    bool visited = false;
    for (long u = lo; u < hi && !visited; ++u) visited = selected.count(u) != 0;

    if (active_t.count(first_child + i)) {
      if (visited) continue;  // already handled in a previous iteration
      std::vector<long> star, sd, delta;
      for (long u = lo; u < hi; ++u) {
        const bool is_true = truth.count(u) != 0;
        if (theta.count(u)) {
          if (is_true)
            ++ctx.alpha_star;
          else
            ++ctx.alpha_delta;
          continue;
        }
        if (is_true)
          star.push_back(u);
        else if (star_delta.count(u))
          sd.push_back(u);
        else
          delta.push_back(u);
      }
      ctx.d_star = std::max<int>(ctx.d_star, static_cast<int>(star.size()) * s.unit_block);
      ctx.d_star_delta =
          std::max<int>(ctx.d_star_delta, static_cast<int>(sd.size()) * s.unit_block);
      ctx.d_delta =
          std::max<int>(ctx.d_delta, static_cast<int>(delta.size()) * s.unit_block);
      ctx.alpha_star_delta += static_cast<long>(sd.size());
      star.insert(star.end(), sd.begin(), sd.end());
      ctx.star_groups.push_back(std::move(star));
      ctx.delta_groups.push_back(std::move(delta));
    } else {
      std::vector<long> bar;
      for (long u = lo; u < hi; ++u) {
        if (selected.count(u)) continue;
        if (theta.count(u)) {
          ++ctx.beta;
          continue;
        }
        bar.push_back(u);
      }
      ctx.d_bar = std::max<int>(ctx.d_bar, static_cast<int>(bar.size()) * s.unit_block);
      ctx.bar_groups.push_back(std::move(bar));
    }
  }
  // Whole-block PSI coverage of this parent's children (stable across steps).
  {
    const std::vector<long> th = mode_psi.theta();
    for (int i = 0; i < s.dims[t - 1]; ++i) {
      const long lo = (first_child + i) * upm;
      bool whole = upm > 0;
      for (long u = lo; u < lo + upm && whole; ++u)
        whole = std::binary_search(th.begin(), th.end(), u);
      if (whole) ++ctx.alpha_bar;
    }
  }

  // Remaining true support outside this parent, minus Theta (= minus Theta°).
  std::vector<long> circ;
  for (long u : x.flat_support) {
    if (u >= plo && u < phi) continue;
    if (selected.count(u)) continue;
    if (theta.count(u)) {
      ++ctx.gamma;
      continue;
    }
    circ.push_back(u);
  }
  ctx.d_circ = ctx.d_star + ctx.d_star_delta + ctx.d_delta;
  const long chunk = std::max<long>(1, ctx.d_circ / s.unit_block);
  for (std::size_t i = 0; i < circ.size(); i += chunk)
    ctx.circ_groups.emplace_back(circ.begin() + i,
                                 circ.begin() + std::min(circ.size(), i + chunk));
  ctx.k_circ = static_cast<long>(ctx.circ_groups.size());
  ctx.r = ctx.alpha_star + ctx.alpha_delta + ctx.alpha_bar + ctx.beta + ctx.gamma;

  ctx.uniform = detail::all_equal(ctx.star_groups) &&
                detail::all_equal(ctx.delta_groups) &&
                (ctx.bar_groups.empty() || detail::all_equal(ctx.bar_groups));
  return ctx;
}

struct ExactStepTerms {
  double g_star = 0.0, g_circ = 0.0;
  double rho_star_bar = 0.0;   // rho_c(Apinv_star Abar)
  double cross_sum = 0.0;      // rho(Acirc^H Astar) + rho(Acirc^H Adelta)
  double rho_circ_bar = 0.0;   // rho_c(Acirc^H Abar)
  double sigma_min = 0.0;
  double norm_star = 0.0, norm_circ = 0.0;
  bool premise_ok = true;
  std::string note;
};

inline ExactStepTerms exact_step_terms(const MatrixXd& D, const StepContext& ctx) {
  ExactStepTerms out;
  auto fail = [&](const std::string& why) {
    out.premise_ok = false;
    out.note = why;
    return out;
  };
  const int d = ctx.unit_block;
  const auto star_units = detail::flatten_groups(ctx.star_groups);
  if (star_units.empty()) return fail("no remaining true support in the block");

  ComplementProjector proj;
  try {
    proj = ctx.conditioning.empty()
               ? ComplementProjector{}
               : ComplementProjector(
                     detail::columns_of_units(D, ctx.conditioning, d));
  } catch (const RankError&) {
    return fail("D_{Xi u Theta} is rank deficient");
  }

  const auto bar_units = detail::flatten_groups(ctx.bar_groups);
  const auto delta_units = detail::flatten_groups(ctx.delta_groups);
  const auto circ_units = detail::flatten_groups(ctx.circ_groups);
  const MatrixXd A_star = proj.apply(detail::columns_of_units(D, star_units, d));
  const auto star_sizes = detail::group_sizes(ctx.star_groups, d);
  const auto bar_sizes = detail::group_sizes(ctx.bar_groups, d);
  const auto delta_sizes = detail::group_sizes(ctx.delta_groups, d);
  const auto circ_sizes = detail::group_sizes(ctx.circ_groups, d);

  out.sigma_min = min_singular(A_star.transpose() * A_star);
  if (out.sigma_min <= 1e-12)
    return fail("projected support columns are rank deficient");

  if (!bar_units.empty()) {
    const MatrixXd A_bar = proj.apply(detail::columns_of_units(D, bar_units, d));
    Eigen::ColPivHouseholderQR<MatrixXd> qr(A_star);
    out.rho_star_bar = rho_c_grouped(qr.solve(A_bar), star_sizes, bar_sizes);
  }

  out.norm_star =
      mixed_norm_grouped(detail::gather(ctx.x_rem, star_units, d),
                         star_sizes, MixedP::inf);
  if (out.norm_star <= 0.0) return fail("remaining in-block signal has zero norm");

  if (!circ_units.empty()) {
    const MatrixXd A_circ = proj.apply(detail::columns_of_units(D, circ_units, d));
    double cross = rho_c_grouped(A_circ.transpose() * A_star, circ_sizes, star_sizes);
    if (!delta_units.empty()) {
      const MatrixXd A_delta =
          proj.apply(detail::columns_of_units(D, delta_units, d));
      cross += rho_c_grouped(A_circ.transpose() * A_delta, circ_sizes, delta_sizes);
    }
    out.cross_sum = cross;
    if (!bar_units.empty()) {
      const MatrixXd A_bar = proj.apply(detail::columns_of_units(D, bar_units, d));
      out.rho_circ_bar =
          rho_c_grouped(A_circ.transpose() * A_bar, circ_sizes, bar_sizes);
    }
    out.norm_circ = mixed_norm_grouped(detail::gather(ctx.x_rem, circ_units, d),
                                       circ_sizes, MixedP::inf);
  }

  const double ratio = out.norm_circ / out.norm_star;
  const double denom_star =
      1.0 - std::sqrt(out.cross_sum) / out.sigma_min * ratio;
  if (denom_star <= 0.0) return fail("G* denominator is not positive");
  out.g_star = out.rho_star_bar / denom_star;

  if (out.norm_circ > 0.0) {
    const double denom_circ =
        out.sigma_min * (out.norm_star / out.norm_circ) - std::sqrt(out.cross_sum);
    if (denom_circ <= 0.0) return fail("G_circ denominator is not positive");
    out.g_circ = out.rho_circ_bar / denom_circ;
  }
  return out;
}

struct DeltaParams {
  double d_sp_dbar = 0.0;    // delta_{d*+d^{*D}, dbar}
  double d_circ_sp = 0.0;    // delta_{d°, d*+d^{*D}}
  double d_circ_delta = 0.0; // delta_{d°, d^D}
  double d_circ_dbar = 0.0;  // delta_{d°, dbar}
  double sigma_min = 0.0;    // delta_{sigma_min}
};

struct CoherenceStepTerms {
  double gbar_star = 0.0, gbar_circ = 0.0;
  DeltaParams delta;
  double mu_sp = 0.0, nu_sp = 0.0, mu_circ = 0.0, nu_circ = 0.0;
  bool premise_ok = true;
  std::string note;
};

inline CoherenceStepTerms coherence_step_terms(const HierStructure& s,
                                               const StepContext& ctx,
                                               ProfileCache& cache,
                                               bool allow_sampled = false) {
  CoherenceStepTerms out;
  auto fail = [&](const std::string& why) {
    out.premise_ok = false;
    out.note = why;
    return out;
  };
  if (!ctx.uniform)
    return fail("per-child PSI coverage is not uniform; delta parameters undefined");
  const int L = ctx.d_star + ctx.d_star_delta;
  if (L <= 0) return fail("no remaining true support in the block");
  const double kt_rem = static_cast<double>(ctx.k_t - ctx.alpha_bar);
  const double rd = static_cast<double>(ctx.r) * s.unit_block;

  auto fetch_mu = [&](int len, double& mu) -> bool {
    try {
      const HierEstimate& est = cache.mu_hier(len);
      if (!est.exact && !allow_sampled) return false;
      mu = est.value;
      return true;
    } catch (const DomainError&) {
      return false;
    }
  };
  if (!fetch_mu(L, out.mu_sp))
    return fail("hierarchical block coherence at d*+d^{*D} unavailable "
                "(sampled estimates need the explicit override)");
  out.nu_sp = cache.nu_hier(L, ctx.parent_block_len);

  const auto ceil_div = [](double a, double b) { return std::ceil(a / b); };
  const double denom_r =
      1.0 - (L - 1) * out.nu_sp - (ceil_div(rd, L) - 1.0) * L * out.mu_sp;
  const double denom_k =
      1.0 - (L - 1) * out.nu_sp - (kt_rem - 1.0) * L * out.mu_sp;
  if (denom_r <= 0.0)
    return fail("premise (d*+d^{*D}-1)nu + (ceil(rd/L)-1)L mu < 1 fails");
  if (denom_k <= 0.0)
    return fail("premise (d*+d^{*D}-1)nu + (k_t-abar-1)L mu < 1 fails");

  out.delta.sigma_min =
      denom_k - (L * L * out.mu_sp * out.mu_sp * ceil_div(rd, L) * kt_rem) / denom_r;
  if (out.delta.sigma_min <= 0.0) return fail("delta_{sigma_min} is not positive");

  const double dbar = ctx.d_bar;
  out.delta.d_sp_dbar =
      (ceil_div(dbar, L) * kt_rem * L * out.mu_sp +
       kt_rem * L * L * out.mu_sp * out.mu_sp * ceil_div(dbar, L) * ceil_div(rd, L) /
           denom_r) /
      out.delta.sigma_min;

  double norm_star = 0.0, norm_circ = 0.0;
  {
    const int d = ctx.unit_block;
    norm_star = mixed_norm_grouped(
        detail::gather(ctx.x_rem, detail::flatten_groups(ctx.star_groups), d),
        detail::group_sizes(ctx.star_groups, d), MixedP::inf);
    norm_circ = mixed_norm_grouped(
        detail::gather(ctx.x_rem, detail::flatten_groups(ctx.circ_groups), d),
        detail::group_sizes(ctx.circ_groups, d), MixedP::inf);
  }
  if (norm_star <= 0.0) return fail("remaining in-block signal has zero norm");

  if (!ctx.circ_groups.empty() && norm_circ > 0.0) {
    const double dcirc = ctx.d_circ;
    if (!fetch_mu(ctx.d_circ, out.mu_circ))
      return fail("hierarchical block coherence at d° unavailable");
    out.nu_circ = cache.nu_hier(ctx.d_circ, ctx.parent_block_len);
    const double denom_circ = 1.0 - (dcirc - 1) * out.nu_circ -
                              (ceil_div(rd, dcirc) - 1.0) * dcirc * out.mu_circ;
    if (denom_circ <= 0.0)
      return fail("premise (d°-1)nu + (ceil(rd/d°)-1)d° mu < 1 fails");
    const double inner =
        ctx.k_circ * dcirc * out.mu_circ +
        (ctx.k_circ - ctx.gamma) * dcirc * dcirc * out.mu_circ * out.mu_circ *
            ceil_div(rd, dcirc) / denom_circ;
    out.delta.d_circ_sp = ceil_div(L, dcirc) * inner;
    out.delta.d_circ_delta = ceil_div(ctx.d_delta, dcirc) * inner;
    out.delta.d_circ_dbar = ceil_div(dbar, dcirc) * inner;

    const double ratio = norm_circ / norm_star;
    const double root = std::sqrt(out.delta.d_circ_sp + out.delta.d_circ_delta);
    const double denom_star = 1.0 - root / out.delta.sigma_min * ratio;
    if (denom_star <= 0.0) return fail("Gbar* denominator is not positive");
    out.gbar_star = out.delta.d_sp_dbar / denom_star;
    const double denom_g = out.delta.sigma_min / ratio - root;
    if (denom_g <= 0.0) return fail("Gbar_circ denominator is not positive");
    out.gbar_circ = out.delta.d_circ_dbar / denom_g;
  } else {
    out.gbar_star = out.delta.d_sp_dbar;
    out.gbar_circ = 0.0;
  }
  return out;
}

enum class StepVerdict { certified, violated, premise_failed };

struct StepRecord {
  int mode = 0;
  std::vector<int> parent_path;
  int chosen_child = -1;
  ExactStepTerms t1;
  std::optional<CoherenceStepTerms> t2;
  StepVerdict verdict = StepVerdict::premise_failed;
};

struct CertificateReport {
  std::vector<StepRecord> steps;
  StepVerdict overall = StepVerdict::certified;
  bool support_exact = false;  // replayed run recovered the true support
};

// Replays HiBOMP-P's selection sequence on the noiseless instance y = Dx and
// evaluates the exact step terms (plus the coherence surrogates when a cache
// is supplied) at every argmax step.
inline CertificateReport erc_certify(const MatrixXd& D, const HierSignal& x,
                                     const HierStructure& s, const PriorSupport& psi,
                                     double eps = -1.0,
                                     ProfileCache* cache = nullptr,
                                     bool allow_sampled = false) {
  const VectorXd y = D * x.coeffs;
  if (eps < 0.0) eps = default_eps(y);
  std::vector<StepInfo> infos;
  const RecoveryResult run = hibomp_p(
      D, y, s, psi, eps, [&](const StepInfo& info) { infos.push_back(info); });

  CertificateReport report;
  for (const auto& info : infos) {
    if (info.known) continue;
    StepRecord rec;
    rec.mode = info.mode;
    rec.parent_path = info.parent_path;
    rec.chosen_child = info.chosen_child;
    const StepContext ctx = build_step_context(s, x, psi, info);
    rec.t1 = exact_step_terms(D, ctx);
    if (cache) rec.t2 = coherence_step_terms(s, ctx, *cache, allow_sampled);
    if (!rec.t1.premise_ok)
      rec.verdict = StepVerdict::premise_failed;
    else
      rec.verdict = (rec.t1.g_star + rec.t1.g_circ < 1.0) ? StepVerdict::certified
                                                          : StepVerdict::violated;
    report.steps.push_back(std::move(rec));
  }
  report.overall = StepVerdict::certified;
  for (const auto& rec : report.steps) {
    if (rec.verdict == StepVerdict::violated) {
      report.overall = StepVerdict::violated;
      break;
    }
    if (rec.verdict == StepVerdict::premise_failed)
      report.overall = StepVerdict::premise_failed;
  }
  report.support_exact = run.support == x.flat_support;
  return report;
}

// --- Noisy recovery conditions -------------------------------------------

struct NoisyVerdict {
  bool holds_noise_vector = false, holds_noise_bound = false, holds_l2_form = false;
  double lhs_mixed = 0.0, lhs_coro3 = 0.0;
  double rhs_noise_vector = 0.0, rhs_noise_bound = 0.0;
  bool premise_ok = true;
  std::string note;
};

// eps is the residual-tolerance noise bound ||n|| <= eps; when the actual
// noise vector is supplied, the instance-noise form is evaluated too.
inline NoisyVerdict noisy_conditions(const MatrixXd& D, const HierStructure& s,
                                     const StepContext& ctx, ProfileCache& cache,
                                     double eps, const VectorXd* noise = nullptr,
                                     bool allow_sampled = false) {
  NoisyVerdict out;
  const CoherenceStepTerms t2 = coherence_step_terms(s, ctx, cache, allow_sampled);
  if (!t2.premise_ok) {
    out.premise_ok = false;
    out.note = t2.note;
    return out;
  }
  const double gsum = t2.gbar_star + t2.gbar_circ;
  if (gsum >= 1.0) {
    out.premise_ok = false;
    out.note = "Gbar* + Gbar_circ >= 1";
    return out;
  }
  const int d = ctx.unit_block;
  const int L = ctx.d_star + ctx.d_star_delta;
  const auto star_units = detail::flatten_groups(ctx.star_groups);
  const auto circ_units = detail::flatten_groups(ctx.circ_groups);
  const VectorXd x_star = detail::gather(ctx.x_rem, star_units, d);
  const VectorXd x_circ = detail::gather(ctx.x_rem, circ_units, d);
  const double norm_star_mixed = mixed_norm_grouped(
      x_star, detail::group_sizes(ctx.star_groups, d), MixedP::inf);
  // The noisy conditions chunk the outside norm at d*+d^{*D}+d^D.
  const double norm_circ_mixed =
      circ_units.empty()
          ? 0.0
          : mixed_norm_grouped(
                x_circ,
                detail::uniform_groups(static_cast<long>(x_circ.size()),
                                       std::max(1, L + ctx.d_delta)),
                MixedP::inf);
  const double root = std::sqrt(t2.delta.d_circ_sp + t2.delta.d_circ_delta);
  out.lhs_mixed = t2.delta.sigma_min * norm_star_mixed - root * norm_circ_mixed;
  out.lhs_coro3 =
      t2.delta.sigma_min * x_star.norm() / std::sqrt(static_cast<double>(ctx.k_t)) -
      root * x_circ.norm();
  out.rhs_noise_bound =
      2.0 * std::sqrt(static_cast<double>(ctx.d_bar)) * eps / (1.0 - gsum);
  out.holds_noise_bound = out.lhs_mixed > out.rhs_noise_bound;
  out.holds_l2_form = out.lhs_coro3 > out.rhs_noise_bound;
  if (noise != nullptr) {
    const auto bar_units = detail::flatten_groups(ctx.bar_groups);
    double noise_term = 0.0;
    if (!bar_units.empty()) {
      ComplementProjector proj =
          ctx.conditioning.empty()
              ? ComplementProjector{}
              : ComplementProjector(detail::columns_of_units(D, ctx.conditioning, d));
      const MatrixXd A_bar = proj.apply(detail::columns_of_units(D, bar_units, d));
      noise_term = mixed_norm_grouped(A_bar.transpose() * (*noise),
                                      detail::group_sizes(ctx.bar_groups, d),
                                      MixedP::inf);
    }
    out.rhs_noise_vector = 2.0 * noise_term / (1.0 - gsum);
    out.holds_noise_vector = out.lhs_mixed > out.rhs_noise_vector;
  } else {
    out.rhs_noise_vector = out.rhs_noise_bound;
    out.holds_noise_vector = out.holds_noise_bound;
  }
  return out;
}

// --- Closed-form reconstructible-sparsity bounds --------------------------

inline void require_domain(bool ok, const std::string& premise) {
  if (!ok) throw FormulaDomainError("bound formula premise violated: " + premise);
}

// K < (1/2)(1/mu + 1)
inline double tropp_bound(double mu) {
  require_domain(mu > 0.0, "mu > 0");
  return 0.5 * (1.0 / mu + 1.0);
}

// K < (1/2)(1/mu + g - b + 1), g/b good/bad prior atoms
inline double herzet_bound(double mu, long good, long bad) {
  require_domain(mu > 0.0, "mu > 0");
  return 0.5 * (1.0 / mu + static_cast<double>(good - bad) + 1.0);
}

// kd < (1/2)(1/mu_B + d - (d-1) nu/mu_B)
inline double eldar_bound(double mu_b, int d, double nu) {
  require_domain(mu_b > 0.0, "mu_B > 0");
  return 0.5 * (1.0 / mu_b + d - (d - 1) * nu / mu_b);
}

// K* family: kd* <= k_prefix * ((1/mu)(1 - (d*-1)nu) + d*) / (1 + ceil(dD/d*))
inline double kstar_bound(double mu_ds, double nu_ds, int d_star, int d_delta,
                          double k_prefix) {
  require_domain(mu_ds > 0.0, "mu_{d*} > 0");
  require_domain(d_star >= 1, "d* >= 1");
  const double num = (1.0 / mu_ds) * (1.0 - (d_star - 1) * nu_ds) + d_star;
  const double den = 1.0 + std::ceil(static_cast<double>(d_delta) / d_star);
  return k_prefix * num / den;
}

// Per-mode bound with empty PSI: k_t L < (1/mu - (L-1)nu/mu + L) / (ceil(dbar/L)+1)
inline double mode_sparsity_bound(double mu, double nu, int L, int dbar) {
  require_domain(mu > 0.0, "mu_{d*+dD} > 0");
  require_domain(L >= 1, "d*+dD >= 1");
  const double num = 1.0 / mu - (L - 1) * nu / mu + L;
  const double den = std::ceil(static_cast<double>(dbar) / L) + 1.0;
  return num / den;
}

// True reconstructible block sparsity (k_prefix = k_0 k_1 ... k_{t-1});
// nu = 0 gives Kbar*, nu = welch_bound(M, N) gives Kbar*_circ.
inline double true_block_sparsity_bound(double mu, double nu, int L, int dbar,
                                        double k_prefix) {
  return k_prefix * mode_sparsity_bound(mu, nu, L, dbar);
}

// Eldar's block bound at nu = 0: kd < (1/2)(1/mu_B + d)
inline double kbar_bound(double mu_b, int d) {
  require_domain(mu_b > 0.0, "mu_B > 0");
  return 0.5 * (1.0 / mu_b + d);
}

// mu_n < 1 / (2 k_n - abar + beta - 1)
inline double mu_n_threshold(long k_n, long alpha_bar, long beta) {
  const long den = 2 * k_n - alpha_bar + beta - 1;
  require_domain(den > 0, "2 k_n - abar + beta - 1 > 0");
  return 1.0 / static_cast<double>(den);
}

// PSI-aware optimal-structure bound:
// k_t L < (1/mu - (L-1)nu/mu + L) / ((ceil(dbar/L)+1) * q) + abar L, with
// q = (1-(L-1)nu+L mu) / (1-(L-1)nu-(ceil(rd/L)-1) L mu).
inline double psi_sparsity_bound(double mu, double nu, int L, int dbar, long r, int d,
                             long alpha_bar) {
  require_domain(mu > 0.0, "mu_{d*+d*D} > 0");
  require_domain(L >= 1, "d*+d*D >= 1");
  const double rd = static_cast<double>(r) * d;
  const double denom_r = 1.0 - (L - 1) * nu - (std::ceil(rd / L) - 1.0) * L * mu;
  require_domain(denom_r > 0.0,
                 "(d*+d*D-1)nu + (ceil(rd/(d*+d*D))-1)(d*+d*D)mu < 1");
  const double q = (1.0 - (L - 1) * nu + L * mu) / denom_r;
  const double num = 1.0 / mu - (L - 1) * nu / mu + L;
  return num / ((std::ceil(static_cast<double>(dbar) / L) + 1.0) * q) +
         static_cast<double>(alpha_bar) * L;
}

struct SigmaMinQuadInputs {
  double ratio_star_circ = 1.0;  // ||x_star||_{(L)2,inf} / ||x_circ||_{(d°)2,inf}
  int L = 1;                     // d* + d^{*D}
  int dbar = 1;
  int d_delta = 0;
  int d_circ = 1;
  long k_circ = 0;
  double mu_L = 0.0;     // mu_{d*+d^{*D}}
  double mu_circ = 0.0;  // mu_{d°}
  double mu_block = 0.0; // mu_B, for the final bound
};

struct SigmaMinQuadResult {
  double a = 0.0, b = 0.0, c = 0.0;
  double discriminant = 0.0;
  double delta_sigma_lb = 0.0;  // lower bound on delta'_{sigma_min}
  double k_star = 0.0;          // L + (1 - lb)/mu_B
};

// Quadratic analysis of the hierarchical-block-orthogonal case (r = 0,
// dbar/L integral): A x^2 + B x + C < 0 solved for delta'_{sigma_min}.
inline SigmaMinQuadResult sigma_min_quadratic(const SigmaMinQuadInputs& in) {
  require_domain(in.L >= 1, "d*+d*D >= 1");
  require_domain(in.dbar % in.L == 0, "dbar/(d*+d*D) must be integral");
  require_domain(in.ratio_star_circ > 0.0, "norm ratio > 0");
  require_domain(in.mu_block > 0.0, "mu_B > 0");
  const double frac = static_cast<double>(in.dbar) / in.L;
  const double kd = static_cast<double>(in.k_circ) * in.d_circ * in.mu_circ;
  const double d_circ_sp =
      std::ceil(static_cast<double>(in.L) / in.d_circ) * kd;
  const double d_circ_delta =
      std::ceil(static_cast<double>(in.d_delta) / in.d_circ) * kd;
  const double d_circ_dbar =
      std::ceil(static_cast<double>(in.dbar) / in.d_circ) * kd;
  const double root = std::sqrt(d_circ_sp + d_circ_delta);

  SigmaMinQuadResult out;
  out.a = -in.ratio_star_circ * (frac + 1.0);
  out.b = frac * root + (frac + in.dbar * in.mu_L) * in.ratio_star_circ +
          d_circ_dbar + 2.0 * root;
  out.c = -(frac + in.dbar * in.mu_L) * root -
          d_circ_dbar * root / in.ratio_star_circ -
          (d_circ_sp + d_circ_delta) / in.ratio_star_circ;
  out.discriminant = out.b * out.b - 4.0 * out.a * out.c;
  require_domain(out.discriminant >= 0.0, "discriminant B^2 - 4AC >= 0");
  require_domain(out.a != 0.0, "quadratic coefficient A != 0");
  out.delta_sigma_lb = (-out.b - std::sqrt(out.discriminant)) / (2.0 * out.a);
  out.k_star = in.L + (1.0 - out.delta_sigma_lb) / in.mu_block;
  return out;
}

}  // namespace hiblock
