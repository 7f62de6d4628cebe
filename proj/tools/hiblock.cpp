// Command-line front end: coherence analysis, closed-form bounds, one-shot
// recovery, Monte Carlo sweeps, inequality verification suites and SVG plots.
// Exit codes: 0 success, 1 domain error (premise failure, infeasible PSI,
// malformed file), 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "hiblock/bench.hpp"
#include "hiblock/certificates.hpp"
#include "hiblock/coherence.hpp"
#include "hiblock/inequalities.hpp"
#include "hiblock/io.hpp"
#include "hiblock/recovery.hpp"
#include "hiblock/svg.hpp"

namespace {

using namespace hiblock;

HierStrategy parse_strategy(const std::string& text, std::uint64_t seed,
                            bool seed_given) {
  if (text == "exact") return HierStrategy::exact();
  if (text.rfind("sampled:", 0) == 0) {
    const long count = std::stol(text.substr(8));
    if (count <= 0) throw DomainError("--strategy sampled:N needs N >= 1");
    if (!seed_given)
      throw CLI::ValidationError("--seed", "required for the sampled strategy");
    return HierStrategy::sampled(count, seed);
  }
  throw CLI::ValidationError("--strategy", "expected 'exact' or 'sampled:N'");
}

int cmd_coherence(const std::string& matrix_path, int d,
                  const std::vector<int>& d_stars, long mode_block,
                  const std::string& strategy_text, std::uint64_t seed,
                  bool seed_given, const std::string& out_path) {
  const MatrixXd D = load_matrix(matrix_path);
  const HierStrategy strategy = parse_strategy(strategy_text, seed, seed_given);
  ProfileCache cache(D, d, strategy);
  for (int ds : d_stars) {
    cache.mu_hier(ds);
    cache.nu_hier(ds, mode_block > 0 ? mode_block : D.cols());
  }
  const json out = to_json(cache.snapshot());
  if (out_path.empty())
    std::cout << out.dump(2) << '\n';
  else
    write_file(out_path, out.dump(2) + "\n");
  return 0;
}

int cmd_recover(const std::string& matrix_path, const std::string& y_path,
                const std::string& structure_path, const std::string& psi_path,
                const std::string& algo, double eps, const std::string& format,
                const std::string& out_path) {
  const MatrixXd D = load_matrix(matrix_path);
  const VectorXd y = load_vector(y_path);
  const HierStructure s =
      structure_from_json(json::parse(read_file(structure_path)));
  PriorSupport psi = PriorSupport::none(s);
  if (!psi_path.empty()) psi = psi_from_json(json::parse(read_file(psi_path)));
  if (static_cast<int>(psi.modes.size()) != s.n)
    throw DomainError("recover: PSI mode count does not match the structure");
  if (eps < 0) eps = default_eps(y);

  RecoveryResult result;
  if (algo == "hibomp-p")
    result = hibomp_p(D, y, s, psi, eps);
  else if (algo == "hibomp")
    result = hibomp(D, y, s, eps);
  else if (algo == "hiomp")
    result = hiomp(D, y, s, eps);
  else if (algo == "bomp")
    result = bomp(D, y, s.unit_block, static_cast<int>(s.block_sparsity()), eps);
  else if (algo == "omp")
    result = omp(D, y, static_cast<int>(s.block_sparsity()) * s.unit_block, eps);
  else
    throw DomainError("recover: unknown --algo '" + algo + "'");

  if (format == "csv") {
    // Estimate as a one-column CSV vector.
    MatrixXd est(result.estimate.size(), 1);
    est.col(0) = result.estimate;
    if (out_path.empty()) {
      for (long i = 0; i < est.rows(); ++i)
        std::printf("%s\n", format_double(est(i, 0)).c_str());
    } else {
      save_matrix_csv(est, out_path);
    }
    return 0;
  }
  if (format != "json")
    throw DomainError("recover: --format must be json or csv");
  const json out = to_json(result);
  if (out_path.empty())
    std::cout << out.dump(2) << '\n';
  else
    write_file(out_path, out.dump(2) + "\n");
  return 0;
}

int cmd_sweep(const std::string& preset_name, const std::string& config_path,
              int trials, std::uint64_t seed, const std::string& out_path,
              int workers) {
  ExperimentConfig cfg;
  if (!preset_name.empty()) {
    auto all = presets();
    auto it = all.find(preset_name);
    if (it == all.end()) {
      std::string names;
      for (const auto& [k, v] : all) names += (names.empty() ? "" : ", ") + k;
      throw DomainError("unknown preset '" + preset_name + "' (have: " + names + ")");
    }
    cfg = it->second;
  } else if (!config_path.empty()) {
    cfg = config_from_json(json::parse(read_file(config_path)));
  } else {
    throw CLI::ValidationError("sweep", "need --preset or --config");
  }
  if (trials > 0) cfg.trials = trials;
  cfg.master_seed = seed;
  const auto rows = sweep(cfg, workers);
  const std::string csv = sweep_csv(rows);
  if (out_path.empty())
    std::cout << csv;
  else
    write_file(out_path, csv);
  return 0;
}

int cmd_verify(std::uint64_t seed, const std::string& suites, long count) {
  std::vector<IneqKind> kinds;
  if (suites == "all") {
    kinds = all_inequality_kinds();
  } else {
    std::stringstream ss(suites);
    std::string name;
    while (std::getline(ss, name, ',')) {
      bool found = false;
      for (IneqKind k : all_inequality_kinds())
        if (to_string(k) == name) {
          kinds.push_back(k);
          found = true;
        }
      if (!found) throw DomainError("unknown suite '" + name + "'");
    }
  }
  long total_violations = 0;
  for (IneqKind k : kinds) {
    const SuiteResult res = run_suite(k, count, seed);
    std::printf("%-24s trials=%ld premise_ok=%ld violations=%ld\n",
                to_string(k).c_str(), res.trials, res.premise_ok, res.violations);
    for (std::uint64_t s : res.counterexample_seeds)
      std::printf("  counterexample seed: %llu\n",
                  static_cast<unsigned long long>(s));
    total_violations += res.violations;
  }
  std::printf("total violations: %ld\n", total_violations);
  return total_violations == 0 ? 0 : 1;
}

struct BoundArgs {
  bool eldar = false, tropp = false, herzet = false, welch = false;
  bool kbar_star = false, kstar = false, mu_n = false;
  double mu = 0, nu = 0, mu_b = 0, k_prefix = 1.0;
  int d = 1, l_len = 1, dbar = 0, d_delta = 0;
  long m = 0, n = 0, good = 0, bad = 0, k_n = 1, a_bar = 0, beta = 0;
  // instance mode
  std::string matrix_path, structure_path, signal_path, psi_path, out_path;
  std::string strategy_text = "exact";
  std::uint64_t seed = 0;
  bool seed_given = false, allow_sampled = false;
};

// Instance mode: replay the selection sequence of the noiseless instance and
// emit the per-step certificate report plus the closed-form bounds the
// instance's coherence profile supports.
int cmd_bounds_instance(const BoundArgs& a) {
  if (a.structure_path.empty() || a.signal_path.empty())
    throw DomainError("bounds instance mode needs --matrix, --structure and --signal");
  const MatrixXd D = load_matrix(a.matrix_path);
  const HierStructure s =
      structure_from_json(json::parse(read_file(a.structure_path)));
  const HierSignal x = signal_from_coeffs(s, load_vector(a.signal_path));
  PriorSupport psi = PriorSupport::none(s);
  if (!a.psi_path.empty()) psi = psi_from_json(json::parse(read_file(a.psi_path)));
  ProfileCache cache(D, s.unit_block,
                     parse_strategy(a.strategy_text, a.seed, a.seed_given));
  const auto report =
      erc_certify(D, x, s, psi, -1.0, &cache, a.allow_sampled);

  json out = to_json(report);
  json bounds;
  // Bounds whose premises the instance violates are simply omitted.
  auto put = [&](const char* name, const std::function<double()>& fn) {
    try {
      bounds[name] = fn();
    } catch (const FormulaDomainError&) {
    }
  };
  put("tropp", [&] { return tropp_bound(cache.mu()); });
  put("eldar",
      [&] { return eldar_bound(cache.mu_block(), s.unit_block, cache.nu()); });
  put("kbar", [&] { return kbar_bound(cache.mu_block(), s.unit_block); });
  if (!report.steps.empty() && report.steps.front().t2 &&
      report.steps.front().t2->premise_ok) {
    const auto& t2 = *report.steps.front().t2;
    const int L = static_cast<int>(s.mode_block_len(1));
    put("kbar_star",
        [&] { return true_block_sparsity_bound(t2.mu_sp, 0.0, L, L, 1.0); });
    put("kbar_star_circ", [&] {
      return true_block_sparsity_bound(
          t2.mu_sp, welch_bound(D.rows(), D.cols()), L, L, 1.0);
    });
  }
  const auto& last = psi.modes.back();
  put("mu_n_threshold", [&] {
    return mu_n_threshold(s.sparsity[s.n - 1], last.counts.alpha_bar,
                          last.counts.beta);
  });
  out["bounds"] = bounds;
  out["coherence_profile"] = to_json(cache.snapshot());
  if (a.out_path.empty())
    std::cout << out.dump(2) << '\n';
  else
    write_file(a.out_path, out.dump(2) + "\n");
  return report.overall == StepVerdict::certified ? 0 : 1;
}

int cmd_bounds(const BoundArgs& a) {
  if (!a.matrix_path.empty()) return cmd_bounds_instance(a);
  bool any = false;
  if (a.eldar) {
    std::printf("eldar %.6f\n", eldar_bound(a.mu_b, a.d, a.nu));
    any = true;
  }
  if (a.tropp) {
    std::printf("tropp %.6f\n", tropp_bound(a.mu));
    any = true;
  }
  if (a.herzet) {
    std::printf("herzet %.6f\n", herzet_bound(a.mu, a.good, a.bad));
    any = true;
  }
  if (a.welch) {
    std::printf("welch %.6f\n", welch_bound(a.m, a.n));
    any = true;
  }
  if (a.kbar_star) {
    std::printf("kbar_star %.6f\n",
                true_block_sparsity_bound(a.mu, a.nu, a.l_len, a.dbar, a.k_prefix));
    any = true;
  }
  if (a.kstar) {
    std::printf("kstar %.6f\n",
                kstar_bound(a.mu, a.nu, a.l_len, a.d_delta, a.k_prefix));
    any = true;
  }
  if (a.mu_n) {
    std::printf("mu_n_threshold %.6f\n", mu_n_threshold(a.k_n, a.a_bar, a.beta));
    any = true;
  }
  if (!any)
    throw CLI::ValidationError(
        "bounds", "pick at least one of --eldar --tropp --herzet --welch "
                  "--kbar-star --kstar --mu-n-threshold");
  return 0;
}

int cmd_plot(const std::string& csv_path, const std::string& metric_name,
             bool log_y, const std::string& out_path) {
  const auto rows = sweep_rows_from_csv(read_file(csv_path));
  if (rows.empty()) throw DomainError("plot: CSV has no data rows");
  PlotMetric metric = PlotMetric::err;
  if (metric_name == "err")
    metric = PlotMetric::err;
  else if (metric_name == "nmse")
    metric = PlotMetric::nmse;
  else if (metric_name == "false-alarm")
    metric = PlotMetric::false_alarm;
  else
    throw DomainError("plot: unknown metric '" + metric_name + "'");
  write_file(out_path, render_svg(rows, metric, log_y, "sweep point"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical block-sparse recovery toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int trials = 0, workers = 0, d = 1;
  long count = 1000, mode_block = 0;
  double eps = -1.0;
  BoundArgs bounds;
  std::vector<int> d_stars;
  std::string matrix_path, y_path, structure_path, psi_path, out_path;
  std::string preset_name, config_path, suites = "all", algo = "hibomp-p";
  std::string strategy_text = "exact", metric_name = "err", csv_path;
  bool log_y = false;
  std::string format = "json";

  auto* c_coh = app.add_subcommand("coherence", "coherence profile of a matrix");
  c_coh->add_option("--matrix", matrix_path, "matrix file (CSV or HIBLKv01)")
      ->required();
  c_coh->add_option("--d", d, "unit block length")->required();
  c_coh->add_option("--d-star", d_stars, "hierarchical block lengths to profile");
  c_coh->add_option("--mode-block", mode_block, "mode block length for nu_{d*}");
  c_coh->add_option("--strategy", strategy_text, "exact or sampled:N");
  auto* coh_seed = c_coh->add_option("--seed", seed, "rng seed (sampled strategy)");
  c_coh->add_option("--out", out_path, "output JSON path (default stdout)");

  auto* c_rec = app.add_subcommand("recover", "one-shot recovery");
  c_rec->add_option("--matrix", matrix_path, "measurement matrix file")->required();
  c_rec->add_option("--measurements", y_path, "measurement vector file")->required();
  c_rec->add_option("--structure", structure_path, "structure JSON")->required();
  c_rec->add_option("--psi", psi_path, "PSI JSON (optional)");
  c_rec->add_option("--algo", algo, "hibomp-p|hibomp|hiomp|bomp|omp");
  c_rec->add_option("--eps", eps, "residual tolerance (default 1e-6*||y||)");
  c_rec->add_option("--format", format, "json (full result) or csv (estimate)");
  c_rec->add_option("--out", out_path, "output JSON path (default stdout)");

  auto* c_swp = app.add_subcommand("sweep", "Monte Carlo sweep");
  c_swp->add_option("--preset", preset_name, "preset name (fig3-sub-a, ...)");
  c_swp->add_option("--config", config_path, "experiment config JSON");
  c_swp->add_option("--trials", trials, "trials per point (overrides config)");
  c_swp->add_option("--seed", seed, "master seed")->required();
  c_swp->add_option("--out", out_path, "output CSV path (default stdout)");
  c_swp->add_option("--workers", workers, "worker threads (default HIBLK_THREADS)");

  auto* c_ver = app.add_subcommand("verify", "randomized inequality suites");
  c_ver->add_option("--seed", seed, "master seed")->required();
  c_ver->add_option("--suites", suites, "comma list or 'all'");
  c_ver->add_option("--count", count, "instances per suite");

  auto* c_bnd = app.add_subcommand("bounds", "closed-form sparsity bounds");
  c_bnd->add_flag("--eldar", bounds.eldar,
                  "Eldar block bound kd < (1/mu_B + d - (d-1)nu/mu_B)/2");
  c_bnd->add_flag("--tropp", bounds.tropp, "Tropp bound K < (1/mu + 1)/2");
  c_bnd->add_flag("--herzet", bounds.herzet,
                  "Herzet PSI bound K < (1/mu + g - b + 1)/2");
  c_bnd->add_flag("--welch", bounds.welch, "Welch coherence lower bound");
  c_bnd->add_flag("--kbar-star", bounds.kbar_star,
                  "true reconstructible block sparsity");
  c_bnd->add_flag("--kstar", bounds.kstar, "reconstructible sparsity K*");
  c_bnd->add_flag("--mu-n-threshold", bounds.mu_n, "last-mode coherence threshold");
  c_bnd->add_option("--mu", bounds.mu, "coherence mu (or mu_{d*}, by bound)");
  c_bnd->add_option("--mu-b", bounds.mu_b, "block coherence mu_B");
  c_bnd->add_option("--nu", bounds.nu, "sub-coherence");
  c_bnd->add_option("--d", bounds.d, "block length d");
  c_bnd->add_option("--l", bounds.l_len, "d* + d^Delta (or + d^{*Delta})");
  c_bnd->add_option("--dbar", bounds.dbar, "non-support block length");
  c_bnd->add_option("--d-delta", bounds.d_delta, "additional-support block length");
  c_bnd->add_option("--k-prefix", bounds.k_prefix, "k_0 k_1 ... k_{t-1}");
  c_bnd->add_option("--m", bounds.m, "measurement count M");
  c_bnd->add_option("--n", bounds.n, "ambient dimension N");
  c_bnd->add_option("--good", bounds.good, "good prior atoms g");
  c_bnd->add_option("--bad", bounds.bad, "bad prior atoms b");
  c_bnd->add_option("--k-n", bounds.k_n, "last-mode sparsity k_n");
  c_bnd->add_option("--alpha-bar", bounds.a_bar, "whole-block overlap count");
  c_bnd->add_option("--beta", bounds.beta, "non-support overlap count");
  c_bnd->add_option("--matrix", bounds.matrix_path,
                    "instance mode: measurement matrix file");
  c_bnd->add_option("--structure", bounds.structure_path,
                    "instance mode: structure JSON");
  c_bnd->add_option("--signal", bounds.signal_path,
                    "instance mode: true coefficient vector file");
  c_bnd->add_option("--psi", bounds.psi_path, "instance mode: PSI JSON");
  c_bnd->add_option("--strategy", bounds.strategy_text,
                    "instance mode: exact or sampled:N");
  auto* bnd_seed =
      c_bnd->add_option("--seed", bounds.seed, "instance mode: sampling seed");
  c_bnd->add_flag("--allow-sampled", bounds.allow_sampled,
                  "accept sampled (lower-bound) coherence in certificates");
  c_bnd->add_option("--out", bounds.out_path, "instance mode: output JSON path");

  auto* c_plt = app.add_subcommand("plot", "render a sweep CSV as SVG");
  c_plt->add_option("--csv", csv_path, "sweep CSV path")->required();
  c_plt->add_option("--metric", metric_name, "err|nmse|false-alarm");
  c_plt->add_flag("--log-y", log_y, "logarithmic y axis");
  c_plt->add_option("--out", out_path, "output SVG path")->required();

  try {
    app.parse(argc, argv);
    if (c_coh->parsed())
      return cmd_coherence(matrix_path, d, d_stars, mode_block, strategy_text,
                           seed, coh_seed->count() > 0, out_path);
    if (c_rec->parsed())
      return cmd_recover(matrix_path, y_path, structure_path, psi_path, algo,
                         eps, format, out_path);
    if (c_swp->parsed())
      return cmd_sweep(preset_name, config_path, trials, seed, out_path, workers);
    if (c_ver->parsed()) return cmd_verify(seed, suites, count);
    if (c_bnd->parsed()) {
      bounds.seed_given = bnd_seed->count() > 0;
      return cmd_bounds(bounds);
    }
    if (c_plt->parsed()) return cmd_plot(csv_path, metric_name, log_y, out_path);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: malformed JSON: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
