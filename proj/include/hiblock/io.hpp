#pragma once

// File formats: headerless CSV of decimal floats (row-major), the HIBLKv01
// little-endian binary matrix container, JSON documents for structures, PSI,
// configs, profiles and reports, and the sweep CSV schema.

#include <Eigen/Dense>

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hiblock/bench.hpp"
#include "hiblock/certificates.hpp"
#include "hiblock/coherence.hpp"
#include "hiblock/model.hpp"
#include "hiblock/recovery.hpp"

namespace hiblock {

using nlohmann::json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- matrices --------------------------------------------------------------

inline void save_matrix_csv(const MatrixXd& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

inline MatrixXd load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError(path + ": malformed CSV cell '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path + ": ragged CSV rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": empty CSV matrix");
  MatrixXd m(static_cast<long>(rows.size()), static_cast<long>(rows[0].size()));
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

inline constexpr char kBinaryMagic[8] = {'H', 'I', 'B', 'L', 'K', 'v', '0', '1'};

inline void save_matrix_binary(const MatrixXd& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kBinaryMagic, 8);
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.rows()),
                                 static_cast<std::uint64_t>(m.cols())};
  out.write(reinterpret_cast<const char*>(dims), 16);
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), 8);
    }
}

inline MatrixXd load_matrix_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kBinaryMagic, 8) != 0)
    throw IoError(path + ": bad magic, not a HIBLKv01 file");
  std::uint64_t dims[2];
  in.read(reinterpret_cast<char*>(dims), 16);
  if (in.gcount() != 16) throw IoError(path + ": truncated header");
  MatrixXd m(static_cast<long>(dims[0]), static_cast<long>(dims[1]));
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), 8);
      if (in.gcount() != 8) throw IoError(path + ": truncated payload");
      m(i, j) = v;
    }
  return m;
}

// Auto-detects the binary magic, falls back to CSV.
inline MatrixXd load_matrix(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot read " + path);
  char magic[8] = {0};
  probe.read(magic, 8);
  probe.close();
  if (std::memcmp(magic, kBinaryMagic, 8) == 0) return load_matrix_binary(path);
  return load_matrix_csv(path);
}

inline VectorXd load_vector(const std::string& path) {
  const MatrixXd m = load_matrix(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw IoError(path + ": expected a vector (one row or one column)");
}

// --- JSON ------------------------------------------------------------------

inline json to_json(const HierStructure& s) {
  return json{{"n", s.n},
              {"dims", s.dims},
              {"unit_block", s.unit_block},
              {"sparsity", s.sparsity}};
}

inline HierStructure structure_from_json(const json& j) {
  const auto s = make_structure(j.at("dims").get<std::vector<int>>(),
                                j.at("unit_block").get<int>(),
                                j.at("sparsity").get<std::vector<int>>());
  if (j.contains("n") && j.at("n").get<int>() != s.n)
    throw IoError("structure json: n does not match dims length");
  return s;
}

inline json to_json(const WeightStrategy& w) {
  switch (w.kind) {
    case WeightStrategy::Kind::zero:
      return json{{"kind", "zero"}};
    case WeightStrategy::Kind::scaled_correlation:
      return json{{"kind", "scaled-correlation"}, {"c", w.c}};
    case WeightStrategy::Kind::user_supplied: {
      std::vector<double> v(w.weights.data(), w.weights.data() + w.weights.size());
      return json{{"kind", "user-supplied"}, {"weights", v}};
    }
  }
  return {};
}

inline WeightStrategy weight_strategy_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") return WeightStrategy::zero();
  if (kind == "scaled-correlation")
    return WeightStrategy::scaled(j.value("c", 1.0));
  if (kind == "user-supplied") {
    const auto v = j.at("weights").get<std::vector<double>>();
    VectorXd w(static_cast<long>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) w[static_cast<long>(i)] = v[i];
    return WeightStrategy::user(std::move(w));
  }
  throw IoError("unknown weight_strategy kind '" + kind + "'");
}

inline json to_json(const PriorSupport& psi) {
  json modes = json::array();
  for (const auto& m : psi.modes) {
    modes.push_back(json{{"theta_star", m.theta_star},
                         {"theta_delta", m.theta_delta},
                         {"theta_minus", m.theta_minus},
                         {"theta_circ", m.theta_circ},
                         {"theta_star_delta", m.theta_star_delta}});
  }
  return json{{"modes", modes}, {"weight_strategy", to_json(psi.weight_strategy)}};
}

inline PriorSupport psi_from_json(const json& j) {
  PriorSupport psi;
  for (const auto& jm : j.at("modes")) {
    PsiMode m;
    m.theta_star = jm.value("theta_star", std::vector<long>{});
    m.theta_delta = jm.value("theta_delta", std::vector<long>{});
    m.theta_minus = jm.value("theta_minus", std::vector<long>{});
    m.theta_circ = jm.value("theta_circ", std::vector<long>{});
    m.theta_star_delta = jm.value("theta_star_delta", std::vector<long>{});
    psi.modes.push_back(std::move(m));
  }
  psi.weight_strategy = j.contains("weight_strategy")
                            ? weight_strategy_from_json(j.at("weight_strategy"))
                            : WeightStrategy::zero();
  return psi;
}

inline json to_json(const CoherenceProfile& p) {
  json mu_hier = json::array();
  for (const auto& [d_star, est] : p.mu_hier)
    mu_hier.push_back(json{{"d_star", d_star},
                           {"value", est.value},
                           {"strategy", est.exact ? "exact" : "sampled"},
                           {"pairs_evaluated", est.pairs_evaluated},
                           {"sample_count", est.sample_count},
                           {"seed", est.seed},
                           {"lower_bound_only", !est.exact}});
  json nu_hier = json::array();
  for (const auto& [key, value] : p.nu_hier)
    nu_hier.push_back(json{{"d_star", key.first},
                           {"mode_block", key.second},
                           {"value", value}});
  return json{{"mu", p.mu},       {"mu_block", p.mu_block}, {"nu_sub", p.nu_sub},
              {"d", p.d},         {"mu_hier", mu_hier},     {"nu_hier", nu_hier}};
}

inline const char* to_string(RecoveryStatus s) {
  switch (s) {
    case RecoveryStatus::converged_tol: return "converged_tol";
    case RecoveryStatus::max_sparsity: return "max_sparsity";
    case RecoveryStatus::rank_failure: return "rank_failure";
  }
  return "?";
}

inline json to_json(const RecoveryResult& r) {
  std::vector<double> est(r.estimate.data(), r.estimate.data() + r.estimate.size());
  json selections = json::array();
  for (const auto& sel : r.selections)
    selections.push_back(json{{"mode", sel.mode},
                              {"path", sel.path},
                              {"step", sel.step},
                              {"known", sel.known}});
  return json{{"support", r.support},
              {"estimate", est},
              {"residual_norm_history", r.residual_norm_history},
              {"selections", selections},
              {"status", to_string(r.status)}};
}

inline const char* to_string(StepVerdict v) {
  switch (v) {
    case StepVerdict::certified: return "certified";
    case StepVerdict::violated: return "violated";
    case StepVerdict::premise_failed: return "premise_failed";
  }
  return "?";
}

inline json to_json(const ExactStepTerms& t) {
  return json{{"g_star", t.g_star},
              {"g_circ", t.g_circ},
              {"g_sum", t.g_star + t.g_circ},
              {"rho_star_bar", t.rho_star_bar},
              {"cross_sum", t.cross_sum},
              {"rho_circ_bar", t.rho_circ_bar},
              {"sigma_min", t.sigma_min},
              {"norm_star", t.norm_star},
              {"norm_circ", t.norm_circ},
              {"premise_ok", t.premise_ok},
              {"note", t.note}};
}

inline json to_json(const CoherenceStepTerms& t) {
  return json{{"gbar_star", t.gbar_star},
              {"gbar_circ", t.gbar_circ},
              {"gbar_sum", t.gbar_star + t.gbar_circ},
              {"delta",
               json{{"d_star_dbar", t.delta.d_sp_dbar},
                    {"d_circ_star", t.delta.d_circ_sp},
                    {"d_circ_delta", t.delta.d_circ_delta},
                    {"d_circ_dbar", t.delta.d_circ_dbar},
                    {"sigma_min", t.delta.sigma_min}}},
              {"mu_star", t.mu_sp},
              {"nu_star", t.nu_sp},
              {"mu_circ", t.mu_circ},
              {"nu_circ", t.nu_circ},
              {"premise_ok", t.premise_ok},
              {"note", t.note}};
}

inline json to_json(const CertificateReport& rep) {
  json steps = json::array();
  for (const auto& s : rep.steps) {
    json rec{{"mode", s.mode},
             {"parent_path", s.parent_path},
             {"chosen_child", s.chosen_child},
             {"exact_terms", to_json(s.t1)},
             {"verdict", to_string(s.verdict)}};
    if (s.t2) rec["coherence_terms"] = to_json(*s.t2);
    steps.push_back(std::move(rec));
  }
  return json{{"steps", steps},
              {"overall", to_string(rep.overall)},
              {"support_exact", rep.support_exact}};
}

inline const char* to_string(AlgoKind k) {
  switch (k) {
    case AlgoKind::omp: return "omp";
    case AlgoKind::bomp: return "bomp";
    case AlgoKind::mols: return "mols";
    case AlgoKind::hiomp: return "hiomp";
    case AlgoKind::hibomp: return "hibomp";
    case AlgoKind::hibomp_p: return "hibomp_p";
  }
  return "?";
}

inline AlgoKind algo_kind_from_string(const std::string& s) {
  if (s == "omp") return AlgoKind::omp;
  if (s == "bomp") return AlgoKind::bomp;
  if (s == "mols") return AlgoKind::mols;
  if (s == "hiomp") return AlgoKind::hiomp;
  if (s == "hibomp") return AlgoKind::hibomp;
  if (s == "hibomp_p") return AlgoKind::hibomp_p;
  throw IoError("unknown algorithm '" + s + "'");
}

inline const char* to_string(PsiVariant v) {
  switch (v) {
    case PsiVariant::none: return "none";
    case PsiVariant::p1: return "p1";
    case PsiVariant::p2: return "p2";
    case PsiVariant::p3: return "p3";
  }
  return "?";
}

inline PsiVariant psi_variant_from_string(const std::string& s) {
  if (s == "none") return PsiVariant::none;
  if (s == "p1") return PsiVariant::p1;
  if (s == "p2") return PsiVariant::p2;
  if (s == "p3") return PsiVariant::p3;
  throw IoError("unknown PSI variant '" + s + "'");
}

inline json to_json(const ExperimentConfig& c) {
  json algs = json::array();
  for (const auto& a : c.algorithms)
    algs.push_back(json{{"id", a.id},
                        {"algo", to_string(a.kind)},
                        {"psi", to_string(a.psi)},
                        {"enabled", a.enabled},
                        {"note", a.note}});
  return json{
      {"name", c.name},
      {"M", c.M},
      {"structure", to_json(c.structure)},
      {"signal_dist", c.dist == SignalDist::gaussian ? "gaussian" : "two_pam"},
      {"noise", c.noise.kind == NoiseSpec::Kind::none
                    ? json{{"kind", "none"}}
                    : json{{"kind", "snr_db"}, {"snr_db", c.noise.snr_db}}},
      {"algorithms", algs},
      {"trials", c.trials},
      {"master_seed", c.master_seed},
      {"sweep_axis",
       json{{"kind", c.axis.kind == SweepAxis::Kind::k_out ? "k_out" : "snr"},
            {"values", c.axis.values}}}};
}

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.name = j.value("name", "");
  c.M = j.at("M").get<int>();
  c.structure = structure_from_json(j.at("structure"));
  const std::string dist = j.value("signal_dist", "gaussian");
  if (dist == "gaussian")
    c.dist = SignalDist::gaussian;
  else if (dist == "two_pam")
    c.dist = SignalDist::two_pam;
  else
    throw IoError("unknown signal_dist '" + dist + "'");
  if (j.contains("noise") && j.at("noise").value("kind", "none") == "snr_db")
    c.noise = {NoiseSpec::Kind::snr_db, j.at("noise").at("snr_db").get<double>()};
  for (const auto& ja : j.at("algorithms")) {
    AlgoSpec a;
    a.id = ja.at("id").get<std::string>();
    a.kind = algo_kind_from_string(ja.at("algo").get<std::string>());
    a.psi = psi_variant_from_string(ja.value("psi", "none"));
    a.enabled = ja.value("enabled", true);
    a.note = ja.value("note", "");
    c.algorithms.push_back(std::move(a));
  }
  c.trials = j.at("trials").get<int>();
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  const auto& jaxis = j.at("sweep_axis");
  c.axis.kind = jaxis.at("kind").get<std::string>() == "snr"
                    ? SweepAxis::Kind::snr
                    : SweepAxis::Kind::k_out;
  c.axis.values = jaxis.at("values").get<std::vector<double>>();
  return c;
}

// --- sweep CSV ---------------------------------------------------------------

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "point,algorithm,err,nmse_mean,false_alarm_mean,trials,seed\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g,%.17g,%d,%" PRIu64 "\n",
                  r.point, r.algorithm.c_str(), r.err, r.nmse_mean,
                  r.false_alarm_mean, r.trials,
                  static_cast<std::uint64_t>(r.seed));
    out += buf;
  }
  return out;
}

inline std::vector<SweepRow> sweep_rows_from_csv(const std::string& text) {
  std::vector<SweepRow> rows;
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) ||
      line != "point,algorithm,err,nmse_mean,false_alarm_mean,trials,seed")
    throw IoError("sweep CSV: schema mismatch on header");
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw IoError("sweep CSV: malformed row '" + line + "'");
    SweepRow r;
    try {
      r.point = std::stod(cells[0]);
      r.algorithm = cells[1];
      r.err = std::stod(cells[2]);
      r.nmse_mean = std::stod(cells[3]);
      r.false_alarm_mean = std::stod(cells[4]);
      r.trials = std::stoi(cells[5]);
      r.seed = std::stoull(cells[6]);
    } catch (const std::exception&) {
      throw IoError("sweep CSV: malformed row '" + line + "'");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << data;
}

}  // namespace hiblock
