#pragma once

// Experiment configs (JSON), the batch pipeline (theory block + ensemble +
// empirical block), CSV emission with pinned formatting, and a structural
// validator for the summary schema.

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmlab/asymptotics.hpp"
#include "bmlab/common.hpp"
#include "bmlab/hermite.hpp"
#include "bmlab/hypothesis.hpp"
#include "bmlab/mcstats.hpp"
#include "bmlab/models.hpp"

namespace bmlab {

using json = nlohmann::json;

constexpr const char* kSummarySchemaVersion = "1";

// ---------------------------------------------------------------------------
// JSON serialization of the domain types
// ---------------------------------------------------------------------------

inline json expansion_to_json(const HermiteExpansion& e) {
  int rank = 0;
  try {
    rank = hermite_rank(e, e.tol_rank);
  } catch (const input_error&) {
    rank = 0;
  }
  return json{{"qmax", e.qmax()}, {"coeffs", e.coeffs}, {"rank", rank}};
}

inline HermiteExpansion expansion_from_json(const json& j) {
  HermiteExpansion e;
  e.coeffs = j.at("coeffs").get<std::vector<double>>();
  require(!e.coeffs.empty(), "expansion: empty coefficient list");
  if (j.contains("rank")) e.rank = j.at("rank").get<int>();
  return e;
}

inline json model_to_json(const StationaryModel& m) {
  switch (m.kind) {
    case StationaryKind::Fgn: return json{{"kind", "fgn"}, {"H", m.param}};
    case StationaryKind::AAlpha: return json{{"kind", "a_alpha"}, {"alpha", m.param}};
    case StationaryKind::Exponential: return json{{"kind", "exponential"}, {"theta", m.param}};
    case StationaryKind::Tabulated:
      return json{{"kind", "tabulated"}, {"h", m.grid_h}, {"rho", m.grid_rho}};
  }
  return {};
}

inline json model_to_json(const SelfSimilarModel& m) {
  switch (m.kind) {
    case SelfSimilarKind::Fbm: return json{{"kind", "fbm"}, {"H", m.H}};
    case SelfSimilarKind::Bifbm: return json{{"kind", "bifbm"}, {"H", m.H}, {"K", m.K}};
    case SelfSimilarKind::Subfbm: return json{{"kind", "subfbm"}, {"H", m.H}};
    case SelfSimilarKind::Custom:
      return json{{"kind", "custom"}, {"beta", m.beta}, {"alpha", m.alpha}, {"lambda", m.lambda}};
  }
  return {};
}

struct AnyModel {
  std::optional<StationaryModel> stationary;
  std::optional<SelfSimilarModel> self_similar;
};

inline AnyModel model_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  AnyModel m;
  if (kind == "fgn") m.stationary = StationaryModel::fgn(j.at("H").get<double>());
  else if (kind == "a_alpha") m.stationary = StationaryModel::a_alpha_model(j.at("alpha").get<double>());
  else if (kind == "exponential") m.stationary = StationaryModel::exponential(j.at("theta").get<double>());
  else if (kind == "tabulated")
    m.stationary = StationaryModel::tabulated(j.at("h").get<std::vector<double>>(),
                                              j.at("rho").get<std::vector<double>>());
  else if (kind == "fbm") m.self_similar = SelfSimilarModel::fbm(j.at("H").get<double>());
  else if (kind == "bifbm")
    m.self_similar = SelfSimilarModel::bifbm(j.at("H").get<double>(), j.at("K").get<double>());
  else if (kind == "subfbm") m.self_similar = SelfSimilarModel::subfbm(j.at("H").get<double>());
  else throw input_error("model: unknown kind '" + kind + "'");
  return m;
}

inline json hypothesis_report_to_json(const HypothesisReport& r) {
  return json{{"pass", r.pass},
              {"first_bound", {{"constant", r.first.constant},
                               {"top_decade_slope", r.first.top_decade_slope},
                               {"bounded", r.first.bounded}}},
              {"second_bound", {{"constant", r.second.constant},
                                {"top_decade_slope", r.second.top_decade_slope},
                                {"bounded", r.second.bounded}}},
              {"boundary_ok", r.boundary_ok},
              {"boundary_residual", r.boundary_residual},
              {"fitted_nu", r.fitted_nu},
              {"failure", r.failure}};
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  AnyModel model;
  json model_json;
  HermiteExpansion f;
  FunctionalKind kind = FunctionalKind::Z;
  std::vector<double> eps;     // strictly decreasing
  double delta = 0.25;
  std::vector<double> times;   // strictly increasing
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  std::optional<std::string> regime_override;
  std::string csv_path;
  std::string summary_path;
};

inline HermiteExpansion function_from_json(const json& j) {
  if (j.contains("builtin")) {
    const std::string name = j.at("builtin").get<std::string>();
    const int qmax = j.value("qmax", 16);
    if (name == "abs") return abs_expansion(qmax, false);
    if (name == "abs_centered") return abs_expansion(qmax, true);
    if (name.rfind("hermite:", 0) == 0) {
      const int q = std::stoi(name.substr(8));
      require(q >= 1 && q <= kMaxHermiteOrder, "function: hermite order out of range");
      HermiteExpansion e;
      e.coeffs.assign(static_cast<std::size_t>(q) + 1, 0.0);
      e.coeffs.back() = 1.0;
      return e;
    }
    throw input_error("function: unknown builtin '" + name + "'");
  }
  if (j.contains("hermite_coeffs")) {
    HermiteExpansion e;
    e.coeffs = j.at("hermite_coeffs").get<std::vector<double>>();
    require(!e.coeffs.empty(), "function: empty hermite_coeffs");
    return e;
  }
  if (j.contains("pointwise")) {
    const std::string name = j.at("pointwise").get<std::string>();
    const int qmax = j.value("qmax", 16);
    const int nodes = j.value("nodes", 2 * qmax + 16);
    std::function<double(double)> fn;
    if (name == "abs") fn = [](double x) { return std::abs(x); };
    else if (name == "abs_centered") fn = [](double x) { return std::abs(x) - kSqrt2OverPi; };
    else if (name == "sign") fn = [](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); };
    else throw input_error("function: unknown pointwise name '" + name + "'");
    return project(fn, qmax, nodes);
  }
  throw input_error("function: need one of builtin / hermite_coeffs / pointwise");
}

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.model_json = j.at("model");
  cfg.model = model_from_json(cfg.model_json);
  cfg.f = function_from_json(j.at("function"));
  const std::string kind = j.value("kind", "Z");
  if (kind == "Z") cfg.kind = FunctionalKind::Z;
  else if (kind == "F") cfg.kind = FunctionalKind::F;
  else if (kind == "length") cfg.kind = FunctionalKind::Length;
  else if (kind == "length_fluct") cfg.kind = FunctionalKind::LengthFluct;
  else throw input_error("config: unknown kind '" + kind + "'");
  cfg.eps = j.at("eps").get<std::vector<double>>();
  require(!cfg.eps.empty(), "config: eps list empty");
  for (std::size_t i = 0; i < cfg.eps.size(); ++i) {
    require(cfg.eps[i] > 0.0 && cfg.eps[i] < 1.0, "config: eps must lie in (0,1)");
    if (i > 0) require(cfg.eps[i] < cfg.eps[i - 1], "config: eps must be strictly decreasing");
  }
  cfg.delta = j.at("delta").get<double>();
  require(cfg.delta > 0.0, "config: delta must be positive");
  cfg.times = j.at("times").get<std::vector<double>>();
  require(!cfg.times.empty(), "config: times empty");
  for (std::size_t i = 1; i < cfg.times.size(); ++i)
    require(cfg.times[i] > cfg.times[i - 1], "config: times must be strictly increasing");
  cfg.replicates = j.at("replicates").get<std::size_t>();
  require(cfg.replicates >= 1, "config: replicates must be >= 1");
  require(j.contains("seed"), "config: seed is mandatory (no wall-clock default)");
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.threads = j.value("threads", 1);
  if (j.contains("regime_override"))
    cfg.regime_override = j.at("regime_override").get<std::string>();
  if (j.contains("output")) {
    cfg.csv_path = j.at("output").value("csv", "");
    cfg.summary_path = j.at("output").value("summary", "");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct ExperimentOutput {
  json summary;
  std::string csv;
};

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Theory block: regime, normalization exponent, limit constants; the
/// d used is the Hermite rank of the configured function (2 for lengths).
inline json theory_block(const ExperimentConfig& cfg) {
  json th;
  double alpha = 0.0;
  double beta = 0.0;
  if (cfg.model.self_similar) {
    alpha = cfg.model.self_similar->alpha;
    beta = cfg.model.self_similar->beta;
  } else {
    const StationaryModel& sm = *cfg.model.stationary;
    alpha = sm.has_power_tail() ? sm.tail_alpha() : 0.0;
  }
  const bool length_kind =
      cfg.kind == FunctionalKind::Length || cfg.kind == FunctionalKind::LengthFluct;
  const HermiteExpansion f = length_kind ? abs_expansion(16, true) : cfg.f;
  const int d = hermite_rank(f, f.tol_rank);
  th["d"] = d;
  th["alpha"] = alpha;

  if (cfg.model.stationary && !cfg.model.stationary->has_power_tail()) {
    // short-memory models are always central
    const Sigma2Result s = sigma2_central(f, *cfg.model.stationary, d);
    th["regime"] = "central";
    th["normalization_exponent"] = 0.0;
    th["sigma2"] = s.value;
    th["sigma2_tail_bound"] = s.tail_bound;
    return th;
  }

  const RegimeReport regime = classify_regime(alpha, d);
  th["regime"] = regime_name(regime.regime);
  th["normalization_exponent"] = regime.normalization_exponent;
  const StationaryModel limit_rho = cfg.model.stationary
                                        ? *cfg.model.stationary
                                        : StationaryModel::a_alpha_model(alpha);
  if (regime.regime == Regime::Central) {
    const Sigma2Result s = sigma2_central(f, limit_rho, d);
    th["sigma2"] = s.value;
    th["sigma2_tail_bound"] = s.tail_bound;
  } else if (regime.regime == Regime::LogCentral) {
    const double bval = cfg.model.self_similar ? beta : 0.5 * alpha;
    th["sigma2_log"] = sigma2_log(f.coeff(d), d, alpha, bval);
  } else if (cfg.model.self_similar) {
    json grid = json::array();
    for (double t : cfg.times) {
      grid.push_back(json{{"s", t}, {"t", t}, {"kd", kd_covariance(*cfg.model.self_similar, d, t, t)}});
    }
    th["kd_grid"] = grid;
    th["c_d"] = f.coeff(d);
  }
  return th;
}

inline void append_csv(std::string& csv, std::uint64_t replicate, const std::string& kind,
                       double eps, double t, double value) {
  csv += std::to_string(replicate);
  csv += ',';
  csv += kind;
  csv += ',';
  csv += format_g17(eps);
  csv += ',';
  csv += format_g17(t);
  csv += ',';
  csv += format_g17(value);
  csv += '\n';
}

inline ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  // regime consistency gate
  json th = theory_block(cfg);
  if (cfg.regime_override && th.contains("regime") &&
      *cfg.regime_override != th.at("regime").get<std::string>())
    throw regime_error("experiment: regime override '" + *cfg.regime_override +
                       "' conflicts with classified regime '" +
                       th.at("regime").get<std::string>() + "'");

  ExperimentOutput out;
  out.csv = "replicate,kind,eps,t,value\n";
  json empirical = json::array();
  const std::string kind_name = functional_kind_name(cfg.kind);

  for (double eps : cfg.eps) {
    EnsembleSpec spec;
    spec.stationary = cfg.model.stationary;
    spec.self_similar = cfg.model.self_similar;
    spec.f = cfg.f;
    spec.kind = cfg.kind;
    spec.eps = eps;
    spec.delta = cfg.delta;
    spec.times = cfg.times;
    spec.replicates = cfg.replicates;
    spec.seed = cfg.seed;
    spec.threads = cfg.threads;
    const FluctuationEnsemble ens = run_ensemble(spec);

    for (std::size_t r = 0; r < ens.replicates; ++r)
      for (std::size_t i = 0; i < ens.times.size(); ++i)
        append_csv(out.csv, r, kind_name, eps, ens.times[i], ens.at(r, i));

    json emp;
    emp["eps"] = eps;
    emp["config_hash"] = ens.config_hash;
    emp["normalization"] = ens.normalization;
    json means = json::array(), vars = json::array();
    for (std::size_t i = 0; i < ens.times.size(); ++i) {
      means.push_back(ens.mean(i));
      vars.push_back(ens.variance(i));
    }
    emp["mean"] = means;
    emp["var"] = vars;
    if (ens.replicates >= 30) {
      json cov = json::array(), cov_se = json::array();
      for (std::size_t i = 0; i < ens.times.size(); ++i) {
        json row = json::array(), row_se = json::array();
        for (std::size_t j = 0; j < ens.times.size(); ++j) {
          const CovEstimate c = empirical_cov(ens, i, j);
          row.push_back(c.estimate);
          row_se.push_back(c.standard_error);
        }
        cov.push_back(row);
        cov_se.push_back(row_se);
      }
      emp["cov"] = cov;
      emp["cov_se"] = cov_se;
      const std::size_t last = ens.times.size() - 1;
      double mu = 0.0, var = ens.variance(last);
      if (cfg.kind == FunctionalKind::Length) mu = ens.mean(last);
      if (var > 0.0) {
        const KsResult ks = ks_normal_test(ens.column(last), mu, var);
        emp["ks"] = json{{"statistic", ks.statistic}, {"p_value", ks.p_value}};
      }
      if (ens.times.size() >= 5) {
        try {
          emp["moment_scaling_kappa_p2"] = moment_scaling(ens, 2.0);
          emp["moment_scaling_kappa_p4"] = moment_scaling(ens, 4.0);
        } catch (const std::exception&) {
          // not enough distinct gaps; omit
        }
      }
    }
    empirical.push_back(emp);
  }

  out.summary = json{{"schema_version", kSummarySchemaVersion},
                     {"config", json{{"model", cfg.model_json},
                                     {"kind", kind_name},
                                     {"eps", cfg.eps},
                                     {"delta", cfg.delta},
                                     {"times", cfg.times},
                                     {"replicates", cfg.replicates},
                                     {"seed", cfg.seed},
                                     {"coeffs", cfg.f.coeffs}}},
                     {"theory", th},
                     {"empirical", empirical}};
  return out;
}

/// Structural validation against the shipped summary schema: required
/// fields with the right JSON types.
inline void validate_summary(const json& s) {
  auto need = [&](const json& obj, const char* key, const char* type) {
    require(obj.contains(key), std::string("summary schema: missing '") + key + "'");
    const json& v = obj.at(key);
    const std::string t = type;
    const bool ok = (t == "string" && v.is_string()) || (t == "number" && v.is_number()) ||
                    (t == "array" && v.is_array()) || (t == "object" && v.is_object());
    require(ok, std::string("summary schema: '") + key + "' must be a " + type);
  };
  need(s, "schema_version", "string");
  need(s, "config", "object");
  need(s, "theory", "object");
  need(s, "empirical", "array");
  need(s.at("config"), "model", "object");
  need(s.at("config"), "eps", "array");
  need(s.at("config"), "times", "array");
  need(s.at("config"), "seed", "number");
  need(s.at("theory"), "regime", "string");
  need(s.at("theory"), "normalization_exponent", "number");
  for (const auto& emp : s.at("empirical")) {
    need(emp, "eps", "number");
    need(emp, "mean", "array");
    need(emp, "var", "array");
  }
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);  // binary: LF line endings everywhere
  if (!os) throw input_error("cannot open output file " + path);
  os << content;
}

}  // namespace bmlab
