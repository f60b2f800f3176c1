#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "submax/joint_test.hpp"
#include "submax/mvnorm.hpp"
#include "submax/scoring.hpp"
#include "submax/sim.hpp"
#include "submax/version.hpp"

namespace submax {

using Json = nlohmann::ordered_json;

/// Run metadata embedded in every report so results can be reproduced.
struct ReportContext {
  std::string command;
  std::string input;  // data path or "simulate:<situation>:<seed>"
  std::string method;
  std::string direction = "greater";
  double alpha = 0.05;
  PsiParams psi{};
  MvnSettings mvn{};
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace detail

inline Json report_header(const ReportContext& ctx) {
  Json h;
  h["tool"] = "submax";
  h["version"] = kVersion;
  h["command"] = ctx.command;
  if (!ctx.input.empty()) h["input"] = ctx.input;
  if (!ctx.method.empty()) h["method"] = ctx.method;
  h["direction"] = ctx.direction;
  h["alpha"] = ctx.alpha;
  h["seed"] = ctx.seed;
  h["psi"] = Json{{"inner", ctx.psi.inner}, {"trim", ctx.psi.trim}};
  h["mvn"] = Json{{"target_se", ctx.mvn.target_se},
                  {"max_samples", ctx.mvn.max_samples}};
  return h;
}

inline std::string tsv_header_comment(const ReportContext& ctx) {
  std::string s = "# submax v";
  s += kVersion;
  s += " command=" + ctx.command;
  if (!ctx.input.empty()) s += " input=" + ctx.input;
  if (!ctx.method.empty()) s += " method=" + ctx.method;
  s += " direction=" + ctx.direction;
  s += " alpha=" + detail::fmt("%g", ctx.alpha);
  s += " seed=" + std::to_string(ctx.seed);
  s += " psi_inner=" + detail::fmt("%g", ctx.psi.inner);
  s += " psi_trim=" + detail::fmt("%g", ctx.psi.trim);
  s += " mvn_target_se=" + detail::fmt("%g", ctx.mvn.target_se);
  s += " mvn_max_samples=" + std::to_string(ctx.mvn.max_samples);
  s += "\n";
  return s;
}

inline Json submax_result_json(const SubmaxResult& r) {
  Json j;
  j["gamma"] = r.gamma;
  j["alpha"] = r.alpha;
  j["method"] = to_string(r.method);
  j["labels"] = r.labels;
  j["deviates"] = r.deviates;
  Json rho = Json::array();
  for (int i = 0; i < r.rho.rows(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < r.rho.cols(); ++k) row.push_back(r.rho(i, k));
    rho.push_back(std::move(row));
  }
  j["rho"] = std::move(rho);
  j["kappa"] = r.kappa;
  j["d_max"] = r.d_max;
  j["argmax"] = r.argmax;
  j["reject"] = r.reject;
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

inline Json analyze_report_json(const ReportContext& ctx,
                                const std::vector<SubmaxResult>& results) {
  Json j = report_header(ctx);
  Json arr = Json::array();
  for (const SubmaxResult& r : results) arr.push_back(submax_result_json(r));
  j["results"] = std::move(arr);
  return j;
}

/// One row per gamma, one column per comparison, max column last; deviates
/// above kappa get a `*` marker.
inline std::string analyze_report_tsv(const ReportContext& ctx,
                                      const std::vector<SubmaxResult>& results) {
  std::string out = tsv_header_comment(ctx);
  if (results.empty()) return out;
  const SubmaxResult& first = results.front();
  out += "# kappa=" + detail::fmt("%.4f", first.kappa) +
         " K=" + std::to_string(first.labels.size()) + "\n";
  for (const std::string& w : first.warnings) out += "# warning: " + w + "\n";
  out += "gamma";
  for (const std::string& label : first.labels) out += "\t" + label;
  out += "\tmax\targmax\treject\n";
  for (const SubmaxResult& r : results) {
    out += detail::fmt("%g", r.gamma);
    for (double dev : r.deviates) {
      out += "\t" + detail::fmt("%.4f", dev);
      if (dev > r.kappa) out += "*";
    }
    out += "\t" + detail::fmt("%.4f", r.d_max);
    out += "\t" + r.argmax;
    out += r.reject ? "\tyes\n" : "\tno\n";
  }
  return out;
}

inline Json sensitivity_value_json(const ReportContext& ctx,
                                   const SensitivityValue& sv) {
  Json j = report_header(ctx);
  j["gamma_star"] = sv.gamma_star.value_or(0.0);
  j["never_rejects"] = !sv.gamma_star.has_value();
  Json curve = Json::array();
  for (const GammaCurvePoint& pt : sv.curve) {
    curve.push_back(Json{{"gamma", pt.gamma},
                         {"d_max", pt.d_max},
                         {"kappa", pt.kappa},
                         {"reject", pt.reject}});
  }
  j["curve"] = std::move(curve);
  return j;
}

inline std::string sensitivity_value_tsv(const ReportContext& ctx,
                                         const SensitivityValue& sv) {
  std::string out = tsv_header_comment(ctx);
  out += sv.gamma_star
             ? "# gamma_star=" + detail::fmt("%g", *sv.gamma_star) + "\n"
             : "# gamma_star=none (never rejects on the grid)\n";
  out += "gamma\td_max\tkappa\treject\n";
  for (const GammaCurvePoint& pt : sv.curve) {
    out += detail::fmt("%g", pt.gamma);
    out += "\t" + detail::fmt("%.4f", pt.d_max);
    out += "\t" + detail::fmt("%.4f", pt.kappa);
    out += pt.reject ? "\tyes\n" : "\tno\n";
  }
  return out;
}

inline Json power_report_json(const ReportContext& ctx,
                              const std::vector<PowerResult>& rows) {
  Json j = report_header(ctx);
  Json arr = Json::array();
  for (const PowerResult& r : rows) {
    arr.push_back(Json{{"situation", r.situation},
                       {"method", to_string(r.method)},
                       {"gamma", r.gamma},
                       {"reps", r.reps},
                       {"seed", r.seed},
                       {"power", r.power},
                       {"mc_se", r.mc_se},
                       {"failures", r.failures}});
  }
  j["results"] = std::move(arr);
  return j;
}

inline std::string power_report_tsv(const ReportContext& ctx,
                                    const std::vector<PowerResult>& rows) {
  std::string out = tsv_header_comment(ctx);
  out += "situation\tmethod\tgamma\treps\tseed\tpower\tmc_se\tfailures\n";
  for (const PowerResult& r : rows) {
    out += std::to_string(r.situation);
    out += "\t";
    out += to_string(r.method);
    out += "\t" + detail::fmt("%g", r.gamma);
    out += "\t" + std::to_string(r.reps);
    out += "\t" + std::to_string(r.seed);
    out += "\t" + detail::fmt("%.4f", r.power);
    out += "\t" + detail::fmt("%.4f", r.mc_se);
    out += "\t" + std::to_string(r.failures) + "\n";
  }
  return out;
}

inline Json critval_json(const ReportContext& ctx, int K,
                         const CriticalValueInfo& info) {
  Json j = report_header(ctx);
  j["K"] = K;
  j["kappa"] = info.kappa;
  j["p_at_kappa"] = info.estimate.p;
  j["se"] = info.estimate.se;
  j["samples"] = info.estimate.samples;
  j["converged"] = info.estimate.converged;
  return j;
}

inline std::string critval_tsv(const ReportContext& ctx, int K,
                               const CriticalValueInfo& info) {
  std::string out = tsv_header_comment(ctx);
  out += "K\t" + std::to_string(K) + "\n";
  out += "kappa\t" + detail::fmt("%.6f", info.kappa) + "\n";
  out += "p_at_kappa\t" + detail::fmt("%.6f", info.estimate.p) + "\n";
  out += "se\t" + detail::fmt("%.3g", info.estimate.se) + "\n";
  out += "samples\t" + std::to_string(info.estimate.samples) + "\n";
  return out;
}

/// Per-pair scores with every method put back on the raw-data scale
/// (conventional M-scores are multiplied by h0).
struct ScoreExportRow {
  std::string pair_id;
  int group = 0;
  double d = 0.0;
  double mean_diff = 0.0;
  double m_rescaled = 0.0;
  double group_m = 0.0;
};

inline std::vector<ScoreExportRow> build_score_export(
    const GroupedStudy& study, const PsiParams& psi_params = {}) {
  const ScoreSet mean = score_mean_difference(study);
  const ScoreSet m = score_m_statistic(study, psi_params);
  const ScoreSet gm = score_group_m_statistic(study, psi_params);
  std::vector<ScoreExportRow> rows;
  rows.reserve(study.pairs.size());
  for (std::size_t i = 0; i < study.pairs.size(); ++i) {
    const int g = study.group_of[i];
    ScoreExportRow row;
    row.pair_id = study.pairs[i].pair_id;
    row.group = g + 1;
    row.d = study.pairs[i].d;
    row.mean_diff = mean.scores[i].s * mean.scores[i].q;
    row.m_rescaled = m.scores[i].s * m.scores[i].q *
                     m.scale_factors[static_cast<std::size_t>(g)];
    row.group_m = gm.scores[i].s * gm.scores[i].q;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string scores_tsv(const ReportContext& ctx,
                              const std::vector<ScoreExportRow>& rows) {
  std::string out = tsv_header_comment(ctx);
  out += "pair_id\tgroup\td\tmean_diff\tm_times_h0\tgroup_m\n";
  for (const ScoreExportRow& r : rows) {
    out += r.pair_id;
    out += "\t" + std::to_string(r.group);
    out += "\t" + detail::fmt("%.10g", r.d);
    out += "\t" + detail::fmt("%.10g", r.mean_diff);
    out += "\t" + detail::fmt("%.10g", r.m_rescaled);
    out += "\t" + detail::fmt("%.10g", r.group_m) + "\n";
  }
  return out;
}

inline Json scores_json(const ReportContext& ctx,
                        const std::vector<ScoreExportRow>& rows) {
  Json j = report_header(ctx);
  Json arr = Json::array();
  for (const ScoreExportRow& r : rows) {
    arr.push_back(Json{{"pair_id", r.pair_id},
                       {"group", r.group},
                       {"d", r.d},
                       {"mean_diff", r.mean_diff},
                       {"m_times_h0", r.m_rescaled},
                       {"group_m", r.group_m}});
  }
  j["scores"] = std::move(arr);
  return j;
}

}  // namespace submax
