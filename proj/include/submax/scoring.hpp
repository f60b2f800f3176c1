#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "submax/data_model.hpp"
#include "submax/errors.hpp"

namespace submax {

enum class ScoreMethod { mean_difference, m_statistic, group_m_statistic };

inline const char* to_string(ScoreMethod m) {
  switch (m) {
    case ScoreMethod::mean_difference: return "mean_difference";
    case ScoreMethod::m_statistic: return "m_statistic";
    case ScoreMethod::group_m_statistic: return "group_m_statistic";
  }
  return "?";
}

inline std::optional<ScoreMethod> parse_score_method(std::string_view name) {
  if (name == "mean_difference" || name == "mean-difference" ||
      name == "mean-diff" || name == "mean") {
    return ScoreMethod::mean_difference;
  }
  if (name == "m_statistic" || name == "m-statistic" || name == "m") {
    return ScoreMethod::m_statistic;
  }
  if (name == "group_m_statistic" || name == "group-m-statistic" ||
      name == "group-m" || name == "gm") {
    return ScoreMethod::group_m_statistic;
  }
  return std::nullopt;
}

/// Trimming parameters: scores vanish below the inner cutoff and are capped
/// at the trim cutoff.
struct PsiParams {
  double inner = 0.0;  // a
  double trim = 3.0;   // t

  void validate() const {
    if (!(inner >= 0.0) || !(trim > inner)) {
      throw std::invalid_argument(
          "psi parameters require 0 <= inner < trim");
    }
  }
};

/// psi(d) = 0 for d < a, d for a <= d <= t, t for d > t. The middle branch
/// is closed at both ends, keeping psi continuous and psi(0) = 0 when a = 0.
inline double psi(double d, const PsiParams& params = {}) {
  if (d < params.inner) return 0.0;
  if (d > params.trim) return params.trim;
  return d;
}

/// Median of absolute values; even counts use the midpoint of the two
/// central order statistics.
inline double abs_median(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("abs_median: empty input");
  }
  for (double& v : values) v = std::fabs(v);
  const std::size_t n = values.size();
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(values.begin(), mid);
  return 0.5 * (lo + hi);
}

/// Per-pair score: nonnegative magnitude q and sign s. s is 0 exactly when
/// the pair contributes nothing (zero difference, or magnitude trimmed to 0).
struct ScoredPair {
  int group = 0;
  double q = 0.0;
  int s = 0;
};

struct ScoreSet {
  ScoreMethod method = ScoreMethod::mean_difference;
  std::vector<ScoredPair> scores;      // one per input pair, input order
  std::vector<double> scale_factors;   // per group: h0 replicated, h_g0, or 1
};

namespace detail {

inline int sign_of(double d) { return (d > 0.0) - (d < 0.0); }

inline ScoredPair make_scored(int group, double q, double d) {
  return ScoredPair{group, q, q == 0.0 ? 0 : sign_of(d)};
}

}  // namespace detail

/// Raw-data scoring: q = |d|, s = sign(d).
inline ScoreSet score_mean_difference(const GroupedStudy& study) {
  ScoreSet set;
  set.method = ScoreMethod::mean_difference;
  set.scores.reserve(study.pairs.size());
  for (std::size_t i = 0; i < study.pairs.size(); ++i) {
    set.scores.push_back(detail::make_scored(
        study.group_of[i], std::fabs(study.pairs[i].d), study.pairs[i].d));
  }
  set.scale_factors.assign(static_cast<std::size_t>(study.group_count()), 1.0);
  return set;
}

/// Conventional M-scores: q = psi(|d| / h0) with the scale h0 taken as the
/// median of |d| pooled over all groups.
inline ScoreSet score_m_statistic(const GroupedStudy& study,
                                  const PsiParams& params = {}) {
  params.validate();
  std::vector<double> all;
  all.reserve(study.pairs.size());
  for (const PairDifference& p : study.pairs) all.push_back(p.d);
  const double h0 = abs_median(all);
  if (h0 <= 0.0) {
    throw DegenerateScale(
        "m_statistic: pooled median of |d| is zero; scores are undefined", -1);
  }
  ScoreSet set;
  set.method = ScoreMethod::m_statistic;
  set.scores.reserve(study.pairs.size());
  for (std::size_t i = 0; i < study.pairs.size(); ++i) {
    const double d = study.pairs[i].d;
    set.scores.push_back(detail::make_scored(
        study.group_of[i], psi(std::fabs(d) / h0, params), d));
  }
  set.scale_factors.assign(static_cast<std::size_t>(study.group_count()), h0);
  return set;
}

/// Subgroup-aware M-scores: each group is trimmed against its own median
/// h_g0 and the trimmed score is multiplied back by h_g0, so score sizes
/// stay comparable across groups.
inline ScoreSet score_group_m_statistic(const GroupedStudy& study,
                                        const PsiParams& params = {}) {
  params.validate();
  const int G = study.group_count();
  ScoreSet set;
  set.method = ScoreMethod::group_m_statistic;
  set.scores.resize(study.pairs.size());
  set.scale_factors.assign(static_cast<std::size_t>(G), 1.0);
  for (int g = 0; g < G; ++g) {
    const std::vector<int>& members = study.groups[static_cast<std::size_t>(g)];
    if (members.empty()) {
      throw EmptyGroup("group_m_statistic: group " + std::to_string(g + 1) +
                           " " + group_pattern_label(g, study.num_covariates) +
                           " has no pairs; within-group median is undefined",
                       g);
    }
    std::vector<double> ds;
    ds.reserve(members.size());
    for (int idx : members) ds.push_back(study.pairs[static_cast<std::size_t>(idx)].d);
    const double hg = abs_median(std::move(ds));
    if (hg <= 0.0) {
      throw DegenerateScale(
          "group_m_statistic: median of |d| in group " + std::to_string(g + 1) +
              " " + group_pattern_label(g, study.num_covariates) + " is zero",
          g);
    }
    set.scale_factors[static_cast<std::size_t>(g)] = hg;
    for (int idx : members) {
      const double d = study.pairs[static_cast<std::size_t>(idx)].d;
      set.scores[static_cast<std::size_t>(idx)] =
          detail::make_scored(g, psi(std::fabs(d) / hg, params) * hg, d);
    }
  }
  return set;
}

inline ScoreSet score(const GroupedStudy& study, ScoreMethod method,
                      const PsiParams& params = {}) {
  switch (method) {
    case ScoreMethod::mean_difference: return score_mean_difference(study);
    case ScoreMethod::m_statistic: return score_m_statistic(study, params);
    case ScoreMethod::group_m_statistic:
      return score_group_m_statistic(study, params);
  }
  throw std::invalid_argument("score: unknown method");
}

}  // namespace submax
