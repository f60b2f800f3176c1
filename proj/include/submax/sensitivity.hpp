#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "submax/data_model.hpp"
#include "submax/errors.hpp"
#include "submax/scoring.hpp"

namespace submax {

/// Worst-case mean and variance of one pair's signed score contribution
/// under the sensitivity model at gamma. The pair contributes +q or -q; the
/// bias bound pushes the probability of +q up to gamma/(1+gamma), giving
///   mu = q (gamma-1)/(gamma+1),  nu = q^2 4 gamma/(1+gamma)^2.
struct PairBounds {
  double mu = 0.0;
  double nu = 0.0;
};

inline PairBounds pair_bounds(double q, double gamma) {
  if (!(gamma >= 1.0)) {
    throw std::invalid_argument("pair_bounds: gamma must be >= 1");
  }
  const double gp1 = gamma + 1.0;
  return PairBounds{q * (gamma - 1.0) / gp1, q * q * 4.0 * gamma / (gp1 * gp1)};
}

/// Per-group worst-case moments at a fixed gamma, plus the observed group
/// statistics T_g.
struct GammaBounds {
  double gamma = 1.0;
  std::vector<double> mu;     // per group
  std::vector<double> nu;     // per group, >= 0
  std::vector<double> t_obs;  // per group, sum of s*q
};

/// Sufficient per-group statistics for the matched-pair closed form.
struct GroupScoreStats {
  std::vector<double> t_obs;   // sum s*q
  std::vector<double> sum_q;   // sum q
  std::vector<double> sum_q2;  // sum q^2
};

inline GroupScoreStats group_score_stats(const ScoreSet& scores,
                                         int group_count) {
  GroupScoreStats st;
  st.t_obs.assign(static_cast<std::size_t>(group_count), 0.0);
  st.sum_q.assign(static_cast<std::size_t>(group_count), 0.0);
  st.sum_q2.assign(static_cast<std::size_t>(group_count), 0.0);
  for (const ScoredPair& sp : scores.scores) {
    const auto g = static_cast<std::size_t>(sp.group);
    st.t_obs[g] += sp.s * sp.q;
    st.sum_q[g] += sp.q;
    st.sum_q2[g] += sp.q * sp.q;
  }
  return st;
}

/// Group moments from sufficient statistics; the per-pair factors
/// (gamma-1)/(gamma+1) and 4 gamma/(1+gamma)^2 are constant across pairs,
/// so they factor out of the sums.
inline GammaBounds bounds_from_stats(const GroupScoreStats& stats,
                                     double gamma) {
  if (!(gamma >= 1.0)) {
    throw std::invalid_argument("bounds_from_stats: gamma must be >= 1");
  }
  const double gp1 = gamma + 1.0;
  const double lambda = (gamma - 1.0) / gp1;
  const double vfac = 4.0 * gamma / (gp1 * gp1);
  GammaBounds b;
  b.gamma = gamma;
  const std::size_t G = stats.t_obs.size();
  b.mu.resize(G);
  b.nu.resize(G);
  b.t_obs = stats.t_obs;
  for (std::size_t g = 0; g < G; ++g) {
    b.mu[g] = lambda * stats.sum_q[g];
    b.nu[g] = vfac * stats.sum_q2[g];
  }
  return b;
}

/// Per-group worst-case moments as direct sums of pair_bounds over the
/// group's pairs.
inline GammaBounds group_bounds(const ScoreSet& scores,
                                const GroupedStudy& study, double gamma) {
  if (!(gamma >= 1.0)) {
    throw std::invalid_argument("group_bounds: gamma must be >= 1");
  }
  if (scores.scores.size() != study.pairs.size()) {
    throw std::invalid_argument("group_bounds: scores not aligned with study");
  }
  const auto G = static_cast<std::size_t>(study.group_count());
  GammaBounds b;
  b.gamma = gamma;
  b.mu.assign(G, 0.0);
  b.nu.assign(G, 0.0);
  b.t_obs.assign(G, 0.0);
  for (const ScoredPair& sp : scores.scores) {
    const auto g = static_cast<std::size_t>(sp.group);
    const PairBounds pb = pair_bounds(sp.q, gamma);
    b.mu[g] += pb.mu;
    b.nu[g] += pb.nu;
    b.t_obs[g] += sp.s * sp.q;
  }
  return b;
}

/// Standardized deviate (t_obs - mu) / sqrt(nu).
inline double deviate(double t_obs, double mu, double nu) {
  if (!(nu > 0.0)) {
    throw DegenerateVariance("deviate: zero worst-case variance");
  }
  return (t_obs - mu) / std::sqrt(nu);
}

}  // namespace submax
