#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "submax/data_model.hpp"
#include "submax/joint_test.hpp"
#include "submax/rng.hpp"
#include "submax/scoring.hpp"

namespace submax {

enum class ErrorFamily { normal, student_t };

struct BlockSpec {
  double effect = 0.0;  // additive treatment effect for the block
  double scale = 1.0;   // multiplier on the error draw
  ErrorFamily family = ErrorFamily::normal;
  int t_df = 0;  // degrees of freedom when family == student_t
};

/// One of the five generative settings: 1000 pairs, two binary covariates,
/// four interaction groups of 250 pairs; the first covariate is the effect
/// modifier (pairs 1-500 form the large-effect block).
struct SamplingSituation {
  int id = 0;
  BlockSpec block1;  // pairs 1..500   (cov_1 = 1)
  BlockSpec block2;  // pairs 501..1000 (cov_1 = 0)

  static SamplingSituation configured(int id) {
    switch (id) {
      case 1:
        return {1, {5.0, 10.0, ErrorFamily::normal, 0},
                   {0.5, 1.0, ErrorFamily::student_t, 2}};
      case 2:
        return {2, {5.0, 5.0, ErrorFamily::student_t, 3},
                   {0.5, 0.5, ErrorFamily::student_t, 3}};
      case 3:
        return {3, {4.0, 5.0, ErrorFamily::normal, 0},
                   {0.2, 1.0, ErrorFamily::normal, 0}};
      case 4:
        return {4, {5.0, 5.0, ErrorFamily::student_t, 3},
                   {0.2, 0.5, ErrorFamily::normal, 0}};
      case 5:
        return {5, {1.0, 1.0, ErrorFamily::student_t, 2},
                   {0.5, 1.0, ErrorFamily::student_t, 2}};
      default:
        throw std::invalid_argument("sampling situation id must be 1..5");
    }
  }

  SamplingSituation nulled() const {
    SamplingSituation s = *this;
    s.block1.effect = 0.0;
    s.block2.effect = 0.0;
    return s;
  }
};

namespace detail {

inline constexpr std::uint64_t kGenStream = 0x47454E5352ULL;
inline constexpr std::uint64_t kMvnStream = 0x4D564E5352ULL;
inline constexpr int kSimPairs = 1000;
inline constexpr int kSimBlock = 500;

inline double draw_error(std::mt19937_64& gen, const BlockSpec& spec) {
  return spec.family == ErrorFamily::normal ? draw_normal(gen)
                                            : draw_student_t(gen, spec.t_df);
}

}  // namespace detail

/// Generates one replication: 1000 pairs, cov_1 = 1 on the first 500,
/// cov_2 alternating within blocks so each interaction group has exactly
/// 250 pairs. Deterministic given (seed, replication).
inline GroupedStudy generate_study(const SamplingSituation& situation,
                                   std::uint64_t seed,
                                   std::uint64_t replication) {
  std::mt19937_64 gen =
      make_engine(seed, replication, detail::kGenStream);
  std::vector<RawRecord> rows;
  rows.reserve(detail::kSimPairs);
  for (int i = 0; i < detail::kSimPairs; ++i) {
    const bool first_block = i < detail::kSimBlock;
    const BlockSpec& spec = first_block ? situation.block1 : situation.block2;
    const double d = spec.effect + spec.scale * detail::draw_error(gen, spec);
    char id[8];
    std::snprintf(id, sizeof(id), "p%04d", i + 1);
    rows.push_back(RawRecord{
        id,
        {first_block ? 1.0 : 0.0, (i % 2 == 0) ? 1.0 : 0.0},
        d});
  }
  return ingest(rows);
}

struct PowerResult {
  int situation = 0;
  ScoreMethod method = ScoreMethod::mean_difference;
  double gamma = 1.0;
  double power = 0.0;
  std::size_t reps = 0;
  double mc_se = 0.0;  // sqrt(power (1-power) / reps)
  std::uint64_t seed = 0;
  std::size_t failures = 0;  // replications that errored (count as non-reject)
};

struct PowerOptions {
  PsiParams psi{};
  // Per-replication kappa noise is independent across replications and is
  // second order in the power estimate, so the harness default trades
  // per-kappa accuracy for speed. seed is derived per replication.
  MvnSettings mvn{2e-3, std::size_t{1} << 20, 12345};
  bool null_override = false;
  int threads = 0;  // <= 0: hardware concurrency
};

/// Estimates rejection rates at each gamma in one pass over the
/// replications. kappa is recomputed per replication (and per method) from
/// that replication's realized correlation matrix, then shared across the
/// gamma grid. Results are bit-reproducible and independent of the thread
/// count: every replication derives its own RNG substreams from
/// (seed, replication index).
inline std::vector<PowerResult> estimate_power_curve(
    const SamplingSituation& situation, ScoreMethod method,
    const std::vector<double>& gammas, double alpha, std::size_t reps,
    std::uint64_t seed, const PowerOptions& opts = {}) {
  if (reps < 1) throw std::invalid_argument("estimate_power: reps must be >= 1");
  if (gammas.empty()) {
    throw std::invalid_argument("estimate_power: no gamma values");
  }
  const SamplingSituation sit =
      opts.null_override ? situation.nulled() : situation;
  const std::size_t n_gamma = gammas.size();
  std::vector<std::uint8_t> rejected(reps * n_gamma, 0);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failures{0};
  std::mutex log_mutex;

  const auto method_tag = static_cast<std::uint64_t>(method);
  auto worker = [&]() {
    for (;;) {
      const std::size_t rep = next.fetch_add(1);
      if (rep >= reps) break;
      try {
        const GroupedStudy study = generate_study(sit, seed, rep);
        MvnSettings mvn = opts.mvn;
        mvn.seed = derive_seed(seed, rep, detail::kMvnStream + method_tag);
        const SubmaxAnalyzer analyzer(study, method, opts.psi, alpha, mvn);
        for (std::size_t j = 0; j < n_gamma; ++j) {
          rejected[rep * n_gamma + j] = analyzer.test(gammas[j]).reject ? 1 : 0;
        }
      } catch (const std::exception& e) {
        failures.fetch_add(1);
        std::lock_guard<std::mutex> lock(log_mutex);
        std::cerr << "estimate_power: replication " << rep
                  << " failed (counted as non-rejection): " << e.what()
                  << "\n";
      }
    }
  };

  int n_threads = opts.threads > 0
                      ? opts.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  if (static_cast<std::size_t>(n_threads) > reps) {
    n_threads = static_cast<int>(reps);
  }
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::vector<PowerResult> out;
  out.reserve(n_gamma);
  for (std::size_t j = 0; j < n_gamma; ++j) {
    std::size_t hits = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      hits += rejected[rep * n_gamma + j];
    }
    PowerResult r;
    r.situation = situation.id;
    r.method = method;
    r.gamma = gammas[j];
    r.power = static_cast<double>(hits) / static_cast<double>(reps);
    r.reps = reps;
    r.mc_se = std::sqrt(r.power * (1.0 - r.power) / static_cast<double>(reps));
    r.seed = seed;
    r.failures = failures.load();
    out.push_back(r);
  }
  return out;
}

inline PowerResult estimate_power(const SamplingSituation& situation,
                                  ScoreMethod method, double gamma,
                                  double alpha, std::size_t reps,
                                  std::uint64_t seed,
                                  const PowerOptions& opts = {}) {
  return estimate_power_curve(situation, method, {gamma}, alpha, reps, seed,
                              opts)
      .front();
}

}  // namespace submax
