#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "submax/errors.hpp"
#include "submax/normal.hpp"
#include "submax/rng.hpp"

namespace submax {

/// Accuracy settings for the randomized quasi-Monte Carlo integrator.
struct MvnSettings {
  double target_se = 5e-4;
  std::size_t max_samples = std::size_t{1} << 20;
  std::uint64_t seed = 12345;
};

struct MvnEstimate {
  double p = 0.0;
  double se = 0.0;
  std::size_t samples = 0;
  bool converged = true;  // se <= target_se (analytic cases report true)
};

namespace detail {

inline constexpr int kMaxMvnDim = 25;
inline constexpr int kMvnBatches = 8;
inline constexpr std::size_t kMvnInitialPerBatch = 128;

// Fractional parts of square roots of the first kMaxMvnDim-1 primes
// (Richtmyer generators for the Kronecker sequence).
inline const std::array<double, kMaxMvnDim - 1>& richtmyer_roots() {
  static const std::array<double, kMaxMvnDim - 1> roots = [] {
    constexpr int primes[kMaxMvnDim - 1] = {2,  3,  5,  7,  11, 13, 17, 19,
                                            23, 29, 31, 37, 41, 43, 47, 53,
                                            59, 61, 67, 71, 73, 79, 83, 89};
    std::array<double, kMaxMvnDim - 1> r{};
    for (int i = 0; i < kMaxMvnDim - 1; ++i) {
      const double s = std::sqrt(static_cast<double>(primes[i]));
      r[static_cast<std::size_t>(i)] = s - std::floor(s);
    }
    return r;
  }();
  return roots;
}

inline double frac(double x) { return x - std::floor(x); }

}  // namespace detail

/// Evaluates Pr(max_k X_k < kappa) for X ~ N(0, rho) by sequential
/// conditioning on the Cholesky factor, integrated with a randomly shifted
/// Kronecker sequence. Deterministic given (rho, kappa, settings.seed).
class MvnSolver {
 public:
  explicit MvnSolver(const Eigen::MatrixXd& rho, MvnSettings settings = {})
      : settings_(settings) {
    if (!(settings_.target_se > 0.0)) {
      throw std::invalid_argument("MvnSettings: target_se must be > 0");
    }
    if (settings_.max_samples < 1024) {
      throw std::invalid_argument("MvnSettings: max_samples must be >= 1024");
    }
    k_ = static_cast<int>(rho.rows());
    if (rho.rows() != rho.cols() || k_ < 1) {
      throw NumericError("mvnorm: correlation matrix must be square");
    }
    if (k_ > detail::kMaxMvnDim) {
      throw NumericError("mvnorm: dimension " + std::to_string(k_) +
                         " exceeds the supported maximum " +
                         std::to_string(detail::kMaxMvnDim));
    }
    for (int i = 0; i < k_; ++i) {
      if (std::fabs(rho(i, i) - 1.0) > 1e-8) {
        throw NumericError("mvnorm: diagonal entry " + std::to_string(i + 1) +
                           " differs from 1");
      }
      for (int j = 0; j < i; ++j) {
        if (std::fabs(rho(i, j) - rho(j, i)) > 1e-8) {
          throw NumericError("mvnorm: correlation matrix is asymmetric");
        }
      }
    }
    // Clip tiny/negative eigenvalues so near-singular inputs stay factorable.
    const Eigen::MatrixXd sym = 0.5 * (rho + rho.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) {
      throw NumericError("mvnorm: eigendecomposition failed");
    }
    if (es.eigenvalues().minCoeff() < -1e-8) {
      throw NumericError(
          "mvnorm: correlation matrix is not positive semidefinite (min "
          "eigenvalue " +
          std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
    Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(1e-10);
    const Eigen::MatrixXd repaired =
        es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(repaired);
    if (llt.info() != Eigen::Success) {
      Eigen::MatrixXd jittered = repaired;
      jittered.diagonal().array() += 1e-10;
      llt.compute(jittered);
      if (llt.info() != Eigen::Success) {
        throw NumericError("mvnorm: Cholesky factorization failed");
      }
    }
    chol_ = llt.matrixL();
    for (int i = 0; i < k_; ++i) {
      for (int j = 0; j <= i; ++j) {
        lflat_[static_cast<std::size_t>(i * detail::kMaxMvnDim + j)] =
            chol_(i, j);
      }
    }

    // Random shifts are fixed at construction so that every probability
    // evaluated through this solver is a smooth deterministic function of
    // kappa (root finding relies on this).
    std::mt19937_64 gen = make_engine(settings_.seed, 0x4D564EULL);
    for (int b = 0; b < detail::kMvnBatches; ++b) {
      for (int j = 0; j + 1 < k_; ++j) {
        shifts_[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)] =
            uniform01(gen);
      }
    }
  }

  int dimension() const { return k_; }
  const Eigen::MatrixXd& cholesky() const { return chol_; }

  MvnEstimate prob_below(double kappa) const {
    if (k_ == 1) {
      return MvnEstimate{normal_cdf(kappa), 0.0, 0, true};
    }
    const double e1 = normal_cdf(kappa / chol_(0, 0));
    if (e1 <= 0.0) return MvnEstimate{0.0, 0.0, 0, true};

    double sums[detail::kMvnBatches] = {};
    std::size_t done = 0;
    std::size_t per_batch = detail::kMvnInitialPerBatch;
    while (true) {
      for (int b = 0; b < detail::kMvnBatches; ++b) {
        double acc = 0.0;
        const double* shift = shifts_[static_cast<std::size_t>(b)].data();
        for (std::size_t k = done + 1; k <= per_batch; ++k) {
          acc += integrand(kappa, e1, static_cast<double>(k), shift);
        }
        sums[b] += acc;
      }
      done = per_batch;
      // antithetic pairs: two integrand values per index
      const std::size_t total = 2 * done * detail::kMvnBatches;
      double p = 0.0;
      for (double s : sums) p += s;
      p /= static_cast<double>(done * detail::kMvnBatches);
      double var = 0.0;
      for (double s : sums) {
        const double m = s / static_cast<double>(done) - p;
        var += m * m;
      }
      var /= detail::kMvnBatches - 1;
      const double se = std::sqrt(var / detail::kMvnBatches);
      if (se <= settings_.target_se || total >= settings_.max_samples) {
        return MvnEstimate{std::clamp(p, 0.0, 1.0), se, total,
                           se <= settings_.target_se};
      }
      per_batch *= 2;
    }
  }

 private:
  // Mean of the sequential-conditioning integrand over an antithetic pair
  // of points (w, 1-w) from the shifted Kronecker sequence at index k.
  double integrand(double kappa, double e1, double k, const double* shift) const {
    const auto& roots = detail::richtmyer_roots();
    double w[detail::kMaxMvnDim];
    for (int c = 1; c < k_; ++c) {
      w[c - 1] = detail::frac(k * roots[static_cast<std::size_t>(c - 1)] +
                              shift[c - 1]);
    }
    double f = 0.0;
    for (int a = 0; a < 2; ++a) {
      double y[detail::kMaxMvnDim];
      double e = e1;
      double prod = e1;
      for (int c = 1; c < k_; ++c) {
        const double wc = a == 0 ? w[c - 1] : 1.0 - w[c - 1];
        double u = wc * e;
        if (u < 1e-300) u = 1e-300;
        if (u > 1.0 - 1e-16) u = 1.0 - 1e-16;
        y[c - 1] = normal_quantile(u);
        const double* row = &lflat_[static_cast<std::size_t>(c * detail::kMaxMvnDim)];
        double s = 0.0;
        for (int j = 0; j < c; ++j) s += row[j] * y[j];
        e = normal_cdf((kappa - s) / row[c]);
        prod *= e;
      }
      f += prod;
    }
    return 0.5 * f;
  }

  int k_ = 0;
  MvnSettings settings_;
  Eigen::MatrixXd chol_;
  std::array<double, detail::kMaxMvnDim * detail::kMaxMvnDim> lflat_{};
  std::array<std::array<double, detail::kMaxMvnDim>, detail::kMvnBatches>
      shifts_{};
};

/// Equicoordinate probability Pr(max_k X_k < kappa), X ~ N(0, rho).
inline MvnEstimate equicoordinate_prob(double kappa, const Eigen::MatrixXd& rho,
                                       const MvnSettings& settings = {}) {
  return MvnSolver(rho, settings).prob_below(kappa);
}

struct CriticalValueInfo {
  double kappa = 0.0;
  MvnEstimate estimate;  // probability at the returned kappa
};

/// Solves Pr(max_k X_k < kappa) = 1 - alpha for kappa, within 1e-4 on the
/// probability scale. The root is bracketed by the single-test and
/// Bonferroni quantiles; iterates follow the model p(kappa) ~ Phi(kappa)^c
/// with c refit from the latest evaluation, falling back to bisection
/// whenever a step leaves the bracket.
inline CriticalValueInfo critical_value_info(const Eigen::MatrixXd& rho,
                                             double alpha,
                                             const MvnSettings& settings = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("critical_value: alpha must be in (0,1)");
  }
  MvnSolver solver(rho, settings);
  const int K = solver.dimension();
  const double target = 1.0 - alpha;
  double lo = normal_quantile(target);
  if (K == 1) {
    return CriticalValueInfo{lo, MvnEstimate{target, 0.0, 0, true}};
  }
  double hi = normal_quantile(1.0 - alpha / K);
  constexpr double kRootTol = 1e-4;

  double kappa = normal_quantile(std::pow(target, 1.0 / K));
  for (int iter = 0; iter < 80; ++iter) {
    const MvnEstimate est = solver.prob_below(kappa);
    if (std::fabs(est.p - target) <= kRootTol) {
      return CriticalValueInfo{kappa, est};
    }
    if (est.p > target) {
      hi = kappa;
    } else {
      lo = kappa;
    }
    if (hi - lo < 1e-7) {
      const double mid = 0.5 * (lo + hi);
      return CriticalValueInfo{mid, solver.prob_below(mid)};
    }
    const double pc = std::clamp(est.p, 1e-12, 1.0 - 1e-12);
    const double c = std::log(pc) / std::log(normal_cdf(kappa));
    double next = 0.5 * (lo + hi);
    if (c > 0.0 && std::isfinite(c)) {
      const double guess = normal_quantile(std::pow(target, 1.0 / c));
      if (guess > lo && guess < hi) next = guess;
    }
    kappa = next;
  }
  throw NumericError(
      "critical_value: no convergence; probability estimates are "
      "inconsistent with the analytic bracket");
}

inline double critical_value(const Eigen::MatrixXd& rho, double alpha,
                             const MvnSettings& settings = {}) {
  return critical_value_info(rho, alpha, settings).kappa;
}

}  // namespace submax
