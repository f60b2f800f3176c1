#pragma once

#include <stdexcept>
#include <string>

namespace submax {

/// Input data failed validation (CSV schema, non-binary covariate,
/// non-finite difference). Messages name the offending row or column.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scale estimate (pooled or within-group median of |d|) is zero, so the
/// requested statistic is undefined on this data. group() is the offending
/// group id, or -1 for the pooled scale.
class DegenerateScale : public std::runtime_error {
 public:
  DegenerateScale(const std::string& msg, int group = -1)
      : std::runtime_error(msg), group_(group) {}
  int group() const { return group_; }

 private:
  int group_;
};

/// A group required by the requested scoring rule has no pairs.
class EmptyGroup : public std::runtime_error {
 public:
  EmptyGroup(const std::string& msg, int group)
      : std::runtime_error(msg), group_(group) {}
  int group() const { return group_; }

 private:
  int group_;
};

/// A comparison (or a single statistic) has zero worst-case variance.
/// comparison() is the comparison index, or -1 when not tied to one.
class DegenerateVariance : public std::runtime_error {
 public:
  explicit DegenerateVariance(const std::string& msg, int comparison = -1)
      : std::runtime_error(msg), comparison_(comparison) {}
  int comparison() const { return comparison_; }

 private:
  int comparison_;
};

/// Numerical failure in the multivariate-normal machinery (invalid
/// correlation matrix, root bracket inconsistency).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace submax
