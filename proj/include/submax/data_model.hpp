#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "submax/errors.hpp"

namespace submax {

// Hard cap on the number of binary covariates; 2^L groups are materialized.
inline constexpr int kMaxCovariates = 16;

/// One matched pair: treated-minus-control response difference plus the
/// pair's binary effect-modifier candidates.
struct PairDifference {
  std::string pair_id;
  std::vector<std::uint8_t> covariates;  // each 0 or 1, size L
  double d = 0.0;
};

/// Unvalidated input row, as it comes off a file or a generator.
struct RawRecord {
  std::string pair_id;
  std::vector<double> covariates;
  double d = 0.0;
};

/// Canonical group id for a covariate pattern: the pattern is read as a
/// binary number with covariate 1 as the most significant bit, and groups
/// are ordered by that number descending, so pattern (1,1,...,1) is group 0.
inline int canonical_group_id(const std::vector<std::uint8_t>& pattern) {
  const int L = static_cast<int>(pattern.size());
  int value = 0;
  for (int l = 0; l < L; ++l) {
    value = (value << 1) | (pattern[l] ? 1 : 0);
  }
  return ((1 << L) - 1) - value;
}

/// Pattern string for a canonical group id, e.g. "(1,0)". L=0 gives "()".
inline std::string group_pattern_label(int group, int num_covariates) {
  const int value = ((1 << num_covariates) - 1) - group;
  std::string out = "(";
  for (int l = 0; l < num_covariates; ++l) {
    if (l > 0) out += ',';
    out += ((value >> (num_covariates - 1 - l)) & 1) ? '1' : '0';
  }
  out += ')';
  return out;
}

/// Matched pairs partitioned into the G = 2^L interaction groups.
/// Immutable after ingest; groups hold pair indices in input order.
struct GroupedStudy {
  int num_covariates = 0;                // L
  std::vector<PairDifference> pairs;     // input order
  std::vector<int> group_of;             // group id per pair, parallel to pairs
  std::vector<std::vector<int>> groups;  // canonical order; indices into pairs

  int group_count() const { return 1 << num_covariates; }
  std::size_t group_size(int g) const { return groups[g].size(); }
};

/// Validates and routes raw rows into their interaction groups. Empty groups
/// are permitted here; scoring rules that need a within-group median reject
/// them later.
inline GroupedStudy ingest(const std::vector<RawRecord>& rows) {
  GroupedStudy study;
  study.num_covariates =
      rows.empty() ? 0 : static_cast<int>(rows.front().covariates.size());
  if (study.num_covariates > kMaxCovariates) {
    throw ValidationError("ingest: " + std::to_string(study.num_covariates) +
                          " covariates exceed the supported maximum of " +
                          std::to_string(kMaxCovariates));
  }
  study.groups.resize(static_cast<std::size_t>(study.group_count()));
  study.pairs.reserve(rows.size());
  study.group_of.reserve(rows.size());

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RawRecord& row = rows[i];
    const std::string where =
        "row " + std::to_string(i + 1) + " (pair '" + row.pair_id + "')";
    if (static_cast<int>(row.covariates.size()) != study.num_covariates) {
      throw ValidationError("ingest: " + where + ": expected " +
                            std::to_string(study.num_covariates) +
                            " covariate values, found " +
                            std::to_string(row.covariates.size()));
    }
    std::vector<std::uint8_t> pattern(row.covariates.size());
    for (std::size_t l = 0; l < row.covariates.size(); ++l) {
      const double v = row.covariates[l];
      if (v != 0.0 && v != 1.0) {
        throw ValidationError("ingest: " + where + ": covariate cov_" +
                              std::to_string(l + 1) + " value " +
                              std::to_string(v) + " is not binary");
      }
      pattern[l] = (v == 1.0) ? 1 : 0;
    }
    if (!std::isfinite(row.d)) {
      throw ValidationError("ingest: " + where + ": non-finite difference d");
    }
    const int g = canonical_group_id(pattern);
    study.group_of.push_back(g);
    study.groups[static_cast<std::size_t>(g)].push_back(
        static_cast<int>(study.pairs.size()));
    study.pairs.push_back(PairDifference{row.pair_id, std::move(pattern), row.d});
  }
  return study;
}

}  // namespace submax
