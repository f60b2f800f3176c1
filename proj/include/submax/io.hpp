#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "submax/data_model.hpp"
#include "submax/errors.hpp"

namespace submax {
namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

inline bool parse_double(const std::string& token, double* out) {
  if (token.empty()) return false;
  char* end = nullptr;
  *out = std::strtod(token.c_str(), &end);
  return end == token.c_str() + token.size();
}

}  // namespace detail

/// Reads the pair-difference CSV: header `pair_id,cov_1,...,cov_L,d`, one
/// row per matched pair. negate_d flips the sign of every difference
/// (the `--direction less` orientation).
inline GroupedStudy read_pairs_csv(std::istream& in,
                                   const std::string& source,
                                   bool negate_d = false) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(source + ": empty file (missing header)");
  }
  const std::vector<std::string> header = detail::split_csv_line(line);
  if (header.size() < 2 || header.front() != "pair_id" || header.back() != "d") {
    throw ValidationError(
        source +
        ": csv schema mismatch: expected header `pair_id,cov_1,...,cov_L,d`, "
        "found `" +
        line + "`");
  }
  const std::size_t L = header.size() - 2;
  for (std::size_t l = 0; l < L; ++l) {
    const std::string expected = "cov_" + std::to_string(l + 1);
    if (header[l + 1] != expected) {
      throw ValidationError(source + ": csv schema mismatch at column " +
                            std::to_string(l + 2) + ": expected `" + expected +
                            "`, found `" + header[l + 1] + "`");
    }
  }

  std::vector<RawRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ValidationError(source + ": line " + std::to_string(line_no) +
                            ": expected " + std::to_string(header.size()) +
                            " columns, found " + std::to_string(fields.size()));
    }
    RawRecord row;
    row.pair_id = fields.front();
    row.covariates.reserve(L);
    for (std::size_t l = 0; l < L; ++l) {
      double v = 0.0;
      if (!detail::parse_double(fields[l + 1], &v)) {
        throw ValidationError(source + ": line " + std::to_string(line_no) +
                              " (pair '" + row.pair_id + "'): covariate cov_" +
                              std::to_string(l + 1) + " value `" +
                              fields[l + 1] + "` is not numeric");
      }
      row.covariates.push_back(v);
    }
    if (!detail::parse_double(fields.back(), &row.d)) {
      throw ValidationError(source + ": line " + std::to_string(line_no) +
                            " (pair '" + row.pair_id + "'): difference `" +
                            fields.back() + "` is not numeric");
    }
    if (negate_d) row.d = -row.d;
    rows.push_back(std::move(row));
  }
  try {
    return ingest(rows);
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

inline GroupedStudy load_pairs_csv(const std::string& path,
                                   bool negate_d = false) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open data file `" + path + "`");
  }
  return read_pairs_csv(in, path, negate_d);
}

/// Writes a study back out in the ingestion schema, with differences at
/// full round-trip precision.
inline void write_pairs_csv(std::ostream& out, const GroupedStudy& study) {
  out << "pair_id";
  for (int l = 1; l <= study.num_covariates; ++l) out << ",cov_" << l;
  out << ",d\n";
  char buf[40];
  for (const PairDifference& p : study.pairs) {
    out << p.pair_id;
    for (std::uint8_t c : p.covariates) out << ',' << static_cast<int>(c);
    std::snprintf(buf, sizeof(buf), "%.17g", p.d);
    out << ',' << buf << '\n';
  }
}

}  // namespace submax
