#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "equibound/channel.hpp"
#include "equibound/confusion.hpp"
#include "equibound/estimation.hpp"
#include "equibound/oracle.hpp"

namespace equibound {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Fixed-format float used in all machine-readable output. 12 significant
// digits keeps reports byte-identical across runs while staying well inside
// every tolerance used by the tests.
inline std::string format_g(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

inline void append_json_string(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

}  // namespace detail

// Parses a square matrix of decimal numbers, one row per line, fields
// separated by commas. skip_header drops the first non-empty line. Ragged
// rows, trailing fields or unparsable numbers raise io_error with a 1-based
// line number.
inline Matrix read_confusion_csv(std::istream& in, bool skip_header = false) {
  Matrix rows;
  std::string line;
  std::size_t lineno = 0;
  bool header_pending = skip_header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = true;
    for (char c : line) {
      if (c != ' ' && c != '\t') {
        blank = false;
        break;
      }
    }
    if (blank) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string field =
          line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (field.empty() || end == field.c_str() || (end && *end != '\0') || errno == ERANGE) {
        throw io_error("line " + std::to_string(lineno) + ": cannot parse \"" + field +
                       "\" as a number");
      }
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows[0].size()) {
      throw io_error("line " + std::to_string(lineno) + ": expected " +
                     std::to_string(rows[0].size()) + " fields, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw io_error("no matrix rows in input");
  if (rows.size() != rows[0].size()) {
    throw io_error("matrix is " + std::to_string(rows.size()) + "x" +
                   std::to_string(rows[0].size()) + ", expected square");
  }
  return rows;
}

inline Matrix read_confusion_csv_file(const std::string& path, bool skip_header = false) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path + ": " + std::strerror(errno));
  return read_confusion_csv(in, skip_header);
}

// Full-precision matrix dump, round-trippable through read_confusion_csv.
inline std::string confusion_to_csv(const Matrix& m) {
  std::string out;
  for (const auto& row : m) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += detail::format_g(row[i], 17);
    }
    out += '\n';
  }
  return out;
}

inline std::string to_json(const BoundReport& r, int n) {
  std::string out = "{";
  out += "\"n\":" + std::to_string(n);
  out += ",\"h_x\":" + detail::format_g(r.h_x);
  out += ",\"h_x_given_xhat\":" + detail::format_g(r.h_x_given_xhat);
  out += ",\"i_x_xhat\":" + detail::format_g(r.i_x_xhat);
  out += ",\"bound_confusion\":" + detail::format_g(r.bound_confusion);
  out += ",\"bound_kovalevsky\":" + detail::format_g(r.bound_kovalevsky);
  out += ",\"overall_eps\":" + detail::format_g(r.overall_eps);
  out += ",\"mi_upper\":" + detail::format_g(r.mi_upper);
  out += "}\n";
  return out;
}

// Channel dump: decode marginals plus, per decode outcome, the flat columns
// as {support, weight} with 0-based signal indices.
inline std::string to_json(const AchievingChannel& ch) {
  std::string out = "{\"p_hat\":[";
  for (std::size_t i = 0; i < ch.p_hat.size(); ++i) {
    if (i) out += ',';
    out += detail::format_g(ch.p_hat[i]);
  }
  out += "],\"fibers\":[";
  for (std::size_t f = 0; f < ch.fibers.size(); ++f) {
    if (f) out += ',';
    out += "{\"xhat\":" + std::to_string(ch.fibers[f].xhat) + ",\"columns\":[";
    const auto& cols = ch.fibers[f].columns;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out += ',';
      out += "{\"support\":[";
      for (std::size_t s = 0; s < cols[c].support.size(); ++s) {
        if (s) out += ',';
        out += std::to_string(cols[c].support[s]);
      }
      out += "],\"weight\":" + detail::format_g(cols[c].weight) + "}";
    }
    out += "]}";
  }
  out += "]}\n";
  return out;
}

inline std::string to_json(const StressReport& r) {
  std::string out = "{";
  out += "\"trials\":" + std::to_string(r.trials);
  out += ",\"nx_max\":" + std::to_string(r.nx_max);
  out += ",\"ny_max\":" + std::to_string(r.ny_max);
  out += ",\"min_slack\":" + detail::format_g(r.min_slack);
  out += ",\"violations\":[";
  for (std::size_t i = 0; i < r.violations.size(); ++i) {
    if (i) out += ',';
    out += "{\"trial\":" + std::to_string(r.violations[i].trial);
    out += ",\"seed\":" + std::to_string(r.violations[i].seed);
    out += ",\"slack\":" + detail::format_g(r.violations[i].slack) + "}";
  }
  out += "],\"master_seed\":" + std::to_string(r.master_seed);
  out += "}\n";
  return out;
}

inline std::string to_json(const EstimationReport& r) {
  std::string out = "{";
  out += "\"n_samples\":" + std::to_string(r.n_samples);
  out += ",\"n_signals\":" + std::to_string(r.n_signals);
  out += ",\"n_outputs\":" + std::to_string(r.n_outputs);
  out += ",\"h_x\":" + detail::format_g(r.h_x);
  out += ",\"i_lower\":" + detail::format_g(r.i_lower);
  out += ",\"bound_confusion\":" + detail::format_g(r.bound_confusion);
  out += ",\"bound_kovalevsky\":" + detail::format_g(r.bound_kovalevsky);
  out += ",\"mi_upper\":" + detail::format_g(r.mi_upper);
  out += ",\"warnings\":[";
  for (std::size_t i = 0; i < r.warnings.size(); ++i) {
    if (i) out += ',';
    detail::append_json_string(out, r.warnings[i]);
  }
  out += "]}\n";
  return out;
}

inline std::string to_csv(const std::vector<ExperimentRow>& rows) {
  std::string out = "n,h_post,bound_ours,bound_kov\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + ',' + detail::format_g(r.h_post) + ',' +
           detail::format_g(r.bound_ours) + ',' + detail::format_g(r.bound_kov) + '\n';
  }
  return out;
}

// Write-then-rename so readers never observe a half-written file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + tmp + ": " + std::strerror(errno));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw io_error("write to " + tmp + " failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    const std::string why = std::strerror(errno);
    std::remove(tmp.c_str());
    throw io_error("cannot move " + tmp + " to " + path + ": " + why);
  }
}

}  // namespace equibound
