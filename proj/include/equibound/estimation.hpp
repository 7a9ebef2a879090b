#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "equibound/bounds.hpp"
#include "equibound/confusion.hpp"

namespace equibound {

// Decode bins holding fewer samples than this get a warning attached to the
// estimation report; their plug-in error rates are noise-dominated.
inline constexpr std::uint64_t kSmallBinThreshold = 25;

class parse_error : public std::runtime_error {
 public:
  parse_error(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class empty_input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SampleFormat { Auto, Csv, JsonLines };

// Aggregated (signal, output) observations. Labels are opaque strings mapped
// to dense indices in first-seen order; counts are exact integers keyed by
// packed (signal index << 32 | output index), so the aggregate is identical
// for any permutation of the input records.
struct SampleBatch {
  std::vector<std::string> x_labels;
  std::vector<std::string> y_labels;
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  std::uint64_t n_records = 0;

  int n_signals() const { return static_cast<int>(x_labels.size()); }
  int n_outputs() const { return static_cast<int>(y_labels.size()); }
};

namespace detail {

inline std::uint64_t pack_xy(std::uint32_t x, std::uint32_t y) {
  return (static_cast<std::uint64_t>(x) << 32) | y;
}

inline std::uint32_t intern_label(std::vector<std::string>& labels,
                                  std::unordered_map<std::string, std::uint32_t>& index,
                                  const std::string& label) {
  const auto it = index.find(label);
  if (it != index.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(labels.size());
  labels.push_back(label);
  index.emplace(label, id);
  return id;
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

// Reads labeled sample records into exact integer counts. CSV input must
// start with an "x,y" header and hold one "label,label" record per line;
// JSON Lines input holds one {"x": ..., "y": ...} object per line, where
// non-string label values are kept in their compact JSON spelling. Blank
// lines are skipped; anything else malformed raises parse_error with its
// 1-based line number. With SampleFormat::Auto a first non-blank line that
// starts with '{' selects JSON Lines.
inline SampleBatch ingest_samples(std::istream& in, SampleFormat format = SampleFormat::Auto) {
  SampleBatch batch;
  std::unordered_map<std::string, std::uint32_t> x_index;
  std::unordered_map<std::string, std::uint32_t> y_index;

  std::vector<std::string> lines;
  for (std::string raw; std::getline(in, raw);) lines.push_back(detail::strip_cr(raw));

  std::size_t first = 0;
  while (first < lines.size() && detail::trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw empty_input_error("no sample records in input");

  SampleFormat fmt = format;
  if (fmt == SampleFormat::Auto) {
    fmt = detail::trim(lines[first]).front() == '{' ? SampleFormat::JsonLines : SampleFormat::Csv;
  }

  const auto add = [&](const std::string& xl, const std::string& yl) {
    const std::uint32_t xi = detail::intern_label(batch.x_labels, x_index, xl);
    const std::uint32_t yi = detail::intern_label(batch.y_labels, y_index, yl);
    ++batch.counts[detail::pack_xy(xi, yi)];
    ++batch.n_records;
  };

  if (fmt == SampleFormat::Csv) {
    const std::string header = detail::trim(lines[first]);
    const std::size_t comma = header.find(',');
    if (comma == std::string::npos || detail::trim(header.substr(0, comma)) != "x" ||
        detail::trim(header.substr(comma + 1)) != "y") {
      throw parse_error(first + 1, "expected CSV header \"x,y\", got \"" + header + "\"");
    }
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
      const std::string& line = lines[i];
      if (detail::trim(line).empty()) continue;
      const std::size_t pos = line.find(',');
      if (pos == std::string::npos || line.find(',', pos + 1) != std::string::npos) {
        throw parse_error(i + 1, "expected exactly one comma in \"" + line + "\"");
      }
      const std::string xl = detail::trim(line.substr(0, pos));
      const std::string yl = detail::trim(line.substr(pos + 1));
      if (xl.empty() || yl.empty()) throw parse_error(i + 1, "empty label");
      add(xl, yl);
    }
  } else {
    for (std::size_t i = first; i < lines.size(); ++i) {
      if (detail::trim(lines[i]).empty()) continue;
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(lines[i]);
      } catch (const nlohmann::json::exception& e) {
        throw parse_error(i + 1, e.what());
      }
      if (!obj.is_object() || !obj.contains("x") || !obj.contains("y")) {
        throw parse_error(i + 1, "expected an object with \"x\" and \"y\" members");
      }
      const auto label_of = [](const nlohmann::json& v) {
        return v.is_string() ? v.get<std::string>() : v.dump();
      };
      add(label_of(obj["x"]), label_of(obj["y"]));
    }
  }

  if (batch.n_records == 0) throw empty_input_error("no sample records in input");
  return batch;
}

// Empirical maximum a-posteriori decoder: each output index maps to the
// signal with the largest count in its column, ties to the smallest signal
// index. Every output index was observed at least once, so each entry is
// backed by data.
inline std::vector<int> empirical_decoder(const SampleBatch& batch) {
  std::vector<int> decode(batch.n_outputs(), 0);
  std::vector<std::uint64_t> best(batch.n_outputs(), 0);
  for (const auto& [key, count] : batch.counts) {
    const int x = static_cast<int>(key >> 32);
    const int y = static_cast<int>(key & 0xffffffffu);
    if (count > best[y] || (count == best[y] && x < decode[y])) {
      best[y] = count;
      decode[y] = x;
    }
  }
  return decode;
}

// Plug-in confusion matrix of the empirical decoder. Counts aggregate as
// exact integers before the single division by the record total, so the
// result is identical bytes for any input ordering, and column dominance
// holds by construction of the decoder.
inline ConfusionMatrix empirical_confusion(const SampleBatch& batch) {
  const int n = batch.n_signals();
  if (n == 0) throw empty_input_error("no sample records in input");
  const std::vector<int> decode = empirical_decoder(batch);
  std::vector<std::vector<std::uint64_t>> tally(n, std::vector<std::uint64_t>(n, 0));
  for (const auto& [key, count] : batch.counts) {
    const int x = static_cast<int>(key >> 32);
    const int y = static_cast<int>(key & 0xffffffffu);
    tally[x][decode[y]] += count;
  }
  Matrix joint(n, std::vector<double>(n));
  const double total = static_cast<double>(batch.n_records);
  for (int x = 0; x < n; ++x) {
    for (int xh = 0; xh < n; ++xh) {
      joint[x][xh] = static_cast<double>(tally[x][xh]) / total;
    }
  }
  return validate_confusion(joint);
}

struct EstimationReport {
  std::uint64_t n_samples = 0;
  int n_signals = 0;
  int n_outputs = 0;
  double h_x = 0.0;               // plug-in H(X)
  double i_lower = 0.0;           // plug-in I(X; Xhat), a lower estimate of I(X; Y)
  double bound_confusion = 0.0;   // per-decode equivocation bound on the plug-in matrix
  double bound_kovalevsky = 0.0;  // single-rate bound on the plug-in matrix
  double mi_upper = 0.0;          // h_x - bound_confusion
  std::vector<std::string> warnings;
};

// Full sample-to-report pipeline: plug-in confusion matrix, its entropies,
// and the two equivocation bounds. i_lower <= mi_upper always holds because
// the per-decode bound never exceeds the exact conditional entropy of the
// matrix it is computed from.
inline EstimationReport estimate(const SampleBatch& batch) {
  const ConfusionMatrix cm = empirical_confusion(batch);
  const Entropies ent = entropies(cm);

  EstimationReport report;
  report.n_samples = batch.n_records;
  report.n_signals = batch.n_signals();
  report.n_outputs = batch.n_outputs();
  report.h_x = ent.h_x;
  report.i_lower = ent.i_x_xhat;
  report.bound_confusion = equivocation_bound(cm);
  report.bound_kovalevsky = kovalevsky_bound(cm);
  report.mi_upper = ent.h_x - report.bound_confusion;

  const std::vector<int> decode = empirical_decoder(batch);
  std::vector<std::uint64_t> bin(batch.n_signals(), 0);
  for (const auto& [key, count] : batch.counts) {
    bin[decode[static_cast<int>(key & 0xffffffffu)]] += count;
  }
  for (int xh = 0; xh < batch.n_signals(); ++xh) {
    if (bin[xh] > 0 && bin[xh] < kSmallBinThreshold) {
      report.warnings.push_back("decode bin \"" + batch.x_labels[xh] + "\" has only " +
                                std::to_string(bin[xh]) +
                                " samples; its error rate is noise-dominated");
    }
  }
  return report;
}

}  // namespace equibound
