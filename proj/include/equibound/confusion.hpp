#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace equibound {

// joint[x][xhat] layout throughout: row = true signal, column = decoded
// signal, entries are joint probabilities p(X = x, Xhat = xhat).
using Matrix = std::vector<std::vector<double>>;

// Shared numeric tolerances. kSumTol bounds |sum - 1| on a joint matrix,
// kColumnTol is the slack allowed on column dominance, kEntryTol is used
// wherever two matrices or scalars are compared entrywise.
inline constexpr double kSumTol = 1e-9;
inline constexpr double kColumnTol = 1e-9;
inline constexpr double kEntryTol = 1e-9;

enum class ViolationKind { NotNormalized, NegativeEntry, NotMapConsistent };

struct Violation {
  ViolationKind kind;
  int column;  // offending decode column (0-based), -1 if not column-specific
  std::string message;
};

// Carries every violated invariant, not just the first one found, so a bad
// matrix can be diagnosed in one pass.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(std::vector<Violation> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<Violation>& vs) {
    std::string out = "invalid confusion matrix:";
    for (const auto& v : vs) {
      out += "\n  ";
      out += v.message;
    }
    return out;
  }

  std::vector<Violation> violations_;
};

// A validated square joint distribution over (signal, decoded signal).
struct ConfusionMatrix {
  int n = 0;
  Matrix joint;
};

// Per-decode marginals and error rates. eps[xhat] = p(X != xhat | Xhat = xhat)
// is meaningful only where zero_mass[xhat] is false; it is set to 0 there.
struct DecodeProfile {
  std::vector<double> p_hat;
  std::vector<double> eps;
  std::vector<bool> zero_mass;
};

namespace detail {

inline std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

}  // namespace detail

// Checks that `raw` is a joint confusion matrix produced by a maximum
// a-posteriori decoder: square, nonnegative, total mass 1, and in every
// column the diagonal entry is a column maximum. A non-square or empty
// input is a usage error (std::invalid_argument); everything else is
// reported through validation_error with one entry per violated invariant.
inline ConfusionMatrix validate_confusion(const Matrix& raw) {
  const std::size_t n = raw.size();
  if (n == 0) throw std::invalid_argument("confusion matrix must be at least 1x1");
  for (const auto& row : raw) {
    if (row.size() != n) throw std::invalid_argument("confusion matrix must be square");
  }

  std::vector<Violation> issues;

  bool negative = false;
  double total = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t xh = 0; xh < n; ++xh) {
      const double v = raw[x][xh];
      if (v < 0.0) {
        issues.push_back({ViolationKind::NegativeEntry, static_cast<int>(xh),
                          "entry (" + std::to_string(x + 1) + ", " + std::to_string(xh + 1) +
                              ") is negative: " + detail::fmt("%.6g", v)});
        negative = true;
      }
      total += v;
    }
  }

  if (std::fabs(total - 1.0) > kSumTol) {
    issues.push_back({ViolationKind::NotNormalized, -1,
                      detail::fmt("entries sum to %.12g, expected 1 within %.1g", total, kSumTol)});
  }

  std::vector<bool> dominated(n, true);
  for (std::size_t xh = 0; xh < n; ++xh) {
    const double diag = raw[xh][xh];
    for (std::size_t x = 0; x < n; ++x) {
      if (raw[x][xh] > diag + kColumnTol) {
        issues.push_back(
            {ViolationKind::NotMapConsistent, static_cast<int>(xh),
             "column " + std::to_string(xh + 1) + ": entry for signal " + std::to_string(x + 1) +
                 detail::fmt(" (%.6g) exceeds the diagonal (%.6g)", raw[x][xh], diag)});
        dominated[xh] = false;
        break;
      }
    }
  }

  // Consequence of column dominance: the per-decode error rate can be at
  // most (n-1)/n. With entrywise tolerances a column of near-zero mass can
  // slip past the dominance test while still implying an impossible error
  // rate, so columns that passed above get this second look.
  if (!negative) {
    for (std::size_t xh = 0; xh < n; ++xh) {
      if (!dominated[xh]) continue;
      double colsum = 0.0;
      for (std::size_t x = 0; x < n; ++x) colsum += raw[x][xh];
      if (colsum > 0.0) {
        const double eps = 1.0 - raw[xh][xh] / colsum;
        const double cap = static_cast<double>(n - 1) / static_cast<double>(n);
        if (eps > cap + kColumnTol) {
          issues.push_back({ViolationKind::NotMapConsistent, static_cast<int>(xh),
                            "column " + std::to_string(xh + 1) +
                                detail::fmt(": error rate %.6g exceeds the decoder cap %.6g", eps, cap)});
        }
      }
    }
  }

  if (!issues.empty()) throw validation_error(std::move(issues));
  return ConfusionMatrix{static_cast<int>(n), raw};
}

// Column marginals p(xhat) and error rates eps_xhat = 1 - p(xhat, xhat)/p(xhat).
// Zero-mass decode outcomes are flagged rather than treated as errors: they
// contribute nothing to any bound.
inline DecodeProfile decode_profile(const ConfusionMatrix& cm) {
  DecodeProfile out;
  out.p_hat.assign(cm.n, 0.0);
  out.eps.assign(cm.n, 0.0);
  out.zero_mass.assign(cm.n, false);
  for (int xh = 0; xh < cm.n; ++xh) {
    double colsum = 0.0;
    for (int x = 0; x < cm.n; ++x) colsum += cm.joint[x][xh];
    out.p_hat[xh] = colsum;
    if (colsum > 0.0) {
      out.eps[xh] = std::fmax(0.0, 1.0 - cm.joint[xh][xh] / colsum);
    } else {
      out.zero_mass[xh] = true;
    }
  }
  return out;
}

}  // namespace equibound
