#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "equibound/bounds.hpp"
#include "equibound/confusion.hpp"

namespace equibound {

// Relative tolerance under which two posterior masses are treated as tied.
// Exact arithmetic produces exact ties here; the guard only absorbs the odd
// ulp of drift so it never manufactures near-empty slivers.
inline constexpr double kTieRelTol = 1e-12;

class zero_probability_decode : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class not_flat_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class iteration_cap_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One channel output with arbitrary per-signal mass, masses[x] = p(x, y | xhat)
// within its fiber. Only ever an intermediate state before flattening.
struct GeneralColumn {
  std::vector<double> masses;
};

// One channel output carrying a flat posterior: p(x | y) = 1/|support| on the
// support and 0 elsewhere. weight = p(y | xhat). The support stays sorted.
struct FlatColumn {
  std::vector<int> support;
  double weight = 0.0;

  long length() const { return static_cast<long>(support.size()); }
};

// All channel outputs decoded to one signal. target_row_sums holds p(x | xhat),
// which every rewrite below preserves exactly; columns/general carry the
// current decomposition of that conditional distribution into outputs.
struct Fiber {
  int xhat = 0;
  std::vector<double> target_row_sums;
  std::vector<FlatColumn> columns;
  std::vector<GeneralColumn> general;
};

struct StepResult {
  bool changed = false;
  double delta = 0.0;  // entropy change in bits, <= 0
};

namespace detail {

// Sum weights of duplicate supports, keeping first-occurrence order and
// dropping exact zeros. Quadratic, but fibers never hold more than a few
// dozen columns.
inline void merge_columns(std::vector<FlatColumn>& cols) {
  std::vector<FlatColumn> merged;
  merged.reserve(cols.size());
  for (auto& c : cols) {
    if (c.weight == 0.0) continue;
    bool found = false;
    for (auto& m : merged) {
      if (m.support == c.support) {
        m.weight += c.weight;
        found = true;
        break;
      }
    }
    if (!found) merged.push_back(std::move(c));
  }
  cols = std::move(merged);
}

}  // namespace detail

// Increase of len * log2(len) when a flat column grows from len - 1 to len.
// Strictly increasing in len; the balancing step's entropy change is a
// difference of two of these.
inline double length_entropy_step(long len) {
  if (len <= 1) return 0.0;
  return static_cast<double>(len) * std::log2(static_cast<double>(len)) -
         static_cast<double>(len - 1) * std::log2(static_cast<double>(len - 1));
}

// Rewrites one output with an arbitrary posterior as a mixture of outputs
// with flat posteriors, preserving each signal's total mass and the total
// weight. Sort the masses with xhat first (it must be the largest, this is a
// MAP fiber) and the rest descending; the i-th output covers the top i
// signals with weight i * w * (q_i - q_{i+1}), where q is the sorted
// posterior and q_{n+1} = 0. Telescoping restores each q_j exactly.
// Conditional entropy never increases, strictly decreasing unless the input
// was already flat.
inline std::vector<FlatColumn> flatten_column(const GeneralColumn& col, int xhat) {
  const int n = static_cast<int>(col.masses.size());
  if (xhat < 0 || xhat >= n) throw std::invalid_argument("decode index out of range");
  double w = 0.0;
  for (double m : col.masses) {
    if (m < 0.0) throw std::invalid_argument("column masses must be nonnegative");
    w += m;
  }
  if (!(w > 0.0)) throw std::invalid_argument("column mass must be positive");

  std::vector<int> order;
  order.reserve(n);
  order.push_back(xhat);
  for (int x = 0; x < n; ++x) {
    if (x != xhat) order.push_back(x);
  }
  std::stable_sort(order.begin() + 1, order.end(), [&](int a, int b) {
    if (col.masses[a] != col.masses[b]) return col.masses[a] > col.masses[b];
    return a < b;
  });

  std::vector<FlatColumn> out;
  std::vector<int> support;
  support.reserve(n);
  for (int i = 0; i < n; ++i) {
    support.push_back(order[i]);
    const double q = col.masses[order[i]] / w;
    const double q_next = (i + 1 < n) ? col.masses[order[i + 1]] / w : 0.0;
    const double gap = q - q_next;
    if (gap > 0.0) {
      FlatColumn fc;
      fc.support = support;
      std::sort(fc.support.begin(), fc.support.end());
      fc.weight = static_cast<double>(i + 1) * w * gap;
      out.push_back(std::move(fc));
    }
  }
  return out;
}

// One balancing pass: take the longest and shortest flat columns (first
// occurrence on ties) and, if their lengths differ by at least 2, move one
// signal from the long support to the short one. Only mass slabs of equal
// per-cell height engage: the heavier column is split first so that the
// engaged parts satisfy w_long / a = w_short / b, and the leftover keeps its
// original support. The moved signal is the largest index present in the
// long support but not the short one (never xhat, which belongs to every
// support). Entropy changes by (w_engaged_long / a) * (step(b+1) - step(a)),
// which is strictly negative.
inline StepResult balance_step(Fiber& fiber) {
  if (!fiber.general.empty()) throw not_flat_error("balance_step requires a fully flattened fiber");
  if (fiber.columns.size() < 2) return {};

  std::size_t li = 0, si = 0;
  for (std::size_t i = 1; i < fiber.columns.size(); ++i) {
    if (fiber.columns[i].length() > fiber.columns[li].length()) li = i;
    if (fiber.columns[i].length() < fiber.columns[si].length()) si = i;
  }
  const long a = fiber.columns[li].length();
  const long b = fiber.columns[si].length();
  if (a - b <= 1) return {};

  const FlatColumn lc = fiber.columns[li];
  const FlatColumn sc = fiber.columns[si];
  const double m_long = lc.weight / static_cast<double>(a);
  const double m_short = sc.weight / static_cast<double>(b);

  double engaged_long = lc.weight;
  double engaged_short = sc.weight;
  double residual_long = 0.0;
  double residual_short = 0.0;
  if (std::fabs(m_long - m_short) > kTieRelTol * std::fmax(m_long, m_short)) {
    if (m_long > m_short) {
      engaged_long = static_cast<double>(a) * m_short;
      residual_long = lc.weight - engaged_long;
    } else {
      engaged_short = static_cast<double>(b) * m_long;
      residual_short = sc.weight - engaged_short;
    }
  }

  int moved = -1;
  for (auto it = lc.support.rbegin(); it != lc.support.rend(); ++it) {
    if (*it == fiber.xhat) continue;
    if (!std::binary_search(sc.support.begin(), sc.support.end(), *it)) {
      moved = *it;
      break;
    }
  }
  if (moved < 0) throw std::logic_error("long support adds nothing outside the short one");

  FlatColumn new_long;
  new_long.support = lc.support;
  new_long.support.erase(std::find(new_long.support.begin(), new_long.support.end(), moved));
  new_long.weight = engaged_long * static_cast<double>(a - 1) / static_cast<double>(a);

  FlatColumn new_short;
  new_short.support = sc.support;
  new_short.support.insert(
      std::lower_bound(new_short.support.begin(), new_short.support.end(), moved), moved);
  new_short.weight = engaged_short * static_cast<double>(b + 1) / static_cast<double>(b);

  const double delta =
      engaged_long / static_cast<double>(a) * (length_entropy_step(b + 1) - length_entropy_step(a));

  std::vector<FlatColumn> next;
  next.reserve(fiber.columns.size() + 2);
  for (std::size_t i = 0; i < fiber.columns.size(); ++i) {
    if (i == li) {
      next.push_back(new_long);
      if (residual_long > 0.0) next.push_back(FlatColumn{lc.support, residual_long});
    } else if (i == si) {
      next.push_back(new_short);
      if (residual_short > 0.0) next.push_back(FlatColumn{sc.support, residual_short});
    } else {
      next.push_back(fiber.columns[i]);
    }
  }
  detail::merge_columns(next);
  fiber.columns = std::move(next);
  return {true, delta};
}

// Seed fiber for one decode outcome: the whole conditional distribution
// p(x | xhat) as a single general column. Decode outcomes that never occur
// have no conditional distribution to minimize over.
inline Fiber init_fiber(const ConfusionMatrix& cm, int xhat) {
  if (xhat < 0 || xhat >= cm.n) throw std::invalid_argument("decode index out of range");
  double colsum = 0.0;
  for (int x = 0; x < cm.n; ++x) colsum += cm.joint[x][xhat];
  if (!(colsum > 0.0)) {
    throw zero_probability_decode("decode outcome " + std::to_string(xhat + 1) +
                                  " has zero probability");
  }
  Fiber f;
  f.xhat = xhat;
  f.target_row_sums.resize(cm.n);
  for (int x = 0; x < cm.n; ++x) f.target_row_sums[x] = cm.joint[x][xhat] / colsum;
  f.general.push_back(GeneralColumn{f.target_row_sums});
  return f;
}

// Entropy-minimizing decomposition of one fiber: flatten the seed column,
// then balance until all supports have lengths within 1 of each other. The
// step cap is far above anything observed in practice; hitting it means the
// rewrite rules stopped making progress and is reported as a hard error.
inline Fiber minimize_fiber(const ConfusionMatrix& cm, int xhat) {
  Fiber fiber = init_fiber(cm, xhat);
  std::vector<FlatColumn> flats;
  for (const auto& g : fiber.general) {
    auto cols = flatten_column(g, fiber.xhat);
    flats.insert(flats.end(), std::make_move_iterator(cols.begin()),
                 std::make_move_iterator(cols.end()));
  }
  fiber.general.clear();
  detail::merge_columns(flats);
  fiber.columns = std::move(flats);

  const long cap = 10L * static_cast<long>(cm.n) * static_cast<long>(cm.n);
  long steps = 0;
  while (true) {
    const StepResult r = balance_step(fiber);
    if (!r.changed) break;
    if (++steps > cap) {
      throw iteration_cap_error("balancing exceeded " + std::to_string(cap) +
                                " steps for decode outcome " + std::to_string(xhat + 1));
    }
  }
  return fiber;
}

// H(X | Y, Xhat = xhat) of a flat decomposition: sum of weight * log2(length).
inline double fiber_equivocation(const Fiber& fiber) {
  if (!fiber.general.empty()) throw not_flat_error("fiber_equivocation requires flat columns only");
  double h = 0.0;
  for (const auto& c : fiber.columns) {
    h += c.weight * std::log2(static_cast<double>(c.length()));
  }
  return h;
}

// A channel X -> Y achieving the equivocation bound of the confusion matrix
// it was built from. p_hat has one entry per decode outcome (zeros kept);
// fibers exist only for outcomes with positive probability.
struct AchievingChannel {
  int n = 0;
  std::vector<double> p_hat;
  std::vector<Fiber> fibers;
};

inline AchievingChannel build_achieving_channel(const ConfusionMatrix& cm) {
  AchievingChannel ch;
  ch.n = cm.n;
  ch.p_hat = decode_profile(cm).p_hat;
  for (int xh = 0; xh < cm.n; ++xh) {
    if (ch.p_hat[xh] > 0.0) ch.fibers.push_back(minimize_fiber(cm, xh));
  }
  return ch;
}

// H(X | Y) of the constructed channel: fiber equivocations averaged under
// the decode marginal.
inline double channel_equivocation(const AchievingChannel& ch) {
  double h = 0.0;
  for (const auto& f : ch.fibers) h += ch.p_hat[f.xhat] * fiber_equivocation(f);
  return h;
}

// Joint (signal, decode) distribution the constructed channel induces when
// each output y is decoded to the fiber it belongs to. Flat columns spread
// p_hat * weight uniformly over their support.
inline ConfusionMatrix induced_confusion(const AchievingChannel& ch) {
  Matrix joint(ch.n, std::vector<double>(ch.n, 0.0));
  for (const auto& f : ch.fibers) {
    for (const auto& c : f.columns) {
      const double share = ch.p_hat[f.xhat] * c.weight / static_cast<double>(c.length());
      for (int x : c.support) joint[x][f.xhat] += share;
    }
  }
  return ConfusionMatrix{ch.n, joint};
}

// Explicit joint distribution over (signal, output) with one output per flat
// column, plus the decode map y -> xhat the construction realizes. Useful
// for cross-checking the bound against a direct H(X | Y) computation and for
// sampling.
struct DecodedChannel {
  Matrix joint;  // joint[x][y]
  std::vector<int> decode;
};

inline DecodedChannel achieving_joint(const AchievingChannel& ch) {
  std::size_t ny = 0;
  for (const auto& f : ch.fibers) ny += f.columns.size();
  DecodedChannel out;
  out.joint.assign(ch.n, std::vector<double>(ny, 0.0));
  out.decode.reserve(ny);
  std::size_t y = 0;
  for (const auto& f : ch.fibers) {
    for (const auto& c : f.columns) {
      const double share = ch.p_hat[f.xhat] * c.weight / static_cast<double>(c.length());
      for (int x : c.support) out.joint[x][y] = share;
      out.decode.push_back(f.xhat);
      ++y;
    }
  }
  return out;
}

}  // namespace equibound
