#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "equibound/bounds.hpp"
#include "equibound/channel.hpp"
#include "equibound/confusion.hpp"
#include "equibound/rng.hpp"

namespace equibound {

// A dense joint distribution over (signal, output), joint[x][y], together
// with the seed that produced it.
struct RandomChannel {
  int nx = 0;
  int ny = 0;
  Matrix joint;
  std::uint64_t seed = 0;
};

// Random joint distribution with iid uniform cell weights, normalized.
inline RandomChannel random_channel(int nx, int ny, std::uint64_t seed) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("channel dimensions must be positive");
  SplitMix64 rng(seed);
  Matrix joint(nx, std::vector<double>(ny));
  double total = 0.0;
  for (auto& row : joint) {
    for (auto& v : row) {
      v = rng.next_double();
      total += v;
    }
  }
  if (total <= 0.0) total = 1.0;
  for (auto& row : joint) {
    for (auto& v : row) v /= total;
  }
  return {nx, ny, joint, seed};
}

// Exact H(X | Y) in bits of a dense joint distribution.
inline double channel_conditional_entropy(const Matrix& joint) {
  if (joint.empty()) return 0.0;
  const std::size_t ny = joint[0].size();
  double h = 0.0;
  for (std::size_t y = 0; y < ny; ++y) {
    double colsum = 0.0;
    for (const auto& row : joint) colsum += row[y];
    if (colsum <= 0.0) continue;
    for (const auto& row : joint) {
      if (row[y] > 0.0) h -= row[y] * std::log2(row[y] / colsum);
    }
  }
  return h;
}

// Confusion matrix of the maximum a-posteriori decoder applied to a dense
// channel. Posterior ties resolve to the smallest signal index, exactly like
// the empirical decoder in the estimation pipeline.
inline ConfusionMatrix channel_confusion(const RandomChannel& ch) {
  Matrix conf(ch.nx, std::vector<double>(ch.nx, 0.0));
  for (int y = 0; y < ch.ny; ++y) {
    int best = 0;
    for (int x = 1; x < ch.nx; ++x) {
      if (ch.joint[x][y] > ch.joint[best][y]) best = x;
    }
    for (int x = 0; x < ch.nx; ++x) conf[x][best] += ch.joint[x][y];
  }
  return ConfusionMatrix{ch.nx, conf};
}

// Confusion matrix of an explicitly given decode map y -> xhat. Used to
// check constructed channels under the decoder they were built for, where a
// generic tie rule would pick a different (equally optimal) decoding.
inline ConfusionMatrix confusion_with_decoder(const Matrix& joint, const std::vector<int>& decode,
                                              int nx) {
  if (joint.size() != static_cast<std::size_t>(nx)) {
    throw std::invalid_argument("joint row count does not match the signal count");
  }
  const std::size_t ny = joint.empty() ? 0 : joint[0].size();
  if (decode.size() != ny) throw std::invalid_argument("decode map length does not match outputs");
  Matrix conf(nx, std::vector<double>(nx, 0.0));
  for (std::size_t y = 0; y < ny; ++y) {
    const int xh = decode[y];
    if (xh < 0 || xh >= nx) throw std::invalid_argument("decode map value out of range");
    for (int x = 0; x < nx; ++x) conf[x][xh] += joint[x][y];
  }
  return ConfusionMatrix{nx, conf};
}

namespace detail {

// Entropy of the mass-greedy distribution with top atom q: floor(1/q) atoms
// of size q plus one remainder. Among all distributions whose largest atom
// is q this one has the least entropy (it majorizes every other), so it is
// the right generator set for the envelope search below.
inline double greedy_profile_entropy(double q) {
  if (q >= 1.0) return 0.0;
  const long k = static_cast<long>(std::floor(1.0 / q + 1e-12));
  double r = 1.0 - static_cast<double>(k) * q;
  if (r < 1e-15) r = 0.0;
  double h = -static_cast<double>(k) * q * std::log2(q);
  if (r > 0.0) h -= r * std::log2(r);
  return h;
}

}  // namespace detail

// Least average posterior entropy compatible with an average top mass of
// p_max over an alphabet of n signals, found numerically and independently
// of the closed-form envelope. An output distribution may mix several
// posteriors whose top masses average to p_max, so the minimum is the lower
// convex envelope of the greedy single-posterior curve; in one dimension
// two-point mixtures suffice. Coarse grid, local refinement, then a compass
// polish down to ~1e-10.
inline double min_entropy_oracle(double p_max, int n) {
  if (n < 1) throw std::invalid_argument("alphabet size must be positive");
  if (!(p_max > 0.0) || p_max > 1.0 + 1e-12) {
    throw std::domain_error("top posterior mass must lie in (0, 1]");
  }
  const double lo = 1.0 / static_cast<double>(n);
  if (p_max < lo - 1e-9) {
    throw std::domain_error("top posterior mass below 1/n is impossible");
  }
  const double p = std::clamp(p_max, lo, 1.0);

  const auto mix = [&](double q1, double q2) {
    if (q1 - q2 < 1e-15) return detail::greedy_profile_entropy(p);
    const double lam = (p - q2) / (q1 - q2);
    return lam * detail::greedy_profile_entropy(q1) +
           (1.0 - lam) * detail::greedy_profile_entropy(q2);
  };

  double best = detail::greedy_profile_entropy(p);
  double bq1 = p, bq2 = p;

  const auto scan = [&](double lo1, double hi1, double lo2, double hi2, double step) {
    const int n1 = std::max(1, static_cast<int>(std::ceil((hi1 - lo1) / step)));
    const int n2 = std::max(1, static_cast<int>(std::ceil((hi2 - lo2) / step)));
    for (int i = 0; i <= n1; ++i) {
      const double q1 = lo1 + (hi1 - lo1) * static_cast<double>(i) / static_cast<double>(n1);
      for (int j = 0; j <= n2; ++j) {
        const double q2 = lo2 + (hi2 - lo2) * static_cast<double>(j) / static_cast<double>(n2);
        const double v = mix(q1, q2);
        if (v < best) {
          best = v;
          bq1 = q1;
          bq2 = q2;
        }
      }
    }
  };

  scan(p, 1.0, lo, p, 1e-3);
  scan(std::max(p, bq1 - 2e-3), std::min(1.0, bq1 + 2e-3), std::max(lo, bq2 - 2e-3),
       std::min(p, bq2 + 2e-3), 1e-5);

  for (double h = 1e-5; h > 1e-11; h *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      const double c1[] = {bq1 - h, bq1 + h, bq1, bq1};
      const double c2[] = {bq2, bq2, bq2 - h, bq2 + h};
      for (int k = 0; k < 4; ++k) {
        const double q1 = std::clamp(c1[k], p, 1.0);
        const double q2 = std::clamp(c2[k], lo, p);
        const double v = mix(q1, q2);
        if (v < best - 1e-16) {
          best = v;
          bq1 = q1;
          bq2 = q2;
          improved = true;
        }
      }
    }
  }
  return best;
}

struct StressViolation {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  double slack = 0.0;
};

struct StressReport {
  std::uint64_t trials = 0;
  int nx_max = 0;
  int ny_max = 0;
  std::uint64_t master_seed = 0;
  double min_slack = 0.0;
  std::vector<StressViolation> violations;
};

// Monte Carlo check that H(X | Y) >= equivocation_bound(confusion) on random
// channels. Every trial derives its own seed from the master seed, so any
// violation is replayable in isolation.
inline StressReport bound_stress_test(std::uint64_t trials, int nx_max, int ny_max,
                                      std::uint64_t master_seed) {
  if (trials < 1) throw std::invalid_argument("trial count must be positive");
  if (nx_max < 1 || ny_max < 1) throw std::invalid_argument("channel dimensions must be positive");
  StressReport report;
  report.trials = trials;
  report.nx_max = nx_max;
  report.ny_max = ny_max;
  report.master_seed = master_seed;
  report.min_slack = std::numeric_limits<double>::infinity();
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::uint64_t seed = sub_seed(master_seed, t);
    SplitMix64 pick(seed);
    const int nx = static_cast<int>(pick.next_in(1, static_cast<std::uint64_t>(nx_max)));
    const int ny = static_cast<int>(pick.next_in(1, static_cast<std::uint64_t>(ny_max)));
    const RandomChannel ch = random_channel(nx, ny, pick.next());
    const double hxy = channel_conditional_entropy(ch.joint);
    const double bound = equivocation_bound(channel_confusion(ch));
    const double slack = hxy - bound;
    report.min_slack = std::fmin(report.min_slack, slack);
    if (slack < -kEntryTol) report.violations.push_back({t, seed, slack});
  }
  return report;
}

// The worked family of joint matrices with per-decode error rates 0 on the
// first n - 1 outcomes and (n - 1)/(n + 1) on the last: signal x < n lands
// on its own decode or the last one with mass 1/(2n) each, signal n always
// on the last with mass 1/n. The per-decode bound is tight on it while the
// single-rate bound is strictly looser for n > 2.
inline ConfusionMatrix example_family(int n) {
  if (n < 2) throw std::invalid_argument("the example family needs n >= 2");
  Matrix joint(n, std::vector<double>(n, 0.0));
  const double half = 1.0 / (2.0 * static_cast<double>(n));
  for (int x = 0; x + 1 < n; ++x) {
    joint[x][x] = half;
    joint[x][n - 1] = half;
  }
  joint[n - 1][n - 1] = 1.0 / static_cast<double>(n);
  return ConfusionMatrix{n, joint};
}

struct ExperimentRow {
  int n = 0;
  double h_post = 0.0;     // exact H(X | Xhat) of the family member
  double bound_ours = 0.0; // per-decode bound
  double bound_kov = 0.0;  // single-rate bound
};

// Per-n comparison of the two bounds against the exact conditional entropy
// on the example family, in the order requested.
inline std::vector<ExperimentRow> family_bound_table(const std::vector<int>& n_values) {
  std::vector<ExperimentRow> rows;
  rows.reserve(n_values.size());
  for (int n : n_values) {
    const ConfusionMatrix cm = example_family(n);
    ExperimentRow row;
    row.n = n;
    row.h_post = entropies(cm).h_x_given_xhat;
    row.bound_ours = equivocation_bound(cm);
    row.bound_kov = kovalevsky_bound(cm);
    rows.push_back(row);
  }
  return rows;
}

// iid draws from a dense joint distribution, as labeled (x, y) records
// ("s<i>", "y<j>"). Inverse-CDF over the flattened cells; deterministic for
// a given seed.
inline std::vector<std::pair<std::string, std::string>> sample_records(const Matrix& joint,
                                                                       std::uint64_t count,
                                                                       std::uint64_t seed) {
  const std::size_t nx = joint.size();
  const std::size_t ny = nx ? joint[0].size() : 0;
  std::vector<double> cdf;
  cdf.reserve(nx * ny);
  double acc = 0.0;
  for (const auto& row : joint) {
    for (double v : row) {
      acc += v;
      cdf.push_back(acc);
    }
  }
  if (cdf.empty() || acc <= 0.0) throw std::invalid_argument("cannot sample an empty distribution");
  cdf.back() = 1.0;

  SplitMix64 rng(seed);
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double u = rng.next_double();
    const std::size_t cell =
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    const std::size_t idx = std::min(cell, nx * ny - 1);
    out.emplace_back("s" + std::to_string(idx / ny), "y" + std::to_string(idx % ny));
  }
  return out;
}

}  // namespace equibound
