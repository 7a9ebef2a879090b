#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "equibound/confusion.hpp"

namespace equibound {

// Relative guard used when deciding whether 1/(1 - eps) is an integer, i.e.
// whether eps sits exactly on a knot of the piecewise-linear envelope. The
// value is far below any knot spacing that matters here and far above the
// rounding noise of computing 1/(1 - eps).
inline constexpr double kKnotGuard = 1e-12;

// Shannon entropy in bits with the 0 log 0 = 0 convention.
inline double entropy_bits(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

// The two support sizes a flat posterior may take at error rate eps:
// low = floor(1/(1 - eps)), high = ceil(1/(1 - eps)). They coincide exactly
// when eps = (k - 1)/k for integer k.
struct AdmissibleLengths {
  long low = 1;
  long high = 1;
};

inline AdmissibleLengths admissible_lengths(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::domain_error("error rate must lie in [0, 1)");
  const double r = 1.0 / (1.0 - eps);
  const long low = static_cast<long>(std::floor(r + kKnotGuard));
  const bool integral = std::fabs(r - static_cast<double>(low)) <= kKnotGuard * r;
  return {low, integral ? low : low + 1};
}

// Weight carried by the shorter support length in the minimizing mixture:
// alpha = low * ((1 - eps) * high - 1). At eps = 0 the mixture is a single
// point mass and the weight is 1; at every other knot the two lengths
// coincide and all weight is reported on the (identical) longer term, so
// alpha is 0 there. Strictly between knots, 0 < alpha < 1.
inline double alpha_coeff(double eps) {
  const AdmissibleLengths len = admissible_lengths(eps);
  if (len.low == len.high) return len.low == 1 ? 1.0 : 0.0;
  const double raw =
      static_cast<double>(len.low) * ((1.0 - eps) * static_cast<double>(len.high) - 1.0);
  return std::clamp(raw, 0.0, 1.0);
}

// Smallest possible conditional entropy (in bits) of a posterior whose top
// mass is 1 - eps: the lower convex envelope of -log2(1 - eps), piecewise
// linear with phi*((k-1)/k) = log2(k).
inline double phi_star(double eps) {
  const AdmissibleLengths len = admissible_lengths(eps);
  if (len.low == len.high) return std::log2(static_cast<double>(len.low));
  const double a = alpha_coeff(eps);
  return a * std::log2(static_cast<double>(len.low)) +
         (1.0 - a) * std::log2(static_cast<double>(len.high));
}

// Per-decode equivocation bound: H(X | Y) >= sum_xhat p(xhat) phi*(eps_xhat)
// for any channel X -> Y whose MAP decoding produces this confusion matrix.
// Zero-mass decode outcomes contribute nothing.
inline double equivocation_bound(const ConfusionMatrix& cm) {
  const DecodeProfile prof = decode_profile(cm);
  double sum = 0.0;
  for (int xh = 0; xh < cm.n; ++xh) {
    if (!prof.zero_mass[xh]) sum += prof.p_hat[xh] * phi_star(prof.eps[xh]);
  }
  return sum;
}

// Single-error-rate bound phi*(eps) with eps the overall error probability.
// Always <= the per-decode bound (Jensen on the convex phi*).
inline double kovalevsky_bound(const ConfusionMatrix& cm) {
  double correct = 0.0;
  for (int x = 0; x < cm.n; ++x) correct += cm.joint[x][x];
  const double eps = std::clamp(1.0 - correct, 0.0, 1.0 - 1e-15);
  return phi_star(eps);
}

struct Entropies {
  double h_x = 0.0;
  double h_x_given_xhat = 0.0;
  double i_x_xhat = 0.0;
};

// Exact entropies of the joint (X, Xhat) distribution itself.
inline Entropies entropies(const ConfusionMatrix& cm) {
  Entropies out;
  for (int x = 0; x < cm.n; ++x) {
    double rsum = 0.0;
    for (int xh = 0; xh < cm.n; ++xh) rsum += cm.joint[x][xh];
    if (rsum > 0.0) out.h_x -= rsum * std::log2(rsum);
  }
  for (int xh = 0; xh < cm.n; ++xh) {
    double colsum = 0.0;
    for (int x = 0; x < cm.n; ++x) colsum += cm.joint[x][xh];
    if (colsum <= 0.0) continue;
    for (int x = 0; x < cm.n; ++x) {
      const double v = cm.joint[x][xh];
      if (v > 0.0) out.h_x_given_xhat -= v * std::log2(v / colsum);
    }
  }
  out.i_x_xhat = out.h_x - out.h_x_given_xhat;
  return out;
}

struct BoundReport {
  double h_x = 0.0;
  double h_x_given_xhat = 0.0;
  double i_x_xhat = 0.0;
  double bound_confusion = 0.0;   // sum_xhat p(xhat) phi*(eps_xhat)
  double bound_kovalevsky = 0.0;  // phi*(overall error rate)
  double overall_eps = 0.0;
  double mi_upper = 0.0;          // h_x - bound_confusion
};

inline BoundReport bound_report(const ConfusionMatrix& cm) {
  BoundReport r;
  const Entropies e = entropies(cm);
  r.h_x = e.h_x;
  r.h_x_given_xhat = e.h_x_given_xhat;
  r.i_x_xhat = e.i_x_xhat;
  r.bound_confusion = equivocation_bound(cm);
  r.bound_kovalevsky = kovalevsky_bound(cm);
  double correct = 0.0;
  for (int x = 0; x < cm.n; ++x) correct += cm.joint[x][x];
  r.overall_eps = std::fmax(0.0, 1.0 - correct);
  r.mi_upper = r.h_x - r.bound_confusion;
  return r;
}

}  // namespace equibound
