// Copyright 2026 The Shuffle DP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Discrete-distribution primitives shared by every accounting routine:
// binomial pmf/cdf evaluated in log space and the pmf of the clone pair
// (count, C) produced by the shuffling reduction.

#ifndef SHUFFLE_DP_DIST_H_
#define SHUFFLE_DP_DIST_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_format.h"
#include "shuffle_dp/log_sum.h"

namespace shuffle_dp {

// Natural-log probability. exp(value) lies in [0, 1]; -inf encodes mass 0.
struct LogProb {
  double value = internal::kNegInf;

  double Prob() const { return std::exp(value); }
  bool IsZero() const { return value == internal::kNegInf; }
};

namespace internal {

// Error of Stirling's approximation to log(n!), i.e.
// log(n!) - (n + 1/2) log n + n - log(sqrt(2 pi)). Catherine Loader's
// expansion; small arguments come from a table built with lgamma.
inline double StirlingError(int64_t n) {
  static const std::array<double, 16> kTable = [] {
    std::array<double, 16> t{};
    const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
    t[0] = 0.0;
    for (int i = 1; i < 16; ++i) {
      const double x = i;
      t[i] = std::lgamma(x + 1.0) - (x + 0.5) * std::log(x) + x -
             half_log_two_pi;
    }
    return t;
  }();
  constexpr double kS0 = 1.0 / 12.0;
  constexpr double kS1 = 1.0 / 360.0;
  constexpr double kS2 = 1.0 / 1260.0;
  constexpr double kS3 = 1.0 / 1680.0;
  constexpr double kS4 = 1.0 / 1188.0;
  if (n < 16) return kTable[n];
  const double n1 = 1.0 / double(n);
  const double n2 = n1 * n1;
  if (n > 500) return (kS0 - kS1 * n2) * n1;
  if (n > 80) return (kS0 - (kS1 - kS2 * n2) * n2) * n1;
  if (n > 35) return (kS0 - (kS1 - (kS2 - kS3 * n2) * n2) * n2) * n1;
  return (kS0 - (kS1 - (kS2 - (kS3 - kS4 * n2) * n2) * n2) * n2) * n1;
}

// x log(x / np) + np - x, evaluated without cancellation when x ~ np.
inline double DevianceTerm(double x, double np) {
  if (std::abs(x - np) < 0.1 * (x + np)) {
    const double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2 * x * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

// Unchecked log Pr(Bin(n, prob) = k); prob must lie in [0, 1].
inline double LogBinomPmfUnchecked(int64_t n, double prob, int64_t k) {
  if (k < 0 || k > n) return kNegInf;
  if (prob == 0.0) return k == 0 ? 0.0 : kNegInf;
  if (prob == 1.0) return k == n ? 0.0 : kNegInf;
  if (k == 0) return double(n) * std::log1p(-prob);
  if (k == n) return double(n) * std::log(prob);
  const double nd = double(n);
  const double kd = double(k);
  const double lc = StirlingError(n) - StirlingError(k) - StirlingError(n - k) -
                    DevianceTerm(kd, nd * prob) -
                    DevianceTerm(nd - kd, nd * (1.0 - prob));
  return lc + 0.5 * std::log(nd / (2.0 * std::numbers::pi * kd * (nd - kd)));
}

inline int64_t BinomMode(int64_t n, double prob) {
  const double m = std::floor((double(n) + 1.0) * prob);
  return std::clamp<int64_t>(static_cast<int64_t>(m), 0, n);
}

// Sums w(k) = pmf(k)/pmf(start) outward from `start` over [lo, hi] using the
// ratio recurrence. Returns the scaled sum; terms beyond the point where the
// geometric tail bound drops below 1e-17 of the sum are dropped.
inline double ScaledRangeSum(int64_t n, double prob, int64_t lo, int64_t hi,
                             int64_t start) {
  constexpr double kRelTol = 1e-17;
  const double odds = prob / (1.0 - prob);
  CompensatedSum sum;
  sum.Add(1.0);
  // Downward: w(k-1) = w(k) * k / (n - k + 1) / odds.
  double w = 1.0;
  for (int64_t k = start; k > lo; --k) {
    const double ratio = double(k) / (double(n - k + 1) * odds);
    w *= ratio;
    if (w == 0.0) break;
    sum.Add(w);
    if (ratio < 1.0 && w * ratio / (1.0 - ratio) < kRelTol * sum.Value()) break;
  }
  w = 1.0;
  for (int64_t k = start; k < hi; ++k) {
    const double ratio = double(n - k) * odds / double(k + 1);
    w *= ratio;
    if (w == 0.0) break;
    sum.Add(w);
    if (ratio < 1.0 && w * ratio / (1.0 - ratio) < kRelTol * sum.Value()) break;
  }
  return sum.Value();
}

// log Pr(lo <= Bin(n, prob) <= hi); unchecked.
inline double LogBinomRangeMass(int64_t n, double prob, int64_t lo, int64_t hi) {
  lo = std::max<int64_t>(lo, 0);
  hi = std::min<int64_t>(hi, n);
  if (hi < lo) return kNegInf;
  if (prob == 0.0) return lo == 0 ? 0.0 : kNegInf;
  if (prob == 1.0) return hi == n ? 0.0 : kNegInf;
  if (lo == 0 && hi == n) return 0.0;
  const int64_t start = std::clamp(BinomMode(n, prob), lo, hi);
  const double log_start = LogBinomPmfUnchecked(n, prob, start);
  if (log_start == kNegInf) return kNegInf;
  return log_start + std::log(ScaledRangeSum(n, prob, lo, hi, start));
}

inline double BinomRangeMass(int64_t n, double prob, int64_t lo, int64_t hi) {
  return std::exp(LogBinomRangeMass(n, prob, lo, hi));
}

// Pr(Bin(n, prob) <= k) for integer k, summing whichever tail is lighter.
inline double BinomCdfUnchecked(int64_t n, double prob, int64_t k) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  if (k < BinomMode(n, prob)) return BinomRangeMass(n, prob, 0, k);
  return std::max(0.0, 1.0 - BinomRangeMass(n, prob, k + 1, n));
}

inline absl::Status CheckProbability(double prob) {
  if (!(prob >= 0.0 && prob <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("probability must lie in [0, 1], got %g", prob));
  }
  return absl::OkStatus();
}

}  // namespace internal

// log Pr(Bin(n, prob) = k). Mass outside 0 <= k <= n is zero.
inline absl::StatusOr<LogProb> LogBinomPmf(int64_t n, double prob, int64_t k) {
  if (n < 0) return absl::InvalidArgumentError("n must be nonnegative");
  if (auto s = internal::CheckProbability(prob); !s.ok()) return s;
  return LogProb{internal::LogBinomPmfUnchecked(n, prob, k)};
}

// Pr(Bin(n, prob) <= k). A non-integral threshold is taken at floor(k).
inline absl::StatusOr<double> BinomCdf(int64_t n, double prob, double k) {
  if (n < 0) return absl::InvalidArgumentError("n must be nonnegative");
  if (auto s = internal::CheckProbability(prob); !s.ok()) return s;
  if (std::isnan(k)) return absl::InvalidArgumentError("threshold is NaN");
  const double f = std::floor(k);
  if (f < 0) return 0.0;
  if (f >= double(n)) return 1.0;
  return internal::BinomCdfUnchecked(n, prob, static_cast<int64_t>(f));
}

// A shuffle deployment: n reports, each from an eps0-DP local randomizer.
// Each of the other n - 1 reports is a clone of one of the two distinguished
// outputs with probability p = exp(-eps0); the distinguished report follows
// its own input with probability q = exp(eps0) / (exp(eps0) + 1).
class CloneInstance {
 public:
  static absl::StatusOr<CloneInstance> Create(int64_t n, double eps0) {
    if (n < 1) {
      return absl::InvalidArgumentError(
          absl::StrFormat("n must be at least 1, got %d", n));
    }
    if (!(eps0 >= 0.0) || !std::isfinite(eps0)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("eps0 must be finite and nonnegative, got %g", eps0));
    }
    return CloneInstance(n, eps0);
  }

  int64_t n() const { return n_; }
  double eps0() const { return eps0_; }
  // Clone probability exp(-eps0).
  double p() const { return p_; }
  double q() const { return q_; }
  double one_minus_q() const { return one_minus_q_; }
  double log_q() const { return log_q_; }
  double log_one_minus_q() const { return log_one_minus_q_; }

 private:
  CloneInstance(int64_t n, double eps0)
      : n_(n),
        eps0_(eps0),
        p_(std::exp(-eps0)),
        q_(1.0 / (1.0 + std::exp(-eps0))),
        one_minus_q_(1.0 / (1.0 + std::exp(eps0))),
        log_q_(-std::log1p(std::exp(-eps0))),
        log_one_minus_q_(-eps0 - std::log1p(std::exp(-eps0))) {}

  int64_t n_;
  double eps0_;
  double p_;
  double q_;
  double one_minus_q_;
  double log_q_;
  double log_one_minus_q_;
};

enum class Side { kP, kQ };

// Pmf of the clone pair at (a, c): C ~ Bin(n-1, p), A ~ Bin(C, 1/2), and
//   P(a, c) = Pr(C=c) (q A_c(a) + (1-q) A_c(a-1)),
//   Q(a, c) = Pr(C=c) ((1-q) A_c(a) + q A_c(a-1)).
// Zero outside 0 <= c <= n-1, 0 <= a <= c+1.
inline LogProb CloneJointPmf(const CloneInstance& inst, int64_t a, int64_t c,
                             Side side) {
  if (c < 0 || c > inst.n() - 1 || a < 0 || a > c + 1) return LogProb{};
  const double log_c = internal::LogBinomPmfUnchecked(inst.n() - 1, inst.p(), c);
  const double log_a = internal::LogBinomPmfUnchecked(c, 0.5, a);
  const double log_a_shift = internal::LogBinomPmfUnchecked(c, 0.5, a - 1);
  const double w_same = side == Side::kP ? inst.log_q() : inst.log_one_minus_q();
  const double w_shift =
      side == Side::kP ? inst.log_one_minus_q() : inst.log_q();
  return LogProb{log_c + internal::LogAddExp(w_same + log_a, w_shift + log_a_shift)};
}

}  // namespace shuffle_dp

#endif  // SHUFFLE_DP_DIST_H_
