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

// Shuffled binary randomized response on the neighbouring pair
// X0 = (0, ..., 0), X1 = (1, 0, ..., 0). The server sees only the count of
// ones, so its privacy loss is the divergence between two count
// distributions, which is computed here directly. This gives lower bounds
// for every general amplification bound.

#ifndef SHUFFLE_DP_RR_LOWER_H_
#define SHUFFLE_DP_RR_LOWER_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_format.h"
#include "shuffle_dp/dist.h"
#include "shuffle_dp/log_sum.h"

namespace shuffle_dp {

// Count distributions of shuffled binary randomized response. Each report
// flips its bit with probability r = 1 / (e^eps0 + 1):
//   c0 ~ Bin(n, r),   c1 ~ Bin(n - 1, r) + Bern(1 - r).
class RrCountPair {
 public:
  static absl::StatusOr<RrCountPair> Create(int64_t n, double eps0) {
    if (n < 1) {
      return absl::InvalidArgumentError(
          absl::StrFormat("n must be at least 1, got %d", n));
    }
    if (!(eps0 >= 0.0) || !std::isfinite(eps0)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("eps0 must be finite and nonnegative, got %g", eps0));
    }
    return RrCountPair(n, eps0);
  }

  int64_t n() const { return n_; }
  double eps0() const { return eps0_; }
  // Flip probability 1 / (e^eps0 + 1).
  double flip() const { return flip_; }

  double LogPmf0(int64_t c) const {
    return internal::LogBinomPmfUnchecked(n_, flip_, c);
  }
  double LogPmf1(int64_t c) const {
    const double keep = internal::LogBinomPmfUnchecked(n_ - 1, flip_, c);
    const double shift = internal::LogBinomPmfUnchecked(n_ - 1, flip_, c - 1);
    return internal::LogAddExp(keep + log_flip_, shift + log_one_minus_flip_);
  }

  // pmf1(c) / pmf0(c) = e^-eps0 + (c / n) 2 sinh(eps0); linear in c.
  double LikelihoodRatio(int64_t c) const {
    return std::exp(-eps0_) + double(c) / double(n_) * 2.0 * std::sinh(eps0_);
  }

  // Dense pmfs over {0, ..., n}. Memory is linear in n.
  std::vector<double> Pmf0() const { return Tabulate(&RrCountPair::LogPmf0); }
  std::vector<double> Pmf1() const { return Tabulate(&RrCountPair::LogPmf1); }

 private:
  RrCountPair(int64_t n, double eps0)
      : n_(n),
        eps0_(eps0),
        flip_(1.0 / (std::exp(eps0) + 1.0)),
        log_flip_(-eps0 - std::log1p(std::exp(-eps0))),
        log_one_minus_flip_(-std::log1p(std::exp(-eps0))) {}

  std::vector<double> Tabulate(double (RrCountPair::*log_pmf)(int64_t)
                                   const) const {
    std::vector<double> out(n_ + 1);
    for (int64_t c = 0; c <= n_; ++c) out[c] = std::exp((this->*log_pmf)(c));
    return out;
  }

  int64_t n_;
  double eps0_;
  double flip_;
  double log_flip_;
  double log_one_minus_flip_;
};

// Natural log of a hockey-stick divergence. `log_value` sums the enumerated
// terms (a lower bound); terms skipped by the tail cutoff are bounded by
// exp(log_slack), so the true value lies in
// [exp(log_value), exp(log_value) + exp(log_slack)].
struct LogDivergence {
  double log_value = internal::kNegInf;
  double log_slack = internal::kNegInf;

  double LogUpper() const { return internal::LogAddExp(log_value, log_slack); }
};

namespace internal {

// Sums exp(log_term(c)) over [lo, hi] for a log-concave sequence. Walks out
// from `start` in both directions and stops once the geometric bound on the
// rest of a side falls below kRelTol of the running total; that bound goes
// into the slack.
template <typename LogTerm>
LogDivergence SumLogConcave(int64_t lo, int64_t hi, int64_t start,
                            const LogTerm& log_term) {
  constexpr double kLogRelTol = -39.1439465808987777;  // ln(1e-17)
  LogDivergence out;
  if (hi < lo) return out;
  start = std::clamp(start, lo, hi);
  LogSumAccumulator sum;
  LogSumAccumulator slack;
  const double first = log_term(start);
  sum.Add(first);
  for (int step : {-1, 1}) {
    double prev = first;
    for (int64_t c = start + step; c >= lo && c <= hi; c += step) {
      const double cur = log_term(c);
      if (cur == kNegInf) break;
      sum.Add(cur);
      const double log_ratio = cur - prev;
      prev = cur;
      if (log_ratio < 0.0) {
        // Remaining terms are at most cur * rho / (1 - rho) in total.
        const double log_rest = cur + log_ratio - std::log(-std::expm1(log_ratio));
        if (log_rest < sum.LogSum() + kLogRelTol) {
          slack.Add(log_rest);
          break;
        }
      }
    }
  }
  out.log_value = sum.LogSum();
  out.log_slack = slack.LogSum();
  return out;
}

}  // namespace internal

// Both one-sided divergences D_{e^eps}(c0 || c1) and D_{e^eps}(c1 || c0), in
// log space so that values far below the double range stay meaningful.
struct RrDivergencePair {
  LogDivergence zero_over_one;
  LogDivergence one_over_zero;

  // Larger of the two directions, comparing lower ends.
  LogDivergence Max() const {
    const bool first = zero_over_one.log_value >= one_over_zero.log_value;
    LogDivergence out = first ? zero_over_one : one_over_zero;
    out.log_slack = internal::LogAddExp(zero_over_one.log_slack,
                                        one_over_zero.log_slack);
    return out;
  }
};

inline RrDivergencePair RrLogDivergences(const RrCountPair& pair, double eps) {
  RrDivergencePair out;
  const double eps0 = pair.eps0();
  if (eps >= eps0 || eps0 == 0.0) return out;
  const double nd = double(pair.n());
  const double two_sinh = 2.0 * std::sinh(eps0);
  const double e = std::exp(eps);
  const int64_t mode = internal::BinomMode(pair.n(), pair.flip());

  // pmf0 - e^eps pmf1 = pmf0 (-expm1(eps - eps0) - (c/n) e^eps 2 sinh eps0),
  // positive for small c.
  const double head = -std::expm1(eps - eps0);
  const double slope0 = e * two_sinh / nd;
  const int64_t hi0 = std::min<int64_t>(
      pair.n(), static_cast<int64_t>(std::floor(head / slope0)) + 1);
  out.zero_over_one = internal::SumLogConcave(0, hi0, mode, [&](int64_t c) {
    const double f = head - double(c) * slope0;
    return f > 0.0 ? pair.LogPmf0(c) + std::log(f) : internal::kNegInf;
  });

  // pmf1 - e^eps pmf0 = pmf0 ((c/n) 2 sinh eps0 - e^-eps0 expm1(eps + eps0)),
  // positive for large c.
  const double offset = std::exp(-eps0) * std::expm1(eps + eps0);
  const double slope1 = two_sinh / nd;
  const int64_t lo1 = std::max<int64_t>(
      0, static_cast<int64_t>(std::floor(offset / slope1)) - 1);
  out.one_over_zero =
      internal::SumLogConcave(lo1, pair.n(), mode, [&](int64_t c) {
        const double f = double(c) * slope1 - offset;
        return f > 0.0 ? pair.LogPmf0(c) + std::log(f) : internal::kNegInf;
      });
  return out;
}

// log of max{D_{e^eps}(c0||c1), D_{e^eps}(c1||c0)}; see LogDivergence.
inline absl::StatusOr<LogDivergence> RrLogDeltaExact(int64_t n, double eps0,
                                                     double eps) {
  absl::StatusOr<RrCountPair> pair = RrCountPair::Create(n, eps0);
  if (!pair.ok()) return pair.status();
  if (!(eps >= 0.0) || std::isinf(eps)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eps must be finite and nonnegative, got %g", eps));
  }
  return RrLogDivergences(*pair, eps).Max();
}

// Linear-scale version of RrLogDeltaExact; reports the enumerated value.
inline absl::StatusOr<double> RrDeltaExact(int64_t n, double eps0,
                                           double eps) {
  absl::StatusOr<LogDivergence> d = RrLogDeltaExact(n, eps0, eps);
  if (!d.ok()) return d.status();
  return std::exp(d->log_value);
}

// Binary search on [0, eps0] that returns the left endpoint. The endpoint
// only moves right when the enumerated divergence (a lower bound on the
// true one) exceeds delta, so the result never overshoots the smallest eps
// at which this pair is (eps, delta)-indistinguishable.
inline absl::StatusOr<double> EpsLower2rrLog(int64_t n, double eps0,
                                             double log_delta,
                                             int iterations = 40) {
  absl::StatusOr<RrCountPair> pair = RrCountPair::Create(n, eps0);
  if (!pair.ok()) return pair.status();
  if (!(log_delta <= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("log delta must be <= 0, got %g", log_delta));
  }
  if (iterations < 0) {
    return absl::InvalidArgumentError("iterations must be nonnegative");
  }
  double left = 0.0;
  double right = eps0;
  for (int t = 0; t < iterations; ++t) {
    const double mid = 0.5 * (left + right);
    if (RrLogDivergences(*pair, mid).Max().log_value > log_delta) {
      left = mid;
    } else {
      right = mid;
    }
  }
  return left;
}

inline absl::StatusOr<double> EpsLower2rr(int64_t n, double eps0, double delta,
                                          int iterations = 40) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1], got %g", delta));
  }
  return EpsLower2rrLog(n, eps0, std::log(delta), iterations);
}

struct TailPoint {
  double log_delta = 0.0;
  double eps = 0.0;
};

// eps lower bounds along a strictly decreasing grid of ln(delta) values.
inline absl::StatusOr<std::vector<TailPoint>> TailSweepLog(
    int64_t n, double eps0, std::span<const double> log_delta_grid) {
  if (log_delta_grid.empty()) {
    return absl::InvalidArgumentError("delta grid is empty");
  }
  for (size_t i = 0; i < log_delta_grid.size(); ++i) {
    const double v = log_delta_grid[i];
    if (!(v < 0.0) || std::isinf(v)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("grid entry %d is not a log of a delta in (0, 1)", i));
    }
    if (i > 0 && !(v < log_delta_grid[i - 1])) {
      return absl::InvalidArgumentError("delta grid must be strictly decreasing");
    }
  }
  std::vector<TailPoint> out;
  out.reserve(log_delta_grid.size());
  for (double log_delta : log_delta_grid) {
    absl::StatusOr<double> eps = EpsLower2rrLog(n, eps0, log_delta);
    if (!eps.ok()) return eps.status();
    out.push_back({log_delta, *eps});
  }
  return out;
}

inline absl::StatusOr<std::vector<TailPoint>> TailSweep(
    int64_t n, double eps0, std::span<const double> delta_grid) {
  std::vector<double> logs;
  logs.reserve(delta_grid.size());
  for (double d : delta_grid) {
    if (!(d > 0.0 && d < 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("grid deltas must lie in (0, 1), got %g", d));
    }
    logs.push_back(std::log(d));
  }
  return TailSweepLog(n, eps0, logs);
}

// Evenly spaced ln(delta) grid from ln(delta_max) down to ln(delta_min).
inline std::vector<double> LogDeltaGrid(double log_delta_max,
                                        double log_delta_min, int points) {
  std::vector<double> grid;
  if (points == 1) return {log_delta_max};
  for (int i = 0; i < points; ++i) {
    grid.push_back(log_delta_max +
                   (log_delta_min - log_delta_max) * i / double(points - 1));
  }
  return grid;
}

}  // namespace shuffle_dp

#endif  // SHUFFLE_DP_RR_LOWER_H_
