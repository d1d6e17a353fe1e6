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

#ifndef SHUFFLE_DP_LOG_SUM_H_
#define SHUFFLE_DP_LOG_SUM_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace shuffle_dp {
namespace internal {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double LogAddExp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// Accumulates exp(x_i) for log-scale inputs x_i without overflow. The running
// sum is kept relative to the largest input seen so far.
class LogSumAccumulator {
 public:
  void Add(double log_value) {
    if (log_value == kNegInf || std::isnan(log_value)) return;
    if (log_value > max_) {
      scaled_ = scaled_ * std::exp(max_ - log_value) + 1.0;
      max_ = log_value;
    } else {
      scaled_ += std::exp(log_value - max_);
    }
  }

  void Merge(const LogSumAccumulator& other) {
    if (other.max_ == kNegInf) return;
    Add(other.max_ + std::log(other.scaled_));
  }

  double LogSum() const {
    return max_ == kNegInf ? kNegInf : max_ + std::log(scaled_);
  }

 private:
  double max_ = kNegInf;
  double scaled_ = 0.0;
};

// Neumaier-compensated summation of nonnegative linear-scale terms.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double Value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct BoundedLogSumResult {
  // log of the sum over every index that was evaluated term by term.
  double log_exact = kNegInf;
  // log of the certified bound on everything that was skipped.
  double log_skipped = kNegInf;

  double LogUpper() const { return LogAddExp(log_exact, log_skipped); }
};

// Sums exp(log_term(k)) over k in [lo, hi] by branch and bound. log_bound(l, h)
// must return an upper bound on max_{l<=k<=h} log_term(k). An interval is
// skipped, and its bound recorded, once (size * bound) falls below
// rel_tol times the running lower bound on the total. rel_tol == 0 disables
// skipping, so every term is evaluated. The seeds are indices expected to sit
// near the dominant terms; they only serve to establish the first lower bound.
template <typename TermFn, typename BoundFn>
BoundedLogSumResult BoundedLogSum(int64_t lo, int64_t hi, const TermFn& log_term,
                                  const BoundFn& log_bound, double rel_tol,
                                  std::initializer_list<int64_t> seeds) {
  constexpr int64_t kLeafSize = 16;
  BoundedLogSumResult result;
  if (hi < lo) return result;

  double floor = kNegInf;
  for (int64_t s : seeds) {
    if (s >= lo && s <= hi) floor = std::max(floor, log_term(s));
  }
  const double log_tol = rel_tol > 0 ? std::log(rel_tol) : kNegInf;

  LogSumAccumulator exact;
  LogSumAccumulator skipped;
  // Explicit stack; each entry is an inclusive interval.
  struct Interval {
    int64_t lo, hi;
  };
  Interval stack[128];
  int top = 0;
  stack[top++] = {lo, hi};
  while (top > 0) {
    const Interval iv = stack[--top];
    const int64_t size = iv.hi - iv.lo + 1;
    if (size <= kLeafSize || top >= 126) {
      for (int64_t k = iv.lo; k <= iv.hi; ++k) exact.Add(log_term(k));
      floor = std::max(floor, exact.LogSum());
      continue;
    }
    if (rel_tol > 0) {
      const double ub = log_bound(iv.lo, iv.hi) + std::log(double(size));
      if (ub < floor + log_tol) {
        skipped.Add(ub);
        continue;
      }
    }
    const int64_t mid = iv.lo + size / 2;
    stack[top++] = {mid, iv.hi};
    stack[top++] = {iv.lo, mid - 1};
  }
  result.log_exact = exact.LogSum();
  result.log_skipped = skipped.LogSum();
  return result;
}

}  // namespace internal
}  // namespace shuffle_dp

#endif  // SHUFFLE_DP_LOG_SUM_H_
