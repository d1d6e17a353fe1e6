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

#include "shuffle_dp/rr_lower.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "boost/multiprecision/cpp_bin_float.hpp"
#include "gtest/gtest.h"
#include "shuffle_dp/clones.h"
#include "shuffle_dp/closed_form.h"

namespace shuffle_dp {
namespace {

using F = boost::multiprecision::cpp_bin_float_50;

// Count pmfs by convolving n Bernoulli reports one at a time.
std::pair<std::vector<F>, std::vector<F>> ConvolvedPmfs(int n, double eps0) {
  const F flip = 1 / (exp(F(eps0)) + 1);
  auto add = [](std::vector<F>& pmf, const F& one) {
    pmf.push_back(F(0));
    for (size_t c = pmf.size() - 1; c >= 1; --c) {
      pmf[c] = pmf[c] * (1 - one) + pmf[c - 1] * one;
    }
    pmf[0] *= (1 - one);
  };
  std::vector<F> pmf0{F(1)}, pmf1{F(1)};
  for (int i = 0; i < n; ++i) {
    add(pmf0, flip);
    add(pmf1, i == 0 ? 1 - flip : flip);
  }
  return {pmf0, pmf1};
}

double OracleRrDelta(int n, double eps0, double eps) {
  auto [pmf0, pmf1] = ConvolvedPmfs(n, eps0);
  const F e = exp(F(eps));
  F a = 0, b = 0;
  for (int c = 0; c <= n; ++c) {
    if (pmf0[c] > e * pmf1[c]) a += pmf0[c] - e * pmf1[c];
    if (pmf1[c] > e * pmf0[c]) b += pmf1[c] - e * pmf0[c];
  }
  return static_cast<double>(a > b ? a : b);
}

TEST(RrCountPairTest, MatchesConvolution) {
  for (int n : {1, 2, 5, 20}) {
    for (double eps0 : {0.0, 0.3, 1.0, 4.0}) {
      auto pair = *RrCountPair::Create(n, eps0);
      auto [ref0, ref1] = ConvolvedPmfs(n, eps0);
      const auto pmf0 = pair.Pmf0();
      const auto pmf1 = pair.Pmf1();
      ASSERT_EQ(pmf0.size(), size_t(n + 1));
      double s0 = 0, s1 = 0;
      for (int c = 0; c <= n; ++c) {
        EXPECT_NEAR(pmf0[c], static_cast<double>(ref0[c]), 1e-12);
        EXPECT_NEAR(pmf1[c], static_cast<double>(ref1[c]), 1e-12);
        s0 += pmf0[c];
        s1 += pmf1[c];
        if (pmf0[c] > 1e-300) {
          EXPECT_NEAR(pmf1[c] / pmf0[c], pair.LikelihoodRatio(c),
                      1e-12 * pair.LikelihoodRatio(c));
        }
      }
      EXPECT_NEAR(s0, 1.0, 1e-12);
      EXPECT_NEAR(s1, 1.0, 1e-12);
    }
  }
}

TEST(RrCountPairTest, RejectsBadArguments) {
  EXPECT_EQ(RrCountPair::Create(0, 1.0).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(RrCountPair::Create(5, -1.0).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(RrDeltaExactTest, HandValue) {
  EXPECT_NEAR(*RrDeltaExact(2, std::log(3.0), 0.0), 0.375, 1e-15);
}

TEST(RrDeltaExactTest, ZeroAtAndAboveEps0) {
  EXPECT_EQ(*RrDeltaExact(100, 1.0, 1.0), 0.0);
  EXPECT_EQ(*RrDeltaExact(100, 1.0, 2.0), 0.0);
  EXPECT_LT(*RrDeltaExact(100, 1e-9, 0.0), 1e-8);
}

TEST(RrDeltaExactTest, MatchesOracle) {
  for (int n : {1, 3, 20, 150}) {
    for (double eps0 : {0.2, 1.0, 3.0}) {
      for (double frac : {0.0, 0.25, 0.5, 0.9}) {
        const double eps = frac * eps0;
        EXPECT_NEAR(*RrDeltaExact(n, eps0, eps), OracleRrDelta(n, eps0, eps),
                    1e-14)
            << n << " " << eps0 << " " << eps;
      }
    }
  }
}

TEST(RrDeltaExactTest, DirectionsAgreeAtZero) {
  auto pair = *RrCountPair::Create(300, 1.5);
  const RrDivergencePair d = RrLogDivergences(pair, 0.0);
  EXPECT_NEAR(d.zero_over_one.log_value, d.one_over_zero.log_value, 1e-12);
}

TEST(RrDeltaExactTest, NonincreasingInEps) {
  double prev = 1.0;
  for (int i = 0; i <= 50; ++i) {
    const double v = *RrDeltaExact(5000, 2.0, 2.0 * i / 50);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(RrDeltaExactTest, LogDomainReachesFarTail) {
  // Around eps -> eps0 the divergence at n = 1e4, eps0 = 2 is far below the
  // smallest double but its log is still resolved.
  auto d = RrLogDeltaExact(10'000, 2.0, 1.99);
  ASSERT_TRUE(d.ok());
  EXPECT_TRUE(std::isfinite(d->log_value));
  EXPECT_LT(d->log_value, -800);
  EXPECT_LE(d->log_slack, d->log_value - 30);
}

TEST(EpsLower2rrTest, Basics) {
  EXPECT_EQ(*EpsLower2rr(10'000, 1.0, 1e-6, 0), 0.0);
  const double v = *EpsLower2rr(10'000, 1.0, 1e-6);
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 1.0);
  EXPECT_EQ(EpsLower2rr(10'000, 1.0, 0.0).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(EpsLower2rrTest, SandwichWithUpperBounds) {
  for (int64_t n : {1000, 10'000, 100'000}) {
    for (double eps0 : {0.1, 0.5, 1.0, 2.0, 4.0}) {
      const double delta = 1e-6;
      const double lower = *EpsLower2rr(n, eps0, delta);
      const auto inst = *CloneInstance::Create(n, eps0);
      const double upper = EpsUpper(inst, delta, DefaultSearchConfig(n))->eps;
      EXPECT_LE(lower, upper) << n << " " << eps0;
      EXPECT_LE(upper, eps0);
      if (auto cf = EpsClosedForm(n, eps0, delta); cf.ok()) {
        EXPECT_LE(upper, *cf);
      }
    }
  }
}

TEST(TailSweepTest, ShapeAndMonotonicity) {
  const std::vector<double> grid = {0.5, 1e-2, 1e-5, 1e-10, 1e-20, 1e-40};
  auto sweep = TailSweep(1000, 1.0, grid);
  ASSERT_TRUE(sweep.ok());
  ASSERT_EQ(sweep->size(), grid.size());
  EXPECT_LT((*sweep)[0].eps, 0.2);
  for (size_t i = 1; i < sweep->size(); ++i) {
    EXPECT_GE((*sweep)[i].eps, (*sweep)[i - 1].eps);
  }
}

TEST(TailSweepTest, RejectsBadGrid) {
  EXPECT_EQ(TailSweep(1000, 1.0, std::vector<double>{}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(TailSweep(1000, 1.0, std::vector<double>{1e-3, 1e-2}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(TailSweep(1000, 1.0, std::vector<double>{1e-3, 1e-3}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(TailSweep(1000, 1.0, std::vector<double>{1.5}).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(TailSweepTest, LogGridBeyondDoubleRange) {
  const std::vector<double> grid = LogDeltaGrid(-100, -2000, 5);
  EXPECT_EQ(grid.front(), -100);
  EXPECT_EQ(grid.back(), -2000);
  auto sweep = TailSweepLog(10'000, 2.0, grid);
  ASSERT_TRUE(sweep.ok());
  EXPECT_LT(sweep->front().eps, 2.0 * 0.999);
  EXPECT_GT(sweep->back().eps, 2.0 * 0.999);
}

}  // namespace
}  // namespace shuffle_dp
