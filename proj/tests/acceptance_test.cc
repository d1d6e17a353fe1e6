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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "absl/strings/str_format.h"
#include "shuffle_dp/shuffle_dp.h"

namespace shuffle_dp {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void Fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

CloneInstance Inst(int64_t n, double eps0) {
  return *CloneInstance::Create(n, eps0);
}

// 1. Accumulator with unit stride against brute-force enumeration.
Outcome OracleEquivalence() {
  Outcome o;
  const auto start = Clock::now();
  double worst = 0.0;
  SearchConfig cfg;
  cfg.stride = 1;
  cfg.delta_budget = 1.0;
  for (int64_t n : {10, 50, 200}) {
    for (double eps0 : {0.1, 1.0, 3.0}) {
      for (double eps : {0.0, eps0 / 2}) {
        const double got = DeltaUpper(Inst(n, eps0), eps, cfg)->value;
        const double want = *DeltaExactSmall(Inst(n, eps0), eps);
        worst = std::max(worst, std::abs(got - want));
        if (!(std::abs(got - want) <= 1e-10)) {
          o.Fail(absl::StrFormat("n=%d eps0=%g eps=%g: %.17g vs %.17g", n,
                                 eps0, eps, got, want));
        }
      }
    }
  }
  const double secs = Seconds(start);
  if (secs >= 10.0) o.Fail(absl::StrFormat("took %.1fs", secs));
  if (o.pass) {
    o.detail = absl::StrFormat("18 points, max |diff| %.2g, %.2fs", worst, secs);
  }
  return o;
}

// 2. lower <= numeric upper <= min(closed form, eps0), strict where the
// closed form applies.
Outcome Sandwich() {
  Outcome o;
  const auto start = Clock::now();
  const double delta = 1e-6;
  std::vector<std::pair<int64_t, double>> points;
  for (double eps0 : {0.1, 6.0}) {
    for (int64_t n : {100'000, 300'000, 1'000'000, 3'000'000, 10'000'000}) {
      points.push_back({n, eps0});
    }
  }
  for (int i = 0; i < 8; ++i) {
    points.push_back({1'000'000, 0.01 * std::pow(800.0, i / 7.0)});
  }
  int strict = 0;
  for (auto [n, eps0] : points) {
    const double lower = *EpsLower2rr(n, eps0, delta);
    const double upper =
        EpsUpper(Inst(n, eps0), delta, DefaultSearchConfig(n))->eps;
    auto cf = EpsClosedForm(n, eps0, delta);
    const double cap = cf.ok() ? std::min(*cf, eps0) : eps0;
    if (!(lower <= upper && upper <= cap)) {
      o.Fail(absl::StrFormat("n=%d eps0=%g: lower %g upper %g cap %g", n, eps0,
                             lower, upper, cap));
    }
    if (cf.ok()) {
      ++strict;
      if (!(upper < *cf)) {
        o.Fail(absl::StrFormat("n=%d eps0=%g: upper %g not below closed form %g",
                               n, eps0, upper, *cf));
      }
    }
  }
  const double secs = Seconds(start);
  if (secs >= 300.0) o.Fail(absl::StrFormat("took %.1fs", secs));
  if (o.pass) {
    o.detail = absl::StrFormat("%d points (%d with closed form), %.2fs",
                               points.size(), strict, secs);
  }
  return o;
}

// 3. Closed-form values against a direct long double evaluation and the
// pinned figures.
Outcome ClosedFormValues() {
  Outcome o;
  auto direct = [](long double n, long double eps0, long double delta) {
    const long double e = std::exp(eps0);
    return std::log(1 + (e - 1) / (e + 1) *
                            (8 * std::sqrt(e * std::log(4 / delta)) / std::sqrt(n) +
                             8 * e / n));
  };
  const struct {
    double eps0, pinned;
  } cases[] = {{1.0, 0.023497}, {0.1, 0.0016373}};
  std::string detail;
  for (auto c : cases) {
    const double got = *EpsClosedForm(1'000'000, c.eps0, 1e-6);
    const double oracle = double(direct(1e6L, c.eps0, 1e-6L));
    if (!(std::abs(got - oracle) <= 1e-12)) {
      o.Fail(absl::StrFormat("eps0=%g: %.17g vs oracle %.17g", c.eps0, got,
                             oracle));
    }
    if (!(std::abs(got - c.pinned) <= 1e-6)) {
      o.Fail(absl::StrFormat("eps0=%g: %.10g not within 1e-6 of %g", c.eps0,
                             got, c.pinned));
    }
    detail += absl::StrFormat("eps0=%g -> %.10g; ", c.eps0, got);
  }
  if (o.pass) o.detail = detail;
  return o;
}

// 4. Stripe divergence strictly decreasing in c wherever positive.
Outcome StripeMonotonicity() {
  Outcome o;
  int positive = 0;
  for (auto [eps0, eps] :
       {std::pair{0.5, 0.25}, std::pair{1.0, 0.5}, std::pair{4.0, 2.0}}) {
    const auto inst = Inst(1000, eps0);
    for (Direction dir : {Direction::kPlus, Direction::kMinus}) {
      double prev = *StripeDivergence(0, eps, inst, dir);
      for (int64_t c = 1; c <= 500; ++c) {
        const double cur = *StripeDivergence(c, eps, inst, dir);
        if (cur > 0) {
          ++positive;
          if (!(cur < prev)) {
            o.Fail(absl::StrFormat("eps0=%g c=%d: %.17g !< %.17g", eps0, c,
                                   cur, prev));
          }
        }
        prev = cur;
      }
    }
  }
  if (o.pass) o.detail = absl::StrFormat("%d positive values checked", positive);
  return o;
}

// 5. Location of the tail transition relative to n e^-eps0 / 2.
Outcome TailTransition() {
  Outcome o;
  std::string detail;
  for (auto [n, eps0] : {std::pair<int64_t, double>{1000, 1.0},
                         std::pair<int64_t, double>{10'000, 2.0}}) {
    const double marker = double(n) * std::exp(-eps0) / 2.0;
    // ln(delta) from -1 down to -4 * marker.
    const std::vector<double> grid = LogDeltaGrid(-1.0, -4.0 * marker, 801);
    const auto sweep = *TailSweepLog(n, eps0, grid);
    const double target = (1.0 - 1e-3) * eps0;
    size_t star = sweep.size();
    for (size_t i = 0; i < sweep.size(); ++i) {
      if (sweep[i].eps >= target) {
        star = i;
        break;
      }
    }
    if (star == sweep.size()) {
      o.Fail(absl::StrFormat("n=%d: no transition on the grid", n));
      continue;
    }
    const double log_inv = -sweep[star].log_delta;
    const double ratio = log_inv / marker;
    if (!(ratio >= 0.5 && ratio <= 2.0)) {
      o.Fail(absl::StrFormat("n=%d eps0=%g: ln(1/delta*)=%g marker=%g", n,
                             eps0, log_inv, marker));
    }
    for (const TailPoint& pt : sweep) {
      if (pt.log_delta < sweep[star].log_delta - std::log(10.0) &&
          !(std::abs(pt.eps - eps0) <= 1e-3 * eps0)) {
        o.Fail(absl::StrFormat("n=%d: eps %g at ln delta %g", n, pt.eps,
                               pt.log_delta));
        break;
      }
    }
    detail += absl::StrFormat("n=%d eps0=%g ln(1/delta*)=%.1f marker=%.1f "
                              "ratio=%.2f; ",
                              n, eps0, log_inv, marker, ratio);
  }
  if (o.pass) o.detail = detail;
  return o;
}

// Renyi divergence of the clone pair by direct enumeration in log space,
// with its own Pascal-triangle pmfs.
double EnumeratedRdp(int64_t n, double eps0, double alpha) {
  using LD = long double;
  const LD p = std::exp(-(LD)eps0);
  const LD q = 1 / (1 + std::exp(-(LD)eps0));
  std::vector<LD> c_pmf(n, 0);
  c_pmf[0] = 1;
  for (int64_t step = 0; step < n - 1; ++step) {
    for (int64_t c = step + 1; c >= 1; --c) {
      c_pmf[c] = c_pmf[c] * (1 - p) + c_pmf[c - 1] * p;
    }
    c_pmf[0] *= (1 - p);
  }
  std::vector<LD> half{1};
  LD max_log[2] = {-INFINITY, -INFINITY};
  std::vector<LD> logs[2];
  for (int64_t c = 0; c < n; ++c) {
    if (c > 0) {
      std::vector<LD> next(c + 1, 0);
      for (int64_t a = 0; a <= c; ++a) {
        if (a < c) next[a] += half[a] / 2;
        if (a > 0) next[a] += half[a - 1] / 2;
      }
      half.swap(next);
    }
    auto at = [&](int64_t a) { return a < 0 || a > c ? LD(0) : half[a]; };
    for (int64_t a = 0; a <= c + 1; ++a) {
      const LD pv = std::log(c_pmf[c]) + std::log(q * at(a) + (1 - q) * at(a - 1));
      const LD qv = std::log(c_pmf[c]) + std::log((1 - q) * at(a) + q * at(a - 1));
      if (!std::isfinite(pv) || !std::isfinite(qv)) continue;
      const LD fw = alpha * pv + (1 - alpha) * qv;
      const LD bw = alpha * qv + (1 - alpha) * pv;
      logs[0].push_back(fw);
      logs[1].push_back(bw);
      max_log[0] = std::max(max_log[0], fw);
      max_log[1] = std::max(max_log[1], bw);
    }
  }
  LD best = -INFINITY;
  for (int d = 0; d < 2; ++d) {
    LD s = 0;
    for (LD v : logs[d]) s += std::exp(v - max_log[d]);
    best = std::max(best, (max_log[d] + std::log(s)) / (alpha - 1));
  }
  return double(best);
}

// 6. RDP curve properties and agreement with enumeration.
Outcome RdpProperties() {
  Outcome o;
  const double eps0 = 5.0;
  auto curve = *RdpCloneCurve(Inst(1000, eps0), DefaultAlphaGrid(), RdpConfig{});
  for (size_t i = 0; i < curve.points.size(); ++i) {
    if (!(curve.points[i].eps <= eps0)) o.Fail("value above eps0");
    if (i > 0 && !(curve.points[i].eps >= curve.points[i - 1].eps)) {
      o.Fail(absl::StrFormat("decreasing at alpha=%g", curve.points[i].alpha));
    }
  }
  const RdpPoint last = curve.points.back();
  if (!(last.alpha == 4096 && last.eps >= 0.99 * eps0)) {
    o.Fail(absl::StrFormat("eps(%g) = %g not within 1%% of %g", last.alpha,
                           last.eps, eps0));
  }
  double worst = 0.0;
  for (int64_t n : {10, 50, 200}) {
    for (double e0 : {0.1, 1.0, 5.0}) {
      for (double alpha : {1.5, 2.0, 4.0, 16.0, 256.0, 4096.0}) {
        const RdpValue v =
            *RdpClones(Inst(n, e0), alpha, RdpConfig{.rel_tol = 0, .stride = 1});
        const double want = std::min(EnumeratedRdp(n, e0, alpha), e0);
        worst = std::max(worst, std::abs(v.eps - want));
        if (!(std::abs(v.eps - want) <= 1e-9)) {
          o.Fail(absl::StrFormat("n=%d eps0=%g alpha=%g: %.17g vs %.17g", n,
                                 e0, alpha, v.eps, want));
        }
      }
    }
  }
  if (o.pass) {
    o.detail = absl::StrFormat("eps(4096)=%.6g for eps0=5; enumeration max "
                               "|diff| %.2g",
                               last.eps, worst);
  }
  return o;
}

// 7. RDP composition beats advanced composition at 1e4 rounds; at one round
// the approximate-DP route is no worse.
Outcome CompositionCrossover() {
  Outcome o;
  const auto start = Clock::now();
  const int64_t n = 1'000'000;
  const double delta = 1e-6;
  const auto inst = Inst(n, 1.0);
  const std::vector<double> grid = DefaultAlphaGrid();
  const RdpConfig rdp_cfg = DefaultRdpConfig(n);
  const SearchConfig search = DefaultSearchConfig(n);
  const double rdp_many = ComposeViaRdp(inst, 10'000, delta, grid, rdp_cfg)->eps;
  const double adv_many = ComposeViaAdvanced(inst, 10'000, delta, search)->eps;
  const double rdp_one = ComposeViaRdp(inst, 1, delta, grid, rdp_cfg)->eps;
  const double adv_one = ComposeViaAdvanced(inst, 1, delta, search)->eps;
  if (!(rdp_many < adv_many)) {
    o.Fail(absl::StrFormat("reps=1e4: rdp %g vs advanced %g", rdp_many, adv_many));
  }
  if (!(adv_one <= rdp_one)) {
    o.Fail(absl::StrFormat("reps=1: approx %g vs rdp %g", adv_one, rdp_one));
  }
  const double secs = Seconds(start);
  if (secs >= 120.0) o.Fail(absl::StrFormat("took %.1fs", secs));
  if (o.pass) {
    o.detail = absl::StrFormat("reps=1e4 rdp %.4g < adv %.4g; reps=1 approx "
                               "%.4g <= rdp %.4g; %.1fs",
                               rdp_many, adv_many, adv_one, rdp_one, secs);
  }
  return o;
}

// 8. k-RR bound strictly decreasing in k.
Outcome KrrDecreasing() {
  Outcome o;
  std::string detail;
  double prev = INFINITY;
  for (int64_t k : {8, 32, 128, 1024}) {
    const double v = *EpsKrr(1'000'000, k, 5.0, 1e-6);
    if (!(v < prev)) o.Fail(absl::StrFormat("k=%d: %g !< %g", k, v, prev));
    prev = v;
    detail += absl::StrFormat("k=%d:%.6g ", k, v);
  }
  if (o.pass) o.detail = detail;
  return o;
}

// 9. Numerical bound at n = 1e7 with defaults in under 10 seconds.
Outcome Performance() {
  Outcome o;
  const auto start = Clock::now();
  const auto inst = Inst(10'000'000, 6.0);
  const double eps =
      EpsUpper(inst, 1e-6, DefaultSearchConfig(inst.n()))->eps;
  const double secs = Seconds(start);
  if (!(secs < 10.0)) o.Fail(absl::StrFormat("took %.2fs", secs));
  if (!(eps > 0.0 && eps < 6.0)) o.Fail(absl::StrFormat("eps=%g", eps));
  if (o.pass) o.detail = absl::StrFormat("eps=%.6g in %.3fs", eps, secs);
  return o;
}

}  // namespace
}  // namespace shuffle_dp

int main() {
  using shuffle_dp::Outcome;
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"1 oracle-equivalence", shuffle_dp::OracleEquivalence},
      {"2 sandwich", shuffle_dp::Sandwich},
      {"3 closed-form-values", shuffle_dp::ClosedFormValues},
      {"4 stripe-monotonicity", shuffle_dp::StripeMonotonicity},
      {"5 tail-transition", shuffle_dp::TailTransition},
      {"6 rdp-properties", shuffle_dp::RdpProperties},
      {"7 composition-crossover", shuffle_dp::CompositionCrossover},
      {"8 krr-decreasing-in-k", shuffle_dp::KrrDecreasing},
      {"9 performance", shuffle_dp::Performance},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const Outcome o = check();
    std::printf("%s [%s] %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n",
              int(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
