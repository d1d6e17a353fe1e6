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

// Renyi DP of the clone pair and of shuffled binary randomized response,
// composition of RDP curves, conversion back to (eps, delta), and
// advanced composition as a baseline.

#ifndef SHUFFLE_DP_RENYI_H_
#define SHUFFLE_DP_RENYI_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_format.h"
#include "shuffle_dp/clones.h"
#include "shuffle_dp/closed_form.h"
#include "shuffle_dp/dist.h"
#include "shuffle_dp/log_sum.h"
#include "shuffle_dp/rr_lower.h"

namespace shuffle_dp {

using Provenance = BoundDirection;

struct RdpPoint {
  double alpha = 2.0;
  double eps = 0.0;
};

struct RdpCurve {
  std::vector<RdpPoint> points;
  Provenance provenance = Provenance::kUpper;
};

// {1.1, ..., 5.0} in steps of 0.1, then the integers up to 64, then powers
// of two up to 4096.
inline std::vector<double> DefaultAlphaGrid() {
  std::vector<double> grid;
  for (int k = 1; k <= 40; ++k) grid.push_back(1.0 + k / 10.0);
  for (int a = 6; a <= 64; ++a) grid.push_back(a);
  for (int a = 128; a <= 4096; a *= 2) grid.push_back(a);
  return grid;
}

struct RdpConfig {
  // Relative tolerance for skipping parts of the support whose certified
  // contribution is below rel_tol times the running total; 0 enumerates
  // everything.
  double rel_tol = 1e-12;
  // Width of blocks of C sharing one evaluation (at the block's smallest c).
  int64_t stride = 1;
};

inline RdpConfig DefaultRdpConfig(int64_t n) {
  RdpConfig cfg;
  cfg.stride = std::max<int64_t>(1, n / 5000);
  return cfg;
}

struct RdpValue {
  // Upper bound on the divergence, capped at eps0.
  double eps = 0.0;
  // Part of eps owed to skipped terms and striding.
  double slack = 0.0;
};

namespace internal {

inline absl::Status CheckAlpha(double alpha) {
  if (!(alpha > 1.0) || std::isinf(alpha)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("alpha must be finite and > 1, got %g", alpha));
  }
  return absl::OkStatus();
}

inline absl::Status CheckRdpConfig(const RdpConfig& cfg) {
  if (!(cfg.rel_tol >= 0.0 && cfg.rel_tol < 1.0)) {
    return absl::InvalidArgumentError("rel_tol must lie in [0, 1)");
  }
  if (cfg.stride < 1) return absl::InvalidArgumentError("stride must be >= 1");
  return absl::OkStatus();
}

// log sum_a P_c(a)^alpha Q_c(a)^(1-alpha) where P_c, Q_c are the clone pair
// conditioned on C = c. Written as Q_c(a) r(a)^alpha with r = P_c / Q_c,
// which is monotone in a, and Q_c = Bin(c, 1/2) + Bern(q) log-concave.
inline BoundedLogSumResult LogStripeRenyiMoment(const CloneInstance& inst,
                                                int64_t c, double alpha,
                                                double rel_tol) {
  const double lq = inst.log_q();
  const double l1q = inst.log_one_minus_q();
  auto log_a = [c](int64_t a) { return LogBinomPmfUnchecked(c, 0.5, a); };
  auto log_p = [&](int64_t a) {
    return LogAddExp(lq + log_a(a), l1q + log_a(a - 1));
  };
  auto log_q = [&](int64_t a) {
    return LogAddExp(l1q + log_a(a), lq + log_a(a - 1));
  };
  auto term = [&](int64_t a) {
    return alpha * log_p(a) + (1.0 - alpha) * log_q(a);
  };
  int64_t mode = std::clamp<int64_t>(c / 2, 0, c + 1);
  for (int64_t m = std::max<int64_t>(0, c / 2 - 1);
       m <= std::min<int64_t>(c + 1, c / 2 + 2); ++m) {
    if (log_q(m) > log_q(mode)) mode = m;
  }
  auto bound = [&](int64_t lo, int64_t hi) {
    const double max_q = log_q(std::clamp(mode, lo, hi));
    const double max_ratio =
        std::max(log_p(lo) - log_q(lo), log_p(hi) - log_q(hi));
    return max_q + alpha * max_ratio;
  };
  return BoundedLogSum(0, c + 1, term, bound, rel_tol,
                       {int64_t{0}, mode, c + 1});
}

}  // namespace internal

// max{D_alpha(P||Q), D_alpha(Q||P)} for the clone pair. The pair is mirror
// symmetric (a -> c + 1 - a swaps P and Q given C = c), so both directions
// coincide and one is computed.
//
// Blocks of C are visited outward from the mode of C. The conditional
// moment is nonincreasing in c, which bounds each block by its first
// element and the unvisited tails by the last evaluated moment (upper tail)
// or the moment at c = 0 (lower tail). `slack` is the gap to a matching
// lower estimate, so it is zero only for a full unit-stride enumeration.
inline absl::StatusOr<RdpValue> RdpClones(const CloneInstance& inst,
                                          double alpha, const RdpConfig& cfg) {
  if (auto s = internal::CheckAlpha(alpha); !s.ok()) return s;
  if (auto s = internal::CheckRdpConfig(cfg); !s.ok()) return s;
  if (inst.eps0() == 0.0) return RdpValue{};

  const int64_t last_c = inst.n() - 1;
  const double p = inst.p();
  const int64_t stride = cfg.stride;
  const int64_t num_blocks = last_c / stride + 1;
  const int64_t center = internal::BinomMode(last_c, p) / stride;
  const double log_tol =
      cfg.rel_tol > 0 ? std::log(cfg.rel_tol) : internal::kNegInf;

  // Per visited block: log Pr(C in block) and the moment at its first count.
  struct Block {
    int64_t t;
    double log_mass;
    internal::BoundedLogSumResult moment;
  };
  std::vector<Block> visited;
  internal::LogSumAccumulator running;  // drives the stopping rules only
  internal::LogSumAccumulator tails;

  auto add_block = [&](int64_t t) {
    const int64_t c_min = t * stride;
    const int64_t c_max = std::min(c_min + stride - 1, last_c);
    Block b{t, internal::LogBinomRangeMass(last_c, p, c_min, c_max),
            internal::LogStripeRenyiMoment(inst, c_min, alpha, cfg.rel_tol)};
    running.Add(b.log_mass + b.moment.LogUpper());
    visited.push_back(b);
    return b.moment.LogUpper();
  };

  // Upward from the center block.
  for (int64_t t = center; t < num_blocks; ++t) {
    const double log_m = add_block(t);
    const int64_t next_c = (t + 1) * stride;
    if (next_c > last_c) break;
    const double log_rest =
        internal::LogBinomRangeMass(last_c, p, next_c, last_c) + log_m;
    if (log_rest < running.LogSum() + log_tol) {
      tails.Add(log_rest);
      break;
    }
  }
  // Downward; the moment at c = 0 bounds every moment below.
  const double log_m0 =
      internal::LogStripeRenyiMoment(inst, 0, alpha, 0.0).log_exact;
  for (int64_t t = center - 1; t >= 0; --t) {
    const double log_rest =
        internal::LogBinomRangeMass(last_c, p, 0, (t + 1) * stride - 1) +
        log_m0;
    if (log_rest < running.LogSum() + log_tol) {
      tails.Add(log_rest);
      break;
    }
    add_block(t);
  }
  // Lower end: with unit stride each block is a single count and its
  // enumerated moment is a lower bound; otherwise the block is bounded below
  // by the moment at the next block's first count.
  std::sort(visited.begin(), visited.end(),
            [](const Block& a, const Block& b) { return a.t < b.t; });
  internal::LogSumAccumulator upper;
  internal::LogSumAccumulator lower;
  for (size_t i = 0; i < visited.size(); ++i) {
    upper.Add(visited[i].log_mass + visited[i].moment.LogUpper());
    if (stride == 1) {
      lower.Add(visited[i].log_mass + visited[i].moment.log_exact);
    } else if (i + 1 < visited.size()) {
      lower.Add(visited[i].log_mass + visited[i + 1].moment.log_exact);
    }
  }
  upper.Merge(tails);

  const double scale = 1.0 / (alpha - 1.0);
  const double lo = std::max(0.0, lower.LogSum() * scale);
  RdpValue out;
  out.eps = std::min(std::max(0.0, upper.LogSum() * scale), inst.eps0());
  out.slack = std::max(0.0, out.eps - std::min(lo, inst.eps0()));
  return out;
}

namespace internal {

// Makes a curve nondecreasing in alpha by taking suffix minima. Each value
// stays an upper bound because D_alpha <= D_beta <= eps(beta) for beta >= alpha.
inline void SuffixMinimum(std::vector<RdpPoint>& points) {
  for (size_t i = points.size(); i-- > 1;) {
    points[i - 1].eps = std::min(points[i - 1].eps, points[i].eps);
  }
}

inline absl::Status CheckAlphaGrid(std::span<const double> alphas) {
  if (alphas.empty()) return absl::InvalidArgumentError("alpha grid is empty");
  for (size_t i = 0; i < alphas.size(); ++i) {
    if (auto s = CheckAlpha(alphas[i]); !s.ok()) return s;
    if (i > 0 && !(alphas[i] > alphas[i - 1])) {
      return absl::InvalidArgumentError("alpha grid must be strictly increasing");
    }
  }
  return absl::OkStatus();
}

}  // namespace internal

// Upper-bound RDP curve of the clone pair over a strictly increasing grid.
// Provenance is exact only when nothing was skipped and stride is 1.
inline absl::StatusOr<RdpCurve> RdpCloneCurve(const CloneInstance& inst,
                                              std::span<const double> alphas,
                                              const RdpConfig& cfg) {
  if (auto s = internal::CheckAlphaGrid(alphas); !s.ok()) return s;
  RdpCurve curve;
  bool any_slack = cfg.stride > 1;
  for (double alpha : alphas) {
    absl::StatusOr<RdpValue> v = RdpClones(inst, alpha, cfg);
    if (!v.ok()) return v.status();
    any_slack = any_slack || v->slack > 0.0;
    curve.points.push_back({alpha, v->eps});
  }
  internal::SuffixMinimum(curve.points);
  curve.provenance = any_slack ? Provenance::kUpper : Provenance::kExact;
  return curve;
}

// max over both directions of D_alpha between the shuffled 2RR count
// distributions. With L = pmf1 / pmf0 (linear in c) the moments are
// sum pmf0 L^alpha and sum pmf0 L^(1 - alpha). Only enumerated terms are
// kept, so the value is a lower bound up to rounding.
inline absl::StatusOr<double> RdpLower2rr(int64_t n, double eps0,
                                          double alpha) {
  if (auto s = internal::CheckAlpha(alpha); !s.ok()) return s;
  absl::StatusOr<RrCountPair> pair = RrCountPair::Create(n, eps0);
  if (!pair.ok()) return pair.status();
  if (eps0 == 0.0) return 0.0;
  const int64_t mode = internal::BinomMode(n, pair->flip());
  double best = 0.0;
  for (double power : {alpha, 1.0 - alpha}) {
    auto term = [&](int64_t c) {
      return pair->LogPmf0(c) + power * std::log(pair->LikelihoodRatio(c));
    };
    auto bound = [&](int64_t lo, int64_t hi) {
      const double max_pmf = pair->LogPmf0(std::clamp(mode, lo, hi));
      return max_pmf + std::max(power * std::log(pair->LikelihoodRatio(lo)),
                                power * std::log(pair->LikelihoodRatio(hi)));
    };
    const internal::BoundedLogSumResult r =
        internal::BoundedLogSum(0, n, term, bound, 1e-17, {0, mode, n});
    best = std::max(best, r.log_exact / (alpha - 1.0));
  }
  return std::min(best, eps0);
}

inline absl::StatusOr<RdpCurve> RdpLower2rrCurve(
    int64_t n, double eps0, std::span<const double> alphas) {
  if (auto s = internal::CheckAlphaGrid(alphas); !s.ok()) return s;
  RdpCurve curve;
  curve.provenance = Provenance::kLower;
  for (double alpha : alphas) {
    absl::StatusOr<double> v = RdpLower2rr(n, eps0, alpha);
    if (!v.ok()) return v.status();
    curve.points.push_back({alpha, *v});
  }
  return curve;
}

// RDP composes additively at each order.
inline RdpCurve RdpCompose(const RdpCurve& curve, int64_t reps) {
  RdpCurve out = curve;
  for (RdpPoint& pt : out.points) pt.eps *= double(reps);
  return out;
}

// (eps, delta) guarantee implied by an RDP curve:
//   min_alpha eps(alpha) + ln((alpha-1)/alpha) - (ln delta + ln alpha)/(alpha-1).
inline absl::StatusOr<double> RdpToDp(const RdpCurve& curve, double delta) {
  if (curve.points.empty()) return absl::InvalidArgumentError("empty curve");
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1), got %g", delta));
  }
  double best = std::numeric_limits<double>::infinity();
  for (const RdpPoint& pt : curve.points) {
    const double a = pt.alpha;
    best = std::min(best, pt.eps + std::log1p(-1.0 / a) -
                              (std::log(delta) + std::log(a)) / (a - 1.0));
  }
  return std::max(0.0, best);
}

// Advanced composition of reps mechanisms, each (eps, delta_each)-DP:
//   min{ k eps,
//        k eps tanh(eps/2) + eps sqrt(2 k ln(1/delta_slack)),
//        k eps tanh(eps/2) + eps sqrt(2 k ln(e + sqrt(k) eps / delta_slack)) }
// with total delta 1 - (1 - delta_each)^k (1 - delta_slack).
inline absl::StatusOr<EpsDelta> AdvancedComposition(double eps,
                                                    double delta_each,
                                                    int64_t reps,
                                                    double delta_slack) {
  if (!(eps >= 0.0) || std::isinf(eps)) {
    return absl::InvalidArgumentError("eps must be finite and nonnegative");
  }
  if (!(delta_each >= 0.0 && delta_each < 1.0)) {
    return absl::InvalidArgumentError("per-round delta must lie in [0, 1)");
  }
  if (reps < 1) return absl::InvalidArgumentError("reps must be >= 1");
  if (!(delta_slack > 0.0 && delta_slack < 1.0)) {
    return absl::InvalidArgumentError("slack delta must lie in (0, 1)");
  }
  const double k = double(reps);
  const double drift = k * eps * std::tanh(0.5 * eps);
  const double basic = k * eps;
  const double second =
      drift + eps * std::sqrt(2.0 * k * std::log(1.0 / delta_slack));
  const double third =
      drift + eps * std::sqrt(2.0 * k *
                              std::log(std::exp(1.0) +
                                       std::sqrt(k) * eps / delta_slack));
  const double total_delta =
      -std::expm1(k * std::log1p(-delta_each) + std::log1p(-delta_slack));
  return EpsDelta{std::min({basic, second, third}), total_delta,
                  BoundDirection::kUpper};
}

// reps-fold composition of the shuffled mechanism through its RDP curve.
inline absl::StatusOr<EpsDelta> ComposeViaRdp(const CloneInstance& inst,
                                              int64_t reps, double delta_total,
                                              std::span<const double> alphas,
                                              const RdpConfig& cfg) {
  if (reps < 1) return absl::InvalidArgumentError("reps must be >= 1");
  absl::StatusOr<RdpCurve> curve = RdpCloneCurve(inst, alphas, cfg);
  if (!curve.ok()) return curve.status();
  absl::StatusOr<double> eps = RdpToDp(RdpCompose(*curve, reps), delta_total);
  if (!eps.ok()) return eps.status();
  return EpsDelta{std::min(*eps, double(reps) * inst.eps0()), delta_total,
                  BoundDirection::kUpper};
}

// reps-fold composition via advanced composition of the per-round numerical
// guarantee; per-round delta is delta_total / (2 reps) and the composition
// slack is delta_total / 2.
inline absl::StatusOr<EpsDelta> ComposeViaAdvanced(const CloneInstance& inst,
                                                   int64_t reps,
                                                   double delta_total,
                                                   const SearchConfig& cfg) {
  if (reps < 1) return absl::InvalidArgumentError("reps must be >= 1");
  if (!(delta_total > 0.0 && delta_total < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  const double per_round = delta_total / (2.0 * double(reps));
  absl::StatusOr<EpsSearchResult> round = EpsUpper(inst, per_round, cfg);
  if (!round.ok()) return round.status();
  return AdvancedComposition(round->eps, per_round, reps, delta_total / 2.0);
}

}  // namespace shuffle_dp

#endif  // SHUFFLE_DP_RENYI_H_
