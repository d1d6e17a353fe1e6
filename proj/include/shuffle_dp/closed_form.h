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

// Closed-form amplification bounds for shuffled local randomizers, the k-ary
// randomized response specialization, local-epsilon selection for frequency
// estimation, and the privacy accounting of shuffled noisy SGD.

#ifndef SHUFFLE_DP_CLOSED_FORM_H_
#define SHUFFLE_DP_CLOSED_FORM_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_format.h"

namespace shuffle_dp {

// Guarantee of a single local randomizer.
struct LocalPrivacy {
  double eps0 = 0.0;
  double delta0 = 0.0;
};

enum class BoundDirection { kUpper, kLower, kExact };

inline std::string_view BoundDirectionName(BoundDirection d) {
  switch (d) {
    case BoundDirection::kUpper:
      return "upper";
    case BoundDirection::kLower:
      return "lower";
    case BoundDirection::kExact:
      return "exact";
  }
  return "unknown";
}

struct EpsDelta {
  double eps = 0.0;
  double delta = 0.0;
  BoundDirection direction = BoundDirection::kUpper;
};

namespace internal {

inline absl::Status CheckN(int64_t n) {
  if (n < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("n must be at least 1, got %d", n));
  }
  return absl::OkStatus();
}

inline absl::Status CheckDelta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1], got %g", delta));
  }
  return absl::OkStatus();
}

inline absl::Status CheckEps0(double eps0, bool allow_zero) {
  if (!std::isfinite(eps0) || eps0 < 0.0 || (!allow_zero && eps0 == 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "eps0 must be finite and %s, got %g",
        allow_zero ? "nonnegative" : "positive", eps0));
  }
  return absl::OkStatus();
}

inline absl::Status CheckLocalPrivacy(const LocalPrivacy& lp) {
  if (auto s = CheckEps0(lp.eps0, /*allow_zero=*/false); !s.ok()) return s;
  if (!(lp.delta0 >= 0.0 && lp.delta0 < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta0 must lie in [0, 1), got %g", lp.delta0));
  }
  return absl::OkStatus();
}

}  // namespace internal

// Largest eps0 for which the closed-form bounds hold:
// ln(n / (16 ln(2 / delta))).
inline double MaxAdmissibleEps0(int64_t n, double delta) {
  return std::log(double(n) / (16.0 * std::log(2.0 / delta)));
}

inline absl::Status CheckApplicable(int64_t n, double eps0, double delta) {
  const double max_eps0 = MaxAdmissibleEps0(n, delta);
  if (!(eps0 <= max_eps0)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "closed-form bound needs eps0 <= ln(n / (16 ln(2/delta))) = %.6g for "
        "n=%d, delta=%g; got eps0=%g",
        max_eps0, n, delta, eps0));
  }
  return absl::OkStatus();
}

// Central epsilon after shuffling n reports from eps0-DP local randomizers:
//   ln(1 + (e^eps0 - 1)/(e^eps0 + 1) *
//          (8 sqrt(e^eps0 ln(4/delta)) / sqrt(n) + 8 e^eps0 / n)).
// Returns FailedPrecondition outside the admissible eps0 range.
inline absl::StatusOr<double> EpsClosedForm(int64_t n, double eps0,
                                            double delta) {
  if (auto s = internal::CheckN(n); !s.ok()) return s;
  if (auto s = internal::CheckEps0(eps0, /*allow_zero=*/true); !s.ok()) return s;
  if (auto s = internal::CheckDelta(delta); !s.ok()) return s;
  if (auto s = CheckApplicable(n, eps0, delta); !s.ok()) return s;
  const double e0 = std::exp(eps0);
  const double nd = double(n);
  const double prefactor = std::tanh(0.5 * eps0);
  const double inner = 8.0 * std::sqrt(e0 * std::log(4.0 / delta) / nd) +
                       8.0 * e0 / nd;
  return std::log1p(prefactor * inner);
}

// (eps0, delta0) local randomizers: eps from EpsClosedForm with total delta
// delta + (e^eps + 1)(1 + e^-eps0 / 2) n delta0, capped at 1.
inline absl::StatusOr<EpsDelta> ApproxDpBound(int64_t n, const LocalPrivacy& lp,
                                              double delta) {
  if (auto s = internal::CheckLocalPrivacy(lp); !s.ok()) return s;
  absl::StatusOr<double> eps = EpsClosedForm(n, lp.eps0, delta);
  if (!eps.ok()) return eps.status();
  const double extra = (std::exp(*eps) + 1.0) *
                       (1.0 + 0.5 * std::exp(-lp.eps0)) * double(n) * lp.delta0;
  return EpsDelta{*eps, std::min(1.0, delta + extra), BoundDirection::kUpper};
}

// Bound for any pair that splits as
//   P = (1-p) W + p q R0 + p (1-q) R1,  Q = (1-p) W + p (1-q) R0 + p q R1
// per report: ln(1 + q (4 sqrt(2 ln(4/delta)) / sqrt(p n) + 4 / (p n))).
// Requires p >= 8 ln(2/delta) / n.
inline absl::StatusOr<double> EpsGenericClones(int64_t n, double p, double q,
                                               double delta) {
  if (auto s = internal::CheckN(n); !s.ok()) return s;
  if (!(p > 0.0 && p <= 1.0 / 3.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("p must lie in (0, 1/3], got %g", p));
  }
  if (!(q >= 0.0 && q < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("q must lie in [0, 1), got %g", q));
  }
  if (auto s = internal::CheckDelta(delta); !s.ok()) return s;
  const double nd = double(n);
  const double min_p = 8.0 * std::log(2.0 / delta) / nd;
  if (!(p >= min_p)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "generic bound needs p >= 8 ln(2/delta) / n = %.6g; got p=%g", min_p,
        p));
  }
  const double pn = p * nd;
  return std::log1p(q * (4.0 * std::sqrt(2.0 * std::log(4.0 / delta) / pn) +
                         4.0 / pn));
}

// Shuffled k-ary randomized response:
//   ln(1 + (e^eps0 - 1) (4 sqrt(2 (k+1) ln(4/delta)) /
//                        sqrt((e^eps0 + k - 1) k n) + 4 (k+1) / (k n))).
inline absl::StatusOr<double> EpsKrr(int64_t n, int64_t k, double eps0,
                                     double delta) {
  if (auto s = internal::CheckN(n); !s.ok()) return s;
  if (k < 2) {
    return absl::InvalidArgumentError(
        absl::StrFormat("k must be at least 2, got %d", k));
  }
  if (auto s = internal::CheckEps0(eps0, /*allow_zero=*/true); !s.ok()) return s;
  if (auto s = internal::CheckDelta(delta); !s.ok()) return s;
  if (auto s = CheckApplicable(n, eps0, delta); !s.ok()) return s;
  const double nd = double(n);
  const double kd = double(k);
  const double e0 = std::exp(eps0);
  const double root = 4.0 * std::sqrt(2.0 * (kd + 1.0) * std::log(4.0 / delta) /
                                      ((e0 + kd - 1.0) * kd * nd));
  return std::log1p(std::expm1(eps0) * (root + 4.0 * (kd + 1.0) / (kd * nd)));
}

// Local epsilon to use for frequency estimation so that the shuffled
// protocol is (eps, delta)-DP:
//   eps sqrt(n) / (16 sqrt(ln(1/delta)))      if eps <= sqrt(ln(1/delta) / n),
//   ln(eps^2 n / (100 ln(1/delta)))           otherwise.
// The second branch is used as is; just above the threshold it is negative.
inline absl::StatusOr<double> Eps0ForFrequency(int64_t n, double eps,
                                               double delta) {
  if (auto s = internal::CheckN(n); !s.ok()) return s;
  if (!(eps > 0.0 && eps < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eps must lie in (0, 1), got %g", eps));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1), got %g", delta));
  }
  const double nd = double(n);
  const double log_inv_delta = -std::log(delta);
  if (eps <= std::sqrt(log_inv_delta / nd)) {
    return eps * std::sqrt(nd) / (16.0 * std::sqrt(log_inv_delta));
  }
  return std::log(eps * eps * nd / (100.0 * log_inv_delta));
}

struct SgdAccounting {
  EpsDelta guarantee;
  // Gaussian noise multiplier of the local randomizer.
  double sigma = 0.0;
};

// Shuffled noisy SGD where each client runs an (eps0, delta0)-DP Gaussian
// randomizer with sigma = (1 + sqrt(2 ln(1/delta0))) / eps0.
inline absl::StatusOr<SgdAccounting> SgdAccountingFor(int64_t n,
                                                      const LocalPrivacy& lp,
                                                      double delta) {
  if (!(lp.delta0 > 0.0 && lp.delta0 < 1.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Gaussian calibration needs delta0 in (0, 1), got %g", lp.delta0));
  }
  absl::StatusOr<EpsDelta> guarantee = ApproxDpBound(n, lp, delta);
  if (!guarantee.ok()) return guarantee.status();
  const double sigma =
      (1.0 + std::sqrt(2.0 * std::log(1.0 / lp.delta0))) / lp.eps0;
  return SgdAccounting{*guarantee, sigma};
}

}  // namespace shuffle_dp

#endif  // SHUFFLE_DP_CLOSED_FORM_H_
