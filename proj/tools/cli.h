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

// Command-line front end. Run() is kept separate from main() so tests can
// drive it with in-memory streams.

#ifndef SHUFFLE_DP_TOOLS_CLI_H_
#define SHUFFLE_DP_TOOLS_CLI_H_

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "json.hpp"
#include "shuffle_dp/shuffle_dp.h"

namespace shuffle_dp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitApplicability = 3;
inline constexpr int kExitUsage = 64;

// Six significant digits, trailing zeros kept.
inline std::string Fmt(double v) { return absl::StrFormat("%#.6g", v); }

// Formats exp(log_value) with six significant digits even when it is far
// outside the double range.
inline std::string FmtFromLog(double log_value) {
  if (log_value == -std::numeric_limits<double>::infinity()) return Fmt(0.0);
  const double log10v = log_value / std::log(10.0);
  double exponent = std::floor(log10v);
  double mantissa = std::pow(10.0, log10v - exponent);
  // Rounding to six digits may carry into the next decade.
  if (std::stod(absl::StrFormat("%.5f", mantissa)) >= 10.0) {
    mantissa /= 10.0;
    exponent += 1.0;
  }
  return absl::StrFormat("%.5fe%+03d", mantissa, static_cast<int>(exponent));
}

inline int ExitCodeFor(const absl::Status& s) {
  switch (s.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kFailedPrecondition:
      return kExitApplicability;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
      return kExitDomain;
    default:
      return 1;
  }
}

inline absl::StatusOr<double> ParseReal(std::string_view name,
                                        std::string_view text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("--%s: cannot parse '%s' as a finite number", std::string(name),
                        std::string(text)));
  }
  return v;
}

// Accepts "1000000" as well as "1e6".
inline absl::StatusOr<int64_t> ParseCount(std::string_view name,
                                          std::string_view text) {
  absl::StatusOr<double> v = ParseReal(name, text);
  if (!v.ok()) return v.status();
  if (*v != std::floor(*v) || std::abs(*v) > 9e15) {
    return absl::InvalidArgumentError(
        absl::StrFormat("--%s: '%s' is not an integer", std::string(name), std::string(text)));
  }
  return static_cast<int64_t>(*v);
}

// Natural log of a positive decimal such as "1e-600", which does not fit a
// double; mantissa and exponent are read separately.
inline absl::StatusOr<double> ParseLogPositive(std::string_view name,
                                               std::string_view text) {
  const size_t e = text.find_first_of("eE");
  absl::StatusOr<double> mantissa = ParseReal(name, text.substr(0, e));
  if (!mantissa.ok()) return mantissa.status();
  double exponent = 0.0;
  if (e != std::string_view::npos) {
    absl::StatusOr<int64_t> x = ParseCount(name, text.substr(e + 1));
    if (!x.ok()) return x.status();
    exponent = double(*x);
  }
  if (!(*mantissa > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("--%s: '%s' must be positive", std::string(name), std::string(text)));
  }
  return std::log(*mantissa) + exponent * std::log(10.0);
}

inline absl::StatusOr<std::vector<double>> ParseRealList(std::string_view name,
                                                         std::string_view text) {
  std::vector<double> out;
  const std::vector<std::string> pieces =
      absl::StrSplit(std::string(text), ',', absl::SkipEmpty());
  for (const std::string& piece : pieces) {
    absl::StatusOr<double> v = ParseReal(name, piece);
    if (!v.ok()) return v.status();
    out.push_back(*v);
  }
  if (out.empty()) {
    return absl::InvalidArgumentError(absl::StrFormat("--%s is empty", std::string(name)));
  }
  return out;
}

// "start:stop:points", geometrically spaced, endpoints included.
inline absl::StatusOr<std::vector<double>> ParseLogRange(std::string_view name,
                                                         std::string_view text) {
  const std::vector<std::string> parts = absl::StrSplit(std::string(text), ':');
  if (parts.size() != 3) {
    return absl::InvalidArgumentError(
        absl::StrFormat("--%s: expected start:stop:points, got '%s'", std::string(name), std::string(text)));
  }
  absl::StatusOr<double> start = ParseReal(name, parts[0]);
  absl::StatusOr<double> stop = ParseReal(name, parts[1]);
  absl::StatusOr<int64_t> points = ParseCount(name, parts[2]);
  for (const absl::Status& s : {start.status(), stop.status(), points.status()}) {
    if (!s.ok()) return s;
  }
  if (!(*start > 0.0 && *stop > 0.0) || *points < 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "--%s: endpoints must be positive and points >= 1", std::string(name)));
  }
  std::vector<double> out;
  const double a = std::log(*start), b = std::log(*stop);
  for (int64_t i = 0; i < *points; ++i) {
    out.push_back(*points == 1 ? *start
                               : std::exp(a + (b - a) * i / double(*points - 1)));
  }
  out.front() = *start;
  out.back() = *points == 1 ? *start : *stop;
  return out;
}

// Raw flag values; everything is parsed after CLI11 so that malformed numbers
// map to the parameter-domain exit code rather than the usage one.
struct Flags {
  std::string n = "1e6";
  std::string eps0;
  std::string delta = "1e-6";
  std::string delta0 = "0";
  std::string method;
  std::string stride;
  std::string iters = "40";
  std::string k;
  std::string alpha;
  std::string alpha_grid;
  std::string tol = "1e-12";
  std::string reps = "1";
  std::string route = "rdp";
  std::string eps;
  std::string delta_min;
  std::string delta_max;
  std::string points = "50";
  // sweep
  std::string variable;
  std::string values;
  std::string range;
  std::string methods = "closed-form,numeric,lower-2rr";
  std::string format = "csv";
  std::string out_path;
  std::string jobs;
  bool monotone = false;
};

// Parsed parameters shared by the subcommands.
struct Params {
  int64_t n = 1'000'000;
  double eps0 = 0.0;
  double delta = 1e-6;
  double delta0 = 0.0;
  std::optional<int64_t> stride;
  int iters = 40;
  int64_t k = 2;
  int64_t reps = 1;
  double rdp_tol = 1e-12;
};

inline absl::Status ParseCommon(const Flags& f, Params& p) {
  absl::StatusOr<int64_t> n = ParseCount("n", f.n);
  if (!n.ok()) return n.status();
  p.n = *n;
  if (!f.eps0.empty()) {
    absl::StatusOr<double> eps0 = ParseReal("eps0", f.eps0);
    if (!eps0.ok()) return eps0.status();
    p.eps0 = *eps0;
  }
  absl::StatusOr<double> delta = ParseReal("delta", f.delta);
  if (!delta.ok()) return delta.status();
  p.delta = *delta;
  absl::StatusOr<double> delta0 = ParseReal("delta0", f.delta0);
  if (!delta0.ok()) return delta0.status();
  p.delta0 = *delta0;
  if (!f.stride.empty()) {
    absl::StatusOr<int64_t> stride = ParseCount("stride", f.stride);
    if (!stride.ok()) return stride.status();
    p.stride = *stride;
  }
  absl::StatusOr<int64_t> iters = ParseCount("iters", f.iters);
  if (!iters.ok()) return iters.status();
  if (*iters < 0 || *iters > 1000) {
    return absl::InvalidArgumentError("--iters must lie in [0, 1000]");
  }
  p.iters = static_cast<int>(*iters);
  if (!f.k.empty()) {
    absl::StatusOr<int64_t> k = ParseCount("k", f.k);
    if (!k.ok()) return k.status();
    p.k = *k;
  }
  absl::StatusOr<int64_t> reps = ParseCount("reps", f.reps);
  if (!reps.ok()) return reps.status();
  if (*reps < 1) return absl::InvalidArgumentError("--reps must be >= 1");
  p.reps = *reps;
  absl::StatusOr<double> tol = ParseReal("tol", f.tol);
  if (!tol.ok()) return tol.status();
  p.rdp_tol = *tol;
  return absl::OkStatus();
}

inline SearchConfig SearchConfigFor(const Params& p) {
  SearchConfig cfg = DefaultSearchConfig(p.n);
  if (p.stride) cfg.stride = *p.stride;
  cfg.iterations = p.iters;
  return cfg;
}

inline RdpConfig RdpConfigFor(const Params& p) {
  RdpConfig cfg = DefaultRdpConfig(p.n);
  if (p.stride) cfg.stride = *p.stride;
  cfg.rel_tol = p.rdp_tol;
  return cfg;
}

// One line of sweep output. Missing numbers are rendered empty in CSV and as
// null in JSON.
struct Row {
  std::string variable;
  std::string value;
  std::string method;
  std::optional<double> eps;
  std::optional<double> delta;
  std::string direction;
  std::string terminated;
};

inline Row NotApplicable(std::string reason) {
  Row r;
  r.direction = "n/a";
  r.terminated = std::move(reason);
  return r;
}

inline Row Upper(double eps, std::optional<double> delta,
                 std::string terminated = "complete") {
  return Row{"", "", "", eps, delta, "upper", std::move(terminated)};
}

// Evaluates one method at one parameter point. Applicability failures become
// n/a rows; parameter-domain failures are returned as errors.
inline absl::StatusOr<Row> EvaluateMethod(std::string_view method,
                                          const Params& p,
                                          std::optional<double> alpha) {
  auto composed = [&](double eps, double per_round,
                      std::string terminated) -> absl::StatusOr<Row> {
    if (p.reps == 1) return Upper(eps, per_round, std::move(terminated));
    absl::StatusOr<EpsDelta> c =
        AdvancedComposition(eps, per_round, p.reps, p.delta / 2.0);
    if (!c.ok()) return c.status();
    return Upper(c->eps, c->delta, std::move(terminated));
  };
  // Per-round target when composing: delta / (2 reps) with delta / 2 slack.
  const double round_delta =
      p.reps == 1 ? p.delta : p.delta / (2.0 * double(p.reps));

  if (alpha) {
    if (method == "rdp") {
      absl::StatusOr<CloneInstance> inst = CloneInstance::Create(p.n, p.eps0);
      if (!inst.ok()) return inst.status();
      absl::StatusOr<RdpValue> v = RdpClones(*inst, *alpha, RdpConfigFor(p));
      if (!v.ok()) return v.status();
      Row r = Upper(double(p.reps) * v->eps, std::nullopt,
                    v->slack > 0 ? "upper-with-slack" : "complete");
      return r;
    }
    if (method == "lower-2rr") {
      absl::StatusOr<double> v = RdpLower2rr(p.n, p.eps0, *alpha);
      if (!v.ok()) return v.status();
      return Row{"", "", "", double(p.reps) * *v, std::nullopt, "lower",
                 "complete"};
    }
    return NotApplicable("not-an-rdp-method");
  }

  if (method == "closed-form") {
    absl::StatusOr<double> eps = EpsClosedForm(p.n, p.eps0, round_delta);
    if (eps.status().code() == absl::StatusCode::kFailedPrecondition) {
      return NotApplicable("inapplicable");
    }
    if (!eps.ok()) return eps.status();
    return composed(*eps, round_delta, "complete");
  }
  if (method == "approx-dp") {
    absl::StatusOr<EpsDelta> b =
        ApproxDpBound(p.n, LocalPrivacy{p.eps0, p.delta0}, round_delta);
    if (b.status().code() == absl::StatusCode::kFailedPrecondition) {
      return NotApplicable("inapplicable");
    }
    if (!b.ok()) return b.status();
    if (b->delta >= 1.0) return Upper(b->eps, 1.0, "vacuous");
    return composed(b->eps, b->delta, "complete");
  }
  if (method == "krr") {
    absl::StatusOr<double> eps = EpsKrr(p.n, p.k, p.eps0, round_delta);
    if (eps.status().code() == absl::StatusCode::kFailedPrecondition) {
      return NotApplicable("inapplicable");
    }
    if (!eps.ok()) return eps.status();
    return composed(*eps, round_delta, "complete");
  }
  if (method == "numeric") {
    absl::StatusOr<CloneInstance> inst = CloneInstance::Create(p.n, p.eps0);
    if (!inst.ok()) return inst.status();
    absl::StatusOr<EpsSearchResult> r =
        EpsUpper(*inst, round_delta, SearchConfigFor(p));
    if (!r.ok()) return r.status();
    return composed(r->eps, round_delta,
                    std::string(TerminationName(r->certificate.terminated)));
  }
  if (method == "lower-2rr") {
    if (p.reps > 1) return NotApplicable("no-composition-lower-bound");
    absl::StatusOr<double> eps = EpsLower2rr(p.n, p.eps0, p.delta, p.iters);
    if (!eps.ok()) return eps.status();
    return Row{"", "", "", *eps, p.delta, "lower", "complete"};
  }
  if (method == "rdp") {
    absl::StatusOr<CloneInstance> inst = CloneInstance::Create(p.n, p.eps0);
    if (!inst.ok()) return inst.status();
    if (!(p.delta > 0.0 && p.delta < 1.0)) {
      return absl::InvalidArgumentError("delta must lie in (0, 1)");
    }
    const std::vector<double> grid = DefaultAlphaGrid();
    absl::StatusOr<EpsDelta> c =
        ComposeViaRdp(*inst, p.reps, p.delta, grid, RdpConfigFor(p));
    if (!c.ok()) return c.status();
    return Upper(c->eps, c->delta);
  }
  return absl::InvalidArgumentError(
      absl::StrFormat("unknown method '%s'", std::string(method)));
}

inline constexpr std::string_view kSweepMethods[] = {
    "closed-form", "numeric", "krr", "lower-2rr", "rdp", "approx-dp"};
inline constexpr std::string_view kSweepVariables[] = {"n", "eps0", "delta",
                                                       "alpha", "reps"};

inline std::string FormatValue(std::string_view variable, double v) {
  if (variable == "n" || variable == "reps") {
    return absl::StrFormat("%d", static_cast<int64_t>(v));
  }
  return Fmt(v);
}

inline std::string CsvField(const std::optional<double>& v) {
  return v ? Fmt(*v) : std::string();
}

inline void WriteCsv(const std::vector<Row>& rows, std::ostream& out) {
  out << "variable,value,method,eps,delta,direction,terminated\n";
  for (const Row& r : rows) {
    out << r.variable << ',' << r.value << ',' << r.method << ','
        << CsvField(r.eps) << ',' << CsvField(r.delta) << ',' << r.direction
        << ',' << r.terminated << '\n';
  }
}

// Numbers go through the printed six-digit text so that re-parsing the JSON
// reproduces the CSV values exactly.
inline void WriteJson(const std::vector<Row>& rows, std::ostream& out) {
  auto number = [](const std::optional<double>& v) -> nlohmann::json {
    if (!v) return nullptr;
    return std::stod(Fmt(*v));
  };
  nlohmann::json doc;
  doc["rows"] = nlohmann::json::array();
  for (const Row& r : rows) {
    nlohmann::json value;
    if (r.variable == "n" || r.variable == "reps") {
      value = std::stoll(r.value);
    } else {
      value = std::stod(r.value);
    }
    doc["rows"].push_back({{"variable", r.variable},
                           {"value", value},
                           {"method", r.method},
                           {"eps", number(r.eps)},
                           {"delta", number(r.delta)},
                           {"direction", r.direction},
                           {"terminated", r.terminated}});
  }
  out << doc.dump(2) << '\n';
}

inline absl::StatusOr<int> JobCount(const std::string& flag) {
  std::string text = flag;
  if (text.empty()) {
    const char* env = std::getenv("SHUFFLE_DP_JOBS");
    if (env == nullptr || *env == '\0') return 1;
    text = env;
  }
  absl::StatusOr<int64_t> jobs = ParseCount("jobs", text);
  if (!jobs.ok()) return jobs.status();
  if (*jobs < 1 || *jobs > 1024) {
    return absl::InvalidArgumentError("--jobs must lie in [1, 1024]");
  }
  return static_cast<int>(*jobs);
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Returns the first
// error by index so that the reported failure does not depend on scheduling.
inline absl::Status ParallelFor(
    int64_t count, int jobs,
    const std::function<absl::Status(int64_t)>& fn) {
  std::vector<absl::Status> status(count);
  std::atomic<int64_t> next{0};
  auto worker = [&] {
    for (int64_t i = next++; i < count; i = next++) status[i] = fn(i);
  };
  std::vector<std::thread> pool;
  const int threads = static_cast<int>(std::min<int64_t>(jobs, count));
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();
  for (const absl::Status& s : status) {
    if (!s.ok()) return s;
  }
  return absl::OkStatus();
}

inline absl::Status RunSweep(const Flags& f, std::ostream& out) {
  Params base;
  if (auto s = ParseCommon(f, base); !s.ok()) return s;
  if (std::find(std::begin(kSweepVariables), std::end(kSweepVariables),
                f.variable) == std::end(kSweepVariables)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("--variable must be one of n, eps0, delta, alpha, "
                        "reps; got '%s'", f.variable));
  }
  if (f.values.empty() == f.range.empty()) {
    return absl::InvalidArgumentError(
        "exactly one of --values and --range is required");
  }
  absl::StatusOr<std::vector<double>> values =
      f.values.empty() ? ParseLogRange("range", f.range)
                       : ParseRealList("values", f.values);
  if (!values.ok()) return values.status();
  if (f.variable == "n" || f.variable == "reps") {
    for (double& v : *values) v = std::round(v);
  }
  const bool increasing = values->size() < 2 || (*values)[1] > (*values)[0];
  for (size_t i = 1; i < values->size(); ++i) {
    const bool up = (*values)[i] > (*values)[i - 1];
    const bool down = (*values)[i] < (*values)[i - 1];
    if (!(increasing ? up : down)) {
      return absl::InvalidArgumentError("sweep values must be strictly monotone");
    }
  }
  std::vector<std::string> methods;
  const std::vector<std::string> requested =
      absl::StrSplit(f.methods, ',', absl::SkipEmpty());
  for (const std::string& m : requested) {
    if (std::find(std::begin(kSweepMethods), std::end(kSweepMethods), m) ==
        std::end(kSweepMethods)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("unknown method '%s'", std::string(m)));
    }
    methods.emplace_back(m);
  }
  if (methods.empty()) return absl::InvalidArgumentError("--methods is empty");
  if (f.monotone && !(f.variable == "n" && increasing)) {
    return absl::InvalidArgumentError(
        "--monotone needs an increasing sweep over n");
  }
  absl::StatusOr<int> jobs = JobCount(f.jobs);
  if (!jobs.ok()) return jobs.status();

  const int64_t num_methods = static_cast<int64_t>(methods.size());
  std::vector<Row> rows(values->size() * methods.size());
  absl::Status status = ParallelFor(
      static_cast<int64_t>(rows.size()), *jobs, [&](int64_t i) -> absl::Status {
        const double v = (*values)[i / num_methods];
        const std::string& method = methods[i % num_methods];
        Params p = base;
        std::optional<double> alpha;
        if (f.variable == "n") p.n = static_cast<int64_t>(v);
        if (f.variable == "eps0") p.eps0 = v;
        if (f.variable == "delta") p.delta = v;
        if (f.variable == "reps") p.reps = static_cast<int64_t>(v);
        if (f.variable == "alpha") alpha = v;
        if (p.reps < 1) return absl::InvalidArgumentError("reps must be >= 1");
        absl::StatusOr<Row> row = EvaluateMethod(method, p, alpha);
        if (!row.ok()) return row.status();
        row->variable = f.variable;
        row->value = FormatValue(f.variable, v);
        row->method = method;
        rows[i] = std::move(*row);
        return absl::OkStatus();
      });
  if (!status.ok()) return status;

  if (f.monotone) {
    for (int64_t m = 0; m < num_methods; ++m) {
      if (methods[m] != "numeric") continue;
      std::vector<double> raw;
      for (size_t j = 0; j < values->size(); ++j) {
        raw.push_back(rows[j * num_methods + m].eps.value_or(INFINITY));
      }
      const std::vector<double> env = MonotoneEnvelope(raw);
      for (size_t j = 0; j < values->size(); ++j) {
        Row& r = rows[j * num_methods + m];
        if (r.eps) r.eps = env[j];
      }
    }
  }

  std::ofstream file;
  std::ostream* sink = &out;
  if (!f.out_path.empty()) {
    file.open(f.out_path);
    if (!file) {
      return absl::InvalidArgumentError(
          absl::StrFormat("cannot open '%s' for writing", f.out_path));
    }
    sink = &file;
  }
  if (f.format == "json") {
    WriteJson(rows, *sink);
  } else {
    WriteCsv(rows, *sink);
  }
  return absl::OkStatus();
}

inline absl::Status RunBound(const Flags& f, std::ostream& out) {
  Params p;
  if (auto s = ParseCommon(f, p); !s.ok()) return s;
  if (f.method == "numeric") {
    if (p.delta0 != 0.0) {
      return absl::InvalidArgumentError(
          "the numeric method takes pure local randomizers (delta0 = 0)");
    }
    absl::StatusOr<CloneInstance> inst = CloneInstance::Create(p.n, p.eps0);
    if (!inst.ok()) return inst.status();
    absl::StatusOr<EpsSearchResult> r =
        EpsUpper(*inst, p.delta, SearchConfigFor(p));
    if (!r.ok()) return r.status();
    out << "eps=" << Fmt(r->eps) << " direction=upper\n";
    return absl::OkStatus();
  }
  // closed-form; a positive delta0 switches to the approximate-DP bound.
  if (p.delta0 > 0.0) {
    absl::StatusOr<EpsDelta> b =
        ApproxDpBound(p.n, LocalPrivacy{p.eps0, p.delta0}, p.delta);
    if (!b.ok()) return b.status();
    out << "eps=" << Fmt(b->eps) << " delta=" << Fmt(b->delta)
        << " direction=upper\n";
    return absl::OkStatus();
  }
  absl::StatusOr<double> eps = EpsClosedForm(p.n, p.eps0, p.delta);
  if (!eps.ok()) return eps.status();
  out << "eps=" << Fmt(*eps) << " direction=upper\n";
  return absl::OkStatus();
}

inline absl::Status RunKrr(const Flags& f, std::ostream& out) {
  Params p;
  if (auto s = ParseCommon(f, p); !s.ok()) return s;
  absl::StatusOr<double> eps = EpsKrr(p.n, p.k, p.eps0, p.delta);
  if (!eps.ok()) return eps.status();
  out << "eps=" << Fmt(*eps) << " direction=upper\n";
  return absl::OkStatus();
}

inline absl::Status RunLower(const Flags& f, std::ostream& out) {
  Params p;
  if (auto s = ParseCommon(f, p); !s.ok()) return s;
  absl::StatusOr<double> eps = EpsLower2rr(p.n, p.eps0, p.delta, p.iters);
  if (!eps.ok()) return eps.status();
  out << "eps=" << Fmt(*eps) << " direction=lower\n";
  return absl::OkStatus();
}

inline absl::Status RunRdp(const Flags& f, std::ostream& out) {
  Params p;
  if (auto s = ParseCommon(f, p); !s.ok()) return s;
  if (f.alpha.empty() == f.alpha_grid.empty()) {
    return absl::InvalidArgumentError(
        "exactly one of --alpha and --alpha-grid is required");
  }
  std::vector<double> grid;
  if (!f.alpha.empty()) {
    absl::StatusOr<double> a = ParseReal("alpha", f.alpha);
    if (!a.ok()) return a.status();
    grid.push_back(*a);
  } else if (f.alpha_grid == "default") {
    grid = DefaultAlphaGrid();
  } else {
    absl::StatusOr<std::vector<double>> g = ParseRealList("alpha-grid", f.alpha_grid);
    if (!g.ok()) return g.status();
    grid = *g;
  }
  const bool lower = f.method == "lower-2rr";
  RdpCurve curve;
  if (lower) {
    absl::StatusOr<RdpCurve> c = RdpLower2rrCurve(p.n, p.eps0, grid);
    if (!c.ok()) return c.status();
    curve = *c;
  } else {
    absl::StatusOr<CloneInstance> inst = CloneInstance::Create(p.n, p.eps0);
    if (!inst.ok()) return inst.status();
    absl::StatusOr<RdpCurve> c = RdpCloneCurve(*inst, grid, RdpConfigFor(p));
    if (!c.ok()) return c.status();
    curve = *c;
  }
  const std::string provenance(BoundDirectionName(curve.provenance));
  if (!f.alpha.empty()) {
    out << "alpha=" << Fmt(curve.points[0].alpha)
        << " eps=" << Fmt(curve.points[0].eps) << " direction=" << provenance
        << '\n';
    return absl::OkStatus();
  }
  out << "alpha,eps,direction\n";
  for (const RdpPoint& pt : curve.points) {
    out << Fmt(pt.alpha) << ',' << Fmt(pt.eps) << ',' << provenance << '\n';
  }
  return absl::OkStatus();
}

inline absl::Status RunCompose(const Flags& f, std::ostream& out) {
  Params p;
  if (auto s = ParseCommon(f, p); !s.ok()) return s;
  absl::StatusOr<CloneInstance> inst = CloneInstance::Create(p.n, p.eps0);
  if (!inst.ok()) return inst.status();
  absl::StatusOr<EpsDelta> r;
  if (f.route == "rdp") {
    if (!(p.delta > 0.0 && p.delta < 1.0)) {
      return absl::InvalidArgumentError("delta must lie in (0, 1)");
    }
    r = ComposeViaRdp(*inst, p.reps, p.delta, DefaultAlphaGrid(),
                      RdpConfigFor(p));
  } else {
    r = ComposeViaAdvanced(*inst, p.reps, p.delta, SearchConfigFor(p));
  }
  if (!r.ok()) return r.status();
  out << "eps=" << Fmt(r->eps) << " delta=" << Fmt(r->delta)
      << " direction=upper route=" << f.route << '\n';
  return absl::OkStatus();
}

inline absl::Status RunTail(const Flags& f, std::ostream& out) {
  Params p;
  if (auto s = ParseCommon(f, p); !s.ok()) return s;
  if (f.delta_min.empty() || f.delta_max.empty()) {
    return absl::InvalidArgumentError("--delta-min and --delta-max are required");
  }
  absl::StatusOr<double> lo = ParseLogPositive("delta-min", f.delta_min);
  absl::StatusOr<double> hi = ParseLogPositive("delta-max", f.delta_max);
  absl::StatusOr<int64_t> points = ParseCount("points", f.points);
  for (const absl::Status& s : {lo.status(), hi.status(), points.status()}) {
    if (!s.ok()) return s;
  }
  if (!(*hi < 0.0) || !(*lo < *hi) || *points < 2 || *points > 100000) {
    return absl::InvalidArgumentError(
        "need delta-min < delta-max < 1 and 2 <= points <= 100000");
  }
  const std::vector<double> grid = LogDeltaGrid(*hi, *lo, static_cast<int>(*points));
  absl::StatusOr<std::vector<TailPoint>> sweep = TailSweepLog(p.n, p.eps0, grid);
  if (!sweep.ok()) return sweep.status();
  out << "delta,ln_delta,eps,direction\n";
  for (const TailPoint& pt : *sweep) {
    out << FmtFromLog(pt.log_delta) << ',' << Fmt(pt.log_delta) << ','
        << Fmt(pt.eps) << ",lower\n";
  }
  return absl::OkStatus();
}

inline absl::Status RunFreq(const Flags& f, std::ostream& out) {
  Params p;
  if (auto s = ParseCommon(f, p); !s.ok()) return s;
  absl::StatusOr<double> eps = ParseReal("eps", f.eps);
  if (!eps.ok()) return eps.status();
  absl::StatusOr<double> eps0 = Eps0ForFrequency(p.n, *eps, p.delta);
  if (!eps0.ok()) return eps0.status();
  out << "eps0=" << Fmt(*eps0) << '\n';
  return absl::OkStatus();
}

inline absl::Status RunSgd(const Flags& f, std::ostream& out) {
  Params p;
  if (auto s = ParseCommon(f, p); !s.ok()) return s;
  absl::StatusOr<SgdAccounting> r =
      SgdAccountingFor(p.n, LocalPrivacy{p.eps0, p.delta0}, p.delta);
  if (!r.ok()) return r.status();
  out << "eps=" << Fmt(r->guarantee.eps) << " delta=" << Fmt(r->guarantee.delta)
      << " sigma=" << Fmt(r->sigma) << " direction=upper\n";
  return absl::OkStatus();
}

inline int Run(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  Flags f;
  CLI::App app{"Privacy accounting for shuffled local randomizers", "shuffle_dp"};
  app.require_subcommand(1);
  auto common = [&f](CLI::App* sub) {
    sub->add_option("--n", f.n, "number of reports (default 1e6)");
    sub->add_option("--delta", f.delta, "target delta (default 1e-6)");
  };
  auto with_eps0 = [&f](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--eps0", f.eps0, "local epsilon");
    if (required) opt->required();
  };

  CLI::App* bound = app.add_subcommand("bound", "central epsilon upper bound");
  common(bound);
  with_eps0(bound, true);
  bound->add_option("--method", f.method, "closed-form | numeric")
      ->check(CLI::IsMember({"closed-form", "numeric"}))
      ->default_str("numeric");
  bound->add_option("--delta0", f.delta0, "local delta (closed-form only)");
  bound->add_option("--stride", f.stride, "block width for the numeric method");
  bound->add_option("--iters", f.iters, "binary-search iterations");

  CLI::App* krr = app.add_subcommand("krr", "k-ary randomized response bound");
  common(krr);
  with_eps0(krr, true);
  krr->add_option("--k", f.k, "alphabet size")->required();

  CLI::App* lower = app.add_subcommand("lower-2rr", "binary RR lower bound");
  common(lower);
  with_eps0(lower, true);
  lower->add_option("--iters", f.iters, "binary-search iterations");

  CLI::App* rdp = app.add_subcommand("rdp", "Renyi DP of one shuffle");
  rdp->add_option("--n", f.n, "number of reports (default 1e6)");
  with_eps0(rdp, true);
  rdp->add_option("--alpha", f.alpha, "single order");
  rdp->add_option("--alpha-grid", f.alpha_grid, "comma list or 'default'");
  rdp->add_option("--method", f.method, "clones | lower-2rr")
      ->check(CLI::IsMember({"clones", "lower-2rr"}));
  rdp->add_option("--stride", f.stride, "block width over the clone count");
  rdp->add_option("--tol", f.tol, "relative truncation tolerance (0 = none)");

  CLI::App* compose = app.add_subcommand("compose", "repeated shuffles");
  common(compose);
  with_eps0(compose, true);
  compose->add_option("--reps", f.reps, "number of rounds")->required();
  compose->add_option("--route", f.route, "rdp | advanced")
      ->check(CLI::IsMember({"rdp", "advanced"}));
  compose->add_option("--stride", f.stride, "block width");
  compose->add_option("--iters", f.iters, "binary-search iterations");

  CLI::App* sweep = app.add_subcommand("sweep", "grid of bounds as CSV/JSON");
  common(sweep);
  with_eps0(sweep, false);
  sweep->add_option("--variable", f.variable, "n | eps0 | delta | alpha | reps")
      ->required();
  sweep->add_option("--values", f.values, "comma-separated values");
  sweep->add_option("--range", f.range, "start:stop:points, log-spaced");
  sweep->add_option("--methods", f.methods,
                    "subset of closed-form,numeric,krr,lower-2rr,rdp,approx-dp");
  sweep->add_option("--delta0", f.delta0, "local delta for approx-dp");
  sweep->add_option("--k", f.k, "alphabet size for krr");
  sweep->add_option("--reps", f.reps, "rounds of composition");
  sweep->add_option("--stride", f.stride, "block width");
  sweep->add_option("--iters", f.iters, "binary-search iterations");
  sweep->add_option("--format", f.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  sweep->add_option("--out", f.out_path, "output file (default stdout)");
  sweep->add_option("--jobs", f.jobs, "worker threads (or SHUFFLE_DP_JOBS)");
  sweep->add_flag("--monotone", f.monotone,
                  "running minimum over n for the numeric method");

  CLI::App* tail = app.add_subcommand("tail", "lower bound across tiny deltas");
  tail->add_option("--n", f.n, "number of reports (default 1e6)");
  with_eps0(tail, true);
  tail->add_option("--delta-min", f.delta_min, "smallest delta, e.g. 1e-600")
      ->required();
  tail->add_option("--delta-max", f.delta_max, "largest delta")->required();
  tail->add_option("--points", f.points, "grid size (default 50)");

  CLI::App* freq = app.add_subcommand("freq-eps0", "local epsilon for frequency "
                                                   "estimation");
  common(freq);
  freq->add_option("--eps", f.eps, "target central epsilon")->required();

  CLI::App* sgd = app.add_subcommand("sgd", "shuffled noisy SGD accounting");
  common(sgd);
  with_eps0(sgd, true);
  sgd->add_option("--delta0", f.delta0, "local delta")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  absl::Status status;
  if (bound->parsed()) {
    if (f.method.empty()) f.method = "numeric";
    status = RunBound(f, out);
  } else if (krr->parsed()) {
    status = RunKrr(f, out);
  } else if (lower->parsed()) {
    status = RunLower(f, out);
  } else if (rdp->parsed()) {
    status = RunRdp(f, out);
  } else if (compose->parsed()) {
    status = RunCompose(f, out);
  } else if (sweep->parsed()) {
    status = RunSweep(f, out);
  } else if (tail->parsed()) {
    status = RunTail(f, out);
  } else if (freq->parsed()) {
    status = RunFreq(f, out);
  } else if (sgd->parsed()) {
    status = RunSgd(f, out);
  }
  if (!status.ok()) err << "error: " << status.message() << '\n';
  return ExitCodeFor(status);
}

}  // namespace shuffle_dp::cli

#endif  // SHUFFLE_DP_TOOLS_CLI_H_
