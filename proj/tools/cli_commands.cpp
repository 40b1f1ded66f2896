// Copyright 2026 The unicap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "unicap/core_indices.hpp"
#include "unicap/error.hpp"
#include "unicap/estimator_analytics.hpp"
#include "unicap/montecarlo.hpp"
#include "unicap/nonnormal_indices.hpp"
#include "unicap/normality_screen.hpp"
#include "unicap/sample_io.hpp"

namespace unicap::cli {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::map<std::string, IndexParams>& named_indices() {
  static const std::map<std::string, IndexParams> table = {
      {"cp", index_params::kCp},       {"cpu", index_params::kCp},
      {"cpl", index_params::kCp},      {"cpk", index_params::kCpk},
      {"cpku", index_params::kCpk},    {"cpkl", index_params::kCpk},
      {"cpm", index_params::kCpm},     {"cpmu", index_params::kCpm},
      {"cpml", index_params::kCpm},    {"cpmk", index_params::kCpmk},
      {"cpmku", index_params::kCpmk},  {"cpmkl", index_params::kCpmk},
  };
  return table;
}

std::vector<std::string> index_names() {
  std::vector<std::string> names;
  for (const auto& [name, ip] : named_indices()) names.push_back(name);
  return names;
}

Variant parse_variant(const std::string& s) {
  return s == "n-1" ? Variant::DivNminus1 : Variant::DivN;
}

json header(const std::string& command) {
  return json{{"tool", "unicap"}, {"version", UNICAP_VERSION}, {"command", command}};
}

const char* side_name(Side s) { return s == Side::Upper ? "upper" : "lower"; }

json indices_json(const IndexReport& r, Side side) {
  const bool up = side == Side::Upper;
  return json{{up ? "cpu" : "cpl", r.cpu_or_cpl},
              {up ? "cpku" : "cpkl", r.cpk_side},
              {up ? "cpmu" : "cpml", r.cpm_side},
              {up ? "cpmku" : "cpmkl", r.cpmk_side}};
}

json report_json(const IndexReport& r, Side side) {
  return json{{"indices", indices_json(r, side)},
              {"alpha", r.alpha},
              {"delta", r.delta},
              {"a_star", r.a_star}};
}

// ---------------------------------------------------------------------------
// Shared flag groups.

struct OneSidedFlags {
  double upper = kNaN;
  double lower = kNaN;
  double target = kNaN;
  double k = 1.0;
  CLI::Option* upper_opt = nullptr;
  CLI::Option* lower_opt = nullptr;
  CLI::Option* k_opt = nullptr;
};

void add_limit_flags(CLI::App* cmd, OneSidedFlags& f, bool exclusive) {
  f.upper_opt = cmd->add_option("--upper", f.upper, "Upper specification limit U");
  f.lower_opt = cmd->add_option("--lower", f.lower, "Lower specification limit L");
  if (exclusive) f.upper_opt->excludes(f.lower_opt);
  cmd->add_option("--target", f.target, "Target value T")->required();
}

ToleranceSpec one_sided_spec(const OneSidedFlags& f, double k) {
  if (f.upper_opt->count() + f.lower_opt->count() != 1) {
    throw UsageError("exactly one of --upper or --lower is required");
  }
  auto spec = f.upper_opt->count() ? ToleranceSpec::upper(f.upper, f.target, k)
                                   : ToleranceSpec::lower(f.lower, f.target, k);
  spec.validate();
  return spec;
}

json spec_echo(const ToleranceSpec& t) {
  return json{{"side", side_name(t.side)}, {"limit", t.limit}, {"target", t.target}, {"k", t.k}};
}

struct SelectorFlags {
  std::string index;
  double u = 0.0;
  double v = 0.0;
  CLI::Option* index_opt = nullptr;
  CLI::Option* u_opt = nullptr;
  CLI::Option* v_opt = nullptr;
};

void add_selector_flags(CLI::App* cmd, SelectorFlags& f) {
  f.index_opt = cmd->add_option("--index", f.index, "Named index (cp, cpk, cpm, cpmk or a side form)")
                    ->check(CLI::IsMember(index_names()));
  f.u_opt = cmd->add_option("--u", f.u, "Family parameter u >= 0")->excludes(f.index_opt);
  f.v_opt = cmd->add_option("--v", f.v, "Family parameter v >= 0")->excludes(f.index_opt);
}

bool selector_given(const SelectorFlags& f) {
  return f.index_opt->count() + f.u_opt->count() + f.v_opt->count() > 0;
}

IndexParams selected_params(const SelectorFlags& f) {
  if (!selector_given(f)) throw UsageError("select an estimator with --index or --u/--v");
  IndexParams ip = f.index_opt->count() ? named_indices().at(f.index) : IndexParams{f.u, f.v};
  ip.validate();
  return ip;
}

/// Flags describing an estimator: sample size, process, tolerance and index.
struct ContextFlags {
  int n = 0;
  double mu = kNaN;
  double sigma = kNaN;
  OneSidedFlags limits;
  SelectorFlags selector;
  std::string variant = "n";
};

void add_context_flags(CLI::App* cmd, ContextFlags& f) {
  cmd->add_option("--n", f.n, "Sample size (>= 4)")->required();
  cmd->add_option("--mu", f.mu, "Process mean")->required();
  cmd->add_option("--sigma", f.sigma, "Process standard deviation")->required();
  add_limit_flags(cmd, f.limits, false);
  f.limits.k_opt = cmd->add_option("--k", f.limits.k, "Asymmetry ratio k >= 1 (one-sided only)");
  add_selector_flags(cmd, f.selector);
  cmd->add_option("--variant", f.variant, "Variance divisor: n or n-1")
      ->check(CLI::IsMember({"n", "n-1"}));
}

EstimatorContext build_context(const ContextFlags& f) {
  const ProcessParams process{f.mu, f.sigma};
  const Variant variant = parse_variant(f.variant);
  const auto& lim = f.limits;
  if (lim.upper_opt->count() && lim.lower_opt->count()) {
    if (lim.k_opt->count()) throw UsageError("--k applies only to one-sided tolerances");
    return EstimatorContext::asymmetric(f.n, process, BilateralSpec{lim.lower, lim.upper, lim.target},
                                        variant);
  }
  return EstimatorContext::unilateral(f.n, process, one_sided_spec(lim, lim.k), variant);
}

json context_echo(const ContextFlags& f, const EstimatorContext& ctx, IndexParams ip) {
  json j{{"n", f.n}, {"mu", f.mu}, {"sigma", f.sigma}, {"target", f.limits.target},
         {"variant", f.variant}, {"u", ip.u}, {"v", ip.v}};
  if (ctx.is_unilateral()) {
    j["side"] = side_name(ctx.tolerance().side);
    j["limit"] = ctx.tolerance().limit;
    j["k"] = ctx.tolerance().k;
  } else {
    j["upper"] = f.limits.upper;
    j["lower"] = f.limits.lower;
  }
  if (f.selector.index_opt->count()) j["index"] = f.selector.index;
  return j;
}

struct SampleStats {
  double mean;
  double variance;
};

SampleStats sample_stats(const std::vector<double>& xs, Variant variant) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, ss / (variant == Variant::DivN ? n : n - 1.0)};
}

std::vector<double> load_checked(const std::string& path, const std::string& column) {
  auto sample = load_sample(path, column);
  if (sample.size() < 4) {
    throw DomainError("need at least 4 observations, got " + std::to_string(sample.size()));
  }
  return sample;
}

/// Mean and standard deviation of the estimator from the moment series; used
/// to pick default plotting and histogram ranges.
std::pair<double, double> estimator_location(const EstimatorKernel& kernel) {
  const double m1 = series_moment(kernel, 1).value;
  const double m2 = series_moment(kernel, 2).value;
  return {m1, std::sqrt(std::max(m2 - m1 * m1, 0.0))};
}

// ---------------------------------------------------------------------------
// index

struct IndexFlags {
  OneSidedFlags limits;
  double mu = kNaN;
  double sigma = kNaN;
  double median = kNaN;
  double lp = kNaN;
  double up = kNaN;
  std::string data;
  std::string column;
  std::string variant = "n";
  SelectorFlags selector;
  bool legacy = false;
  bool clamp = false;
  CLI::Option* mu_opt = nullptr;
  CLI::Option* median_opt = nullptr;
  CLI::Option* lp_opt = nullptr;
  CLI::Option* up_opt = nullptr;
  CLI::Option* data_opt = nullptr;
};

void register_index(CLI::App& app, IndexFlags& f) {
  auto* cmd = app.add_subcommand("index", "Unilateral capability indices from parameters or data");
  add_limit_flags(cmd, f.limits, true);
  f.limits.k_opt = cmd->add_option("--k", f.limits.k, "Asymmetry ratio k >= 1");
  f.mu_opt = cmd->add_option("--mu", f.mu, "Process mean");
  auto* sigma = cmd->add_option("--sigma", f.sigma, "Process standard deviation");
  f.mu_opt->needs(sigma);
  sigma->needs(f.mu_opt);
  f.median_opt = cmd->add_option("--median", f.median, "Process median (percentile indices)");
  f.lp_opt = cmd->add_option("--lp", f.lp, "0.135% percentile L_p")->needs(f.median_opt);
  f.up_opt = cmd->add_option("--up", f.up, "99.865% percentile U_p")->needs(f.median_opt);
  f.data_opt = cmd->add_option("--data", f.data, "Sample file (mean and S from the data)")
                   ->check(CLI::ExistingFile);
  cmd->add_option("--column", f.column, "CSV column name")->needs(f.data_opt);
  cmd->add_option("--variant", f.variant, "Variance divisor for --data: n or n-1")
      ->check(CLI::IsMember({"n", "n-1"}));
  f.median_opt->excludes(f.mu_opt)->excludes(f.data_opt);
  f.mu_opt->excludes(f.data_opt);
  add_selector_flags(cmd, f.selector);
  cmd->add_flag("--legacy", f.legacy, "Also report legacy one-sided indices");
  cmd->add_flag("--clamp", f.clamp, "Floor negative indices at zero");
}

json cmd_index(const IndexFlags& f) {
  const ToleranceSpec spec = one_sided_spec(f.limits, f.limits.k);
  const Clamp clamp = f.clamp ? Clamp::ZeroFloor : Clamp::Raw;
  json params = spec_echo(spec);
  params["clamp"] = f.clamp;

  json report = header("index");
  const bool have_sel = selector_given(f.selector);

  if (f.median_opt->count()) {
    if (f.legacy) throw UsageError("--legacy needs --mu/--sigma or --data");
    const bool need_up = spec.side == Side::Upper;
    if (need_up ? !f.up_opt->count() : !f.lp_opt->count()) {
      throw UsageError(need_up ? "--up is required with --median on the upper side"
                               : "--lp is required with --median on the lower side");
    }
    const PercentileSummary ps{f.median, f.lp, f.up};
    params["median"] = f.median;
    if (f.lp_opt->count()) params["lp"] = f.lp;
    if (f.up_opt->count()) params["up"] = f.up;
    report["input"] = "percentiles";
    report.update(report_json(nonnormal_report(ps, spec, clamp), spec.side));
    if (have_sel) {
      const IndexParams ip = selected_params(f.selector);
      report["selected"] = {{"u", ip.u}, {"v", ip.v},
                            {"value", nonnormal_unilateral_index(ps, spec, ip, clamp)}};
    }
    report["parameters"] = params;
    return report;
  }

  ProcessParams process{f.mu, f.sigma};
  if (f.data_opt->count()) {
    const auto sample = load_checked(f.data, f.column);
    const auto stats = sample_stats(sample, parse_variant(f.variant));
    process = {stats.mean, std::sqrt(stats.variance)};
    params["data"] = f.data;
    if (!f.column.empty()) params["column"] = f.column;
    params["variant"] = f.variant;
    report["input"] = "sample";
    report["n"] = sample.size();
  } else if (f.mu_opt->count()) {
    report["input"] = "parameters";
  } else {
    throw UsageError("supply --mu/--sigma, --median with --lp/--up, or --data");
  }
  process.validate();
  params["mu"] = process.mu;
  params["sigma"] = process.sigma;
  report.update(report_json(unilateral_report(process, spec, clamp), spec.side));

  std::optional<IndexParams> selected;
  if (have_sel) {
    selected = selected_params(f.selector);
    report["selected"] = {{"u", selected->u}, {"v", selected->v},
                          {"value", unilateral_index(process, spec, *selected, clamp)}};
  }
  if (f.legacy) {
    LegacyOptions plain;
    if (f.clamp) plain.clamp = Clamp::ZeroFloor;
    json legacy{
        {"kane", legacy_index(process, spec, LegacyFamily::KaneCpu, plain)},
        {"kane_star", legacy_index(process, spec, LegacyFamily::KaneStar, plain)},
        {"chan_cpm_star", legacy_index(process, spec, LegacyFamily::ChanCpmStar, plain)},
        {"vannman_cpmk", legacy_index(process, spec, LegacyFamily::VannmanCpmkSide, plain)}};
    if (selected) {
      LegacyOptions with_params = plain;
      with_params.params = *selected;
      legacy["vannman_cpa"] = legacy_index(process, spec, LegacyFamily::VannmanCpa, with_params);
      legacy["vannman_cpv"] = legacy_index(process, spec, LegacyFamily::VannmanCpv, with_params);
    }
    report["legacy"] = legacy;
  }
  report["parameters"] = params;
  return report;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateFlags {
  OneSidedFlags limits;
  std::vector<double> ks;
  std::string data;
  std::string column;
  std::string variant = "n";
  std::string method = "shore";
  int bins = 0;
  bool force_nonnormal = false;
  bool force_normal = false;
  bool clamp = false;
};

void register_estimate(CLI::App& app, EstimateFlags& f) {
  auto* cmd = app.add_subcommand("estimate", "Screen a sample for normality and estimate indices");
  add_limit_flags(cmd, f.limits, true);
  cmd->add_option("--k", f.ks, "Asymmetry ratio k >= 1 (repeatable)")->delimiter(',');
  cmd->add_option("--data", f.data, "Sample file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--column", f.column, "CSV column name");
  cmd->add_option("--variant", f.variant, "Variance divisor on the normal path: n or n-1")
      ->check(CLI::IsMember({"n", "n-1"}));
  cmd->add_option("--method", f.method, "Percentile estimator: shore or empirical")
      ->check(CLI::IsMember({"shore", "empirical"}));
  cmd->add_option("--bins", f.bins, "Normality screen classes (0: ceil(sqrt(n)))")
      ->check(CLI::NonNegativeNumber);
  auto* nn = cmd->add_flag("--force-nonnormal", f.force_nonnormal,
                           "Use percentile indices regardless of the screen");
  auto* nm = cmd->add_flag("--force-normal", f.force_normal,
                           "Use normal-theory indices regardless of the screen");
  nn->excludes(nm);
  cmd->add_flag("--clamp", f.clamp, "Floor negative indices at zero");
}

json cmd_estimate(const EstimateFlags& f, std::ostream& err) {
  const std::vector<double> ks = f.ks.empty() ? std::vector<double>{1.0} : f.ks;
  const ToleranceSpec base = one_sided_spec(f.limits, ks.front());
  for (double k : ks) one_sided_spec(f.limits, k);
  const Clamp clamp = f.clamp ? Clamp::ZeroFloor : Clamp::Raw;
  const Variant variant = parse_variant(f.variant);

  const auto sample = load_checked(f.data, f.column);
  json report = header("estimate");
  report["n"] = sample.size();
  report["median"] = sample_median(sample);

  bool nonnormal = f.force_nonnormal;
  if (sample.size() >= 20) {
    const auto screen = chi_square_normality_test(sample, f.bins);
    report["screen"] = {{"statistic", screen.statistic}, {"dof", screen.dof},
                        {"p_value", screen.p_value}, {"classes", screen.bins_used},
                        {"inconclusive", screen.inconclusive},
                        {"rejects_normality", screen.rejects_normality()}};
    if (screen.inconclusive && !f.force_nonnormal && !f.force_normal) {
      err << "warning: normality screen inconclusive (" << screen.bins_used
          << " classes after merging); using the normal path, pass --force-nonnormal to override\n";
    }
    nonnormal = nonnormal || screen.rejects_normality();
  } else {
    report["screen"] = nullptr;
    if (!f.force_nonnormal && !f.force_normal) {
      err << "warning: fewer than 20 observations, normality screen skipped\n";
    }
  }
  if (f.force_normal) nonnormal = false;
  report["path"] = nonnormal ? "nonnormal" : "normal";

  json results = json::array();
  if (nonnormal) {
    const auto method =
        f.method == "empirical" ? PercentileMethod::Empirical : PercentileMethod::Shore;
    const PercentileSummary ps = summarize_sample(sample, method);
    if (method == PercentileMethod::Shore) {
      const ShoreFit fit = shore_fit(sample);
      report["shore"] = {{"a1", fit.a1}, {"b1", fit.b1}, {"a2", fit.a2}, {"b2", fit.b2}};
    }
    report["percentiles"] = {{"lower", ps.lower_pct}, {"upper", ps.upper_pct}};
    for (double k : ks) {
      json row = report_json(nonnormal_report(ps, one_sided_spec(f.limits, k), clamp), base.side);
      row["k"] = k;
      results.push_back(row);
    }
  } else {
    const auto stats = sample_stats(sample, variant);
    const ProcessParams process{stats.mean, std::sqrt(stats.variance)};
    report["mean"] = process.mu;
    report["sd"] = process.sigma;
    for (double k : ks) {
      json row =
          report_json(unilateral_report(process, one_sided_spec(f.limits, k), clamp), base.side);
      row["k"] = k;
      results.push_back(row);
    }
  }
  report["results"] = results;

  json params = spec_echo(base);
  params.erase("k");
  params["k"] = ks;
  params["data"] = f.data;
  if (!f.column.empty()) params["column"] = f.column;
  params["variant"] = f.variant;
  params["method"] = f.method;
  params["bins"] = f.bins;
  params["force_nonnormal"] = f.force_nonnormal;
  params["force_normal"] = f.force_normal;
  params["clamp"] = f.clamp;
  report["parameters"] = params;
  return report;
}

// ---------------------------------------------------------------------------
// shore-fit

struct ShoreFlags {
  std::string data;
  std::string column;
  std::vector<double> probs;
};

void register_shore(CLI::App& app, ShoreFlags& f) {
  auto* cmd = app.add_subcommand("shore-fit", "Fit the Shore quantile approximation to a sample");
  cmd->add_option("--data", f.data, "Sample file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--column", f.column, "CSV column name");
  cmd->add_option("--p", f.probs, "Extra probabilities to evaluate (repeatable)")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
}

json cmd_shore(const ShoreFlags& f) {
  const auto sample = load_checked(f.data, f.column);
  const ShoreFit fit = shore_fit(sample);
  json report = header("shore-fit");
  report["n"] = fit.n;
  report["median"] = fit.median;
  report["a1"] = fit.a1;
  report["b1"] = fit.b1;
  report["a2"] = fit.a2;
  report["b2"] = fit.b2;
  report["lower_pct"] = shore_quantile(fit, kLowerTailProbability);
  report["upper_pct"] = shore_quantile(fit, kUpperTailProbability);
  json q = json::array();
  for (double p : f.probs) q.push_back({{"p", p}, {"q", shore_quantile(fit, p)}});
  report["quantiles"] = q;
  report["parameters"] = {{"data", f.data}, {"column", f.column}, {"p", f.probs}};
  return report;
}

// ---------------------------------------------------------------------------
// density

struct DensityFlags {
  ContextFlags ctx;
  double from = kNaN;
  double to = kNaN;
  int points = 1001;
  std::string out;
  CLI::Option* from_opt = nullptr;
  CLI::Option* to_opt = nullptr;
};

void register_density(CLI::App& app, DensityFlags& f) {
  auto* cmd = app.add_subcommand("density", "Exact density of an estimator on a grid (CSV)");
  add_context_flags(cmd, f.ctx);
  f.from_opt = cmd->add_option("--from", f.from, "Grid start");
  f.to_opt = cmd->add_option("--to", f.to, "Grid end");
  cmd->add_option("--points", f.points, "Grid points (>= 2)")->check(CLI::Range(2, 1000000));
  cmd->add_option("--out", f.out, "Write the CSV here instead of stdout");
}

double trapezoid(const DensityCurve& c) {
  double s = 0.0;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    s += 0.5 * (c.points[i].f + c.points[i - 1].f) * (c.points[i].x - c.points[i - 1].x);
  }
  return s;
}

int cmd_density(const DensityFlags& f, std::ostream& out) {
  const auto ctx = build_context(f.ctx);
  const IndexParams ip = selected_params(f.ctx.selector);
  const auto kernel = make_kernel(ctx, ip);

  double lo = f.from;
  double hi = f.to;
  if (!f.from_opt->count() || !f.to_opt->count()) {
    const auto [m, s] = estimator_location(kernel);
    if (!f.from_opt->count()) lo = std::max(support_lower_bound(kernel), m - 8.0 * s);
    if (!f.to_opt->count()) hi = m + 12.0 * s;
  }
  const DensityCurve curve = density_curve(ctx, ip, lo, hi, f.points);

  const json params = context_echo(f.ctx, ctx, ip);
  std::ostringstream head;
  head << "unicap " << UNICAP_VERSION << " density\n" << "parameters=" << params.dump();

  if (f.out.empty()) {
    write_density_csv(out, curve, head.str());
    return kExitOk;
  }
  std::ofstream file(f.out);
  if (!file) throw ParseError("cannot write " + f.out);
  write_density_csv(file, curve, head.str());
  json report = header("density");
  report["parameters"] = params;
  report["out"] = f.out;
  report["from"] = lo;
  report["to"] = hi;
  report["points"] = f.points;
  report["trapezoid_mass"] = trapezoid(curve);
  out << report.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// moments

struct MomentFlags {
  ContextFlags ctx;
  std::vector<int> orders;
};

void register_moments(CLI::App& app, MomentFlags& f) {
  auto* cmd = app.add_subcommand("moments", "Exact raw moments of an estimator");
  add_context_flags(cmd, f.ctx);
  cmd->add_option("--r", f.orders, "Moment order (repeatable, default 1,2)")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
}

json cmd_moments(const MomentFlags& f) {
  const auto ctx = build_context(f.ctx);
  const IndexParams ip = selected_params(f.ctx.selector);
  const auto kernel = make_kernel(ctx, ip);
  const std::vector<int> orders = f.orders.empty() ? std::vector<int>{1, 2} : f.orders;

  json report = header("moments");
  json rows = json::array();
  std::map<int, double> values;
  for (int r : orders) {
    const SeriesMoment m = series_moment(kernel, r);
    values[r] = m.value;
    rows.push_back({{"r", r}, {"value", m.value}, {"terms", m.terms}});
  }
  report["moments"] = rows;
  if (values.count(1) && values.count(2)) {
    report["mean"] = values[1];
    report["variance"] = values[2] - values[1] * values[1];
  }
  if (ctx.is_unilateral() && ip.v == 0.0 && ip.u == 1.0) {
    const RawMoments cf = closed_form_cpku_moments(ctx);
    report["closed_form"] = {{"mean", cf.mean}, {"second_moment", cf.second_moment}};
  } else if (ctx.is_unilateral() && ip.v == 0.0 && ip.u == 0.0) {
    json cf;
    for (int r : orders) {
      if (r < ctx.n() - 1) cf[std::to_string(r)] = moments_cpu_hat(r, ctx);
    }
    report["closed_form"] = cf;
  }
  json params = context_echo(f.ctx, ctx, ip);
  params["r"] = orders;
  report["parameters"] = params;
  return report;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateFlags {
  ContextFlags ctx;
  std::size_t replications = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  int bins = 60;
  bool check = false;
};

void register_simulate(CLI::App& app, SimulateFlags& f) {
  auto* cmd = app.add_subcommand("simulate", "Monte Carlo run of an estimator");
  add_context_flags(cmd, f.ctx);
  cmd->add_option("--replications", f.replications, "Number of replications (>= 1000)");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--threads", f.threads, "Worker threads (0: all cores)");
  cmd->add_option("--bins", f.bins, "Histogram bins")->check(CLI::Range(1, 100000));
  cmd->add_flag("--check", f.check, "Compare against the exact moments and distribution");
}

json cmd_simulate(const SimulateFlags& f) {
  const auto ctx = build_context(f.ctx);
  const IndexParams ip = selected_params(f.ctx.selector);
  const auto kernel = make_kernel(ctx, ip);
  const auto [m, s] = estimator_location(kernel);
  const double lo = std::max(support_lower_bound(kernel), m - 6.0 * s);
  const double hi = m + 6.0 * s;

  SimConfig cfg{f.replications, f.seed, ctx, ip, HistogramSpec{lo, hi, f.bins}, f.threads};
  const SimResult res = simulate_estimator(cfg);

  json report = header("simulate");
  report["result"] = res;
  if (f.check) {
    const double m1 = series_moment(kernel, 1).value;
    const double m2 = series_moment(kernel, 2).value;
    const auto cdf = [&](double x) { return integrate_density(kernel, -kInf, x).value; };
    const Verdict verdict = compare_to_analytics(res, m1, m2, cdf);
    report["analytic"] = {{"mean", m1}, {"second_moment", m2}};
    report["verdict"] = verdict;
  }
  json params = context_echo(f.ctx, ctx, ip);
  params["replications"] = f.replications;
  params["seed"] = f.seed;
  params["bins"] = f.bins;
  params["check"] = f.check;
  report["parameters"] = params;
  return report;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Capability indices for one-sided tolerances", "unicap"};
  app.set_version_flag("--version", std::string("unicap ") + UNICAP_VERSION);
  app.require_subcommand(1);

  IndexFlags index_flags;
  EstimateFlags estimate_flags;
  ShoreFlags shore_flags;
  DensityFlags density_flags;
  MomentFlags moment_flags;
  SimulateFlags simulate_flags;
  register_index(app, index_flags);
  register_estimate(app, estimate_flags);
  register_shore(app, shore_flags);
  register_density(app, density_flags);
  register_moments(app, moment_flags);
  register_simulate(app, simulate_flags);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand("index")) {
      out << cmd_index(index_flags).dump(2) << '\n';
    } else if (app.got_subcommand("estimate")) {
      out << cmd_estimate(estimate_flags, err).dump(2) << '\n';
    } else if (app.got_subcommand("shore-fit")) {
      out << cmd_shore(shore_flags).dump(2) << '\n';
    } else if (app.got_subcommand("density")) {
      return cmd_density(density_flags, out);
    } else if (app.got_subcommand("moments")) {
      out << cmd_moments(moment_flags).dump(2) << '\n';
    } else if (app.got_subcommand("simulate")) {
      out << cmd_simulate(simulate_flags).dump(2) << '\n';
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n' << "Run with --help for more information.\n";
    return kExitUsage;
  } catch (const ConvergenceError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace unicap::cli
