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

#include "unicap/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "unicap/error.hpp"
#include "unicap/special_functions.hpp"

namespace unicap {
namespace {

constexpr std::size_t kChunk = 4096;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

struct Sums {
  double s1 = 0.0;
  double s2 = 0.0;
  double s4 = 0.0;
};

struct ChunkOutput {
  std::vector<Sums> sums;                            // per target
  std::vector<std::vector<std::uint64_t>> counts;    // per target, per bin
};

std::size_t bin_index(double x, const HistogramSpec& h) {
  // 0: underflow, bins + 1: overflow.
  if (!(x >= h.lo)) return 0;
  if (x >= h.hi) return static_cast<std::size_t>(h.bins) + 1;
  const auto i = static_cast<std::size_t>((x - h.lo) / (h.hi - h.lo) * h.bins);
  return std::min(i, static_cast<std::size_t>(h.bins) - 1) + 1;
}

}  // namespace

double stream_uniform(std::uint64_t seed, std::uint64_t replication, std::uint64_t index) {
  const std::uint64_t key = mix64(seed ^ 0x243f6a8885a308d3ULL);
  const std::uint64_t stream = mix64(key + replication * 0xd1b54a32d192ed03ULL);
  const std::uint64_t bits = mix64(stream + (index + 1) * 0x9e3779b97f4a7c15ULL);
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double estimate_from_moments(double mean, double variance, const EstimatorContext& ctx,
                             IndexParams ip) {
  if (ctx.is_unilateral()) {
    const auto& t = ctx.tolerance();
    const double a = penalized_deviation(mean, t);
    return (t.reach() - ip.u * a) / (3.0 * std::sqrt(variance + ip.v * a * a));
  }
  const auto& b = ctx.bilateral();
  const double ds = b.min_reach();
  const double a_star =
      std::max(ds * (mean - b.target) / b.upper_reach(), ds * (b.target - mean) / b.lower_reach());
  const double a = b.half_width() * a_star / ds;
  return (ds - ip.u * a_star) / (3.0 * std::sqrt(variance + ip.v * a * a));
}

double estimate_from_sample(std::span<const double> sample, const EstimatorContext& ctx,
                            IndexParams ip) {
  const std::size_t n = sample.size();
  if (n < 2) throw DomainError("estimate_from_sample: need at least 2 observations");
  double mean = 0.0;
  for (double x : sample) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : sample) ss += (x - mean) * (x - mean);
  const double denom = ctx.variant() == Variant::DivN ? n : n - 1.0;
  return estimate_from_moments(mean, ss / denom, ctx, ip);
}

std::vector<SimResult> simulate_batch(std::span<const EstimatorTarget> targets,
                                      std::size_t replications, std::uint64_t seed,
                                      unsigned threads) {
  if (targets.empty()) return {};
  if (replications < 2) throw DomainError("simulate: need at least 2 replications");
  const auto& first = targets.front().ctx;
  const int n = first.n();
  const ProcessParams proc = first.process();
  for (const auto& t : targets) {
    t.ip.validate();
    if (t.ctx.n() != n || t.ctx.process().mu != proc.mu ||
        t.ctx.process().sigma != proc.sigma) {
      throw DomainError("simulate_batch: targets must share n, mu and sigma");
    }
    if (t.histogram && (t.histogram->bins < 1 || !(t.histogram->hi > t.histogram->lo))) {
      throw DomainError("simulate: invalid histogram spec");
    }
  }

  const std::size_t n_targets = targets.size();
  const std::size_t n_chunks = (replications + kChunk - 1) / kChunk;
  std::vector<ChunkOutput> chunks(n_chunks);

  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(replications, begin + kChunk);
    const std::size_t m = end - begin;
    std::vector<double> draws(n);
    std::vector<double> values(m * n_targets);
    ChunkOutput out;
    out.counts.resize(n_targets);
    for (std::size_t t = 0; t < n_targets; ++t) {
      if (targets[t].histogram) out.counts[t].assign(targets[t].histogram->bins + 2, 0);
    }
    for (std::size_t r = 0; r < m; ++r) {
      const std::uint64_t rep = begin + r;
      double mean = 0.0;
      for (int i = 0; i < n; ++i) {
        draws[i] = proc.mu + proc.sigma * normal_quantile(stream_uniform(seed, rep, i));
        mean += draws[i];
      }
      mean /= n;
      double ss = 0.0;
      for (double x : draws) ss += (x - mean) * (x - mean);
      for (std::size_t t = 0; t < n_targets; ++t) {
        const auto& tg = targets[t];
        const double denom = tg.ctx.variant() == Variant::DivN ? n : n - 1.0;
        const double est = estimate_from_moments(mean, ss / denom, tg.ctx, tg.ip);
        values[t * m + r] = est;
        if (tg.histogram) ++out.counts[t][bin_index(est, *tg.histogram)];
      }
    }
    out.sums.resize(n_targets);
    std::vector<double> buf(m);
    for (std::size_t t = 0; t < n_targets; ++t) {
      const std::span<const double> v(values.data() + t * m, m);
      out.sums[t].s1 = pairwise_sum(v);
      for (std::size_t r = 0; r < m; ++r) buf[r] = v[r] * v[r];
      out.sums[t].s2 = pairwise_sum(buf);
      for (std::size_t r = 0; r < m; ++r) buf[r] *= buf[r];
      out.sums[t].s4 = pairwise_sum(buf);
    }
    chunks[c] = std::move(out);
  };

  unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < n_chunks; c = next++) run_chunk(c);
      });
    }
    for (auto& th : pool) th.join();
  }

  const double big_n = static_cast<double>(replications);
  std::vector<SimResult> results(n_targets);
  std::vector<double> p1(n_chunks), p2(n_chunks), p4(n_chunks);
  for (std::size_t t = 0; t < n_targets; ++t) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      p1[c] = chunks[c].sums[t].s1;
      p2[c] = chunks[c].sums[t].s2;
      p4[c] = chunks[c].sums[t].s4;
    }
    SimResult& res = results[t];
    res.replications = replications;
    res.empirical_mean = pairwise_sum(p1) / big_n;
    res.empirical_second_moment = pairwise_sum(p2) / big_n;
    const double m4 = pairwise_sum(p4) / big_n;
    const double bessel = big_n / (big_n - 1.0);
    const double var1 = std::max(0.0, res.empirical_second_moment -
                                          res.empirical_mean * res.empirical_mean) * bessel;
    const double var2 = std::max(0.0, m4 - res.empirical_second_moment *
                                               res.empirical_second_moment) * bessel;
    res.se_mean = std::sqrt(var1 / big_n);
    res.se_second_moment = std::sqrt(var2 / big_n);

    if (const auto& h = targets[t].histogram) {
      std::vector<std::uint64_t> total(h->bins + 2, 0);
      for (const auto& ch : chunks) {
        for (std::size_t b = 0; b < total.size(); ++b) total[b] += ch.counts[t][b];
      }
      const double width = (h->hi - h->lo) / h->bins;
      res.histogram.push_back({-kInf, h->lo, total[0] / big_n});
      for (int b = 0; b < h->bins; ++b) {
        const double lo = h->lo + b * width;
        const double hi = b + 1 == h->bins ? h->hi : h->lo + (b + 1) * width;
        res.histogram.push_back({lo, hi, total[b + 1] / big_n});
      }
      res.histogram.push_back({h->hi, kInf, total[h->bins + 1] / big_n});
    }
  }
  return results;
}

SimResult simulate_estimator(const SimConfig& cfg) {
  if (cfg.replications < 1000) {
    throw DomainError("simulate_estimator: comparison runs need >= 1000 replications");
  }
  const EstimatorTarget target{cfg.ctx, cfg.ip, cfg.histogram};
  return simulate_batch(std::span(&target, 1), cfg.replications, cfg.seed, cfg.threads).front();
}

Verdict compare_to_analytics(const SimResult& res, double analytic_mean,
                             double analytic_second,
                             const std::function<double(double)>& analytic_cdf) {
  if (!(res.se_mean > 0.0) || !(res.se_second_moment > 0.0)) {
    throw DomainError("compare_to_analytics: standard errors must be positive");
  }
  Verdict v;
  v.z_mean = (res.empirical_mean - analytic_mean) / res.se_mean;
  v.z_second_moment = (res.empirical_second_moment - analytic_second) / res.se_second_moment;
  v.pass = std::abs(v.z_mean) <= 3.0 && std::abs(v.z_second_moment) <= 3.0;
  if (analytic_cdf && !res.histogram.empty()) {
    double cumulative = 0.0;
    double worst = 0.0;
    for (const auto& bin : res.histogram) {
      cumulative += bin.mass;
      if (std::isfinite(bin.hi)) {
        worst = std::max(worst, std::abs(cumulative - analytic_cdf(bin.hi)));
      }
    }
    v.ks_distance = worst;
  }
  return v;
}

namespace {
nlohmann::json finite_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}
}  // namespace

void to_json(nlohmann::json& j, const SimResult& r) {
  j = nlohmann::json{{"replications", r.replications},
                     {"mean", r.empirical_mean},
                     {"second_moment", r.empirical_second_moment},
                     {"se_mean", r.se_mean},
                     {"se_second_moment", r.se_second_moment}};
  auto bins = nlohmann::json::array();
  for (const auto& b : r.histogram) {
    bins.push_back({finite_or_null(b.lo), finite_or_null(b.hi), b.mass});
  }
  j["histogram"] = std::move(bins);
}

void to_json(nlohmann::json& j, const Verdict& v) {
  j = nlohmann::json{{"z_mean", v.z_mean}, {"z_second_moment", v.z_second_moment},
                     {"pass", v.pass}};
  if (v.ks_distance) j["ks_distance"] = *v.ks_distance;
}

}  // namespace unicap
