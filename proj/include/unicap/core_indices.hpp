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

#pragma once

// Closed-form capability indices for normal processes: the classical
// bilateral family, legacy one-sided indices, the unilateral family with an
// asymmetry ratio k, and the asymmetric-tolerance family it embeds into.

#include <optional>

namespace unicap {

enum class Side { Upper, Lower };

/// One-sided tolerance: a target, one limit and the ratio k >= 1 by which a
/// drift away from the limit is considered less serious than a drift toward it.
struct ToleranceSpec {
  double target = 0.0;
  Side side = Side::Upper;
  double limit = 0.0;
  double k = 1.0;

  static ToleranceSpec upper(double limit, double target, double k = 1.0) {
    return {target, Side::Upper, limit, k};
  }
  static ToleranceSpec lower(double limit, double target, double k = 1.0) {
    return {target, Side::Lower, limit, k};
  }

  /// Throws DomainError unless the limit is on the correct side of the target
  /// and k >= 1.
  void validate() const;

  /// Distance from target to limit (U - T or T - L).
  double reach() const { return side == Side::Upper ? limit - target : target - limit; }
};

struct ProcessParams {
  double mu = 0.0;
  double sigma = 1.0;

  void validate() const;
};

struct BilateralSpec {
  double lower = 0.0;
  double upper = 0.0;
  double target = 0.0;

  void validate() const;

  double half_width() const { return 0.5 * (upper - lower); }  // d
  double upper_reach() const { return upper - target; }        // D_u
  double lower_reach() const { return target - lower; }        // D_l
  double min_reach() const;                                    // d*
};

/// Selects a member of a (u, v) family. The four named indices are (0,0),
/// (1,0), (0,1) and (1,1).
struct IndexParams {
  double u = 0.0;
  double v = 0.0;

  void validate() const;
};

namespace index_params {
inline constexpr IndexParams kCp{0.0, 0.0};
inline constexpr IndexParams kCpk{1.0, 0.0};
inline constexpr IndexParams kCpm{0.0, 1.0};
inline constexpr IndexParams kCpmk{1.0, 1.0};
}  // namespace index_params

enum class Clamp { Raw, ZeroFloor };

struct ClassicalIndices {
  double cp, cpk, cpm, cpmk;
};

ClassicalIndices classical_indices(const ProcessParams& p, const BilateralSpec& b,
                                   Clamp clamp = Clamp::Raw);

/// A* = max(x - T, (T - x)/k) on the upper side, max((x - T)/k, T - x) on the
/// lower side. `location` is the process mean (or median).
double penalized_deviation(double location, const ToleranceSpec& t);

/// C_pu(u,v) or C_pl(u,v) depending on `t.side`.
double unilateral_index(const ProcessParams& p, const ToleranceSpec& t, IndexParams ip,
                        Clamp clamp = Clamp::Raw);

struct IndexReport {
  double cpu_or_cpl = 0.0;
  double cpk_side = 0.0;
  double cpm_side = 0.0;
  double cpmk_side = 0.0;
  double alpha = 0.0;
  double delta = 0.0;
  double a_star = 0.0;
};

IndexReport unilateral_report(const ProcessParams& p, const ToleranceSpec& t,
                              Clamp clamp = Clamp::Raw);

enum class LegacyFamily {
  KaneCpu,          // CPU / CPL
  KaneStar,         // CPU* / CPL*
  ChanCpmStar,      // C*_pmu / C*_pml
  VannmanCpmkSide,  // C_pmku / C_pmkl
  VannmanCpa,       // C_pau(u,v) / C_pal(u,v)
  VannmanCpv,       // C_pvu(u,v) / C_pvl(u,v)
};

struct LegacyOptions {
  /// Required for the two Vannman families, rejected for the others.
  std::optional<IndexParams> params;
  /// Defaults to ZeroFloor for the Kane indices and Raw otherwise.
  std::optional<Clamp> clamp;
};

/// Legacy one-sided index; the side comes from `t.side`, `t.k` is ignored.
double legacy_index(const ProcessParams& p, const ToleranceSpec& t, LegacyFamily family,
                    const LegacyOptions& options = {});

/// C''_p(u,v) for asymmetric tolerances.
double chen_pearn_index(const ProcessParams& p, const BilateralSpec& b, IndexParams ip);

/// Bilateral spec obtained by placing the missing limit k times farther from
/// the target than the given one.
BilateralSpec embed_as_bilateral(const ToleranceSpec& t);

/// Mean implied by C_pk(side) / C_p(side) = h when the mean sits between the
/// target and the limit.
double mean_position_from_ratio(double h, const ToleranceSpec& t);

}  // namespace unicap
