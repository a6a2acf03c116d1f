// Copyright 2026 The sparse-detect Authors
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

// Test statistics for the intersection null over n component tests:
// Tukey's fixed-level higher criticism, HC*, HC+, Berk-Jones BJ+, Fisher's
// combination, the maximum, the Benjamini-Hochberg min-ratio, the
// standardized exceedance count V_n(q), and the oracle likelihood ratio.

#ifndef SPARSE_DETECT_STATISTICS_HPP_
#define SPARSE_DETECT_STATISTICS_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparse_detect/tail_math.hpp"

namespace sparse_detect {

class PValueVector {
 public:
  static constexpr double kFloor = 1e-300;

  // Values must lie in [0, 1]; anything below kFloor (including exact zeros
  // produced by underflowing tails) is raised to kFloor and counted. With
  // assume_sorted the order is checked, not established.
  explicit PValueVector(std::vector<double> values, bool assume_sorted = false);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool sorted_flag() const { return sorted_; }
  std::size_t clamp_count() const { return clamp_count_; }

  // Ascending copy; a no-op copy when already sorted.
  PValueVector sorted() const;

 private:
  PValueVector() = default;

  std::vector<double> values_;
  bool sorted_ = false;
  std::size_t clamp_count_ = 0;
};

struct StatResult {
  std::string name;
  double value = 0.0;
  std::optional<std::size_t> arg_index;  // 1-based
  std::size_t n = 0;
  std::map<std::string, double> auxiliary;

  double aux(const std::string& key, double fallback = 0.0) const {
    auto it = auxiliary.find(key);
    return it == auxiliary.end() ? fallback : it->second;
  }
};

// The alternative (1 - eps) F0 + eps F_amplitude over n observations. Either
// the sparsity exponent beta (eps = n^-beta) or eps itself is authoritative,
// and either the strength exponent r or the amplitude itself.
class MixtureSpec {
 public:
  static MixtureSpec from_exponents(NullFamily family, std::int64_t n, double beta, double r);
  static MixtureSpec from_values(NullFamily family, std::int64_t n, double epsilon, double amplitude);

  // Mixed forms, e.g. an explicit eps with a calibrated amplitude.
  static MixtureSpec make(NullFamily family, std::int64_t n, std::optional<double> beta,
                          std::optional<double> epsilon, std::optional<double> r,
                          std::optional<double> amplitude);

  const NullFamily& family() const { return family_; }
  std::int64_t n() const { return n_; }
  std::optional<double> beta() const { return beta_; }
  std::optional<double> r() const { return r_; }
  double epsilon() const { return epsilon_; }
  double amplitude() const { return amplitude_; }

 private:
  NullFamily family_;
  std::int64_t n_ = 0;
  std::optional<double> beta_;
  std::optional<double> r_;
  double epsilon_ = 0.0;
  double amplitude_ = 0.0;
};

enum class StatisticId { kHcStar, kHcPlus, kBerkJonesPlus, kFisher, kMax, kFdrMinRatio, kOracleLrt };

std::string_view to_string(StatisticId id);
StatisticId parse_statistic(std::string_view name);
std::vector<StatisticId> parse_statistic_list(std::string_view comma_separated);

// Small values of the FDR min-ratio are significant; every other statistic
// rejects for large values.
enum class TailDirection { kUpper, kLower };
TailDirection rejection_direction(StatisticId id);

PValueVector pvalues_from_observations(std::span<const double> sample, const NullFamily& family);

StatResult hc_fixed_level(const PValueVector& p, double alpha);
StatResult hc_star(const PValueVector& p, double alpha0 = 0.5);
StatResult hc_plus(const PValueVector& p);
double kplus(double t, double x);
StatResult berk_jones_plus(const PValueVector& p);
StatResult fisher_statistic(const PValueVector& p);
StatResult fdr_min_ratio(const PValueVector& p, double alpha = 0.05);

// Plain maximum of the sample. With a level, auxiliary["critical"] holds the
// exact Gaussian-null critical value m(n, alpha).
StatResult max_statistic(std::span<const double> sample, std::optional<double> alpha = std::nullopt);
double max_critical_value(std::size_t n, double alpha);

StatResult v_statistic(std::span<const double> sample, const NullFamily& family, double q);
// (count - n p) / sqrt(n p (1 - p)).
double standardized_exceedance(double count, double n, double p);

StatResult oracle_lrt(std::span<const double> sample, const MixtureSpec& spec);

// HC maxima over the smallest K sorted p-values of a sample of size n >= K.
// With K = n these are exactly hc_star / hc_plus; with K < n the range is
// truncated at i <= K and auxiliary["tail_truncated"] is set.
StatResult hc_star_sorted(std::span<const double> smallest, std::size_t n, double alpha0 = 0.5);
StatResult hc_plus_sorted(std::span<const double> smallest, std::size_t n);

// Evaluates a p-value based statistic (anything but kOracleLrt) on the K
// smallest p-values of an n-sample. The maximum is reported on the Gaussian
// scale, max_i Q^{-1}(p_i), which is the raw maximum for Gaussian data and a
// monotone transform of it otherwise. Statistics that need all n values
// throw ConfigError when K < n.
double evaluate_on_sorted(StatisticId id, std::span<const double> smallest, std::size_t n,
                          double alpha0 = 0.5);

}  // namespace sparse_detect

#endif  // SPARSE_DETECT_STATISTICS_HPP_
