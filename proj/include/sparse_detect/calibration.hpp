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

// Null-hypothesis critical values: Monte Carlo quantiles of every p-value
// statistic and, for HC+, the Gumbel-type limit law. Tables persist to a
// line-oriented text file that round-trips bit for bit.

#ifndef SPARSE_DETECT_CALIBRATION_HPP_
#define SPARSE_DETECT_CALIBRATION_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparse_detect/rng.hpp"
#include "sparse_detect/statistics.hpp"

namespace sparse_detect {

struct LimitLawParams {
  double b_n = 0.0;  // sqrt(2 log log n)
  double c_n = 0.0;  // 2 log log n + log(log log n)/2 - log(4 pi)/2
};

// Requires n >= 16.
LimitLawParams limit_law_params(double n);

// (c_n + x_alpha) / b_n with exp(-2 exp(-x_alpha)) = 1 - alpha.
double asymptotic_critical_hc_plus(double n, double alpha);

// How null replicates are drawn. Null p-values are exactly uniform, so the
// sorted sample is generated directly from exponential spacings. In tail mode
// only the smallest ceil(tail_fraction * n) order statistics are produced and
// the statistic is truncated to them (hc_star, hc_plus and max only).
struct NullSampling {
  double tail_fraction = 0.0;  // 0 = full sample

  static NullSampling full() { return {}; }
  static NullSampling tail(double fraction);

  bool is_tail() const { return tail_fraction > 0.0; }
  std::size_t retained(std::size_t n) const;
};

// Identifier under which a calibration is stored: "hc_plus" for full
// sampling, "hc_plus@tail=0.01" for tail sampling.
std::string calibration_name(StatisticId id, const NullSampling& sampling = {});

// Sorted uniform order statistics U_(1..k) of an n-sample, via
// U_(i) = S_i / S_{n+1} with S the partial sums of standard exponentials.
std::vector<double> uniform_order_statistics(std::size_t n, std::size_t k, Rng& rng);

std::vector<double> mc_null_distribution(StatisticId id, std::size_t n, double alpha0,
                                         std::size_t reps, std::uint64_t seed,
                                         const NullSampling& sampling = {}, unsigned threads = 0);

// Type-7 empirical quantile (linear interpolation between order statistics).
double empirical_quantile(std::vector<double> values, double prob);

enum class CriticalSource { kMonteCarlo, kAsymptotic };
std::string_view to_string(CriticalSource source);

struct CriticalKey {
  std::string statistic;
  std::int64_t n = 0;
  double alpha0 = 0.5;
  double alpha = 0.05;

  auto operator<=>(const CriticalKey&) const = default;
  std::string describe() const;
};

struct CriticalEntry {
  double critical = 0.0;
  CriticalSource source = CriticalSource::kMonteCarlo;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const CriticalEntry&, const CriticalEntry&) = default;
};

// Critical value from a replicate set: the (1 - alpha) quantile for
// statistics that reject when large, the alpha quantile for the FDR ratio.
// Requires reps * alpha >= 10.
double critical_from_replicates(std::span<const double> replicates, double alpha,
                                TailDirection direction);

CriticalEntry mc_critical_value(StatisticId id, std::size_t n, double alpha0, double alpha,
                                std::size_t reps, std::uint64_t seed,
                                const NullSampling& sampling = {}, unsigned threads = 0);

class CriticalTable {
 public:
  using Map = std::map<CriticalKey, CriticalEntry>;

  // Inserts or replaces. Monte Carlo entries need reps >= 100; critical
  // values must stay monotone in alpha for a fixed (statistic, n, alpha0):
  // nonincreasing when the statistic rejects for large values.
  void insert(const CriticalKey& key, const CriticalEntry& entry);

  const CriticalEntry* find(const CriticalKey& key) const;
  // Throws MissingCalibrationError naming the tuple.
  const CriticalEntry& at(const CriticalKey& key) const;

  const Map& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  friend bool operator==(const CriticalTable&, const CriticalTable&) = default;

 private:
  Map entries_;
};

inline constexpr const char* kCalibrationHeader = "sparse-detect-caltable v1";

std::string format_table(const CriticalTable& table);
CriticalTable parse_table(const std::string& text);
void save_table(const CriticalTable& table, const std::filesystem::path& path);
CriticalTable load_table(const std::filesystem::path& path);

}  // namespace sparse_detect

#endif  // SPARSE_DETECT_CALIBRATION_HPP_
