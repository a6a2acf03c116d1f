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

#ifndef SPARSE_DETECT_SIMULATE_HPP_
#define SPARSE_DETECT_SIMULATE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparse_detect/calibration.hpp"
#include "sparse_detect/rng.hpp"
#include "sparse_detect/statistics.hpp"

namespace sparse_detect {

std::vector<double> sample_null(const NullFamily& family, std::size_t n, Rng& rng);
std::vector<double> sample_null(const NullFamily& family, std::size_t n, std::uint64_t seed);

struct AlternativeSample {
  std::vector<double> values;  // signals first unless shuffled
  std::size_t signal_count = 0;
};

double sample_signal(const MixtureSpec& spec, Rng& rng);
AlternativeSample sample_alternative(const MixtureSpec& spec, Rng& rng, bool shuffle = false);
AlternativeSample sample_alternative(const MixtureSpec& spec, std::uint64_t seed,
                                     bool shuffle = false);

struct TailSample {
  std::vector<double> top_values;  // descending
  std::size_t k = 0;
};

// Poisson count of upper-tail draws, each mapped through the closed-form
// tail quantile expansion z = sqrt(y - log y).
TailSample tail_sample_gaussian(std::size_t n, double keep_fraction, Rng& rng);
TailSample tail_sample_gaussian(std::size_t n, double keep_fraction, std::uint64_t seed);
double tail_expansion_quantile(double upper_prob);
double tail_expansion_threshold(double keep_fraction);

// Top k of n null Gaussians through the exact inverse of uniform order statistics.
TailSample exact_tail_gaussian(std::size_t n, std::size_t k, Rng& rng);

StatResult hc_from_tail(std::span<const double> top_values, std::size_t n, StatisticId id,
                        double alpha0 = 0.5);

enum class TailGenerator { kExactInverse, kExpansion };

struct ExperimentConfig {
  MixtureSpec spec = MixtureSpec::from_values(NullFamily::gaussian(), 1000, 0.0, 0.0);
  std::vector<StatisticId> statistics{StatisticId::kHcPlus};
  double level = 0.05;
  double alpha0 = 0.5;
  std::size_t reps = 100;
  std::uint64_t seed = 0;
  NullSampling sampling;
  TailGenerator tail_generator = TailGenerator::kExactInverse;
  unsigned threads = 0;

  // Throws ConfigError for tail mode outside the Gaussian family or with a
  // statistic that needs the whole sample.
  void validate() const;
};

// Statistic values of one replicate, in config.statistics order.
std::vector<double> evaluate_replicate(const ExperimentConfig& config, const MixtureSpec& spec,
                                       bool alternative, Rng& rng);

struct HistogramResult {
  std::vector<StatisticId> statistics;
  std::vector<std::vector<double>> null_values;  // [statistic][replicate]
  std::vector<std::vector<double>> alt_values;
};

HistogramResult run_histogram_experiment(const ExperimentConfig& config);

struct GridPoint {
  double beta = 0.0;
  double r = 0.0;
};

struct StatisticPower {
  StatisticId statistic = StatisticId::kHcPlus;
  double power = 0.0;
  double se = 0.0;
  double critical = 0.0;
  std::string source;
};

struct PowerCell {
  GridPoint point;
  std::vector<StatisticPower> results;
};

struct PowerReport {
  std::vector<PowerCell> cells;
  std::int64_t n = 0;
  std::size_t reps = 0;
  double level = 0.0;
  std::string sampling;
};

// Critical values come from the table keyed by calibration_name(); the
// oracle likelihood ratio is calibrated per cell from fresh null draws.
PowerReport run_power_experiment(std::span<const GridPoint> grid, const ExperimentConfig& base,
                                 const CriticalTable& table);

bool rejects(StatisticId id, double value, double critical);

struct Table1 {
  std::vector<double> n_values;
  std::vector<double> loglog_row;
  std::vector<double> r_values;
  std::vector<std::vector<double>> ev_rows;  // [r][n]
};

Table1 reproduce_table1();
std::string format_table1(const Table1& table);

}  // namespace sparse_detect

#endif  // SPARSE_DETECT_SIMULATE_HPP_
