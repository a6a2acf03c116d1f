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

#include "sparse_detect/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "sparse_detect/boundaries.hpp"
#include "sparse_detect/errors.hpp"
#include "sparse_detect/parallel.hpp"

namespace sparse_detect {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double null_draw(const NullFamily& family, Rng& rng) {
  switch (family.kind) {
    case NullFamily::Kind::kGaussian:
      return rng.normal();
    case NullFamily::Kind::kChiSq: {
      double sum = 0.0;
      for (int j = 0; j < family.dof; ++j) {
        const double z = rng.normal();
        sum += z * z;
      }
      return sum;
    }
    case NullFamily::Kind::kExp2:
      return 2.0 * rng.exponential();
    case NullFamily::Kind::kSubbotin: {
      const double g = family.shape;
      std::gamma_distribution<double> gamma(1.0 / g, 1.0);
      const double magnitude = std::pow(g * gamma(rng.engine()), 1.0 / g);
      return rng.uniform() < 0.5 ? -magnitude : magnitude;
    }
  }
  throw DomainError("unknown null family");
}

double floor_p(double p) { return std::max(p, PValueVector::kFloor); }

// Ascending smallest p-values of a Gaussian sample made of n_null nulls plus
// the given signals; every observation below the retained cutoff is present.
std::vector<double> tail_pvalues(std::size_t n_null, double keep_fraction, TailGenerator generator,
                                 std::span<const double> signals, Rng& rng) {
  std::vector<double> p;
  double cutoff = 0.0;
  if (generator == TailGenerator::kExactInverse) {
    p = uniform_order_statistics(n_null, NullSampling::tail(keep_fraction).retained(n_null), rng);
    cutoff = p.empty() ? 0.0 : p.back();
  } else {
    const TailSample tail = tail_sample_gaussian(n_null, keep_fraction, rng);
    p.reserve(tail.k);
    for (double z : tail.top_values) p.push_back(gaussian_upper_tail(z).p);
    cutoff = gaussian_upper_tail(tail_expansion_threshold(keep_fraction)).p;
  }
  for (double x : signals) {
    const double ps = gaussian_upper_tail(x).p;
    if (ps <= cutoff) p.push_back(ps);
  }
  for (double& v : p) v = floor_p(v);
  std::sort(p.begin(), p.end());
  return p;
}

}  // namespace

std::vector<double> sample_null(const NullFamily& family, std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  for (double& x : out) x = null_draw(family, rng);
  return out;
}

std::vector<double> sample_null(const NullFamily& family, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_null(family, n, rng);
}

double sample_signal(const MixtureSpec& spec, Rng& rng) {
  const NullFamily& family = spec.family();
  switch (family.kind) {
    case NullFamily::Kind::kGaussian:
      return spec.amplitude() + rng.normal();
    case NullFamily::Kind::kChiSq:
    case NullFamily::Kind::kExp2: {
      const int dof = family.kind == NullFamily::Kind::kExp2 ? 2 : family.dof;
      const double shifted = rng.normal() + std::sqrt(spec.amplitude());
      double sum = shifted * shifted;
      for (int j = 1; j < dof; ++j) {
        const double z = rng.normal();
        sum += z * z;
      }
      return sum;
    }
    case NullFamily::Kind::kSubbotin:
      return spec.amplitude() + null_draw(family, rng);
  }
  throw DomainError("unknown null family");
}

AlternativeSample sample_alternative(const MixtureSpec& spec, Rng& rng, bool shuffle) {
  const auto n = static_cast<std::size_t>(spec.n());
  std::binomial_distribution<std::int64_t> binomial(spec.n(), spec.epsilon());
  AlternativeSample out;
  out.signal_count = static_cast<std::size_t>(binomial(rng.engine()));
  out.values.resize(n);
  for (std::size_t i = 0; i < out.signal_count; ++i) out.values[i] = sample_signal(spec, rng);
  for (std::size_t i = out.signal_count; i < n; ++i) out.values[i] = null_draw(spec.family(), rng);
  if (shuffle) std::shuffle(out.values.begin(), out.values.end(), rng.engine());
  return out;
}

AlternativeSample sample_alternative(const MixtureSpec& spec, std::uint64_t seed, bool shuffle) {
  Rng rng(seed);
  return sample_alternative(spec, rng, shuffle);
}

double tail_expansion_quantile(double upper_prob) {
  if (!(upper_prob > 0.0 && upper_prob <= 0.1)) {
    throw DomainError("tail expansion needs an upper probability in (0, 0.1]");
  }
  const double y = -2.0 * std::log(upper_prob) - kLog2Pi;
  return std::sqrt(y - std::log(y));
}

double tail_expansion_threshold(double keep_fraction) { return tail_expansion_quantile(keep_fraction); }

TailSample tail_sample_gaussian(std::size_t n, double keep_fraction, Rng& rng) {
  if (n < 1000) throw DomainError("tail_sample_gaussian: n must be >= 1000");
  if (!(keep_fraction > 0.0 && keep_fraction <= 0.1)) {
    throw DomainError("tail_sample_gaussian: keep fraction must lie in (0, 0.1]");
  }
  std::poisson_distribution<std::int64_t> poisson(static_cast<double>(n) * keep_fraction);
  TailSample out;
  out.k = static_cast<std::size_t>(poisson(rng.engine()));
  out.top_values.resize(out.k);
  // 1 - U is uniform on (0, keep_fraction]; drawing it directly avoids cancellation.
  for (double& z : out.top_values) z = tail_expansion_quantile(keep_fraction * rng.uniform_open0());
  std::sort(out.top_values.begin(), out.top_values.end(), std::greater<>());
  return out;
}

TailSample tail_sample_gaussian(std::size_t n, double keep_fraction, std::uint64_t seed) {
  Rng rng(seed);
  return tail_sample_gaussian(n, keep_fraction, rng);
}

TailSample exact_tail_gaussian(std::size_t n, std::size_t k, Rng& rng) {
  const std::vector<double> u = uniform_order_statistics(n, k, rng);
  TailSample out;
  out.k = k;
  out.top_values.reserve(k);
  for (double v : u) out.top_values.push_back(gaussian_upper_quantile(floor_p(v)));
  return out;
}

StatResult hc_from_tail(std::span<const double> top_values, std::size_t n, StatisticId id,
                        double alpha0) {
  if (top_values.empty()) throw InputError("hc_from_tail: no tail values");
  if (2 * top_values.size() > n) throw DomainError("hc_from_tail: tail longer than n/2");
  if (id != StatisticId::kHcStar && id != StatisticId::kHcPlus) {
    throw ConfigError("hc_from_tail supports hc_star and hc_plus only");
  }
  std::vector<double> p;
  p.reserve(top_values.size());
  for (double z : top_values) p.push_back(floor_p(gaussian_upper_tail(z).p));
  if (!std::is_sorted(p.begin(), p.end())) throw InputError("hc_from_tail: values must be descending");
  StatResult out = id == StatisticId::kHcStar ? hc_star_sorted(p, n, alpha0) : hc_plus_sorted(p, n);
  out.auxiliary["tail_truncated"] = p.size() < n ? 1.0 : 0.0;
  return out;
}

void ExperimentConfig::validate() const {
  if (statistics.empty()) throw ConfigError("no statistics requested");
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  if (!sampling.is_tail()) return;
  if (spec.family().kind != NullFamily::Kind::kGaussian) {
    throw ConfigError("tail sampling is available for the gaussian family only");
  }
  if (spec.n() < 1000) throw ConfigError("tail sampling needs n >= 1000");
  for (StatisticId id : statistics) {
    if (id != StatisticId::kHcStar && id != StatisticId::kHcPlus && id != StatisticId::kMax) {
      throw ConfigError(std::string(to_string(id)) + " cannot run in tail sampling mode");
    }
  }
}

std::vector<double> evaluate_replicate(const ExperimentConfig& config, const MixtureSpec& spec,
                                       bool alternative, Rng& rng) {
  const auto n = static_cast<std::size_t>(spec.n());
  std::vector<double> values;
  values.reserve(config.statistics.size());
  if (config.sampling.is_tail()) {
    std::vector<double> signals;
    if (alternative) {
      std::binomial_distribution<std::int64_t> binomial(spec.n(), spec.epsilon());
      signals.resize(static_cast<std::size_t>(binomial(rng.engine())));
      for (double& x : signals) x = sample_signal(spec, rng);
    }
    const std::vector<double> p = tail_pvalues(n - signals.size(), config.sampling.tail_fraction,
                                               config.tail_generator, signals, rng);
    for (StatisticId id : config.statistics) {
      values.push_back(evaluate_on_sorted(id, p, n, config.alpha0));
    }
    return values;
  }
  const std::vector<double> sample =
      alternative ? sample_alternative(spec, rng).values : sample_null(spec.family(), n, rng);
  const PValueVector p = pvalues_from_observations(sample, spec.family()).sorted();
  for (StatisticId id : config.statistics) {
    values.push_back(id == StatisticId::kOracleLrt ? oracle_lrt(sample, spec).value
                                                   : evaluate_on_sorted(id, p.values(), n, config.alpha0));
  }
  return values;
}

HistogramResult run_histogram_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::size_t stats = config.statistics.size();
  std::vector<std::vector<double>> null_rows(config.reps), alt_rows(config.reps);
  parallel_for(config.reps, config.threads, [&](std::size_t rep) {
    Rng null_rng(config.seed, {0, rep});
    null_rows[rep] = evaluate_replicate(config, config.spec, false, null_rng);
    Rng alt_rng(config.seed, {1, rep});
    alt_rows[rep] = evaluate_replicate(config, config.spec, true, alt_rng);
  });
  HistogramResult out{config.statistics, std::vector<std::vector<double>>(stats),
                      std::vector<std::vector<double>>(stats)};
  for (std::size_t s = 0; s < stats; ++s) {
    out.null_values[s].reserve(config.reps);
    out.alt_values[s].reserve(config.reps);
    for (std::size_t rep = 0; rep < config.reps; ++rep) {
      out.null_values[s].push_back(null_rows[rep][s]);
      out.alt_values[s].push_back(alt_rows[rep][s]);
    }
  }
  return out;
}

bool rejects(StatisticId id, double value, double critical) {
  return rejection_direction(id) == TailDirection::kUpper ? value > critical : value < critical;
}

PowerReport run_power_experiment(std::span<const GridPoint> grid, const ExperimentConfig& base,
                                 const CriticalTable& table) {
  base.validate();
  if (grid.empty()) throw ConfigError("power grid is empty");
  const NullFamily family = base.spec.family();
  const std::int64_t n = base.spec.n();

  std::vector<const CriticalEntry*> entries(base.statistics.size(), nullptr);
  for (std::size_t s = 0; s < base.statistics.size(); ++s) {
    if (base.statistics[s] == StatisticId::kOracleLrt) continue;
    entries[s] = &table.at({calibration_name(base.statistics[s], base.sampling), n, base.alpha0, base.level});
  }

  PowerReport report;
  report.n = n;
  report.reps = base.reps;
  report.level = base.level;
  report.sampling = base.sampling.is_tail() ? "tail" : "full";
  report.cells.resize(grid.size());

  for (std::size_t c = 0; c < grid.size(); ++c) {
    const MixtureSpec spec = MixtureSpec::from_exponents(family, n, grid[c].beta, grid[c].r);
    std::vector<std::vector<double>> rows(base.reps);
    std::vector<double> oracle_null;
    const bool has_oracle = std::find(base.statistics.begin(), base.statistics.end(),
                                      StatisticId::kOracleLrt) != base.statistics.end();
    if (has_oracle) oracle_null.resize(base.reps);
    parallel_for(base.reps, base.threads, [&](std::size_t rep) {
      Rng rng(base.seed, {2, c, rep});
      rows[rep] = evaluate_replicate(base, spec, true, rng);
      if (has_oracle) {
        Rng null_rng(base.seed, {3, c, rep});
        oracle_null[rep] = oracle_lrt(sample_null(family, static_cast<std::size_t>(n), null_rng), spec).value;
      }
    });
    PowerCell& cell = report.cells[c];
    cell.point = grid[c];
    for (std::size_t s = 0; s < base.statistics.size(); ++s) {
      const StatisticId id = base.statistics[s];
      StatisticPower result;
      result.statistic = id;
      if (id == StatisticId::kOracleLrt) {
        result.critical = critical_from_replicates(oracle_null, base.level, TailDirection::kUpper);
        result.source = "monte_carlo_per_cell";
      } else {
        result.critical = entries[s]->critical;
        result.source = std::string(to_string(entries[s]->source));
      }
      std::size_t hits = 0;
      for (const auto& row : rows) hits += rejects(id, row[s], result.critical) ? 1 : 0;
      const double reps = static_cast<double>(base.reps);
      result.power = static_cast<double>(hits) / reps;
      result.se = std::sqrt(result.power * (1.0 - result.power) / reps);
      cell.results.push_back(std::move(result));
    }
  }
  return report;
}

Table1 reproduce_table1() {
  Table1 table;
  table.n_values = {1e6, 1e7, 1e8, 1e9, 1e10};
  table.r_values = {0.1, 0.05};
  for (double n : table.n_values) table.loglog_row.push_back(std::sqrt(2.0 * std::log(std::log(n))));
  for (double r : table.r_values) {
    std::vector<double> row;
    for (double n : table.n_values) row.push_back(ev_n_table1(n, r, 0.5));
    table.ev_rows.push_back(std::move(row));
  }
  return table;
}

std::string format_table1(const Table1& table) {
  char buf[64];
  std::string out = "                    ";
  for (double n : table.n_values) {
    std::snprintf(buf, sizeof buf, "%10s", ("10^" + std::to_string(std::lround(std::log10(n)))).c_str());
    out += buf;
  }
  out += "\n";
  auto row = [&](const std::string& label, const std::vector<double>& values) {
    std::snprintf(buf, sizeof buf, "%-20s", label.c_str());
    out += buf;
    for (double v : values) {
      std::snprintf(buf, sizeof buf, "%10.4f", v);
      out += buf;
    }
    out += "\n";
  };
  row("sqrt(2 log log n)", table.loglog_row);
  for (std::size_t i = 0; i < table.r_values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "EV_n(4r) r=%g", table.r_values[i]);
    row(buf, table.ev_rows[i]);
  }
  return out;
}

}  // namespace sparse_detect
