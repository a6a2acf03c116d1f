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

#include "sparse_detect/calibration.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "sparse_detect/errors.hpp"
#include "sparse_detect/parallel.hpp"

namespace sparse_detect {
namespace {

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_real(const std::string& field, std::size_t line, const char* what) {
  char* end = nullptr;
  const double x = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size()) {
    throw ParseError(line, std::string("bad ") + what + " '" + field + "'");
  }
  return x;
}

template <class Int>
Int parse_integer(const std::string& field, std::size_t line, const char* what) {
  std::istringstream in(field);
  Int value{};
  in >> value;
  if (field.empty() || in.fail() || !in.eof() || field.front() == '+' ||
      (std::is_unsigned_v<Int> && field.front() == '-')) {
    throw ParseError(line, std::string("bad ") + what + " '" + field + "'");
  }
  return value;
}

TailDirection direction_of(const std::string& calibration_name) {
  const std::string base = calibration_name.substr(0, calibration_name.find('@'));
  try {
    return rejection_direction(parse_statistic(base));
  } catch (const ConfigError&) {
    return TailDirection::kUpper;
  }
}

}  // namespace

LimitLawParams limit_law_params(double n) {
  if (!(n >= 16.0)) throw DomainError("limit_law_params: n must be >= 16");
  const double llog = std::log(std::log(n));
  return {std::sqrt(2.0 * llog),
          2.0 * llog + 0.5 * std::log(llog) - 0.5 * std::log(4.0 * std::numbers::pi)};
}

double asymptotic_critical_hc_plus(double n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("asymptotic_critical_hc_plus: alpha must lie in (0, 1)");
  }
  const LimitLawParams params = limit_law_params(n);
  const double x_alpha = -std::log(-0.5 * std::log1p(-alpha));
  return (params.c_n + x_alpha) / params.b_n;
}

NullSampling NullSampling::tail(double fraction) {
  if (!(fraction > 0.0 && fraction <= 0.1)) {
    throw DomainError("tail sampling fraction must lie in (0, 0.1]");
  }
  return {fraction};
}

std::size_t NullSampling::retained(std::size_t n) const {
  if (!is_tail()) return n;
  const auto k = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n);
}

std::string calibration_name(StatisticId id, const NullSampling& sampling) {
  std::string name(to_string(id));
  if (sampling.is_tail()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "@tail=%g", sampling.tail_fraction);
    name += buf;
  }
  return name;
}

std::vector<double> uniform_order_statistics(std::size_t n, std::size_t k, Rng& rng) {
  if (k > n) throw DomainError("uniform_order_statistics: k exceeds n");
  std::vector<double> u(k);
  double partial = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    partial += rng.exponential();
    u[i] = partial;
  }
  const double rest = static_cast<double>(n + 1 - k);
  double total = partial;
  if (rest == 1.0) {
    total += rng.exponential();
  } else {
    std::gamma_distribution<double> gamma(rest, 1.0);
    total += gamma(rng.engine());
  }
  for (double& v : u) v /= total;
  return u;
}

std::vector<double> mc_null_distribution(StatisticId id, std::size_t n, double alpha0,
                                         std::size_t reps, std::uint64_t seed,
                                         const NullSampling& sampling, unsigned threads) {
  if (reps < 1) throw ConfigError("mc_null_distribution: reps must be >= 1");
  if (n < 1) throw DomainError("mc_null_distribution: n must be >= 1");
  if (id == StatisticId::kOracleLrt) {
    throw ConfigError("oracle_lrt has no alternative-free null calibration");
  }
  if (sampling.is_tail() && id != StatisticId::kHcStar && id != StatisticId::kHcPlus &&
      id != StatisticId::kMax) {
    throw ConfigError(std::string(to_string(id)) + " cannot be calibrated in tail mode");
  }
  const std::size_t k = sampling.retained(n);
  std::vector<double> values(reps);
  parallel_for(reps, threads, [&](std::size_t rep) {
    Rng rng(seed, {rep});
    const std::vector<double> u = uniform_order_statistics(n, k, rng);
    values[rep] = evaluate_on_sorted(id, u, n, alpha0);
  });
  return values;
}

double empirical_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw DomainError("empirical_quantile: no values");
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("empirical_quantile: prob must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

std::string_view to_string(CriticalSource source) {
  return source == CriticalSource::kMonteCarlo ? "monte_carlo" : "asymptotic";
}

std::string CriticalKey::describe() const {
  return "(statistic=" + statistic + ", n=" + std::to_string(n) + ", alpha0=" + format_real(alpha0) +
         ", alpha=" + format_real(alpha) + ")";
}

double critical_from_replicates(std::span<const double> replicates, double alpha,
                                TailDirection direction) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("critical value: alpha must lie in (0, 1)");
  if (static_cast<double>(replicates.size()) * alpha < 10.0) {
    throw ConfigError("critical value unstable: reps * alpha must be >= 10");
  }
  std::vector<double> values(replicates.begin(), replicates.end());
  return empirical_quantile(std::move(values),
                            direction == TailDirection::kUpper ? 1.0 - alpha : alpha);
}

CriticalEntry mc_critical_value(StatisticId id, std::size_t n, double alpha0, double alpha,
                                std::size_t reps, std::uint64_t seed,
                                const NullSampling& sampling, unsigned threads) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("mc_critical_value: alpha must lie in (0, 1)");
  if (static_cast<double>(reps) * alpha < 10.0) {
    throw ConfigError("critical value unstable: reps * alpha must be >= 10");
  }
  if (reps < 100) throw ConfigError("Monte Carlo calibration needs reps >= 100");
  const auto values = mc_null_distribution(id, n, alpha0, reps, seed, sampling, threads);
  return {critical_from_replicates(values, alpha, rejection_direction(id)),
          CriticalSource::kMonteCarlo, static_cast<std::int64_t>(reps), seed};
}

void CriticalTable::insert(const CriticalKey& key, const CriticalEntry& entry) {
  if (key.statistic.empty() || key.statistic.find_first_of(",\n\r") != std::string::npos) {
    throw ConfigError("calibration statistic name must be nonempty and free of commas");
  }
  if (entry.source == CriticalSource::kMonteCarlo && entry.reps < 100) {
    throw ConfigError("Monte Carlo entry " + key.describe() + " needs reps >= 100");
  }
  if (!std::isfinite(entry.critical)) {
    throw ConfigError("critical value for " + key.describe() + " is not finite");
  }
  const TailDirection direction = direction_of(key.statistic);
  for (const auto& [other_key, other] : entries_) {
    if (other_key.statistic != key.statistic || other_key.n != key.n ||
        other_key.alpha0 != key.alpha0 || other_key.alpha == key.alpha) {
      continue;
    }
    const bool smaller_alpha = other_key.alpha < key.alpha;
    const bool ok = direction == TailDirection::kUpper
                        ? (smaller_alpha ? other.critical >= entry.critical
                                         : other.critical <= entry.critical)
                        : (smaller_alpha ? other.critical <= entry.critical
                                         : other.critical >= entry.critical);
    if (!ok) {
      throw ConfigError("critical value for " + key.describe() +
                        " breaks monotonicity in alpha against " + other_key.describe());
    }
  }
  entries_[key] = entry;
}

const CriticalEntry* CriticalTable::find(const CriticalKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

const CriticalEntry& CriticalTable::at(const CriticalKey& key) const {
  const CriticalEntry* entry = find(key);
  if (!entry) throw MissingCalibrationError("no calibration entry for " + key.describe());
  return *entry;
}

std::string format_table(const CriticalTable& table) {
  std::string out = std::string(kCalibrationHeader) + "\n";
  for (const auto& [key, entry] : table.entries()) {
    out += key.statistic + "," + std::to_string(key.n) + "," + format_real(key.alpha0) + "," +
           format_real(key.alpha) + "," + format_real(entry.critical) + "," +
           std::string(to_string(entry.source)) + "," + std::to_string(entry.reps) + "," +
           std::to_string(entry.seed) + "\n";
  }
  return out;
}

CriticalTable parse_table(const std::string& text) {
  CriticalTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!have_header) {
      if (line == kCalibrationHeader) {
        have_header = true;
        continue;
      }
      if (line.rfind("sparse-detect-caltable", 0) == 0) {
        throw ParseError(line_no, "unsupported calibration table version '" + line + "'");
      }
      throw ParseError(line_no, "missing calibration table header");
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 8) {
      throw ParseError(line_no, "expected 8 comma-separated fields, found " + std::to_string(fields.size()));
    }
    CriticalKey key{fields[0], parse_integer<std::int64_t>(fields[1], line_no, "n"),
                    parse_real(fields[2], line_no, "alpha0"), parse_real(fields[3], line_no, "alpha")};
    CriticalEntry entry;
    entry.critical = parse_real(fields[4], line_no, "critical value");
    if (fields[5] == "monte_carlo") {
      entry.source = CriticalSource::kMonteCarlo;
    } else if (fields[5] == "asymptotic") {
      entry.source = CriticalSource::kAsymptotic;
    } else {
      throw ParseError(line_no, "unknown source '" + fields[5] + "'");
    }
    entry.reps = parse_integer<std::int64_t>(fields[6], line_no, "reps");
    entry.seed = parse_integer<std::uint64_t>(fields[7], line_no, "seed");
    try {
      table.insert(key, entry);
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return table;
}

void save_table(const CriticalTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << format_table(table);
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

CriticalTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open calibration table '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_table(buffer.str());
}

}  // namespace sparse_detect
