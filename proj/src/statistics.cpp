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

#include "sparse_detect/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparse_detect/errors.hpp"

namespace sparse_detect {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sqrt(n) (i/n - p) / sqrt(p (1 - p)), the normalized empirical process at
// the i-th order statistic.
double hc_term(std::size_t i, double n, double p) {
  if (p >= 1.0) return static_cast<double>(i) == n ? 0.0 : -kInf;
  return std::sqrt(n) * (static_cast<double>(i) / n - p) / std::sqrt(p * (1.0 - p));
}

std::vector<double> sorted_copy(const PValueVector& p) {
  std::vector<double> v(p.values().begin(), p.values().end());
  if (!p.sorted_flag()) std::stable_sort(v.begin(), v.end());
  return v;
}

void require_nonempty(std::size_t n, const char* what) {
  if (n == 0) throw DomainError(std::string(what) + ": empty input");
}

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// (1 + w) log(1 + w) - w for w > -1, by series near 0.
double bregman_log(double w) {
  if (std::abs(w) < 1e-2) {
    double sum = 0.0;
    double power = w * w;
    for (int k = 2; k < 12; ++k) {
      sum += (k % 2 == 0 ? power : -power) / (k * (k - 1.0));
      power *= w;
    }
    return sum;
  }
  if (w == -1.0) return 1.0;
  return (1.0 + w) * std::log1p(w) - w;
}

}  // namespace

PValueVector::PValueVector(std::vector<double> values, bool assume_sorted)
    : values_(std::move(values)), sorted_(assume_sorted) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    double& v = values_[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InputError("p-value at index " + std::to_string(i) + " is outside [0, 1]");
    }
    if (v < kFloor) {
      v = kFloor;
      ++clamp_count_;
    }
  }
  if (sorted_ && !std::is_sorted(values_.begin(), values_.end())) {
    throw InputError("p-values flagged as sorted are not nondecreasing");
  }
}

PValueVector PValueVector::sorted() const {
  PValueVector out;
  out.values_ = sorted_copy(*this);
  out.sorted_ = true;
  out.clamp_count_ = clamp_count_;
  return out;
}

MixtureSpec MixtureSpec::make(NullFamily family, std::int64_t n, std::optional<double> beta,
                              std::optional<double> epsilon, std::optional<double> r,
                              std::optional<double> amplitude) {
  if (n < 1) throw DomainError("MixtureSpec: n must be >= 1");
  if (beta.has_value() == epsilon.has_value()) {
    throw ConfigError("MixtureSpec: give exactly one of beta and epsilon");
  }
  if (r.has_value() == amplitude.has_value()) {
    throw ConfigError("MixtureSpec: give exactly one of r and amplitude");
  }
  MixtureSpec spec;
  spec.family_ = family;
  spec.n_ = n;
  if (beta) {
    if (!(*beta >= 0.5 && *beta <= 1.0)) throw DomainError("MixtureSpec: beta must lie in [1/2, 1]");
    spec.beta_ = beta;
    spec.epsilon_ = std::pow(static_cast<double>(n), -*beta);
  } else {
    if (!(*epsilon >= 0.0 && *epsilon <= 1.0)) throw DomainError("MixtureSpec: epsilon must lie in [0, 1]");
    spec.epsilon_ = *epsilon;
  }
  if (r) {
    if (!(*r > 0.0) || !std::isfinite(*r)) throw DomainError("MixtureSpec: r must be > 0");
    spec.r_ = r;
    spec.amplitude_ = calibrated_amplitude(family, *r, static_cast<double>(n));
  } else {
    if (!std::isfinite(*amplitude)) throw DomainError("MixtureSpec: amplitude must be finite");
    if (family.kind == NullFamily::Kind::kChiSq || family.kind == NullFamily::Kind::kExp2) {
      if (*amplitude < 0.0) throw DomainError("MixtureSpec: noncentrality must be >= 0");
    }
    spec.amplitude_ = *amplitude;
  }
  return spec;
}

MixtureSpec MixtureSpec::from_exponents(NullFamily family, std::int64_t n, double beta, double r) {
  return make(family, n, beta, std::nullopt, r, std::nullopt);
}

MixtureSpec MixtureSpec::from_values(NullFamily family, std::int64_t n, double epsilon,
                                     double amplitude) {
  return make(family, n, std::nullopt, epsilon, std::nullopt, amplitude);
}

std::string_view to_string(StatisticId id) {
  switch (id) {
    case StatisticId::kHcStar:
      return "hc_star";
    case StatisticId::kHcPlus:
      return "hc_plus";
    case StatisticId::kBerkJonesPlus:
      return "berk_jones_plus";
    case StatisticId::kFisher:
      return "fisher";
    case StatisticId::kMax:
      return "max";
    case StatisticId::kFdrMinRatio:
      return "fdr_min_ratio";
    case StatisticId::kOracleLrt:
      return "oracle_lrt";
  }
  return "unknown";
}

StatisticId parse_statistic(std::string_view name) {
  if (name == "hc_star") return StatisticId::kHcStar;
  if (name == "hc_plus") return StatisticId::kHcPlus;
  if (name == "berk_jones_plus" || name == "bj") return StatisticId::kBerkJonesPlus;
  if (name == "fisher") return StatisticId::kFisher;
  if (name == "max") return StatisticId::kMax;
  if (name == "fdr_min_ratio" || name == "fdr") return StatisticId::kFdrMinRatio;
  if (name == "oracle_lrt") return StatisticId::kOracleLrt;
  throw ConfigError("unknown statistic '" + std::string(name) + "'");
}

std::vector<StatisticId> parse_statistic_list(std::string_view text) {
  std::vector<StatisticId> ids;
  while (!text.empty()) {
    const auto comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    const auto first = item.find_first_not_of(" \t");
    item = first == std::string_view::npos ? std::string_view{} : item.substr(first, item.find_last_not_of(" \t") - first + 1);
    if (!item.empty()) {
      const StatisticId id = parse_statistic(item);
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (ids.empty()) throw ConfigError("empty statistic list");
  return ids;
}

TailDirection rejection_direction(StatisticId id) {
  return id == StatisticId::kFdrMinRatio ? TailDirection::kLower : TailDirection::kUpper;
}

PValueVector pvalues_from_observations(std::span<const double> sample, const NullFamily& family) {
  if (sample.empty()) throw InputError("empty sample");
  std::vector<double> p(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!std::isfinite(sample[i])) {
      throw InputError("observation at index " + std::to_string(i) + " is not finite");
    }
    p[i] = family_upper_tail(family, sample[i]).p;
  }
  return PValueVector(std::move(p));
}

StatResult hc_fixed_level(const PValueVector& p, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("hc_fixed_level: alpha must lie in (0, 1)");
  const std::size_t n = p.size();
  require_nonempty(n, "hc_fixed_level");
  const auto hits = std::count_if(p.values().begin(), p.values().end(),
                                  [alpha](double v) { return v <= alpha; });
  const double nd = static_cast<double>(n);
  const double fraction = static_cast<double>(hits) / nd;
  StatResult out{"hc_fixed_level", std::sqrt(nd) * (fraction - alpha) / std::sqrt(alpha * (1.0 - alpha)),
                 std::nullopt, n, {}};
  out.auxiliary["count"] = static_cast<double>(hits);
  return out;
}

StatResult hc_star_sorted(std::span<const double> smallest, std::size_t n, double alpha0) {
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw DomainError("hc_star: alpha0 must lie in (0, 1]");
  if (smallest.empty()) throw InputError("hc_star: no p-values");
  if (smallest.size() > n) throw DomainError("hc_star: more order statistics than n");
  const double nd = static_cast<double>(n);
  std::size_t range = static_cast<std::size_t>(std::floor(alpha0 * nd));
  range = std::max<std::size_t>(range, 1);
  const std::size_t limit = std::min(range, smallest.size());
  double best = -kInf;
  std::size_t arg = 1;
  for (std::size_t i = 1; i <= limit; ++i) {
    const double term = hc_term(i, nd, smallest[i - 1]);
    if (term > best) {
      best = term;
      arg = i;
    }
  }
  StatResult out{"hc_star", best, arg, n, {}};
  if (smallest.size() < n) out.auxiliary["tail_truncated"] = 1.0;
  return out;
}

StatResult hc_plus_sorted(std::span<const double> smallest, std::size_t n) {
  if (n < 2) throw DomainError("hc_plus: n must be >= 2");
  if (smallest.empty()) throw InputError("hc_plus: no p-values");
  if (smallest.size() > n) throw DomainError("hc_plus: more order statistics than n");
  const double nd = static_cast<double>(n);
  const std::size_t limit = std::min(n / 2, smallest.size());
  const double floor_p = 1.0 / nd;
  double best = -kInf;
  std::optional<std::size_t> arg;
  std::size_t qualifying = 0;
  for (std::size_t i = 2; i <= limit; ++i) {
    const double p = smallest[i - 1];
    if (p < floor_p) continue;
    ++qualifying;
    const double term = hc_term(i, nd, p);
    if (!arg || term > best) {
      best = term;
      arg = i;
    }
  }
  StatResult out{"hc_plus", arg ? best : 0.0, arg, n, {}};
  out.auxiliary["qualifying"] = static_cast<double>(qualifying);
  if (!arg) out.auxiliary["empty_range"] = 1.0;
  if (smallest.size() < n) out.auxiliary["tail_truncated"] = 1.0;
  return out;
}

StatResult hc_star(const PValueVector& p, double alpha0) {
  const auto sorted = sorted_copy(p);
  StatResult out = hc_star_sorted(sorted, sorted.size(), alpha0);
  if (p.clamp_count() > 0) out.auxiliary["clamped"] = static_cast<double>(p.clamp_count());
  return out;
}

StatResult hc_plus(const PValueVector& p) {
  if (p.size() < 2) throw DomainError("hc_plus: n must be >= 2");
  const auto sorted = sorted_copy(p);
  StatResult out = hc_plus_sorted(sorted, sorted.size());
  if (p.clamp_count() > 0) out.auxiliary["clamped"] = static_cast<double>(p.clamp_count());
  return out;
}

double kplus(double t, double x) {
  if (!(t >= 0.0 && t <= 1.0 && x >= 0.0 && x <= 1.0)) {
    throw DomainError("kplus: arguments must lie in [0, 1]");
  }
  if (t <= x) return 0.0;
  if (x == 0.0 || t == 1.0) return kInf;
  // Sum of two nonnegative Bregman terms, so nothing cancels when t is near x.
  return x * bregman_log(t / x - 1.0) + (1.0 - x) * bregman_log((x - t) / (1.0 - x));
}

StatResult berk_jones_plus(const PValueVector& p) {
  const std::size_t n = p.size();
  if (n < 2) throw DomainError("berk_jones_plus: n must be >= 2");
  const auto sorted = sorted_copy(p);
  const double nd = static_cast<double>(n);
  double best = -kInf;
  std::size_t arg = 1;
  for (std::size_t i = 1; i <= n / 2; ++i) {
    const double k = kplus(static_cast<double>(i) / nd, sorted[i - 1]);
    if (k > best) {
      best = k;
      arg = i;
    }
  }
  StatResult out{"berk_jones_plus", nd * best, arg, n, {}};
  if (out.value > 1e6) out.auxiliary["large_value"] = 1.0;
  if (p.clamp_count() > 0) out.auxiliary["clamped"] = static_cast<double>(p.clamp_count());
  return out;
}

StatResult fisher_statistic(const PValueVector& p) {
  const std::size_t n = p.size();
  require_nonempty(n, "fisher_statistic");
  double sum = 0.0;
  for (double v : p.values()) sum += std::log(v);
  const double value = -2.0 * sum;
  StatResult out{"fisher", value, std::nullopt, n, {}};
  const double nd = static_cast<double>(n);
  // Null reference chi^2_{2n}; exact up to 2n = 1e4, normal beyond.
  if (2.0 * nd <= 1e4) {
    out.auxiliary["p_value"] = std::exp(log_gamma_q(nd, 0.5 * value));
    out.auxiliary["exact_reference"] = 1.0;
  } else {
    out.auxiliary["p_value"] = gaussian_upper_tail((value - 2.0 * nd) / std::sqrt(4.0 * nd)).p;
    out.auxiliary["exact_reference"] = 0.0;
  }
  if (p.clamp_count() > 0) out.auxiliary["clamped"] = static_cast<double>(p.clamp_count());
  return out;
}

StatResult fdr_min_ratio(const PValueVector& p, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("fdr_min_ratio: alpha must lie in (0, 1)");
  const std::size_t n = p.size();
  require_nonempty(n, "fdr_min_ratio");
  const auto sorted = sorted_copy(p);
  const double nd = static_cast<double>(n);
  double best = kInf;
  std::size_t arg = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    const double ratio = sorted[i - 1] * nd / static_cast<double>(i);
    if (ratio < best) {
      best = ratio;
      arg = i;
    }
  }
  StatResult out{"fdr_min_ratio", best, arg, n, {}};
  out.auxiliary["alpha"] = alpha;
  out.auxiliary["reject"] = best <= alpha ? 1.0 : 0.0;
  return out;
}

StatResult max_statistic(std::span<const double> sample, std::optional<double> alpha) {
  require_nonempty(sample.size(), "max_statistic");
  const auto it = std::max_element(sample.begin(), sample.end());
  StatResult out{"max", *it, static_cast<std::size_t>(it - sample.begin()) + 1, sample.size(), {}};
  if (alpha) out.auxiliary["critical"] = max_critical_value(sample.size(), *alpha);
  return out;
}

double max_critical_value(std::size_t n, double alpha) {
  if (n == 0) throw DomainError("max_critical_value: n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("max_critical_value: alpha must lie in (0, 1)");
  // 1 - (1 - Q(m))^n = alpha  <=>  Q(m) = 1 - (1 - alpha)^{1/n}.
  const double per_test = -std::expm1(std::log1p(-alpha) / static_cast<double>(n));
  return gaussian_upper_quantile(per_test);
}

double standardized_exceedance(double count, double n, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DegenerateError("exceedance probability must lie strictly in (0, 1)");
  if (!(n > 0.0)) throw DomainError("standardized_exceedance: n must be > 0");
  return (count - n * p) / std::sqrt(n * p * (1.0 - p));
}

StatResult v_statistic(std::span<const double> sample, const NullFamily& family, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("v_statistic: q must lie in (0, 1]");
  const std::size_t n = sample.size();
  const double nd = static_cast<double>(n);
  const double threshold = informative_threshold(family, q, nd);
  const auto count = std::count_if(sample.begin(), sample.end(),
                                   [threshold](double x) { return x >= threshold; });
  const double p = family_upper_tail(family, threshold).p;
  if (!(p > 0.0 && p < 1.0)) {
    throw DegenerateError("v_statistic: null exceedance probability is 0 or 1 at this threshold");
  }
  StatResult out{"v_statistic", standardized_exceedance(static_cast<double>(count), nd, p),
                 std::nullopt, n, {}};
  out.auxiliary["threshold"] = threshold;
  out.auxiliary["count"] = static_cast<double>(count);
  out.auxiliary["null_probability"] = p;
  return out;
}

StatResult oracle_lrt(std::span<const double> sample, const MixtureSpec& spec) {
  require_nonempty(sample.size(), "oracle_lrt");
  const double eps = spec.epsilon();
  StatResult out{"oracle_lrt", 0.0, std::nullopt, sample.size(), {}};
  if (eps == 0.0) return out;
  const double log_keep = std::log1p(-eps);
  const double log_eps = std::log(eps);
  double total = 0.0;
  for (double x : sample) {
    const double lr = log_density_ratio(spec.family(), spec.amplitude(), x);
    total += log_add(log_keep, log_eps + lr);
  }
  out.value = total;
  return out;
}

double evaluate_on_sorted(StatisticId id, std::span<const double> smallest, std::size_t n,
                          double alpha0) {
  const bool full = smallest.size() == n;
  switch (id) {
    case StatisticId::kHcStar:
      return hc_star_sorted(smallest, n, alpha0).value;
    case StatisticId::kHcPlus:
      return hc_plus_sorted(smallest, n).value;
    case StatisticId::kMax: {
      if (smallest.empty()) throw InputError("max: no p-values");
      const double p = std::clamp(smallest.front(), PValueVector::kFloor, std::nextafter(1.0, 0.0));
      return gaussian_upper_quantile(p);
    }
    case StatisticId::kBerkJonesPlus:
    case StatisticId::kFisher:
    case StatisticId::kFdrMinRatio: {
      if (!full) {
        throw ConfigError(std::string(to_string(id)) + " needs the full sample, not a tail");
      }
      const PValueVector p(std::vector<double>(smallest.begin(), smallest.end()), true);
      if (id == StatisticId::kBerkJonesPlus) return berk_jones_plus(p).value;
      if (id == StatisticId::kFisher) return fisher_statistic(p).value;
      return fdr_min_ratio(p).value;
    }
    case StatisticId::kOracleLrt:
      throw ConfigError("oracle_lrt needs raw observations and a fully specified alternative");
  }
  throw ConfigError("unknown statistic");
}

}  // namespace sparse_detect
