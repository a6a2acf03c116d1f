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

#include "sparse_detect/tail_math.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "sparse_detect/errors.hpp"

namespace sparse_detect {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kInvSqrt2 = 0.70710678118654752440;

// Beyond this z the continued fraction for the Mills ratio is used; below it
// erfc is accurate to a few ulps and the tail is far from underflow.
constexpr double kMillsCutover = 8.0;

// Adds two log-space magnitudes.
double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// log R(z), R(z) = Q(z)/phi(z) = 1/(z + 1/(z + 2/(z + 3/(z + ...)))).
double log_mills_ratio(double z) {
  constexpr double kTiny = 1e-300;
  double f = z;
  double c = f;
  double d = 0.0;
  for (int k = 1; k < 1000; ++k) {
    d = z + k * d;
    if (d == 0.0) d = kTiny;
    c = z + k / c;
    if (c == 0.0) c = kTiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return -std::log(f);
}

// log Q(z) for z >= 0.
double log_gaussian_tail_nonneg(double z) {
  if (z < kMillsCutover) return std::log(0.5 * std::erfc(z * kInvSqrt2));
  return -0.5 * z * z - kLogSqrt2Pi + log_mills_ratio(z);
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite argument");
}

// Lower-tail normal quantile, rational approximation (relative error ~1e-9).
double acklam_lower_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double kLow = 0.02425;
  if (p < kLow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - kLow) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double log_poisson_pmf(double lambda, double j) {
  return -lambda + j * std::log(lambda) - std::lgamma(j + 1.0);
}

}  // namespace

NullFamily NullFamily::chisq(int nu) {
  if (nu < 1) throw DomainError("chi-squared degrees of freedom must be >= 1");
  return {Kind::kChiSq, nu, 0.0};
}

NullFamily NullFamily::subbotin(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("Subbotin shape must be > 0");
  return {Kind::kSubbotin, 0, gamma};
}

NullFamily NullFamily::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? "" : text.substr(colon + 1);
  if (head == "gaussian" && arg.empty()) return gaussian();
  if (head == "exp2" && arg.empty()) return exp2();
  if (head == "chisq") {
    int nu = 0;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), nu);
    if (ec != std::errc() || ptr != arg.data() + arg.size()) {
      throw ConfigError("bad chi-squared family '" + std::string(text) + "'");
    }
    return chisq(nu);
  }
  if (head == "subbotin") {
    std::string s(arg);
    char* end = nullptr;
    const double gamma = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
      throw ConfigError("bad Subbotin family '" + std::string(text) + "'");
    }
    return subbotin(gamma);
  }
  throw ConfigError("unknown family '" + std::string(text) + "'");
}

std::string NullFamily::to_string() const {
  switch (kind) {
    case Kind::kGaussian:
      return "gaussian";
    case Kind::kChiSq:
      return "chisq:" + std::to_string(dof);
    case Kind::kExp2:
      return "exp2";
    case Kind::kSubbotin: {
      char buf[64];
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, shape);
      return "subbotin:" + std::string(buf, ptr);
    }
  }
  return "unknown";
}

TailProb TailProb::from_log(double log_p) {
  if (log_p > 0.0) log_p = 0.0;
  return {log_p, std::exp(log_p)};
}

TailProb gaussian_upper_tail(double z) {
  require_finite(z, "gaussian_upper_tail");
  if (z >= 0.0) {
    const double log_p = log_gaussian_tail_nonneg(z);
    if (z < kMillsCutover) return {log_p, 0.5 * std::erfc(z * kInvSqrt2)};
    return TailProb::from_log(log_p);
  }
  const double q = std::exp(log_gaussian_tail_nonneg(-z));
  return {std::log1p(-q), 1.0 - q};
}

double gaussian_upper_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("gaussian_upper_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  double z = -acklam_lower_quantile(p);
  const double log_target = std::log(p);
  // Newton on log Q(z) - log p; d/dz log Q = -phi(z)/Q(z).
  for (int step = 0; step < 2; ++step) {
    const TailProb tail = gaussian_upper_tail(z);
    const double inv_hazard = std::exp(tail.log_p - gaussian_log_density(z));
    z += (tail.log_p - log_target) * inv_hazard;
  }
  return z;
}

double gaussian_log_density(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double log_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw DomainError("log_gamma_q: shape must be > 0");
  if (std::isnan(x)) throw DomainError("log_gamma_q: NaN argument");
  if (x <= 0.0) return 0.0;
  if (x == std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
  const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    // Series for P(a, x); Q = 1 - P is bounded away from 0 here.
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 1000000; ++k) {
      term *= x / (a + k);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    const double p = std::exp(log_prefix + std::log(sum));
    return std::log1p(-std::min(p, 1.0));
  }
  // Continued fraction for Q (modified Lentz).
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return log_prefix + std::log(h);
}

TailProb noncentral_chisq_upper_tail(int nu, double delta, double x) {
  if (nu < 1) throw DomainError("noncentral_chisq_upper_tail: nu must be >= 1");
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw DomainError("noncentral_chisq_upper_tail: delta must be finite and >= 0");
  }
  if (!(x >= 0.0)) throw DomainError("noncentral_chisq_upper_tail: x must be >= 0");
  const double half_nu = 0.5 * nu;
  const double half_x = 0.5 * x;
  const double lambda = 0.5 * delta;
  if (lambda == 0.0) return TailProb::from_log(log_gamma_q(half_nu, half_x));

  // Poisson(lambda) mixture of central chi^2_{nu+2j} tails, summed outward
  // from the modal index. Q_{nu+2j}(x) increases with j, which gives
  // rigorous bounds on the omitted mass in both directions.
  constexpr double kLogRelTol = -36.8;  // log(1e-16)
  const double mode = std::floor(lambda);
  auto log_term = [&](double j) {
    return log_poisson_pmf(lambda, j) + log_gamma_q(half_nu + j, half_x);
  };
  double log_sum = log_term(mode);

  for (double j = mode + 1.0;; j += 1.0) {
    log_sum = log_add(log_sum, log_term(j));
    // sum_{k>j} w_k <= w_{j+1} / (1 - lambda/(j+2)).
    const double bound = log_poisson_pmf(lambda, j + 1.0) - std::log1p(-lambda / (j + 2.0));
    if (bound < log_sum + kLogRelTol) break;
    if (j > mode + 1e6) break;
  }
  for (double j = mode; j > 0.0; j -= 1.0) {
    const double next = log_term(j - 1.0);
    // sum_{k<j} w_k Q_k <= w_{j-1} Q_{j-1} / (1 - (j-1)/lambda).
    const double bound = next - std::log1p(-(j - 1.0) / lambda);
    log_sum = log_add(log_sum, next);
    if (bound < log_sum + kLogRelTol) break;
  }
  return TailProb::from_log(log_sum);
}

TailProb noncentral_chisq_tail_asymptotic(int nu, double r, double q, double n) {
  if (nu < 1) throw DomainError("noncentral_chisq_tail_asymptotic: nu must be >= 1");
  if (!(r > 0.0 && r < q && q < 1.0)) {
    throw DomainError("noncentral_chisq_tail_asymptotic: requires 0 < r < q < 1");
  }
  if (!(n >= 3.0)) throw DomainError("noncentral_chisq_tail_asymptotic: n must be >= 3");
  const double log_n = std::log(n);
  const double gap = std::sqrt(q) - std::sqrt(r);
  const double log_p = -0.5 * std::log(2.0 * std::numbers::pi * log_n) +
                       0.25 * (1.0 - nu) * std::log(r / q) -
                       std::log(std::sqrt(2.0 * q) - std::sqrt(2.0 * r)) - gap * gap * log_n;
  return TailProb::from_log(log_p);
}

TailProb subbotin_upper_tail(double gamma, double x) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("subbotin_upper_tail: gamma must be > 0");
  require_finite(x, "subbotin_upper_tail");
  const double ax = std::abs(x);
  const double scaled = ax == 0.0 ? 0.0 : std::exp(gamma * std::log(ax)) / gamma;
  const double log_half_q = log_gamma_q(1.0 / gamma, scaled) - std::numbers::ln2;
  if (x >= 0.0) return TailProb::from_log(log_half_q);
  const double q = std::exp(log_half_q);
  return {std::log1p(-q), 1.0 - q};
}

TailProb family_upper_tail(const NullFamily& family, double x) {
  switch (family.kind) {
    case NullFamily::Kind::kGaussian:
      return gaussian_upper_tail(x);
    case NullFamily::Kind::kChiSq:
      require_finite(x, "family_upper_tail");
      if (x <= 0.0) return {0.0, 1.0};
      return noncentral_chisq_upper_tail(family.dof, 0.0, x);
    case NullFamily::Kind::kExp2:
      require_finite(x, "family_upper_tail");
      if (x <= 0.0) return {0.0, 1.0};
      return TailProb::from_log(-0.5 * x);
    case NullFamily::Kind::kSubbotin:
      return subbotin_upper_tail(family.shape, x);
  }
  throw DomainError("family_upper_tail: unknown family");
}

double informative_threshold(const NullFamily& family, double q, double n) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("informative_threshold: q must lie in (0, 1]");
  if (!(n >= 3.0)) throw DomainError("informative_threshold: n must be >= 3");
  const double log_n = std::log(n);
  switch (family.kind) {
    case NullFamily::Kind::kGaussian:
      return std::sqrt(2.0 * q * log_n);
    case NullFamily::Kind::kChiSq:
    case NullFamily::Kind::kExp2:
      return 2.0 * q * log_n;
    case NullFamily::Kind::kSubbotin:
      return std::pow(family.shape * q * log_n, 1.0 / family.shape);
  }
  throw DomainError("informative_threshold: unknown family");
}

double calibrated_amplitude(const NullFamily& family, double r, double n) {
  if (!(r > 0.0)) throw DomainError("calibrated_amplitude: r must be > 0");
  if (!(n >= 2.0)) throw DomainError("calibrated_amplitude: n must be >= 2");
  const double log_n = std::log(n);
  switch (family.kind) {
    case NullFamily::Kind::kGaussian:
      return std::sqrt(2.0 * r * log_n);
    case NullFamily::Kind::kChiSq:
    case NullFamily::Kind::kExp2:
      return 2.0 * r * log_n;
    case NullFamily::Kind::kSubbotin:
      return std::pow(family.shape * r * log_n, 1.0 / family.shape);
  }
  throw DomainError("calibrated_amplitude: unknown family");
}

double log_density_ratio(const NullFamily& family, double amplitude, double x) {
  require_finite(x, "log_density_ratio");
  switch (family.kind) {
    case NullFamily::Kind::kGaussian:
      return amplitude * x - 0.5 * amplitude * amplitude;
    case NullFamily::Kind::kSubbotin: {
      const double g = family.shape;
      return (std::pow(std::abs(x), g) - std::pow(std::abs(x - amplitude), g)) / g;
    }
    case NullFamily::Kind::kChiSq:
    case NullFamily::Kind::kExp2: {
      if (x < 0.0) throw DomainError("log_density_ratio: chi-squared observation must be >= 0");
      const double half_nu = family.kind == NullFamily::Kind::kExp2 ? 1.0 : 0.5 * family.dof;
      const double lambda = 0.5 * amplitude;
      if (lambda == 0.0) return 0.0;
      if (x == 0.0) return -lambda;
      // f1/f0 = e^{-lambda} sum_j (lambda x / 2)^j / j! * Gamma(nu/2) / Gamma(nu/2 + j).
      const double log_z = std::log(lambda * x * 0.5);
      const double lg0 = std::lgamma(half_nu);
      double log_sum = -std::numeric_limits<double>::infinity();
      double peak = -std::numeric_limits<double>::infinity();
      for (double j = 0.0; j < 1e7; j += 1.0) {
        const double t = j * log_z - std::lgamma(j + 1.0) + lg0 - std::lgamma(half_nu + j);
        log_sum = log_add(log_sum, t);
        peak = std::max(peak, t);
        if (t < peak && t < log_sum - 40.0) break;
      }
      return log_sum - lambda;
    }
  }
  throw DomainError("log_density_ratio: unknown family");
}

}  // namespace sparse_detect
