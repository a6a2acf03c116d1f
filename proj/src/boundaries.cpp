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

#include "sparse_detect/boundaries.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sparse_detect/errors.hpp"

namespace sparse_detect {
namespace {

void check_beta(double beta, const char* where) {
  if (!(beta >= 0.5 && beta < 1.0)) {
    throw DomainError(std::string(where) + ": beta must lie in [1/2, 1)");
  }
}

void check_gamma(double gamma, const char* where) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw DomainError(std::string(where) + ": gamma must be a positive finite number");
  }
}

void check_r(double r, const char* where) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError(std::string(where) + ": r must lie in (0, 1)");
}

}  // namespace

double rho_star(double beta) {
  check_beta(beta, "rho_star");
  if (beta <= 0.75) return beta - 0.5;
  const double s = 1.0 - std::sqrt(1.0 - beta);
  return s * s;
}

double rho_max(double beta) {
  check_beta(beta, "rho_max");
  const double s = 1.0 - std::sqrt(1.0 - beta);
  return s * s;
}

double rho_fdr(double beta) { return rho_max(beta); }
double rho_bj(double beta) { return rho_star(beta); }
double rho_exp(double beta) { return rho_star(beta); }
double rho_chisq(double beta) { return rho_star(beta); }

double rho_subbotin(double gamma, double beta) {
  check_gamma(gamma, "rho_subbotin");
  check_beta(beta, "rho_subbotin");
  if (gamma <= 1.0) return 2.0 * (beta - 0.5);
  const double breakpoint = 1.0 - std::pow(2.0, -gamma / (gamma - 1.0));
  if (beta <= breakpoint) {
    return std::pow(std::pow(2.0, 1.0 / (gamma - 1.0)) - 1.0, gamma - 1.0) * (beta - 0.5);
  }
  return std::pow(1.0 - std::pow(1.0 - beta, 1.0 / gamma), gamma);
}

double subbotin_bonferroni_boundary(double gamma, double beta) {
  check_gamma(gamma, "subbotin_bonferroni_boundary");
  if (gamma > 1.0) throw DomainError("subbotin_bonferroni_boundary: gamma must lie in (0, 1]");
  check_beta(beta, "subbotin_bonferroni_boundary");
  return std::pow(1.0 - std::pow(1.0 - beta, 1.0 / gamma), gamma);
}

double ev_exponent(double q, double beta, double r, double gamma) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("ev_exponent: q must lie in (0, 1]");
  check_beta(beta, "ev_exponent");
  check_r(r, "ev_exponent");
  check_gamma(gamma, "ev_exponent");
  const double gap = std::max(std::pow(q, 1.0 / gamma) - std::pow(r, 1.0 / gamma), 0.0);
  return 0.5 * (1.0 + q) - beta - std::pow(gap, gamma);
}

double most_informative_q(double gamma, double r) {
  check_gamma(gamma, "most_informative_q");
  check_r(r, "most_informative_q");
  if (gamma <= 1.0) return r;
  if (gamma == 2.0) return r < 0.25 ? 4.0 * r : 1.0;
  const double r_gamma = std::pow(1.0 - std::pow(2.0, -1.0 / (gamma - 1.0)), gamma);
  return r < r_gamma ? r / r_gamma : 1.0;
}

QInterval informative_q_interval(double beta, double r) {
  check_r(r, "informative_q_interval");
  if (!(r > rho_star(beta))) {
    throw DomainError("informative_q_interval: empty interval, r must exceed rho_star(beta)");
  }
  const double center = 2.0 * std::sqrt(r);
  const double half_width = std::sqrt(2.0 * (r - beta + 0.5));
  const double lo = std::max(center - half_width, 0.0);
  const double hi = center + half_width;
  return {lo * lo, std::min(hi * hi, 1.0)};
}

double ev_n_table1(double n, double r, double beta) {
  if (!(n >= 3.0) || !std::isfinite(n)) throw DomainError("ev_n_table1: n must be >= 3");
  if (!(r > 0.0 && r < 0.25)) throw DomainError("ev_n_table1: r must lie in (0, 1/4)");
  check_beta(beta, "ev_n_table1");
  const double log_n = std::log(n);
  return std::exp((r - (beta - 0.5)) * log_n - 0.25 * std::log(std::numbers::pi * r * log_n));
}

std::string_view to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::kUndetectable:
      return "undetectable";
    case RegionLabel::kDetectable:
      return "detectable";
    case RegionLabel::kOnBoundary:
      return "on_boundary";
  }
  return "unknown";
}

double detection_boundary(const NullFamily& family, double beta) {
  switch (family.kind) {
    case NullFamily::Kind::kGaussian:
      return rho_star(beta);
    case NullFamily::Kind::kChiSq:
      return rho_chisq(beta);
    case NullFamily::Kind::kExp2:
      return rho_exp(beta);
    case NullFamily::Kind::kSubbotin:
      return rho_subbotin(family.shape, beta);
  }
  throw DomainError("detection_boundary: unknown family");
}

RegionLabel classify_region(const BoundaryQuery& query) {
  if (!(query.beta > 0.5 && query.beta < 1.0)) {
    throw DomainError("classify_region: beta must lie in (1/2, 1)");
  }
  check_r(query.r, "classify_region");
  const double rho = detection_boundary(query.family, query.beta);
  if (std::abs(query.r - rho) <= kBoundaryBand) return RegionLabel::kOnBoundary;
  return query.r > rho ? RegionLabel::kDetectable : RegionLabel::kUndetectable;
}

}  // namespace sparse_detect
