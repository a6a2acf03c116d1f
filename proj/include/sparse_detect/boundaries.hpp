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

#ifndef SPARSE_DETECT_BOUNDARIES_HPP_
#define SPARSE_DETECT_BOUNDARIES_HPP_

#include <cstdint>
#include <string_view>

#include "sparse_detect/tail_math.hpp"

namespace sparse_detect {

// Sparsity exponents are accepted on [1/2, 1); the value at 1/2 is the
// one-sided limit of each curve.
double rho_star(double beta);
double rho_max(double beta);
double rho_fdr(double beta);
double rho_bj(double beta);
double rho_exp(double beta);
double rho_chisq(double beta);
double rho_subbotin(double gamma, double beta);
double subbotin_bonferroni_boundary(double gamma, double beta);

// Growth exponent of the expected standardized exceedance at level q.
double ev_exponent(double q, double beta, double r, double gamma);
double most_informative_q(double gamma, double r);

struct QInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// Levels q whose exceedance statistic grows under the Gaussian model.
// Throws DomainError when r <= rho_star(beta).
QInterval informative_q_interval(double beta, double r);

double ev_n_table1(double n, double r, double beta);

struct BoundaryQuery {
  NullFamily family;
  double beta = 0.75;
  double r = 0.25;
};

enum class RegionLabel { kUndetectable, kDetectable, kOnBoundary };
std::string_view to_string(RegionLabel label);

inline constexpr double kBoundaryBand = 1e-12;

double detection_boundary(const NullFamily& family, double beta);
RegionLabel classify_region(const BoundaryQuery& query);

}  // namespace sparse_detect

#endif  // SPARSE_DETECT_BOUNDARIES_HPP_
