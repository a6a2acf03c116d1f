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

// Upper-tail probabilities, quantiles and densities for the component null
// distributions: standard normal, central/noncentral chi-squared, Exp(2) and
// the generalized Gaussian (Subbotin) family. Everything is carried in log
// space so that thresholds of order 2 log n stay representable for n up to
// 10^12 and beyond.

#ifndef SPARSE_DETECT_TAIL_MATH_HPP_
#define SPARSE_DETECT_TAIL_MATH_HPP_

#include <cstdint>
#include <string>
#include <string_view>

namespace sparse_detect {

struct NullFamily {
  enum class Kind { kGaussian, kChiSq, kExp2, kSubbotin };

  Kind kind = Kind::kGaussian;
  int dof = 0;         // ChiSq only, >= 1
  double shape = 0.0;  // Subbotin only, > 0

  static NullFamily gaussian() { return {Kind::kGaussian, 0, 0.0}; }
  static NullFamily chisq(int nu);
  static NullFamily exp2() { return {Kind::kExp2, 0, 0.0}; }
  static NullFamily subbotin(double gamma);

  // "gaussian", "chisq:<nu>", "exp2", "subbotin:<gamma>".
  static NullFamily parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const NullFamily&, const NullFamily&) = default;
};

// An upper-tail probability. log_p is authoritative; p = exp(log_p) and may
// underflow to zero below ~1e-308.
struct TailProb {
  double log_p = 0.0;
  double p = 1.0;

  static TailProb from_log(double log_p);
};

TailProb gaussian_upper_tail(double z);
double gaussian_upper_quantile(double p);
double gaussian_log_density(double x);

// log Q(a, x), Q the regularized upper incomplete gamma function.
double log_gamma_q(double a, double x);

// P{chi^2_nu(delta) > x}, delta the noncentrality (sum of squared means).
TailProb noncentral_chisq_upper_tail(int nu, double delta, double x);

// Large-n approximation of P{chi^2_nu(2 r log n) >= 2 q log n}, 0 < r < q < 1.
TailProb noncentral_chisq_tail_asymptotic(int nu, double r, double q, double n);

// P{GN_gamma(0) > x} for density exp(-|x|^gamma / gamma) / C_gamma.
TailProb subbotin_upper_tail(double gamma, double x);

TailProb family_upper_tail(const NullFamily& family, double x);

// Threshold whose null exceedance probability is of order n^{-q}:
// sqrt(2 q log n), 2 q log n, or (gamma q log n)^{1/gamma}.
double informative_threshold(const NullFamily& family, double q, double n);

// Amplitude calibration for strength exponent r: sqrt(2 r log n) (Gaussian),
// 2 r log n (chi-squared noncentrality), (gamma r log n)^{1/gamma} (Subbotin).
double calibrated_amplitude(const NullFamily& family, double r, double n);

// log f1(x)/f0(x) where f0 is the family null density and f1 the same
// family shifted by `amplitude` (mean shift, or noncentrality for chi^2).
double log_density_ratio(const NullFamily& family, double amplitude, double x);

}  // namespace sparse_detect

#endif  // SPARSE_DETECT_TAIL_MATH_HPP_
