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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sparse_detect/boundaries.hpp"
#include "sparse_detect/calibration.hpp"
#include "sparse_detect/cli.hpp"
#include "sparse_detect/simulate.hpp"
#include "sparse_detect/statistics.hpp"
#include "sparse_detect/tail_math.hpp"
#include "support/two_sample.hpp"

namespace sparse_detect {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

// Reference cells of the expected-exceedance table, row by row.
constexpr double kTable1[3][5] = {{2.2916, 2.3579, 2.4139, 2.4622, 2.5046},
                                  {2.7582, 3.3411, 4.0680, 4.9728, 6.0976},
                                  {1.6439, 1.7748, 1.9259, 2.0982, 2.2931}};

Outcome table1_reproduction() {
  std::istringstream in;
  std::ostringstream out;
  std::ostringstream err;
  if (cli::run_cli({"table1"}, in, out, err) != cli::kExitOk) return {false, "table1 command failed"};
  std::istringstream lines(out.str());
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(lines, line)) {
    std::vector<double> cells;
    std::istringstream fields(line);
    std::string token;
    while (fields >> token) {
      char* end = nullptr;
      const double v = std::strtod(token.c_str(), &end);
      if (end != token.c_str() && *end == '\0' && token.find('.') != std::string::npos) cells.push_back(v);
    }
    if (cells.size() == 5) rows.push_back(cells);
  }
  if (rows.size() != 3) return {false, format("parsed %zu numeric rows", rows.size())};
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 5; ++j) worst = std::max(worst, std::abs(rows[i][j] - kTable1[i][j]));
  }
  return {worst <= 1e-4 + 1e-12, format("15 cells, max |diff| = %.2e (tol 1e-4)", worst)};
}

Outcome boundary_landmarks() {
  bool ok = true;
  const double star = rho_star(0.75);
  const double lower_branch = 0.75 - 0.5;
  const double upper_branch = std::pow(1.0 - std::sqrt(0.25), 2);
  ok &= star == 0.25 && lower_branch == 0.25 && upper_branch == 0.25;
  const double max_edge = rho_max(0.5 + 1e-12);
  const double max_limit = std::pow(2.0 - std::sqrt(2.0), 2) / 4.0;
  ok &= std::abs(max_edge - 0.085786) <= 1e-6 && std::abs(max_edge - max_limit) <= 1e-6;
  double subbotin_gap = 0.0;
  double gamma_spread = 0.0;
  for (int i = 1; i <= 99; ++i) {
    const double beta = 0.5 + 0.5 * i / 100.0;
    subbotin_gap = std::max(subbotin_gap, std::abs(rho_subbotin(2.0, beta) - rho_star(beta)));
    const double base = rho_subbotin(1.0, beta);
    for (double gamma : {0.25, 0.5}) gamma_spread = std::max(gamma_spread, std::abs(rho_subbotin(gamma, beta) - base));
  }
  ok &= subbotin_gap <= 1e-12 && gamma_spread == 0.0;
  return {ok, format("rho_star(0.75)=%.17g, rho_max(1/2+)=%.8f, gamma=2 gap %.1e, gamma<=1 spread %.1e", star,
                     max_edge, subbotin_gap, gamma_spread)};
}

Outcome informative_q_equivalence() {
  constexpr int kGrid = 10000;
  const auto grid_search = [&](double beta, double r) {
    double best = -std::numeric_limits<double>::infinity();
    double arg = 0.0;
    for (int k = 1; k <= kGrid; ++k) {
      const double q = static_cast<double>(k) / kGrid;
      const double v = ev_exponent(q, beta, r, 2.0);
      if (v > best) {
        best = v;
        arg = q;
      }
    }
    return std::pair{arg, best};
  };
  std::mt19937_64 engine(20260101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int argmax_misses = 0;
  for (int checked = 0; checked < 50;) {
    const double beta = 0.5 + 0.5 * unit(engine);
    const double r = unit(engine);
    if (beta >= 1.0 || r <= 0.0 || r <= rho_star(beta)) continue;
    if (std::abs(grid_search(beta, r).first - most_informative_q(2.0, r)) > 1.0 / kGrid + 1e-12) ++argmax_misses;
    ++checked;
  }
  int sign_misses = 0;
  int compared = 0;
  for (int i = 1; i <= 50; ++i) {
    const double beta = 0.5 + 0.5 * i / 51.0;
    for (int j = 1; j <= 50; ++j) {
      const double r = j / 51.0;
      if (std::abs(r - rho_star(beta)) < 1e-3) continue;
      const bool detectable = classify_region({NullFamily::gaussian(), beta, r}) == RegionLabel::kDetectable;
      if ((grid_search(beta, r).second > 0.0) != detectable) ++sign_misses;
      ++compared;
    }
  }
  return {argmax_misses == 0 && sign_misses == 0,
          format("argmax misses %d/50, supremum-sign mismatches %d/%d", argmax_misses, sign_misses, compared)};
}

Outcome null_coverage() {
  constexpr std::size_t n = 1000;
  constexpr std::size_t reps = 2000;
  const std::vector<StatisticId> ids{StatisticId::kHcStar, StatisticId::kHcPlus, StatisticId::kBerkJonesPlus,
                                     StatisticId::kFisher, StatisticId::kMax,    StatisticId::kFdrMinRatio};
  bool ok = true;
  std::string detail;
  for (StatisticId id : ids) {
    const CriticalEntry entry = mc_critical_value(id, n, 0.5, 0.05, reps, 4001);
    const std::vector<double> fresh = mc_null_distribution(id, n, 0.5, reps, 4002);
    const auto rejected = std::count_if(fresh.begin(), fresh.end(),
                                        [&](double v) { return rejects(id, v, entry.critical); });
    const double rate = static_cast<double>(rejected) / reps;
    ok &= std::abs(rate - 0.05) <= 0.02;
    detail += format("%s=%.4f ", std::string(to_string(id)).c_str(), rate);
  }
  return {ok, detail + "(target 0.05 +/- 0.02)"};
}

constexpr double kKeep = 0.1;

Outcome limit_law_cross_check(double& hc_plus_critical_1e6) {
  const NullSampling tail = NullSampling::tail(kKeep);
  hc_plus_critical_1e6 = mc_critical_value(StatisticId::kHcPlus, 1000000, 0.5, 0.05, 2000, 5001, tail).critical;
  const double asymptotic = asymptotic_critical_hc_plus(1e6, 0.05);
  const double rel = std::abs(hc_plus_critical_1e6 - asymptotic) / asymptotic;
  const double star = empirical_quantile(mc_null_distribution(StatisticId::kHcStar, 1000, 0.5, 10000, 5002), 0.999);
  const double plus = empirical_quantile(mc_null_distribution(StatisticId::kHcPlus, 1000, 0.5, 10000, 5002), 0.999);
  return {rel <= 0.15 && star > plus,
          format("n=1e6 MC %.4f vs asymptotic %.4f (rel %.3f, tol 0.15); n=1e3 99.9%%: hc_star %.3f > hc_plus %.3f",
                 hc_plus_critical_1e6, asymptotic, rel, star, plus)};
}

Outcome regime_separation(double hc_plus_critical) {
  ExperimentConfig config;
  config.spec = MixtureSpec::from_exponents(NullFamily::gaussian(), 1000000, 0.5, 0.15);
  config.statistics = {StatisticId::kHcPlus};
  config.reps = 100;
  config.seed = 6001;
  config.sampling = NullSampling::tail(kKeep);
  const HistogramResult h = run_histogram_experiment(config);
  const double p_mw = testing::mann_whitney_greater_pvalue(h.null_values[0], h.alt_values[0]);
  const auto hits = std::count_if(h.alt_values[0].begin(), h.alt_values[0].end(),
                                  [&](double v) { return v > hc_plus_critical; });
  const double power = static_cast<double>(hits) / 100.0;
  return {p_mw < 1e-4 && power >= 0.5,
          format("Mann-Whitney p = %.3g (< 1e-4), power at MC 5%% critical %.4f = %.2f (>= 0.5)", p_mw,
                 hc_plus_critical, power)};
}

Outcome bonferroni_gap() {
  std::string detail;
  for (std::size_t n : {std::size_t{1000000}, std::size_t{10000000}}) {
    const NullSampling tail = NullSampling::tail(kKeep);
    const auto key_n = static_cast<std::int64_t>(n);
    CriticalTable table;
    for (StatisticId id : {StatisticId::kHcPlus, StatisticId::kMax}) {
      table.insert({calibration_name(id, tail), key_n, 0.5, 0.05},
                   mc_critical_value(id, n, 0.5, 0.05, 2000, 7001 + static_cast<std::uint64_t>(id), tail));
    }
    ExperimentConfig config;
    config.spec = MixtureSpec::from_values(NullFamily::gaussian(), key_n, 0.0, 0.0);
    config.statistics = {StatisticId::kHcPlus, StatisticId::kMax};
    config.reps = 200;
    config.seed = 7100;
    config.sampling = tail;
    const std::vector<GridPoint> grid{{0.55, 0.12}};
    const PowerReport report = run_power_experiment(grid, config, table);
    const double hc = report.cells[0].results[0].power;
    const double mx = report.cells[0].results[1].power;
    detail += format("n=%.0e: hc_plus %.3f, max %.3f, gap %.3f; ", static_cast<double>(n), hc, mx, hc - mx);
    if (hc - mx >= 0.10) return {true, detail + "(need >= 0.10)"};
  }
  return {false, detail + "(need >= 0.10)"};
}

Outcome kplus_inequalities() {
  std::mt19937_64 engine(8001);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int violations = 0;
  int drawn = 0;
  while (drawn < 100000) {
    const double t = 0.5 * unit(engine);
    const double x = t * unit(engine);
    if (!(x > 0.0) || !(x < t)) continue;
    ++drawn;
    if (!(kplus(t, x) < 0.5 * (t - x) * (t - x) / (x * (1.0 - x)))) ++violations;
  }
  if (kplus(0.3, 0.3) != 0.0) ++violations;

  std::uniform_int_distribution<std::size_t> size(2, 400);
  std::normal_distribution<double> normal;
  int dominance_failures = 0;
  int vectors = 0;
  while (vectors < 1000) {
    const std::size_t n = size(engine);
    const double fraction = 0.3 * unit(engine);
    const double shift = 6.0 * unit(engine);
    std::vector<double> p(n);
    for (double& v : p) {
      const double z = normal(engine) + (unit(engine) < fraction ? shift : 0.0);
      v = std::max(0.5 * std::erfc(z / std::sqrt(2.0)), 1e-300);
    }
    const StatResult bj = berk_jones_plus(PValueVector(p));
    std::sort(p.begin(), p.end());
    if (!bj.arg_index || p[*bj.arg_index - 1] > 0.5) continue;
    ++vectors;
    double hc_max = 0.0;
    const double nd = static_cast<double>(n);
    for (std::size_t i = 1; i <= n / 2; ++i) {
      const double pi = p[i - 1];
      hc_max = std::max(hc_max, std::sqrt(nd) * (static_cast<double>(i) / nd - pi) / std::sqrt(pi * (1.0 - pi)));
    }
    if (bj.value > 0.5 * hc_max * hc_max * (1.0 + 1e-12)) ++dominance_failures;
  }
  return {violations == 0 && dominance_failures == 0,
          format("quadratic bound violations %d/100000, dominance failures %d/1000", violations, dominance_failures)};
}

Outcome noncentral_asymptotics() {
  const double q = 0.5;
  const double r = 0.1;
  std::vector<double> ratios;
  for (double n : {1e4, 1e6, 1e8, 1e10, 1e12}) {
    const double log_n = std::log(n);
    const double exact = noncentral_chisq_upper_tail(2, 2.0 * r * log_n, 2.0 * q * log_n).log_p;
    ratios.push_back(std::exp(exact - noncentral_chisq_tail_asymptotic(2, r, q, n).log_p));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    monotone &= std::abs(ratios[i] - 1.0) < std::abs(ratios[i - 1] - 1.0);
  }
  const double last = ratios.back();
  return {last >= 0.8 && last <= 1.25 && monotone,
          format("ratios %.4f %.4f %.4f %.4f %.4f, monotone approach %s", ratios[0], ratios[1], ratios[2], ratios[3],
                 ratios[4], monotone ? "yes" : "no")};
}

Outcome tail_sampler_fidelity() {
  const TailSample approx = tail_sample_gaussian(100000, 0.01, std::uint64_t{10001});
  Rng rng(10002);
  const TailSample exact = exact_tail_gaussian(100000, 1000, rng);
  const double p_ks = testing::ks_pvalue(approx.top_values, exact.top_values);
  double worst = 0.0;
  for (double depth : {1e-3, 1e-6, 1e-9}) {
    const double z = gaussian_upper_quantile(depth);
    worst = std::max(worst, std::abs(tail_expansion_quantile(depth) - z) / z);
  }
  return {p_ks > 0.01 && worst <= 2e-2,
          format("KS p = %.3f (> 0.01), max expansion rel error %.4f (<= 0.02)", p_ks, worst)};
}

}  // namespace
}  // namespace sparse_detect

int main() {
  using namespace sparse_detect;
  double hc_plus_critical = 0.0;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"table1 reproduction", table1_reproduction},
      {"boundary landmarks", boundary_landmarks},
      {"informative-q equivalence", informative_q_equivalence},
      {"null calibration coverage", null_coverage},
      {"limit-law cross-check", [&] { return limit_law_cross_check(hc_plus_critical); }},
      {"regime separation", [&] { return regime_separation(hc_plus_critical); }},
      {"bonferroni gap", bonferroni_gap},
      {"K+ inequalities", kplus_inequalities},
      {"noncentral asymptotics", noncentral_asymptotics},
      {"tail-sampler fidelity", tail_sampler_fidelity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
