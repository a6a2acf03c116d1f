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

#include "sparse_detect/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sparse_detect/boundaries.hpp"
#include "sparse_detect/calibration.hpp"
#include "sparse_detect/errors.hpp"
#include "sparse_detect/simulate.hpp"
#include "sparse_detect/statistics.hpp"

namespace sparse_detect::cli {
namespace {

using Json = nlohmann::ordered_json;

std::string fmt(double x) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, result.ptr);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::uint64_t default_seed() {
  const char* env = std::getenv("SPARSE_DETECT_SEED");
  if (!env || !*env) return 1;
  const std::string text = trim(env);
  std::uint64_t seed = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("SPARSE_DETECT_SEED is not an unsigned integer: '" + text + "'");
  }
  return seed;
}

std::string iso_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

Json make_manifest(const std::string& command, Json config, std::uint64_t seed) {
  Json manifest;
  manifest["command"] = command;
  manifest["config"] = std::move(config);
  manifest["seed"] = seed;
  manifest["tool_version"] = kToolVersion;
  manifest["timestamp"] = iso_timestamp();
  return manifest;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("cannot open '" + path.string() + "' for writing");
  file << text;
  if (!file) throw ConfigError("failed writing '" + path.string() + "'");
}

void write_manifest(const std::string& path, const Json& manifest) {
  if (!path.empty()) write_text(path, manifest.dump(2) + "\n");
}

std::int64_t sample_size(double n) {
  if (!(n >= 1.0) || n > 1e12 || std::floor(n) != n) {
    throw ConfigError("--n must be a positive integer no larger than 1e12");
  }
  return static_cast<std::int64_t>(n);
}

NullFamily resolve_family(const std::string& text, std::optional<double> gamma) {
  if (text == "subbotin" && gamma) return NullFamily::subbotin(*gamma);
  try {
    NullFamily family = NullFamily::parse(text);
    if (gamma && family.kind != NullFamily::Kind::kSubbotin) {
      throw ConfigError("--gamma applies to the subbotin family only");
    }
    return family;
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t steps = 1;

  double at(std::size_t i) const {
    if (steps == 1) return lo;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
  }
};

Axis parse_axis(const std::string& text, const char* flag) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(trim(part));
  auto fail = [&] { throw ConfigError(std::string(flag) + " expects lo:hi:steps, got '" + text + "'"); };
  if (parts.size() != 3) fail();
  Axis axis;
  char* end = nullptr;
  axis.lo = std::strtod(parts[0].c_str(), &end);
  if (parts[0].empty() || *end) fail();
  axis.hi = std::strtod(parts[1].c_str(), &end);
  if (parts[1].empty() || *end) fail();
  const long long steps = std::strtoll(parts[2].c_str(), &end, 10);
  if (parts[2].empty() || *end || steps < 1) fail();
  axis.steps = static_cast<std::size_t>(steps);
  return axis;
}

// One value per line; '#' starts a comment and blank lines are skipped.
std::vector<double> read_values(std::istream& in, bool pvalues) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    char* end = nullptr;
    const double x = std::strtod(body.c_str(), &end);
    if (*end != '\0') throw InputError("line " + std::to_string(line_no) + ": not a number: '" + body + "'");
    if (!std::isfinite(x)) throw InputError("line " + std::to_string(line_no) + ": value is not finite");
    if (pvalues && !(x >= 0.0 && x <= 1.0)) {
      throw InputError("line " + std::to_string(line_no) + ": p-value " + body + " outside [0, 1]");
    }
    values.push_back(x);
  }
  if (values.empty()) throw InputError("input contains no values");
  return values;
}

StatResult compute_statistic(StatisticId id, const PValueVector& p, double alpha0, double alpha) {
  switch (id) {
    case StatisticId::kHcStar:
      return hc_star(p, alpha0);
    case StatisticId::kHcPlus:
      return hc_plus(p);
    case StatisticId::kBerkJonesPlus:
      return berk_jones_plus(p);
    case StatisticId::kFisher:
      return fisher_statistic(p);
    case StatisticId::kFdrMinRatio:
      return fdr_min_ratio(p, alpha);
    case StatisticId::kMax: {
      const PValueVector sorted = p.sorted();
      return {"max", evaluate_on_sorted(id, sorted.values(), p.size(), alpha0), 1, p.size(), {}};
    }
    case StatisticId::kOracleLrt:
      break;
  }
  throw ConfigError("oracle_lrt needs a fully specified alternative and is not available in 'test'");
}

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string manifest;

  std::uint64_t resolved_seed() const { return seed ? *seed : default_seed(); }
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool manifest_flag) {
  cmd->add_option("--seed", flags.seed, "RNG seed (default: $SPARSE_DETECT_SEED or 1)");
  cmd->add_option("--threads", flags.threads, "Worker threads, 0 = all cores");
  if (manifest_flag) cmd->add_option("--manifest", flags.manifest, "Write a run manifest to this path");
}

// ---------------------------------------------------------------- test

struct TestFlags {
  CommonFlags common;
  std::string input;
  std::string input_kind = "pvalues";
  std::string family;
  std::string stats = "hc_plus";
  double alpha = 0.05;
  double alpha0 = 0.5;
  std::string critical = "mc:2000";
};

int cmd_test(const TestFlags& f, std::istream& in, std::ostream& out) {
  if (f.input_kind != "pvalues" && f.input_kind != "zscores") {
    throw ConfigError("--input-kind must be pvalues or zscores");
  }
  const bool is_p = f.input_kind == "pvalues";
  if (!is_p && f.family.empty()) throw ConfigError("--family is required for zscores input");
  const std::vector<StatisticId> stats = parse_statistic_list(f.stats);
  if (!(f.alpha > 0.0 && f.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");

  enum class Mode { kMonteCarlo, kAsymptotic, kTable } mode;
  std::size_t mc_reps = 0;
  std::string table_path;
  if (f.critical.rfind("mc:", 0) == 0) {
    mode = Mode::kMonteCarlo;
    char* end = nullptr;
    const long long reps = std::strtoll(f.critical.c_str() + 3, &end, 10);
    if (*end || reps < 1) throw ConfigError("--critical mc:<reps> needs a positive integer");
    mc_reps = static_cast<std::size_t>(reps);
  } else if (f.critical == "asymptotic") {
    mode = Mode::kAsymptotic;
  } else if (f.critical.rfind("table:", 0) == 0) {
    mode = Mode::kTable;
    table_path = f.critical.substr(6);
  } else {
    throw ConfigError("--critical must be mc:<reps>, asymptotic or table:<path>");
  }
  if (mode == Mode::kAsymptotic) {
    for (StatisticId id : stats) {
      if (id != StatisticId::kHcPlus) {
        throw ConfigError("asymptotic critical values exist for hc_plus only");
      }
    }
  }
  const std::optional<NullFamily> family =
      f.family.empty() ? std::nullopt : std::optional(resolve_family(f.family, std::nullopt));

  std::vector<double> raw;
  if (f.input.empty() || f.input == "-") {
    raw = read_values(in, is_p);
  } else {
    std::ifstream file(f.input);
    if (!file) throw InputError("cannot open input '" + f.input + "'");
    raw = read_values(file, is_p);
  }
  const PValueVector p = is_p ? PValueVector(raw) : pvalues_from_observations(raw, *family);
  const std::size_t n = p.size();
  const std::uint64_t seed = f.common.resolved_seed();

  std::optional<CriticalTable> table;
  if (mode == Mode::kTable) table = load_table(table_path);

  Json report;
  report["n"] = n;
  report["input_kind"] = f.input_kind;
  report["alpha"] = f.alpha;
  report["alpha0"] = f.alpha0;
  Json& results = report["statistics"];
  results = Json::object();
  for (StatisticId id : stats) {
    StatResult result;
    try {
      result = compute_statistic(id, p, f.alpha0, f.alpha);
    } catch (const DomainError& e) {
      throw InputError(e.what());
    }
    double critical = 0.0;
    std::string source;
    switch (mode) {
      case Mode::kMonteCarlo:
        critical = mc_critical_value(id, n, f.alpha0, f.alpha, mc_reps, seed, {}, f.common.threads).critical;
        source = "monte_carlo";
        break;
      case Mode::kAsymptotic:
        critical = asymptotic_critical_hc_plus(static_cast<double>(n), f.alpha);
        source = "asymptotic";
        break;
      case Mode::kTable: {
        const CriticalEntry& entry =
            table->at({calibration_name(id), static_cast<std::int64_t>(n), f.alpha0, f.alpha});
        critical = entry.critical;
        source = std::string(to_string(entry.source));
        break;
      }
    }
    const bool empty_range = result.aux("empty_range") != 0.0;
    Json item;
    item["value"] = result.value;
    item["arg_index"] = result.arg_index ? Json(*result.arg_index) : Json(nullptr);
    item["critical"] = critical;
    item["reject"] = !empty_range && rejects(id, result.value, critical);
    item["source"] = source;
    results[std::string(to_string(id))] = std::move(item);
  }
  if (p.clamp_count() > 0) report["clamped"] = p.clamp_count();

  Json config;
  config["input"] = f.input.empty() ? "-" : f.input;
  config["input_kind"] = f.input_kind;
  config["family"] = family ? family->to_string() : "";
  config["stats"] = f.stats;
  config["alpha"] = f.alpha;
  config["alpha0"] = f.alpha0;
  config["critical"] = f.critical;
  report["manifest"] = make_manifest("test", config, seed);
  write_manifest(f.common.manifest, report["manifest"]);
  out << report.dump(2) << "\n";
  return kExitOk;
}

// ----------------------------------------------------------- calibrate

struct CalibrateFlags {
  CommonFlags common;
  std::string stat;
  double n = 0.0;
  std::vector<double> alphas;
  double alpha0 = 0.5;
  std::size_t reps = 2000;
  std::string out;
  std::string source = "mc";
  std::optional<double> tail;
};

int cmd_calibrate(const CalibrateFlags& f, std::ostream& err) {
  const StatisticId id = parse_statistic(f.stat);
  const std::int64_t n = sample_size(f.n);
  const NullSampling sampling = f.tail ? NullSampling::tail(*f.tail) : NullSampling::full();
  const std::uint64_t seed = f.common.resolved_seed();
  if (f.alphas.empty()) throw ConfigError("--alpha needs at least one level");
  for (double alpha : f.alphas) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("--alpha levels must lie in (0, 1)");
  }
  if (f.source != "mc" && f.source != "asymptotic") throw ConfigError("--source must be mc or asymptotic");
  const std::string name = calibration_name(id, sampling);

  CriticalTable table;
  if (std::filesystem::exists(f.out)) table = load_table(f.out);

  if (f.source == "asymptotic") {
    if (id != StatisticId::kHcPlus) throw ConfigError("asymptotic critical values exist for hc_plus only");
    for (double alpha : f.alphas) {
      table.insert({name, n, f.alpha0, alpha},
                   {asymptotic_critical_hc_plus(static_cast<double>(n), alpha), CriticalSource::kAsymptotic, 0, 0});
    }
  } else {
    for (double alpha : f.alphas) {
      if (static_cast<double>(f.reps) * alpha < 10.0) {
        throw ConfigError("reps * alpha must be >= 10 (alpha " + fmt(alpha) + ", reps " +
                          std::to_string(f.reps) + ")");
      }
    }
    if (f.reps < 100) throw ConfigError("Monte Carlo calibration needs reps >= 100");
    err << "calibrating " << name << " at n=" << n << " with " << f.reps << " replicates\n";
    const std::vector<double> replicates =
        mc_null_distribution(id, static_cast<std::size_t>(n), f.alpha0, f.reps, seed, sampling, f.common.threads);
    for (double alpha : f.alphas) {
      table.insert({name, n, f.alpha0, alpha},
                   {critical_from_replicates(replicates, alpha, rejection_direction(id)),
                    CriticalSource::kMonteCarlo, static_cast<std::int64_t>(f.reps), seed});
    }
  }
  save_table(table, f.out);

  Json config;
  config["stat"] = std::string(to_string(id));
  config["n"] = n;
  config["alpha"] = f.alphas;
  config["alpha0"] = f.alpha0;
  config["reps"] = f.reps;
  config["source"] = f.source;
  config["tail"] = f.tail ? Json(*f.tail) : Json(nullptr);
  config["out"] = f.out;
  write_manifest(f.out + ".manifest.json", make_manifest("calibrate", config, seed));
  return kExitOk;
}

// ------------------------------------------------------------ boundary

struct BoundaryFlags {
  CommonFlags common;
  std::string family = "gaussian";
  std::optional<double> gamma;
  std::vector<std::string> curves{"optimal"};
  std::size_t grid = 99;
};

int cmd_boundary(const BoundaryFlags& f, std::ostream& out) {
  const NullFamily family = resolve_family(f.family, f.gamma);
  const bool subbotin = family.kind == NullFamily::Kind::kSubbotin;
  if (f.grid < 2) throw ConfigError("--beta-grid needs at least 2 points");
  for (const std::string& curve : f.curves) {
    if (curve == "optimal") continue;
    if (curve == "max" || curve == "fdr" || curve == "bj") {
      if (subbotin) throw ConfigError("curve '" + curve + "' is defined for gaussian, chisq and exp2 only");
      continue;
    }
    if (curve == "bonferroni_subbotin") {
      if (!subbotin || family.shape > 1.0) {
        throw ConfigError("bonferroni_subbotin needs the subbotin family with gamma in (0, 1]");
      }
      continue;
    }
    throw ConfigError("unknown curve '" + curve + "'");
  }
  constexpr double kEdge = 1e-6;
  std::ostringstream csv;
  csv << "beta,curve,rho\n";
  for (std::size_t i = 0; i < f.grid; ++i) {
    const double beta = (0.5 + kEdge) + (0.5 - 2.0 * kEdge) * static_cast<double>(i) /
                                            static_cast<double>(f.grid - 1);
    for (const std::string& curve : f.curves) {
      double rho = 0.0;
      if (curve == "optimal") {
        rho = detection_boundary(family, beta);
      } else if (curve == "max") {
        rho = rho_max(beta);
      } else if (curve == "fdr") {
        rho = rho_fdr(beta);
      } else if (curve == "bj") {
        rho = rho_bj(beta);
      } else {
        rho = subbotin_bonferroni_boundary(family.shape, beta);
      }
      csv << fmt(beta) << "," << curve << "," << fmt(rho) << "\n";
    }
  }
  out << csv.str();
  Json config;
  config["family"] = family.to_string();
  config["curves"] = f.curves;
  config["beta_grid"] = f.grid;
  write_manifest(f.common.manifest, make_manifest("boundary", config, 0));
  return kExitOk;
}

// --------------------------------------------------------------- power

struct PowerFlags {
  CommonFlags common;
  std::string family = "gaussian";
  double n = 0.0;
  std::string beta;
  std::string r;
  std::string stats = "hc_plus,max";
  std::size_t reps = 200;
  double alpha = 0.05;
  double alpha0 = 0.5;
  std::string table;
  std::optional<double> tail;
  std::string out;
};

int cmd_power(const PowerFlags& f, std::ostream& out, std::ostream& err) {
  const NullFamily family = resolve_family(f.family, std::nullopt);
  const std::int64_t n = sample_size(f.n);
  const Axis beta_axis = parse_axis(f.beta, "--beta");
  const Axis r_axis = parse_axis(f.r, "--r");
  ExperimentConfig config;
  config.spec = MixtureSpec::from_values(family, n, 0.0, 0.0);
  config.statistics = parse_statistic_list(f.stats);
  config.level = f.alpha;
  config.alpha0 = f.alpha0;
  config.reps = f.reps;
  config.seed = f.common.resolved_seed();
  config.sampling = f.tail ? NullSampling::tail(*f.tail) : NullSampling::full();
  config.threads = f.common.threads;

  std::vector<GridPoint> grid;
  for (std::size_t i = 0; i < beta_axis.steps; ++i) {
    for (std::size_t j = 0; j < r_axis.steps; ++j) grid.push_back({beta_axis.at(i), r_axis.at(j)});
  }
  const CriticalTable table = f.table.empty() ? CriticalTable{} : load_table(f.table);
  err << "power grid: " << grid.size() << " cells x " << f.reps << " replicates\n";
  const PowerReport report = run_power_experiment(grid, config, table);

  std::ostringstream csv;
  csv << "beta,r,statistic,power,se\n";
  for (const PowerCell& cell : report.cells) {
    for (const StatisticPower& s : cell.results) {
      csv << fmt(cell.point.beta) << "," << fmt(cell.point.r) << "," << to_string(s.statistic) << ","
          << fmt(s.power) << "," << fmt(s.se) << "\n";
    }
  }
  Json echo;
  echo["family"] = family.to_string();
  echo["n"] = n;
  echo["beta"] = f.beta;
  echo["r"] = f.r;
  echo["stats"] = f.stats;
  echo["reps"] = f.reps;
  echo["alpha"] = f.alpha;
  echo["alpha0"] = f.alpha0;
  echo["table"] = f.table;
  echo["tail"] = f.tail ? Json(*f.tail) : Json(nullptr);
  Json sources = Json::object();
  if (!report.cells.empty()) {
    for (const StatisticPower& s : report.cells.front().results) sources[std::string(to_string(s.statistic))] = s.source;
  }
  echo["critical_sources"] = sources;
  const Json manifest = make_manifest("power", echo, config.seed);
  if (f.out.empty()) {
    out << csv.str();
    write_manifest(f.common.manifest, manifest);
  } else {
    write_text(f.out, csv.str());
    write_manifest(f.common.manifest.empty() ? f.out + ".manifest.json" : f.common.manifest, manifest);
  }
  return kExitOk;
}

// ------------------------------------------------------------ simulate

struct SimulateFlags {
  CommonFlags common;
  std::string family = "gaussian";
  double n = 0.0;
  std::optional<double> beta;
  std::optional<double> eps;
  std::optional<double> r;
  std::optional<double> amplitude;
  std::size_t reps = 100;
  std::string stats = "hc_star,hc_plus";
  double alpha0 = 0.5;
  std::optional<double> tail;
  std::string tail_generator = "exact";
  std::string out;
};

int cmd_simulate(const SimulateFlags& f, std::ostream& out) {
  const NullFamily family = resolve_family(f.family, std::nullopt);
  const std::int64_t n = sample_size(f.n);
  ExperimentConfig config;
  config.spec = MixtureSpec::make(family, n, f.beta, f.eps, f.r, f.amplitude);
  config.statistics = parse_statistic_list(f.stats);
  config.alpha0 = f.alpha0;
  config.reps = f.reps;
  config.seed = f.common.resolved_seed();
  config.sampling = f.tail ? NullSampling::tail(*f.tail) : NullSampling::full();
  config.threads = f.common.threads;
  if (f.tail_generator == "exact") {
    config.tail_generator = TailGenerator::kExactInverse;
  } else if (f.tail_generator == "expansion") {
    config.tail_generator = TailGenerator::kExpansion;
  } else {
    throw ConfigError("--tail-generator must be exact or expansion");
  }
  const HistogramResult result = run_histogram_experiment(config);

  std::ostringstream csv;
  csv << "replicate,hypothesis,statistic,value\n";
  for (std::size_t rep = 0; rep < config.reps; ++rep) {
    for (int h = 0; h < 2; ++h) {
      for (std::size_t s = 0; s < result.statistics.size(); ++s) {
        const double v = h == 0 ? result.null_values[s][rep] : result.alt_values[s][rep];
        csv << rep << "," << (h == 0 ? "null" : "alternative") << "," << to_string(result.statistics[s])
            << "," << fmt(v) << "\n";
      }
    }
  }
  Json echo;
  echo["family"] = family.to_string();
  echo["n"] = n;
  echo["epsilon"] = config.spec.epsilon();
  echo["amplitude"] = config.spec.amplitude();
  echo["beta"] = f.beta ? Json(*f.beta) : Json(nullptr);
  echo["r"] = f.r ? Json(*f.r) : Json(nullptr);
  echo["reps"] = f.reps;
  echo["stats"] = f.stats;
  echo["alpha0"] = f.alpha0;
  echo["tail"] = f.tail ? Json(*f.tail) : Json(nullptr);
  echo["tail_generator"] = f.tail_generator;
  const Json manifest = make_manifest("simulate", echo, config.seed);
  if (f.out.empty()) {
    out << csv.str();
    write_manifest(f.common.manifest, manifest);
  } else {
    write_text(f.out, csv.str());
    write_manifest(f.common.manifest.empty() ? f.out + ".manifest.json" : f.common.manifest, manifest);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Sparse mixture detection: higher-criticism tests, calibration and simulation",
               "sparse-detect"};
  app.require_subcommand(1);

  TestFlags test_flags;
  CLI::App* test = app.add_subcommand("test", "Apply detection statistics to one data file");
  test->add_option("input", test_flags.input, "Input file, one value per line (default: stdin)");
  test->add_option("--input-kind", test_flags.input_kind, "pvalues or zscores");
  test->add_option("--family", test_flags.family, "gaussian, chisq:<nu>, exp2 or subbotin:<gamma>");
  test->add_option("--stats", test_flags.stats, "Comma-separated statistics");
  test->add_option("--alpha", test_flags.alpha, "Test level");
  test->add_option("--alpha0", test_flags.alpha0, "Upper p-value bound for hc_star");
  test->add_option("--critical", test_flags.critical, "mc:<reps>, asymptotic or table:<path>");
  add_common(test, test_flags.common, true);

  CalibrateFlags cal_flags;
  CLI::App* calibrate = app.add_subcommand("calibrate", "Calibrate null critical values into a table file");
  calibrate->add_option("--stat", cal_flags.stat, "Statistic")->required();
  calibrate->add_option("--n", cal_flags.n, "Sample size")->required();
  calibrate->add_option("--alpha", cal_flags.alphas, "Levels (comma-separated)")->delimiter(',')->required();
  calibrate->add_option("--alpha0", cal_flags.alpha0, "Upper p-value bound for hc_star");
  calibrate->add_option("--reps", cal_flags.reps, "Monte Carlo replicates");
  calibrate->add_option("--out", cal_flags.out, "Calibration table file")->required();
  calibrate->add_option("--source", cal_flags.source, "mc or asymptotic");
  calibrate->add_option("--tail", cal_flags.tail, "Keep only this fraction of smallest p-values");
  add_common(calibrate, cal_flags.common, false);

  BoundaryFlags boundary_flags;
  CLI::App* boundary = app.add_subcommand("boundary", "Emit detection boundary curves as CSV");
  boundary->add_option("--family", boundary_flags.family, "Null family");
  boundary->add_option("--gamma", boundary_flags.gamma, "Subbotin shape");
  boundary->add_option("--curves", boundary_flags.curves, "optimal,max,fdr,bj,bonferroni_subbotin")
      ->delimiter(',');
  boundary->add_option("--beta-grid", boundary_flags.grid, "Number of beta grid points");
  add_common(boundary, boundary_flags.common, true);

  PowerFlags power_flags;
  CLI::App* power = app.add_subcommand("power", "Monte Carlo power over a (beta, r) grid");
  power->add_option("--family", power_flags.family, "Null family");
  power->add_option("--n", power_flags.n, "Sample size")->required();
  power->add_option("--beta", power_flags.beta, "lo:hi:steps")->required();
  power->add_option("--r", power_flags.r, "lo:hi:steps")->required();
  power->add_option("--stats", power_flags.stats, "Comma-separated statistics");
  power->add_option("--reps", power_flags.reps, "Replicates per cell");
  power->add_option("--alpha,--level", power_flags.alpha, "Test level");
  power->add_option("--alpha0", power_flags.alpha0, "Upper p-value bound for hc_star");
  power->add_option("--table", power_flags.table, "Calibration table file");
  power->add_option("--tail", power_flags.tail, "Tail sampling keep fraction (gaussian only)");
  power->add_option("--out", power_flags.out, "Output CSV (default: stdout)");
  add_common(power, power_flags.common, true);

  SimulateFlags sim_flags;
  CLI::App* simulate = app.add_subcommand("simulate", "Replicate statistic values under null and alternative");
  simulate->add_option("--family", sim_flags.family, "Null family");
  simulate->add_option("--n", sim_flags.n, "Sample size")->required();
  auto* beta_opt = simulate->add_option("--beta", sim_flags.beta, "Sparsity exponent");
  auto* eps_opt = simulate->add_option("--eps", sim_flags.eps, "Signal fraction");
  beta_opt->excludes(eps_opt);
  auto* r_opt = simulate->add_option("--r", sim_flags.r, "Amplitude exponent");
  auto* amp_opt = simulate->add_option("--amplitude", sim_flags.amplitude, "Signal amplitude");
  r_opt->excludes(amp_opt);
  simulate->add_option("--reps", sim_flags.reps, "Replicates");
  simulate->add_option("--stats", sim_flags.stats, "Comma-separated statistics");
  simulate->add_option("--alpha0", sim_flags.alpha0, "Upper p-value bound for hc_star");
  simulate->add_option("--tail", sim_flags.tail, "Tail sampling keep fraction (gaussian only)");
  simulate->add_option("--tail-generator", sim_flags.tail_generator, "exact or expansion");
  simulate->add_option("--out", sim_flags.out, "Output CSV (default: stdout)");
  add_common(simulate, sim_flags.common, true);

  CLI::App* table1 = app.add_subcommand("table1", "Print the expected-exceedance table");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (test->parsed()) return cmd_test(test_flags, in, out);
    if (calibrate->parsed()) return cmd_calibrate(cal_flags, err);
    if (boundary->parsed()) return cmd_boundary(boundary_flags, out);
    if (power->parsed()) return cmd_power(power_flags, out, err);
    if (simulate->parsed()) return cmd_simulate(sim_flags, out);
    if (table1->parsed()) {
      out << format_table1(reproduce_table1());
      return kExitOk;
    }
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DegenerateError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace sparse_detect::cli
