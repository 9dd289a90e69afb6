#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fastrate/bounds.hpp"
#include "fastrate/core.hpp"

namespace fastrate {

struct MiSettings {
  int k = 3;
  std::size_t indices = 16;         // sample indices estimated per n (i.i.d.
                                    // symmetry extrapolates the sum)
  std::string estimator = "auto";   // auto | knn | analytic
};

struct ExperimentConfig {
  // [problem]
  std::string problem = "gaussian";
  double mu = 0.0;
  double sigma_n = 1.0;
  std::array<double, 2> w_gen{0.5, 0.5};
  double radius = 3.0;
  std::size_t gd_steps = 500;
  double gd_rate = 0.5;

  // [sweep]
  std::vector<std::size_t> n_values{200, 400, 800, 1600};
  std::size_t m = 10000;
  std::uint64_t seed = 1;

  // [mi]
  MiSettings mi;

  // [bounds]
  std::vector<std::string> bounds{"thm1", "thm2", "thm3", "thm5", "thm7"};
  double eta = 0.25;  // eta for thm3 / eta' for thm5

  // [output]
  std::string out_dir = "out";

  bool fast = false;  // CI mode: caps m at 1000
};

/// Parses the flat key-value config format ([section] + key = value
/// lines).  Throws ConfigError on malformed input or violated
/// invariants (n_values strictly increasing, each >= 2).
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::shared_ptr<LearningProblem> make_problem(const ExperimentConfig& config);

/// One analyzed sweep point; mirrors the CSV schema.
struct AnalyzeRow {
  std::size_t n = 0;
  double gen_error = 0.0;
  double gen_se = 0.0;
  double excess_risk = 0.0;
  double empirical_excess = 0.0;
  double mi_sum = 0.0;
  double mi_se = 0.0;       // standard error of mi_sum (0 for analytic)
  double sigma_fit = 0.0;   // sigma^2 fitted on excess losses
  double eta_fit = 0.0;
  double c_fit = 0.0;
  BoundReport thm1, thm2, thm3, thm5, thm7;
};

struct AnalyzeResult {
  std::vector<AnalyzeRow> rows;
  std::string csv_path;
};

/// Writes one replicate dump per n plus a manifest listing seeds and
/// counts.
void cmd_simulate(const ExperimentConfig& config);

/// Loads the dumps, estimates risks / MI / certificates, evaluates the
/// configured bounds and writes the CSV (one row per n).
AnalyzeResult cmd_analyze(const ExperimentConfig& config);

/// Renders two SVGs from an analyze CSV: values vs n (log-log) and
/// reciprocals vs n.
void cmd_plot(const ExperimentConfig& config, const std::string& csv_path);

struct OracleCheckRow {
  std::string name;
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

struct OracleCheckReport {
  std::vector<OracleCheckRow> rows;
  bool all_pass = true;
};

/// Calibration suite: oracle exactness, estimator tolerances, bound
/// identities and rate slopes.  Degenerate configurations (sigma_n = 0)
/// mark their rows skipped.
OracleCheckReport run_oracle_check(const ExperimentConfig& config);

/// Row helper used by the calibration suite (and its tests): |actual -
/// expected| <= tol.
OracleCheckRow check_close(const std::string& name, double actual,
                           double expected, double tol);

/// Serializes rows with the estimation columns plus one bound/valid
/// column pair per configured bound (spec order, %.12g formatting).
std::string render_csv(const std::vector<AnalyzeRow>& rows,
                       const std::vector<std::string>& bound_list);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = slope x + intercept; needs >= 2 points.
LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys);

}  // namespace fastrate
