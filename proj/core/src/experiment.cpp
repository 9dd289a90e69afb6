#include "fastrate/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fastrate/conditions.hpp"
#include "fastrate/errors.hpp"
#include "fastrate/mi.hpp"
#include "fastrate/montecarlo.hpp"
#include "fastrate/oracle.hpp"
#include "fastrate/problems.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace fastrate {

namespace {

// Caps chosen to keep analysis interactive: the CGF is estimated on at
// most 200k pooled excess losses, and each kNN MI call sees at most 8k
// hypothesis/data pairs (the estimator is O(pairs^2)).
constexpr std::size_t kCgfSampleCap = 200000;
constexpr std::size_t kMiPairCap = 8000;
constexpr std::size_t kFastReplicateCap = 1000;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream in(value);
  while (std::getline(in, token, ',')) {
    token = trim(token);
    if (!token.empty()) out.push_back(token);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has non-numeric value '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' needs a non-negative integer, got '" +
                      value + "'");
  }
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.problem != "gaussian" && cfg.problem != "logistic") {
    throw ConfigError("config: unknown problem '" + cfg.problem + "'");
  }
  if (cfg.sigma_n < 0.0) throw ConfigError("config: sigma_n must be >= 0");
  if (cfg.radius <= 0.0) throw ConfigError("config: radius must be positive");
  if (cfg.n_values.empty()) throw ConfigError("config: n_values must not be empty");
  for (std::size_t i = 0; i < cfg.n_values.size(); ++i) {
    if (cfg.n_values[i] < 2) throw ConfigError("config: every n must be >= 2");
    if (i > 0 && cfg.n_values[i] <= cfg.n_values[i - 1]) {
      throw ConfigError("config: n_values must be strictly increasing");
    }
  }
  if (cfg.mi.k < 1) throw ConfigError("config: mi k must be >= 1");
  if (cfg.mi.indices < 1) throw ConfigError("config: mi indices must be >= 1");
  if (cfg.mi.estimator != "auto" && cfg.mi.estimator != "knn" &&
      cfg.mi.estimator != "analytic") {
    throw ConfigError("config: mi estimator must be auto, knn or analytic");
  }
  if (cfg.mi.estimator == "analytic" && cfg.problem != "gaussian") {
    throw ConfigError("config: the analytic MI formula only covers the gaussian problem");
  }
  if (cfg.eta <= 0.0) throw ConfigError("config: eta must be positive");
  for (const auto& b : cfg.bounds) {
    if (b != "thm1" && b != "thm2" && b != "thm3" && b != "thm5" && b != "thm7") {
      throw ConfigError("config: unknown bound '" + b + "'");
    }
  }
}

std::size_t effective_m(const ExperimentConfig& cfg) {
  return cfg.fast ? std::min(cfg.m, kFastReplicateCap) : cfg.m;
}

std::string dump_path(const ExperimentConfig& cfg, std::size_t n) {
  return cfg.out_dir + "/replicates_" + cfg.problem + "_n" + std::to_string(n) + ".bin";
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

bool wants(const std::vector<std::string>& bounds, const char* name) {
  return std::find(bounds.begin(), bounds.end(), name) != bounds.end();
}

// Evenly strided subsample of a flat value sequence (deterministic, no RNG).
std::vector<double> strided(const std::vector<double>& values, std::size_t cap) {
  if (values.size() <= cap) return values;
  const std::size_t step = (values.size() + cap - 1) / cap;
  std::vector<double> out;
  out.reserve(values.size() / step + 1);
  for (std::size_t i = 0; i < values.size(); i += step) out.push_back(values[i]);
  return out;
}

double sample_variance(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return var / static_cast<double>(v.size());
}

// Average of the per-index kNN estimates of I(W;Z_i), unclamped until
// the final average; exploits exchangeability of the training points.
// Returns {mean, standard error of the mean} across the indices.
std::pair<double, double> knn_mi_average(const LearningProblem& problem,
                                         const ExperimentConfig& cfg,
                                         const ReplicateSet& rs) {
  const std::size_t count = std::min<std::size_t>(cfg.mi.indices, rs.n);
  std::vector<double> raws;
  raws.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t idx = t * rs.n / count;
    PairSet pairs = hypothesis_data_pairs(problem, rs, idx);

    std::size_t rows = pairs.w.rows;
    std::size_t step = 1;
    if (rows > kMiPairCap) {
      step = (rows + kMiPairCap - 1) / kMiPairCap;
      rows = (pairs.w.rows + step - 1) / step;
    }
    Matrix w(rows, pairs.w.cols);
    Matrix z(rows, pairs.z.cols);
    for (std::size_t r = 0, src = 0; r < rows; ++r, src += step) {
      for (std::size_t c = 0; c < w.cols; ++c) w.at(r, c) = pairs.w.at(src, c);
      for (std::size_t c = 0; c < z.cols; ++c) z.at(r, c) = pairs.z.at(src, c);
    }

    const std::uint64_t salt = rs.master_seed ^ (0x9e3779b9ULL + idx);
    if (cfg.problem == "logistic") {
      // z packs (x0, x1, y); the label goes through the chain rule.
      Matrix x(rows, 2);
      std::vector<int> labels(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        x.at(r, 0) = z.at(r, 0);
        x.at(r, 1) = z.at(r, 1);
        labels[r] = static_cast<int>(z.at(r, 2));
      }
      raws.push_back(chain_mi(w, x, labels, cfg.mi.k, salt).raw);
    } else {
      raws.push_back(ksg_mi(w, z, cfg.mi.k, salt).raw);
    }
  }
  const auto k = static_cast<double>(raws.size());
  double mean = 0.0;
  for (double v : raws) mean += v;
  mean /= k;
  double var = 0.0;
  for (double v : raws) var += (v - mean) * (v - mean);
  const double se = raws.size() > 1 ? std::sqrt(var / (k * (k - 1.0))) : 0.0;
  return {mean, se};
}

AnalyzeRow analyze_one(const LearningProblem& problem, const ExperimentConfig& cfg,
                       const ReplicateSet& rs) {
  AnalyzeRow row;
  row.n = rs.n;

  const RiskEstimates risks = estimate_risks(rs);
  row.gen_error = risks.gen_error;
  row.gen_se = risks.gen_error_se;
  row.excess_risk = risks.excess_risk;
  row.empirical_excess = risks.empirical_excess;

  const std::vector<double> r_samples = strided(rs.product_r.data, kCgfSampleCap);
  const std::vector<double> grid = default_eta_grid(r_samples);
  const CgfProfile profile = estimate_cgf(r_samples, grid);

  const ConditionCertificate sg = fit_subgaussian(profile);
  const double sigma2_r =
      sg.feasible ? sg.sigma2 : profile.std_r * profile.std_r;
  row.sigma_fit = sigma2_r;
  row.eta_fit = cfg.eta;
  row.c_fit = profile.mean_r > 0.0 ? central_c_at(profile, cfg.eta) : 0.0;

  double mi_avg = 0.0;
  bool mi_resolved = true;
  const bool analytic = cfg.mi.estimator == "analytic" ||
                        (cfg.mi.estimator == "auto" && cfg.problem == "gaussian");
  if (analytic) {
    mi_avg = analytic_gaussian_mi(rs.n);
  } else {
    const auto [raw, se] = knn_mi_average(problem, cfg, rs);
    // A non-positive average means the estimator noise swamped the
    // signal; the clamped zero is reported but cannot certify a bound.
    mi_resolved = raw > 0.0;
    mi_avg = std::max(0.0, raw);
    row.mi_se = static_cast<double>(rs.n) * se;
  }
  row.mi_sum = static_cast<double>(rs.n) * mi_avg;
  const std::vector<double> mi_vec(rs.n, mi_avg);

  if (wants(cfg.bounds, "thm1")) {
    const std::vector<double> losses = strided(rs.product_loss.data, kCgfSampleCap);
    row.thm1 = bound_thm1(sample_variance(losses), mi_vec);
  }
  if (wants(cfg.bounds, "thm2")) {
    row.thm2 = bound_thm2(sigma2_r, mi_vec, row.empirical_excess);
  }
  if (wants(cfg.bounds, "thm3")) {
    row.thm3 = bound_thm3(sigma2_r, profile.mean_r, mi_vec, row.empirical_excess,
                          cfg.eta);
  }
  if (wants(cfg.bounds, "thm5")) {
    if (row.c_fit > 0.0) {
      row.thm5 = bound_thm5(row.c_fit, cfg.eta, mi_vec, row.empirical_excess);
    } else {
      row.thm5.kind = BoundKind::thm5_eta_c;
      row.thm5.validity_notes = "central condition infeasible at the working eta";
    }
  }
  if (wants(cfg.bounds, "thm7")) {
    row.thm7.kind = BoundKind::thm7_intermediate;
    // beta = 1 would need the plain central condition at eta = 1, which
    // the working eta does not certify; the grid stops at 0.75.
    const std::vector<double> beta_grid{0.0, 0.25, 0.5, 0.75};
    const double c7 = std::clamp(row.c_fit, 0.0, 0.99);
    if (c7 > 0.0 && profile.mean_r > 0.0) {
      const ConditionCertificate vc = fit_v_central(profile, c7, beta_grid);
      if (vc.feasible) {
        row.thm7 = bound_thm7(c7, vc.beta, mi_vec, row.empirical_excess);
      } else {
        row.thm7.validity_notes = "no beta certified on the grid";
      }
    } else {
      row.thm7.validity_notes = "central condition infeasible at the working eta";
    }
  }
  if (!mi_resolved) {
    for (BoundReport* rep : {&row.thm1, &row.thm2, &row.thm3, &row.thm5, &row.thm7}) {
      if (rep->valid) {
        rep->valid = false;
        rep->validity_notes = "mutual information estimate degenerate (<= 0)";
      }
    }
  }
  return row;
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Csv parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV '" + path + "'");
  Csv csv;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("CSV '" + path + "' is empty");
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) csv.header.push_back(trim(cell));
  }
  if (csv.header.empty()) throw ConfigError("CSV '" + path + "' has no header");
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream rs(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(rs, cell, ',')) {
      row.push_back(parse_double("csv cell", trim(cell)));
    }
    if (row.size() != csv.header.size()) {
      throw ConfigError("CSV '" + path + "' has a row with the wrong column count");
    }
    csv.rows.push_back(std::move(row));
  }
  return csv;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal SVG line chart; log axes take log10 of the data up front.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<Series>& series, bool log_log,
                    const std::string& annotation) {
  constexpr double W = 720, H = 480, ML = 70, MR = 160, MT = 40, MB = 55;

  std::vector<Series> plotted;
  for (const auto& s : series) {
    Series t;
    t.label = s.label;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (log_log && (s.x[i] <= 0.0 || s.y[i] <= 0.0)) continue;
      t.x.push_back(log_log ? std::log10(s.x[i]) : s.x[i]);
      t.y.push_back(log_log ? std::log10(s.y[i]) : s.y[i]);
    }
    if (!t.x.empty()) plotted.push_back(std::move(t));
  }

  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  bool first = true;
  for (const auto& s : plotted) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x_lo = x_hi = s.x[i];
        y_lo = y_hi = s.y[i];
        first = false;
      }
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (x_hi - x_lo < 1e-12) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi - y_lo < 1e-12) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  const double x_pad = 0.05 * (x_hi - x_lo);
  const double y_pad = 0.05 * (y_hi - y_lo);
  x_lo -= x_pad;
  x_hi += x_pad;
  y_lo -= y_pad;
  y_hi += y_pad;

  const auto px = [&](double x) {
    return ML + (x - x_lo) / (x_hi - x_lo) * (W - ML - MR);
  };
  const auto py = [&](double y) {
    return H - MB - (y - y_lo) / (y_hi - y_lo) * (H - MT - MB);
  };
  const auto tick_label = [&](double v) {
    return format_number(log_log ? std::pow(10.0, v) : v);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";

  // axes
  svg << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR
      << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\""
      << H - MB << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  svg << "<text x=\"16\" y=\"" << (MT + H - MB) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (MT + H - MB) / 2
      << ")\">" << y_label << "</text>\n";

  for (int t = 0; t <= 4; ++t) {
    const double fx = x_lo + (x_hi - x_lo) * t / 4.0;
    const double fy = y_lo + (y_hi - y_lo) * t / 4.0;
    svg << "<line x1=\"" << px(fx) << "\" y1=\"" << H - MB << "\" x2=\"" << px(fx)
        << "\" y2=\"" << H - MB + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(fx) << "\" y=\"" << H - MB + 18
        << "\" text-anchor=\"middle\">" << tick_label(fx) << "</text>\n";
    svg << "<line x1=\"" << ML - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << ML
        << "\" y2=\"" << py(fy) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ML - 8 << "\" y=\"" << py(fy) + 4
        << "\" text-anchor=\"end\">" << tick_label(fy) << "</text>\n";
  }

  for (std::size_t s = 0; s < plotted.size(); ++s) {
    const char* color = kPalette[s % 6];
    const auto& sr = plotted[s];
    if (sr.x.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < sr.x.size(); ++i) {
        svg << px(sr.x[i]) << "," << py(sr.y[i]) << " ";
      }
      svg << "\"/>\n";
    }
    for (std::size_t i = 0; i < sr.x.size(); ++i) {
      svg << "<circle cx=\"" << px(sr.x[i]) << "\" cy=\"" << py(sr.y[i])
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = MT + 18.0 * static_cast<double>(s);
    svg << "<line x1=\"" << W - MR + 10 << "\" y1=\"" << ly << "\" x2=\""
        << W - MR + 34 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << W - MR + 40 << "\" y=\"" << ly + 4 << "\">" << sr.label
        << "</text>\n";
  }
  if (!annotation.empty()) {
    svg << "<text x=\"" << W - MR + 10 << "\" y=\""
        << MT + 18.0 * static_cast<double>(plotted.size()) + 10 << "\">" << annotation
        << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << svg.str();
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "problem" && section != "sweep" && section != "mi" &&
          section != "bounds" && section != "output") {
        throw ConfigError("config: unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string where = section + "." + key;

    if (section == "problem") {
      if (key == "kind") cfg.problem = value;
      else if (key == "mu") cfg.mu = parse_double(where, value);
      else if (key == "sigma_n") cfg.sigma_n = parse_double(where, value);
      else if (key == "w_gen") {
        const auto parts = split_list(value);
        if (parts.size() != 2) throw ConfigError("config: w_gen needs two components");
        cfg.w_gen = {parse_double(where, parts[0]), parse_double(where, parts[1])};
      } else if (key == "radius") cfg.radius = parse_double(where, value);
      else if (key == "gd_steps") cfg.gd_steps = parse_u64(where, value);
      else if (key == "gd_rate") cfg.gd_rate = parse_double(where, value);
      else throw ConfigError("config: unknown key '" + where + "'");
    } else if (section == "sweep") {
      if (key == "n_values") {
        cfg.n_values.clear();
        for (const auto& part : split_list(value)) {
          cfg.n_values.push_back(parse_u64(where, part));
        }
      } else if (key == "m") cfg.m = parse_u64(where, value);
      else if (key == "seed") cfg.seed = parse_u64(where, value);
      else throw ConfigError("config: unknown key '" + where + "'");
    } else if (section == "mi") {
      if (key == "k") cfg.mi.k = static_cast<int>(parse_u64(where, value));
      else if (key == "indices") cfg.mi.indices = parse_u64(where, value);
      else if (key == "estimator") cfg.mi.estimator = value;
      else throw ConfigError("config: unknown key '" + where + "'");
    } else if (section == "bounds") {
      if (key == "list") cfg.bounds = split_list(value);
      else if (key == "eta") cfg.eta = parse_double(where, value);
      else throw ConfigError("config: unknown key '" + where + "'");
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = value;
      else throw ConfigError("config: unknown key '" + where + "'");
    } else {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": key outside any section");
    }
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::shared_ptr<LearningProblem> make_problem(const ExperimentConfig& cfg) {
  if (cfg.problem == "gaussian") {
    return std::make_shared<GaussianMeanProblem>(cfg.mu, cfg.sigma_n);
  }
  LogisticOptimizerSettings opt;
  opt.gd_steps = cfg.gd_steps;
  opt.gd_rate = cfg.gd_rate;
  return std::make_shared<LogisticProblem>(cfg.w_gen, cfg.radius, opt);
}

void cmd_simulate(const ExperimentConfig& cfg) {
  const std::size_t m = effective_m(cfg);
  if (m < 2) throw InsufficientDataError("simulate: need at least 2 replicates");

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + cfg.out_dir + "'");

  const auto problem = make_problem(cfg);
  nlohmann::json manifest;
  manifest["problem"] = cfg.problem;
  manifest["seed"] = cfg.seed;
  manifest["runs"] = nlohmann::json::array();
  for (std::size_t n : cfg.n_values) {
    const ReplicateSet rs = run_replicates(*problem, n, m, cfg.seed);
    const std::string path = dump_path(cfg, n);
    save_replicates(rs, path);
    manifest["runs"].push_back({{"n", n},
                                {"m", rs.m},
                                {"excluded", rs.excluded},
                                {"file", fs::path(path).filename().string()}});
  }
  std::ofstream out(cfg.out_dir + "/manifest.json", std::ios::binary);
  if (!out) throw ConfigError("cannot write manifest in '" + cfg.out_dir + "'");
  out << manifest.dump(2) << "\n";
}

AnalyzeResult cmd_analyze(const ExperimentConfig& cfg) {
  const auto problem = make_problem(cfg);
  AnalyzeResult result;
  for (std::size_t n : cfg.n_values) {
    const std::string path = dump_path(cfg, n);
    if (!fs::exists(path)) {
      throw ConfigError("analyze: missing replicate dump '" + path + "'");
    }
    const ReplicateSet rs = load_replicates(path);
    if (rs.n != n || rs.problem_id != problem->name()) {
      throw ConfigError("analyze: dump '" + path + "' does not match the config");
    }
    result.rows.push_back(analyze_one(*problem, cfg, rs));
  }

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  result.csv_path = cfg.out_dir + "/analysis_" + cfg.problem + ".csv";
  std::ofstream out(result.csv_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + result.csv_path + "'");
  out << render_csv(result.rows, cfg.bounds);
  return result;
}

std::string render_csv(const std::vector<AnalyzeRow>& rows,
                       const std::vector<std::string>& bound_list) {
  static const std::vector<std::string> order{"thm1", "thm2", "thm3", "thm5", "thm7"};
  std::vector<std::string> used;
  for (const auto& b : order) {
    if (wants(bound_list, b.c_str())) used.push_back(b);
  }

  std::ostringstream out;
  out << "n,gen_error,gen_se,excess_risk,empirical_excess,mi_sum,mi_se,sigma_fit,eta_fit,c_fit";
  for (const auto& b : used) out << ",bound_" << b;
  for (const auto& b : used) out << ",valid_" << b;
  out << "\n";

  for (const auto& row : rows) {
    const std::map<std::string, const BoundReport*> reports{{"thm1", &row.thm1},
                                                            {"thm2", &row.thm2},
                                                            {"thm3", &row.thm3},
                                                            {"thm5", &row.thm5},
                                                            {"thm7", &row.thm7}};
    out << row.n << "," << format_number(row.gen_error) << ","
        << format_number(row.gen_se) << "," << format_number(row.excess_risk) << ","
        << format_number(row.empirical_excess) << "," << format_number(row.mi_sum)
        << "," << format_number(row.mi_se) << "," << format_number(row.sigma_fit)
        << "," << format_number(row.eta_fit)
        << "," << format_number(row.c_fit);
    for (const auto& b : used) out << "," << format_number(reports.at(b)->gen_bound);
    for (const auto& b : used) out << "," << (reports.at(b)->valid ? 1 : 0);
    out << "\n";
  }
  return out.str();
}

LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw DomainError("linear_fit: need at least 2 paired points");
  }
  const auto k = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double denom = k * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) throw DomainError("linear_fit: degenerate x values");
  LinearFit fit;
  fit.slope = (k * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / k;
  double ss_res = 0.0;
  const double ss_tot = syy - sy * sy / k;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.slope * xs[i] + fit.intercept);
    ss_res += e * e;
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

void cmd_plot(const ExperimentConfig& cfg, const std::string& csv_path) {
  const Csv csv = parse_csv(csv_path);
  const auto column = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < csv.header.size(); ++i) {
      if (csv.header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int n_col = column("n");
  const int gen_col = column("gen_error");
  if (n_col < 0 || gen_col < 0) {
    throw ConfigError("plot: CSV lacks the n / gen_error columns");
  }

  std::vector<Series> values;
  std::vector<Series> reciprocals;
  const auto add_series = [&](const std::string& label, int col, int valid_col) {
    Series v, r;
    v.label = label;
    r.label = "1 / " + label;
    for (const auto& row : csv.rows) {
      if (valid_col >= 0 && row[valid_col] == 0.0) continue;
      const double y = row[col];
      v.x.push_back(row[n_col]);
      v.y.push_back(y);
      if (y > 0.0) {
        r.x.push_back(row[n_col]);
        r.y.push_back(1.0 / y);
      }
    }
    if (!v.x.empty()) values.push_back(std::move(v));
    if (!r.x.empty()) reciprocals.push_back(std::move(r));
  };

  add_series("gen_error", gen_col, -1);
  for (std::size_t i = 0; i < csv.header.size(); ++i) {
    const auto& h = csv.header[i];
    if (h.rfind("bound_", 0) == 0) {
      add_series(h, static_cast<int>(i), column("valid_" + h.substr(6)));
    }
  }

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);

  write_svg_plot(cfg.out_dir + "/plot_values.svg",
                 "Generalization error and bounds", "n", "value", values, true, "");

  // Reciprocal view: a straight line means a 1/n rate.  The fit line is
  // drawn for the gen_error series when there are at least two points.
  std::string annotation;
  if (!reciprocals.empty() && reciprocals.front().x.size() >= 2) {
    const auto& g = reciprocals.front();
    const LinearFit fit = linear_fit(g.x, g.y);
    Series line;
    line.label = "linear fit";
    line.x = {g.x.front(), g.x.back()};
    line.y = {fit.slope * g.x.front() + fit.intercept,
              fit.slope * g.x.back() + fit.intercept};
    reciprocals.push_back(std::move(line));
    annotation = "R^2 = " + format_number(fit.r2);
  }
  write_svg_plot(cfg.out_dir + "/plot_reciprocal.svg", "Reciprocal rates", "n",
                 "1 / value", reciprocals, false, annotation);
}

OracleCheckRow check_close(const std::string& name, double actual, double expected,
                           double tol) {
  OracleCheckRow row;
  row.name = name;
  row.pass = std::isfinite(actual) && std::abs(actual - expected) <= tol;
  std::ostringstream detail;
  detail << "actual=" << format_number(actual) << " expected=" << format_number(expected)
         << " tol=" << format_number(tol);
  row.detail = detail.str();
  return row;
}

namespace {

OracleCheckRow skipped_row(const std::string& name, const std::string& why) {
  OracleCheckRow row;
  row.name = name;
  row.skipped = true;
  row.detail = why;
  return row;
}

}  // namespace

OracleCheckReport run_oracle_check(const ExperimentConfig& cfg) {
  OracleCheckReport report;
  const auto push = [&](OracleCheckRow row) {
    if (!row.skipped && !row.pass) report.all_pass = false;
    report.rows.push_back(std::move(row));
  };
  const bool degenerate = cfg.problem == "gaussian" && cfg.sigma_n == 0.0;
  const std::string why = "degenerate problem (sigma_n = 0)";

  // Closed forms at the canonical calibration point (sigma = 1, n = 100).
  const GaussianOracle o{0.0, 1.0, 100};
  push(check_close("oracle gen_error", oracle_quantity(o, OracleQuantity::gen_error),
                   0.02, 1e-12));
  push(check_close("oracle excess_risk",
                   oracle_quantity(o, OracleQuantity::excess_risk), 0.01, 1e-12));
  push(check_close("oracle empirical_excess",
                   oracle_quantity(o, OracleQuantity::empirical_excess), -0.01, 1e-12));
  push(check_close("oracle mi", oracle_quantity(o, OracleQuantity::mi),
                   0.005025167926750725, 1e-12));
  push(check_close("oracle second_moment_r",
                   oracle_quantity(o, OracleQuantity::second_moment_r), 0.0403, 1e-12));
  push(check_close("oracle risk identity",
                   oracle_quantity(o, OracleQuantity::gen_error) -
                       (oracle_quantity(o, OracleQuantity::excess_risk) -
                        oracle_quantity(o, OracleQuantity::empirical_excess)),
                   0.0, 1e-15));

  // MGF feasibility region: log E[e^{-eta r}] <= -c eta E[r] with
  // c = 1 - 2 eta sigma^2 for eta below 1/(2 sigma^2).  The region is a
  // large-n statement; the exact MGF overshoots it by an O(1/n^2)
  // remainder, so the check runs at n = 10^4 with a matching tolerance.
  {
    const GaussianOracle of{0.0, 1.0, 10000};
    double worst = 0.0;
    const double excess = oracle_quantity(of, OracleQuantity::excess_risk);
    for (double eta : {0.05, 0.1, 0.2, 0.3, 0.4, 0.45}) {
      const double c = 1.0 - 2.0 * eta;
      const double lhs = std::log(oracle_mgf_r(of, eta, MgfSign::minus));
      worst = std::max(worst, lhs - (-c * eta * excess));
    }
    push(check_close("oracle central feasibility", worst, 0.0, 1e-8));
  }

  // Appendix asymptotic: n (log MGF_plus - eta E[r]) -> 2 eta^2 sigma^4.
  {
    const GaussianOracle big{0.0, 1.0, 100000};
    const double eta = 0.25;
    const double lhs = 100000.0 * (std::log(oracle_mgf_r(big, eta, MgfSign::plus)) -
                                   eta * oracle_quantity(big, OracleQuantity::excess_risk));
    const double rhs = 2.0 * eta * eta;
    push(check_close("oracle asymptotic cgf", lhs / rhs, 1.0, 0.01));
  }

  // Monte Carlo calibration against the closed forms.
  if (degenerate) {
    push(skipped_row("monte carlo gen_error", why));
    push(skipped_row("monte carlo empirical_excess", why));
    push(skipped_row("empirical cgf vs mgf", why));
  } else {
    const double sigma = cfg.problem == "gaussian" ? cfg.sigma_n : 1.0;
    const GaussianOracle mc_oracle{cfg.problem == "gaussian" ? cfg.mu : 0.0, sigma, 100};
    GaussianMeanProblem problem(mc_oracle.mu, sigma);
    const std::size_t m = cfg.fast ? 5000 : 20000;
    const ReplicateSet rs = run_replicates(problem, 100, m, cfg.seed);
    const RiskEstimates risks = estimate_risks(rs);
    push(check_close("monte carlo gen_error", risks.gen_error,
                     oracle_quantity(mc_oracle, OracleQuantity::gen_error),
                     3.0 * risks.gen_error_se + 1e-9));
    push(check_close("monte carlo empirical_excess", risks.empirical_excess,
                     oracle_quantity(mc_oracle, OracleQuantity::empirical_excess),
                     3.0 * risks.empirical_excess_se + 1e-9));

    // Empirical CGF vs the exact MGF on a conservative eta grid.
    const std::vector<double> r = strided(rs.product_r.data, kCgfSampleCap);
    const double s2 = sigma * sigma;
    double worst_sigmas = 0.0;
    for (double eta : {0.05 / s2, 0.1 / s2, 0.2 / s2, 0.3 / s2, 0.4 / s2}) {
      const std::vector<double> grid{eta};
      const CgfProfile profile = estimate_cgf(r, grid);
      const double expected = std::log(oracle_mgf_r(mc_oracle, eta, MgfSign::minus));
      // Delta-method standard error of the log of an empirical mean.
      double s1 = 0.0, sq = 0.0;
      for (double v : r) {
        const double w = std::exp(-eta * v);
        s1 += w;
        sq += w * w;
      }
      s1 /= static_cast<double>(r.size());
      sq /= static_cast<double>(r.size());
      const double se = std::sqrt(std::max(0.0, sq - s1 * s1)) /
                        (s1 * std::sqrt(static_cast<double>(r.size())));
      worst_sigmas =
          std::max(worst_sigmas, std::abs(profile.lambda_vals[0] - expected) / (se + 1e-15));
    }
    push(check_close("empirical cgf vs mgf", std::min(worst_sigmas, 10.0), 0.0, 3.0));
  }

  // kNN MI estimator against the bivariate Gaussian closed form.
  {
    const double rho = 0.6;
    const double truth = -0.5 * std::log(1.0 - rho * rho);
    const int seeds = cfg.fast ? 3 : 5;
    double acc = 0.0;
    for (int s = 0; s < seeds; ++s) {
      Stream rng(cfg.seed + 1000 + static_cast<std::uint64_t>(s), 7);
      Matrix x(2000, 1), y(2000, 1);
      for (std::size_t i = 0; i < 2000; ++i) {
        const double a = rng.next_gaussian();
        const double b = rng.next_gaussian();
        x.at(i, 0) = a;
        y.at(i, 0) = rho * a + std::sqrt(1.0 - rho * rho) * b;
      }
      acc += ksg_mi(x, y, 3, cfg.seed + static_cast<std::uint64_t>(s)).value;
    }
    push(check_close("knn mi calibration", acc / seeds, truth, 0.04));
  }

  // Structural identity between the two fast-rate forms.
  {
    Stream rng(42, 9);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 50 + static_cast<std::size_t>(rng.next_uniform(0, 450));
      std::vector<double> mi(n);
      for (auto& v : mi) v = rng.next_uniform(0.0, 0.01);
      const double mean_r = rng.next_uniform(0.001, 0.1);
      const double sigma2 = rng.next_uniform(1e-4, 0.05);
      const double eta = rng.next_uniform(0.1, 0.9) * 2.0 * mean_r / sigma2;
      const double emp = rng.next_uniform(-0.05, 0.05);
      const BoundReport t3 = bound_thm3(sigma2, mean_r, mi, emp, eta);
      if (!t3.valid) continue;
      const BoundReport t5 = bound_thm5(t3.ingredients.a_eta, eta, mi, emp);
      worst = std::max(worst, std::abs(t3.gen_bound - t5.gen_bound));
      worst = std::max(worst, std::abs(t3.excess_bound - t5.excess_bound));
    }
    push(check_close("thm3/thm5 structural identity", worst, 0.0, 1e-12));
  }

  // Slow-rate bound against its closed form at the calibration point.
  {
    const double sigma_w2 = oracle_quantity(o, OracleQuantity::expected_loss);
    const double mi = oracle_quantity(o, OracleQuantity::mi);
    const std::vector<double> mi_vec(100, mi);
    const BoundReport t1 = bound_thm1(2.0 * sigma_w2 * sigma_w2, mi_vec);
    const double closed = sigma_w2 * std::sqrt(2.0 * std::log(100.0 / 99.0));
    push(check_close("thm1 closed form", t1.gen_bound, closed, 1e-12));
  }

  // Rate separation with closed-form ingredients.
  {
    std::vector<std::pair<std::size_t, double>> slow, fast;
    for (std::size_t n : {100, 200, 400, 800, 1600}) {
      const GaussianOracle on{0.0, 1.0, n};
      const double mi = oracle_quantity(on, OracleQuantity::mi);
      const std::vector<double> mi_vec(n, mi);
      const double sigma_w2 = oracle_quantity(on, OracleQuantity::expected_loss);
      slow.emplace_back(n, bound_thm1(2.0 * sigma_w2 * sigma_w2, mi_vec).gen_bound);
      const double emp = oracle_quantity(on, OracleQuantity::empirical_excess);
      fast.emplace_back(n, bound_thm5(0.5, 0.25, mi_vec, emp).gen_bound);
    }
    const double slow_slope = rate_slope(slow);
    const double fast_slope = rate_slope(fast);
    push(check_close("thm1 rate slope", slow_slope, -0.5, 0.1));
    push(check_close("thm5 rate slope", fast_slope, -1.0, 0.1));
  }

  // kappa(1e-5) = 1/2 + x/6 + x^2/24 exactly; comparing against the
  // series reference validates the small-x branch to 1e-6.
  push(check_close("kappa small-x accuracy", kappa(1e-5), 0.50000166667083335, 1e-6));
  return report;
}

}  // namespace fastrate
