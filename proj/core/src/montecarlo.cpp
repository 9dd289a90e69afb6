#include "fastrate/montecarlo.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "fastrate/errors.hpp"

namespace fastrate {

namespace {

constexpr std::uint32_t kDumpMagic = 0x46525253;  // "FRRS"
constexpr std::uint32_t kDumpVersion = 1;

// Streams per replicate: 0 = training data, 1 = fresh product draws.
Stream train_stream(std::uint64_t seed, std::uint64_t j) { return {seed, 2 * j}; }
Stream fresh_stream(std::uint64_t seed, std::uint64_t j) { return {seed, 2 * j + 1}; }

}  // namespace

ReplicateSet run_replicates(const LearningProblem& problem, std::size_t n,
                            std::size_t m, std::uint64_t seed) {
  if (n < 2) throw ConfigError("run_replicates: n must be >= 2");
  if (m < 2) throw ConfigError("run_replicates: m must be >= 2");

  // Resolve w* up front so parallel workers hit a warm cache.
  const auto w_star_span = problem.optimal_hypothesis();
  const std::vector<double> w_star(w_star_span.begin(), w_star_span.end());

  const std::size_t wd = problem.hypothesis_dim();
  Matrix hypotheses(m, wd);
  Matrix joint_r(m, n), product_r(m, n), joint_loss(m, n), product_loss(m, n);
  std::vector<char> ok(m, 0);

#pragma omp parallel for schedule(dynamic, 16)
  for (long long jj = 0; jj < static_cast<long long>(m); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    Stream train = train_stream(seed, j);
    Stream fresh = fresh_stream(seed, j);
    Matrix train_data, fresh_data;
    problem.sample_z(n, train, train_data);
    problem.sample_z(n, fresh, fresh_data);

    bool converged = false;
    const auto w = problem.run_algorithm(train_data, &converged);
    ok[j] = converged ? 1 : 0;
    if (!converged) continue;

    for (std::size_t k = 0; k < wd; ++k) hypotheses.at(j, k) = w[k];
    for (std::size_t i = 0; i < n; ++i) {
      const auto zi = train_data.row(i);
      const auto zf = fresh_data.row(i);
      const double lj = problem.loss(w, zi);
      const double lf = problem.loss(w, zf);
      joint_loss.at(j, i) = lj;
      product_loss.at(j, i) = lf;
      joint_r.at(j, i) = lj - problem.loss(w_star, zi);
      product_r.at(j, i) = lf - problem.loss(w_star, zf);
    }
  }

  ReplicateSet rs;
  rs.problem_id = problem.name();
  rs.n = n;
  rs.master_seed = seed;

  std::size_t kept = 0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!ok[j]) continue;
    if (kept != j) {
      std::memcpy(hypotheses.row(kept).data(), hypotheses.row(j).data(),
                  wd * sizeof(double));
      std::memcpy(joint_r.row(kept).data(), joint_r.row(j).data(), n * sizeof(double));
      std::memcpy(product_r.row(kept).data(), product_r.row(j).data(), n * sizeof(double));
      std::memcpy(joint_loss.row(kept).data(), joint_loss.row(j).data(), n * sizeof(double));
      std::memcpy(product_loss.row(kept).data(), product_loss.row(j).data(), n * sizeof(double));
    }
    rs.replicate_ids.push_back(j);
    ++kept;
  }
  rs.m = kept;
  rs.excluded = m - kept;
  auto shrink = [kept](Matrix& mat) {
    mat.data.resize(kept * mat.cols);
    mat.rows = kept;
  };
  shrink(hypotheses);
  shrink(joint_r);
  shrink(product_r);
  shrink(joint_loss);
  shrink(product_loss);
  rs.hypotheses = std::move(hypotheses);
  rs.joint_r = std::move(joint_r);
  rs.product_r = std::move(product_r);
  rs.joint_loss = std::move(joint_loss);
  rs.product_loss = std::move(product_loss);
  return rs;
}

PairSet hypothesis_data_pairs(const LearningProblem& problem,
                              const ReplicateSet& rs, std::size_t i) {
  if (i >= rs.n) throw DomainError("hypothesis_data_pairs: sample index out of range");
  if (problem.name() != rs.problem_id) {
    throw ConfigError("hypothesis_data_pairs: problem does not match replicate set");
  }

  PairSet ps;
  ps.w = rs.hypotheses;
  ps.z = Matrix(rs.m, problem.data_dim());
#pragma omp parallel for schedule(dynamic, 64)
  for (long long jj = 0; jj < static_cast<long long>(rs.m); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    Stream train = train_stream(rs.master_seed, rs.replicate_ids[j]);
    Matrix data;
    problem.sample_z(rs.n, train, data);
    const auto zi = data.row(i);
    for (std::size_t k = 0; k < zi.size(); ++k) ps.z.at(j, k) = zi[k];
  }
  return ps;
}

namespace {

void write_matrix(std::ofstream& out, const Matrix& m) {
  const std::uint64_t r = m.rows, c = m.cols;
  out.write(reinterpret_cast<const char*>(&r), sizeof(r));
  out.write(reinterpret_cast<const char*>(&c), sizeof(c));
  out.write(reinterpret_cast<const char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(double)));
}

Matrix read_matrix(std::ifstream& in) {
  std::uint64_t r = 0, c = 0;
  in.read(reinterpret_cast<char*>(&r), sizeof(r));
  in.read(reinterpret_cast<char*>(&c), sizeof(c));
  Matrix m(r, c);
  in.read(reinterpret_cast<char*>(m.data.data()),
          static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  return m;
}

}  // namespace

void save_replicates(const ReplicateSet& rs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("save_replicates: cannot open " + path);
  out.write(reinterpret_cast<const char*>(&kDumpMagic), sizeof(kDumpMagic));
  out.write(reinterpret_cast<const char*>(&kDumpVersion), sizeof(kDumpVersion));
  const std::uint64_t id_len = rs.problem_id.size();
  out.write(reinterpret_cast<const char*>(&id_len), sizeof(id_len));
  out.write(rs.problem_id.data(), static_cast<std::streamsize>(id_len));
  const std::uint64_t n = rs.n, m = rs.m, excluded = rs.excluded;
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&m), sizeof(m));
  out.write(reinterpret_cast<const char*>(&rs.master_seed), sizeof(rs.master_seed));
  out.write(reinterpret_cast<const char*>(&excluded), sizeof(excluded));
  const std::uint64_t ids = rs.replicate_ids.size();
  out.write(reinterpret_cast<const char*>(&ids), sizeof(ids));
  out.write(reinterpret_cast<const char*>(rs.replicate_ids.data()),
            static_cast<std::streamsize>(ids * sizeof(std::uint64_t)));
  write_matrix(out, rs.hypotheses);
  write_matrix(out, rs.joint_r);
  write_matrix(out, rs.product_r);
  write_matrix(out, rs.joint_loss);
  write_matrix(out, rs.product_loss);
  if (!out) throw ConfigError("save_replicates: write failed for " + path);
}

ReplicateSet load_replicates(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("load_replicates: cannot open " + path);
  std::uint32_t magic = 0, version = 0;
  in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (magic != kDumpMagic || version != kDumpVersion) {
    throw ConfigError("load_replicates: bad header in " + path);
  }
  ReplicateSet rs;
  std::uint64_t id_len = 0;
  in.read(reinterpret_cast<char*>(&id_len), sizeof(id_len));
  rs.problem_id.resize(id_len);
  in.read(rs.problem_id.data(), static_cast<std::streamsize>(id_len));
  std::uint64_t n = 0, m = 0, excluded = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&m), sizeof(m));
  in.read(reinterpret_cast<char*>(&rs.master_seed), sizeof(rs.master_seed));
  in.read(reinterpret_cast<char*>(&excluded), sizeof(excluded));
  rs.n = n;
  rs.m = m;
  rs.excluded = excluded;
  std::uint64_t ids = 0;
  in.read(reinterpret_cast<char*>(&ids), sizeof(ids));
  rs.replicate_ids.resize(ids);
  in.read(reinterpret_cast<char*>(rs.replicate_ids.data()),
          static_cast<std::streamsize>(ids * sizeof(std::uint64_t)));
  rs.hypotheses = read_matrix(in);
  rs.joint_r = read_matrix(in);
  rs.product_r = read_matrix(in);
  rs.joint_loss = read_matrix(in);
  rs.product_loss = read_matrix(in);
  if (!in) throw ConfigError("load_replicates: truncated file " + path);
  return rs;
}

}  // namespace fastrate
