#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fastrate/core.hpp"
#include "fastrate/errors.hpp"
#include "fastrate/montecarlo.hpp"
#include "fastrate/problems.hpp"

using namespace fastrate;

namespace {

double matrix_mean(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data) s += v;
  return s / static_cast<double>(m.data.size());
}

std::string temp_file(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("replicate couplings reproduce the closed-form means") {
  GaussianMeanProblem p(0.0, 1.0);
  const ReplicateSet rs = run_replicates(p, 100, 20000, 5);
  CHECK(rs.m == 20000);
  CHECK(rs.excluded == 0);
  const RiskEstimates est = estimate_risks(rs);
  CHECK(std::abs(matrix_mean(rs.joint_r) + 0.01) <= 3.0 * est.empirical_excess_se);
  CHECK(std::abs(matrix_mean(rs.product_r) - 0.01) <= 3.0 * est.excess_risk_se);
}

TEST_CASE("sigma zero makes every excess loss exactly zero") {
  GaussianMeanProblem p(2.0, 0.0);
  const ReplicateSet rs = run_replicates(p, 10, 20, 5);
  for (double v : rs.joint_r.data) CHECK(v == 0.0);
  for (double v : rs.product_r.data) CHECK(v == 0.0);
}

TEST_CASE("preconditions on n and m") {
  GaussianMeanProblem p(0.0, 1.0);
  CHECK_THROWS_AS(run_replicates(p, 1, 10, 0), ConfigError);
  CHECK_THROWS_AS(run_replicates(p, 10, 1, 0), ConfigError);
}

TEST_CASE("reruns with the same seed are bit-identical") {
  GaussianMeanProblem p(0.5, 2.0);
  const ReplicateSet a = run_replicates(p, 16, 64, 1234);
  const ReplicateSet b = run_replicates(p, 16, 64, 1234);
  CHECK(a.hypotheses == b.hypotheses);
  CHECK(a.joint_r == b.joint_r);
  CHECK(a.product_r == b.product_r);
  const ReplicateSet c = run_replicates(p, 16, 64, 1235);
  CHECK(a.hypotheses != c.hypotheses);
}

TEST_CASE("hypothesis/data pairs regenerate the training draws") {
  GaussianMeanProblem p(0.0, 1.0);
  const ReplicateSet rs = run_replicates(p, 8, 2, 9);
  const PairSet ps = hypothesis_data_pairs(p, rs, 3);
  CHECK(ps.w.rows == 2);
  CHECK(ps.z.rows == 2);
  // The ERM hypothesis is the mean of its own sample; regenerated data
  // must reproduce that mean exactly.
  for (std::size_t j = 0; j < 2; ++j) {
    Stream train(rs.master_seed, 2 * rs.replicate_ids[j]);
    Matrix data;
    p.sample_z(8, train, data);
    CHECK(ps.z.at(j, 0) == data.at(3, 0));
    double mean = 0.0;
    for (std::size_t i = 0; i < 8; ++i) mean += data.at(i, 0);
    CHECK(ps.w.at(j, 0) == doctest::Approx(mean / 8.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(hypothesis_data_pairs(p, rs, 8), DomainError);
}

TEST_CASE("hypothesis/data correlation is about 1/sqrt(n)") {
  GaussianMeanProblem p(0.0, 1.0);
  const std::size_t n = 25;
  const ReplicateSet rs = run_replicates(p, n, 20000, 17);
  const PairSet ps = hypothesis_data_pairs(p, rs, 0);
  double sw = 0.0, sz = 0.0, sww = 0.0, szz = 0.0, swz = 0.0;
  const auto m = static_cast<double>(rs.m);
  for (std::size_t j = 0; j < rs.m; ++j) {
    const double w = ps.w.at(j, 0), z = ps.z.at(j, 0);
    sw += w;
    sz += z;
    sww += w * w;
    szz += z * z;
    swz += w * z;
  }
  const double cov = swz / m - sw / m * sz / m;
  const double corr = cov / std::sqrt((sww / m - sw / m * sw / m) *
                                      (szz / m - sz / m * sz / m));
  CHECK(corr == doctest::Approx(1.0 / std::sqrt(25.0)).epsilon(0.15));
}

TEST_CASE("per-index statistics are exchangeable") {
  GaussianMeanProblem p(0.0, 1.0);
  const ReplicateSet rs = run_replicates(p, 40, 20000, 23);
  auto column_mean_se = [&](std::size_t i) {
    double s = 0.0, sq = 0.0;
    const auto m = static_cast<double>(rs.m);
    for (std::size_t j = 0; j < rs.m; ++j) {
      s += rs.joint_r.at(j, i);
      sq += rs.joint_r.at(j, i) * rs.joint_r.at(j, i);
    }
    const double mean = s / m;
    const double se = std::sqrt(std::max(0.0, sq / m - mean * mean) / m);
    return std::pair{mean, se};
  };
  const auto [m0, se0] = column_mean_se(0);
  const auto [m1, se1] = column_mean_se(39);
  CHECK(std::abs(m0 - m1) <= 3.0 * std::sqrt(se0 * se0 + se1 * se1));
}

TEST_CASE("joint mean never exceeds product mean for erm") {
  GaussianMeanProblem p(0.0, 1.0);
  const ReplicateSet rs = run_replicates(p, 30, 5000, 31);
  CHECK(matrix_mean(rs.joint_r) <= matrix_mean(rs.product_r));
}

TEST_CASE("dump and load round-trips every field") {
  GaussianMeanProblem p(0.3, 1.2);
  const ReplicateSet rs = run_replicates(p, 12, 40, 55);
  const std::string path = temp_file("fastrate_dump_test.bin");
  save_replicates(rs, path);
  const ReplicateSet back = load_replicates(path);
  CHECK(back.problem_id == rs.problem_id);
  CHECK(back.n == rs.n);
  CHECK(back.m == rs.m);
  CHECK(back.master_seed == rs.master_seed);
  CHECK(back.excluded == rs.excluded);
  CHECK(back.replicate_ids == rs.replicate_ids);
  CHECK(back.hypotheses == rs.hypotheses);
  CHECK(back.joint_r == rs.joint_r);
  CHECK(back.product_r == rs.product_r);
  CHECK(back.joint_loss == rs.joint_loss);
  CHECK(back.product_loss == rs.product_loss);
  std::filesystem::remove(path);
}

TEST_CASE("corrupt dump header is rejected") {
  const std::string path = temp_file("fastrate_bad_dump.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a dump";
  }
  CHECK_THROWS_AS(load_replicates(path), ConfigError);
  std::filesystem::remove(path);
}
