#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "rvp/architecture.hpp"
#include "rvp/errors.hpp"
#include "rvp/mt.hpp"
#include "rvp/rng.hpp"
#include "rvp/varpro.hpp"

using rvp::cx;
using rvp::DiscPoint;
using rvp::PoleVector;

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

Eigen::VectorXcd random_signal(rvp::Rng& rng, std::size_t m) {
  Eigen::VectorXcd f(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < f.size(); ++i)
    f(i) = cx{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  return f;
}

PoleVector random_poles(rvp::Rng& rng, std::size_t n, double radius) {
  PoleVector b;
  for (std::size_t i = 0; i < n; ++i) b.entries.push_back(rng.in_disc(radius).c());
  return b;
}

// Least squares by normal equations — an algorithm independent of the
// factorization used by project().
double normal_equation_residual(const Eigen::MatrixXcd& theta, const Eigen::VectorXcd& f) {
  const Eigen::MatrixXcd gram = theta.adjoint() * theta;
  const Eigen::VectorXcd c = gram.ldlt().solve(theta.adjoint() * f);
  return (f - theta * c).norm();
}

}  // namespace

TEST_SUITE("varpro") {

TEST_CASE("signals in the column space project with vanishing residual") {
  rvp::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const PoleVector b = random_poles(rng, 5, 0.9);
    const auto basis = rvp::build_mt_matrix(b, 128);
    const Eigen::VectorXcd c = random_signal(rng, 5);
    const Eigen::VectorXcd f = basis.values * c;
    const auto result = rvp::project(basis, f);
    CHECK(result.residual_l2 < 1e-9);
    CHECK((result.coefficients - c).norm() < 1e-9);
  }
}

TEST_CASE("zero-pole coefficients equal leading DFT bins") {
  rvp::Rng rng(32);
  const std::size_t m = 64;
  const std::size_t n = 6;
  PoleVector b;
  b.entries.assign(n, cx{0.0, 0.0});
  const auto basis = rvp::build_mt_matrix(b, m);
  const Eigen::VectorXcd f = random_signal(rng, m);
  const auto result = rvp::project(basis, f);
  for (std::size_t j = 0; j < n; ++j) {
    cx bin{0.0, 0.0};
    for (std::size_t k = 0; k < m; ++k) {
      const double theta = -kTau * static_cast<double>(k * j) / static_cast<double>(m);
      bin += f(static_cast<Eigen::Index>(k)) * cx{std::cos(theta), std::sin(theta)};
    }
    bin /= static_cast<double>(m);
    CHECK(std::abs(result.coefficients(static_cast<Eigen::Index>(j)) - bin) < 1e-10);
  }
}

TEST_CASE("signals orthogonal to the column space project to zero") {
  rvp::Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const PoleVector b = random_poles(rng, 4, 0.85);
    const auto basis = rvp::build_mt_matrix(b, 96);
    const Eigen::VectorXcd g = random_signal(rng, 96);
    const auto pg = rvp::project(basis, g);
    const Eigen::VectorXcd f = g - pg.reconstruction;  // deflated
    const auto result = rvp::project(basis, f);
    CHECK(result.coefficients.norm() < 1e-9 * f.norm());
    CHECK(result.residual_l2 == doctest::Approx(f.norm()).epsilon(1e-10));
  }
}

TEST_CASE("residual is orthogonal to every basis column") {
  rvp::Rng rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    const PoleVector b = random_poles(rng, 6, 0.9);
    const auto basis = rvp::build_mt_matrix(b, 128);
    const Eigen::VectorXcd f = random_signal(rng, 128);
    const auto result = rvp::project(basis, f);
    const Eigen::VectorXcd residual = f - result.reconstruction;
    CHECK(result.residual_l2 == doctest::Approx(residual.norm()).epsilon(1e-10));
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
      CHECK(std::abs(basis.values.col(j).dot(residual)) < 1e-8 * f.norm());
    }
  }
}

TEST_CASE("projection is idempotent") {
  rvp::Rng rng(35);
  const PoleVector b = random_poles(rng, 5, 0.9);
  const auto basis = rvp::build_mt_matrix(b, 100);
  const Eigen::VectorXcd f = random_signal(rng, 100);
  const auto once = rvp::project(basis, f);
  const auto twice = rvp::project(basis, once.reconstruction);
  CHECK((twice.reconstruction - once.reconstruction).norm() < 1e-10);
}

TEST_CASE("projection rejects mismatched lengths and duplicate columns") {
  rvp::Rng rng(36);
  const PoleVector b = random_poles(rng, 4, 0.8);
  auto basis = rvp::build_mt_matrix(b, 64);
  CHECK_THROWS_AS(rvp::project(basis, random_signal(rng, 63)), rvp::ValidationError);

  basis.values.col(1) = basis.values.col(0);  // exactly dependent columns
  CHECK_THROWS_AS(rvp::project(basis, random_signal(rng, 64)), rvp::RankDeficient);
}

TEST_CASE("variable projection of an exact model vanishes") {
  rvp::Rng rng(37);
  const auto& row = rvp::architecture_lookup(7);
  std::vector<DiscPoint> poles;
  for (int i = 0; i < row.n; ++i) poles.push_back(rng.in_disc(0.8));
  const PoleVector pv = rvp::PoleVector::expanded(poles, row.mults());
  const auto basis = rvp::build_mt_matrix(pv, 200);
  const Eigen::VectorXcd f = basis.values * random_signal(rng, pv.size());
  CHECK(rvp::vp_residual(poles, row, f) < 1e-9 * f.norm());
}

TEST_CASE("variable projection of the zero signal is zero") {
  rvp::Rng rng(38);
  const auto& row = rvp::architecture_lookup(3);
  std::vector<DiscPoint> poles;
  for (int i = 0; i < row.n; ++i) poles.push_back(rng.in_disc(0.8));
  const Eigen::VectorXcd f = Eigen::VectorXcd::Zero(150);
  CHECK(rvp::vp_residual(poles, row, f) == 0.0);
}

TEST_CASE("variable projection equals the normal-equation minimum") {
  rvp::Rng rng(39);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + static_cast<int>(rng.u01() * 30.0) % 30;
    const auto& row = rvp::architecture_lookup(dim);
    std::vector<DiscPoint> poles;
    for (int i = 0; i < row.n; ++i) poles.push_back(rng.in_disc(0.8));
    const std::size_t m = 64 + static_cast<std::size_t>(rng.u01() * 64.0);
    const Eigen::VectorXcd f = random_signal(rng, m);

    const double vp = rvp::vp_residual(poles, row, f);
    const PoleVector pv = rvp::PoleVector::expanded(poles, row.mults());
    const auto basis = rvp::build_mt_matrix(pv, m);
    const double oracle = normal_equation_residual(basis.values, f);
    CHECK(vp == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("nested multiplicities never increase the residual") {
  rvp::Rng rng(40);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<DiscPoint> poles{rng.in_disc(0.8), rng.in_disc(0.8)};
    const Eigen::VectorXcd f = random_signal(rng, 128);

    rvp::PoleConfiguration small;
    small.n = 2;
    small.multiplicities = {1, 2, 0};
    small.total_N = 3;
    rvp::PoleConfiguration large;
    large.n = 2;
    large.multiplicities = {2, 3, 0};
    large.total_N = 5;

    const double rs = rvp::vp_residual(poles, small, f);
    const double rl = rvp::vp_residual(poles, large, f);
    CHECK(rl <= rs + 1e-10);
  }
}

TEST_CASE("cost of an exact model reduces to the dimension penalty") {
  rvp::Rng rng(41);
  const int dim = 7;
  const auto& row = rvp::architecture_lookup(dim);
  std::vector<DiscPoint> poles;
  for (int i = 0; i < row.n; ++i) poles.push_back(rng.in_disc(0.7));
  const PoleVector pv = rvp::PoleVector::expanded(poles, row.mults());
  const auto basis = rvp::build_mt_matrix(pv, 256);
  Eigen::VectorXcd f = basis.values * random_signal(rng, pv.size());
  f /= f.norm();

  const auto cost = rvp::generalized_cost(poles, dim, f, 0.5, false);
  CHECK(cost.prd < 1e-7);
  CHECK(cost.total == doctest::Approx(0.5 * cost.rcr).epsilon(1e-9));
}

TEST_CASE("alpha one removes the dimension penalty") {
  rvp::Rng rng(42);
  const auto& row = rvp::architecture_lookup(5);
  std::vector<DiscPoint> poles;
  for (int i = 0; i < row.n; ++i) poles.push_back(rng.in_disc(0.8));
  Eigen::VectorXcd f = random_signal(rng, 180);
  f /= f.norm();
  const auto cost = rvp::generalized_cost(poles, 5, f, 1.0, false);
  CHECK(cost.total == cost.prd);
}

TEST_CASE("dimension penalty follows the architecture row") {
  // dim 1 holds (2, 4): 2 poles, 6 coefficients, penalty 2*8/300*100.
  rvp::Rng rng(43);
  const auto& row = rvp::architecture_lookup(1);
  REQUIRE(row.n + row.total_N == 8);
  std::vector<DiscPoint> poles;
  for (int i = 0; i < row.n; ++i) poles.push_back(rng.in_disc(0.8));
  Eigen::VectorXcd f = random_signal(rng, 300);
  f /= f.norm();
  const auto cost = rvp::generalized_cost(poles, 1, f, 0.5, false);
  CHECK(cost.rcr == doctest::Approx(2.0 * 8.0 / 300.0 * 100.0).epsilon(1e-12));
}

TEST_CASE("stored cost decomposition is exact") {
  rvp::Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 1 + static_cast<int>(rng.u01() * 30.0) % 30;
    const auto& row = rvp::architecture_lookup(dim);
    std::vector<DiscPoint> poles;
    for (int i = 0; i < row.n; ++i) poles.push_back(rng.in_disc(0.8));
    Eigen::VectorXcd f = random_signal(rng, 200);
    f /= f.norm();
    const double alpha = rng.uniform(0.1, 1.0);
    const auto cost = rvp::generalized_cost(poles, dim, f, alpha, trial % 2 == 0);
    CHECK(cost.prd >= 0.0);
    CHECK(cost.rcr > 0.0);
    CHECK(std::abs(cost.total - (alpha * cost.prd + (1.0 - alpha) * cost.rcr)) < 1e-12);
    CHECK(cost.alpha == alpha);
    CHECK(cost.dim_index == dim);
  }
}

TEST_CASE("grid snapping cannot improve an exact fit") {
  // With the signal built from off-grid poles the unquantized projection is
  // exact, so the snapped version can only do worse (or tie on the grid).
  rvp::Rng rng(45);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 1 + static_cast<int>(rng.u01() * 30.0) % 30;
    const auto& row = rvp::architecture_lookup(dim);
    std::vector<DiscPoint> poles;
    for (int i = 0; i < row.n; ++i) poles.push_back(rng.in_disc(0.85));
    const PoleVector pv = rvp::PoleVector::expanded(poles, row.mults());
    const auto basis = rvp::build_mt_matrix(pv, 160);
    Eigen::VectorXcd f = basis.values * random_signal(rng, pv.size());
    f /= f.norm();
    const auto plain = rvp::generalized_cost(poles, dim, f, 0.5, false);
    const auto quant = rvp::generalized_cost(poles, dim, f, 0.5, true);
    CHECK(quant.total >= plain.total - 1e-9);
  }
}

TEST_CASE("grid snapping on noise is scored, win or lose") {
  // On signals far from the subspace the snapped poles land in a different
  // subspace that fits better about as often as worse; the quantize-aware
  // cost must simply reflect whichever it is. Violations of the "snapping
  // never helps" heuristic are informative, not fatal.
  rvp::Rng rng(46);
  int improvements = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 1 + static_cast<int>(rng.u01() * 30.0) % 30;
    const auto& row = rvp::architecture_lookup(dim);
    std::vector<DiscPoint> poles;
    for (int i = 0; i < row.n; ++i) poles.push_back(rng.in_disc(0.85));
    Eigen::VectorXcd f = random_signal(rng, 160);
    f /= f.norm();
    const auto plain = rvp::generalized_cost(poles, dim, f, 0.5, false);
    const auto quant = rvp::generalized_cost(poles, dim, f, 0.5, true);
    CHECK(std::isfinite(quant.total));
    CHECK(quant.rcr == plain.rcr);
    if (quant.total < plain.total - 1e-9) ++improvements;
  }
  WARN_MESSAGE(improvements < 25, "grid snapping improved a noise fit in ",
               improvements, " of 50 trials");
}

}  // TEST_SUITE
