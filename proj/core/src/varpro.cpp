#include "rvp/varpro.hpp"

#include <cmath>

#include "rvp/errors.hpp"
#include "rvp/log.hpp"
#include "rvp/quant.hpp"

namespace rvp {

ProjectionResult project(const MTBasisMatrix& basis, const Eigen::VectorXcd& signal) {
  if (signal.size() != basis.rows()) {
    throw ValidationError("project: signal length " + std::to_string(signal.size()) +
                          " does not match basis rows " + std::to_string(basis.rows()));
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(basis.values);
  if (basis.cols() > 0) {
    const Eigen::VectorXd pivots = qr.matrixQR().diagonal().cwiseAbs();
    const double pivot_max = pivots.maxCoeff();
    const double pivot_min = pivots.minCoeff();
    if (pivot_min < 1e-10 * pivot_max) {
      throw RankDeficient("project: basis numerically rank deficient (pivot ratio " +
                          std::to_string(pivot_max > 0 ? pivot_min / pivot_max : 0.0) + ")");
    }
  }

  ProjectionResult res;
  res.coefficients = qr.solve(signal);
  res.reconstruction = basis.values * res.coefficients;
  res.residual_l2 = (signal - res.reconstruction).norm();
  return res;
}

double vp_residual(const std::vector<DiscPoint>& poles, const PoleConfiguration& config,
                   const Eigen::VectorXcd& signal) {
  if (static_cast<int>(poles.size()) != config.n) {
    throw ValidationError("vp_residual: expected " + std::to_string(config.n) +
                          " poles, got " + std::to_string(poles.size()));
  }
  PoleVector b = PoleVector::expanded(poles, config.mults());
  MTBasisMatrix basis = build_mt_matrix(b, static_cast<std::size_t>(signal.size()));
  return project(basis, signal).residual_l2;
}

CostBreakdown generalized_cost(const std::vector<DiscPoint>& poles, int dim_index,
                               const Eigen::VectorXcd& signal, double alpha,
                               bool quantize) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError("generalized_cost: alpha must be in (0, 1]");
  }
  const PoleConfiguration& config = architecture_lookup(dim_index);
  if (static_cast<int>(poles.size()) != config.n) {
    throw ValidationError("generalized_cost: expected " + std::to_string(config.n) +
                          " poles for dimension " + std::to_string(dim_index));
  }

  const auto m = static_cast<std::size_t>(signal.size());
  double residual = 0.0;
  if (quantize) {
    std::vector<DiscPoint> snapped(poles.size());
    for (std::size_t i = 0; i < poles.size(); ++i) {
      cx q = snap_to_grid(poles[i].c(), kPoleBits, kPoleBits);
      snapped[i] = DiscPoint{q.real(), q.imag()};
    }
    PoleVector b = PoleVector::expanded(snapped, config.mults());
    MTBasisMatrix basis = build_mt_matrix(b, m);
    ProjectionResult proj = project(basis, signal);

    // Quantize coefficients in the orthonormal-column scale sqrt(M) * c, where
    // their magnitudes are bounded by ~1 for unit-norm signals.
    const double scale = std::sqrt(static_cast<double>(m));
    Eigen::VectorXcd cq(proj.coefficients.size());
    for (Eigen::Index j = 0; j < proj.coefficients.size(); ++j) {
      cx chat = proj.coefficients[j] * scale;
      if (std::abs(chat) > 1.0 + 1e-9) {
        log_debug("coefficient magnitude %.6f exceeds 1; clamped by the 7-bit grid",
                  std::abs(chat));
      }
      cq[j] = snap_to_grid(chat, kCoeffBits, kCoeffBits) / scale;
    }
    residual = (signal - basis.values * cq).norm();
  } else {
    residual = vp_residual(poles, config, signal);
  }

  CostBreakdown cost;
  cost.prd = 100.0 * residual;
  cost.rcr = 100.0 * 2.0 * static_cast<double>(config.n + config.total_N) /
             static_cast<double>(m);
  cost.alpha = alpha;
  cost.dim_index = dim_index;
  cost.total = alpha * cost.prd + (1.0 - alpha) * cost.rcr;
  return cost;
}

}  // namespace rvp
