#include "confreg/glm.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "confreg/errors.hpp"

namespace confreg::glm {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

DesignSpec DesignSpec::intercept_only(std::size_t n) {
  DesignSpec d;
  d.X = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), 1);
  d.L = Eigen::VectorXd::Ones(1);
  return d;
}

void DesignSpec::validate() const {
  const auto n = X.rows();
  const auto p = X.cols();
  if (p == 0 || n == 0) throw DesignError("design matrix is empty");
  if (L.size() != p) {
    throw DesignError("contrast has " + std::to_string(L.size()) + " entries, design has " + std::to_string(p) +
                      " columns");
  }
  if (!X.allFinite() || !L.allFinite()) throw DesignError("design or contrast contains non-finite values");
  if (p > n - 1) {
    throw DesignError("design needs p <= n - 1 (p = " + std::to_string(p) + ", n = " + std::to_string(n) + ")");
  }
  if (L.isZero(0.0)) throw DesignError("contrast vector is zero");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p) throw DesignError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " < " + std::to_string(p) + ")");
}

GlmFit fit(const FieldStack& data, const DesignSpec& design) {
  design.validate();
  const auto n = static_cast<Eigen::Index>(data.n());
  if (design.X.rows() != n) {
    throw InvalidParameterError("design has " + std::to_string(design.X.rows()) + " rows, stack has n = " +
                                std::to_string(data.n()));
  }
  const auto p = design.X.cols();
  const auto pixels = static_cast<Eigen::Index>(data.pixels());
  const Lattice lattice = data.lattice();

  const Eigen::MatrixXd xtx_inv = (design.X.transpose() * design.X).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd projector = xtx_inv * design.X.transpose();  // p x n
  const double contrast_scale = std::sqrt(design.L.dot(xtx_inv * design.L));

  Eigen::Map<const RowMatrix> y(data.values().data(), n, pixels);
  const RowMatrix beta = projector * y;  // p x pixels

  FieldStack residuals(lattice, data.n());
  Eigen::Map<RowMatrix> resid(residuals.values().data(), n, pixels);
  resid.noalias() = y - design.X * beta;

  GlmFit out{ScalarField(lattice), ScalarField(lattice), ScalarField(lattice), 1.0 / std::sqrt(static_cast<double>(n)),
             FieldStack(lattice, 0), data.n()};

  const Eigen::RowVectorXd mu = design.L.transpose() * beta;
  Eigen::RowVectorXd ss = Eigen::RowVectorXd::Zero(pixels);
  Eigen::RowVectorXd scale = Eigen::RowVectorXd::Zero(pixels);
  for (Eigen::Index l = 0; l < n; ++l) {
    ss.array() += resid.row(l).array().square();
    scale = scale.cwiseMax(y.row(l).cwiseAbs());
  }
  const Eigen::RowVectorXd sigma = (ss / static_cast<double>(n - p)).cwiseSqrt();

  std::vector<std::size_t> degenerate;
  constexpr double kTiny = 64.0 * std::numeric_limits<double>::epsilon();
  for (Eigen::Index s = 0; s < pixels; ++s) {
    if (!(sigma[s] > kTiny * scale[s])) degenerate.push_back(static_cast<std::size_t>(s));
  }
  if (!degenerate.empty()) throw DegeneratePixelError(std::move(degenerate));

  for (Eigen::Index s = 0; s < pixels; ++s) {
    const auto i = static_cast<std::size_t>(s);
    out.mu_hat[i] = mu[s];
    out.sigma_hat[i] = sigma[s];
    out.se[i] = sigma[s] * contrast_scale;
  }
  const Eigen::RowVectorXd inv_sigma = sigma.cwiseInverse();
  for (Eigen::Index l = 0; l < n; ++l) resid.row(l).array() *= inv_sigma.array();
  out.residuals = std::move(residuals);
  return out;
}

}  // namespace confreg::glm
