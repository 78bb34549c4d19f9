#pragma once

#include <Eigen/Dense>

#include "confreg/field.hpp"

namespace confreg::glm {

/// Error covariance structure per pixel. Only the independent, homoscedastic
/// model Sigma(s) = sigma(s)^2 I is implemented.
enum class CovarianceModel { iid };

struct DesignSpec {
  Eigen::MatrixXd X;  ///< n x p design
  Eigen::VectorXd L;  ///< p contrast
  CovarianceModel covariance = CovarianceModel::iid;

  /// Intercept-only design with contrast [1] (the one-sample mean).
  static DesignSpec intercept_only(std::size_t n);

  /// Throws DesignError unless X has full column rank p <= n - 1 and L != 0.
  void validate() const;
};

/// Per-condition fit products.
struct GlmFit {
  ScalarField mu_hat;     ///< L' beta_hat
  ScalarField se;         ///< contrast standard error sigma_hat sqrt(L'(X'X)^-1 L)
  ScalarField sigma_hat;  ///< residual standard deviation, divisor n - p
  double tau_n;           ///< n^-1/2
  FieldStack residuals;   ///< (Y - X beta_hat) / sigma_hat
  std::size_t n;
};

/// Ordinary least squares at every pixel. Throws DesignError for an invalid
/// design, InvalidParameterError if rows(X) != data.n(), and
/// DegeneratePixelError listing every pixel with zero residual variance.
GlmFit fit(const FieldStack& data, const DesignSpec& design);

}  // namespace confreg::glm
