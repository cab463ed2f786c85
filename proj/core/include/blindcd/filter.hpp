#pragma once

#include "blindcd/graph_model.hpp"
#include "blindcd/linalg.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace blindcd {

/// Polynomial graph filter H(L) = sum_k h_k L^k with coefficients h_0..h_T.
class GraphFilter {
 public:
  explicit GraphFilter(std::vector<double> coeffs);

  static GraphFilter identity() { return GraphFilter({1.0}); }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  std::uint64_t hash() const;

 private:
  std::vector<double> coeffs_;
};

/// h(lambda) by Horner's rule.
double generating_polynomial_at(const GraphFilter& filter, double lambda);

/// H(L) x by Horner recursion: T sparse matvecs, no matrix powers.
Eigen::VectorXd apply_filter(const GraphFilter& filter, const LaplacianMatrix& l, const Eigen::VectorXd& x);

/// Dense H(L); intended for n up to a few hundred.
Eigen::MatrixXd dense_filter_matrix(const GraphFilter& filter, const LaplacianMatrix& l);

/// Coefficients of (1 - alpha * lambda)^p.
GraphFilter lowpass_power_filter(double alpha, int p);

/// alpha = 1 / ((4 + 4 gamma) ln n), the step used with the gamma-parametrised
/// planted partition so that |1 - alpha lambda| stays below 1 on the nonzero
/// Laplacian spectrum of typical draws.
double diffusion_step(double gamma, int n);

/// Estimate of ||H(L)||_2 (max |h(lambda_i)|) by power iteration.
NormEstimate filter_spectral_norm(const GraphFilter& filter, const LaplacianMatrix& l, double tol = 1e-6,
                                  int max_iter = 1000, std::uint64_t seed = 0xf117e5);

}  // namespace blindcd
