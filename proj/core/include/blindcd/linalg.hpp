#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>

namespace blindcd {

struct NormEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// out = A * in for a symmetric operator A.
using SymmetricOperator = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

/// Power iteration for max |eigenvalue| of a symmetric operator. Stops when
/// the relative change of the estimate drops below `tol` or after `max_iter`
/// steps. A start vector that is annihilated is retried once with a fresh
/// seed; a second annihilation means the operator is zero on both starts and
/// the estimate is 0.
NormEstimate power_iteration_norm(const SymmetricOperator& op, int n, double tol, int max_iter,
                                  std::uint64_t seed);

/// Spectral norm of a dense symmetric matrix by power iteration.
NormEstimate symmetric_spectral_norm(const Eigen::MatrixXd& a, double tol = 1e-6, int max_iter = 1000,
                                     std::uint64_t seed = 0x5eed);

/// max |a_ij - a_ji|.
double asymmetry(const Eigen::MatrixXd& a);

}  // namespace blindcd
