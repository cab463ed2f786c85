#include "blindcd/linalg.hpp"

#include "blindcd/errors.hpp"
#include "blindcd/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace blindcd {
namespace {

Eigen::VectorXd random_unit(int n, std::uint64_t seed) {
  Engine eng = make_engine(seed);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(eng, -1.0, 1.0);
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

}  // namespace

NormEstimate power_iteration_norm(const SymmetricOperator& op, int n, double tol, int max_iter,
                                  std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("power_iteration_norm: n must be >= 1");
  if (max_iter < 1) throw std::invalid_argument("power_iteration_norm: max_iter must be >= 1");
  NormEstimate est;
  for (int attempt = 0; attempt < 2; ++attempt) {
    Eigen::VectorXd x = random_unit(n, derive_seed(seed, {static_cast<std::uint64_t>(attempt)}));
    Eigen::VectorXd ax;
    double prev = -1.0;
    bool annihilated = false;
    for (int it = 1; it <= max_iter; ++it) {
      op(x, ax);
      if (!ax.allFinite()) throw NumericalError("power iteration: non-finite operator output");
      const double value = ax.norm();
      est = {value, it, false};
      if (value == 0.0) {
        annihilated = true;
        break;
      }
      if (prev >= 0.0 && std::abs(value - prev) <= tol * value) {
        est.converged = true;
        return est;
      }
      prev = value;
      x = ax / value;
    }
    if (!annihilated) return est;
  }
  est = {0.0, est.iterations, true};
  return est;
}

NormEstimate symmetric_spectral_norm(const Eigen::MatrixXd& a, double tol, int max_iter, std::uint64_t seed) {
  if (a.rows() != a.cols()) throw std::invalid_argument("symmetric_spectral_norm: matrix must be square");
  return power_iteration_norm([&a](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out.noalias() = a * in; },
                              static_cast<int>(a.rows()), tol, max_iter, seed);
}

double asymmetry(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) return INFINITY;
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace blindcd
