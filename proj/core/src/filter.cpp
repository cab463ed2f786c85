#include "blindcd/filter.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace blindcd {

GraphFilter::GraphFilter(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw std::invalid_argument("GraphFilter: coefficient list is empty");
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw std::invalid_argument("GraphFilter: non-finite coefficient");
  }
}

std::uint64_t GraphFilter::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double c : coeffs_) {
    const auto bits = std::bit_cast<std::uint64_t>(c);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

double generating_polynomial_at(const GraphFilter& filter, double lambda) {
  const auto& h = filter.coeffs();
  double acc = h.back();
  for (auto it = h.rbegin() + 1; it != h.rend(); ++it) acc = acc * lambda + *it;
  return acc;
}

Eigen::VectorXd apply_filter(const GraphFilter& filter, const LaplacianMatrix& l, const Eigen::VectorXd& x) {
  if (x.size() != l.n()) {
    throw std::invalid_argument("apply_filter: signal length " + std::to_string(x.size()) +
                                " does not match graph size " + std::to_string(l.n()));
  }
  const auto& h = filter.coeffs();
  Eigen::VectorXd y = h.back() * x;
  Eigen::VectorXd ly;
  for (auto it = h.rbegin() + 1; it != h.rend(); ++it) {
    l.multiply(y, ly);
    y = ly + *it * x;
  }
  return y;
}

Eigen::MatrixXd dense_filter_matrix(const GraphFilter& filter, const LaplacianMatrix& l) {
  const Eigen::MatrixXd dl = l.to_dense();
  const auto& h = filter.coeffs();
  const Eigen::Index n = l.n();
  Eigen::MatrixXd hm = h.back() * Eigen::MatrixXd::Identity(n, n);
  for (auto it = h.rbegin() + 1; it != h.rend(); ++it) {
    Eigen::MatrixXd next = dl * hm;
    next.diagonal().array() += *it;
    hm = std::move(next);
  }
  // L and H(L) commute and are symmetric; remove round-off asymmetry.
  return 0.5 * (hm + hm.transpose());
}

GraphFilter lowpass_power_filter(double alpha, int p) {
  if (p < 0) throw std::invalid_argument("lowpass_power_filter: p must be >= 0");
  if (!std::isfinite(alpha)) throw std::invalid_argument("lowpass_power_filter: alpha must be finite");
  if (p > 62) throw std::invalid_argument("lowpass_power_filter: p too large for exact binomials");
  std::vector<double> coeffs(static_cast<std::size_t>(p) + 1);
  std::uint64_t binom = 1;  // C(p, k), exact for p <= 62
  double scale = 1.0;       // (-alpha)^k
  for (int k = 0; k <= p; ++k) {
    coeffs[static_cast<std::size_t>(k)] = static_cast<double>(binom) * scale;
    binom = binom * static_cast<std::uint64_t>(p - k) / static_cast<std::uint64_t>(k + 1);
    scale *= -alpha;
  }
  return GraphFilter(std::move(coeffs));
}

double diffusion_step(double gamma, int n) {
  if (n < 2) throw std::invalid_argument("diffusion_step: n must be >= 2");
  if (!(gamma >= 0.0)) throw std::invalid_argument("diffusion_step: gamma must be >= 0");
  return 1.0 / ((4.0 + 4.0 * gamma) * std::log(static_cast<double>(n)));
}

NormEstimate filter_spectral_norm(const GraphFilter& filter, const LaplacianMatrix& l, double tol, int max_iter,
                                  std::uint64_t seed) {
  return power_iteration_norm(
      [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out = apply_filter(filter, l, in); }, l.n(), tol,
      max_iter, seed);
}

}  // namespace blindcd
