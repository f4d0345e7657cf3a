// Independent oracles used to pin expected values: central finite
// differences for gradients, a brute-force pairwise AUC, and a direct
// Gaussian-mixture density for the KDE. None of them share code with the
// implementation paths they check.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace oracles {

// central finite differences of a scalar function, one coordinate at a time
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& theta,
    double eps = 1e-6) {
  Eigen::VectorXd grad(theta.size());
  Eigen::VectorXd probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    probe(i) = theta(i) + eps;
    const double fp = f(probe);
    probe(i) = theta(i) - eps;
    const double fm = f(probe);
    probe(i) = theta(i);
    grad(i) = (fp - fm) / (2.0 * eps);
  }
  return grad;
}

inline double max_rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            double floor = 1e-8) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a(i)), std::abs(b(i)), floor});
    worst = std::max(worst, std::abs(a(i) - b(i)) / denom);
  }
  return worst;
}

// P(score+ > score-) + 0.5 P(equal) by explicit enumeration of all pairs
inline double brute_force_auc(std::span<const double> scores,
                              std::span<const std::uint8_t> labels) {
  double wins = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// equal-weight axis-aligned Gaussian mixture, evaluated naively (no
// log-sum-exp); negative log density at gt averaged over the first h steps
inline double direct_kde_nll(std::span<const Eigen::Matrix2Xd> samples,
                             const Eigen::Matrix2Xd& gt, int h, double hx, double hy) {
  const double n = static_cast<double>(samples.size());
  double total = 0.0;
  for (int s = 0; s < h; ++s) {
    double density = 0.0;
    for (const auto& traj : samples) {
      const double dx = (gt(0, s) - traj(0, s)) / hx;
      const double dy = (gt(1, s) - traj(1, s)) / hy;
      density += std::exp(-0.5 * (dx * dx + dy * dy)) /
                 (2.0 * M_PI * hx * hy * n);
    }
    total += -std::log(density);
  }
  return total / h;
}

}  // namespace oracles
