#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "trajsmooth/scene.hpp"

namespace trajsmooth {

// Euclidean error at step h (1-based) of the predicted point trajectory.
double fde(const Eigen::Matrix2Xd& pred, const Eigen::Matrix2Xd& gt, int h);

// Mean per-step Euclidean error over steps 1..h.
double ade(const Eigen::Matrix2Xd& pred, const Eigen::Matrix2Xd& gt, int h);

struct KdeBandwidth {
  enum class Rule { Scott, Fixed };
  Rule rule{Rule::Scott};
  double fixed_value{1.0};
  double floor{1e-3};  // m, applied to Scott's rule per coordinate

  static KdeBandwidth scott() { return {}; }
  static KdeBandwidth fixed(double value) { return {Rule::Fixed, value, 1e-3}; }
};

// Negative log-likelihood of gt under an axis-aligned Gaussian KDE fitted to
// the sampled positions independently per step, averaged over steps 1..h.
// Scott's factor is n^(-1/6) times the per-coordinate sample std.
double kde_nll(std::span<const Eigen::Matrix2Xd> samples, const Eigen::Matrix2Xd& gt, int h,
               const KdeBandwidth& bandwidth = KdeBandwidth::scott());

// Rank (Mann-Whitney) formulation: P(score+ > score-) + 0.5 P(equal).
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Trapezoidal integration of the ROC curve; agrees with the rank formulation
// and exists as the second algebraic route.
double auc_trapezoid(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Fraction of sampled ego trajectories whose lateral coordinate crosses the
// lane boundary within horizon_steps of the decision. Samples start at the
// step after the decision frame.
double gap_acceptance_score(std::span<const Eigen::Matrix2Xd> samples, const Scene& gap_scene,
                            int horizon_steps, double lane_boundary_y);

// ---- results table ----

struct MetricRow {
  std::string model;
  double beta{0.0};
  std::string split;
  std::string metric;  // fde | ade | kde_nll | auc
  double horizon_s{0.0};
  double value{0.0};
  std::uint64_t seed{0};
};

struct MetricsTable {
  std::vector<MetricRow> rows;

  // throws ValidationError on duplicate (model, beta, split, metric,
  // horizon, seed) keys
  void append(MetricRow row);
  void append(const MetricsTable& other);
};

std::string results_to_csv(const MetricsTable& table);
MetricsTable results_from_csv(const std::string& text);
void save_results(const MetricsTable& table, const std::filesystem::path& path);
MetricsTable load_results(const std::filesystem::path& path);

}  // namespace trajsmooth
