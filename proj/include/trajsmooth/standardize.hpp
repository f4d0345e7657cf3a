#pragma once

#include <span>
#include <utility>

#include "trajsmooth/scene.hpp"

namespace trajsmooth {

// Per-coordinate affine position transform: x' = (x - mean) / scale.
// Velocities are divided by the same scale (no shift), which keeps them the
// finite difference of the transformed positions. Zero-variance coordinates
// get the 1e-6 scale floor and set degenerate_warning.
struct Standardizer {
  Eigen::Vector2d mean{Eigen::Vector2d::Zero()};
  Eigen::Vector2d scale{Eigen::Vector2d::Ones()};
  bool degenerate_warning{false};

  Eigen::Vector2d apply_position(const Eigen::Vector2d& p) const {
    return (p - mean).cwiseQuotient(scale);
  }
  Eigen::Vector2d invert_position(const Eigen::Vector2d& p) const {
    return p.cwiseProduct(scale) + mean;
  }
  Scene apply(const Scene& scene) const;
  SceneSet apply(const SceneSet& set) const;
  Scene invert(const Scene& scene) const;
};

inline constexpr double kStandardizerScaleFloor = 1e-6;

// Moments are computed over present states of the listed scenes only (pass
// the training indices to avoid test leakage).
Standardizer fit_standardizer(const SceneSet& set, std::span<const int> scene_indices);

// Fit on the whole set and apply; the caller passes the training portion.
std::pair<SceneSet, Standardizer> standardize(const SceneSet& set);

}  // namespace trajsmooth
