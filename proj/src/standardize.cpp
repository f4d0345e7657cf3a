#include "trajsmooth/standardize.hpp"

#include <cmath>

#include "trajsmooth/errors.hpp"

namespace trajsmooth {

Scene Standardizer::apply(const Scene& scene) const {
  Scene out = scene;
  for (auto& tr : out.tracks) {
    for (int f = 0; f < out.num_frames(); ++f) {
      if (!tr.present_at(f)) continue;
      tr.states.block<2, 1>(0, f) = apply_position(tr.states.block<2, 1>(0, f));
      tr.states.block<2, 1>(2, f) = tr.states.block<2, 1>(2, f).cwiseQuotient(scale);
    }
  }
  return out;
}

SceneSet Standardizer::apply(const SceneSet& set) const {
  SceneSet out;
  out.source_tag = set.source_tag;
  out.scenes.reserve(set.scenes.size());
  for (const auto& scene : set.scenes) out.scenes.push_back(apply(scene));
  return out;
}

Scene Standardizer::invert(const Scene& scene) const {
  Scene out = scene;
  for (auto& tr : out.tracks) {
    for (int f = 0; f < out.num_frames(); ++f) {
      if (!tr.present_at(f)) continue;
      tr.states.block<2, 1>(0, f) = invert_position(tr.states.block<2, 1>(0, f));
      tr.states.block<2, 1>(2, f) = tr.states.block<2, 1>(2, f).cwiseProduct(scale);
    }
  }
  return out;
}

Standardizer fit_standardizer(const SceneSet& set, std::span<const int> scene_indices) {
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  Eigen::Vector2d sum_sq = Eigen::Vector2d::Zero();
  long count = 0;
  for (const int idx : scene_indices) {
    const auto& scene = set.scenes.at(static_cast<std::size_t>(idx));
    for (const auto& tr : scene.tracks) {
      for (int f = 0; f < scene.num_frames(); ++f) {
        if (!tr.present_at(f)) continue;
        const Eigen::Vector2d p = tr.position(f);
        sum += p;
        sum_sq += p.cwiseProduct(p);
        ++count;
      }
    }
  }
  if (count == 0) throw ValidationError("standardizer fit over an empty set");

  Standardizer st;
  st.mean = sum / static_cast<double>(count);
  const Eigen::Vector2d var =
      (sum_sq / static_cast<double>(count) - st.mean.cwiseProduct(st.mean)).cwiseMax(0.0);
  for (int k = 0; k < 2; ++k) {
    const double sd = std::sqrt(var(k));
    if (sd < kStandardizerScaleFloor) {
      st.scale(k) = kStandardizerScaleFloor;
      st.degenerate_warning = true;
    } else {
      st.scale(k) = sd;
    }
  }
  return st;
}

std::pair<SceneSet, Standardizer> standardize(const SceneSet& set) {
  std::vector<int> all(set.scenes.size());
  for (int i = 0; i < static_cast<int>(all.size()); ++i) all[static_cast<std::size_t>(i)] = i;
  Standardizer st = fit_standardizer(set, all);
  return {st.apply(set), st};
}

}  // namespace trajsmooth
