#include "trajsmooth/neighbor_graph.hpp"

#include <algorithm>

#include "trajsmooth/errors.hpp"

namespace trajsmooth {

double default_attention_radius(AgentClass focal_class) {
  return focal_class == AgentClass::Vehicle ? kVehicleAttentionRadius
                                            : kPedestrianAttentionRadius;
}

NeighborGraph build_neighbor_graph(const Scene& scene, int focal_id, int t_index,
                                   int history_steps, double radius) {
  const AgentTrack* focal = scene.find_track(focal_id);
  if (focal == nullptr) {
    throw ValidationError("focal agent " + std::to_string(focal_id) + " not in scene " +
                          std::to_string(scene.scene_id));
  }
  if (t_index < 0 || t_index >= scene.num_frames() || !focal->present_at(t_index)) {
    throw ValidationError("focal agent " + std::to_string(focal_id) +
                          " absent at frame index " + std::to_string(t_index));
  }
  if (history_steps < 0) throw ValidationError("history_steps must be >= 0");
  if (radius < 0.0) throw ValidationError("radius must be >= 0");

  NeighborGraph graph;
  graph.focal_id = focal_id;
  graph.focal_class = focal->semantic_class;
  graph.t_index = t_index;
  graph.history_steps = history_steps;
  for (auto& per_class : graph.lists) {
    per_class.assign(static_cast<std::size_t>(history_steps) + 1, {});
  }

  for (int step = 0; step <= history_steps; ++step) {
    const int tau = t_index - history_steps + step;
    if (tau < 0 || !focal->present_at(tau)) continue;
    const Eigen::Vector2d focal_pos = focal->position(tau);
    for (const auto& tr : scene.tracks) {
      if (tr.agent_id == focal_id || !tr.present_at(tau)) continue;
      if ((tr.position(tau) - focal_pos).norm() > radius) continue;
      graph.lists[static_cast<std::size_t>(tr.semantic_class)][static_cast<std::size_t>(step)]
          .push_back(tr.agent_id);
    }
  }
  for (auto& per_class : graph.lists) {
    for (auto& ids : per_class) std::sort(ids.begin(), ids.end());
  }
  return graph;
}

}  // namespace trajsmooth
