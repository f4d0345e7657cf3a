#pragma once

#include <array>
#include <vector>

#include "trajsmooth/scene.hpp"

namespace trajsmooth {

// Per-step neighbor lists of one focal agent over the window t-T..t, grouped
// by edge class. Key k is the neighbor's semantic class (the focal class is
// fixed, giving the ordered class-pair keys (focal, Vehicle) and
// (focal, Pedestrian)). Ids are sorted ascending so graphs compare exactly.
struct NeighborGraph {
  int focal_id{0};
  AgentClass focal_class{AgentClass::Vehicle};
  int t_index{0};
  int history_steps{0};  // T; lists cover T+1 steps, index 0 = t-T
  std::array<std::vector<std::vector<int>>, kNumAgentClasses> lists;
};

// Neighbors are agents within Euclidean `radius` of the focal position at
// each step; absent agents (and steps before the scene start or where the
// focal is absent) contribute nothing. The focal must be present at t_index.
NeighborGraph build_neighbor_graph(const Scene& scene, int focal_id, int t_index,
                                   int history_steps, double radius);

// The paper never states a neighbor radius; these defaults are the artifact's
// stand-in, keyed on the focal class.
inline constexpr double kVehicleAttentionRadius = 20.0;
inline constexpr double kPedestrianAttentionRadius = 10.0;
double default_attention_radius(AgentClass focal_class);

}  // namespace trajsmooth
