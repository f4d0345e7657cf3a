#pragma once

#include <cstdint>

#include "trajsmooth/scene.hpp"

namespace trajsmooth {

// Mixed-class urban scenes: vehicles on a two-lane road with repulsive
// slow-down when something is ahead, pedestrians on sidewalks with
// occasional road crossings.
struct UrbanConfig {
  int scenes = 20;
  int frames = 40;
  double dt = 0.5;
  int vehicles = 3;
  int pedestrians = 2;
  double interaction_radius = 12.0;  // m; vehicles brake for agents ahead within this
  double speed_min = 8.0;            // vehicle m/s
  double speed_max = 14.0;
  double ped_speed_min = 0.8;
  double ped_speed_max = 1.6;
  double accel_noise = 0.6;  // m/s^2 std on vehicle speed
  double ped_noise = 0.3;    // m/s^2 std on pedestrian velocity
  double cross_prob = 0.5;   // chance a pedestrian crosses the road during the scene
};

// Highway gap-acceptance scenes: an ego vehicle beside a two-vehicle gap in
// the adjacent lane, plus a slower lead vehicle in its own lane. At the
// decision frame the ego merges when gap_size + noise exceeds the threshold
// (gap_min + gap_max) / 2, otherwise it brakes and stays.
struct GapConfig {
  int scenes = 200;
  int frames = 40;
  double dt = 0.5;
  double gap_min = 5.0;        // m
  double gap_max = 35.0;       // m
  double decision_noise = 2.0; // m; sigma of the threshold noise
  double speed_min = 10.0;
  double speed_max = 14.0;
  int decision_frame = 12;     // frame number of the merge/brake decision
};

// Lane geometry used by the gap generator: ego lane centered at y = 0, target
// lane at y = kGapLaneOffset. Crossing kGapLaneBoundaryY counts as a merge.
inline constexpr double kGapLaneOffset = 3.5;
inline constexpr double kGapLaneBoundaryY = kGapLaneOffset / 2.0;

// The deciding vehicle is always written first.
inline constexpr int kGapEgoAgentId = 0;

// The generator's accept rule, exposed for direct testing.
inline bool gap_accept_decision(double gap_size, double threshold, double noise) {
  return gap_size + noise > threshold;
}

SceneSet generate_urban(const UrbanConfig& config, std::uint64_t seed);
SceneSet generate_gap(const GapConfig& config, std::uint64_t seed);

}  // namespace trajsmooth
