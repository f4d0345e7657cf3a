#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace trajsmooth {

enum class AgentClass : std::uint8_t { Vehicle = 0, Pedestrian = 1 };
inline constexpr int kNumAgentClasses = 2;

std::string to_string(AgentClass c);
AgentClass agent_class_from_string(const std::string& s);

// One agent's trajectory on the scene's frame grid. Columns of `states` are
// frames (rows: x, y, vx, vy); `presence` marks the frames the agent exists.
struct AgentTrack {
  int agent_id{0};
  AgentClass semantic_class{AgentClass::Vehicle};
  Eigen::Matrix4Xd states;
  std::vector<std::uint8_t> presence;

  bool present_at(int idx) const { return presence[static_cast<std::size_t>(idx)] != 0; }
  Eigen::Vector2d position(int idx) const { return states.block<2, 1>(0, idx); }
  Eigen::Vector2d velocity(int idx) const { return states.block<2, 1>(2, idx); }
};

struct GapMeta {
  double gap_size{0.0};
  bool accepted{false};
  int decision_frame{0};  // frame number, not grid index
};

struct Scene {
  int scene_id{0};
  double dt{0.5};
  int first_frame{0};
  int frame_stride{1};
  std::vector<AgentTrack> tracks;
  std::optional<GapMeta> gap_meta;

  int num_frames() const {
    return tracks.empty() ? 0 : static_cast<int>(tracks.front().states.cols());
  }
  int frame_number(int idx) const { return first_frame + idx * frame_stride; }
  // grid index for a frame number, or -1 when off the grid
  int frame_index(int frame) const;
  const AgentTrack* find_track(int agent_id) const;
};

struct SceneSet {
  std::vector<Scene> scenes;
  std::string source_tag;
};

// Throw ValidationError on any violated invariant (shared frame grid, finite
// states, presence/state alignment, unique ids).
void validate(const Scene& scene);
void validate(const SceneSet& set);

}  // namespace trajsmooth
