#include "trajsmooth/scene.hpp"

#include <cmath>
#include <set>

#include "trajsmooth/errors.hpp"

namespace trajsmooth {

std::string to_string(AgentClass c) {
  return c == AgentClass::Vehicle ? "vehicle" : "pedestrian";
}

AgentClass agent_class_from_string(const std::string& s) {
  if (s == "vehicle") return AgentClass::Vehicle;
  if (s == "pedestrian") return AgentClass::Pedestrian;
  throw ParseError("unknown agent class '" + s + "'");
}

int Scene::frame_index(int frame) const {
  const int off = frame - first_frame;
  if (off < 0 || off % frame_stride != 0) return -1;
  const int idx = off / frame_stride;
  return idx < num_frames() ? idx : -1;
}

const AgentTrack* Scene::find_track(int agent_id) const {
  for (const auto& tr : tracks) {
    if (tr.agent_id == agent_id) return &tr;
  }
  return nullptr;
}

void validate(const Scene& scene) {
  if (scene.tracks.empty()) {
    throw ValidationError("scene " + std::to_string(scene.scene_id) + ": no tracks");
  }
  if (!(scene.dt > 0.0)) {
    throw ValidationError("scene " + std::to_string(scene.scene_id) + ": dt must be > 0");
  }
  if (scene.frame_stride <= 0) {
    throw ValidationError("scene " + std::to_string(scene.scene_id) +
                          ": frame spacing must be positive");
  }
  const int frames = scene.num_frames();
  std::set<int> ids;
  for (const auto& tr : scene.tracks) {
    const std::string where =
        "scene " + std::to_string(scene.scene_id) + ", agent " + std::to_string(tr.agent_id);
    if (!ids.insert(tr.agent_id).second) {
      throw ValidationError(where + ": duplicate agent id");
    }
    if (static_cast<int>(tr.states.cols()) != frames) {
      throw ValidationError(where + ": track not on the shared frame grid");
    }
    if (static_cast<int>(tr.presence.size()) != frames) {
      throw ValidationError(where + ": presence length differs from states length");
    }
    bool any_present = false;
    for (int f = 0; f < frames; ++f) {
      if (!tr.present_at(f)) continue;
      any_present = true;
      if (!tr.states.col(f).allFinite()) {
        throw ValidationError(where + ": non-finite state at frame " +
                              std::to_string(scene.frame_number(f)));
      }
    }
    if (!any_present) {
      throw ValidationError(where + ": never present");
    }
  }
}

void validate(const SceneSet& set) {
  std::set<int> ids;
  for (const auto& scene : set.scenes) {
    if (!ids.insert(scene.scene_id).second) {
      throw ValidationError("duplicate scene id " + std::to_string(scene.scene_id));
    }
    validate(scene);
  }
}

}  // namespace trajsmooth
