#pragma once

#include <filesystem>
#include <string>

#include "trajsmooth/scene.hpp"

namespace trajsmooth {

// Track CSV, header exactly:
//   scene_id,frame,agent_id,class,x,y,vx,vy
// One row per present frame; absent frames are simply missing. Floats are
// written with 17 significant digits so save/load round-trips exactly.
//
// Gap metadata CSV, header exactly:
//   scene_id,gap_size,accepted,decision_frame
// with accepted in {0,1}.

std::string tracks_to_csv(const SceneSet& set);
std::string gaps_to_csv(const SceneSet& set);

void save_tracks(const SceneSet& set, const std::filesystem::path& tracks_path);
void save_gaps(const SceneSet& set, const std::filesystem::path& gaps_path);

// The CSV carries no dt, so the caller supplies it (default matches the
// generators). A gaps file, when given, attaches GapMeta to its scenes.
SceneSet load_tracks(const std::filesystem::path& tracks_path, double dt = 0.5);
SceneSet load_tracks(const std::filesystem::path& tracks_path,
                     const std::filesystem::path& gaps_path, double dt = 0.5);
SceneSet tracks_from_csv(const std::string& text, double dt = 0.5);
void attach_gaps_from_csv(SceneSet& set, const std::string& text);

}  // namespace trajsmooth
