#include "trajsmooth/track_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "trajsmooth/errors.hpp"

namespace trajsmooth {

namespace {

constexpr const char* kTrackHeader = "scene_id,frame,agent_id,class,x,y,vx,vy";
constexpr const char* kGapHeader = "scene_id,gap_size,accepted,decision_frame";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, int line_no) {
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

long parse_int(const std::string& s, int line_no) {
  long v = 0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ParseError("line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path.string());
  out << text;
}

}  // namespace

std::string tracks_to_csv(const SceneSet& set) {
  std::string out = kTrackHeader;
  out += '\n';
  for (const auto& scene : set.scenes) {
    for (const auto& tr : scene.tracks) {
      for (int f = 0; f < scene.num_frames(); ++f) {
        if (!tr.present_at(f)) continue;
        out += std::to_string(scene.scene_id);
        out += ',';
        out += std::to_string(scene.frame_number(f));
        out += ',';
        out += std::to_string(tr.agent_id);
        out += ',';
        out += to_string(tr.semantic_class);
        for (int k = 0; k < 4; ++k) {
          out += ',';
          out += fmt_double(tr.states(k, f));
        }
        out += '\n';
      }
    }
  }
  return out;
}

std::string gaps_to_csv(const SceneSet& set) {
  std::string out = kGapHeader;
  out += '\n';
  for (const auto& scene : set.scenes) {
    if (!scene.gap_meta) continue;
    const auto& g = *scene.gap_meta;
    out += std::to_string(scene.scene_id);
    out += ',';
    out += fmt_double(g.gap_size);
    out += ',';
    out += g.accepted ? "1" : "0";
    out += ',';
    out += std::to_string(g.decision_frame);
    out += '\n';
  }
  return out;
}

void save_tracks(const SceneSet& set, const std::filesystem::path& path) {
  write_file(path, tracks_to_csv(set));
}

void save_gaps(const SceneSet& set, const std::filesystem::path& path) {
  write_file(path, gaps_to_csv(set));
}

SceneSet tracks_from_csv(const std::string& text, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");

  struct RawState {
    int frame;
    Eigen::Vector4d state;
  };
  struct RawTrack {
    AgentClass cls{AgentClass::Vehicle};
    std::vector<RawState> states;
  };
  // scene -> agent -> rows
  std::map<int, std::map<int, RawTrack>> raw;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kTrackHeader) {
        throw ParseError("line 1: expected header '" + std::string(kTrackHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 8) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 8 fields, got " +
                       std::to_string(fields.size()));
    }
    const int scene_id = static_cast<int>(parse_int(fields[0], line_no));
    const int frame = static_cast<int>(parse_int(fields[1], line_no));
    const int agent_id = static_cast<int>(parse_int(fields[2], line_no));
    AgentClass cls;
    try {
      cls = agent_class_from_string(fields[3]);
    } catch (const ParseError&) {
      throw ParseError("line " + std::to_string(line_no) + ": unknown class '" + fields[3] +
                       "'");
    }
    Eigen::Vector4d st;
    for (int k = 0; k < 4; ++k) st(k) = parse_double(fields[4 + static_cast<std::size_t>(k)], line_no);
    auto& track = raw[scene_id][agent_id];
    track.cls = cls;
    track.states.push_back({frame, st});
  }
  if (!saw_header && !text.empty()) {
    throw ParseError("line 1: expected header '" + std::string(kTrackHeader) + "'");
  }

  SceneSet set;
  set.source_tag = "file";
  for (auto& [scene_id, agents] : raw) {
    // collect the scene frame grid
    std::vector<int> frames;
    for (auto& [agent_id, tr] : agents) {
      for (const auto& rs : tr.states) frames.push_back(rs.frame);
    }
    std::sort(frames.begin(), frames.end());
    frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
    if (frames.empty()) continue;
    int stride = 1;
    if (frames.size() >= 2) {
      stride = frames[1] - frames[0];
      if (stride <= 0) {
        throw ValidationError("scene " + std::to_string(scene_id) + ": frames not increasing");
      }
      for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i] - frames[i - 1] != stride) {
          throw ValidationError("scene " + std::to_string(scene_id) +
                                ": non-uniform frame grid");
        }
      }
    }

    Scene scene;
    scene.scene_id = scene_id;
    scene.dt = dt;
    scene.first_frame = frames.front();
    scene.frame_stride = stride;
    const int n = static_cast<int>(frames.size());
    for (auto& [agent_id, tr] : agents) {
      AgentTrack track;
      track.agent_id = agent_id;
      track.semantic_class = tr.cls;
      track.states = Eigen::Matrix4Xd::Zero(4, n);
      track.presence.assign(static_cast<std::size_t>(n), 0);
      for (const auto& rs : tr.states) {
        // every row's frame is on the collected grid by construction
        const int idx = (rs.frame - scene.first_frame) / stride;
        if (track.presence[static_cast<std::size_t>(idx)]) {
          throw ValidationError("scene " + std::to_string(scene_id) + ", agent " +
                                std::to_string(agent_id) + ": duplicate frame " +
                                std::to_string(rs.frame));
        }
        track.states.col(idx) = rs.state;
        track.presence[static_cast<std::size_t>(idx)] = 1;
      }
      scene.tracks.push_back(std::move(track));
    }
    set.scenes.push_back(std::move(scene));
  }
  validate(set);
  return set;
}

void attach_gaps_from_csv(SceneSet& set, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kGapHeader) {
        throw ParseError("line 1: expected header '" + std::string(kGapHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 4) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                       std::to_string(fields.size()));
    }
    const int scene_id = static_cast<int>(parse_int(fields[0], line_no));
    GapMeta meta;
    meta.gap_size = parse_double(fields[1], line_no);
    const long acc = parse_int(fields[2], line_no);
    if (acc != 0 && acc != 1) {
      throw ParseError("line " + std::to_string(line_no) + ": accepted must be 0 or 1");
    }
    meta.accepted = acc == 1;
    meta.decision_frame = static_cast<int>(parse_int(fields[3], line_no));
    bool found = false;
    for (auto& scene : set.scenes) {
      if (scene.scene_id == scene_id) {
        scene.gap_meta = meta;
        found = true;
        break;
      }
    }
    if (!found) {
      throw ValidationError("gap metadata references unknown scene " +
                            std::to_string(scene_id));
    }
  }
}

SceneSet load_tracks(const std::filesystem::path& path, double dt) {
  if (!std::filesystem::exists(path)) {
    throw ValidationError("no such file: " + path.string());
  }
  return tracks_from_csv(read_file(path), dt);
}

SceneSet load_tracks(const std::filesystem::path& tracks_path,
                     const std::filesystem::path& gaps_path, double dt) {
  SceneSet set = load_tracks(tracks_path, dt);
  if (!std::filesystem::exists(gaps_path)) {
    throw ValidationError("no such file: " + gaps_path.string());
  }
  attach_gaps_from_csv(set, read_file(gaps_path));
  return set;
}

}  // namespace trajsmooth
