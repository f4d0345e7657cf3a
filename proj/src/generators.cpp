#include "trajsmooth/generators.hpp"

#include <algorithm>
#include <cmath>

#include "trajsmooth/errors.hpp"
#include "trajsmooth/rng.hpp"

namespace trajsmooth {

namespace {

constexpr double kLaneHalfWidth = 1.75;
constexpr double kSidewalkY = 6.0;

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ConfigError(std::string("invalid generator config: ") + field + " " + what);
}

// Velocities are defined as the forward finite difference of positions over
// dt; the last frame repeats the previous velocity.
void set_velocities_from_positions(AgentTrack& track, double dt) {
  const int n = static_cast<int>(track.states.cols());
  for (int f = 0; f + 1 < n; ++f) {
    track.states.block<2, 1>(2, f) =
        (track.states.block<2, 1>(0, f + 1) - track.states.block<2, 1>(0, f)) / dt;
  }
  if (n >= 2) track.states.block<2, 1>(2, n - 1) = track.states.block<2, 1>(2, n - 2);
}

AgentTrack make_track(int id, AgentClass cls, int frames) {
  AgentTrack tr;
  tr.agent_id = id;
  tr.semantic_class = cls;
  tr.states = Eigen::Matrix4Xd::Zero(4, frames);
  tr.presence.assign(static_cast<std::size_t>(frames), 1);
  return tr;
}

double smoothstep01(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

Scene generate_urban_scene(const UrbanConfig& cfg, int scene_id, std::uint64_t seed) {
  Rng rng(seed);
  const int n_agents = cfg.vehicles + cfg.pedestrians;
  const int frames = cfg.frames;

  struct Sim {
    AgentClass cls;
    double x, y, speed, base_speed, lane_y, walk_dir;
    bool crossing = false;
    int cross_start = -1;
    double cross_target_y = 0.0;
  };
  std::vector<Sim> sims(static_cast<std::size_t>(n_agents));

  for (int i = 0; i < cfg.vehicles; ++i) {
    Sim& s = sims[static_cast<std::size_t>(i)];
    s.cls = AgentClass::Vehicle;
    s.lane_y = (i % 2 == 0) ? -kLaneHalfWidth : kLaneHalfWidth;
    s.x = rng.uniform(-45.0, 5.0);
    s.y = s.lane_y + rng.uniform(-0.3, 0.3);
    s.base_speed = rng.uniform(cfg.speed_min, cfg.speed_max);
    s.speed = s.base_speed;
  }
  for (int i = 0; i < cfg.pedestrians; ++i) {
    Sim& s = sims[static_cast<std::size_t>(cfg.vehicles + i)];
    s.cls = AgentClass::Pedestrian;
    const double side = (i % 2 == 0) ? 1.0 : -1.0;
    s.x = rng.uniform(-40.0, 10.0);
    s.y = side * kSidewalkY + rng.uniform(-0.5, 0.5);
    s.lane_y = s.y;
    s.base_speed = rng.uniform(cfg.ped_speed_min, cfg.ped_speed_max);
    s.speed = s.base_speed;
    s.walk_dir = rng.uniform() < 0.5 ? 1.0 : -1.0;
    if (rng.uniform() < cfg.cross_prob) {
      s.crossing = true;
      s.cross_start = static_cast<int>(rng.uniform_index(
                          static_cast<std::size_t>(std::max(1, frames / 2)))) +
                      frames / 8;
      s.cross_target_y = -side * kSidewalkY;
    }
  }

  Scene scene;
  scene.scene_id = scene_id;
  scene.dt = cfg.dt;
  for (int i = 0; i < n_agents; ++i) {
    scene.tracks.push_back(make_track(i, sims[static_cast<std::size_t>(i)].cls, frames));
  }

  std::vector<double> px(sims.size()), py(sims.size());
  for (int f = 0; f < frames; ++f) {
    for (std::size_t i = 0; i < sims.size(); ++i) {
      px[i] = sims[i].x;
      py[i] = sims[i].y;
      scene.tracks[i].states(0, f) = sims[i].x;
      scene.tracks[i].states(1, f) = sims[i].y;
    }
    // synchronous update from the frame-f state
    for (std::size_t i = 0; i < sims.size(); ++i) {
      Sim& s = sims[i];
      if (s.cls == AgentClass::Vehicle) {
        double dist_ahead = cfg.interaction_radius;
        for (std::size_t j = 0; j < sims.size(); ++j) {
          if (j == i) continue;
          const double dx = px[j] - px[i];
          if (dx <= 0.0 || dx >= cfg.interaction_radius) continue;
          if (std::abs(py[j] - py[i]) > 2.0) continue;
          dist_ahead = std::min(dist_ahead, dx);
        }
        const double factor =
            std::clamp(dist_ahead / cfg.interaction_radius, 0.25, 1.0);
        const double target = s.base_speed * factor;
        s.speed += 0.5 * (target - s.speed) + cfg.accel_noise * cfg.dt * rng.normal();
        s.speed = std::max(s.speed, 0.0);
        s.x += s.speed * cfg.dt;
        s.y += 0.3 * (s.lane_y - s.y) * cfg.dt + 0.02 * rng.normal();
      } else {
        const bool on_crossing =
            s.crossing && f >= s.cross_start &&
            std::abs(s.y - s.cross_target_y) > 0.3;
        double vx, vy;
        if (on_crossing) {
          vx = 0.2 * s.walk_dir * s.base_speed;
          vy = (s.cross_target_y > s.y ? 1.0 : -1.0) * 1.2;
        } else {
          vx = s.walk_dir * s.base_speed;
          vy = 0.0;
        }
        s.x += (vx + cfg.ped_noise * rng.normal()) * cfg.dt;
        s.y += (vy + cfg.ped_noise * rng.normal()) * cfg.dt;
      }
    }
  }

  for (auto& tr : scene.tracks) set_velocities_from_positions(tr, cfg.dt);
  return scene;
}

}  // namespace

SceneSet generate_urban(const UrbanConfig& cfg, std::uint64_t seed) {
  require(cfg.scenes >= 1, "scenes", "must be >= 1");
  require(cfg.frames >= 2, "frames", "must be >= 2");
  require(cfg.dt > 0.0, "dt", "must be > 0");
  require(cfg.vehicles >= 1, "vehicles", "must be >= 1");
  require(cfg.pedestrians >= 1, "pedestrians", "must be >= 1");
  require(cfg.interaction_radius > 0.0, "interaction_radius", "must be > 0");
  require(cfg.speed_min > 0.0 && cfg.speed_min <= cfg.speed_max, "speed_min/speed_max",
          "must satisfy 0 < min <= max");
  require(cfg.ped_speed_min > 0.0 && cfg.ped_speed_min <= cfg.ped_speed_max,
          "ped_speed_min/ped_speed_max", "must satisfy 0 < min <= max");
  require(cfg.accel_noise >= 0.0, "accel_noise", "must be >= 0");
  require(cfg.ped_noise >= 0.0, "ped_noise", "must be >= 0");
  require(cfg.cross_prob >= 0.0 && cfg.cross_prob <= 1.0, "cross_prob", "must be in [0, 1]");

  SceneSet set;
  set.source_tag = "urban";
  set.scenes.reserve(static_cast<std::size_t>(cfg.scenes));
  // per-scene seeds: seed + scene index, so scenes could be generated in parallel
  for (int i = 0; i < cfg.scenes; ++i) {
    set.scenes.push_back(
        generate_urban_scene(cfg, i, seed + static_cast<std::uint64_t>(i)));
  }
  return set;
}

namespace {

Scene generate_gap_scene(const GapConfig& cfg, int scene_id, std::uint64_t seed) {
  Rng rng(seed);
  const double v = rng.uniform(cfg.speed_min, cfg.speed_max);
  const double gap = rng.uniform(cfg.gap_min, cfg.gap_max);
  const double noise = cfg.decision_noise > 0.0 ? rng.normal(0.0, cfg.decision_noise) : 0.0;
  const double threshold = 0.5 * (cfg.gap_min + cfg.gap_max);
  const bool accepted = gap_accept_decision(gap, threshold, noise);

  const int frames = cfg.frames;
  const int d = cfg.decision_frame;
  const double x0 = -v * cfg.dt * d;  // ego reaches x = 0 at the decision frame
  const int merge_frames = 6;

  Scene scene;
  scene.scene_id = scene_id;
  scene.dt = cfg.dt;
  scene.gap_meta = GapMeta{gap, accepted, d};

  AgentTrack ego = make_track(0, AgentClass::Vehicle, frames);
  AgentTrack front = make_track(1, AgentClass::Vehicle, frames);
  AgentTrack rear = make_track(2, AgentClass::Vehicle, frames);

  double ego_x = x0;
  double ego_speed = v;
  for (int f = 0; f < frames; ++f) {
    const double nominal_x = x0 + v * cfg.dt * f;
    double ego_y = 0.0;
    if (f > d) {
      if (accepted) {
        ego_y = kGapLaneOffset *
                smoothstep01(static_cast<double>(f - d) / merge_frames);
      } else {
        ego_speed = std::max(ego_speed - 1.5 * cfg.dt, 0.55 * v);
      }
    }
    ego.states(0, f) = ego_x;
    ego.states(1, f) = ego_y;
    ego_x += ego_speed * cfg.dt;

    // the gap sits asymmetrically around the ego so its aggregated relative
    // position still carries the gap size
    front.states(0, f) = nominal_x + 0.35 * gap;
    front.states(1, f) = kGapLaneOffset;
    rear.states(0, f) = nominal_x - 0.65 * gap;
    rear.states(1, f) = kGapLaneOffset;
  }

  scene.tracks = {std::move(ego), std::move(front), std::move(rear)};
  for (auto& tr : scene.tracks) set_velocities_from_positions(tr, cfg.dt);
  return scene;
}

}  // namespace

SceneSet generate_gap(const GapConfig& cfg, std::uint64_t seed) {
  require(cfg.scenes >= 1, "scenes", "must be >= 1");
  require(cfg.frames >= 2, "frames", "must be >= 2");
  require(cfg.dt > 0.0, "dt", "must be > 0");
  if (!(cfg.gap_min < cfg.gap_max)) {
    throw ConfigError("invalid generator config: gap_min must be < gap_max");
  }
  require(cfg.gap_min > 0.0, "gap_min", "must be > 0");
  require(cfg.decision_noise >= 0.0, "decision_noise", "must be >= 0");
  require(cfg.speed_min > 0.0 && cfg.speed_min <= cfg.speed_max, "speed_min/speed_max",
          "must satisfy 0 < min <= max");
  require(cfg.decision_frame >= 1 && cfg.decision_frame < cfg.frames - 1, "decision_frame",
          "must lie inside the scene");

  // Resample the whole draw until the label base rate lands in [0.3, 0.7].
  // Attempt 0 uses the documented seed + scene_index scheme unchanged.
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    SceneSet set;
    set.source_tag = "gap";
    set.scenes.reserve(static_cast<std::size_t>(cfg.scenes));
    int n_accepted = 0;
    for (int i = 0; i < cfg.scenes; ++i) {
      set.scenes.push_back(generate_gap_scene(
          cfg, i, seed + static_cast<std::uint64_t>(i) + attempt * 0x9E3779B97F4A7C15ULL));
      if (set.scenes.back().gap_meta->accepted) ++n_accepted;
    }
    const double rate = static_cast<double>(n_accepted) / cfg.scenes;
    if (rate >= 0.3 && rate <= 0.7) return set;
  }
  throw NumericError("gap generator could not reach a label base rate in [0.3, 0.7]");
}

}  // namespace trajsmooth
