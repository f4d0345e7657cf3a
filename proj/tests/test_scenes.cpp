#include <doctest.h>

#include <filesystem>
#include <set>

#include "trajsmooth/errors.hpp"
#include "trajsmooth/generators.hpp"
#include "trajsmooth/neighbor_graph.hpp"
#include "trajsmooth/rng.hpp"
#include "trajsmooth/splits.hpp"
#include "trajsmooth/standardize.hpp"
#include "trajsmooth/track_io.hpp"

using namespace trajsmooth;

namespace {

Scene two_agent_scene(double dx_other, AgentClass other_class) {
  Scene scene;
  scene.scene_id = 0;
  scene.dt = 0.5;
  AgentTrack a;
  a.agent_id = 0;
  a.semantic_class = AgentClass::Vehicle;
  a.states = Eigen::Matrix4Xd::Zero(4, 6);
  a.presence.assign(6, 1);
  AgentTrack b;
  b.agent_id = 1;
  b.semantic_class = other_class;
  b.states = Eigen::Matrix4Xd::Zero(4, 6);
  b.states.row(0).setConstant(dx_other);
  b.presence.assign(6, 1);
  scene.tracks = {a, b};
  return scene;
}

}  // namespace

TEST_CASE("urban generator produces both classes in every scene") {
  UrbanConfig cfg;
  cfg.scenes = 20;
  const SceneSet set = generate_urban(cfg, 1);
  REQUIRE(set.scenes.size() == 20);
  for (const auto& scene : set.scenes) {
    bool veh = false, ped = false;
    for (const auto& tr : scene.tracks) {
      (tr.semantic_class == AgentClass::Vehicle ? veh : ped) = true;
    }
    CHECK(veh);
    CHECK(ped);
    CHECK(!scene.gap_meta.has_value());
  }
  validate(set);
}

TEST_CASE("urban generator is deterministic at byte level") {
  UrbanConfig cfg;
  cfg.scenes = 5;
  const std::string a = tracks_to_csv(generate_urban(cfg, 1));
  const std::string b = tracks_to_csv(generate_urban(cfg, 1));
  CHECK(a == b);
  const std::string c = tracks_to_csv(generate_urban(cfg, 2));
  CHECK(a != c);
}

TEST_CASE("urban generator rejects invalid configs by field name") {
  UrbanConfig cfg;
  cfg.pedestrians = 0;
  CHECK_THROWS_WITH_AS(generate_urban(cfg, 1),
                       "invalid generator config: pedestrians must be >= 1", ConfigError);
  UrbanConfig cfg2;
  cfg2.scenes = 0;
  CHECK_THROWS_AS(generate_urban(cfg2, 1), ConfigError);
  UrbanConfig cfg3;
  cfg3.interaction_radius = 0.0;
  CHECK_THROWS_AS(generate_urban(cfg3, 1), ConfigError);
}

TEST_CASE("generated velocities are the finite difference of positions") {
  UrbanConfig cfg;
  cfg.scenes = 2;
  const SceneSet set = generate_urban(cfg, 9);
  for (const auto& scene : set.scenes) {
    for (const auto& tr : scene.tracks) {
      for (int f = 0; f + 1 < scene.num_frames(); ++f) {
        const Eigen::Vector2d fd = (tr.position(f + 1) - tr.position(f)) / scene.dt;
        CHECK(tr.velocity(f).isApprox(fd, 1e-12));
      }
    }
  }
}

TEST_CASE("gap decision rule at the noiseless threshold") {
  const double g_min = 10.0, g_max = 20.0;
  const double threshold = 0.5 * (g_min + g_max);
  CHECK(gap_accept_decision(g_max, threshold, 0.0));
  CHECK(!gap_accept_decision(g_min, threshold, 0.0));
  CHECK(!gap_accept_decision(threshold, threshold, 0.0));  // strict
}

TEST_CASE("gap generator label base rate and metadata") {
  GapConfig cfg;
  cfg.scenes = 200;
  const SceneSet set = generate_gap(cfg, 3);
  REQUIRE(set.scenes.size() == 200);
  int accepted = 0;
  for (const auto& scene : set.scenes) {
    REQUIRE(scene.gap_meta.has_value());
    if (scene.gap_meta->accepted) ++accepted;
    // accepted scenes cross the lane boundary, rejected ones never do
    const AgentTrack* ego = scene.find_track(kGapEgoAgentId);
    REQUIRE(ego != nullptr);
    const double max_y = ego->states.row(1).maxCoeff();
    if (scene.gap_meta->accepted) {
      CHECK(max_y > kGapLaneBoundaryY);
    } else {
      CHECK(max_y < kGapLaneBoundaryY);
    }
  }
  const double rate = accepted / 200.0;
  CHECK(rate >= 0.3);
  CHECK(rate <= 0.7);
  validate(set);
}

TEST_CASE("gap generator determinism and config validation") {
  GapConfig cfg;
  cfg.scenes = 20;
  CHECK(tracks_to_csv(generate_gap(cfg, 5)) == tracks_to_csv(generate_gap(cfg, 5)));
  GapConfig bad;
  bad.gap_min = 20.0;
  bad.gap_max = 20.0;
  CHECK_THROWS_AS(generate_gap(bad, 1), ConfigError);
}

TEST_CASE("track csv round-trips a scene set exactly") {
  UrbanConfig cfg;
  cfg.scenes = 2;
  const SceneSet set = generate_urban(cfg, 4);
  const std::string csv = tracks_to_csv(set);
  const SceneSet loaded = tracks_from_csv(csv, cfg.dt);
  REQUIRE(loaded.scenes.size() == set.scenes.size());
  for (std::size_t i = 0; i < set.scenes.size(); ++i) {
    const Scene& a = set.scenes[i];
    const Scene& b = loaded.scenes[i];
    CHECK(a.scene_id == b.scene_id);
    REQUIRE(a.tracks.size() == b.tracks.size());
    for (std::size_t j = 0; j < a.tracks.size(); ++j) {
      CHECK(a.tracks[j].agent_id == b.tracks[j].agent_id);
      CHECK(a.tracks[j].semantic_class == b.tracks[j].semantic_class);
      CHECK(a.tracks[j].states == b.tracks[j].states);
      CHECK(a.tracks[j].presence == b.tracks[j].presence);
    }
  }
  // second round trip is byte-identical
  CHECK(tracks_to_csv(loaded) == csv);
}

TEST_CASE("track csv parse errors carry line numbers") {
  const std::string header = "scene_id,frame,agent_id,class,x,y,vx,vy\n";
  CHECK_THROWS_WITH_AS(tracks_from_csv(header + "0,0,0,bike,0,0,0,0\n", 0.5),
                       "line 2: unknown class 'bike'", ParseError);
  CHECK_THROWS_WITH_AS(tracks_from_csv(header + "0,0,0,vehicle,0,0,0\n", 0.5),
                       "line 2: expected 8 fields, got 7", ParseError);
  CHECK_THROWS_AS(tracks_from_csv(header + "0,zero,0,vehicle,0,0,0,0\n", 0.5), ParseError);
  CHECK_THROWS_AS(tracks_from_csv("wrong,header\n", 0.5), ParseError);
}

TEST_CASE("header-only track csv loads as an empty set") {
  const SceneSet set = tracks_from_csv("scene_id,frame,agent_id,class,x,y,vx,vy\n", 0.5);
  CHECK(set.scenes.empty());
}

TEST_CASE("non-uniform frame grid is a validation error") {
  const std::string csv =
      "scene_id,frame,agent_id,class,x,y,vx,vy\n"
      "0,0,0,vehicle,0,0,0,0\n"
      "0,1,0,vehicle,1,0,0,0\n"
      "0,3,0,vehicle,2,0,0,0\n";
  CHECK_THROWS_AS(tracks_from_csv(csv, 0.5), ValidationError);
}

TEST_CASE("gap metadata csv attaches to scenes") {
  GapConfig cfg;
  cfg.scenes = 6;
  const SceneSet set = generate_gap(cfg, 11);
  SceneSet reloaded = tracks_from_csv(tracks_to_csv(set), cfg.dt);
  attach_gaps_from_csv(reloaded, gaps_to_csv(set));
  for (std::size_t i = 0; i < set.scenes.size(); ++i) {
    REQUIRE(reloaded.scenes[i].gap_meta.has_value());
    CHECK(reloaded.scenes[i].gap_meta->gap_size ==
          doctest::Approx(set.scenes[i].gap_meta->gap_size).epsilon(1e-15));
    CHECK(reloaded.scenes[i].gap_meta->accepted == set.scenes[i].gap_meta->accepted);
    CHECK(reloaded.scenes[i].gap_meta->decision_frame == set.scenes[i].gap_meta->decision_frame);
  }
}

TEST_CASE("random split partitions 10 scenes as 8/0/2") {
  UrbanConfig cfg;
  cfg.scenes = 10;
  const SceneSet set = generate_urban(cfg, 2);
  const DataSplit split = split_random(set, 0.8, 0.0, 0.2, 7);
  CHECK(split.train.size() == 8);
  CHECK(split.val.empty());
  CHECK(split.test.size() == 2);
  validate(split, set);

  const DataSplit again = split_random(set, 0.8, 0.0, 0.2, 7);
  CHECK(split.train == again.train);
  CHECK(split.test == again.test);
}

TEST_CASE("random split rejects fractions that do not sum to one") {
  UrbanConfig cfg;
  cfg.scenes = 4;
  const SceneSet set = generate_urban(cfg, 2);
  CHECK_THROWS_AS(split_random(set, 0.5, 0.5, 0.5, 1), ConfigError);
  CHECK_THROWS_AS(split_random(set, -0.2, 0.6, 0.6, 1), ConfigError);
}

TEST_CASE("random split is a disjoint cover for arbitrary fractions") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    UrbanConfig cfg;
    cfg.scenes = 1 + static_cast<int>(rng.uniform_index(30));
    const SceneSet set = generate_urban(cfg, static_cast<std::uint64_t>(trial));
    const double a = rng.uniform();
    const double b = rng.uniform() * (1.0 - a);
    const DataSplit split = split_random(set, 1.0 - a - b, a, b, rng.next_u64());
    validate(split, set);  // throws unless disjoint and covering
  }
}

namespace {
SceneSet gap_set_with_sizes(const std::vector<std::pair<double, bool>>& gaps) {
  SceneSet set;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    Scene scene = two_agent_scene(3.0, AgentClass::Vehicle);
    scene.scene_id = static_cast<int>(i);
    scene.gap_meta = GapMeta{gaps[i].first, gaps[i].second, 2};
    set.scenes.push_back(std::move(scene));
  }
  return set;
}
}  // namespace

TEST_CASE("critical split takes the smallest accepted and largest rejected gaps") {
  // accepted 5,10,15,20 ; rejected 8,12,25 ; test fraction 0.25
  const SceneSet set = gap_set_with_sizes({{5, true},
                                           {10, true},
                                           {15, true},
                                           {20, true},
                                           {8, false},
                                           {12, false},
                                           {25, false}});
  const DataSplit split = split_critical(set, 0.25);
  validate(split, set);
  const std::set<int> test(split.test.begin(), split.test.end());
  CHECK(test == std::set<int>{0, 6});  // the accepted 5 m and the rejected 25 m scenes
}

TEST_CASE("critical split orders accepted and rejected gaps across the boundary") {
  const SceneSet set = gap_set_with_sizes({{4, true},
                                           {6, true},
                                           {9, true},
                                           {14, true},
                                           {16, true},
                                           {7, false},
                                           {11, false},
                                           {18, false},
                                           {21, false}});
  const DataSplit split = split_critical(set, 0.4);
  validate(split, set);
  double max_acc_test = -1e9, min_acc_train = 1e9;
  double min_rej_test = 1e9, max_rej_train = -1e9;
  for (const int i : split.test) {
    const auto& g = *set.scenes[static_cast<std::size_t>(i)].gap_meta;
    if (g.accepted) max_acc_test = std::max(max_acc_test, g.gap_size);
    else min_rej_test = std::min(min_rej_test, g.gap_size);
  }
  for (const int i : split.train) {
    const auto& g = *set.scenes[static_cast<std::size_t>(i)].gap_meta;
    if (g.accepted) min_acc_train = std::min(min_acc_train, g.gap_size);
    else max_rej_train = std::max(max_rej_train, g.gap_size);
  }
  CHECK(max_acc_test <= min_acc_train);
  CHECK(min_rej_test >= max_rej_train);
}

TEST_CASE("critical split breaks ties by scene id and validates inputs") {
  const SceneSet set = gap_set_with_sizes({{10, true}, {10, true}, {10, true}, {10, true}});
  const DataSplit split = split_critical(set, 0.5);
  validate(split, set);
  CHECK(split.test == std::vector<int>{0, 1});

  SceneSet missing = set;
  missing.scenes[1].gap_meta.reset();
  CHECK_THROWS_AS(split_critical(missing, 0.5), ValidationError);
  CHECK_THROWS_AS(split_critical(set, 0.0), ConfigError);
  CHECK_THROWS_AS(split_critical(set, 1.0), ConfigError);
}

TEST_CASE("neighbor graph respects the radius") {
  SUBCASE("radius zero excludes everyone") {
    const Scene scene = two_agent_scene(3.0, AgentClass::Pedestrian);
    const NeighborGraph g = build_neighbor_graph(scene, 0, 5, 5, 0.0);
    for (const auto& per_class : g.lists) {
      for (const auto& ids : per_class) CHECK(ids.empty());
    }
  }
  SUBCASE("a pedestrian 3 m away is listed at every step under radius 5") {
    const Scene scene = two_agent_scene(3.0, AgentClass::Pedestrian);
    const NeighborGraph g = build_neighbor_graph(scene, 0, 5, 5, 5.0);
    const auto& ped = g.lists[static_cast<std::size_t>(AgentClass::Pedestrian)];
    for (const auto& ids : ped) CHECK(ids == std::vector<int>{1});
    for (const auto& ids : g.lists[static_cast<std::size_t>(AgentClass::Vehicle)]) {
      CHECK(ids.empty());
    }
  }
  SUBCASE("4 m inside, 6 m outside at radius 5") {
    Scene scene = two_agent_scene(4.0, AgentClass::Vehicle);
    AgentTrack far;
    far.agent_id = 2;
    far.semantic_class = AgentClass::Vehicle;
    far.states = Eigen::Matrix4Xd::Zero(4, 6);
    far.states.row(0).setConstant(6.0);
    far.presence.assign(6, 1);
    scene.tracks.push_back(far);
    const NeighborGraph g = build_neighbor_graph(scene, 0, 5, 5, 5.0);
    const auto& veh = g.lists[static_cast<std::size_t>(AgentClass::Vehicle)];
    for (const auto& ids : veh) CHECK(ids == std::vector<int>{1});
  }
}

TEST_CASE("neighbor graph rejects an absent focal and excludes absent steps") {
  Scene scene = two_agent_scene(3.0, AgentClass::Pedestrian);
  scene.tracks[0].presence[5] = 0;
  CHECK_THROWS_AS(build_neighbor_graph(scene, 0, 5, 5, 5.0), ValidationError);
  CHECK_THROWS_AS(build_neighbor_graph(scene, 99, 5, 5, 5.0), ValidationError);

  Scene scene2 = two_agent_scene(3.0, AgentClass::Pedestrian);
  scene2.tracks[1].presence[2] = 0;  // neighbor absent at one step
  const NeighborGraph g = build_neighbor_graph(scene2, 0, 5, 5, 5.0);
  const auto& ped = g.lists[static_cast<std::size_t>(AgentClass::Pedestrian)];
  CHECK(ped[2].empty());
  CHECK(ped[1] == std::vector<int>{1});
}

TEST_CASE("neighbor graph is invariant under non-focal id relabeling") {
  UrbanConfig cfg;
  cfg.scenes = 1;
  cfg.vehicles = 3;
  cfg.pedestrians = 2;
  Scene scene = generate_urban(cfg, 17).scenes[0];
  const NeighborGraph g1 = build_neighbor_graph(scene, 0, 20, 10, 15.0);

  // swap the ids of agents 1 and 2 (same class in this config)
  Scene relabeled = scene;
  for (auto& tr : relabeled.tracks) {
    if (tr.agent_id == 1) tr.agent_id = 2;
    else if (tr.agent_id == 2) tr.agent_id = 1;
  }
  const NeighborGraph g2 = build_neighbor_graph(relabeled, 0, 20, 10, 15.0);
  for (std::size_t k = 0; k < g1.lists.size(); ++k) {
    for (std::size_t s = 0; s < g1.lists[k].size(); ++s) {
      std::set<int> a(g1.lists[k][s].begin(), g1.lists[k][s].end());
      std::set<int> b;
      for (int id : g2.lists[k][s]) b.insert(id == 1 ? 2 : (id == 2 ? 1 : id));
      CHECK(a == b);
      // lists are sorted, so equality is exact after sorting the relabeled ids
      CHECK(std::is_sorted(g2.lists[k][s].begin(), g2.lists[k][s].end()));
    }
  }
}

TEST_CASE("standardizer is the identity on already standardized data") {
  SceneSet set;
  Scene scene = two_agent_scene(1.0, AgentClass::Vehicle);
  // place positions symmetrically with unit variance per coordinate
  scene.tracks[0].states.row(0) << -1, 1, -1, 1, -1, 1;
  scene.tracks[0].states.row(1) << -1, -1, 1, 1, -1, 1;
  scene.tracks[1].states.row(0) << 1, -1, 1, -1, 1, -1;
  scene.tracks[1].states.row(1) << 1, 1, -1, -1, 1, -1;
  set.scenes.push_back(scene);
  const auto [standardized, st] = standardize(set);
  CHECK(std::abs(st.mean(0)) < 1e-9);
  CHECK(std::abs(st.mean(1)) < 1e-9);
  CHECK(std::abs(st.scale(0) - 1.0) < 1e-9);
  CHECK(std::abs(st.scale(1) - 1.0) < 1e-9);
  CHECK(!st.degenerate_warning);
}

TEST_CASE("standardizer round-trips positions within 1e-9") {
  UrbanConfig cfg;
  cfg.scenes = 3;
  const SceneSet set = generate_urban(cfg, 21);
  const auto [standardized, st] = standardize(set);
  for (std::size_t i = 0; i < set.scenes.size(); ++i) {
    const Scene inverted = st.invert(standardized.scenes[i]);
    for (std::size_t j = 0; j < set.scenes[i].tracks.size(); ++j) {
      CHECK((inverted.tracks[j].states - set.scenes[i].tracks[j].states)
                .cwiseAbs()
                .maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("standardizer floors the scale on degenerate input") {
  SceneSet set;
  Scene scene = two_agent_scene(0.0, AgentClass::Vehicle);  // everything at the origin
  set.scenes.push_back(scene);
  const auto [standardized, st] = standardize(set);
  CHECK(st.scale(0) == kStandardizerScaleFloor);
  CHECK(st.scale(1) == kStandardizerScaleFloor);
  CHECK(st.degenerate_warning);
}
