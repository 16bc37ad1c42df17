#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cof/types.hpp"

namespace cof {

struct SimConfig {
  int n_objects_min = 3;
  int n_objects_max = 6;
  int n_frames = 48;
  double fps = 4.0;
  Aabb camera_bounds = {{-8.0, -8.0, -1.0}, {8.0, 8.0, 1.0}};
  double speed_min = 0.5;
  double speed_max = 2.5;
  double radius_min = 0.35;
  double radius_max = 0.75;
  double restitution = 1.0;
  // Entry: a share of objects starts outside the camera box and drifts in.
  // Exit: objects crossing the box edge leave; when off, they bounce back.
  bool allow_entry = true;
  bool allow_exit = true;
  double entry_fraction = 0.3;
  double stationary_fraction = 0.25;
  double moving_eps = 1e-6;  // speed above which an object counts as moving

  void validate() const;  // throws InvalidSimConfig
};

struct InvalidSimConfig : std::invalid_argument {
  explicit InvalidSimConfig(const std::string& what) : std::invalid_argument(what) {}
};

// Advances hand-picked initial object states through the collision dynamics.
// Motion is piecewise linear at frame resolution: a collision is recorded at
// the first frame two visible objects overlap (center distance below the sum
// of radii); both velocities then have their component along the line of
// centers reversed and scaled by the restitution, and the pair cannot
// re-collide until it has separated again.
SceneAnnotation simulate_from(std::string scene_id, std::vector<ObjectSpec> objects,
                              std::vector<ObjectState> initial_states, const SimConfig& config);

// Randomized scene: samples object attributes (unique display names),
// placements and velocities from config ranges, then runs simulate_from.
// Deterministic in (config, seed).
SceneAnnotation simulate_scene(const SimConfig& config, std::uint64_t seed);

struct SceneFacts {
  std::size_t collision_count = 0;
  std::map<int, std::optional<int>> first_visible;  // object id -> frame, or none
  std::set<int> moving_objects;
};

// Exhaustive single-pass scan of the annotation; the independent check the
// template generators are validated against.
SceneFacts brute_force_facts(const SceneAnnotation& scene, double moving_eps = 1e-6);

// Euclidean center distances from `target` to every other object visible at
// `frame_id`, keyed by object id.
std::vector<std::pair<int, double>> center_distances(const SceneAnnotation& scene, int frame_id,
                                                     int target_object_id);

}  // namespace cof
