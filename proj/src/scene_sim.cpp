#include "cof/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "cof/rng.hpp"

namespace cof {

namespace {

constexpr double kTiny = 1e-12;

std::pair<int, int> ordered_pair(int a, int b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); }

Vec3 reflect_normal_component(Vec3 v, Vec3 n, double restitution) {
  // Keeps the tangential part, reverses the part along n scaled by the
  // restitution: v' . n == -e * (v . n).
  const double vn = dot(v, n);
  return v - n * ((1.0 + restitution) * vn);
}

Vec3 collision_normal(const Vec3& pi, const Vec3& pj, const Vec3& vi, const Vec3& vj) {
  Vec3 d = pj - pi;
  double len = norm(d);
  if (len > kTiny) return d * (1.0 / len);
  // Coincident centers: fall back to the relative approach direction.
  Vec3 rel = vi - vj;
  len = norm(rel);
  if (len > kTiny) return rel * (1.0 / len);
  return {1.0, 0.0, 0.0};
}

}  // namespace

void SimConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidSimConfig(what); };
  if (n_objects_min < 1 || n_objects_min > n_objects_max) fail("n_objects range is empty");
  if (n_objects_max > 48) {
    fail("n_objects_max exceeds the 48 distinct (color, material, shape) display names");
  }
  if (n_frames < 2) fail("n_frames must be at least 2");
  if (!(fps > 0.0)) fail("fps must be positive");
  if (speed_min < 0.0 || speed_min > speed_max) fail("speed range is empty");
  if (!(radius_min > 0.0) || radius_min > radius_max) fail("radius range is empty");
  if (restitution < 0.0 || restitution > 1.0) fail("restitution must lie in [0, 1]");
  if (!(camera_bounds.min.x < camera_bounds.max.x) || !(camera_bounds.min.y < camera_bounds.max.y) ||
      !(camera_bounds.min.z < camera_bounds.max.z)) {
    fail("camera bounds box is empty");
  }
  if (camera_bounds.min.z > 0.0 || camera_bounds.max.z < 0.0) {
    fail("camera bounds must contain the z = 0 motion plane");
  }
  if (camera_bounds.max.x - camera_bounds.min.x <= 2.0 * radius_max ||
      camera_bounds.max.y - camera_bounds.min.y <= 2.0 * radius_max) {
    fail("camera bounds too small for the radius range");
  }
  if (entry_fraction < 0.0 || entry_fraction > 1.0) fail("entry_fraction must lie in [0, 1]");
  if (stationary_fraction < 0.0 || stationary_fraction > 1.0) {
    fail("stationary_fraction must lie in [0, 1]");
  }
  if (!(moving_eps > 0.0)) fail("moving_eps must be positive");
}

SceneAnnotation simulate_from(std::string scene_id, std::vector<ObjectSpec> objects,
                              std::vector<ObjectState> initial_states, const SimConfig& config) {
  if (objects.empty()) throw InvalidSimConfig("a scene needs at least one object");
  if (objects.size() != initial_states.size()) {
    throw InvalidSimConfig("one initial state per object is required");
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (initial_states[i].object_id != objects[i].object_id) {
      throw InvalidSimConfig("initial state order must match object order");
    }
  }

  SceneAnnotation scene;
  scene.scene_id = std::move(scene_id);
  scene.fps = config.fps;
  scene.n_frames = config.n_frames;
  scene.objects = std::move(objects);

  const std::size_t n = scene.objects.size();
  const double dt = 1.0 / config.fps;
  std::vector<Vec3> pos(n), vel(n);
  std::vector<bool> entered(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    pos[i] = initial_states[i].position;
    vel[i] = initial_states[i].velocity;
  }

  std::set<std::pair<int, int>> in_contact;
  for (int frame = 1; frame <= config.n_frames; ++frame) {
    std::vector<ObjectState> states(n);
    for (std::size_t i = 0; i < n; ++i) {
      states[i].object_id = scene.objects[i].object_id;
      states[i].position = pos[i];
      states[i].velocity = vel[i];
      states[i].inside_camera = config.camera_bounds.contains(pos[i]);
      if (states[i].inside_camera) entered[i] = true;
    }
    scene.frames.push_back(states);

    // Release pairs that have separated, then detect fresh overlaps. Recorded
    // velocities are the pre-collision ones; the reflected velocities drive
    // the advance to the next frame.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto key = ordered_pair(scene.objects[i].object_id, scene.objects[j].object_id);
        const double dist = norm(pos[j] - pos[i]);
        const double sum_r = scene.objects[i].radius + scene.objects[j].radius;
        if (in_contact.count(key)) {
          if (dist > sum_r) in_contact.erase(key);
          continue;
        }
        if (states[i].inside_camera && states[j].inside_camera && dist < sum_r) {
          scene.collisions.push_back({frame, key});
          in_contact.insert(key);
          const Vec3 normal = collision_normal(pos[i], pos[j], vel[i], vel[j]);
          vel[i] = reflect_normal_component(vel[i], normal, config.restitution);
          vel[j] = reflect_normal_component(vel[j], normal, config.restitution);
        }
      }
    }

    if (frame == config.n_frames) break;
    for (std::size_t i = 0; i < n; ++i) {
      pos[i] = pos[i] + vel[i] * dt;
      if (!config.allow_exit && entered[i]) {
        // Billiard reflection keeps the object inside once it has entered.
        const double r = scene.objects[i].radius;
        double* p[3] = {&pos[i].x, &pos[i].y, &pos[i].z};
        double* v[3] = {&vel[i].x, &vel[i].y, &vel[i].z};
        const double lo[3] = {config.camera_bounds.min.x + r, config.camera_bounds.min.y + r,
                              config.camera_bounds.min.z};
        const double hi[3] = {config.camera_bounds.max.x - r, config.camera_bounds.max.y - r,
                              config.camera_bounds.max.z};
        for (int axis = 0; axis < 3; ++axis) {
          for (int guard = 0; guard < 8 && (*p[axis] < lo[axis] || *p[axis] > hi[axis]); ++guard) {
            if (*p[axis] < lo[axis]) {
              *p[axis] = 2.0 * lo[axis] - *p[axis];
              *v[axis] = -*v[axis];
            } else {
              *p[axis] = 2.0 * hi[axis] - *p[axis];
              *v[axis] = -*v[axis];
            }
          }
        }
      }
    }
  }
  return scene;
}

SceneAnnotation simulate_scene(const SimConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);

  const int n = static_cast<int>(rng.uniform_int(config.n_objects_min, config.n_objects_max));

  // Distinct (color, material, shape) triples guarantee unique display names.
  auto combo_ids = rng.sample_indices(kColorNames.size() * kMaterialNames.size() * kShapeNames.size(),
                                      static_cast<std::size_t>(n));
  std::vector<ObjectSpec> objects(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::size_t combo = combo_ids[static_cast<std::size_t>(i)];
    objects[i].object_id = i;
    objects[i].color = static_cast<Color>(combo % kColorNames.size());
    objects[i].material = static_cast<Material>((combo / kColorNames.size()) % kMaterialNames.size());
    objects[i].shape = static_cast<Shape>(combo / (kColorNames.size() * kMaterialNames.size()));
    objects[i].radius = rng.uniform_real(config.radius_min, config.radius_max);
  }

  const Aabb& box = config.camera_bounds;
  const bool entries_possible = config.allow_entry && config.speed_max > 1e-9;
  std::vector<ObjectState> states(static_cast<std::size_t>(n));
  std::vector<Vec3> placed;

  auto min_separation_ok = [&](Vec3 p, double r, int upto) {
    for (int k = 0; k < upto; ++k) {
      if (norm(p - placed[static_cast<std::size_t>(k)]) < r + objects[static_cast<std::size_t>(k)].radius + 0.1) {
        return false;
      }
    }
    return true;
  };

  for (int i = 0; i < n; ++i) {
    ObjectState st;
    st.object_id = i;
    const double r = objects[static_cast<std::size_t>(i)].radius;
    const bool from_outside = entries_possible && rng.bernoulli(config.entry_fraction);

    if (from_outside) {
      const int wall = static_cast<int>(rng.uniform_int(0, 3));
      const double gap = rng.uniform_real(0.5, 2.5) + r;
      const double along_x = rng.uniform_real(box.min.x + r, box.max.x - r);
      const double along_y = rng.uniform_real(box.min.y + r, box.max.y - r);
      switch (wall) {
        case 0: st.position = {box.min.x - gap, along_y, 0.0}; break;
        case 1: st.position = {box.max.x + gap, along_y, 0.0}; break;
        case 2: st.position = {along_x, box.min.y - gap, 0.0}; break;
        default: st.position = {along_x, box.max.y + gap, 0.0}; break;
      }
      // Aim at a point in the central half of the box so the object actually
      // crosses the boundary.
      const Vec3 target = {rng.uniform_real(0.75 * box.min.x + 0.25 * box.max.x,
                                            0.25 * box.min.x + 0.75 * box.max.x),
                           rng.uniform_real(0.75 * box.min.y + 0.25 * box.max.y,
                                            0.25 * box.min.y + 0.75 * box.max.y),
                           0.0};
      Vec3 dir = target - st.position;
      const double len = norm(dir);
      const double speed = std::max(rng.uniform_real(config.speed_min, config.speed_max), 0.25);
      st.velocity = len > kTiny ? dir * (speed / len) : Vec3{speed, 0.0, 0.0};
    } else {
      Vec3 p;
      for (int attempt = 0; attempt < 200; ++attempt) {
        p = {rng.uniform_real(box.min.x + r, box.max.x - r),
             rng.uniform_real(box.min.y + r, box.max.y - r), 0.0};
        if (min_separation_ok(p, r, i)) break;
      }
      st.position = p;
      if (rng.bernoulli(config.stationary_fraction)) {
        st.velocity = {0.0, 0.0, 0.0};
      } else {
        const double angle = rng.uniform_real(0.0, 2.0 * M_PI);
        const double speed = rng.uniform_real(config.speed_min, config.speed_max);
        st.velocity = {speed * std::cos(angle), speed * std::sin(angle), 0.0};
      }
    }
    placed.push_back(st.position);
    states[static_cast<std::size_t>(i)] = st;
  }

  return simulate_from("scene_" + std::to_string(seed), std::move(objects), std::move(states), config);
}

SceneFacts brute_force_facts(const SceneAnnotation& scene, double moving_eps) {
  SceneFacts facts;
  for (const auto& obj : scene.objects) facts.first_visible[obj.object_id] = std::nullopt;

  // Collisions are re-derived from recorded positions alone: an event is the
  // first overlapping frame of a visible pair that was previously separated.
  std::set<std::pair<int, int>> touching;
  for (int frame = 1; frame <= scene.n_frames; ++frame) {
    const auto& states = scene.frames[static_cast<std::size_t>(frame - 1)];
    for (const auto& st : states) {
      if (!st.inside_camera) continue;
      auto& first = facts.first_visible[st.object_id];
      if (!first) first = frame;
      if (norm(st.velocity) > moving_eps) facts.moving_objects.insert(st.object_id);
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
      for (std::size_t j = i + 1; j < states.size(); ++j) {
        const auto key = ordered_pair(states[i].object_id, states[j].object_id);
        const double dist = norm(states[j].position - states[i].position);
        const double sum_r = scene.object(key.first).radius + scene.object(key.second).radius;
        if (touching.count(key)) {
          if (dist > sum_r) touching.erase(key);
          continue;
        }
        if (states[i].inside_camera && states[j].inside_camera && dist < sum_r) {
          facts.collision_count += 1;
          touching.insert(key);
        }
      }
    }
  }
  return facts;
}

std::vector<std::pair<int, double>> center_distances(const SceneAnnotation& scene, int frame_id,
                                                     int target_object_id) {
  const auto& target = scene.state(frame_id, target_object_id);
  std::vector<std::pair<int, double>> out;
  for (const auto& st : scene.frames[static_cast<std::size_t>(frame_id - 1)]) {
    if (st.object_id == target_object_id || !st.inside_camera) continue;
    out.emplace_back(st.object_id, norm(st.position - target.position));
  }
  return out;
}

}  // namespace cof
