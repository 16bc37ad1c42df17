#include "cof/cof_synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "cof/rng.hpp"
#include "cof/scene_sim.hpp"
#include "cof/trace_eval.hpp"

namespace cof {

namespace {

std::optional<int> first_visible_frame(const SceneAnnotation& scene, int object_id) {
  for (int frame = 1; frame <= scene.n_frames; ++frame) {
    if (scene.state(frame, object_id).inside_camera) return frame;
  }
  return std::nullopt;
}

std::optional<int> last_visible_frame(const SceneAnnotation& scene, int object_id) {
  for (int frame = scene.n_frames; frame >= 1; --frame) {
    if (scene.state(frame, object_id).inside_camera) return frame;
  }
  return std::nullopt;
}

// Entry event: not visible at frame 1, visible later.
std::optional<int> entry_frame(const SceneAnnotation& scene, int object_id) {
  const auto first = first_visible_frame(scene, object_id);
  if (!first || *first == 1) return std::nullopt;
  return first;
}

// Exit event: visible at some frame, gone by the last one.
std::optional<int> exit_frame(const SceneAnnotation& scene, int object_id) {
  const auto last = last_visible_frame(scene, object_id);
  if (!last || *last == scene.n_frames) return std::nullopt;
  return last;
}

std::string collision_step(const SceneAnnotation& scene, const CollisionEvent& c) {
  return "A collision happens in Frame " + std::to_string(c.frame_id) + " between " +
         scene.object(c.pair.first).display_name() + " and " +
         scene.object(c.pair.second).display_name();
}

std::string join_names(const SceneAnnotation& scene, const std::vector<int>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ", ";
    out += scene.object(ids[i]).display_name();
  }
  return out;
}

std::string format_distance(double d) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", std::max(d, 0.0));
  return buf;
}

CofSample finish(const SceneAnnotation& scene, SampleCategory category, std::string question,
                 std::vector<std::string> steps, std::string answer) {
  CofSample s;
  s.sample_id = scene.scene_id + "/" + to_string(category);
  s.video_ref = scene.scene_id;
  s.source = SampleSource::synth;
  s.category = category;
  s.question = std::move(question);
  s.reasoning = std::move(steps);
  s.answer = std::move(answer);
  s.frame_refs = extract_frame_refs(s.joined_reasoning());
  std::sort(s.frame_refs.begin(), s.frame_refs.end());
  return s;
}

std::optional<CofSample> skip(std::string* out, std::string reason) {
  if (out) *out = std::move(reason);
  return std::nullopt;
}

}  // namespace

const char* to_string(DistanceAction a) { return a == DistanceAction::enters ? "enters" : "exits"; }

CofSample gen_collision_count(const SceneAnnotation& scene) {
  std::vector<std::string> steps;
  for (const auto& c : scene.collisions) steps.push_back(collision_step(scene, c));
  if (steps.empty()) steps.push_back("No collisions are observed in the video.");
  const auto n = scene.collisions.size();
  return finish(scene, SampleCategory::object_count_collision,
                "How many collisions happen in this video?", std::move(steps),
                std::to_string(n) + " collisions happen in this video.");
}

CofSample gen_moving_count(const SceneAnnotation& scene, double moving_eps) {
  std::vector<std::string> steps;
  std::size_t moving = 0;
  for (const auto& obj : scene.objects) {
    for (int frame = 1; frame <= scene.n_frames; ++frame) {
      const auto& st = scene.state(frame, obj.object_id);
      if (st.inside_camera && norm(st.velocity) > moving_eps) {
        steps.push_back(obj.display_name() + " is moving in Frame " + std::to_string(frame));
        ++moving;
        break;
      }
    }
  }
  if (steps.empty()) steps.push_back("No moving objects are observed in the video.");
  return finish(scene, SampleCategory::object_count_motion,
                "How many moving objects are in the video?", std::move(steps),
                std::to_string(moving) + " moving objects are in the video.");
}

std::optional<CofSample> gen_temporal_count(const SceneAnnotation& scene, int anchor_object_id,
                                            std::string* skip_reason) {
  const auto f0 = entry_frame(scene, anchor_object_id);
  if (!f0) return skip(skip_reason, "no_entry_event");
  const std::string name = scene.object(anchor_object_id).display_name();

  std::vector<std::string> steps;
  steps.push_back("The " + name + " enters the scene in Frame " + std::to_string(*f0));
  std::size_t count = 0;
  for (const auto& c : scene.collisions) {
    if (c.frame_id >= *f0) {
      steps.push_back(collision_step(scene, c));
      ++count;
    }
  }
  return finish(scene, SampleCategory::object_count_temporal,
                "After the " + name + " enters the scene, how many collisions happen?",
                std::move(steps),
                std::to_string(count) + " collisions happen after the " + name +
                    " enters the scene.");
}

std::optional<CofSample> gen_appearance_order(const SceneAnnotation& scene,
                                              const std::vector<int>& object_subset,
                                              std::string* skip_reason) {
  if (object_subset.size() < 2 || object_subset.size() > 4) {
    return skip(skip_reason, "subset_size");
  }
  std::vector<std::pair<int, int>> appearances;  // (first frame, object id)
  std::set<int> frames_seen;
  for (int id : object_subset) {
    const auto first = first_visible_frame(scene, id);
    if (!first) return skip(skip_reason, "never_visible");
    if (!frames_seen.insert(*first).second) return skip(skip_reason, "ambiguous_order");
    appearances.emplace_back(*first, id);
  }

  std::vector<std::string> steps;
  for (const auto& [frame, id] : appearances) {
    steps.push_back(scene.object(id).display_name() + " appears in Frame " +
                    std::to_string(frame));
  }
  std::sort(appearances.begin(), appearances.end());
  std::vector<int> ordered;
  for (const auto& [frame, id] : appearances) ordered.push_back(id);

  return finish(scene, SampleCategory::appearance_order,
                "what is the appearance order of " + join_names(scene, object_subset) +
                    " in the video?",
                std::move(steps), join_names(scene, ordered));
}

std::optional<CofSample> gen_relative_distance(const SceneAnnotation& scene, int target_object_id,
                                               DistanceAction action, std::string* skip_reason) {
  const auto event = action == DistanceAction::enters ? entry_frame(scene, target_object_id)
                                                      : exit_frame(scene, target_object_id);
  if (!event) return skip(skip_reason, "no_such_event");
  const int frame = *event;
  const double target_radius = scene.object(target_object_id).radius;
  const std::string target_name = scene.object(target_object_id).display_name();
  const char* verb = to_string(action);

  struct Neighbor {
    int id;
    double surface_distance;  // center distance minus both radii, may be < 0
  };
  std::vector<Neighbor> neighbors;
  for (const auto& [other_id, center_dist] : center_distances(scene, frame, target_object_id)) {
    neighbors.push_back({other_id, center_dist - target_radius - scene.object(other_id).radius});
  }
  if (neighbors.size() < 2) return skip(skip_reason, "too_few_neighbors");

  std::size_t best = 0;
  for (std::size_t i = 1; i < neighbors.size(); ++i) {
    if (neighbors[i].surface_distance < neighbors[best].surface_distance) best = i;
  }
  // The printed trace must justify the answer: reject exact ties and ties
  // introduced by rounding the displayed distances.
  const std::string best_printed = format_distance(neighbors[best].surface_distance);
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    if (i == best) continue;
    if (neighbors[i].surface_distance == neighbors[best].surface_distance ||
        format_distance(neighbors[i].surface_distance) == best_printed) {
      return skip(skip_reason, "distance_tie");
    }
  }

  std::vector<int> neighbor_ids;
  std::vector<std::string> steps;
  for (const auto& n : neighbors) {
    neighbor_ids.push_back(n.id);
    steps.push_back("The " + target_name + " " + verb + " the scene in Frame " +
                    std::to_string(frame) + ". In Frame " + std::to_string(frame) +
                    ", the distance between " + target_name + " and " +
                    scene.object(n.id).display_name() + " is " +
                    format_distance(n.surface_distance) + ".");
  }

  return finish(scene, SampleCategory::relative_distance,
                "Measuring from the closest point of each object, when " + target_name + " " +
                    verb + " the scene, which of these objects (" +
                    join_names(scene, neighbor_ids) + ") is closest to the " + target_name + "?",
                std::move(steps), scene.object(neighbors[best].id).display_name());
}

namespace {

struct BatchEntry {
  std::string scene_id;
  int category_rank;
  int index;
  CofSample sample;
};

void assign_id(CofSample& s, int index) {
  char suffix[16];
  std::snprintf(suffix, sizeof(suffix), "/%03d", index);
  s.sample_id += suffix;
}

}  // namespace

SynthBatch synth_batch(const std::vector<SceneAnnotation>& scenes, const GenerationPlan& plan,
                       std::uint64_t seed) {
  SynthBatch batch;
  std::vector<BatchEntry> entries;

  for (const auto& scene : scenes) {
    Rng rng(derive_seed(seed, scene.scene_id));
    auto add = [&](CofSample sample, int index) {
      assign_id(sample, index);
      entries.push_back({scene.scene_id, static_cast<int>(sample.category), index,
                         std::move(sample)});
    };
    auto log_skip = [&](SampleCategory category, std::string detail, std::string reason) {
      batch.skips.push_back({scene.scene_id, to_string(category), std::move(detail),
                             std::move(reason)});
    };

    if (plan.collision_count) add(gen_collision_count(scene), 0);
    if (plan.moving_count) add(gen_moving_count(scene, plan.moving_eps), 0);

    if (plan.temporal_count) {
      std::vector<int> anchors;
      for (const auto& obj : scene.objects) {
        if (entry_frame(scene, obj.object_id)) anchors.push_back(obj.object_id);
      }
      auto chosen = rng.sample_indices(anchors.size(),
                                       static_cast<std::size_t>(std::max(plan.max_temporal_anchors, 0)));
      std::sort(chosen.begin(), chosen.end());
      int index = 0;
      for (auto idx : chosen) {
        std::string reason;
        if (auto sample = gen_temporal_count(scene, anchors[idx], &reason)) {
          add(std::move(*sample), index++);
        } else {
          log_skip(SampleCategory::object_count_temporal,
                   "anchor=" + std::to_string(anchors[idx]), reason);
        }
      }
    }

    if (plan.appearance_order && scene.objects.size() >= 2) {
      std::set<std::vector<int>> used;
      int produced = 0;
      const int attempts = std::max(plan.max_appearance_subsets, 0) * 4;
      for (int t = 0; t < attempts && produced < plan.max_appearance_subsets; ++t) {
        const std::size_t max_size = std::min<std::size_t>(4, scene.objects.size());
        const std::size_t size =
            static_cast<std::size_t>(rng.uniform_int(2, static_cast<std::int64_t>(max_size)));
        auto picks = rng.sample_indices(scene.objects.size(), size);
        std::vector<int> subset;
        for (auto p : picks) subset.push_back(scene.objects[p].object_id);
        std::vector<int> key = subset;
        std::sort(key.begin(), key.end());
        if (!used.insert(key).second) continue;
        std::string reason;
        if (auto sample = gen_appearance_order(scene, subset, &reason)) {
          add(std::move(*sample), produced++);
        } else {
          log_skip(SampleCategory::appearance_order, "subset_size=" + std::to_string(size), reason);
        }
      }
    }

    if (plan.relative_distance) {
      for (const auto action : {DistanceAction::enters, DistanceAction::exits}) {
        std::vector<int> candidates;
        for (const auto& obj : scene.objects) {
          const auto event = action == DistanceAction::enters
                                 ? entry_frame(scene, obj.object_id)
                                 : exit_frame(scene, obj.object_id);
          if (event) candidates.push_back(obj.object_id);
        }
        auto chosen = rng.sample_indices(candidates.size(),
                                         static_cast<std::size_t>(std::max(plan.max_distance_targets, 0)));
        std::sort(chosen.begin(), chosen.end());
        int index = action == DistanceAction::enters ? 0 : 100;
        for (auto idx : chosen) {
          std::string reason;
          if (auto sample = gen_relative_distance(scene, candidates[idx], action, &reason)) {
            add(std::move(*sample), index++);
          } else {
            log_skip(SampleCategory::relative_distance,
                     std::string(to_string(action)) + " target=" + std::to_string(candidates[idx]),
                     reason);
          }
        }
      }
    }
  }

  std::sort(entries.begin(), entries.end(), [](const BatchEntry& a, const BatchEntry& b) {
    return std::tie(a.scene_id, a.category_rank, a.index) <
           std::tie(b.scene_id, b.category_rank, b.index);
  });
  batch.samples.reserve(entries.size());
  for (auto& e : entries) batch.samples.push_back(std::move(e.sample));
  return batch;
}

}  // namespace cof
