#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cof/types.hpp"

namespace cof {

// Which templates run per scene and how many instances each may sample.
struct GenerationPlan {
  bool collision_count = true;
  bool moving_count = true;
  bool temporal_count = true;
  bool appearance_order = true;
  bool relative_distance = true;
  int max_temporal_anchors = 2;
  int max_appearance_subsets = 2;
  int max_distance_targets = 2;  // per action
  double moving_eps = 1e-6;
};

enum class DistanceAction { enters, exits };
const char* to_string(DistanceAction a);

// "How many collisions happen in this video?"
CofSample gen_collision_count(const SceneAnnotation& scene);

// "How many moving objects are in the video?"
CofSample gen_moving_count(const SceneAnnotation& scene, double moving_eps);

// "After the <anchor> enters the scene, how many collisions happen?"
// Skips (nullopt) when the anchor has no entry event: visible from frame 1 or
// never visible.
std::optional<CofSample> gen_temporal_count(const SceneAnnotation& scene, int anchor_object_id,
                                            std::string* skip_reason = nullptr);

// "what is the appearance order of <object_list> in the video?"
// Skips when a subset object never appears or two share a first frame.
std::optional<CofSample> gen_appearance_order(const SceneAnnotation& scene,
                                              const std::vector<int>& object_subset,
                                              std::string* skip_reason = nullptr);

// "Measuring from the closest point of each object, when <target> <action> the
// scene, which of these objects (...) is closest to the <target>?"
// Skips when the event is missing, fewer than two neighbors are visible, or
// the closest object would not be unique as printed.
std::optional<CofSample> gen_relative_distance(const SceneAnnotation& scene, int target_object_id,
                                               DistanceAction action,
                                               std::string* skip_reason = nullptr);

struct SkippedGeneration {
  std::string scene_id;
  std::string category;
  std::string detail;  // anchor / subset / target description
  std::string reason;
};

struct SynthBatch {
  std::vector<CofSample> samples;  // sorted by (scene, category, index)
  std::vector<SkippedGeneration> skips;
};

// Applies every enabled generator whose preconditions hold, sampling anchors
// and subsets without replacement. Deterministic in (scenes, plan, seed) and
// independent of scene processing order.
SynthBatch synth_batch(const std::vector<SceneAnnotation>& scenes, const GenerationPlan& plan,
                       std::uint64_t seed);

}  // namespace cof
