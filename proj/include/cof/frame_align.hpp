#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cof/types.hpp"

namespace cof {

// Frame i of an fps-rate video sits at timestamp i / fps.
struct SourceTimeline {
  int n_frames = 0;
  double fps = 1.0;
  std::vector<int> annotated_ids;  // 1-based, strictly increasing

  void validate() const;
};

// Result of clipping a timeline to the model's duration limit and
// downsampling it to the frame budget: which original frames survive, and
// where each annotated frame lands in the new 1..K numbering.
struct AlignmentMap {
  double start_time_s = 0.0;
  double end_time_s = 0.0;
  std::vector<int> sampled_original_ids;
  std::map<int, int> id_map;  // original annotated id -> new id in [1, K]

  int frame_count() const { return static_cast<int>(sampled_original_ids.size()); }
  int new_id(int original_id) const;  // throws UnmappedFrame
};

struct EmptyTimeline : std::runtime_error {
  EmptyTimeline() : std::runtime_error("timeline has no annotated frames") {}
};

struct SpanExceeded : std::runtime_error {
  explicit SpanExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct UnmappedFrame : std::runtime_error {
  explicit UnmappedFrame(int frame_id)
      : std::runtime_error("frame " + std::to_string(frame_id) + " is not in the alignment map") {}
};

// Chooses a window of at most max_duration_s seconds that contains every
// annotated frame, keeps the whole video when it already fits, then samples
// up to frame_budget frames uniformly across the window and assigns each
// annotated frame to the nearest sampled one (ties go to the earlier frame).
AlignmentMap build_alignment(const SourceTimeline& timeline, double max_duration_s, int frame_budget);

VideoAnnotation remap_annotations(const VideoAnnotation& video, const AlignmentMap& map);
SceneAnnotation remap_annotations(const SceneAnnotation& scene, const AlignmentMap& map);

SourceTimeline timeline_of(const VideoAnnotation& video);
SourceTimeline timeline_of(const SceneAnnotation& scene);

}  // namespace cof
