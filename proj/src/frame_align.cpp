#include "cof/frame_align.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cof {

void SourceTimeline::validate() const {
  if (n_frames < 1) throw std::invalid_argument("timeline needs at least one frame");
  if (!(fps > 0.0)) throw std::invalid_argument("timeline fps must be positive");
  if (annotated_ids.empty()) throw EmptyTimeline();
  int prev = 0;
  for (int id : annotated_ids) {
    if (id <= prev) throw std::invalid_argument("annotated ids must be strictly increasing");
    if (id > n_frames) throw std::invalid_argument("annotated id beyond the last frame");
    prev = id;
  }
}

int AlignmentMap::new_id(int original_id) const {
  auto it = id_map.find(original_id);
  if (it == id_map.end()) throw UnmappedFrame(original_id);
  return it->second;
}

AlignmentMap build_alignment(const SourceTimeline& timeline, double max_duration_s,
                             int frame_budget) {
  timeline.validate();
  if (!(max_duration_s > 0.0)) throw std::invalid_argument("max_duration_s must be positive");
  if (frame_budget < 2) throw std::invalid_argument("frame_budget must be at least 2");

  const int first_annotated = timeline.annotated_ids.front();
  const int last_annotated = timeline.annotated_ids.back();
  // Work in frame units; max_duration_frames is the window width expressed in
  // inter-frame steps, so comparisons stay exact where the inputs are exact.
  const double max_duration_frames = max_duration_s * timeline.fps;
  if (static_cast<double>(last_annotated - first_annotated) > max_duration_frames) {
    throw SpanExceeded("annotated frames span " +
                       std::to_string((last_annotated - first_annotated) / timeline.fps) +
                       " s, above the " + std::to_string(max_duration_s) + " s limit");
  }

  int window_first = 1;
  int window_last = timeline.n_frames;
  if (static_cast<double>(timeline.n_frames - 1) > max_duration_frames) {
    // The video is longer than the limit: anchor the clip at the earliest
    // annotated frame, shifting left if it would run past the end.
    const int width = static_cast<int>(std::floor(max_duration_frames));
    window_first = first_annotated;
    window_last = window_first + width;
    if (window_last > timeline.n_frames) {
      window_last = timeline.n_frames;
      window_first = window_last - width;
    }
  }

  AlignmentMap map;
  map.start_time_s = static_cast<double>(window_first) / timeline.fps;
  map.end_time_s = static_cast<double>(window_last) / timeline.fps;

  const std::int64_t count = window_last - window_first + 1;
  if (count <= frame_budget) {
    map.sampled_original_ids.reserve(static_cast<std::size_t>(count));
    for (int id = window_first; id <= window_last; ++id) map.sampled_original_ids.push_back(id);
  } else {
    map.sampled_original_ids.reserve(static_cast<std::size_t>(frame_budget));
    for (std::int64_t k = 0; k < frame_budget; ++k) {
      map.sampled_original_ids.push_back(window_first +
                                         static_cast<int>(k * count / frame_budget));
    }
  }

  const auto& sampled = map.sampled_original_ids;
  for (int annotated : timeline.annotated_ids) {
    auto it = std::lower_bound(sampled.begin(), sampled.end(), annotated);
    std::size_t idx;
    if (it == sampled.begin()) {
      idx = 0;
    } else if (it == sampled.end()) {
      idx = sampled.size() - 1;
    } else {
      const std::size_t hi = static_cast<std::size_t>(it - sampled.begin());
      const std::size_t lo = hi - 1;
      // Ties break toward the earlier frame.
      idx = (annotated - sampled[lo] <= sampled[hi] - annotated) ? lo : hi;
    }
    map.id_map[annotated] = static_cast<int>(idx) + 1;
  }
  return map;
}

VideoAnnotation remap_annotations(const VideoAnnotation& video, const AlignmentMap& map) {
  VideoAnnotation out;
  out.video_id = video.video_id;
  const double window = map.end_time_s - map.start_time_s;
  out.duration_s = window > 0.0 ? window : video.duration_s;
  out.fps = window > 0.0 ? static_cast<double>(map.frame_count()) / window : video.fps;
  for (const auto& caption : video.captions) {
    const int new_id = map.new_id(caption.frame_id);
    if (!out.captions.empty() && out.captions.back().frame_id == new_id) {
      out.captions.back().text += ' ';
      out.captions.back().text += caption.text;
    } else {
      out.captions.push_back({new_id, caption.text});
    }
  }
  return out;
}

SceneAnnotation remap_annotations(const SceneAnnotation& scene, const AlignmentMap& map) {
  SceneAnnotation out;
  out.scene_id = scene.scene_id;
  out.n_frames = map.frame_count();
  const double window = map.end_time_s - map.start_time_s;
  out.fps = window > 0.0 ? static_cast<double>(map.frame_count()) / window : scene.fps;
  out.objects = scene.objects;
  out.frames.reserve(map.sampled_original_ids.size());
  for (int original : map.sampled_original_ids) {
    if (original < 1 || original > scene.n_frames) throw UnmappedFrame(original);
    out.frames.push_back(scene.frames[static_cast<std::size_t>(original - 1)]);
  }
  std::set<std::pair<int, std::pair<int, int>>> seen;
  for (const auto& collision : scene.collisions) {
    const int new_id = map.new_id(collision.frame_id);
    if (seen.insert({new_id, collision.pair}).second) {
      out.collisions.push_back({new_id, collision.pair});
    }
  }
  return out;
}

SourceTimeline timeline_of(const VideoAnnotation& video) {
  SourceTimeline t;
  t.fps = video.fps;
  t.n_frames = static_cast<int>(std::llround(video.duration_s * video.fps));
  for (const auto& caption : video.captions) t.annotated_ids.push_back(caption.frame_id);
  if (!t.annotated_ids.empty()) t.n_frames = std::max(t.n_frames, t.annotated_ids.back());
  t.n_frames = std::max(t.n_frames, 1);
  return t;
}

SourceTimeline timeline_of(const SceneAnnotation& scene) {
  SourceTimeline t;
  t.fps = scene.fps;
  t.n_frames = scene.n_frames;
  t.annotated_ids.resize(static_cast<std::size_t>(scene.n_frames));
  for (int i = 0; i < scene.n_frames; ++i) t.annotated_ids[static_cast<std::size_t>(i)] = i + 1;
  return t;
}

}  // namespace cof
