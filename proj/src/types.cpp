#include "cof/types.hpp"

#include <algorithm>
#include <sstream>

namespace cof {

namespace {

template <typename Enum, std::size_t N>
Enum enum_from_string(const std::string& s, const std::array<const char*, N>& names,
                      const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (s == names[i]) return static_cast<Enum>(i);
  }
  throw std::invalid_argument(std::string("unknown ") + what + ": '" + s + "'");
}

}  // namespace

const char* to_string(Shape s) { return kShapeNames[static_cast<std::size_t>(s)]; }
const char* to_string(Material m) { return kMaterialNames[static_cast<std::size_t>(m)]; }
const char* to_string(Color c) { return kColorNames[static_cast<std::size_t>(c)]; }

Shape shape_from_string(const std::string& s) {
  return enum_from_string<Shape>(s, kShapeNames, "shape");
}
Material material_from_string(const std::string& s) {
  return enum_from_string<Material>(s, kMaterialNames, "material");
}
Color color_from_string(const std::string& s) {
  return enum_from_string<Color>(s, kColorNames, "color");
}

std::string ObjectSpec::display_name() const {
  std::string name = to_string(color);
  name += ' ';
  name += to_string(material);
  name += ' ';
  name += to_string(shape);
  return name;
}

const ObjectSpec& SceneAnnotation::object(int object_id) const {
  for (const auto& o : objects) {
    if (o.object_id == object_id) return o;
  }
  throw std::out_of_range("no object with id " + std::to_string(object_id));
}

const ObjectState& SceneAnnotation::state(int frame_id, int object_id) const {
  if (frame_id < 1 || frame_id > n_frames) {
    throw std::out_of_range("frame id " + std::to_string(frame_id) + " out of range");
  }
  const auto& frame = frames[static_cast<std::size_t>(frame_id - 1)];
  for (const auto& st : frame) {
    if (st.object_id == object_id) return st;
  }
  throw std::out_of_range("no state for object " + std::to_string(object_id));
}

const char* to_string(SampleSource s) { return s == SampleSource::real ? "real" : "synth"; }

const char* to_string(SampleCategory c) {
  switch (c) {
    case SampleCategory::object_count_collision: return "object_count_collision";
    case SampleCategory::object_count_motion: return "object_count_motion";
    case SampleCategory::object_count_temporal: return "object_count_temporal";
    case SampleCategory::appearance_order: return "appearance_order";
    case SampleCategory::relative_distance: return "relative_distance";
    case SampleCategory::real_free_form: return "real_free_form";
  }
  return "unknown";
}

SampleSource source_from_string(const std::string& s) {
  if (s == "real") return SampleSource::real;
  if (s == "synth") return SampleSource::synth;
  throw std::invalid_argument("unknown source: '" + s + "'");
}

SampleCategory category_from_string(const std::string& s) {
  static const std::array<SampleCategory, 6> all = {
      SampleCategory::object_count_collision, SampleCategory::object_count_motion,
      SampleCategory::object_count_temporal,  SampleCategory::appearance_order,
      SampleCategory::relative_distance,      SampleCategory::real_free_form,
  };
  for (auto c : all) {
    if (s == to_string(c)) return c;
  }
  throw std::invalid_argument("unknown category: '" + s + "'");
}

std::string CofSample::joined_reasoning() const {
  std::string joined;
  for (std::size_t i = 0; i < reasoning.size(); ++i) {
    if (i > 0) joined += '\n';
    joined += reasoning[i];
  }
  return joined;
}

bool operator==(const CofSample& a, const CofSample& b) {
  return a.sample_id == b.sample_id && a.video_ref == b.video_ref && a.source == b.source &&
         a.category == b.category && a.question == b.question && a.reasoning == b.reasoning &&
         a.answer == b.answer && a.frame_refs == b.frame_refs;
}

}  // namespace cof
