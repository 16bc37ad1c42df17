#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cof {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

// Axis-aligned box; the camera's visible region.
struct Aabb {
  Vec3 min;
  Vec3 max;
  bool contains(Vec3 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
           p.z >= min.z && p.z <= max.z;
  }
};

enum class Shape { cube, sphere, cylinder };
enum class Material { metal, rubber };
enum class Color { gray, red, blue, green, brown, purple, cyan, yellow };

inline constexpr std::array<const char*, 3> kShapeNames = {"cube", "sphere", "cylinder"};
inline constexpr std::array<const char*, 2> kMaterialNames = {"metal", "rubber"};
inline constexpr std::array<const char*, 8> kColorNames = {"gray",  "red",    "blue", "green",
                                                           "brown", "purple", "cyan", "yellow"};

const char* to_string(Shape s);
const char* to_string(Material m);
const char* to_string(Color c);
Shape shape_from_string(const std::string& s);
Material material_from_string(const std::string& s);
Color color_from_string(const std::string& s);

struct ObjectSpec {
  int object_id = 0;
  Shape shape = Shape::cube;
  Material material = Material::metal;
  Color color = Color::gray;
  double radius = 0.5;

  // "<color> <material> <shape>", unique within a scene.
  std::string display_name() const;
};

struct ObjectState {
  int object_id = 0;
  bool inside_camera = false;
  Vec3 position;
  Vec3 velocity;
};

struct CollisionEvent {
  int frame_id = 0;            // 1-based
  std::pair<int, int> pair{};  // object ids, normalized first < second
};

// CLEVRER-style raw annotation for one synthetic video.
struct SceneAnnotation {
  std::string scene_id;
  double fps = 1.0;
  int n_frames = 0;
  std::vector<ObjectSpec> objects;
  // frames[f][i]: state of objects[i] at frame f+1.
  std::vector<std::vector<ObjectState>> frames;
  std::vector<CollisionEvent> collisions;

  const ObjectSpec& object(int object_id) const;
  const ObjectState& state(int frame_id, int object_id) const;
};

struct Caption {
  int frame_id = 0;  // 1-based
  std::string text;
};

// Frame-captioned annotation of one real video.
struct VideoAnnotation {
  std::string video_id;
  double duration_s = 0.0;
  double fps = 1.0;
  std::vector<Caption> captions;  // frame ids strictly increasing
};

enum class SampleSource { real, synth };

enum class SampleCategory {
  object_count_collision,
  object_count_motion,
  object_count_temporal,
  appearance_order,
  relative_distance,
  real_free_form,
};

const char* to_string(SampleSource s);
const char* to_string(SampleCategory c);
SampleSource source_from_string(const std::string& s);
SampleCategory category_from_string(const std::string& s);

// One (question, reasoning trace, answer) training record.
struct CofSample {
  std::string sample_id;
  std::string video_ref;
  SampleSource source = SampleSource::synth;
  SampleCategory category = SampleCategory::object_count_collision;
  std::string question;
  std::vector<std::string> reasoning;
  std::string answer;
  std::vector<int> frame_refs;  // sorted, distinct, 1-based

  std::string joined_reasoning() const;
};

bool operator==(const CofSample& a, const CofSample& b);

}  // namespace cof
