#include "cof/io.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace cof {

namespace {

ojson vec3_to_json(Vec3 v) { return ojson::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const ojson& j) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument("expected a 3-element numeric array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

const ojson& require(const ojson& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return *it;
}

}  // namespace

ojson to_json(const ObjectSpec& o) {
  return ojson{{"object_id", o.object_id},
               {"shape", to_string(o.shape)},
               {"material", to_string(o.material)},
               {"color", to_string(o.color)},
               {"radius", o.radius}};
}

ojson to_json(const ObjectState& s) {
  return ojson{{"object_id", s.object_id},
               {"inside_camera", s.inside_camera},
               {"position", vec3_to_json(s.position)},
               {"velocity", vec3_to_json(s.velocity)}};
}

ojson to_json(const CollisionEvent& c) {
  return ojson{{"frame_id", c.frame_id}, {"pair", ojson::array({c.pair.first, c.pair.second})}};
}

ojson to_json(const SceneAnnotation& scene) {
  ojson objects = ojson::array();
  for (const auto& o : scene.objects) objects.push_back(to_json(o));
  ojson frames = ojson::array();
  for (const auto& frame : scene.frames) {
    ojson states = ojson::array();
    for (const auto& s : frame) states.push_back(to_json(s));
    frames.push_back(std::move(states));
  }
  ojson collisions = ojson::array();
  for (const auto& c : scene.collisions) collisions.push_back(to_json(c));
  return ojson{{"scene_id", scene.scene_id}, {"fps", scene.fps},
               {"n_frames", scene.n_frames}, {"objects", std::move(objects)},
               {"frames", std::move(frames)}, {"collisions", std::move(collisions)}};
}

ojson to_json(const VideoAnnotation& video) {
  ojson captions = ojson::array();
  for (const auto& c : video.captions) {
    captions.push_back(ojson{{"frame_id", c.frame_id}, {"caption", c.text}});
  }
  return ojson{{"video_id", video.video_id},
               {"duration_s", video.duration_s},
               {"fps", video.fps},
               {"captions", std::move(captions)}};
}

ojson to_json(const CofSample& sample) {
  return ojson{{"sample_id", sample.sample_id},
               {"video_ref", sample.video_ref},
               {"source", to_string(sample.source)},
               {"category", to_string(sample.category)},
               {"question", sample.question},
               {"reasoning", sample.reasoning},
               {"answer", sample.answer},
               {"frame_refs", sample.frame_refs}};
}

ObjectSpec object_spec_from_json(const ojson& j) {
  ObjectSpec o;
  o.object_id = require(j, "object_id").get<int>();
  o.shape = shape_from_string(require(j, "shape").get<std::string>());
  o.material = material_from_string(require(j, "material").get<std::string>());
  o.color = color_from_string(require(j, "color").get<std::string>());
  o.radius = require(j, "radius").get<double>();
  return o;
}

ObjectState object_state_from_json(const ojson& j) {
  ObjectState s;
  s.object_id = require(j, "object_id").get<int>();
  s.inside_camera = require(j, "inside_camera").get<bool>();
  s.position = vec3_from_json(require(j, "position"));
  s.velocity = vec3_from_json(require(j, "velocity"));
  return s;
}

CollisionEvent collision_from_json(const ojson& j) {
  CollisionEvent c;
  c.frame_id = require(j, "frame_id").get<int>();
  const auto& pair = require(j, "pair");
  if (!pair.is_array() || pair.size() != 2) {
    throw std::invalid_argument("collision pair must hold two object ids");
  }
  c.pair = {pair[0].get<int>(), pair[1].get<int>()};
  return c;
}

SceneAnnotation scene_from_json(const ojson& j) {
  SceneAnnotation scene;
  scene.scene_id = require(j, "scene_id").get<std::string>();
  scene.fps = require(j, "fps").get<double>();
  scene.n_frames = require(j, "n_frames").get<int>();
  for (const auto& o : require(j, "objects")) scene.objects.push_back(object_spec_from_json(o));
  for (const auto& frame : require(j, "frames")) {
    std::vector<ObjectState> states;
    for (const auto& s : frame) states.push_back(object_state_from_json(s));
    scene.frames.push_back(std::move(states));
  }
  for (const auto& c : require(j, "collisions")) scene.collisions.push_back(collision_from_json(c));
  return scene;
}

VideoAnnotation video_from_json(const ojson& j) {
  VideoAnnotation video;
  video.video_id = require(j, "video_id").get<std::string>();
  video.duration_s = require(j, "duration_s").get<double>();
  video.fps = require(j, "fps").get<double>();
  for (const auto& c : require(j, "captions")) {
    video.captions.push_back({require(c, "frame_id").get<int>(), require(c, "caption").get<std::string>()});
  }
  return video;
}

CofSample cof_sample_from_json(const ojson& j, bool strict) {
  static const std::set<std::string> known = {"sample_id", "video_ref", "source",
                                              "category",  "question",  "reasoning",
                                              "answer",    "frame_refs"};
  if (strict) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (known.find(it.key()) == known.end()) {
        throw std::invalid_argument("unknown field '" + it.key() + "'");
      }
    }
  }
  CofSample s;
  s.sample_id = require(j, "sample_id").get<std::string>();
  s.video_ref = require(j, "video_ref").get<std::string>();
  s.source = source_from_string(require(j, "source").get<std::string>());
  s.category = category_from_string(require(j, "category").get<std::string>());
  s.question = require(j, "question").get<std::string>();
  s.reasoning = require(j, "reasoning").get<std::vector<std::string>>();
  s.answer = require(j, "answer").get<std::string>();
  s.frame_refs = require(j, "frame_refs").get<std::vector<int>>();
  return s;
}

ojson to_json(const EvalTask& task) {
  ojson j{{"task_id", task.task_id}, {"kind", to_string(task.kind)}, {"split", task.split}};
  if (task.kind == TaskKind::multiple_choice) {
    ojson options = ojson::array();
    for (const auto& o : task.options) options.push_back(ojson{{"label", o.label}, {"text", o.text}});
    j["options"] = std::move(options);
  }
  if (task.kind == TaskKind::numeric) {
    j["gold"] = task.gold_number;
  } else {
    j["gold"] = task.gold_label;
  }
  return j;
}

ojson to_json(const Prediction& prediction) {
  return ojson{{"task_id", prediction.task_id}, {"raw_text", prediction.raw_text}};
}

ojson to_json(const MetricReport& report) {
  ojson splits = ojson::object();
  for (const auto& [name, s] : report.splits) {
    splits[name] = ojson{{"score", s.score},
                         {"n_tasks", s.n_tasks},
                         {"n_no_answer", s.n_no_answer},
                         {"n_missing", s.n_missing}};
  }
  ojson histogram = ojson::object();
  for (std::size_t bin = 0; bin < report.histogram.size(); ++bin) {
    histogram[histogram_bin_label(bin)] = report.histogram[bin];
  }
  return ojson{{"splits", std::move(splits)},
               {"overall", report.overall},
               {"per_kind", report.per_kind},
               {"histogram", std::move(histogram)},
               {"n_tasks", report.n_tasks},
               {"n_predictions", report.n_predictions},
               {"n_no_answer", report.n_no_answer},
               {"n_missing", report.n_missing}};
}

EvalTask eval_task_from_json(const ojson& j) {
  EvalTask task;
  task.task_id = require(j, "task_id").get<std::string>();
  task.kind = task_kind_from_string(require(j, "kind").get<std::string>());
  task.split = require(j, "split").get<std::string>();
  if (task.kind == TaskKind::multiple_choice) {
    for (const auto& o : require(j, "options")) {
      task.options.push_back({require(o, "label").get<std::string>(),
                              require(o, "text").get<std::string>()});
    }
    if (task.options.size() < 2) throw std::invalid_argument("multiple_choice needs >= 2 options");
  }
  if (task.kind == TaskKind::numeric) {
    task.gold_number = require(j, "gold").get<double>();
  } else {
    task.gold_label = require(j, "gold").get<std::string>();
  }
  return task;
}

Prediction prediction_from_json(const ojson& j) {
  return {require(j, "task_id").get<std::string>(), require(j, "raw_text").get<std::string>()};
}

void for_each_jsonl(const std::string& path,
                    const std::function<void(const ojson&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const std::exception& e) {
      throw DataError(path, line_no, std::string("invalid record: ") + e.what());
    }
    try {
      fn(j, line_no);
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError(path, line_no, e.what());
    }
  }
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace cof
