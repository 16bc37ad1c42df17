#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cof/trace_eval.hpp"
#include "cof/types.hpp"

namespace cof {

// Order-preserving JSON so serialized records are byte-stable.
using ojson = nlohmann::ordered_json;

// Parse or schema failure in a line-delimited file; carries the 1-based line.
struct DataError : std::runtime_error {
  DataError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        path(path),
        line(line) {}
  std::string path;
  std::size_t line;
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

ojson to_json(const ObjectSpec& o);
ojson to_json(const ObjectState& s);
ojson to_json(const CollisionEvent& c);
ojson to_json(const SceneAnnotation& scene);
ojson to_json(const VideoAnnotation& video);
ojson to_json(const CofSample& sample);
ojson to_json(const EvalTask& task);
ojson to_json(const Prediction& prediction);
ojson to_json(const MetricReport& report);

ObjectSpec object_spec_from_json(const ojson& j);
ObjectState object_state_from_json(const ojson& j);
CollisionEvent collision_from_json(const ojson& j);
SceneAnnotation scene_from_json(const ojson& j);
VideoAnnotation video_from_json(const ojson& j);
EvalTask eval_task_from_json(const ojson& j);
Prediction prediction_from_json(const ojson& j);
// strict: unknown fields are rejected.
CofSample cof_sample_from_json(const ojson& j, bool strict);

// Applies fn to each non-empty line's parsed JSON. Parse failures surface as
// DataError with the offending line number.
void for_each_jsonl(const std::string& path, const std::function<void(const ojson&, std::size_t)>& fn);

template <typename T>
std::vector<T> read_jsonl(const std::string& path, T (*parse)(const ojson&)) {
  std::vector<T> out;
  for_each_jsonl(path, [&](const ojson& j, std::size_t) { out.push_back(parse(j)); });
  return out;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines);

template <typename T>
void write_jsonl(const std::string& path, const std::vector<T>& items, ojson (*serialize)(const T&)) {
  std::vector<std::string> lines;
  lines.reserve(items.size());
  for (const auto& item : items) lines.push_back(serialize(item).dump());
  write_lines(path, lines);
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace cof
