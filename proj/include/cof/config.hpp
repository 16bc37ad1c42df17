#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "cof/cof_synth.hpp"
#include "cof/scene_sim.hpp"

namespace cof {

// "key = value" lines, '#' comments. Paths resolve against the file's
// directory so configs can travel with their fixtures.
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text, const std::string& base_dir = ".");

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_path(const std::string& key, const std::string& fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  const std::string& source_text() const { return source_text_; }

 private:
  std::map<std::string, std::string> entries_;
  std::string base_dir_ = ".";
  std::string source_text_;
};

struct PipelineConfig {
  double max_duration_s = 30.0;
  int frame_budget = 30;
  double target_zero_ref_fraction = 0.15;
  std::uint64_t seed = 1;
  int jobs = 1;

  int scenes = 20;
  SimConfig sim;
  GenerationPlan plan;

  std::string real_annotations;  // path, empty disables the real branch
  std::string real_client = "replay";
  std::string real_fixtures;  // path for the replay client
  std::string real_model = "llama-3.1-8b-instruct";
  int real_max_new_tokens = 1024;
  double real_temperature = 0.7;

  void validate() const;
};

PipelineConfig pipeline_config_from(const KeyValueConfig& kv);
SimConfig sim_config_from(const KeyValueConfig& kv);
GenerationPlan plan_from(const KeyValueConfig& kv);

}  // namespace cof
