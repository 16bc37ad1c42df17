#include "cof/config.hpp"

#include <cctype>
#include <filesystem>
#include <stdexcept>

#include "cof/io.hpp"

namespace cof {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  const std::string text = read_file(path);
  const auto dir = std::filesystem::path(path).parent_path();
  return from_string(text, dir.empty() ? "." : dir.string());
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text, const std::string& base_dir) {
  KeyValueConfig config;
  config.base_dir_ = base_dir;
  config.source_text_ = text;
  std::size_t line_start = 0;
  std::size_t line_no = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    std::string line = text.substr(line_start, line_end - line_start);
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": expected 'key = value'");
      }
      config.entries_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    if (line_end == text.size()) break;
    line_start = line_end + 1;
  }
  return config;
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

std::string KeyValueConfig::require_string(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw std::invalid_argument("config is missing key '" + key + "'");
  return it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t used = 0;
    const double value = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': '" + it->second + "' is not a number");
  }
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t used = 0;
    const std::int64_t value = std::stoll(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': '" + it->second + "' is not an integer");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw std::invalid_argument("config key '" + key + "': '" + v + "' is not a boolean");
}

std::string KeyValueConfig::get_path(const std::string& key, const std::string& fallback) const {
  const std::string value = get_string(key, fallback);
  if (value.empty()) return value;
  const std::filesystem::path p(value);
  if (p.is_absolute()) return value;
  return (std::filesystem::path(base_dir_) / p).string();
}

void PipelineConfig::validate() const {
  if (!(max_duration_s > 0.0)) throw std::invalid_argument("max_duration_s must be positive");
  if (frame_budget < 2) throw std::invalid_argument("frame_budget must be at least 2");
  if (target_zero_ref_fraction < 0.0 || target_zero_ref_fraction > 1.0) {
    throw std::invalid_argument("target_zero_ref_fraction must lie in [0, 1]");
  }
  if (scenes < 0) throw std::invalid_argument("scene count cannot be negative");
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
  if (real_client != "replay" && real_client != "remote") {
    throw std::invalid_argument("real.client must be 'replay' or 'remote'");
  }
  if (!(real_temperature >= 0.0)) throw std::invalid_argument("real.temperature must be >= 0");
  if (real_max_new_tokens < 1) throw std::invalid_argument("real.max_new_tokens must be positive");
  sim.validate();
}

SimConfig sim_config_from(const KeyValueConfig& kv) {
  SimConfig sim;
  sim.n_objects_min = static_cast<int>(kv.get_int("sim.n_objects_min", sim.n_objects_min));
  sim.n_objects_max = static_cast<int>(kv.get_int("sim.n_objects_max", sim.n_objects_max));
  sim.n_frames = static_cast<int>(kv.get_int("sim.n_frames", sim.n_frames));
  sim.fps = kv.get_double("sim.fps", sim.fps);
  sim.camera_bounds.min.x = kv.get_double("sim.bounds_min_x", sim.camera_bounds.min.x);
  sim.camera_bounds.min.y = kv.get_double("sim.bounds_min_y", sim.camera_bounds.min.y);
  sim.camera_bounds.min.z = kv.get_double("sim.bounds_min_z", sim.camera_bounds.min.z);
  sim.camera_bounds.max.x = kv.get_double("sim.bounds_max_x", sim.camera_bounds.max.x);
  sim.camera_bounds.max.y = kv.get_double("sim.bounds_max_y", sim.camera_bounds.max.y);
  sim.camera_bounds.max.z = kv.get_double("sim.bounds_max_z", sim.camera_bounds.max.z);
  sim.speed_min = kv.get_double("sim.speed_min", sim.speed_min);
  sim.speed_max = kv.get_double("sim.speed_max", sim.speed_max);
  sim.radius_min = kv.get_double("sim.radius_min", sim.radius_min);
  sim.radius_max = kv.get_double("sim.radius_max", sim.radius_max);
  sim.restitution = kv.get_double("sim.restitution", sim.restitution);
  sim.allow_entry = kv.get_bool("sim.allow_entry", sim.allow_entry);
  sim.allow_exit = kv.get_bool("sim.allow_exit", sim.allow_exit);
  sim.entry_fraction = kv.get_double("sim.entry_fraction", sim.entry_fraction);
  sim.stationary_fraction = kv.get_double("sim.stationary_fraction", sim.stationary_fraction);
  sim.moving_eps = kv.get_double("sim.moving_eps", sim.moving_eps);
  return sim;
}

GenerationPlan plan_from(const KeyValueConfig& kv) {
  GenerationPlan plan;
  plan.collision_count = kv.get_bool("plan.collision_count", plan.collision_count);
  plan.moving_count = kv.get_bool("plan.moving_count", plan.moving_count);
  plan.temporal_count = kv.get_bool("plan.temporal_count", plan.temporal_count);
  plan.appearance_order = kv.get_bool("plan.appearance_order", plan.appearance_order);
  plan.relative_distance = kv.get_bool("plan.relative_distance", plan.relative_distance);
  plan.max_temporal_anchors =
      static_cast<int>(kv.get_int("plan.max_temporal_anchors", plan.max_temporal_anchors));
  plan.max_appearance_subsets =
      static_cast<int>(kv.get_int("plan.max_appearance_subsets", plan.max_appearance_subsets));
  plan.max_distance_targets =
      static_cast<int>(kv.get_int("plan.max_distance_targets", plan.max_distance_targets));
  plan.moving_eps = kv.get_double("plan.moving_eps", plan.moving_eps);
  return plan;
}

PipelineConfig pipeline_config_from(const KeyValueConfig& kv) {
  PipelineConfig config;
  config.max_duration_s = kv.get_double("max_duration_s", config.max_duration_s);
  config.frame_budget = static_cast<int>(kv.get_int("frame_budget", config.frame_budget));
  config.target_zero_ref_fraction =
      kv.get_double("target_zero_ref_fraction", config.target_zero_ref_fraction);
  config.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(config.seed)));
  config.jobs = static_cast<int>(kv.get_int("jobs", config.jobs));
  config.scenes = static_cast<int>(kv.get_int("sim.scenes", config.scenes));
  config.sim = sim_config_from(kv);
  config.plan = plan_from(kv);
  config.real_annotations = kv.get_path("real.annotations", "");
  config.real_client = kv.get_string("real.client", config.real_client);
  config.real_fixtures = kv.get_path("real.fixtures", "");
  config.real_model = kv.get_string("real.model", config.real_model);
  config.real_max_new_tokens =
      static_cast<int>(kv.get_int("real.max_new_tokens", config.real_max_new_tokens));
  config.real_temperature = kv.get_double("real.temperature", config.real_temperature);
  config.validate();
  return config;
}

}  // namespace cof
