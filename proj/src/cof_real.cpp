#include "cof/cof_real.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cof/io.hpp"
#include "cof/trace_eval.hpp"

namespace cof {

namespace {

constexpr const char* kQuestionMarker = "**Question**:";
constexpr const char* kReasoningMarker = "**Reasoning**:";
constexpr const char* kAnswerMarker = "**Answer**:";

std::string trim(std::string_view s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return std::string(s.substr(begin, end - begin));
}

// Strips "1.", "23)" or a leading "-" bullet from a reasoning line.
std::string strip_enumeration(std::string line) {
  std::size_t i = 0;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  std::size_t j = i;
  while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
  if (j > i && j < line.size() && (line[j] == '.' || line[j] == ')')) {
    return trim(std::string_view(line).substr(j + 1));
  }
  if (i < line.size() && line[i] == '-') {
    return trim(std::string_view(line).substr(i + 1));
  }
  return trim(line);
}

std::vector<std::string> split_steps(std::string_view reasoning) {
  std::vector<std::string> steps;
  std::size_t start = 0;
  while (start <= reasoning.size()) {
    std::size_t end = reasoning.find('\n', start);
    if (end == std::string_view::npos) end = reasoning.size();
    std::string step = strip_enumeration(std::string(reasoning.substr(start, end - start)));
    if (!step.empty()) steps.push_back(std::move(step));
    if (end == reasoning.size()) break;
    start = end + 1;
  }
  return steps;
}

}  // namespace

std::string build_prompt(const VideoAnnotation& aligned) {
  std::string prompt = kRealPromptInstruction;
  prompt += "\n";
  for (const auto& caption : aligned.captions) {
    prompt += "\nFrame " + std::to_string(caption.frame_id) + ": " + caption.text;
  }
  return prompt;
}

ParseOutcome parse_generation(const std::string& text) {
  ParseOutcome outcome;
  std::vector<std::size_t> question_positions;
  for (std::size_t pos = text.find(kQuestionMarker); pos != std::string::npos;
       pos = text.find(kQuestionMarker, pos + 1)) {
    question_positions.push_back(pos);
  }
  if (question_positions.empty()) {
    if (!trim(text).empty()) outcome.rejects.push_back({0, "no_question_marker"});
    return outcome;
  }

  const std::size_t q_len = std::string_view(kQuestionMarker).size();
  const std::size_t r_len = std::string_view(kReasoningMarker).size();
  const std::size_t a_len = std::string_view(kAnswerMarker).size();
  for (std::size_t i = 0; i < question_positions.size(); ++i) {
    const std::size_t seg_begin = question_positions[i] + q_len;
    const std::size_t seg_end =
        (i + 1 < question_positions.size()) ? question_positions[i + 1] : text.size();
    const std::string_view segment(text.data() + seg_begin, seg_end - seg_begin);

    const std::size_t r_pos = segment.find(kReasoningMarker);
    const std::size_t a_pos = segment.find(kAnswerMarker);
    if (r_pos == std::string_view::npos || a_pos == std::string_view::npos) {
      outcome.rejects.push_back({i, "marker_missing"});
      continue;
    }
    if (a_pos < r_pos) {
      outcome.rejects.push_back({i, "out_of_order"});
      continue;
    }

    ParsedTriplet triplet;
    triplet.question = trim(segment.substr(0, r_pos));
    triplet.reasoning = split_steps(segment.substr(r_pos + r_len, a_pos - r_pos - r_len));
    triplet.answer = trim(segment.substr(a_pos + a_len));
    if (triplet.question.empty() || triplet.reasoning.empty() || triplet.answer.empty()) {
      outcome.rejects.push_back({i, "empty_field"});
      continue;
    }
    outcome.triplets.push_back(std::move(triplet));
  }
  return outcome;
}

RealSampleBatch to_cof_samples(const std::string& video_id,
                               const std::vector<ParsedTriplet>& triplets, int frame_count) {
  RealSampleBatch batch;
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    CofSample s;
    char suffix[24];
    std::snprintf(suffix, sizeof(suffix), "/real/%03zu", i);
    s.sample_id = video_id + suffix;
    s.video_ref = video_id;
    s.source = SampleSource::real;
    s.category = SampleCategory::real_free_form;
    s.question = triplets[i].question;
    s.reasoning = triplets[i].reasoning;
    s.answer = triplets[i].answer;
    s.frame_refs = extract_frame_refs(s.joined_reasoning());
    std::sort(s.frame_refs.begin(), s.frame_refs.end());

    if (!extract_frame_refs(s.question).empty()) {
      batch.rejects.push_back({std::move(s), "question_reference"});
      continue;
    }
    const bool in_range = std::all_of(s.frame_refs.begin(), s.frame_refs.end(),
                                      [&](int id) { return id >= 1 && id <= frame_count; });
    if (!in_range) {
      batch.rejects.push_back({std::move(s), "out_of_range"});
      continue;
    }
    batch.samples.push_back(std::move(s));
  }
  return batch;
}

ReplayClient::ReplayClient(std::map<std::string, std::string> fixtures)
    : fixtures_(std::move(fixtures)) {}

ReplayClient ReplayClient::from_file(const std::string& path) {
  std::map<std::string, std::string> fixtures;
  for_each_jsonl(path, [&](const ojson& j, std::size_t) {
    fixtures[j.at("key").get<std::string>()] = j.at("text").get<std::string>();
  });
  return ReplayClient(std::move(fixtures));
}

GenerationResponse ReplayClient::complete(const GenerationRequest& request) {
  auto it = fixtures_.find(request.video_id);
  if (it == fixtures_.end()) throw ReplayMiss(request.video_id);
  return {request.video_id, it->second, "replay"};
}

RemoteConfig RemoteConfig::from_env(std::string model) {
  RemoteConfig config;
  if (const char* endpoint = std::getenv("COF_LLM_ENDPOINT")) config.endpoint = endpoint;
  if (const char* key = std::getenv("COF_LLM_KEY")) config.api_key = key;
  config.model = std::move(model);
  return config;
}

RemoteClient::RemoteClient(RemoteConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) {
    throw std::invalid_argument("remote client needs an endpoint (COF_LLM_ENDPOINT)");
  }
}

namespace {

struct EndpointParts {
  std::string host_port;  // scheme://host:port
  std::string path;
};

EndpointParts split_endpoint(const std::string& endpoint) {
  const std::size_t scheme = endpoint.find("://");
  const std::size_t path_start =
      endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {endpoint, "/v1/chat/completions"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

bool transient_status(int status) { return status == 429 || status >= 500; }

}  // namespace

GenerationResponse RemoteClient::complete(const GenerationRequest& request) {
  const EndpointParts endpoint = split_endpoint(config_.endpoint);
  const nlohmann::json body = {
      {"model", config_.model},
      {"messages", {{{"role", "user"}, {"content", request.prompt}}}},
      {"temperature", request.temperature},
      {"max_tokens", request.max_new_tokens},
  };
  const std::string payload = body.dump();

  int last_status = 0;
  std::string last_error;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(config_.backoff_base_ms * (1 << (attempt - 1))));
    }
    httplib::Client client(endpoint.host_port);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(endpoint.path, headers, payload, "application/json");
    if (!res) {
      last_status = 0;
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      try {
        const auto parsed = nlohmann::json::parse(res->body);
        return {request.video_id, parsed.at("choices").at(0).at("message").at("content"),
                "remote:" + config_.model};
      } catch (const std::exception& e) {
        throw ProviderError(res->status, std::string("unparseable response body: ") + e.what());
      }
    }
    if (!transient_status(res->status)) throw ProviderError(res->status, res->body);
    last_status = res->status;
    last_error = res->body;
  }
  throw ProviderError(last_status, "retries exhausted: " + last_error);
}

}  // namespace cof
