#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cof/types.hpp"

namespace cof {

// Instruction block placed ahead of the captions; the completion is expected
// to answer with the three ** markers it names.
inline constexpr const char* kRealPromptInstruction =
    "Ask a question based on the narrative that is provided for a video. "
    "The questions should be answerable from the video description.\n"
    "Start reasoning step-by-step like this:\n"
    "Point out key elements from the video relevant to the question.\n"
    "Break down the reasoning from those elements to the answer.\n"
    "Include specific frame numbers as references to support your reasoning.\n"
    "Answer clearly.\n"
    "**Question**:\n"
    "**Reasoning**:\n"
    "**Answer**:";

// Serializes an already re-indexed annotation: the instruction block, a blank
// line, then one "Frame <id>: <caption>" line per caption. Byte-stable.
std::string build_prompt(const VideoAnnotation& aligned);

struct ParsedTriplet {
  std::string question;
  std::vector<std::string> reasoning;
  std::string answer;
};

struct MalformedTriplet {
  std::size_t index = 0;  // position among the completion's triplet segments
  std::string reason;     // marker_missing | out_of_order | empty_field | no_question_marker
};

struct ParseOutcome {
  std::vector<ParsedTriplet> triplets;
  std::vector<MalformedTriplet> rejects;
};

// Splits a completion on the **Question**/**Reasoning**/**Answer** markers
// (several triplets per completion are fine), breaking reasoning into steps on
// newlines and dropping leading enumeration tokens ("1.", "2)", "-"). Total:
// never throws; damaged segments land in `rejects`.
ParseOutcome parse_generation(const std::string& text);

struct RejectedSample {
  CofSample sample;
  std::string reason;  // question_reference | out_of_range
};

struct RealSampleBatch {
  std::vector<CofSample> samples;
  std::vector<RejectedSample> rejects;
};

// Turns parsed triplets into training records; anything violating the record
// invariants is routed to the reject stream instead of being dropped.
RealSampleBatch to_cof_samples(const std::string& video_id,
                               const std::vector<ParsedTriplet>& triplets, int frame_count);

struct GenerationRequest {
  std::string video_id;
  std::string prompt;
  int max_new_tokens = 1024;
  double temperature = 0.7;
};

struct GenerationResponse {
  std::string video_id;
  std::string text;
  std::string provider_tag;
};

struct ReplayMiss : std::runtime_error {
  explicit ReplayMiss(const std::string& key)
      : std::runtime_error("no replay fixture for key '" + key + "'") {}
};

struct ProviderError : std::runtime_error {
  ProviderError(int status, const std::string& message)
      : std::runtime_error("provider error (status " + std::to_string(status) + "): " + message),
        status(status) {}
  int status;
};

class GenerationClient {
 public:
  virtual ~GenerationClient() = default;
  virtual GenerationResponse complete(const GenerationRequest& request) = 0;
};

// Offline stand-in: completions come from a fixture file of {key, text}
// records keyed by video id. Unknown keys are an error, not a fallback.
class ReplayClient : public GenerationClient {
 public:
  explicit ReplayClient(std::map<std::string, std::string> fixtures);
  static ReplayClient from_file(const std::string& path);
  GenerationResponse complete(const GenerationRequest& request) override;

 private:
  std::map<std::string, std::string> fixtures_;
};

struct RemoteConfig {
  std::string endpoint;  // full URL, e.g. http://host:port/v1/chat/completions
  std::string api_key;
  std::string model;
  int max_attempts = 3;
  int backoff_base_ms = 1000;

  // Endpoint from COF_LLM_ENDPOINT, key from COF_LLM_KEY.
  static RemoteConfig from_env(std::string model);
};

// Chat-completions style HTTP client. Transient failures (connect errors,
// 429, 5xx) are retried with exponential backoff; anything else surfaces as
// ProviderError.
class RemoteClient : public GenerationClient {
 public:
  explicit RemoteClient(RemoteConfig config);
  GenerationResponse complete(const GenerationRequest& request) override;

 private:
  RemoteConfig config_;
};

}  // namespace cof
