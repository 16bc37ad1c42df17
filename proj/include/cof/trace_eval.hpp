#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cof/types.hpp"

namespace cof {

// Frame-reference grammar: the token "frame" (case-insensitive, plural "frames"
// allowed), then an optional single hyphen or space, then a decimal integer
// >= 1. "Frame 3", "frame-10" and "Frames 7" all refer to a frame; a bare
// integer never does. Returns ids in order of first mention, each once.
std::vector<int> extract_frame_refs(std::string_view text);

// Distinct count bucketed into 0..10 and an 11+ overflow bin.
inline constexpr std::size_t kHistogramBins = 12;
std::size_t histogram_bin(std::size_t distinct_refs);
const char* histogram_bin_label(std::size_t bin);

enum class TaskKind { multiple_choice, binary_yes_no, numeric };

const char* to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

struct EvalOption {
  std::string label;  // "A", "B", ...
  std::string text;
};

struct EvalTask {
  std::string task_id;
  TaskKind kind = TaskKind::multiple_choice;
  std::vector<EvalOption> options;  // multiple_choice only
  std::string gold_label;           // multiple_choice: letter; binary: "yes"/"no"
  double gold_number = 0.0;         // numeric
  std::string split;
};

struct Prediction {
  std::string task_id;
  std::string raw_text;
};

struct ExtractedAnswer {
  std::string label;    // multiple_choice
  bool yes = false;     // binary_yes_no
  double number = 0.0;  // numeric
};

// Pulls the final answer out of a free-form model output. Last mention wins;
// digits that belong to a frame reference are never read as a numeric answer.
// nullopt when nothing answer-like is present.
std::optional<ExtractedAnswer> extract_answer(std::string_view raw_text, TaskKind kind,
                                              std::size_t n_options = 26);

struct ZeroGold : std::invalid_argument {
  ZeroGold() : std::invalid_argument("mean relative accuracy is undefined for gold == 0") {}
};

// Mean relative accuracy: share of confidence thresholds
// theta in {0.50, 0.55, ..., 0.95} with |pred - gold| / gold strictly below
// 1 - theta.
double mra(double pred, double gold);

struct UnknownTask : std::runtime_error {
  explicit UnknownTask(const std::string& task_id)
      : std::runtime_error("prediction references unknown task '" + task_id + "'") {}
};

struct SplitScore {
  double score = 0.0;
  std::size_t n_tasks = 0;
  std::size_t n_no_answer = 0;
  std::size_t n_missing = 0;  // tasks with no prediction at all
};

struct MetricReport {
  std::map<std::string, SplitScore> splits;
  double overall = 0.0;  // unweighted mean of split scores
  std::map<std::string, double> per_kind;
  std::vector<std::size_t> histogram = std::vector<std::size_t>(kHistogramBins, 0);
  std::size_t n_tasks = 0;
  std::size_t n_predictions = 0;
  std::size_t n_no_answer = 0;
  std::size_t n_missing = 0;
};

// Accuracy for choice and binary tasks, mean relative accuracy for numeric
// ones; tasks whose prediction yields no answer score 0 and are tallied.
MetricReport score(const std::vector<EvalTask>& tasks, const std::vector<Prediction>& predictions);

// Frame-reference histogram over raw prediction texts.
std::vector<std::size_t> reference_histogram(const std::vector<Prediction>& predictions);

}  // namespace cof
