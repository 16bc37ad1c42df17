#include "cof/curate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "cof/io.hpp"
#include "cof/rng.hpp"
#include "cof/trace_eval.hpp"

namespace cof {

Verdict validate(const CofSample& sample, int frame_count) {
  if (sample.question.empty()) return {false, "empty_question"};
  if (sample.answer.empty()) return {false, "empty_answer"};
  if (sample.reasoning.empty()) return {false, "empty_reasoning"};
  if (!extract_frame_refs(sample.question).empty()) return {false, "question_reference"};
  for (int id : sample.frame_refs) {
    if (id < 1 || id > frame_count) return {false, "out_of_range"};
  }
  auto extracted = extract_frame_refs(sample.joined_reasoning());
  std::sort(extracted.begin(), extracted.end());
  if (extracted != sample.frame_refs) return {false, "ref_mismatch"};
  return {true, ""};
}

std::vector<CofSample> rebalance(const std::vector<CofSample>& samples,
                                 double target_zero_ref_fraction, std::uint64_t seed) {
  if (samples.empty()) return {};
  if (target_zero_ref_fraction < 0.0 || target_zero_ref_fraction > 1.0) {
    throw std::invalid_argument("target zero-reference fraction must lie in [0, 1]");
  }

  std::vector<std::size_t> zero_positions;
  std::size_t referenced = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].frame_refs.empty()) {
      zero_positions.push_back(i);
    } else {
      ++referenced;
    }
  }

  const double current =
      static_cast<double>(zero_positions.size()) / static_cast<double>(samples.size());
  if (current <= target_zero_ref_fraction || zero_positions.empty()) return samples;

  // Keep z zero-reference samples so that z / (z + referenced) hits the
  // target; z = ceil(target * referenced / (1 - target)).
  std::size_t keep_zero = 0;
  if (target_zero_ref_fraction > 0.0 && referenced > 0) {
    keep_zero = static_cast<std::size_t>(std::ceil(
        target_zero_ref_fraction * static_cast<double>(referenced) /
        (1.0 - target_zero_ref_fraction)));
    keep_zero = std::min(keep_zero, zero_positions.size());
  }

  Rng rng(seed);
  auto picks = rng.sample_indices(zero_positions.size(), keep_zero);
  std::unordered_set<std::size_t> kept_positions;
  for (auto p : picks) kept_positions.insert(zero_positions[p]);

  std::vector<CofSample> out;
  out.reserve(referenced + keep_zero);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].frame_refs.empty() || kept_positions.count(i)) out.push_back(samples[i]);
  }
  return out;
}

std::vector<CofSample> dedup(const std::vector<CofSample>& samples) {
  std::vector<CofSample> out;
  std::unordered_set<std::string> seen;
  for (const auto& s : samples) {
    if (seen.insert(s.video_ref + '\x1f' + s.question).second) out.push_back(s);
  }
  return out;
}

DatasetManifest manifest(const std::vector<CofSample>& samples) {
  if (samples.empty()) throw EmptyDataset();
  DatasetManifest m;
  m.total = samples.size();
  m.histogram.assign(kHistogramBins, 0);
  for (const auto& s : samples) {
    m.by_source[to_string(s.source)] += 1;
    m.by_category[to_string(s.category)] += 1;
    m.histogram[histogram_bin(s.frame_refs.size())] += 1;
  }
  m.zero_ref_fraction = static_cast<double>(m.histogram[0]) / static_cast<double>(m.total);
  return m;
}

std::string DatasetManifest::to_table() const {
  std::string out;
  char line[128];
  out += "source / category                 count\n";
  out += "---------------------------------------\n";
  for (const auto& [source, count] : by_source) {
    std::snprintf(line, sizeof(line), "%-32s %6zu\n", source.c_str(), count);
    out += line;
  }
  for (const auto& [category, count] : by_category) {
    std::snprintf(line, sizeof(line), "  %-30s %6zu\n", category.c_str(), count);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-32s %6zu\n", "total", total);
  out += line;
  std::snprintf(line, sizeof(line), "%-32s %9.4f\n", "zero_ref_fraction", zero_ref_fraction);
  out += line;
  out += "frame references per sample\n";
  for (std::size_t bin = 0; bin < histogram.size(); ++bin) {
    std::snprintf(line, sizeof(line), "  %-4s %6zu\n", histogram_bin_label(bin), histogram[bin]);
    out += line;
  }
  return out;
}

void write_dataset(const std::vector<CofSample>& samples, const std::string& path) {
  write_jsonl<CofSample>(path, samples, [](const CofSample& s) { return to_json(s); });
}

std::vector<CofSample> read_dataset(const std::string& path) {
  std::vector<CofSample> out;
  for_each_jsonl(path, [&](const ojson& j, std::size_t) {
    out.push_back(cof_sample_from_json(j, /*strict=*/true));
  });
  return out;
}

}  // namespace cof
