#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cof/types.hpp"

namespace cof {

// Composition of the released CoF-Data training set; reference values for
// cross-checking imported copies, not reproduced by this toolkit.
inline constexpr std::size_t kCofDataTotalSamples = 164186;
inline constexpr std::size_t kCofDataRealSamples = 103683;
inline constexpr std::size_t kCofDataSynthSamples = 60503;

struct Verdict {
  bool accepted = false;
  std::string reason;  // question_reference | out_of_range | empty_question |
                       // empty_answer | empty_reasoning | ref_mismatch
};

// Filtering rules for one sample given the frame count K of its video:
// questions must not reference frames, every reference must land in [1, K],
// question/answer/reasoning must be non-empty, and the stored references must
// match what the reasoning actually cites.
Verdict validate(const CofSample& sample, int frame_count);

// Keeps every referenced sample and subsamples the zero-reference ones down
// to the target share (uniform, seeded, input order preserved). Already-low
// inputs pass through unchanged.
std::vector<CofSample> rebalance(const std::vector<CofSample>& samples,
                                 double target_zero_ref_fraction, std::uint64_t seed);

// Drops repeats of (video_ref, question); the first occurrence wins.
std::vector<CofSample> dedup(const std::vector<CofSample>& samples);

struct EmptyDataset : std::runtime_error {
  EmptyDataset() : std::runtime_error("cannot build a manifest for an empty dataset") {}
};

struct DatasetManifest {
  std::map<std::string, std::size_t> by_source;
  std::map<std::string, std::size_t> by_category;
  std::size_t total = 0;
  double zero_ref_fraction = 0.0;
  std::vector<std::size_t> histogram;  // distinct-reference bins 0..10, 11+

  std::string to_table() const;  // aligned plain-text rendering
};

DatasetManifest manifest(const std::vector<CofSample>& samples);

// Line-delimited records, lossless round-trip. Unknown fields and malformed
// lines are rejected with the offending line number (DataError).
void write_dataset(const std::vector<CofSample>& samples, const std::string& path);
std::vector<CofSample> read_dataset(const std::string& path);

}  // namespace cof
