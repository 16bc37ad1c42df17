#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cof/curate.hpp"
#include "cof/io.hpp"
#include "cof/rng.hpp"

using namespace cof;

namespace {

CofSample sample_with_refs(const std::string& id, std::vector<int> refs) {
  CofSample s;
  s.sample_id = id;
  s.video_ref = "video_" + id;
  s.source = SampleSource::synth;
  s.category = SampleCategory::object_count_collision;
  s.question = "How many collisions happen in this video?";
  if (refs.empty()) {
    s.reasoning = {"No collisions are observed in the video."};
  } else {
    for (int r : refs) {
      s.reasoning.push_back("A collision happens in Frame " + std::to_string(r) +
                            " between a and b");
    }
  }
  s.answer = std::to_string(refs.size()) + " collisions happen in this video.";
  s.frame_refs = std::move(refs);
  return s;
}

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "cof_curate_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("validation verdicts") {
  CHECK(validate(sample_with_refs("ok", {3, 7}), 30).accepted);

  CofSample q = sample_with_refs("q", {3});
  q.question = "What happens after Frame 4?";
  CHECK(validate(q, 30).reason == "question_reference");

  CofSample range = sample_with_refs("r", {31});
  CHECK(validate(range, 30).reason == "out_of_range");

  CofSample empty_q = sample_with_refs("eq", {});
  empty_q.question.clear();
  CHECK(validate(empty_q, 30).reason == "empty_question");

  CofSample empty_a = sample_with_refs("ea", {});
  empty_a.answer.clear();
  CHECK(validate(empty_a, 30).reason == "empty_answer");

  CofSample empty_r = sample_with_refs("er", {});
  empty_r.reasoning.clear();
  CHECK(validate(empty_r, 30).reason == "empty_reasoning");

  // Stored references must match what the reasoning cites.
  CofSample drift = sample_with_refs("d", {3});
  drift.frame_refs = {2};
  CHECK(validate(drift, 30).reason == "ref_mismatch");
}

TEST_CASE("rebalance: pinned worked example") {
  std::vector<CofSample> samples;
  for (int i = 0; i < 500; ++i) samples.push_back(sample_with_refs("ref" + std::to_string(i), {1 + i % 20}));
  for (int i = 0; i < 500; ++i) samples.push_back(sample_with_refs("zero" + std::to_string(i), {}));

  const auto out = rebalance(samples, 0.15, 42);
  std::size_t zero = 0;
  for (const auto& s : out) {
    if (s.frame_refs.empty()) ++zero;
  }
  // ceil(0.15 * 500 / 0.85) = 89 zero-reference survivors.
  CHECK(zero == 89);
  CHECK(out.size() == 589);
  const double fraction = static_cast<double>(zero) / static_cast<double>(out.size());
  CHECK(fraction == doctest::Approx(0.15).epsilon(0.01));

  // Deterministic and order-preserving.
  const auto again = rebalance(samples, 0.15, 42);
  REQUIRE(again.size() == out.size());
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(again[i].sample_id == out[i].sample_id);
  std::size_t cursor = 0;
  for (const auto& s : samples) {
    if (cursor < out.size() && out[cursor].sample_id == s.sample_id) ++cursor;
  }
  CHECK(cursor == out.size());  // output is a subsequence of the input

  const auto different_seed = rebalance(samples, 0.15, 43);
  bool identical = different_seed.size() == out.size();
  if (identical) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!(different_seed[i] == out[i])) identical = false;
    }
  }
  CHECK_FALSE(identical);
}

TEST_CASE("rebalance: below-target input passes through") {
  std::vector<CofSample> samples;
  for (int i = 0; i < 90; ++i) samples.push_back(sample_with_refs("ref" + std::to_string(i), {2}));
  for (int i = 0; i < 10; ++i) samples.push_back(sample_with_refs("zero" + std::to_string(i), {}));
  const auto out = rebalance(samples, 0.15, 1);
  CHECK(out.size() == samples.size());
}

TEST_CASE("rebalance: target zero removes every zero-reference sample") {
  std::vector<CofSample> samples;
  for (int i = 0; i < 10; ++i) samples.push_back(sample_with_refs("ref" + std::to_string(i), {2}));
  for (int i = 0; i < 10; ++i) samples.push_back(sample_with_refs("zero" + std::to_string(i), {}));
  const auto out = rebalance(samples, 0.0, 1);
  CHECK(out.size() == 10);
  for (const auto& s : out) CHECK_FALSE(s.frame_refs.empty());
}

TEST_CASE("dedup keeps the first of each (video, question)") {
  auto a = sample_with_refs("a", {1});
  auto b = sample_with_refs("b", {2});
  b.video_ref = a.video_ref;  // same video, same question text
  auto c = sample_with_refs("c", {3});
  c.question = "what is the appearance order of x, y in the video?";
  c.video_ref = a.video_ref;
  auto d = sample_with_refs("d", {4});  // same question, different video

  const auto out = dedup({a, b, c, d});
  REQUIRE(out.size() == 3);
  CHECK(out[0].sample_id == "a");
  CHECK(out[1].sample_id == "c");
  CHECK(out[2].sample_id == "d");
}

TEST_CASE("manifest: histogram, zero fraction, conservation") {
  const auto m = manifest({sample_with_refs("a", {}), sample_with_refs("b", {2, 5}),
                           sample_with_refs("c", {1, 9})});
  CHECK(m.total == 3);
  CHECK(m.histogram[0] == 1);
  CHECK(m.histogram[2] == 2);
  CHECK(m.zero_ref_fraction == doctest::Approx(1.0 / 3.0));
  std::size_t mass = 0;
  for (auto b : m.histogram) mass += b;
  CHECK(mass == m.total);
  std::size_t by_source = 0;
  for (const auto& [k, v] : m.by_source) by_source += v;
  CHECK(by_source == m.total);
  CHECK_FALSE(m.to_table().empty());

  CHECK_THROWS_AS(manifest({}), EmptyDataset);
}

TEST_CASE("released-dataset reference constants are consistent") {
  CHECK(kCofDataTotalSamples == kCofDataRealSamples + kCofDataSynthSamples);
  CHECK(kCofDataTotalSamples == 164186);
  CHECK(kCofDataRealSamples == 103683);
  CHECK(kCofDataSynthSamples == 60503);
}

TEST_CASE("dataset round-trip on randomized batches") {
  Rng rng(555);
  const std::string words[] = {"cube", "sphere", "runs", "Frame 3", "stops; then", "\"quoted\"",
                               "tab\there"};
  std::vector<CofSample> batch;
  for (int i = 0; i < 200; ++i) {
    CofSample s;
    s.sample_id = "s" + std::to_string(i);
    s.video_ref = "v" + std::to_string(rng.uniform_int(0, 20));
    s.source = rng.bernoulli(0.5) ? SampleSource::real : SampleSource::synth;
    s.category = static_cast<SampleCategory>(rng.uniform_int(0, 5));
    s.question = words[rng.uniform_int(0, 6)] + std::string("?");
    const int steps = static_cast<int>(rng.uniform_int(1, 4));
    for (int k = 0; k < steps; ++k) s.reasoning.push_back(words[rng.uniform_int(0, 6)]);
    s.answer = words[rng.uniform_int(0, 6)];
    const int refs = static_cast<int>(rng.uniform_int(0, 3));
    for (int k = 0; k < refs; ++k) s.frame_refs.push_back(static_cast<int>(rng.uniform_int(1, 30)));
    std::sort(s.frame_refs.begin(), s.frame_refs.end());
    s.frame_refs.erase(std::unique(s.frame_refs.begin(), s.frame_refs.end()), s.frame_refs.end());
    batch.push_back(std::move(s));
  }

  const auto path = temp_file("roundtrip.jsonl");
  write_dataset(batch, path.string());
  const auto loaded = read_dataset(path.string());
  REQUIRE(loaded.size() == batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) CHECK(loaded[i] == batch[i]);
}

TEST_CASE("dataset reader pinpoints bad lines") {
  const auto path = temp_file("malformed.jsonl");
  {
    std::ofstream out(path);
    for (int i = 0; i < 6; ++i) {
      out << to_json(sample_with_refs("s" + std::to_string(i), {1})).dump() << "\n";
    }
    out << "{ not json at all\n";
  }
  try {
    read_dataset(path.string());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.line == 7);
    CHECK(std::string(e.what()).find(":7:") != std::string::npos);
  }

  const auto unknown = temp_file("unknown_field.jsonl");
  {
    auto j = to_json(sample_with_refs("s", {1}));
    j["surprise"] = 1;
    std::ofstream out(unknown);
    out << j.dump() << "\n";
  }
  try {
    read_dataset(unknown.string());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.line == 1);
    CHECK(std::string(e.what()).find("surprise") != std::string::npos);
  }

  const auto empty = temp_file("empty.jsonl");
  std::ofstream(empty).close();
  CHECK(read_dataset(empty.string()).empty());
}
