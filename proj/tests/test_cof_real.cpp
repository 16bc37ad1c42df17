#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "cof/cof_real.hpp"
#include "cof/frame_align.hpp"
#include "cof/io.hpp"
#include "cof/rng.hpp"
#include "cof/trace_eval.hpp"

using namespace cof;

namespace {

const std::string kFixtures = COF_FIXTURES_DIR;

VideoAnnotation two_caption_video() {
  VideoAnnotation v;
  v.video_id = "vid";
  v.duration_s = 30.0;
  v.fps = 1.0;
  v.captions = {{1, "a dog runs across the yard"}, {21, "the dog digs near the fence"}};
  return v;
}

}  // namespace

TEST_CASE("prompt layout: instruction, blank line, one line per caption") {
  const std::string prompt = build_prompt(two_caption_video());
  CHECK(prompt.rfind(kRealPromptInstruction, 0) == 0);
  const std::string tail =
      "Frame 1: a dog runs across the yard\nFrame 21: the dog digs near the fence";
  REQUIRE(prompt.size() > tail.size());
  CHECK(prompt.substr(prompt.size() - tail.size()) == tail);
  CHECK(prompt.find("**Answer**:\n\nFrame 1:") != std::string::npos);
  CHECK(build_prompt(two_caption_video()) == prompt);  // byte-stable
}

TEST_CASE("prompt golden file matches byte for byte") {
  const auto videos = read_jsonl<VideoAnnotation>(kFixtures + "/real_annotation.jsonl",
                                                  [](const ojson& j) { return video_from_json(j); });
  REQUIRE(videos.size() == 1);
  const std::string golden = read_file(kFixtures + "/real_prompt_golden.txt");
  CHECK(build_prompt(videos[0]) == golden);
}

TEST_CASE("prompt round-trip: every frame line uses a valid new id") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    SourceTimeline t;
    t.n_frames = static_cast<int>(rng.uniform_int(40, 900));
    t.fps = rng.uniform_real(1.0, 30.0);
    const int n_caps = static_cast<int>(rng.uniform_int(1, 8));
    for (int i = 0; i < n_caps; ++i) {
      const int id = static_cast<int>(rng.uniform_int(1, t.n_frames));
      if (t.annotated_ids.empty() || id > t.annotated_ids.back()) t.annotated_ids.push_back(id);
    }
    if (t.annotated_ids.empty()) t.annotated_ids.push_back(1);

    AlignmentMap map;
    try {
      map = build_alignment(t, 30.0, 30);
    } catch (const SpanExceeded&) {
      continue;
    }
    VideoAnnotation v;
    v.video_id = "v";
    v.duration_s = static_cast<double>(t.n_frames) / t.fps;
    v.fps = t.fps;
    for (int id : t.annotated_ids) v.captions.push_back({id, "caption text"});
    const auto remapped = remap_annotations(v, map);
    const std::string prompt = build_prompt(remapped);

    // Caption lines start after the blank separator line.
    const std::size_t body = prompt.find("\n\n");
    REQUIRE(body != std::string::npos);
    std::size_t pos = body + 2;
    while (pos < prompt.size()) {
      std::size_t eol = prompt.find('\n', pos);
      if (eol == std::string::npos) eol = prompt.size();
      const std::string line = prompt.substr(pos, eol - pos);
      REQUIRE(line.rfind("Frame ", 0) == 0);
      const int id = std::stoi(line.substr(6));
      CHECK(id >= 1);
      CHECK(id <= map.frame_count());
      pos = eol + 1;
    }
  }
}

TEST_CASE("parse: single triplet with enumerated steps") {
  const auto outcome = parse_generation("**Question**: Q\n**Reasoning**: 1. A\n2. B\n**Answer**: X");
  REQUIRE(outcome.triplets.size() == 1);
  CHECK(outcome.rejects.empty());
  CHECK(outcome.triplets[0].question == "Q");
  CHECK(outcome.triplets[0].reasoning == std::vector<std::string>{"A", "B"});
  CHECK(outcome.triplets[0].answer == "X");
}

TEST_CASE("parse: bullet and parenthesis enumerations are stripped") {
  const auto outcome =
      parse_generation("**Question**: Q\n**Reasoning**:\n- first\n12) second\n**Answer**: done");
  REQUIRE(outcome.triplets.size() == 1);
  CHECK(outcome.triplets[0].reasoning == std::vector<std::string>{"first", "second"});
}

TEST_CASE("parse: multiple triplets in one completion") {
  const std::string text =
      "**Question**: Q1\n**Reasoning**: R1\n**Answer**: A1\n"
      "**Question**: Q2\n**Reasoning**: R2\n**Answer**: A2\n";
  const auto outcome = parse_generation(text);
  REQUIRE(outcome.triplets.size() == 2);
  CHECK(outcome.triplets[0].question == "Q1");
  CHECK(outcome.triplets[1].answer == "A2");
}

TEST_CASE("parse: damaged segments are rejected, the rest survives") {
  SUBCASE("missing answer marker") {
    const auto outcome = parse_generation("**Question**: Q\n**Reasoning**: R\nno answer here");
    CHECK(outcome.triplets.empty());
    REQUIRE(outcome.rejects.size() == 1);
    CHECK(outcome.rejects[0].reason == "marker_missing");
  }
  SUBCASE("markers out of order") {
    const auto outcome = parse_generation("**Question**: Q\n**Answer**: A\n**Reasoning**: R");
    CHECK(outcome.triplets.empty());
    REQUIRE(outcome.rejects.size() == 1);
    CHECK(outcome.rejects[0].reason == "out_of_order");
  }
  SUBCASE("empty question") {
    const auto outcome = parse_generation("**Question**: \n**Reasoning**: R\n**Answer**: A");
    CHECK(outcome.triplets.empty());
    REQUIRE(outcome.rejects.size() == 1);
    CHECK(outcome.rejects[0].reason == "empty_field");
  }
  SUBCASE("no marker at all") {
    const auto outcome = parse_generation("free-form rambling");
    CHECK(outcome.triplets.empty());
    CHECK(outcome.rejects.size() == 1);
  }
  SUBCASE("damaged middle triplet") {
    const std::string text =
        "**Question**: Q1\n**Reasoning**: R1\n**Answer**: A1\n"
        "**Question**: Q2\n**Reasoning**: R2 without the final marker\n"
        "**Question**: Q3\n**Reasoning**: R3\n**Answer**: A3\n";
    const auto outcome = parse_generation(text);
    CHECK(outcome.triplets.size() == 2);
    REQUIRE(outcome.rejects.size() == 1);
    CHECK(outcome.rejects[0].index == 1);
  }
}

TEST_CASE("parse fixtures: three-triplet and marker-damaged completions") {
  const auto good = parse_generation(read_file(kFixtures + "/completion_three_triplets.txt"));
  CHECK(good.triplets.size() == 3);
  CHECK(good.rejects.empty());

  const auto damaged = parse_generation(read_file(kFixtures + "/completion_marker_damaged.txt"));
  CHECK(damaged.triplets.size() == 2);
  CHECK(damaged.rejects.size() == 1);
}

TEST_CASE("parse totality on random byte soup") {
  Rng rng(31337);
  const std::string pieces[] = {"**Question**:", "**Reasoning**:", "**Answer**:", "Frame 3",
                                "\n",             "1.",             "text",        "**",
                                ":",              " "};
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const int n = static_cast<int>(rng.uniform_int(0, 20));
    for (int i = 0; i < n; ++i) {
      text += pieces[rng.uniform_int(0, 9)];
    }
    CHECK_NOTHROW(parse_generation(text));
  }
}

TEST_CASE("triplets become samples; invariant violations go to the reject stream") {
  std::vector<ParsedTriplet> triplets;
  triplets.push_back({"What happens?", {"In Frame 2 a dog runs", "By Frame 5 it stops"}, "It stops"});
  triplets.push_back({"What happens after Frame 3?", {"In Frame 4 it rains"}, "Rain"});
  triplets.push_back({"Late event?", {"In Frame 42 something happens"}, "Something"});

  const RealSampleBatch batch = to_cof_samples("vid", triplets, 30);
  REQUIRE(batch.samples.size() == 1);
  CHECK(batch.samples[0].frame_refs == std::vector<int>{2, 5});
  CHECK(batch.samples[0].source == SampleSource::real);
  CHECK(batch.samples[0].category == SampleCategory::real_free_form);

  REQUIRE(batch.rejects.size() == 2);
  CHECK(batch.rejects[0].reason == "question_reference");
  CHECK(batch.rejects[1].reason == "out_of_range");
}

TEST_CASE("replay client answers from fixtures and errors on unknown keys") {
  ReplayClient client(std::map<std::string, std::string>{
      {"vid", "**Question**: Q\n**Reasoning**: R\n**Answer**: A"}});
  const auto response = client.complete({"vid", "prompt", 128, 0.0});
  CHECK(response.text.find("**Answer**: A") != std::string::npos);
  CHECK(response.provider_tag == "replay");
  CHECK_THROWS_AS(client.complete({"other", "prompt", 128, 0.0}), ReplayMiss);
}

TEST_CASE("remote client: retry on transient failure, then success") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth;
  std::string seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    const int hit = ++hits;
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    if (hit == 1) {
      res.status = 500;
      res.set_content("transient", "text/plain");
      return;
    }
    const nlohmann::json reply = {
        {"choices", {{{"message", {{"role", "assistant"}, {"content", "stubbed completion"}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  RemoteConfig config;
  config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  config.api_key = "sekrit";
  config.model = "test-model";
  config.backoff_base_ms = 10;
  RemoteClient client(config);

  const auto response = client.complete({"vid", "the prompt", 77, 0.25});
  CHECK(response.text == "stubbed completion");
  CHECK(hits == 2);
  CHECK(seen_auth == "Bearer sekrit");
  const auto body = nlohmann::json::parse(seen_body);
  CHECK(body.at("model") == "test-model");
  CHECK(body.at("messages").at(0).at("content") == "the prompt");
  CHECK(body.at("max_tokens") == 77);
  CHECK(body.at("temperature") == doctest::Approx(0.25));

  server.stop();
  server_thread.join();
}

TEST_CASE("remote client: non-transient failures surface immediately") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 400;
    res.set_content("bad request", "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  RemoteConfig config;
  config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  config.model = "test-model";
  config.backoff_base_ms = 10;
  RemoteClient client(config);
  CHECK_THROWS_AS(client.complete({"vid", "p", 16, 0.0}), ProviderError);
  CHECK(hits == 1);

  server.stop();
  server_thread.join();
}

TEST_CASE("offline purity: replay branch is deterministic end to end") {
  const VideoAnnotation video = two_caption_video();
  ReplayClient client(std::map<std::string, std::string>{
      {"vid",
       "**Question**: Where does the dog dig?\n"
       "**Reasoning**: 1. In Frame 1 the dog crosses the yard.\n"
       "2. In Frame 21 it digs near the fence.\n"
       "**Answer**: Near the fence."}});

  auto run_once = [&] {
    const auto response = client.complete({video.video_id, build_prompt(video), 512, 0.7});
    const auto parsed = parse_generation(response.text);
    return to_cof_samples(video.video_id, parsed.triplets, 30);
  };
  const auto first = run_once();
  const auto second = run_once();
  REQUIRE(first.samples.size() == 1);
  REQUIRE(second.samples.size() == 1);
  CHECK(to_json(first.samples[0]).dump() == to_json(second.samples[0]).dump());
  CHECK(first.samples[0].frame_refs == std::vector<int>{1, 21});
}
