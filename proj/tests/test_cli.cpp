#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "cof/config.hpp"
#include "cof/curate.hpp"
#include "cof/io.hpp"

using namespace cof;

namespace {

namespace fs = std::filesystem;

const std::string kBin = COF_FORGE_BIN;
const std::string kFixtures = COF_FIXTURES_DIR;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::string& args, const fs::path& dir) {
  const fs::path out_path = dir / "stdout.txt";
  const fs::path err_path = dir / "stderr.txt";
  const std::string cmd =
      kBin + " " + args + " >" + out_path.string() + " 2>" + err_path.string();
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_file(out_path.string());
  result.err = read_file(err_path.string());
  return result;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cof_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_sim_config(const fs::path& path) {
  std::ofstream out(path);
  out << "sim.n_objects_min = 3\n"
         "sim.n_objects_max = 5\n"
         "sim.n_frames = 24\n"
         "sim.fps = 4\n";
}

}  // namespace

TEST_CASE("key-value config parsing") {
  const auto kv = KeyValueConfig::from_string(
      "# comment\n"
      "alpha = 3.5\n"
      "name = demo run # trailing comment\n"
      "flag = on\n"
      "count = 12\n",
      "/base");
  CHECK(kv.get_double("alpha", 0.0) == doctest::Approx(3.5));
  CHECK(kv.get_string("name", "") == "demo run");
  CHECK(kv.get_bool("flag", false));
  CHECK(kv.get_int("count", 0) == 12);
  CHECK(kv.get_int("missing", 9) == 9);
  CHECK(kv.get_path("rel", "x.jsonl") == "/base/x.jsonl");
  CHECK_THROWS_AS(kv.get_int("alpha", 0), std::invalid_argument);
  CHECK_THROWS_AS(KeyValueConfig::from_string("just words\n"), std::invalid_argument);
  CHECK_THROWS_AS((void)kv.require_string("missing"), std::invalid_argument);
}

TEST_CASE("pipeline config defaults and validation") {
  const auto kv = KeyValueConfig::from_string("seed = 3\n");
  const auto config = pipeline_config_from(kv);
  CHECK(config.max_duration_s == 30.0);
  CHECK(config.frame_budget == 30);
  CHECK(config.target_zero_ref_fraction == 0.15);
  CHECK(config.seed == 3);

  CHECK_THROWS_AS(pipeline_config_from(KeyValueConfig::from_string("frame_budget = 1\n")),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      pipeline_config_from(KeyValueConfig::from_string("target_zero_ref_fraction = 1.5\n")),
      std::invalid_argument);
}

TEST_CASE("cli: unknown flags and missing arguments exit 2") {
  const auto dir = fresh_dir("usage");
  CHECK(run("simulate --nonsense", dir).exit_code == 2);
  CHECK(run("definitely-not-a-subcommand", dir).exit_code == 2);
  CHECK(run("align --in only", dir).exit_code == 2);
}

TEST_CASE("cli: simulate is reproducible and writes a run manifest") {
  const auto dir = fresh_dir("simulate");
  write_sim_config(dir / "sim.cfg");
  const std::string base = "simulate --config " + (dir / "sim.cfg").string();

  auto r1 = run(base + " --seeds 1..8 --out " + (dir / "a.jsonl").string(), dir);
  REQUIRE_MESSAGE(r1.exit_code == 0, r1.err);
  auto r2 = run(base + " --seeds 1..8 --out " + (dir / "b.jsonl").string(), dir);
  REQUIRE(r2.exit_code == 0);
  CHECK(read_file((dir / "a.jsonl").string()) == read_file((dir / "b.jsonl").string()));
  CHECK(fs::exists(dir / "a.jsonl.run.json"));

  // Parallel generation emits identical bytes.
  auto r3 = run(base + " --seeds 1..8 --jobs 4 --out " + (dir / "c.jsonl").string(), dir);
  REQUIRE(r3.exit_code == 0);
  CHECK(read_file((dir / "a.jsonl").string()) == read_file((dir / "c.jsonl").string()));
}

TEST_CASE("cli: align drops unalignable records into the report") {
  const auto dir = fresh_dir("align");
  {
    std::ofstream out(dir / "in.jsonl");
    VideoAnnotation ok;
    ok.video_id = "fits";
    ok.duration_s = 20.0;
    ok.fps = 2.0;
    ok.captions = {{4, "a"}, {30, "b"}};
    VideoAnnotation too_wide;
    too_wide.video_id = "wide";
    too_wide.duration_s = 120.0;
    too_wide.fps = 2.0;
    too_wide.captions = {{10, "a"}, {200, "b"}};  // 95 s apart
    out << to_json(ok).dump() << "\n" << to_json(too_wide).dump() << "\n";
  }
  const auto r = run("align --max-duration 30 --budget 30 --in " + (dir / "in.jsonl").string() +
                         " --out " + (dir / "out.jsonl").string() + " --report " +
                         (dir / "dropped.txt").string(),
                     dir);
  REQUIRE_MESSAGE(r.exit_code == 0, r.err);
  const auto aligned = read_jsonl<VideoAnnotation>(
      (dir / "out.jsonl").string(), [](const ojson& j) { return video_from_json(j); });
  REQUIRE(aligned.size() == 1);
  CHECK(aligned[0].video_id == "fits");
  CHECK(read_file((dir / "dropped.txt").string()) == "wide,span_exceeded\n");
}

TEST_CASE("cli: synth then curate over simulated scenes") {
  const auto dir = fresh_dir("synth");
  write_sim_config(dir / "sim.cfg");
  std::ofstream(dir / "plan.cfg") << "plan.max_appearance_subsets = 1\n";

  REQUIRE(run("simulate --config " + (dir / "sim.cfg").string() + " --seeds 1..6 --out " +
                  (dir / "scenes.jsonl").string(),
              dir)
              .exit_code == 0);
  REQUIRE(run("align --in " + (dir / "scenes.jsonl").string() + " --out " +
                  (dir / "aligned.jsonl").string() + " --report " + (dir / "drop.txt").string(),
              dir)
              .exit_code == 0);
  REQUIRE(run("synth --scenes " + (dir / "aligned.jsonl").string() + " --plan " +
                  (dir / "plan.cfg").string() + " --seed 5 --out " + (dir / "samples.jsonl").string(),
              dir)
              .exit_code == 0);
  const auto samples = read_dataset((dir / "samples.jsonl").string());
  CHECK(samples.size() >= 12);  // at least collision + motion per scene

  const auto r = run("curate --in " + (dir / "samples.jsonl").string() +
                         " --target-zero-frac 0.5 --seed 2 --out " + (dir / "dataset.jsonl").string() +
                         " --manifest " + (dir / "manifest.json").string(),
                     dir);
  REQUIRE_MESSAGE(r.exit_code == 0, r.err);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "manifest.json.txt"));
  const auto m = ojson::parse(read_file((dir / "manifest.json").string()));
  CHECK(m.at("total").get<std::size_t>() >= 1);
  CHECK(m.at("processing").at("rejected").get<std::size_t>() == 0);
}

TEST_CASE("cli: real-gen with the replay client") {
  const auto dir = fresh_dir("realgen");
  const auto r = run("real-gen --annotations " + kFixtures + "/demo/real_annotations.jsonl" +
                         " --client replay --fixtures " + kFixtures +
                         "/demo/replay_fixtures.jsonl --out " + (dir / "real.jsonl").string() +
                         " --rejects " + (dir / "rejects.jsonl").string(),
                     dir);
  REQUIRE_MESSAGE(r.exit_code == 0, r.err);
  const auto samples = read_dataset((dir / "real.jsonl").string());
  CHECK(samples.size() >= 8);
  for (const auto& s : samples) {
    CHECK(s.source == SampleSource::real);
    CHECK(validate(s, 30).accepted);
  }
  // The fixtures deliberately include one question-side frame reference.
  const std::string rejects = read_file((dir / "rejects.jsonl").string());
  CHECK(rejects.find("question_reference") != std::string::npos);
}

TEST_CASE("cli: eval and trace-stats") {
  const auto dir = fresh_dir("eval");
  {
    std::ofstream tasks(dir / "tasks.jsonl");
    tasks << R"({"task_id":"t1","kind":"multiple_choice","split":"mc","options":[{"label":"A","text":"one"},{"label":"B","text":"two"}],"gold":"A"})"
          << "\n";
    tasks << R"({"task_id":"t2","kind":"binary_yes_no","split":"bin","gold":"yes"})" << "\n";
    tasks << R"({"task_id":"t3","kind":"numeric","split":"num","gold":10})" << "\n";
    std::ofstream preds(dir / "preds.jsonl");
    preds << R"({"task_id":"t1","raw_text":"In Frame 2 ... Answer: A"})" << "\n";
    preds << R"({"task_id":"t2","raw_text":"Answer: yes"})" << "\n";
    preds << R"({"task_id":"t3","raw_text":"Frame 3 and Frame 4 ... Answer: 8"})" << "\n";
  }
  const auto r = run("eval --tasks " + (dir / "tasks.jsonl").string() + " --preds " +
                         (dir / "preds.jsonl").string() + " --report " +
                         (dir / "report.json").string(),
                     dir);
  REQUIRE_MESSAGE(r.exit_code == 0, r.err);
  const auto report = ojson::parse(read_file((dir / "report.json").string()));
  CHECK(report.at("overall").get<double>() == doctest::Approx((1.0 + 1.0 + 0.6) / 3.0));
  CHECK(fs::exists(dir / "report.json.txt"));
  CHECK(fs::exists(dir / "report.json.hist.csv"));
  CHECK(r.out.find("overall") != std::string::npos);

  const auto stats = run("trace-stats --preds " + (dir / "preds.jsonl").string() + " --out " +
                             (dir / "hist.csv").string(),
                         dir);
  REQUIRE(stats.exit_code == 0);
  const std::string csv = read_file((dir / "hist.csv").string());
  CHECK(csv.find("refs,count") == 0);
  CHECK(csv.find("\n0,1\n") != std::string::npos);  // the binary answer cites no frame
  CHECK(csv.find("\n1,1\n") != std::string::npos);
  CHECK(csv.find("\n2,1\n") != std::string::npos);  // one prediction cites two frames
}

TEST_CASE("cli: data errors exit 1 and name the offending record") {
  const auto dir = fresh_dir("dataerr");
  std::ofstream(dir / "bad.jsonl") << "{ broken\n";
  const auto r = run("curate --in " + (dir / "bad.jsonl").string() + " --out " +
                         (dir / "out.jsonl").string() + " --manifest " +
                         (dir / "m.json").string(),
                     dir);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("bad.jsonl:1:") != std::string::npos);

  const auto miss = run("real-gen --annotations " + kFixtures +
                            "/demo/real_annotations.jsonl --client replay --fixtures " +
                            (dir / "nothing.jsonl").string() + " --out " + (dir / "o.jsonl").string() +
                            " --rejects " + (dir / "r.jsonl").string(),
                        dir);
  CHECK(miss.exit_code == 1);
}
