#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "cof/cof_real.hpp"
#include "cof/cof_synth.hpp"
#include "cof/config.hpp"
#include "cof/curate.hpp"
#include "cof/frame_align.hpp"
#include "cof/io.hpp"
#include "cof/rng.hpp"
#include "cof/scene_sim.hpp"
#include "cof/trace_eval.hpp"

namespace {

using namespace cof;

// Runs fn(0..n-1) on up to `jobs` threads. fn(i) must only write to slot i of
// its output; results are then emitted in index order, so the schedule never
// changes the produced bytes.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string hex64(std::uint64_t value) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

// Every stage records what it consumed and produced next to its main output.
void write_run_manifest(const std::string& out_path, const std::string& subcommand,
                        ojson inputs, ojson details, const std::vector<std::string>& outputs) {
  ojson manifest{{"tool", "cof-forge"},
                 {"subcommand", subcommand},
                 {"inputs", std::move(inputs)},
                 {"details", std::move(details)},
                 {"outputs", outputs}};
  write_file(out_path + ".run.json", manifest.dump(2) + "\n");
}

void require_outputs(const std::vector<std::string>& paths) {
  for (const auto& p : paths) {
    if (!std::filesystem::exists(p)) throw IoError("declared output '" + p + "' was not produced");
  }
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const std::size_t dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const std::uint64_t s = std::stoull(text);
      return {s, s};
    }
    const std::uint64_t a = std::stoull(text.substr(0, dots));
    const std::uint64_t b = std::stoull(text.substr(dots + 2));
    if (b < a) throw std::invalid_argument("range end below start");
    return {a, b};
  } catch (const std::exception&) {
    throw std::invalid_argument("--seeds expects '<n>' or '<a..b>', got '" + text + "'");
  }
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string item = text.substr(start, end - start);
    if (!item.empty()) out.push_back(item);
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

// Annotation files may mix real-video and scene records; they are told apart
// by their fields.
struct AnnotationSet {
  std::vector<SceneAnnotation> scenes;
  std::vector<VideoAnnotation> videos;
  std::vector<std::size_t> order_is_scene;  // record i: 1 = scene, 0 = video
};

AnnotationSet read_annotations(const std::string& path) {
  AnnotationSet set;
  for_each_jsonl(path, [&](const ojson& j, std::size_t line) {
    if (j.contains("captions")) {
      set.videos.push_back(video_from_json(j));
      set.order_is_scene.push_back(0);
    } else if (j.contains("frames")) {
      set.scenes.push_back(scene_from_json(j));
      set.order_is_scene.push_back(1);
    } else {
      throw DataError(path, line, "record is neither a scene nor a video annotation");
    }
  });
  return set;
}

int aligned_frame_count(const VideoAnnotation& video) {
  int k = static_cast<int>(std::llround(video.duration_s * video.fps));
  if (!video.captions.empty()) k = std::max(k, video.captions.back().frame_id);
  return std::max(k, 1);
}

std::string histogram_csv(const std::vector<std::size_t>& bins) {
  std::string csv = "refs,count\n";
  for (std::size_t bin = 0; bin < bins.size(); ++bin) {
    csv += std::string(histogram_bin_label(bin)) + "," + std::to_string(bins[bin]) + "\n";
  }
  return csv;
}

std::string report_table(const MetricReport& report) {
  std::string out;
  char line[128];
  out += "split                          score   tasks\n";
  out += "---------------------------------------------\n";
  for (const auto& [name, split] : report.splits) {
    std::snprintf(line, sizeof(line), "%-28s %7.4f %7zu\n", name.c_str(), split.score,
                  split.n_tasks);
    out += line;
  }
  out += "---------------------------------------------\n";
  std::snprintf(line, sizeof(line), "%-28s %7.4f\n", "overall", report.overall);
  out += line;
  std::snprintf(line, sizeof(line), "no_answer %zu, missing %zu of %zu tasks\n",
                report.n_no_answer, report.n_missing, report.n_tasks);
  out += line;
  return out;
}

// ---- subcommand bodies ----------------------------------------------------

struct SimulateArgs {
  std::string config_path;
  std::string seeds = "1..20";
  std::string out;
  int jobs = 1;
};

void run_simulate(const SimulateArgs& args) {
  const KeyValueConfig kv = KeyValueConfig::from_file(args.config_path);
  const SimConfig sim = sim_config_from(kv);
  sim.validate();
  const auto [seed_lo, seed_hi] = parse_seed_range(args.seeds);
  const std::size_t n = static_cast<std::size_t>(seed_hi - seed_lo + 1);

  std::vector<SceneAnnotation> scenes(n);
  parallel_for(n, args.jobs, [&](std::size_t i) {
    scenes[i] = simulate_scene(sim, seed_lo + i);
  });
  write_jsonl<SceneAnnotation>(args.out, scenes,
                               [](const SceneAnnotation& s) { return to_json(s); });

  write_run_manifest(args.out, "simulate",
                     ojson{{"config", args.config_path}},
                     ojson{{"config_hash", hex64(fnv1a64(kv.source_text()))},
                           {"seeds", ojson::array({seed_lo, seed_hi})},
                           {"scenes", n}},
                     {args.out});
  require_outputs({args.out});
}

struct AlignArgs {
  double max_duration = 30.0;
  int budget = 30;
  std::string in;
  std::string out;
  std::string report;
};

void run_align(const AlignArgs& args) {
  const AnnotationSet set = read_annotations(args.in);
  std::vector<std::string> aligned_lines;
  std::vector<std::string> dropped;

  std::size_t scene_i = 0;
  std::size_t video_i = 0;
  for (std::size_t flag : set.order_is_scene) {
    if (flag == 1) {
      const SceneAnnotation& scene = set.scenes[scene_i++];
      try {
        const auto map = build_alignment(timeline_of(scene), args.max_duration, args.budget);
        aligned_lines.push_back(to_json(remap_annotations(scene, map)).dump());
      } catch (const SpanExceeded&) {
        dropped.push_back(scene.scene_id + ",span_exceeded");
      } catch (const EmptyTimeline&) {
        dropped.push_back(scene.scene_id + ",empty_timeline");
      }
    } else {
      const VideoAnnotation& video = set.videos[video_i++];
      try {
        const auto map = build_alignment(timeline_of(video), args.max_duration, args.budget);
        aligned_lines.push_back(to_json(remap_annotations(video, map)).dump());
      } catch (const SpanExceeded&) {
        dropped.push_back(video.video_id + ",span_exceeded");
      } catch (const EmptyTimeline&) {
        dropped.push_back(video.video_id + ",empty_timeline");
      }
    }
  }

  write_lines(args.out, aligned_lines);
  write_lines(args.report, dropped);
  write_run_manifest(args.out, "align",
                     ojson{{"annotations", args.in}},
                     ojson{{"max_duration_s", args.max_duration},
                           {"frame_budget", args.budget},
                           {"aligned", aligned_lines.size()},
                           {"dropped", dropped.size()}},
                     {args.out, args.report});
  require_outputs({args.out, args.report});
}

struct SynthArgs {
  std::string scenes;
  std::string plan_path;
  std::uint64_t seed = 1;
  std::string out;
};

void run_synth(const SynthArgs& args) {
  const KeyValueConfig kv = KeyValueConfig::from_file(args.plan_path);
  const GenerationPlan plan = plan_from(kv);
  const auto scenes =
      read_jsonl<SceneAnnotation>(args.scenes, [](const ojson& j) { return scene_from_json(j); });

  const SynthBatch batch = synth_batch(scenes, plan, args.seed);
  write_dataset(batch.samples, args.out);
  std::vector<std::string> skip_lines;
  for (const auto& skip : batch.skips) {
    skip_lines.push_back(ojson{{"scene_id", skip.scene_id},
                               {"category", skip.category},
                               {"detail", skip.detail},
                               {"reason", skip.reason}}
                             .dump());
  }
  const std::string skips_path = args.out + ".skips.jsonl";
  write_lines(skips_path, skip_lines);

  write_run_manifest(args.out, "synth",
                     ojson{{"scenes", args.scenes}, {"plan", args.plan_path}},
                     ojson{{"config_hash", hex64(fnv1a64(kv.source_text()))},
                           {"seed", args.seed},
                           {"samples", batch.samples.size()},
                           {"skips", batch.skips.size()}},
                     {args.out, skips_path});
  require_outputs({args.out});
}

struct RealGenArgs {
  std::string annotations;
  std::string client = "replay";
  std::string fixtures;
  std::string model = "llama-3.1-8b-instruct";
  int max_new_tokens = 1024;
  double temperature = 0.7;
  int jobs = 4;
  std::string out;
  std::string rejects;
};

struct RealGenCounts {
  std::size_t samples = 0;
  std::size_t rejects = 0;
};

RealGenCounts run_real_branch(const std::vector<VideoAnnotation>& videos, GenerationClient& client,
                              int max_new_tokens, double temperature, int jobs,
                              const std::string& out_path, const std::string& rejects_path) {
  struct PerVideo {
    std::vector<CofSample> samples;
    std::vector<std::string> reject_lines;
  };
  std::vector<PerVideo> results(videos.size());

  parallel_for(videos.size(), jobs, [&](std::size_t i) {
    const VideoAnnotation& video = videos[i];
    GenerationRequest request{video.video_id, build_prompt(video), max_new_tokens, temperature};
    const GenerationResponse response = client.complete(request);
    const ParseOutcome parsed = parse_generation(response.text);
    auto& slot = results[i];
    for (const auto& reject : parsed.rejects) {
      slot.reject_lines.push_back(ojson{{"video_id", video.video_id},
                                        {"stage", "parse"},
                                        {"index", reject.index},
                                        {"reason", reject.reason}}
                                      .dump());
    }
    RealSampleBatch batch =
        to_cof_samples(video.video_id, parsed.triplets, aligned_frame_count(video));
    for (const auto& reject : batch.rejects) {
      slot.reject_lines.push_back(ojson{{"video_id", video.video_id},
                                        {"stage", "sample"},
                                        {"reason", reject.reason},
                                        {"sample", to_json(reject.sample)}}
                                      .dump());
    }
    slot.samples = std::move(batch.samples);
  });

  std::vector<CofSample> samples;
  std::vector<std::string> reject_lines;
  for (auto& r : results) {
    for (auto& s : r.samples) samples.push_back(std::move(s));
    for (auto& line : r.reject_lines) reject_lines.push_back(std::move(line));
  }
  write_dataset(samples, out_path);
  write_lines(rejects_path, reject_lines);
  return {samples.size(), reject_lines.size()};
}

void run_real_gen(const RealGenArgs& args) {
  const auto videos =
      read_jsonl<VideoAnnotation>(args.annotations, [](const ojson& j) { return video_from_json(j); });

  std::unique_ptr<GenerationClient> client;
  if (args.client == "replay") {
    if (args.fixtures.empty()) throw std::invalid_argument("--client replay needs --fixtures");
    client = std::make_unique<ReplayClient>(ReplayClient::from_file(args.fixtures));
  } else if (args.client == "remote") {
    client = std::make_unique<RemoteClient>(RemoteConfig::from_env(args.model));
  } else {
    throw std::invalid_argument("--client must be 'replay' or 'remote'");
  }

  const RealGenCounts counts = run_real_branch(videos, *client, args.max_new_tokens,
                                               args.temperature, args.jobs, args.out, args.rejects);
  write_run_manifest(args.out, "real-gen",
                     ojson{{"annotations", args.annotations},
                           {"client", args.client},
                           {"fixtures", args.fixtures}},
                     ojson{{"model", args.model},
                           {"videos", videos.size()},
                           {"samples", counts.samples},
                           {"rejects", counts.rejects}},
                     {args.out, args.rejects});
  require_outputs({args.out, args.rejects});
}

struct CurateArgs {
  std::string in;
  double target_zero_frac = 0.15;
  std::uint64_t seed = 1;
  int max_frames = 30;
  std::string out;
  std::string manifest_path;
  std::string rejects;
};

struct CurateCounts {
  std::size_t read = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t after_dedup = 0;
  std::size_t final_count = 0;
};

CurateCounts run_curate_stage(const std::vector<std::string>& inputs, double target_zero_frac,
                              std::uint64_t seed, int max_frames, const std::string& out_path,
                              const std::string& manifest_path, const std::string& rejects_path) {
  CurateCounts counts;
  std::vector<CofSample> accepted;
  std::vector<std::string> reject_lines;
  for (const auto& path : inputs) {
    for (auto& sample : read_dataset(path)) {
      ++counts.read;
      const Verdict verdict = validate(sample, max_frames);
      if (verdict.accepted) {
        accepted.push_back(std::move(sample));
      } else {
        reject_lines.push_back(
            ojson{{"reason", verdict.reason}, {"sample", to_json(sample)}}.dump());
      }
    }
  }
  counts.accepted = accepted.size();
  counts.rejected = reject_lines.size();

  const auto deduped = dedup(accepted);
  counts.after_dedup = deduped.size();
  const auto final_samples = rebalance(deduped, target_zero_frac, seed);
  counts.final_count = final_samples.size();

  write_dataset(final_samples, out_path);
  write_lines(rejects_path, reject_lines);

  const DatasetManifest m = manifest(final_samples);
  ojson histogram = ojson::object();
  for (std::size_t bin = 0; bin < m.histogram.size(); ++bin) {
    histogram[histogram_bin_label(bin)] = m.histogram[bin];
  }
  ojson manifest_json{{"total", m.total},
                      {"by_source", m.by_source},
                      {"by_category", m.by_category},
                      {"zero_ref_fraction", m.zero_ref_fraction},
                      {"histogram", std::move(histogram)},
                      {"processing",
                       ojson{{"read", counts.read},
                             {"rejected", counts.rejected},
                             {"after_dedup", counts.after_dedup},
                             {"rebalanced", counts.final_count}}}};
  write_file(manifest_path, manifest_json.dump(2) + "\n");
  write_file(manifest_path + ".txt", m.to_table());
  return counts;
}

void run_curate(const CurateArgs& args) {
  const auto inputs = split_csv(args.in);
  if (inputs.empty()) throw std::invalid_argument("--in expects a comma-separated file list");
  const std::string rejects_path =
      args.rejects.empty() ? args.out + ".rejects.jsonl" : args.rejects;
  const CurateCounts counts =
      run_curate_stage(inputs, args.target_zero_frac, args.seed, args.max_frames, args.out,
                       args.manifest_path, rejects_path);
  write_run_manifest(args.out, "curate",
                     ojson{{"inputs", inputs}},
                     ojson{{"target_zero_frac", args.target_zero_frac},
                           {"seed", args.seed},
                           {"max_frames", args.max_frames},
                           {"read", counts.read},
                           {"rejected", counts.rejected},
                           {"final", counts.final_count}},
                     {args.out, args.manifest_path, rejects_path});
  require_outputs({args.out, args.manifest_path, rejects_path});
}

struct TraceStatsArgs {
  std::string preds;
  std::string out;
};

void run_trace_stats(const TraceStatsArgs& args) {
  const auto predictions =
      read_jsonl<Prediction>(args.preds, [](const ojson& j) { return prediction_from_json(j); });
  const auto bins = reference_histogram(predictions);
  write_file(args.out, histogram_csv(bins));
  write_run_manifest(args.out, "trace-stats", ojson{{"predictions", args.preds}},
                     ojson{{"n_predictions", predictions.size()}}, {args.out});
  require_outputs({args.out});
}

struct EvalArgs {
  std::string tasks;
  std::string preds;
  std::string report;
};

void run_eval(const EvalArgs& args) {
  const auto tasks =
      read_jsonl<EvalTask>(args.tasks, [](const ojson& j) { return eval_task_from_json(j); });
  const auto predictions =
      read_jsonl<Prediction>(args.preds, [](const ojson& j) { return prediction_from_json(j); });
  const MetricReport report = score(tasks, predictions);

  write_file(args.report, to_json(report).dump(2) + "\n");
  const std::string table = report_table(report);
  write_file(args.report + ".txt", table);
  write_file(args.report + ".hist.csv", histogram_csv(report.histogram));
  std::cout << table;

  write_run_manifest(args.report, "eval",
                     ojson{{"tasks", args.tasks}, {"predictions", args.preds}},
                     ojson{{"n_tasks", report.n_tasks},
                           {"n_predictions", report.n_predictions},
                           {"overall", report.overall}},
                     {args.report, args.report + ".txt", args.report + ".hist.csv"});
  require_outputs({args.report});
}

struct PipelineArgs {
  std::string config_path;
  std::string out_dir;
  int jobs = 0;  // 0: take from config
};

void run_pipeline(const PipelineArgs& args) {
  const KeyValueConfig kv = KeyValueConfig::from_file(args.config_path);
  const PipelineConfig config = pipeline_config_from(kv);
  const int jobs = args.jobs > 0 ? args.jobs : config.jobs;
  std::filesystem::create_directories(args.out_dir);
  const auto path = [&](const std::string& name) {
    return (std::filesystem::path(args.out_dir) / name).string();
  };

  // Synthetic branch: simulate, align, generate.
  std::vector<SceneAnnotation> scenes(static_cast<std::size_t>(config.scenes));
  parallel_for(scenes.size(), jobs, [&](std::size_t i) {
    scenes[i] = simulate_scene(config.sim, config.seed + i);
  });
  write_jsonl<SceneAnnotation>(path("scenes.jsonl"), scenes,
                               [](const SceneAnnotation& s) { return to_json(s); });

  std::vector<SceneAnnotation> aligned_scenes;
  std::vector<std::string> dropped;
  for (const auto& scene : scenes) {
    try {
      const auto map = build_alignment(timeline_of(scene), config.max_duration_s, config.frame_budget);
      aligned_scenes.push_back(remap_annotations(scene, map));
    } catch (const SpanExceeded&) {
      dropped.push_back(scene.scene_id + ",span_exceeded");
    }
  }
  write_jsonl<SceneAnnotation>(path("scenes_aligned.jsonl"), aligned_scenes,
                               [](const SceneAnnotation& s) { return to_json(s); });

  const SynthBatch batch = synth_batch(aligned_scenes, config.plan, config.seed);
  write_dataset(batch.samples, path("synth_samples.jsonl"));

  // Real branch, replay by default so the whole run stays offline.
  std::vector<std::string> curate_inputs = {path("synth_samples.jsonl")};
  std::size_t real_sample_count = 0;
  if (!config.real_annotations.empty()) {
    const auto videos = read_jsonl<VideoAnnotation>(
        config.real_annotations, [](const ojson& j) { return video_from_json(j); });
    std::vector<VideoAnnotation> aligned_videos;
    for (const auto& video : videos) {
      try {
        const auto map = build_alignment(timeline_of(video), config.max_duration_s, config.frame_budget);
        aligned_videos.push_back(remap_annotations(video, map));
      } catch (const SpanExceeded&) {
        dropped.push_back(video.video_id + ",span_exceeded");
      }
    }
    write_jsonl<VideoAnnotation>(path("real_aligned.jsonl"), aligned_videos,
                                 [](const VideoAnnotation& v) { return to_json(v); });

    std::unique_ptr<GenerationClient> client;
    if (config.real_client == "replay") {
      client = std::make_unique<ReplayClient>(ReplayClient::from_file(config.real_fixtures));
    } else {
      client = std::make_unique<RemoteClient>(RemoteConfig::from_env(config.real_model));
    }
    const RealGenCounts counts =
        run_real_branch(aligned_videos, *client, config.real_max_new_tokens,
                        config.real_temperature, jobs, path("real_samples.jsonl"),
                        path("real_rejects.jsonl"));
    real_sample_count = counts.samples;
    curate_inputs.push_back(path("real_samples.jsonl"));
  }
  write_lines(path("aligned_dropped.txt"), dropped);

  const CurateCounts counts = run_curate_stage(
      curate_inputs, config.target_zero_ref_fraction, config.seed, config.frame_budget,
      path("dataset.jsonl"), path("manifest.json"), path("dataset.rejects.jsonl"));

  const DatasetManifest final_manifest = manifest(read_dataset(path("dataset.jsonl")));
  write_file(path("dataset_stats.csv"), histogram_csv(final_manifest.histogram));

  write_run_manifest(path("pipeline"), "pipeline",
                     ojson{{"config", args.config_path}},
                     ojson{{"config_hash", hex64(fnv1a64(kv.source_text()))},
                           {"seed", config.seed},
                           {"scenes", scenes.size()},
                           {"synth_samples", batch.samples.size()},
                           {"real_samples", real_sample_count},
                           {"dataset", counts.final_count}},
                     {path("dataset.jsonl"), path("manifest.json"), path("dataset_stats.csv")});
  require_outputs({path("dataset.jsonl"), path("manifest.json"), path("dataset_stats.csv")});
  std::cout << "pipeline: " << counts.final_count << " samples at " << path("dataset.jsonl")
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cof-forge: frame-grounded reasoning dataset toolkit"};
  app.require_subcommand(1);

  SimulateArgs simulate_args;
  auto* simulate = app.add_subcommand("simulate", "generate synthetic scene annotations");
  simulate->add_option("--config", simulate_args.config_path, "simulator config file")->required();
  simulate->add_option("--seeds", simulate_args.seeds, "seed or inclusive range a..b");
  simulate->add_option("--out", simulate_args.out, "output scene JSONL")->required();
  simulate->add_option("--jobs", simulate_args.jobs, "worker threads");

  AlignArgs align_args;
  auto* align = app.add_subcommand("align", "clip, downsample and re-index frame ids");
  align->add_option("--max-duration", align_args.max_duration, "window limit in seconds");
  align->add_option("--budget", align_args.budget, "frame budget");
  align->add_option("--in", align_args.in, "annotations JSONL")->required();
  align->add_option("--out", align_args.out, "aligned annotations JSONL")->required();
  align->add_option("--report", align_args.report, "dropped (id,reason) list")->required();

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate template samples from scenes");
  synth->add_option("--scenes", synth_args.scenes, "aligned scene JSONL")->required();
  synth->add_option("--plan", synth_args.plan_path, "generation plan config")->required();
  synth->add_option("--seed", synth_args.seed, "batch seed");
  synth->add_option("--out", synth_args.out, "output samples JSONL")->required();

  RealGenArgs real_args;
  auto* real_gen = app.add_subcommand("real-gen", "generate samples from captioned videos");
  real_gen->add_option("--annotations", real_args.annotations, "aligned video JSONL")->required();
  real_gen->add_option("--client", real_args.client, "replay or remote");
  real_gen->add_option("--fixtures", real_args.fixtures, "replay fixture JSONL");
  real_gen->add_option("--model", real_args.model, "remote model name");
  real_gen->add_option("--max-new-tokens", real_args.max_new_tokens, "generation length cap");
  real_gen->add_option("--temperature", real_args.temperature, "sampling temperature");
  real_gen->add_option("--jobs", real_args.jobs, "concurrent requests");
  real_gen->add_option("--out", real_args.out, "output samples JSONL")->required();
  real_gen->add_option("--rejects", real_args.rejects, "reject stream JSONL")->required();

  CurateArgs curate_args;
  auto* curate = app.add_subcommand("curate", "filter, dedup and rebalance samples");
  curate->add_option("--in", curate_args.in, "comma-separated sample files")->required();
  curate->add_option("--target-zero-frac", curate_args.target_zero_frac,
                     "zero-reference share to keep");
  curate->add_option("--seed", curate_args.seed, "subsampling seed");
  curate->add_option("--max-frames", curate_args.max_frames, "frame count K for validation");
  curate->add_option("--out", curate_args.out, "curated dataset JSONL")->required();
  curate->add_option("--manifest", curate_args.manifest_path, "manifest JSON path")->required();
  curate->add_option("--rejects", curate_args.rejects, "reject stream JSONL");

  TraceStatsArgs stats_args;
  auto* trace_stats = app.add_subcommand("trace-stats", "frame-reference histogram of predictions");
  trace_stats->add_option("--preds", stats_args.preds, "predictions JSONL")->required();
  trace_stats->add_option("--out", stats_args.out, "histogram CSV")->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "score predictions against tasks");
  eval->add_option("--tasks", eval_args.tasks, "task JSONL")->required();
  eval->add_option("--preds", eval_args.preds, "predictions JSONL")->required();
  eval->add_option("--report", eval_args.report, "report JSON path")->required();

  PipelineArgs pipeline_args;
  auto* pipeline = app.add_subcommand("pipeline", "run the full generation pipeline");
  pipeline->add_option("--config", pipeline_args.config_path, "pipeline config file")->required();
  pipeline->add_option("--out-dir", pipeline_args.out_dir, "output directory")->required();
  pipeline->add_option("--jobs", pipeline_args.jobs, "worker threads (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (simulate->parsed()) run_simulate(simulate_args);
    if (align->parsed()) run_align(align_args);
    if (synth->parsed()) run_synth(synth_args);
    if (real_gen->parsed()) run_real_gen(real_args);
    if (curate->parsed()) run_curate(curate_args);
    if (trace_stats->parsed()) run_trace_stats(stats_args);
    if (eval->parsed()) run_eval(eval_args);
    if (pipeline->parsed()) run_pipeline(pipeline_args);
  } catch (const std::exception& e) {
    std::cerr << "cof-forge: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
