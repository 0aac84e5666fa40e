#include "vispr/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "test_util.hpp"
#include "vispr/metrics.hpp"
#include "vispr/runlog.hpp"

namespace vispr {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("vispr_commands_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Config sim_config(const fs::path& run_log) {
  Config c;
  c.generation = testutil::small_spec();
  c.seed = 7;
  c.run_log = run_log;
  return c;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  EXPECT_TRUE(in.good()) << path;
  return std::string(std::istreambuf_iterator<char>(in), {});
}

TEST(RenderRecordText, ShowsRouteConfidenceAndTrace) {
  auto corpus = testutil::small_corpus(7);
  auto backend = testutil::sim(corpus);
  Registry registry = Registry::builtin();
  ControllerConfig cc;
  cc.search.enabled_params = {"top_k"};

  const QAItem* easy = testutil::find_by_construction(*corpus, Construction::Easy);
  ASSERT_NE(easy, nullptr);
  ScriptedPlanner fast_planner;
  fast_planner.add(easy->id, SyntheticPlanner::easy_text());
  RunRecord fast_rec = answer_query(easy->video_id, easy->question, easy->choices, fast_planner,
                                    backend, registry, cc, easy->id);
  std::string fast_text = render_record_text(fast_rec);
  EXPECT_NE(fast_text.find("answer: " + easy->gold_answer), std::string::npos);
  EXPECT_NE(fast_text.find("path: fast"), std::string::npos);
  EXPECT_NE(fast_text.find("theta: 0.7500"), std::string::npos);
  EXPECT_NE(fast_text.find("fast: "), std::string::npos);
  EXPECT_EQ(fast_text.find("trace:"), std::string::npos);

  const QAItem* hard = testutil::find_by_construction(*corpus, Construction::Difficult);
  ASSERT_NE(hard, nullptr);
  ScriptedPlanner slow_planner;
  slow_planner.add(hard->id, SyntheticPlanner::difficult_text());
  RunRecord slow_rec = answer_query(hard->video_id, hard->question, hard->choices, slow_planner,
                                    backend, registry, cc, hard->id);
  ASSERT_TRUE(slow_rec.slow.has_value());
  std::string slow_text = render_record_text(slow_rec);
  EXPECT_NE(slow_text.find("path: slow"), std::string::npos);
  EXPECT_NE(slow_text.find("trace:"), std::string::npos);
  EXPECT_NE(slow_text.find("[0] get_clips("), std::string::npos);
  EXPECT_NE(slow_text.find("top_k=3"), std::string::npos);
  EXPECT_NE(slow_text.find("search: 3 variant runs"), std::string::npos);
}

TEST(CmdGenCorpus, WritesALoadableCorpus) {
  fs::path dir = temp_dir("gen");
  Config config = sim_config("");
  CommandResult res = cmd_gen_corpus(config, dir / "corpus");
  ASSERT_EQ(res.exit_code, 0) << res.output;
  EXPECT_NE(res.output.find("corpus: 6 videos, 30 items"), std::string::npos);
  EXPECT_NE(res.output.find("easy"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "corpus" / "manifest.json"));
  EXPECT_EQ(load_corpus(dir / "corpus"), generate_corpus(config.seed, config.generation));
  fs::remove_all(dir);
}

TEST(CmdRun, AnswersAndAppendsToTheRunLog) {
  fs::path dir = temp_dir("run");
  Config config = sim_config(dir / "runs.jsonl");
  Runtime rt = make_runtime(config);
  const QAItem* easy = testutil::find_by_construction(*rt.corpus, Construction::Easy);
  ASSERT_NE(easy, nullptr);

  CommandResult res = cmd_run(config, easy->video_id, easy->question, easy->choices, easy->id);
  ASSERT_EQ(res.exit_code, 0) << res.output;
  EXPECT_NE(res.output.find("answer: " + easy->gold_answer), std::string::npos);
  EXPECT_NE(res.output.find("path: fast"), std::string::npos);

  const QAItem* hard = testutil::find_by_construction(*rt.corpus, Construction::Difficult);
  ASSERT_NE(hard, nullptr);
  CommandResult slow = cmd_run(config, hard->video_id, hard->question, hard->choices, hard->id);
  ASSERT_EQ(slow.exit_code, 0) << slow.output;
  EXPECT_NE(slow.output.find("path: slow"), std::string::npos);
  EXPECT_NE(slow.output.find("trace:"), std::string::npos);

  std::vector<RunRecord> logged = load_run_log(config.run_log);
  ASSERT_EQ(logged.size(), 2u);
  EXPECT_EQ(logged[0].query_id, easy->id);
  EXPECT_EQ(logged[1].query_id, hard->id);

  CommandResult bad = cmd_run(config, "no-such-video", "q", {"A", "B"});
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_NE(bad.output.find("error:"), std::string::npos);
  fs::remove_all(dir);
}

TEST(CmdRun, UnreachablePlannerWithNoFastAnswerExitsTwo) {
  Config config = sim_config("");
  config.backend_mode = BackendMode::Remote;
  config.remote.backend_url = "http://127.0.0.1:1";
  config.remote.planner_url = "http://127.0.0.1:1";
  config.remote.timeout_s = 1.0;
  CommandResult res = cmd_run(config, "v", "q", {"A", "B"});
  EXPECT_EQ(res.exit_code, 2);
  EXPECT_NE(res.output.find("error:"), std::string::npos);
}

TEST(CmdEval, WritesReportAndLogThatReplayCleanly) {
  fs::path dir = temp_dir("eval");
  Config config = sim_config(dir / "runs.jsonl");
  fs::path report_path = dir / "report.json";

  CommandResult res = cmd_eval(config, EvalMode::Adaptive, 8, report_path);
  ASSERT_EQ(res.exit_code, 0) << res.output;
  EXPECT_NE(res.output.find("mode=adaptive"), std::string::npos);
  EXPECT_NE(res.output.find("overall"), std::string::npos);

  EvalReport stored = load_report(report_path);
  std::vector<RunRecord> records = load_run_log(config.run_log);
  EXPECT_EQ(records.size(), 8u);
  EvalReport recomputed = compute_report(records, stored.theta, stored.mode);
  EXPECT_EQ(to_json(recomputed).dump(), to_json(stored).dump());

  CommandResult replay = cmd_replay(config, config.run_log, report_path);
  EXPECT_EQ(replay.exit_code, 0) << replay.output;
  EXPECT_NE(replay.output.find("report matches exactly"), std::string::npos);

  // tampering with the log breaks the replay
  records[0].final_answer = "tampered";
  fs::path tampered = dir / "tampered.jsonl";
  append_run_log(tampered, records);
  CommandResult broken = cmd_replay(config, tampered, report_path);
  EXPECT_EQ(broken.exit_code, 1);
  EXPECT_NE(broken.output.find("MISMATCH"), std::string::npos);

  CommandResult missing = cmd_replay(config, dir / "absent.jsonl", report_path);
  EXPECT_EQ(missing.exit_code, 1);
  EXPECT_NE(missing.output.find("error:"), std::string::npos);
  fs::remove_all(dir);
}

TEST(CmdEval, RequiresACorpus) {
  Config config = sim_config("");
  config.backend_mode = BackendMode::Remote;
  config.remote.backend_url = "http://127.0.0.1:1";
  config.remote.planner_url = "http://127.0.0.1:1";
  CommandResult res = cmd_eval(config);
  EXPECT_EQ(res.exit_code, 1);
  EXPECT_NE(res.output.find("corpus"), std::string::npos);
}

TEST(CmdSweepTheta, ReportsOneRowPerThetaAndValidates) {
  fs::path dir = temp_dir("sweep");
  Config config = sim_config("");
  CommandResult res = cmd_sweep_theta(config, {0.6, 0.75}, 8, dir);
  ASSERT_EQ(res.exit_code, 0) << res.output;
  EXPECT_NE(res.output.find("theta    accuracy  fast_share"), std::string::npos);
  EXPECT_NE(res.output.find("0.6000"), std::string::npos);
  EXPECT_NE(res.output.find("0.7500"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "report_theta_0.60.json"));
  EXPECT_TRUE(fs::exists(dir / "report_theta_0.75.json"));
  EXPECT_NO_THROW(load_report(dir / "report_theta_0.60.json"));

  CommandResult bad = cmd_sweep_theta(config, {1.5});
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_NE(bad.output.find("outside (0,1)"), std::string::npos);
  CommandResult none = cmd_sweep_theta(config, {});
  EXPECT_EQ(none.exit_code, 1);
  fs::remove_all(dir);
}

TEST(CmdBuildDataset, WritesVerifiedRecordsDeterministically) {
  fs::path dir = temp_dir("dataset");
  Config config = sim_config("");
  DatasetOptions options;
  options.min_count = 1;
  options.budget = 200;

  fs::path out = dir / "train.jsonl";
  fs::path freq = dir / "freq.json";
  CommandResult res = cmd_build_dataset(config, options, out, freq, 12);
  ASSERT_EQ(res.exit_code, 0) << res.output;
  EXPECT_NE(res.output.find("reverify: all records pass"), std::string::npos);
  EXPECT_NE(res.output.find("deficits: 0"), std::string::npos);

  std::vector<TrainingRecord> records = load_dataset(out);
  EXPECT_NE(res.output.find("dataset: " + std::to_string(records.size()) + " records"),
            std::string::npos);
  EXPECT_FALSE(records.empty());

  std::ifstream freq_in(freq);
  json freq_json = json::parse(freq_in);
  EXPECT_EQ(freq_json.at("min_count"), 1);
  EXPECT_EQ(freq_json.at("counts").size(), Registry::builtin().size());

  // second run from the same config is byte-identical
  fs::path out2 = dir / "train2.jsonl";
  CommandResult res2 = cmd_build_dataset(config, options, out2, std::nullopt, 12);
  ASSERT_EQ(res2.exit_code, 0) << res2.output;
  EXPECT_EQ(slurp(out2), slurp(out));
  fs::remove_all(dir);
}

TEST(CmdRegistry, DumpsAllSeventeenModules) {
  Config config = sim_config("");
  CommandResult res = cmd_registry(config);
  ASSERT_EQ(res.exit_code, 0) << res.output;
  json dump = json::parse(res.output);
  ASSERT_TRUE(dump.contains("modules"));
  EXPECT_EQ(dump.at("modules").size(), 17u);
  std::vector<std::string> names;
  for (const auto& m : dump.at("modules")) names.push_back(m.at("name").get<std::string>());
  for (const char* expected : {"get_clips", "get_subtitles", "trim_before", "trim_after",
                               "trim_range", "query_mc", "query_yn", "run_ocr", "detect_object",
                               "get_subs_range", "get_caps_range", "get_subtitle_hint", "crop",
                               "extract_frames", "split_video", "split_event", "fast_think"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), expected), names.end()) << expected;
  }

  config.registry_file = fs::path("nonexistent-registry.json");
  CommandResult missing = cmd_registry(config);
  EXPECT_EQ(missing.exit_code, 1);
  EXPECT_NE(missing.output.find("error:"), std::string::npos);
}

}  // namespace
}  // namespace vispr
