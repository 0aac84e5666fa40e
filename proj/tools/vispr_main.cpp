#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "vispr/commands.hpp"
#include "vispr/errors.hpp"
#include "vispr/remote.hpp"
#include "vispr/service.hpp"

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop.store(true); }

void wait_for_signal() {
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_stop.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string current;
  for (char c : s) {
    if (c == ',') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

int emit(const vispr::CommandResult& result) {
  std::cout << result.output;
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vispr — adaptive fast/slow visual program reasoning over long videos"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  std::string config_path;
  double theta = 0.0;
  std::string search_spec;
  std::string backend_mode;
  std::uint64_t seed = 0;
  int parallelism = 0;
  app.add_option("--config", config_path, "JSON config file");
  auto* theta_opt = app.add_option("--theta", theta, "confidence gate threshold, in (0,1)");
  auto* search_opt = app.add_option(
      "--search", search_spec, "comma-separated searchable params to enable ('none' disables)");
  auto* backend_opt = app.add_option("--backend", backend_mode, "simulated|remote");
  auto* seed_opt = app.add_option("--seed", seed, "corpus / world seed");
  auto* par_opt = app.add_option("--parallelism", parallelism, "worker count for batch commands");

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus");
  std::string gen_out;
  int gen_videos = 0, gen_qa = 0;
  double gen_dur_min = 0.0, gen_dur_max = 0.0, gen_easy = -1.0;
  gen->add_option("--out", gen_out, "output directory")->required();
  auto* gv = gen->add_option("--videos", gen_videos, "number of videos");
  auto* gq = gen->add_option("--qa-per-video", gen_qa, "questions per video");
  auto* gdmin = gen->add_option("--duration-min", gen_dur_min, "min duration (s)");
  auto* gdmax = gen->add_option("--duration-max", gen_dur_max, "max duration (s)");
  auto* ge = gen->add_option("--easy-fraction", gen_easy, "fraction of easy items");

  // run
  auto* run = app.add_subcommand("run", "answer a single question");
  std::string run_video, run_question, run_id;
  std::vector<std::string> run_choices;
  run->add_option("--video", run_video, "video reference")->required();
  run->add_option("--question", run_question, "question text")->required();
  run->add_option("--choice", run_choices, "answer choice (repeatable)");
  run->add_option("--id", run_id, "query id (enables corpus lookup by id)");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate over the configured corpus");
  std::string eval_mode = "adaptive";
  std::size_t eval_limit = 0;
  std::string eval_report;
  eval->add_option("--mode", eval_mode, "adaptive|fast_only|slow_only");
  eval->add_option("--limit", eval_limit, "max items (0 = all)");
  eval->add_option("--report-out", eval_report, "write EvalReport JSON here");

  // sweep-theta
  auto* sweep = app.add_subcommand("sweep-theta", "evaluate across gate thresholds");
  std::vector<double> sweep_thetas;
  std::size_t sweep_limit = 0;
  std::string sweep_out;
  sweep->add_option("--thetas", sweep_thetas, "thresholds to sweep")->required()->expected(-1);
  sweep->add_option("--limit", sweep_limit, "max items (0 = all)");
  sweep->add_option("--out-dir", sweep_out, "write per-theta reports here");

  // build-dataset
  auto* build = app.add_subcommand("build-dataset", "build a training dataset");
  std::string build_out, build_freq;
  vispr::DatasetOptions build_options;
  std::size_t build_limit = 0;
  build->add_option("--out", build_out, "dataset JSONL path")->required();
  build->add_option("--freq-out", build_freq, "module frequency report path");
  auto* tau_opt = build->add_option("--tau", build_options.tau, "difficulty labelling threshold");
  build->add_option("--attempts", build_options.attempts, "planner samples per item");
  build->add_option("--min-count", build_options.min_count, "per-module target count");
  build->add_option("--budget", build_options.budget, "rewrite budget (0 = none)");
  build->add_flag("--variants", build_options.retain_param_variants,
                  "retain verified one-parameter variants");
  build->add_option("--combo-cap", build_options.combo_cap,
                    "max records per module combination (0 = unlimited)");
  build->add_option("--max-records", build_options.max_records, "dataset cap (0 = unlimited)");
  build->add_option("--limit", build_limit, "max items (0 = all)");

  // replay
  auto* replay = app.add_subcommand("replay", "recompute a report from a run log");
  std::string replay_log, replay_report;
  replay->add_option("--log", replay_log, "run log (JSONL)")->required();
  replay->add_option("--report", replay_report, "report JSON to check")->required();

  // registry
  auto* registry = app.add_subcommand("registry", "print the module registry as JSON");

  // serve / serve-backend / serve-planner
  auto* serve = app.add_subcommand("serve", "run the answer/eval HTTP service");
  std::string serve_host = "127.0.0.1";
  int serve_port = -1;
  serve->add_option("--host", serve_host, "bind host");
  serve->add_option("--port", serve_port, "bind port (overrides config)");

  auto* serve_backend = app.add_subcommand("serve-backend", "expose the backend over HTTP");
  std::string sb_host = "127.0.0.1";
  int sb_port = 8901;
  serve_backend->add_option("--host", sb_host, "bind host");
  serve_backend->add_option("--port", sb_port, "bind port");

  auto* serve_planner = app.add_subcommand("serve-planner", "expose the planner over HTTP");
  std::string sp_host = "127.0.0.1";
  int sp_port = 8902;
  serve_planner->add_option("--host", sp_host, "bind host");
  serve_planner->add_option("--port", sp_port, "bind port");

  CLI11_PARSE(app, argc, argv);

  vispr::Config config;
  try {
    if (!config_path.empty()) config = vispr::load_config(config_path);
    if (theta_opt->count()) config.theta = theta;
    if (search_opt->count()) {
      if (search_spec == "none" || search_spec == "off") {
        config.search.enabled_params.clear();
      } else {
        config.search.enabled_params = split_csv(search_spec);
      }
    }
    if (backend_opt->count()) {
      auto mode = vispr::backend_mode_from_string(backend_mode);
      if (!mode) {
        std::cout << "error: backend must be 'simulated' or 'remote'\n";
        return 1;
      }
      config.backend_mode = *mode;
    }
    if (seed_opt->count()) config.seed = seed;
    if (par_opt->count()) config.parallelism = parallelism;
    config.validate();
  } catch (const vispr::Error& e) {
    std::cout << "error: " << e.what() << "\n";
    return 1;
  }

  if (gen->parsed()) {
    if (gv->count()) config.generation.n_videos = gen_videos;
    if (gq->count()) config.generation.qa_per_video = gen_qa;
    if (gdmin->count()) config.generation.duration_range.first = gen_dur_min;
    if (gdmax->count()) config.generation.duration_range.second = gen_dur_max;
    if (ge->count()) config.generation.easy_fraction = gen_easy;
    return emit(vispr::cmd_gen_corpus(config, gen_out));
  }
  if (run->parsed()) {
    return emit(vispr::cmd_run(config, run_video, run_question, run_choices, run_id));
  }
  if (eval->parsed()) {
    auto mode = vispr::eval_mode_from_string(eval_mode);
    if (!mode) {
      std::cout << "error: mode must be adaptive|fast_only|slow_only\n";
      return 1;
    }
    std::optional<std::filesystem::path> report_out;
    if (!eval_report.empty()) report_out = eval_report;
    return emit(vispr::cmd_eval(config, *mode, eval_limit, report_out));
  }
  if (sweep->parsed()) {
    std::optional<std::filesystem::path> out_dir;
    if (!sweep_out.empty()) out_dir = sweep_out;
    return emit(vispr::cmd_sweep_theta(config, sweep_thetas, sweep_limit, out_dir));
  }
  if (build->parsed()) {
    if (!tau_opt->count()) build_options.tau = config.tau;
    std::optional<std::filesystem::path> freq_out;
    if (!build_freq.empty()) freq_out = build_freq;
    return emit(vispr::cmd_build_dataset(config, build_options, build_out, freq_out, build_limit));
  }
  if (replay->parsed()) {
    return emit(vispr::cmd_replay(config, replay_log, replay_report));
  }
  if (registry->parsed()) {
    return emit(vispr::cmd_registry(config));
  }
  if (serve->parsed()) {
    try {
      if (serve_port >= 0) config.service_port = serve_port;
      vispr::Runtime rt = vispr::make_runtime(config);
      vispr::EngineService service(config, std::move(rt), serve_host);
      service.start();
      std::cout << "engine service listening on " << serve_host << ":" << service.port() << "\n";
      wait_for_signal();
      service.stop();
      std::cout << "engine service stopped\n";
      return 0;
    } catch (const vispr::Error& e) {
      std::cout << "error: " << e.what() << "\n";
      return 1;
    }
  }
  if (serve_backend->parsed()) {
    try {
      vispr::Runtime rt = vispr::make_runtime(config);
      vispr::BackendService service(rt.backend, sb_host, sb_port);
      service.start();
      std::cout << "backend service listening on " << sb_host << ":" << service.port() << "\n";
      wait_for_signal();
      service.stop();
      std::cout << "backend service stopped\n";
      return 0;
    } catch (const vispr::Error& e) {
      std::cout << "error: " << e.what() << "\n";
      return 1;
    }
  }
  if (serve_planner->parsed()) {
    try {
      vispr::Runtime rt = vispr::make_runtime(config);
      vispr::PlannerService service(rt.planner, sp_host, sp_port);
      service.start();
      std::cout << "planner service listening on " << sp_host << ":" << service.port() << "\n";
      wait_for_signal();
      service.stop();
      std::cout << "planner service stopped\n";
      return 0;
    } catch (const vispr::Error& e) {
      std::cout << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 0;
}
