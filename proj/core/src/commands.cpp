#include "vispr/commands.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "vispr/errors.hpp"
#include "vispr/metrics.hpp"
#include "vispr/runlog.hpp"

namespace vispr {

namespace {

using nlohmann::json;

std::string fixed4(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << v;
  return out.str();
}

void require_corpus(const Runtime& rt) {
  if (!rt.corpus) {
    throw ConfigError("corpus: none available (set corpus_dir or use the simulated backend)");
  }
}

std::vector<QAItem> pick_items(const Runtime& rt, std::size_t limit) {
  std::vector<QAItem> items = rt.corpus->items;
  if (limit > 0 && limit < items.size()) items.resize(limit);
  return items;
}

void append_records(const Config& config, const std::vector<RunRecord>& records) {
  if (!config.run_log.empty()) append_run_log(config.run_log, records);
}

CommandResult fail(const std::string& message) { return CommandResult{1, "error: " + message + "\n"}; }

}  // namespace

std::string render_record_text(const RunRecord& record) {
  std::ostringstream out;
  out << "answer: " << (record.final_answer.empty() ? "(none)" : record.final_answer) << "\n";
  out << "path: " << to_string(record.decision.path) << "\n";
  out << "confidence: "
      << (record.final_confidence ? fixed4(record.final_confidence->value()) : "n/a") << "\n";
  out << "theta: " << fixed4(record.decision.theta) << "\n";
  if (record.fast) {
    out << "fast: " << record.fast->choice << " (confidence "
        << fixed4(record.fast->confidence.value()) << ")\n";
  }
  if (record.slow) {
    out << "trace:\n";
    for (const auto& event : record.slow->base_result.trace) {
      out << "  [" << event.step_index << "] " << event.module << "(";
      bool first = true;
      for (const auto& [name, value] : event.resolved_args) {
        if (!first) out << ", ";
        first = false;
        out << name << "=" << value;
      }
      out << ") -> " << event.output_summary << "\n";
    }
    out << "search: " << record.slow->run_count << " variant runs\n";
    if (record.slow->selected.binding) {
      out << "selected: " << record.slow->selected.binding->param_name << "="
          << record.slow->selected.binding->value.render() << "\n";
    }
  }
  return out.str();
}

CommandResult cmd_gen_corpus(const Config& config, const std::filesystem::path& out_dir) {
  try {
    Corpus corpus = generate_corpus(config.seed, config.generation);
    save_corpus(corpus, out_dir);
    std::map<std::string, int> by_construction;
    for (const auto& item : corpus.items) ++by_construction[to_string(item.construction)];
    std::ostringstream out;
    out << "corpus: " << corpus.videos.size() << " videos, " << corpus.items.size()
        << " items -> " << out_dir.string() << "\n";
    for (const auto& [name, count] : by_construction) {
      out << "  " << name << ": " << count << "\n";
    }
    return CommandResult{0, out.str()};
  } catch (const Error& e) {
    return fail(e.what());
  }
}

CommandResult cmd_run(const Config& config, const std::string& video_ref,
                      const std::string& question, const std::vector<std::string>& choices,
                      const std::string& query_id) {
  try {
    Runtime rt = make_runtime(config);
    RunRecord record = answer_query(video_ref, question, choices, *rt.planner, rt.backend,
                                    rt.registry, controller_config_from(config), query_id);
    append_records(config, {record});
    return CommandResult{0, render_record_text(record)};
  } catch (const PlannerError& e) {
    return CommandResult{2, std::string("error: ") + e.what() + "\n"};
  } catch (const Error& e) {
    return fail(e.what());
  }
}

CommandResult cmd_eval(const Config& config, EvalMode mode, std::size_t limit,
                       const std::optional<std::filesystem::path>& report_out) {
  try {
    Runtime rt = make_runtime(config);
    require_corpus(rt);
    EvalRun run = evaluate(pick_items(rt, limit), *rt.planner, rt.backend, rt.registry,
                           controller_config_from(config), mode, config.parallelism);
    append_records(config, run.records);
    if (report_out) write_report(*report_out, run.report);
    return CommandResult{0, render_report_text(run.report)};
  } catch (const Error& e) {
    return fail(e.what());
  }
}

CommandResult cmd_sweep_theta(const Config& config, const std::vector<double>& thetas,
                              std::size_t limit,
                              const std::optional<std::filesystem::path>& out_dir) {
  if (thetas.empty()) return fail("sweep requires at least one theta");
  for (double theta : thetas) {
    if (!(theta > 0.0 && theta < 1.0)) {
      return fail("theta " + fixed4(theta) + " outside (0,1)");
    }
  }
  try {
    Runtime rt = make_runtime(config);
    require_corpus(rt);
    const std::vector<QAItem> items = pick_items(rt, limit);
    std::ostringstream out;
    out << "theta    accuracy  fast_share  mean_output_len\n";
    for (double theta : thetas) {
      ControllerConfig cc = controller_config_from(config);
      cc.theta = theta;
      EvalRun run = evaluate(items, *rt.planner, rt.backend, rt.registry, cc, EvalMode::Adaptive,
                             config.parallelism);
      append_records(config, run.records);
      if (out_dir) {
        std::ostringstream name;
        name << "report_theta_" << std::fixed << std::setprecision(2) << theta << ".json";
        write_report(*out_dir / name.str(), run.report);
      }
      const auto& r = run.report;
      const double fast_share =
          r.overall.samples ? static_cast<double>(r.fast.samples) / r.overall.samples : 0.0;
      out << fixed4(theta) << "   " << fixed4(r.overall.accuracy()) << "    " << fixed4(fast_share)
          << "      " << std::fixed << std::setprecision(1) << r.overall.mean_output_length()
          << "\n";
    }
    return CommandResult{0, out.str()};
  } catch (const Error& e) {
    return fail(e.what());
  }
}

CommandResult cmd_build_dataset(const Config& config, const DatasetOptions& options,
                                const std::filesystem::path& out,
                                const std::optional<std::filesystem::path>& frequency_out,
                                std::size_t limit) {
  try {
    Runtime rt = make_runtime(config);
    require_corpus(rt);
    DatasetBuild build =
        build_dataset(pick_items(rt, limit), *rt.planner, rt.backend, rt.registry, options);
    save_dataset(out, build.records);
    if (frequency_out) save_frequency_report(*frequency_out, build.report);
    const auto failing = reverify_dataset(build.records, rt.backend, rt.registry);
    int easy = 0;
    for (const auto& r : build.records) {
      if (r.difficulty == DifficultyLabel::Easy) ++easy;
    }
    std::ostringstream text;
    text << "dataset: " << build.records.size() << " records (" << easy << " easy, "
         << build.records.size() - easy << " difficult) -> " << out.string() << "\n";
    text << "skipped: " << build.skipped.size() << "\n";
    text << "rewrites: " << build.report.rewrites_added << " added / "
         << build.report.rewrites_attempted << " attempted\n";
    text << "deficits: " << build.report.deficits.size() << "\n";
    text << "reverify: " << (failing.empty() ? "all records pass" : "FAILURES") << "\n";
    return CommandResult{failing.empty() ? 0 : 1, text.str()};
  } catch (const Error& e) {
    return fail(e.what());
  }
}

CommandResult cmd_replay(const Config&, const std::filesystem::path& log_path,
                         const std::filesystem::path& report_path) {
  try {
    const EvalReport stored = load_report(report_path);
    const std::vector<RunRecord> records = load_run_log(log_path);
    const EvalReport recomputed = compute_report(records, stored.theta, stored.mode);
    const json a = to_json(stored);
    const json b = to_json(recomputed);
    std::ostringstream out;
    if (a == b) {
      out << "replay: " << records.size() << " records, report matches exactly\n";
      return CommandResult{0, out.str()};
    }
    out << "replay: MISMATCH over " << records.size() << " records\n";
    out << json::diff(a, b).dump(2) << "\n";
    return CommandResult{1, out.str()};
  } catch (const Error& e) {
    return fail(e.what());
  }
}

CommandResult cmd_registry(const Config& config) {
  try {
    Registry registry = Registry::builtin();
    if (config.registry_file) {
      std::ifstream in(*config.registry_file);
      if (!in) throw ConfigError("registry_file: cannot open " + config.registry_file->string());
      json j;
      in >> j;
      registry = Registry::from_json(j);
    }
    return CommandResult{0, registry.to_json().dump(2) + "\n"};
  } catch (const Error& e) {
    return fail(e.what());
  }
}

}  // namespace vispr
