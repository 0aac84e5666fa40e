#include "vispr/controller.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "vispr/errors.hpp"
#include "vispr/modules.hpp"
#include "vispr/program.hpp"

namespace vispr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr double kCurveThresholds[] = {0.4, 0.5, 0.6, 0.7, 0.75, 0.8, 0.9, 0.95};

void finalize_from_fast(RunRecord& rec, const McAnswer& fast, RoutePath path) {
  rec.decision.path = path;
  rec.decision.fast_confidence = fast.confidence;
  rec.fast = fast;
  rec.final_answer = fast.choice;
  rec.final_confidence = fast.confidence;
}

void tally(PathStats& stats, const RunRecord& rec, bool correct) {
  stats.samples += 1;
  stats.correct += correct ? 1 : 0;
  stats.output_length_sum += static_cast<double>(rec.output_length);
  if (rec.duration_bucket) {
    BucketStats& b = stats.buckets[static_cast<std::size_t>(*rec.duration_bucket)];
    b.samples += 1;
    b.correct += correct ? 1 : 0;
  }
}

}  // namespace

const char* to_string(RoutePath p) {
  switch (p) {
    case RoutePath::Fast: return "fast";
    case RoutePath::FastThenSlow: return "fast_then_slow";
    case RoutePath::Slow: return "slow";
    case RoutePath::SlowFallbackFast: return "slow_fallback_fast";
  }
  return "fast";
}

std::optional<RoutePath> route_path_from_string(const std::string& s) {
  for (RoutePath p : {RoutePath::Fast, RoutePath::FastThenSlow, RoutePath::Slow,
                      RoutePath::SlowFallbackFast}) {
    if (s == to_string(p)) return p;
  }
  return std::nullopt;
}

const char* to_string(EvalMode m) {
  switch (m) {
    case EvalMode::Adaptive: return "adaptive";
    case EvalMode::FastOnly: return "fast_only";
    case EvalMode::SlowOnly: return "slow_only";
  }
  return "adaptive";
}

std::optional<EvalMode> eval_mode_from_string(const std::string& s) {
  for (EvalMode m : {EvalMode::Adaptive, EvalMode::FastOnly, EvalMode::SlowOnly}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

RunRecord answer_query(const std::string& video_ref, const std::string& query,
                       const std::vector<std::string>& choices, PlannerBackend& planner,
                       const std::shared_ptr<Backend>& backend, const Registry& registry,
                       const ControllerConfig& config, const std::string& query_id) {
  if (!(config.theta > 0.0 && config.theta < 1.0)) {
    throw DomainError("answer_query: theta must be in (0, 1)");
  }
  if (config.search.parallelism < 1) {
    throw DomainError("answer_query: search parallelism must be >= 1");
  }
  auto start = Clock::now();

  RunRecord rec;
  rec.query_id = query_id;
  rec.video_ref = video_ref;
  rec.question = query;
  rec.choices = choices;
  rec.decision.theta = config.theta;

  std::optional<McAnswer> fast;
  bool fast_attempted = false;
  auto try_fast = [&]() {
    if (fast_attempted) return;
    fast_attempted = true;
    try {
      auto [conf, answer] = fast_think(*backend, video_ref, query, choices);
      fast = McAnswer{answer, conf};
    } catch (const std::exception&) {
      // Fast stage down: degrade to the slow path (or surface a hard error
      // later if slow also dies).
    }
  };

  std::string first_stage;
  bool planner_reachable = true;
  try {
    first_stage =
        planner.complete({query_id, video_ref, query, choices, config.stop, "", 0});
  } catch (const PlannerError&) {
    planner_reachable = false;
  }
  if (!planner_reachable) {
    try_fast();
    if (!fast) {
      throw PlannerError("planner unreachable and no fast answer obtainable for query '" +
                         query + "'");
    }
    finalize_from_fast(rec, *fast, RoutePath::SlowFallbackFast);
    rec.wall_time_ms = ms_since(start);
    return rec;
  }

  rec.planner_output = first_stage;
  std::string slow_text = first_stage;
  RoutePath slow_path = RoutePath::Slow;

  if (contains_fast_marker(first_stage)) {
    try_fast();
    if (fast) {
      rec.fast = fast;
      rec.decision.fast_confidence = fast->confidence;
      if (fast->confidence.value() >= config.theta) {
        rec.decision.path = RoutePath::Fast;
        rec.final_answer = fast->choice;
        rec.final_confidence = fast->confidence;
        rec.output_length = rec.planner_output.size();
        rec.wall_time_ms = ms_since(start);
        return rec;
      }
      slow_path = RoutePath::FastThenSlow;
    }
    std::string continuation;
    try {
      continuation = planner.complete({query_id, video_ref, query, choices, "", first_stage, 0});
    } catch (const PlannerError&) {
      if (!fast) {
        throw PlannerError("planner unreachable and no fast answer obtainable for query '" +
                           query + "'");
      }
      finalize_from_fast(rec, *fast, RoutePath::SlowFallbackFast);
      rec.output_length = rec.planner_output.size();
      rec.wall_time_ms = ms_since(start);
      return rec;
    }
    rec.planner_output += continuation;
    slow_text += continuation;
  }

  rec.output_length = rec.planner_output.size();

  bool slow_ok = false;
  try {
    Program program = parse(slow_text, registry);
    ExecContext ctx{video_ref, query, choices};
    rec.slow = search(program, backend, ctx, registry, config.search, config.exec);
    slow_ok = true;
  } catch (const ParseError&) {
  } catch (const ValidationError&) {
  } catch (const DomainError&) {
    // search: every pooled result failed
  }

  if (slow_ok) {
    rec.decision.path = slow_path;
    rec.final_answer = rec.slow->selected.answer;
    rec.final_confidence = rec.slow->selected.confidence;
  } else {
    try_fast();
    if (!fast) throw BackendError("slow path failed and no fast answer is obtainable");
    rec.fast = fast;
    rec.decision.path = RoutePath::SlowFallbackFast;
    if (!rec.decision.fast_confidence) rec.decision.fast_confidence = fast->confidence;
    rec.final_answer = fast->choice;
    rec.final_confidence = fast->confidence;
  }
  rec.wall_time_ms = ms_since(start);
  return rec;
}

EvalReport compute_report(const std::vector<RunRecord>& records, double theta, EvalMode mode) {
  EvalReport rep;
  rep.theta = theta;
  rep.mode = mode;
  for (RoutePath p : {RoutePath::Fast, RoutePath::FastThenSlow, RoutePath::Slow,
                      RoutePath::SlowFallbackFast}) {
    rep.path_counts[to_string(p)] = 0;
  }
  std::vector<ConfidenceRecord> fast_records;
  for (const auto& rec : records) {
    const bool correct = rec.correct();
    tally(rec.decision.path == RoutePath::Fast ? rep.fast : rep.slow, rec, correct);
    tally(rep.overall, rec, correct);
    rep.path_counts[to_string(rec.decision.path)] += 1;
    if (rec.fast && rec.gold_answer) {
      fast_records.push_back(ConfidenceRecord{
          rec.fast->confidence.value(), answers_match(rec.fast->choice, *rec.gold_answer)});
    }
  }
  const bool has_correct =
      std::any_of(fast_records.begin(), fast_records.end(), [](auto& r) { return r.correct; });
  const bool has_incorrect =
      std::any_of(fast_records.begin(), fast_records.end(), [](auto& r) { return !r.correct; });
  if (has_correct && has_incorrect) rep.gap = confidence_gap_report(fast_records);
  if (!fast_records.empty()) rep.curve = accuracy_above_threshold(fast_records, kCurveThresholds);
  return rep;
}

EvalRun evaluate(const std::vector<QAItem>& items, PlannerBackend& planner,
                 const std::shared_ptr<Backend>& backend, const Registry& registry,
                 const ControllerConfig& config, EvalMode mode, int parallelism) {
  if (items.empty()) throw DomainError("evaluate: dataset must be nonempty");
  if (parallelism < 1) throw DomainError("evaluate: parallelism must be >= 1");

  EvalRun run;
  run.records.resize(items.size());

  auto eval_one = [&](std::size_t i) {
    const QAItem& item = items[i];
    RunRecord rec;
    try {
      switch (mode) {
        case EvalMode::Adaptive:
          rec = answer_query(item.video_id, item.question, item.choices, planner, backend,
                             registry, config, item.id);
          break;
        case EvalMode::FastOnly: {
          rec.query_id = item.id;
          rec.video_ref = item.video_id;
          rec.question = item.question;
          rec.choices = item.choices;
          rec.decision.theta = config.theta;
          auto [conf, answer] = fast_think(*backend, item.video_id, item.question, item.choices);
          finalize_from_fast(rec, McAnswer{answer, conf}, RoutePath::Fast);
          break;
        }
        case EvalMode::SlowOnly: {
          rec.query_id = item.id;
          rec.video_ref = item.video_id;
          rec.question = item.question;
          rec.choices = item.choices;
          rec.decision.theta = config.theta;
          rec.decision.path = RoutePath::Slow;
          std::string text = planner.complete(
              {item.id, item.video_id, item.question, item.choices, config.stop, "", 0});
          if (contains_fast_marker(text)) {
            text += planner.complete(
                {item.id, item.video_id, item.question, item.choices, "", text, 0});
          }
          rec.planner_output = text;
          rec.output_length = text.size();
          Program program = parse(text, registry);
          ExecContext ctx{item.video_id, item.question, item.choices};
          rec.slow = search(program, backend, ctx, registry, config.search, config.exec);
          rec.final_answer = rec.slow->selected.answer;
          rec.final_confidence = rec.slow->selected.confidence;
          break;
        }
      }
    } catch (const std::exception&) {
      // Baselines have no fallback; an unanswered item scores as incorrect.
      rec.final_answer.clear();
      rec.final_confidence.reset();
    }
    rec.gold_answer = item.gold_answer;
    rec.duration_bucket = item.duration_bucket;
    run.records[i] = std::move(rec);
  };

  if (parallelism == 1 || items.size() <= 1) {
    for (std::size_t i = 0; i < items.size(); ++i) eval_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= items.size()) break;
        eval_one(i);
      }
    };
    int workers = std::min<int>(parallelism, static_cast<int>(items.size()));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  run.report = compute_report(run.records, config.theta, mode);
  return run;
}

}  // namespace vispr
