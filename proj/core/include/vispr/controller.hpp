#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vispr/confidence.hpp"
#include "vispr/planner.hpp"
#include "vispr/search.hpp"
#include "vispr/world.hpp"

namespace vispr {

enum class RoutePath { Fast, FastThenSlow, Slow, SlowFallbackFast };

const char* to_string(RoutePath p);
std::optional<RoutePath> route_path_from_string(const std::string& s);

struct RoutingDecision {
  RoutePath path = RoutePath::Fast;
  std::optional<Confidence> fast_confidence;
  double theta = 0.75;
};

struct RunRecord {
  std::string query_id;
  std::string video_ref;
  std::string question;
  std::vector<std::string> choices;
  RoutingDecision decision;
  std::string planner_output;  // first-stage completion plus any continuation
  std::optional<McAnswer> fast;
  std::optional<SearchOutcome> slow;
  std::string final_answer;
  std::optional<Confidence> final_confidence;
  std::size_t output_length = 0;
  double wall_time_ms = 0.0;
  // Evaluation context, present when the query came from a labelled item.
  std::optional<std::string> gold_answer;
  std::optional<DurationBucket> duration_bucket;

  bool correct() const { return gold_answer && answers_match(final_answer, *gold_answer); }
};

struct ControllerConfig {
  double theta = 0.75;
  SearchConfig search;
  ExecOptions exec;
  std::string stop = "return answer";
};

// One adaptive fast–slow pass: planner completion with the stop sequence, the
// confidence gate when the fast marker is present, continuation + parameter
// search on the slow path, and fallback to the fast answer when parsing or
// every slow execution fails.  Throws PlannerError only when the planner is
// unreachable and no fast answer can be obtained.
RunRecord answer_query(const std::string& video_ref, const std::string& query,
                       const std::vector<std::string>& choices, PlannerBackend& planner,
                       const std::shared_ptr<Backend>& backend, const Registry& registry,
                       const ControllerConfig& config, const std::string& query_id = "");

enum class EvalMode { Adaptive, FastOnly, SlowOnly };

const char* to_string(EvalMode m);
std::optional<EvalMode> eval_mode_from_string(const std::string& s);

struct BucketStats {
  int samples = 0;
  int correct = 0;

  double accuracy() const { return samples ? static_cast<double>(correct) / samples : 0.0; }
};

struct PathStats {
  int samples = 0;
  int correct = 0;
  double output_length_sum = 0.0;
  std::array<BucketStats, 3> buckets{};  // indexed by DurationBucket

  double accuracy() const { return samples ? static_cast<double>(correct) / samples : 0.0; }
  double mean_output_length() const { return samples ? output_length_sum / samples : 0.0; }
};

struct EvalReport {
  double theta = 0.75;
  EvalMode mode = EvalMode::Adaptive;
  PathStats fast;     // queries answered by the gate (path=fast)
  PathStats slow;     // everything routed through the slow stage
  PathStats overall;
  std::map<std::string, int> path_counts;  // all four route paths
  // Fast-answer confidence separation; absent when the run yields no labelled
  // fast answers of both classes (e.g. the slow-only baseline).
  std::optional<GapReport> gap;
  std::vector<ThresholdPoint> curve;  // fast-answer selective accuracy
};

// Pure aggregation over finished records; replaying a run log through this
// must reproduce the emitted report exactly.
EvalReport compute_report(const std::vector<RunRecord>& records, double theta, EvalMode mode);

struct EvalRun {
  EvalReport report;
  std::vector<RunRecord> records;
};

// Runs every item through answer_query (or the pure fast/slow baselines) and
// aggregates.  Items are independent; `parallelism` bounds concurrent items.
EvalRun evaluate(const std::vector<QAItem>& items, PlannerBackend& planner,
                 const std::shared_ptr<Backend>& backend, const Registry& registry,
                 const ControllerConfig& config, EvalMode mode = EvalMode::Adaptive,
                 int parallelism = 1);

}  // namespace vispr
