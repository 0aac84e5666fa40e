#include "vispr/controller.hpp"

#include <memory>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vispr/errors.hpp"
#include "vispr/metrics.hpp"
#include "vispr/modules.hpp"
#include "vispr/runlog.hpp"
#include "vispr/sim_backend.hpp"

namespace vispr {
namespace {

struct Fixture {
  std::shared_ptr<const Corpus> corpus = testutil::small_corpus(7);
  std::shared_ptr<Backend> backend = testutil::sim(corpus);
  Registry registry = Registry::builtin();
  ControllerConfig config;

  const QAItem& by_construction(Construction c) const {
    const QAItem* item = testutil::find_by_construction(*corpus, c);
    EXPECT_NE(item, nullptr) << to_string(c);
    return *item;
  }
  RunRecord run(const QAItem& item, PlannerBackend& planner) const {
    return answer_query(item.video_id, item.question, item.choices, planner, backend, registry,
                        config, item.id);
  }
};

TEST(Routing, FastPathWhenGateClears) {
  Fixture fx;
  const QAItem& item = fx.by_construction(Construction::Easy);
  ScriptedPlanner planner;
  planner.add(item.id, SyntheticPlanner::easy_text());

  RunRecord rec = fx.run(item, planner);
  EXPECT_EQ(rec.decision.path, RoutePath::Fast);
  EXPECT_EQ(rec.final_answer, item.gold_answer);
  ASSERT_TRUE(rec.fast.has_value());
  EXPECT_FALSE(rec.slow.has_value());
  ASSERT_TRUE(rec.decision.fast_confidence.has_value());
  EXPECT_GE(rec.decision.fast_confidence->value(), 0.75);
  // the stop sequence cut the completion before the return line
  EXPECT_EQ(rec.planner_output, SyntheticPlanner::easy_prefix());
  EXPECT_EQ(rec.output_length, rec.planner_output.size());
}

TEST(Routing, SlowPathWhenPlannerSkipsTheMarker) {
  Fixture fx;
  const QAItem& item = fx.by_construction(Construction::Difficult);
  ScriptedPlanner planner;
  planner.add(item.id, SyntheticPlanner::difficult_text());

  RunRecord rec = fx.run(item, planner);
  EXPECT_EQ(rec.decision.path, RoutePath::Slow);
  EXPECT_FALSE(rec.fast.has_value());
  ASSERT_TRUE(rec.slow.has_value());
  EXPECT_EQ(rec.final_answer, item.gold_answer);
  EXPECT_TRUE(rec.slow->base_result.ok());
}

TEST(Routing, FastThenSlowWhenGateFails) {
  Fixture fx;
  const QAItem& item = fx.by_construction(Construction::Difficult);
  ScriptedPlanner planner;
  planner.add(item.id, SyntheticPlanner::two_stage_text());

  RunRecord rec = fx.run(item, planner);
  EXPECT_EQ(rec.decision.path, RoutePath::FastThenSlow);
  ASSERT_TRUE(rec.fast.has_value());
  EXPECT_LT(rec.fast->confidence.value(), 0.75);  // difficult: fast cannot clear the gate
  ASSERT_TRUE(rec.slow.has_value());
  EXPECT_EQ(rec.final_answer, item.gold_answer);
  // both stages stitched into the recorded completion
  EXPECT_EQ(rec.planner_output, SyntheticPlanner::two_stage_text());
}

TEST(Routing, FallbackReturnsExactFastAnswerWhenSlowIsBroken) {
  Fixture fx;
  const QAItem& item = fx.by_construction(Construction::Difficult);
  ScriptedPlanner planner;
  planner.add(item.id, "this is not a program(((");

  RunRecord rec = fx.run(item, planner);
  EXPECT_EQ(rec.decision.path, RoutePath::SlowFallbackFast);
  auto [conf, answer] = fast_think(*fx.backend, item.video_id, item.question, item.choices);
  EXPECT_EQ(rec.final_answer, answer);
  ASSERT_TRUE(rec.final_confidence.has_value());
  EXPECT_EQ(rec.final_confidence->value(), conf.value());
  EXPECT_FALSE(rec.slow.has_value());
}

TEST(Routing, PlannerUnreachableFallsBackToFast) {
  Fixture fx;
  const QAItem& item = fx.by_construction(Construction::Easy);
  ScriptedPlanner planner;
  planner.set_unreachable(true);

  RunRecord rec = fx.run(item, planner);
  EXPECT_EQ(rec.decision.path, RoutePath::SlowFallbackFast);
  EXPECT_TRUE(rec.planner_output.empty());
  EXPECT_EQ(rec.final_answer, item.gold_answer);
}

// Planner that can open a two-stage completion but dies on continuation.
class FirstStageOnlyPlanner : public PlannerBackend {
 public:
  std::string complete(const PlannerRequest& request) override {
    if (!request.prior_output.empty()) throw PlannerError("continuation unavailable");
    return apply_prior_and_stop(SyntheticPlanner::two_stage_text(), "", request.stop);
  }
};

TEST(Routing, ContinuationFailureFallsBackToFast) {
  Fixture fx;
  const QAItem& item = fx.by_construction(Construction::Difficult);
  FirstStageOnlyPlanner planner;

  RunRecord rec = fx.run(item, planner);
  EXPECT_EQ(rec.decision.path, RoutePath::SlowFallbackFast);
  auto [conf, answer] = fast_think(*fx.backend, item.video_id, item.question, item.choices);
  EXPECT_EQ(rec.final_answer, answer);
  EXPECT_EQ(rec.final_confidence->value(), conf.value());
}

TEST(Routing, PlannerErrorOnlyWhenUnreachableAndNoFastAnswer) {
  Fixture fx;
  ScriptedPlanner planner;
  planner.set_unreachable(true);
  // unknown video: the fast stage cannot produce an answer either
  EXPECT_THROW(answer_query("no-such-video", "q", {"A", "B"}, planner, fx.backend, fx.registry,
                            fx.config),
               PlannerError);
}

// QA stage that always fails; retrieval and info calls still work.
class NoQaBackend : public SimulatedBackend {
 public:
  using SimulatedBackend::SimulatedBackend;
  QaResult video_qa(const QaRequest&) override { throw BackendError("qa down"); }
};

TEST(Routing, BackendErrorWhenSlowFailsAndFastUnobtainable) {
  Fixture fx;
  const QAItem& item = fx.by_construction(Construction::Difficult);
  auto no_qa = std::make_shared<NoQaBackend>(fx.corpus);
  ScriptedPlanner planner;
  planner.add(item.id, "garbage(((");
  EXPECT_THROW(answer_query(item.video_id, item.question, item.choices, planner, no_qa,
                            fx.registry, fx.config, item.id),
               BackendError);
}

// Fails only whole-video fast_think calls (they carry exactly 64 frames on
// these long videos); clip-scoped QA still works.
class FastStageDownBackend : public SimulatedBackend {
 public:
  using SimulatedBackend::SimulatedBackend;
  QaResult video_qa(const QaRequest& req) override {
    if (req.frames.size() == static_cast<std::size_t>(kMaxFramesPerQaCall)) {
      throw BackendError("fast stage down");
    }
    return SimulatedBackend::video_qa(req);
  }
};

TEST(Routing, FastStageOutageDegradesToSlow) {
  Fixture fx;
  const QAItem& item = fx.by_construction(Construction::Difficult);
  auto degraded = std::make_shared<FastStageDownBackend>(fx.corpus);
  ScriptedPlanner planner;
  planner.add(item.id, SyntheticPlanner::two_stage_text());

  RunRecord rec = answer_query(item.video_id, item.question, item.choices, planner, degraded,
                               fx.registry, fx.config, item.id);
  // no fast answer was obtainable, so the slow result stands under path=slow
  EXPECT_EQ(rec.decision.path, RoutePath::Slow);
  EXPECT_FALSE(rec.fast.has_value());
  EXPECT_EQ(rec.final_answer, item.gold_answer);
}

// Scalar-confidence backend pinning the fast confidence to an exact value.
class PinnedConfBackend : public SimulatedBackend {
 public:
  PinnedConfBackend(std::shared_ptr<const Corpus> corpus, double conf)
      : SimulatedBackend(std::move(corpus)), conf_(conf) {}
  QaResult video_qa(const QaRequest& req) override {
    QaResult r;
    r.answer = req.yes_no ? "yes" : (req.choices.empty() ? "unknown" : req.choices.front());
    r.confidence = Confidence{conf_};
    r.source = ConfidenceSource::Scalar;
    return r;
  }

 private:
  double conf_;
};

TEST(Routing, GateIsNonStrictAtTheBoundary) {
  Fixture fx;
  const QAItem& item = fx.by_construction(Construction::Easy);
  auto pinned = std::make_shared<PinnedConfBackend>(fx.corpus, 0.75);
  ScriptedPlanner planner;
  planner.add(item.id, SyntheticPlanner::two_stage_text());

  auto run_at = [&](double theta) {
    ControllerConfig config = fx.config;
    config.theta = theta;
    return answer_query(item.video_id, item.question, item.choices, planner, pinned, fx.registry,
                        config, item.id);
  };

  EXPECT_EQ(run_at(0.75).decision.path, RoutePath::Fast);  // conf == theta routes fast
  EXPECT_EQ(run_at(0.74).decision.path, RoutePath::Fast);
  EXPECT_EQ(run_at(0.76).decision.path, RoutePath::FastThenSlow);
}

TEST(Routing, FastShareIsMonotoneInTheta) {
  Fixture fx;
  SyntheticPlanner planner(fx.corpus);
  int previous = static_cast<int>(fx.corpus->items.size()) + 1;
  for (double theta : {0.4, 0.6, 0.75, 0.9}) {
    ControllerConfig config = fx.config;
    config.theta = theta;
    int fast_count = 0;
    for (const auto& item : fx.corpus->items) {
      RunRecord rec = answer_query(item.video_id, item.question, item.choices, planner,
                                   fx.backend, fx.registry, config, item.id);
      fast_count += rec.decision.path == RoutePath::Fast ? 1 : 0;
    }
    EXPECT_LE(fast_count, previous) << "theta=" << theta;
    previous = fast_count;
  }
}

TEST(Routing, RejectsBadConfig) {
  Fixture fx;
  const QAItem& item = fx.by_construction(Construction::Easy);
  ScriptedPlanner planner;
  planner.add(item.id, SyntheticPlanner::easy_text());

  for (double theta : {0.0, 1.0, -0.5, 1.5}) {
    ControllerConfig config = fx.config;
    config.theta = theta;
    EXPECT_THROW(answer_query(item.video_id, item.question, item.choices, planner, fx.backend,
                              fx.registry, config, item.id),
                 DomainError);
  }
}

RunRecord make_record(RoutePath path, bool correct, std::size_t output_length,
                      DurationBucket bucket, std::optional<double> fast_conf,
                      bool fast_correct) {
  RunRecord rec;
  rec.query_id = "r";
  rec.decision.path = path;
  rec.final_answer = correct ? "gold" : "off";
  rec.gold_answer = "gold";
  rec.output_length = output_length;
  rec.duration_bucket = bucket;
  if (fast_conf) {
    rec.fast = McAnswer{fast_correct ? "gold" : "off", Confidence{*fast_conf}};
    rec.decision.fast_confidence = rec.fast->confidence;
  }
  return rec;
}

TEST(ComputeReport, AggregatesPathsBucketsGapAndCurve) {
  std::vector<RunRecord> records{
      make_record(RoutePath::Fast, true, 10, DurationBucket::Medium, 0.9, true),
      make_record(RoutePath::FastThenSlow, false, 30, DurationBucket::Long, 0.5, false),
      make_record(RoutePath::Slow, true, 50, DurationBucket::Medium, std::nullopt, false),
      make_record(RoutePath::SlowFallbackFast, false, 20, DurationBucket::Short, 0.4, false),
  };
  EvalReport rep = compute_report(records, 0.75, EvalMode::Adaptive);

  EXPECT_EQ(rep.path_counts.size(), 4u);
  EXPECT_EQ(rep.path_counts.at("fast"), 1);
  EXPECT_EQ(rep.path_counts.at("fast_then_slow"), 1);
  EXPECT_EQ(rep.path_counts.at("slow"), 1);
  EXPECT_EQ(rep.path_counts.at("slow_fallback_fast"), 1);

  EXPECT_EQ(rep.fast.samples, 1);
  EXPECT_EQ(rep.fast.correct, 1);
  EXPECT_DOUBLE_EQ(rep.fast.mean_output_length(), 10.0);
  EXPECT_EQ(rep.slow.samples, 3);
  EXPECT_EQ(rep.slow.correct, 1);
  EXPECT_EQ(rep.overall.samples, 4);
  EXPECT_DOUBLE_EQ(rep.overall.accuracy(), 0.5);
  EXPECT_DOUBLE_EQ(rep.overall.mean_output_length(), 27.5);

  const auto& medium = rep.overall.buckets[static_cast<std::size_t>(DurationBucket::Medium)];
  EXPECT_EQ(medium.samples, 2);
  EXPECT_EQ(medium.correct, 2);
  const auto& lng = rep.overall.buckets[static_cast<std::size_t>(DurationBucket::Long)];
  EXPECT_EQ(lng.samples, 1);
  EXPECT_EQ(lng.correct, 0);

  ASSERT_TRUE(rep.gap.has_value());
  EXPECT_DOUBLE_EQ(rep.gap->mean_correct, 0.9);
  EXPECT_DOUBLE_EQ(rep.gap->mean_incorrect, 0.45);
  EXPECT_DOUBLE_EQ(rep.gap->delta, 0.45);

  ASSERT_FALSE(rep.curve.empty());
  for (const auto& point : rep.curve) {
    if (point.threshold == 0.75) {
      ASSERT_TRUE(point.accuracy.has_value());
      EXPECT_DOUBLE_EQ(*point.accuracy, 1.0);
      EXPECT_DOUBLE_EQ(point.coverage, 1.0 / 3.0);
    }
  }
}

TEST(ComputeReport, DegenerateInputsStayWellFormed) {
  EvalReport empty = compute_report({}, 0.5, EvalMode::SlowOnly);
  EXPECT_EQ(empty.overall.samples, 0);
  EXPECT_FALSE(empty.gap.has_value());
  EXPECT_TRUE(empty.curve.empty());
  EXPECT_EQ(empty.path_counts.size(), 4u);

  // one-class fast answers: curve exists, gap cannot
  std::vector<RunRecord> one_class{
      make_record(RoutePath::Fast, true, 5, DurationBucket::Short, 0.8, true)};
  EvalReport rep = compute_report(one_class, 0.75, EvalMode::Adaptive);
  EXPECT_FALSE(rep.gap.has_value());
  EXPECT_FALSE(rep.curve.empty());
}

TEST(Evaluate, AdaptiveBeatsBothBaselinesOnTheMixedCorpus) {
  Fixture fx;
  SyntheticPlanner planner(fx.corpus);

  EvalRun adaptive = evaluate(fx.corpus->items, planner, fx.backend, fx.registry, fx.config,
                              EvalMode::Adaptive);
  EvalRun fast_only = evaluate(fx.corpus->items, planner, fx.backend, fx.registry, fx.config,
                               EvalMode::FastOnly);
  EvalRun slow_only = evaluate(fx.corpus->items, planner, fx.backend, fx.registry, fx.config,
                               EvalMode::SlowOnly);

  EXPECT_GT(adaptive.report.overall.accuracy(), fast_only.report.overall.accuracy());
  EXPECT_GT(adaptive.report.overall.accuracy(), slow_only.report.overall.accuracy());

  // mode-specific path shapes
  EXPECT_EQ(fast_only.report.path_counts.at("fast"),
            static_cast<int>(fx.corpus->items.size()));
  EXPECT_EQ(slow_only.report.path_counts.at("slow"),
            static_cast<int>(fx.corpus->items.size()));
  EXPECT_FALSE(slow_only.report.gap.has_value());  // no fast answers recorded
  ASSERT_TRUE(adaptive.report.gap.has_value());
  EXPECT_GT(adaptive.report.gap->delta, 0.0);

  // replaying the records through compute_report reproduces the report
  EvalReport replayed =
      compute_report(adaptive.records, fx.config.theta, EvalMode::Adaptive);
  EXPECT_EQ(to_json(replayed).dump(), to_json(adaptive.report).dump());
}

TEST(Evaluate, ParallelismPreservesRecordsAndReport) {
  Fixture fx;
  SyntheticPlanner planner(fx.corpus);
  std::vector<QAItem> items(fx.corpus->items.begin(), fx.corpus->items.begin() + 12);

  EvalRun serial = evaluate(items, planner, fx.backend, fx.registry, fx.config,
                            EvalMode::Adaptive, 1);
  EvalRun parallel = evaluate(items, planner, fx.backend, fx.registry, fx.config,
                              EvalMode::Adaptive, 4);
  ASSERT_EQ(serial.records.size(), parallel.records.size());
  for (std::size_t i = 0; i < serial.records.size(); ++i) {
    EXPECT_EQ(strip_timings(to_json(serial.records[i])).dump(),
              strip_timings(to_json(parallel.records[i])).dump())
        << "record " << i;
  }
  EXPECT_EQ(to_json(serial.report).dump(), to_json(parallel.report).dump());

  EXPECT_THROW(evaluate({}, planner, fx.backend, fx.registry, fx.config), DomainError);
  EXPECT_THROW(evaluate(items, planner, fx.backend, fx.registry, fx.config, EvalMode::Adaptive, 0),
               DomainError);
}

TEST(Enums, RoutePathAndEvalModeRoundTrip) {
  for (RoutePath p : {RoutePath::Fast, RoutePath::FastThenSlow, RoutePath::Slow,
                      RoutePath::SlowFallbackFast}) {
    EXPECT_EQ(route_path_from_string(to_string(p)), p);
  }
  EXPECT_EQ(route_path_from_string("warp"), std::nullopt);
  for (EvalMode m : {EvalMode::Adaptive, EvalMode::FastOnly, EvalMode::SlowOnly}) {
    EXPECT_EQ(eval_mode_from_string(to_string(m)), m);
  }
  EXPECT_EQ(eval_mode_from_string("hybrid"), std::nullopt);
}

}  // namespace
}  // namespace vispr
