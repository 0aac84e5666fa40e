#include "vispr/modules.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <utility>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vispr/confidence.hpp"
#include "vispr/errors.hpp"
#include "vispr/sim_backend.hpp"

namespace vispr {
namespace {

// Hand-built world: two score-tied events, known subtitles/captions,
// annotations on fixed timestamps.  Gives exact control over ties.
SyntheticVideo manual_video() {
  SyntheticVideo v;
  v.id = "m0";
  v.duration = 60.0;
  v.fps = 1.0;
  v.events = {
      {12.0, 18.0, {"alpha", "beta"}, ""},
      {32.0, 38.0, {"alpha", "beta"}, ""},
  };
  v.scene_boundaries = {10.0, 25.0, 40.0};
  v.subtitles = {{0.0, 5.0, "alpha beta"},
                 {10.0, 15.0, "alpha"},
                 {20.0, 25.0, "gamma"},
                 {30.0, 35.0, "alpha beta gamma"}};
  v.captions = {{5.0, 9.0, "caption one"}, {40.0, 50.0, "caption two"}};

  FrameAnnotation hello;
  hello.ocr_text = "hello";
  FrameAnnotation world;
  world.ocr_text = "world";
  world.objects = {{"red car", Box{0.2, 0.2, 0.5, 0.5}, 0.9},
                   {"red hat", Box{0.6, 0.6, 0.8, 0.8}, 0.7},
                   {"dog", Box{0.1, 0.1, 0.3, 0.3}, 0.4}};
  FrameAnnotation blank;
  v.frame_annotations = {{10.0, hello}, {20.0, hello}, {30.0, world}, {40.0, blank}};
  return v;
}

std::shared_ptr<Backend> manual_backend(double duration = 60.0) {
  auto corpus = std::make_shared<Corpus>();
  corpus->seed = 1;
  SyntheticVideo v = manual_video();
  v.duration = duration;
  corpus->videos = {std::move(v)};
  return std::make_shared<SimulatedBackend>(std::move(corpus));
}

std::vector<Clip> clip_oracle(Backend& backend, const std::string& video_id,
                              const std::string& query, std::int64_t top_k) {
  const double duration = backend.video_info(video_id).duration;
  std::vector<Clip> clips;
  for (double s = 0.0; s < duration; s += 10.0) {
    TimeRange r{s, std::min(s + 10.0, duration)};
    clips.push_back({video_id, r, backend.score_clip(video_id, r, query)});
  }
  std::sort(clips.begin(), clips.end(), [](const Clip& a, const Clip& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.range.start < b.range.start;
  });
  if (std::cmp_greater(clips.size(), top_k)) clips.resize(static_cast<std::size_t>(top_k));
  return clips;
}

TEST(GetClips, EqualsBruteForceOracle) {
  auto corpus = testutil::small_corpus(9);
  auto backend = testutil::sim(corpus);
  int cases = 0;
  for (const auto& item : corpus->items) {
    for (std::int64_t top_k : {1, 3, 5, 1000}) {
      EXPECT_EQ(get_clips(*backend, item.video_id, item.question, top_k),
                clip_oracle(*backend, item.video_id, item.question, top_k))
          << item.id << " top_k=" << top_k;
      ++cases;
    }
  }
  EXPECT_GE(cases, 100);
}

TEST(GetClips, TiesBreakToEarlierStart) {
  auto backend = manual_backend();
  auto clips = get_clips(*backend, "m0", "alpha beta", 2);
  ASSERT_EQ(clips.size(), 2u);
  EXPECT_EQ(clips[0].score, clips[1].score);
  EXPECT_EQ(clips[0].range, (TimeRange{10.0, 20.0}));
  EXPECT_EQ(clips[1].range, (TimeRange{30.0, 40.0}));
  // top_k=1 keeps only the earlier of the tied pair
  auto top1 = get_clips(*backend, "m0", "alpha beta", 1);
  ASSERT_EQ(top1.size(), 1u);
  EXPECT_EQ(top1[0].range, (TimeRange{10.0, 20.0}));
}

TEST(GetClips, WindowsCoverRaggedTail) {
  auto backend = manual_backend(55.0);
  auto clips = get_clips(*backend, "m0", "zzz-no-match", 1000);
  ASSERT_EQ(clips.size(), 6u);  // [0,10) .. [50,55)
  double total = 0.0;
  for (const auto& c : clips) total += c.range.length();
  EXPECT_DOUBLE_EQ(total, 55.0);
  EXPECT_THROW(get_clips(*backend, "m0", "q", 0), DomainError);
}

TEST(GetSubtitles, EqualsBruteForceOracle) {
  auto backend = manual_backend();
  const std::string query = "alpha beta gamma";
  auto subs = backend->subtitles("m0");
  std::vector<SpanHit> want;
  for (const auto& s : subs) {
    want.push_back({s.start, s.end, s.text, backend->score_text(query, s.text)});
  }
  std::sort(want.begin(), want.end(), [](const SpanHit& a, const SpanHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.start < b.start;
  });
  EXPECT_EQ(get_subtitles(*backend, "m0", query, 4), want);
  want.resize(2);
  EXPECT_EQ(get_subtitles(*backend, "m0", query, 2), want);
  // tie between "alpha" (10s) and "gamma" (20s), both score 1/3: earlier wins
  auto hits = get_subtitles(*backend, "m0", query, 3);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[2].text, "alpha");
  EXPECT_THROW(get_subtitles(*backend, "m0", query, 0), DomainError);
}

TEST(TrimModules, RandomizedPostconditions) {
  auto corpus = testutil::small_corpus(13);
  auto backend = testutil::sim(corpus);
  std::mt19937_64 rng(99);
  const double intervals[] = {10.0, 20.0, 30.0, 60.0};
  for (int i = 0; i < 500; ++i) {
    const auto& video = corpus->videos[rng() % corpus->videos.size()];
    const double duration = video.duration;
    const double t = std::uniform_real_distribution<>(0.0, duration)(rng);
    const double iv = intervals[rng() % 4];

    FrameRange fb = trim_before(*backend, video.id, t, iv);
    EXPECT_EQ(fb.video_id, video.id);
    EXPECT_EQ(fb.range.start, t);
    EXPECT_EQ(fb.range.end, std::min(t + iv, duration));
    EXPECT_LE(fb.range.length(), iv);

    FrameRange fa = trim_after(*backend, video.id, t, iv);
    EXPECT_EQ(fa.range.start, std::max(t - iv, 0.0));
    EXPECT_EQ(fa.range.end, t);
    EXPECT_LE(fa.range.length(), iv);

    const double a = std::uniform_real_distribution<>(0.0, duration)(rng);
    const double b = std::uniform_real_distribution<>(0.0, duration)(rng);
    FrameRange fr = trim_range(*backend, video.id, std::min(a, b), std::max(a, b));
    EXPECT_EQ(fr.range, (TimeRange{std::min(a, b), std::max(a, b)}));

    // half-open: end excluded, start included when nonempty
    if (!fb.range.empty()) {
      EXPECT_TRUE(fb.range.contains(fb.range.start));
      EXPECT_FALSE(fb.range.contains(fb.range.end));
    }
  }
}

TEST(TrimModules, RejectsOutOfRangeInputs) {
  auto backend = manual_backend();
  EXPECT_THROW(trim_before(*backend, "m0", -1.0, 20.0), DomainError);
  EXPECT_THROW(trim_before(*backend, "m0", 61.0, 20.0), DomainError);
  EXPECT_THROW(trim_before(*backend, "m0", 5.0, 0.0), DomainError);
  EXPECT_THROW(trim_after(*backend, "m0", 70.0, 20.0), DomainError);
  EXPECT_THROW(trim_range(*backend, "m0", 30.0, 20.0), DomainError);
  EXPECT_THROW(trim_range(*backend, "m0", 0.0, 61.0), DomainError);
  EXPECT_THROW(trim_range(*backend, "bogus", 0.0, 1.0), BackendError);
  // boundary timestamps are legal and give empty ranges
  EXPECT_TRUE(trim_after(*backend, "m0", 0.0, 20.0).range.empty());
  EXPECT_EQ(trim_before(*backend, "m0", 60.0, 20.0).range.length(), 0.0);
}

TEST(ExtractFrames, MidpointFormulaWholeVideo) {
  auto corpus = testutil::small_corpus(5);
  auto backend = testutil::sim(corpus);
  const auto& video = corpus->videos.front();
  for (std::int64_t n : {8, 16, 32, 64}) {
    auto frames = extract_frames(*backend, FrameSource{video.id}, n);
    ASSERT_EQ(frames.size(), static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      EXPECT_EQ(frames[static_cast<std::size_t>(i)].timestamp,
                (i + 0.5) * video.duration / static_cast<double>(n));
      EXPECT_EQ(frames[static_cast<std::size_t>(i)].video_id, video.id);
      EXPECT_FALSE(frames[static_cast<std::size_t>(i)].crop_box.has_value());
    }
  }
}

TEST(ExtractFrames, MidpointFormulaOverRange) {
  auto backend = manual_backend();
  FrameRange range{"m0", {12.0, 44.0}};
  auto frames = extract_frames(*backend, FrameSource{range}, 16);
  ASSERT_EQ(frames.size(), 16u);
  for (int i = 0; i < 16; ++i) {
    EXPECT_EQ(frames[static_cast<std::size_t>(i)].timestamp,
              12.0 + (i + 0.5) * (44.0 - 12.0) / 16.0);
  }
}

TEST(ExtractFrames, ClipsSampleConcatenatedTimeline) {
  auto backend = manual_backend();
  std::vector<Clip> clips{{"m0", {10.0, 20.0}, 1.0}, {"m0", {30.0, 40.0}, 1.0}};
  auto frames = extract_frames(*backend, FrameSource{clips}, 4);
  ASSERT_EQ(frames.size(), 4u);
  // midpoints over the 20s concatenated timeline: 2.5, 7.5, 12.5, 17.5
  EXPECT_EQ(frames[0].timestamp, 12.5);
  EXPECT_EQ(frames[1].timestamp, 17.5);
  EXPECT_EQ(frames[2].timestamp, 32.5);
  EXPECT_EQ(frames[3].timestamp, 37.5);
}

TEST(ExtractFrames, CollapsesFpsCollisionsAndHandlesEmpty) {
  auto backend = manual_backend(4.0);
  auto frames = extract_frames(*backend, FrameSource{std::string("m0")}, 16);
  ASSERT_EQ(frames.size(), 4u);  // fps=1: 16 midpoints land on 4 physical frames
  EXPECT_EQ(frames[0].timestamp, 0.5 * 4.0 / 16.0);
  EXPECT_EQ(frames[1].timestamp, 4.5 * 4.0 / 16.0);
  EXPECT_EQ(frames[2].timestamp, 8.5 * 4.0 / 16.0);
  EXPECT_EQ(frames[3].timestamp, 12.5 * 4.0 / 16.0);

  FrameRange empty{"m0", {2.0, 2.0}};
  EXPECT_TRUE(extract_frames(*backend, FrameSource{empty}, 8).empty());
  EXPECT_THROW(extract_frames(*backend, FrameSource{std::string("m0")}, 0), DomainError);
}

TEST(CapFrames, UniformSubsampleAndIdentity) {
  std::vector<Frame> frames;
  for (int i = 0; i < 100; ++i) frames.push_back({"v", static_cast<double>(i), std::nullopt});
  EXPECT_EQ(cap_frames(frames, 100), frames);
  EXPECT_EQ(cap_frames(frames, 200), frames);
  auto capped = cap_frames(frames, 64);
  ASSERT_EQ(capped.size(), 64u);
  for (std::size_t j = 0; j < 64; ++j) {
    auto idx = static_cast<std::size_t>((j + 0.5) * 100.0 / 64.0);
    EXPECT_EQ(capped[j], frames[idx]);
    if (j) EXPECT_LT(capped[j - 1].timestamp, capped[j].timestamp);
  }
}

// Spy counts the frames actually handed to videoQA (the 64-frame cap).
class SpyQa : public SimulatedBackend {
 public:
  using SimulatedBackend::SimulatedBackend;
  std::size_t last_frames = 0;
  QaResult video_qa(const QaRequest& req) override {
    last_frames = req.frames.size();
    return SimulatedBackend::video_qa(req);
  }
};

TEST(QueryMc, EvidenceHitYieldsGoldWithHighConfidence) {
  auto corpus = testutil::small_corpus(7);
  auto backend = testutil::sim(corpus);
  const QAItem* item = testutil::find_by_construction(*corpus, Construction::Difficult);
  ASSERT_NE(item, nullptr);
  const TimeRange span = *item->evidence_span;

  std::vector<Frame> hit{{item->video_id, (span.start + span.end) / 2.0, std::nullopt}};
  McAnswer on_evidence = query_mc(*backend, hit, item->question, item->choices);
  EXPECT_EQ(on_evidence.choice, item->gold_answer);
  EXPECT_GT(on_evidence.confidence.value(), 0.75);

  // span.end itself is outside the half-open evidence span
  std::vector<Frame> miss{{item->video_id, span.end, std::nullopt}};
  McAnswer off_evidence = query_mc(*backend, miss, item->question, item->choices);
  EXPECT_NE(off_evidence.choice, item->gold_answer);
  EXPECT_TRUE(std::find(item->choices.begin(), item->choices.end(), off_evidence.choice) !=
              item->choices.end());
  EXPECT_LT(off_evidence.confidence.value(), 0.75);
}

TEST(QueryMc, CapsFramesAndValidatesInputs) {
  auto corpus = testutil::small_corpus(7);
  SpyQa spy(corpus);
  const QAItem& item = corpus->items.front();
  const double duration = corpus->find_video(item.video_id)->duration;
  std::vector<Frame> frames;
  for (int i = 0; i < 100; ++i) {
    frames.push_back({item.video_id, duration * (i + 0.5) / 100.0, std::nullopt});
  }
  query_mc(spy, frames, item.question, item.choices);
  EXPECT_EQ(spy.last_frames, 64u);

  EXPECT_THROW(query_mc(spy, {}, item.question, item.choices), DomainError);
  EXPECT_THROW(query_mc(spy, frames, item.question, {}), DomainError);
}

// Rigged backend answers off the choice list / outside yes|no.
class RiggedQa : public SimulatedBackend {
 public:
  RiggedQa(std::shared_ptr<const Corpus> corpus, std::string answer)
      : SimulatedBackend(std::move(corpus)), answer_(std::move(answer)) {}
  QaResult video_qa(const QaRequest&) override {
    QaResult r;
    r.answer = answer_;
    r.token_logprobs = {std::log(0.9)};
    r.confidence = compute_confidence(r.token_logprobs);
    return r;
  }

 private:
  std::string answer_;
};

TEST(QueryMc, RejectsAnswerOutsideChoices) {
  auto corpus = testutil::small_corpus(7);
  RiggedQa rigged(corpus, "bogus");
  const QAItem& item = corpus->items.front();
  std::vector<Frame> frames{{item.video_id, 1.0, std::nullopt}};
  EXPECT_THROW(query_mc(rigged, frames, item.question, item.choices), BackendError);
}

TEST(QueryYn, AnswersYesOnEvidenceNoOffEvidence) {
  auto corpus = testutil::small_corpus(7);
  auto backend = testutil::sim(corpus);
  const QAItem* item = testutil::find_by_construction(*corpus, Construction::Difficult);
  ASSERT_NE(item, nullptr);
  const TimeRange span = *item->evidence_span;

  auto yes = query_yn(*backend, {{item->video_id, (span.start + span.end) / 2.0, std::nullopt}},
                      item->question);
  EXPECT_EQ(yes.first, "yes");
  EXPECT_GT(yes.second.value(), 0.75);

  auto no = query_yn(*backend, {{item->video_id, span.end, std::nullopt}}, item->question);
  EXPECT_EQ(no.first, "no");
  EXPECT_LT(no.second.value(), 0.75);

  RiggedQa rigged(corpus, "maybe");
  EXPECT_THROW(query_yn(rigged, {{item->video_id, 1.0, std::nullopt}}, item->question),
               BackendError);
  EXPECT_THROW(query_yn(*backend, {}, item->question), DomainError);
}

TEST(RunOcr, ConcatenatesUniqueTextInFrameOrder) {
  auto backend = manual_backend();
  std::vector<Frame> frames{{"m0", 10.0, std::nullopt},
                            {"m0", 10.4, std::nullopt},   // same annotation, deduped
                            {"m0", 20.0, std::nullopt},   // "hello" again, consecutive dup
                            {"m0", 15.0, std::nullopt},   // no annotation within 0.5s
                            {"m0", 30.0, std::nullopt},   // "world"
                            {"m0", 40.0, std::nullopt}};  // blank annotation
  EXPECT_EQ(run_ocr(*backend, frames), "hello world");
  // a crop away from the OCR box blanks the text
  Frame cropped{"m0", 10.0, Box{0.7, 0.7, 0.9, 0.9}};
  EXPECT_EQ(run_ocr(*backend, {cropped}), "");
  EXPECT_THROW(run_ocr(*backend, {}), DomainError);
}

TEST(DetectObject, ThresholdsFilterAndSortByScore) {
  auto backend = manual_backend();
  std::vector<Frame> frames{{"m0", 30.0, std::nullopt}};

  auto red = detect_object(*backend, frames, "red", 0.25, 0.0);
  ASSERT_EQ(red.size(), 2u);
  EXPECT_EQ(red[0].label, "red car");
  EXPECT_EQ(red[1].label, "red hat");
  EXPECT_GT(red[0].score, red[1].score);

  // text_thr is a strict cutoff: relevance("red bicycle","red car") = 0.5
  EXPECT_EQ(detect_object(*backend, frames, "red bicycle", 0.50, 0.0).size(), 2u);
  EXPECT_TRUE(detect_object(*backend, frames, "red bicycle", 0.70, 0.0).empty());
  EXPECT_TRUE(detect_object(*backend, frames, "zebra", 0.25, 0.0).empty());

  // box_thr drops low-score boxes
  auto all = detect_object(*backend, frames, "red car dog hat", 0.25, 0.5);
  for (const auto& d : all) EXPECT_GE(d.score, 0.5);

  // duplicate frames do not duplicate detections
  std::vector<Frame> twice{{"m0", 30.0, std::nullopt}, {"m0", 30.2, std::nullopt}};
  EXPECT_EQ(detect_object(*backend, twice, "red", 0.25, 0.0).size(), 2u);

  // crop outside every object box removes detections
  std::vector<Frame> cropped{{"m0", 30.0, Box{0.85, 0.85, 0.99, 0.99}}};
  EXPECT_TRUE(detect_object(*backend, cropped, "red", 0.25, 0.0).empty());

  EXPECT_THROW(detect_object(*backend, {}, "red", 0.25, 0.0), DomainError);
}

TEST(SubtitleAndCaptionRanges, OverlapIsHalfOpen) {
  auto backend = manual_backend();
  auto subs = get_subs_range(*backend, "m0", 12.0, 22.0);
  ASSERT_EQ(subs.size(), 2u);
  EXPECT_EQ(subs[0].text, "alpha");
  EXPECT_EQ(subs[1].text, "gamma");
  // touching endpoints do not count as overlap
  EXPECT_TRUE(get_subs_range(*backend, "m0", 15.0, 20.0).empty());
  EXPECT_EQ(get_subs_range(*backend, "m0", 0.0, 60.0).size(), 4u);
  EXPECT_THROW(get_subs_range(*backend, "m0", 10.0, 5.0), DomainError);

  auto caps = get_caps_range(*backend, "m0", 6.0, 41.0);
  ASSERT_EQ(caps.size(), 2u);
  EXPECT_EQ(caps[0].text, "caption one");
  EXPECT_THROW(get_caps_range(*backend, "m0", 10.0, 5.0), DomainError);
}

TEST(GetSubtitleHint, TopThreeByScoreThenStart) {
  auto backend = manual_backend();
  EXPECT_EQ(get_subtitle_hint(*backend, "m0", "alpha beta gamma"),
            "alpha beta gamma alpha beta alpha");
  EXPECT_EQ(get_subtitle_hint(*backend, "m0", "nothing matches this"), "");
}

TEST(Crop, ComposesIntersectionsAndValidates) {
  std::vector<Frame> frames{{"v", 1.0, std::nullopt}};
  auto once = crop(frames, Box{0.2, 0.2, 0.8, 0.8});
  ASSERT_EQ(once.size(), 1u);
  EXPECT_EQ(*once[0].crop_box, (Box{0.2, 0.2, 0.8, 0.8}));

  auto twice = crop(once, Box{0.5, 0.0, 1.0, 0.6});
  EXPECT_EQ(*twice[0].crop_box, (Box{0.5, 0.2, 0.8, 0.6}));

  EXPECT_THROW(crop(once, Box{0.9, 0.9, 1.0, 1.0}), DomainError);  // empty intersection
  EXPECT_THROW(crop(frames, Box{0.8, 0.2, 0.2, 0.8}), DomainError);  // inverted box
  EXPECT_THROW(crop(frames, Box{-0.1, 0.0, 0.5, 0.5}), DomainError);
  EXPECT_THROW(crop({}, Box{0.2, 0.2, 0.8, 0.8}), DomainError);
}

TEST(SplitVideo, PartitionsAtSceneBoundaries) {
  auto backend = manual_backend();
  auto parts = split_video(*backend, "m0");
  ASSERT_EQ(parts.size(), 4u);
  EXPECT_EQ(parts[0], (TimeRange{0.0, 10.0}));
  EXPECT_EQ(parts[1], (TimeRange{10.0, 25.0}));
  EXPECT_EQ(parts[2], (TimeRange{25.0, 40.0}));
  EXPECT_EQ(parts[3], (TimeRange{40.0, 60.0}));
  double total = 0.0;
  for (const auto& p : parts) total += p.length();
  EXPECT_DOUBLE_EQ(total, 60.0);
}

TEST(SplitEvent, SplitsOnTerminatorsAndConnectives) {
  EXPECT_EQ(split_event("He opens the door. Then he walks out; after that he waves."),
            (std::vector<std::string>{"He opens the door", "he walks out", "he waves"}));
  EXPECT_EQ(split_event("first, then second"), (std::vector<std::string>{"first", "second"}));
  EXPECT_EQ(split_event("they strengthen the wall"),
            (std::vector<std::string>{"they strengthen the wall"}));
  EXPECT_EQ(split_event("  "), std::vector<std::string>{});
  EXPECT_EQ(split_event("a! b? c. Next d"), (std::vector<std::string>{"a", "b", "c", "d"}));
}

TEST(FastThink, BandsStraddleTheGate) {
  auto corpus = testutil::small_corpus(7);
  auto backend = testutil::sim(corpus);

  const QAItem* easy = testutil::find_by_construction(*corpus, Construction::Easy);
  ASSERT_NE(easy, nullptr);
  auto [easy_conf, easy_answer] = fast_think(*backend, easy->video_id, easy->question, easy->choices);
  EXPECT_EQ(easy_answer, easy->gold_answer);
  EXPECT_GT(easy_conf.value(), 0.75);

  const QAItem* hard = testutil::find_by_construction(*corpus, Construction::Difficult);
  ASSERT_NE(hard, nullptr);
  auto [hard_conf, hard_answer] = fast_think(*backend, hard->video_id, hard->question, hard->choices);
  EXPECT_NE(hard_answer, hard->gold_answer);
  EXPECT_LT(hard_conf.value(), 0.75);

  const QAItem* misperceived =
      testutil::find_by_construction(*corpus, Construction::MisperceivedDifficult);
  ASSERT_NE(misperceived, nullptr);
  auto [m_conf, m_answer] = fast_think(*backend, misperceived->video_id, misperceived->question,
                                       misperceived->choices);
  EXPECT_NE(m_answer, misperceived->gold_answer);
  EXPECT_LT(m_conf.value(), 0.75);
}

}  // namespace
}  // namespace vispr
