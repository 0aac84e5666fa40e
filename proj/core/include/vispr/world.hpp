#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vispr/types.hpp"

namespace vispr {

// Annotated happenings inside a synthetic video.  Retrieval scores a clip by
// the concatenated text of events overlapping it.
struct Event {
  double start = 0;
  double end = 0;
  std::vector<std::string> tags;
  std::string detail;

  bool operator==(const Event&) const = default;
};

struct TextSpan {
  double start = 0;
  double end = 0;
  std::string text;

  bool operator==(const TextSpan&) const = default;
};

// Per-timestamp ground truth consumed by run_ocr / detect_object.  The OCR
// text carries its own box so crops can exclude it.
struct FrameAnnotation {
  std::string ocr_text;
  Box ocr_box{0.1, 0.1, 0.6, 0.3};
  std::vector<Detection> objects;

  bool operator==(const FrameAnnotation&) const = default;
};

struct SyntheticVideo {
  std::string id;
  double duration = 0;
  double fps = 1.0;
  std::vector<Event> events;
  std::vector<double> scene_boundaries;  // strictly increasing, within (0, duration)
  std::vector<TextSpan> subtitles;
  std::vector<TextSpan> captions;
  std::map<double, FrameAnnotation> frame_annotations;

  bool operator==(const SyntheticVideo&) const = default;
};

enum class DurationBucket { Short, Medium, Long };

inline constexpr double kShortMaxSeconds = 120.0;
inline constexpr double kMediumMaxSeconds = 900.0;

const char* to_string(DurationBucket b);
std::optional<DurationBucket> duration_bucket_from_string(const std::string& s);
DurationBucket bucket_for_duration(double seconds);

// How the generator built an item.  Scripted planners and fixtures key their
// behavior off this; it is carried in the manifest as plain metadata.
enum class Construction {
  Easy,                  // evidence spans most of the video
  NoisyEasy,             // easy, plus early decoy clips that tie the retrieval score
  Difficult,             // narrow evidence dodging uniform sampling grids
  DecoyDifficult,        // difficult, plus one earlier score-tied decoy clip
  MisperceivedDifficult  // difficult, but the planner first tries the fast path
};

const char* to_string(Construction c);
std::optional<Construction> construction_from_string(const std::string& s);
bool is_easy_construction(Construction c);

struct QAItem {
  std::string id;  // "<video_id>#q<n>"
  std::string video_id;
  std::string question;
  std::vector<std::string> choices;  // empty = free-form
  std::string gold_answer;
  DurationBucket duration_bucket = DurationBucket::Short;
  std::optional<TimeRange> evidence_span;
  Construction construction = Construction::Easy;

  bool operator==(const QAItem&) const = default;
};

struct CorpusSpec {
  int n_videos = 1;
  std::pair<double, double> duration_range{60.0, 120.0};
  int qa_per_video = 1;
  double easy_fraction = 0.5;
  // Sub-mix defaults; fractions of the easy / difficult populations.
  double noisy_easy_fraction = 0.3;
  double misperceived_fraction = 0.25;
  double decoy_fraction = 0.25;

  bool operator==(const CorpusSpec&) const = default;
};

struct Corpus {
  std::uint64_t seed = 0;
  CorpusSpec spec;
  std::vector<SyntheticVideo> videos;
  std::vector<QAItem> items;

  const SyntheticVideo* find_video(const std::string& id) const;
  const QAItem* find_item(const std::string& id) const;

  bool operator==(const Corpus&) const = default;
};

// Deterministic: equal (seed, spec) gives equal corpora, bit for bit.  Easy
// items are answerable from uniform frame sampling; difficult items hide a
// narrow evidence span that uniform grids of 8..64 frames provably miss.
Corpus generate_corpus(std::uint64_t seed, const CorpusSpec& spec);

// Lowercased alphanumeric token runs.
std::vector<std::string> tokenize(const std::string& text);

// |unique query tokens found in span_text| / |unique query tokens|; 0 for an
// empty query.  Pure; retrieval breaks equal scores by earlier span start.
double relevance(const std::string& query, const std::string& span_text);

// Directory layout: <dir>/manifest.json plus <dir>/videos/<id>.json.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

nlohmann::json corpus_spec_to_json(const CorpusSpec& spec);
CorpusSpec corpus_spec_from_json(const nlohmann::json& j);

nlohmann::json qa_item_to_json(const QAItem& item);
QAItem qa_item_from_json(const nlohmann::json& j);

}  // namespace vispr
