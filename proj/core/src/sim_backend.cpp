#include "vispr/sim_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "vispr/confidence.hpp"
#include "vispr/errors.hpp"
#include "vispr/rng.hpp"

namespace vispr {

namespace {

std::uint64_t double_bits(double d) {
  std::uint64_t b = 0;
  std::memcpy(&b, &d, sizeof(b));
  return b;
}

double fuzzy_overlap(const std::string& a, const std::string& b) {
  std::set<std::string> ta, tb;
  for (auto& t : tokenize(a)) ta.insert(std::move(t));
  for (auto& t : tokenize(b)) tb.insert(std::move(t));
  if (ta.empty() || tb.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& t : ta) {
    if (tb.count(t)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(std::max(ta.size(), tb.size()));
}

}  // namespace

SimulatedBackend::SimulatedBackend(std::shared_ptr<const Corpus> corpus, SimBackendConfig config)
    : corpus_(std::move(corpus)), config_(config) {
  if (!corpus_) throw DomainError("simulated backend requires a corpus");
}

const SyntheticVideo& SimulatedBackend::require_video(const std::string& video_id) const {
  const SyntheticVideo* v = corpus_->find_video(video_id);
  if (!v) throw BackendError("unknown video '" + video_id + "'");
  return *v;
}

VideoInfo SimulatedBackend::video_info(const std::string& video_id) {
  const SyntheticVideo& v = require_video(video_id);
  return {v.duration, v.fps};
}

double SimulatedBackend::score_clip(const std::string& video_id, const TimeRange& range,
                                    const std::string& query) {
  const SyntheticVideo& v = require_video(video_id);
  std::string text;
  for (const auto& ev : v.events) {
    if (ev.start < range.end && ev.end > range.start) {
      for (const auto& tag : ev.tags) {
        text += tag;
        text += ' ';
      }
      text += ev.detail;
      text += ' ';
    }
  }
  return relevance(query, text);
}

double SimulatedBackend::score_text(const std::string& query, const std::string& text) {
  return relevance(query, text);
}

std::vector<TextSpan> SimulatedBackend::subtitles(const std::string& video_id) {
  return require_video(video_id).subtitles;
}

std::vector<TextSpan> SimulatedBackend::captions(const std::string& video_id) {
  return require_video(video_id).captions;
}

const QAItem* SimulatedBackend::match_item(const std::string& video_id,
                                           const std::string& query) const {
  const QAItem* best = nullptr;
  double best_score = 0.0;
  for (const auto& item : corpus_->items) {
    if (item.video_id != video_id) continue;
    if (item.question == query) return &item;
    double s = fuzzy_overlap(query, item.question);
    if (s > best_score) {
      best = &item;
      best_score = s;
    }
  }
  if (best && best_score >= config_.fuzzy_match_threshold) return best;
  return nullptr;
}

QaResult SimulatedBackend::video_qa(const QaRequest& request) {
  if (request.frames.empty()) throw DomainError("video_qa: frames must be nonempty");
  const std::string video_id =
      !request.video_id.empty() ? request.video_id : request.frames.front().video_id;
  require_video(video_id);

  const QAItem* item = match_item(video_id, request.query);
  bool hit = false;
  if (item && item->evidence_span) {
    for (const auto& f : request.frames) {
      if (f.video_id == item->video_id && item->evidence_span->contains(f.timestamp)) {
        hit = true;
        break;
      }
    }
  }

  std::uint64_t h = fnv1a(video_id);
  h = fnv1a_mix(h, fnv1a(item ? item->question : request.query));
  h = fnv1a_mix(h, hit ? 1 : 0);
  h = fnv1a_mix(h, request.frames.size());
  h = fnv1a_mix(h, double_bits(request.frames.front().timestamp));
  h = fnv1a_mix(h, double_bits(request.frames.back().timestamp));

  std::string answer;
  if (request.yes_no) {
    answer = hit ? "yes" : "no";
  } else if (!request.choices.empty()) {
    const auto& choices = request.choices;
    const std::size_t n = choices.size();
    std::size_t gold_index = n;
    if (item) {
      auto it = std::find(choices.begin(), choices.end(), item->gold_answer);
      if (it != choices.end()) gold_index = static_cast<std::size_t>(it - choices.begin());
    }
    if (hit && gold_index < n) {
      answer = choices[gold_index];
    } else if (gold_index < n && n > 1) {
      answer = choices[(gold_index + 1 + h % (n - 1)) % n];
    } else {
      answer = choices[h % n];
    }
  } else {
    answer = (hit && item) ? item->gold_answer : "unknown";
  }

  const double lo = hit ? config_.hit_band_lo : config_.miss_band_lo;
  const double hi = hit ? config_.hit_band_hi : config_.miss_band_hi;
  const double target = band_from_hash(h, lo, hi);
  const double l = std::log(target);

  QaResult result;
  result.answer = std::move(answer);
  // Spread around the mean keeps the vector non-trivial while the mean (and
  // therefore the confidence) stays exactly log(target).
  result.token_logprobs = {0.5 * l, 1.5 * l, l};
  result.confidence = compute_confidence(result.token_logprobs);
  result.source = ConfidenceSource::Token;
  return result;
}

const FrameAnnotation* SimulatedBackend::nearest_annotation(const SyntheticVideo& video,
                                                            double timestamp) const {
  const auto& anns = video.frame_annotations;
  if (anns.empty()) return nullptr;
  auto it = anns.lower_bound(timestamp);
  const FrameAnnotation* best = nullptr;
  double best_dist = 0.5;
  if (it != anns.end() && it->first - timestamp <= best_dist) {
    best = &it->second;
    best_dist = it->first - timestamp;
  }
  if (it != anns.begin()) {
    auto prev = std::prev(it);
    // <= prefers the earlier annotation on exact ties.
    if (timestamp - prev->first <= best_dist) best = &prev->second;
  }
  return best;
}

std::string SimulatedBackend::ocr(const Frame& frame) {
  const SyntheticVideo& v = require_video(frame.video_id);
  const FrameAnnotation* ann = nearest_annotation(v, frame.timestamp);
  if (!ann) return "";
  if (frame.crop_box && !frame.crop_box->intersect(ann->ocr_box)) return "";
  return ann->ocr_text;
}

std::vector<Detection> SimulatedBackend::detect(const Frame& frame, const std::string& text,
                                                double text_thr, double box_thr) {
  const SyntheticVideo& v = require_video(frame.video_id);
  const FrameAnnotation* ann = nearest_annotation(v, frame.timestamp);
  std::vector<Detection> out;
  if (!ann) return out;
  for (const auto& det : ann->objects) {
    if (relevance(text, det.label) < text_thr) continue;
    if (det.score < box_thr) continue;
    if (frame.crop_box && !frame.crop_box->intersect(det.box)) continue;
    out.push_back(det);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  return out;
}

std::vector<double> SimulatedBackend::scene_boundaries(const std::string& video_id) {
  return require_video(video_id).scene_boundaries;
}

std::string SimulatedBackend::text_hint(const std::string& video_id, const std::string& query) {
  const SyntheticVideo& v = require_video(video_id);
  struct Scored {
    double score;
    const TextSpan* span;
  };
  std::vector<Scored> scored;
  for (const auto& sub : v.subtitles) {
    double s = relevance(query, sub.text);
    if (s > 0) scored.push_back({s, &sub});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.span->start < b.span->start;
  });
  std::string out;
  for (std::size_t i = 0; i < scored.size() && i < 3; ++i) {
    if (i) out += ' ';
    out += scored[i].span->text;
  }
  return out;
}

}  // namespace vispr
