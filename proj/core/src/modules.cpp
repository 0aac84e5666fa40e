#include "vispr/modules.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "vispr/errors.hpp"

namespace vispr {

namespace {

struct Segment {
  std::string video_id;
  double start;
  double end;
  double fps;
};

std::string trim_clause(const std::string& s) {
  const char* cut = " \t\r\n,";
  std::size_t b = s.find_first_not_of(cut);
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(cut);
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<Clip> get_clips(Backend& backend, const std::string& video_id,
                            const std::string& query, std::int64_t top_k) {
  if (top_k < 1) throw DomainError("get_clips: top_k must be >= 1");
  VideoInfo info = backend.video_info(video_id);
  std::vector<Clip> clips;
  for (double start = 0; start < info.duration; start += kClipWindowSeconds) {
    TimeRange range{start, std::min(start + kClipWindowSeconds, info.duration)};
    clips.push_back({video_id, range, backend.score_clip(video_id, range, query)});
  }
  std::stable_sort(clips.begin(), clips.end(), [](const Clip& a, const Clip& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.range.start < b.range.start;
  });
  if (static_cast<std::int64_t>(clips.size()) > top_k) {
    clips.resize(static_cast<std::size_t>(top_k));
  }
  return clips;
}

std::vector<SpanHit> get_subtitles(Backend& backend, const std::string& video_id,
                                   const std::string& query, std::int64_t top_k) {
  if (top_k < 1) throw DomainError("get_subtitles: top_k must be >= 1");
  std::vector<SpanHit> hits;
  for (const auto& sub : backend.subtitles(video_id)) {
    hits.push_back({sub.start, sub.end, sub.text, backend.score_text(query, sub.text)});
  }
  std::stable_sort(hits.begin(), hits.end(), [](const SpanHit& a, const SpanHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.start < b.start;
  });
  if (static_cast<std::int64_t>(hits.size()) > top_k) {
    hits.resize(static_cast<std::size_t>(top_k));
  }
  return hits;
}

FrameRange trim_before(Backend& backend, const std::string& video_id, double timestamp,
                       double intervals) {
  VideoInfo info = backend.video_info(video_id);
  if (timestamp < 0 || timestamp > info.duration) {
    throw DomainError("trim_before: timestamp outside video");
  }
  if (intervals <= 0) throw DomainError("trim_before: intervals must be positive");
  return {video_id, {timestamp, std::min(timestamp + intervals, info.duration)}};
}

FrameRange trim_after(Backend& backend, const std::string& video_id, double timestamp,
                      double intervals) {
  VideoInfo info = backend.video_info(video_id);
  if (timestamp < 0 || timestamp > info.duration) {
    throw DomainError("trim_after: timestamp outside video");
  }
  if (intervals <= 0) throw DomainError("trim_after: intervals must be positive");
  return {video_id, {std::max(timestamp - intervals, 0.0), timestamp}};
}

FrameRange trim_range(Backend& backend, const std::string& video_id, double start, double end) {
  VideoInfo info = backend.video_info(video_id);
  if (!(0 <= start && start <= end && end <= info.duration)) {
    throw DomainError("trim_range: need 0 <= start <= end <= duration");
  }
  return {video_id, {start, end}};
}

std::vector<Frame> extract_frames(Backend& backend, const FrameSource& source,
                                  std::int64_t num_frames) {
  if (num_frames < 1) throw DomainError("extract_frames: num_frames must be >= 1");

  std::vector<Segment> segments;
  if (const auto* video_id = std::get_if<std::string>(&source)) {
    VideoInfo info = backend.video_info(*video_id);
    segments.push_back({*video_id, 0.0, info.duration, info.fps});
  } else if (const auto* range = std::get_if<FrameRange>(&source)) {
    VideoInfo info = backend.video_info(range->video_id);
    segments.push_back({range->video_id, range->range.start, range->range.end, info.fps});
  } else {
    for (const auto& clip : std::get<std::vector<Clip>>(source)) {
      VideoInfo info = backend.video_info(clip.video_id);
      segments.push_back({clip.video_id, clip.range.start, clip.range.end, info.fps});
    }
  }

  double total = 0;
  for (const auto& seg : segments) total += std::max(seg.end - seg.start, 0.0);
  if (total <= 0) return {};

  std::vector<Frame> frames;
  for (std::int64_t i = 0; i < num_frames; ++i) {
    double t = (i + 0.5) * total / static_cast<double>(num_frames);
    double acc = 0;
    for (const auto& seg : segments) {
      double len = std::max(seg.end - seg.start, 0.0);
      if (t <= acc + len || &seg == &segments.back()) {
        Frame f;
        f.video_id = seg.video_id;
        f.timestamp = std::min(seg.start + (t - acc), seg.end);
        frames.push_back(std::move(f));
        break;
      }
      acc += len;
    }
  }

  std::stable_sort(frames.begin(), frames.end(), [](const Frame& a, const Frame& b) {
    if (a.video_id != b.video_id) return a.video_id < b.video_id;
    return a.timestamp < b.timestamp;
  });

  // Two midpoints landing on the same physical frame collapse to one.
  std::vector<Frame> out;
  double fps = segments.front().fps;
  for (const auto& f : frames) {
    if (!out.empty() && out.back().video_id == f.video_id &&
        std::floor(out.back().timestamp * fps) == std::floor(f.timestamp * fps)) {
      continue;
    }
    out.push_back(f);
  }
  return out;
}

std::vector<Frame> cap_frames(const std::vector<Frame>& frames, std::int64_t cap) {
  if (static_cast<std::int64_t>(frames.size()) <= cap) return frames;
  std::vector<Frame> out;
  out.reserve(static_cast<std::size_t>(cap));
  for (std::int64_t j = 0; j < cap; ++j) {
    auto idx = static_cast<std::size_t>((j + 0.5) * static_cast<double>(frames.size()) /
                                        static_cast<double>(cap));
    out.push_back(frames[std::min(idx, frames.size() - 1)]);
  }
  return out;
}

McAnswer query_mc(Backend& backend, const std::vector<Frame>& frames, const std::string& query,
                  const std::vector<std::string>& choices) {
  if (frames.empty()) throw DomainError("query_mc: frames must be nonempty");
  if (choices.empty()) throw DomainError("query_mc: choices must be nonempty");
  QaRequest req;
  req.video_id = frames.front().video_id;
  req.frames = cap_frames(frames, kMaxFramesPerQaCall);
  req.query = query;
  req.choices = choices;
  QaResult res = backend.video_qa(req);
  if (std::find(choices.begin(), choices.end(), res.answer) == choices.end()) {
    throw BackendError("query_mc: backend answered outside the choice list");
  }
  return {res.answer, res.confidence};
}

std::pair<std::string, Confidence> query_yn(Backend& backend, const std::vector<Frame>& frames,
                                            const std::string& query) {
  if (frames.empty()) throw DomainError("query_yn: frames must be nonempty");
  QaRequest req;
  req.video_id = frames.front().video_id;
  req.frames = cap_frames(frames, kMaxFramesPerQaCall);
  req.query = query;
  req.yes_no = true;
  QaResult res = backend.video_qa(req);
  if (res.answer != "yes" && res.answer != "no") {
    throw BackendError("query_yn: backend answer must be yes or no");
  }
  return {res.answer, res.confidence};
}

std::string run_ocr(Backend& backend, const std::vector<Frame>& frames) {
  if (frames.empty()) throw DomainError("run_ocr: frames must be nonempty");
  std::string out;
  std::string last;
  for (const auto& f : frames) {
    std::string text = backend.ocr(f);
    if (text.empty() || text == last) continue;
    if (!out.empty()) out += ' ';
    out += text;
    last = std::move(text);
  }
  return out;
}

std::vector<Detection> detect_object(Backend& backend, const std::vector<Frame>& frames,
                                     const std::string& text, double text_thr, double box_thr) {
  if (frames.empty()) throw DomainError("detect_object: frames must be nonempty");
  std::vector<Detection> out;
  for (const auto& f : frames) {
    for (auto& det : backend.detect(f, text, text_thr, box_thr)) {
      if (std::find(out.begin(), out.end(), det) == out.end()) {
        out.push_back(std::move(det));
      }
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  return out;
}

std::vector<TextSpan> get_subs_range(Backend& backend, const std::string& video_id, double start,
                                     double end) {
  if (start > end) throw DomainError("get_subs_range: start must be <= end");
  std::vector<TextSpan> out;
  for (const auto& sub : backend.subtitles(video_id)) {
    if (sub.start < end && sub.end > start) out.push_back(sub);
  }
  return out;
}

std::vector<TextSpan> get_caps_range(Backend& backend, const std::string& video_id, double start,
                                     double end) {
  if (start > end) throw DomainError("get_caps_range: start must be <= end");
  std::vector<TextSpan> out;
  for (const auto& cap : backend.captions(video_id)) {
    if (cap.start < end && cap.end > start) out.push_back(cap);
  }
  return out;
}

std::string get_subtitle_hint(Backend& backend, const std::string& video_id,
                              const std::string& query) {
  return backend.text_hint(video_id, query);
}

std::vector<Frame> crop(const std::vector<Frame>& frames, const Box& box) {
  if (frames.empty()) throw DomainError("crop: frames must be nonempty");
  if (!box.valid()) throw DomainError("crop: invalid box");
  std::vector<Frame> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    Frame g = f;
    if (g.crop_box) {
      auto inter = g.crop_box->intersect(box);
      if (!inter) throw DomainError("crop: empty intersection with existing crop");
      g.crop_box = *inter;
    } else {
      g.crop_box = box;
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<TimeRange> split_video(Backend& backend, const std::string& video_id) {
  VideoInfo info = backend.video_info(video_id);
  std::vector<TimeRange> out;
  double prev = 0;
  for (double b : backend.scene_boundaries(video_id)) {
    if (b <= prev || b >= info.duration) continue;
    out.push_back({prev, b});
    prev = b;
  }
  out.push_back({prev, info.duration});
  return out;
}

std::vector<std::string> split_event(const std::string& text) {
  static const std::regex kSplit(R"([.!?;]|\b(?:then|after that|next)\b)",
                                 std::regex::icase | std::regex::optimize);
  std::vector<std::string> out;
  std::sregex_token_iterator it(text.begin(), text.end(), kSplit, -1), end;
  for (; it != end; ++it) {
    std::string clause = trim_clause(*it);
    if (!clause.empty()) out.push_back(std::move(clause));
  }
  return out;
}

std::pair<Confidence, std::string> fast_think(Backend& backend, const std::string& video_id,
                                              const std::string& query,
                                              const std::vector<std::string>& choices) {
  std::vector<Frame> frames = extract_frames(backend, FrameSource{video_id}, kMaxFramesPerQaCall);
  if (frames.empty()) throw BackendError("fast_think: video has no frames");
  QaRequest req;
  req.video_id = video_id;
  req.frames = std::move(frames);
  req.query = query;
  req.choices = choices;
  QaResult res = backend.video_qa(req);
  return {res.confidence, res.answer};
}

}  // namespace vispr
