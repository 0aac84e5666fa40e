#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vispr/backend.hpp"
#include "vispr/types.hpp"
#include "vispr/world.hpp"

namespace vispr {

inline constexpr double kClipWindowSeconds = 10.0;
inline constexpr std::int64_t kMaxFramesPerQaCall = 64;

// What extract_frames can sample from: a whole video, a trimmed range, or
// retrieved clips (sampled over the concatenated clip timeline in list order).
using FrameSource = std::variant<std::string, FrameRange, std::vector<Clip>>;

// The module set.  Signatures mirror the registry; the executor dispatches
// into these after resolving arguments.

std::vector<Clip> get_clips(Backend& backend, const std::string& video_id,
                            const std::string& query, std::int64_t top_k);

std::vector<SpanHit> get_subtitles(Backend& backend, const std::string& video_id,
                                   const std::string& query, std::int64_t top_k);

FrameRange trim_before(Backend& backend, const std::string& video_id, double timestamp,
                       double intervals);

FrameRange trim_after(Backend& backend, const std::string& video_id, double timestamp,
                      double intervals);

FrameRange trim_range(Backend& backend, const std::string& video_id, double start, double end);

// Midpoint-of-bin timestamps (i + 0.5) * total / n over the source timeline,
// deduplicated when fps quantization collides (short videos).
std::vector<Frame> extract_frames(Backend& backend, const FrameSource& source,
                                  std::int64_t num_frames);

McAnswer query_mc(Backend& backend, const std::vector<Frame>& frames, const std::string& query,
                  const std::vector<std::string>& choices);

std::pair<std::string, Confidence> query_yn(Backend& backend, const std::vector<Frame>& frames,
                                            const std::string& query);

// Concatenated OCR text over the frame set (unique, in frame order).  The DSL
// has no frame indexing, so single-frame OCR generalizes to sets.
std::string run_ocr(Backend& backend, const std::vector<Frame>& frames);

std::vector<Detection> detect_object(Backend& backend, const std::vector<Frame>& frames,
                                     const std::string& text, double text_thr, double box_thr);

std::vector<TextSpan> get_subs_range(Backend& backend, const std::string& video_id, double start,
                                     double end);

std::vector<TextSpan> get_caps_range(Backend& backend, const std::string& video_id, double start,
                                     double end);

std::string get_subtitle_hint(Backend& backend, const std::string& video_id,
                              const std::string& query);

std::vector<Frame> crop(const std::vector<Frame>& frames, const Box& box);

std::vector<TimeRange> split_video(Backend& backend, const std::string& video_id);

std::vector<std::string> split_event(const std::string& text);

// Confidence first, answer second.
std::pair<Confidence, std::string> fast_think(Backend& backend, const std::string& video_id,
                                              const std::string& query,
                                              const std::vector<std::string>& choices);

// Uniform subsample down to `cap` frames; identity when already within cap.
std::vector<Frame> cap_frames(const std::vector<Frame>& frames, std::int64_t cap);

}  // namespace vispr
