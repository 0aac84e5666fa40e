#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vispr/errors.hpp"

namespace vispr {

// Axis-aligned box in unit coordinates (resolution independent).
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  bool operator==(const Box&) const = default;

  bool valid() const { return x0 >= 0.0 && y0 >= 0.0 && x1 <= 1.0 && y1 <= 1.0 && x0 < x1 && y0 < y1; }

  // Intersection, or nullopt when the boxes do not overlap.
  std::optional<Box> intersect(const Box& other) const {
    Box r{std::max(x0, other.x0), std::max(y0, other.y0), std::min(x1, other.x1), std::min(y1, other.y1)};
    if (r.x0 >= r.x1 || r.y0 >= r.y1) return std::nullopt;
    return r;
  }
};

// Half-open time interval [start, end) in seconds.
struct TimeRange {
  double start = 0.0;
  double end = 0.0;

  bool operator==(const TimeRange&) const = default;
  double length() const { return end - start; }
  bool empty() const { return end <= start; }
  bool contains(double t) const { return t >= start && t < end; }
  bool intersects(const TimeRange& o) const { return start < o.end && o.start < end; }
};

// A selected span of one video, produced by the trim modules.
struct FrameRange {
  std::string video_id;
  TimeRange range;

  bool operator==(const FrameRange&) const = default;
};

// One sampled frame; crop_box narrows the visible region.
struct Frame {
  std::string video_id;
  double timestamp = 0.0;
  std::optional<Box> crop_box;

  bool operator==(const Frame&) const = default;
};

// Retrieval result over 10-second clips.
struct Clip {
  std::string video_id;
  TimeRange range;
  double score = 0.0;

  bool operator==(const Clip&) const = default;
};

// Timed text (subtitle or caption) with an optional retrieval score.
struct SpanHit {
  double start = 0.0;
  double end = 0.0;
  std::string text;
  double score = 0.0;

  bool operator==(const SpanHit&) const = default;
};

// One detected object.
struct Detection {
  std::string label;
  Box box;
  double score = 0.0;

  bool operator==(const Detection&) const = default;
};

// Model confidence, exp of the mean token log-likelihood; always in (0, 1].
class Confidence {
public:
  Confidence() = default;
  explicit Confidence(double v) : value_(v) {
    if (!(v > 0.0 && v <= 1.0)) {
      throw DomainError("confidence must lie in (0, 1], got " + std::to_string(v));
    }
  }
  double value() const { return value_; }

  bool operator==(const Confidence&) const = default;

private:
  double value_ = 1.0;
};

// Answer to a multiple-choice question; choice is a member of the offered options.
struct McAnswer {
  std::string choice;
  Confidence confidence;

  bool operator==(const McAnswer&) const = default;
};

// Answer comparison used for gold checks: whitespace-trimmed exact match.
inline std::string trim_copy(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool answers_match(const std::string& predicted, const std::string& gold) {
  return trim_copy(predicted) == trim_copy(gold);
}

}  // namespace vispr
