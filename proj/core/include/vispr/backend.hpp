#pragma once

#include <string>
#include <vector>

#include "vispr/types.hpp"
#include "vispr/world.hpp"

namespace vispr {

struct VideoInfo {
  double duration = 0;
  double fps = 0;
};

enum class ConfidenceSource { Token, Scalar };

inline const char* to_string(ConfidenceSource s) {
  return s == ConfidenceSource::Token ? "token" : "scalar";
}

// videoQA result.  When source == Token, `confidence` equals
// compute_confidence(token_logprobs) bit for bit.
struct QaResult {
  std::string answer;
  Confidence confidence{1.0};
  std::vector<double> token_logprobs;
  ConfidenceSource source = ConfidenceSource::Token;
};

struct QaRequest {
  std::string video_id;
  std::vector<Frame> frames;  // nonempty
  std::string query;
  std::vector<std::string> choices;  // empty = free-form
  bool yes_no = false;
};

// Capability seam for everything the modules cannot compute themselves.
// Implementations must be callable from concurrent executions and must fail
// with typed errors (BackendError) rather than hanging; the executor adds a
// per-statement timeout on top.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual VideoInfo video_info(const std::string& video_id) = 0;
  // Relevance of `query` to the event text overlapping [range).
  virtual double score_clip(const std::string& video_id, const TimeRange& range,
                            const std::string& query) = 0;
  // Relevance of `query` to free text (subtitle ranking).
  virtual double score_text(const std::string& query, const std::string& text) = 0;
  virtual std::vector<TextSpan> subtitles(const std::string& video_id) = 0;
  virtual std::vector<TextSpan> captions(const std::string& video_id) = 0;
  virtual QaResult video_qa(const QaRequest& request) = 0;
  virtual std::string ocr(const Frame& frame) = 0;
  virtual std::vector<Detection> detect(const Frame& frame, const std::string& text,
                                        double text_thr, double box_thr) = 0;
  virtual std::vector<double> scene_boundaries(const std::string& video_id) = 0;
  virtual std::string text_hint(const std::string& video_id, const std::string& query) = 0;
};

}  // namespace vispr
