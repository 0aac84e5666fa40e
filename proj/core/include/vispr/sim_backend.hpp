#pragma once

#include <memory>

#include "vispr/backend.hpp"
#include "vispr/world.hpp"

namespace vispr {

// Confidence bands straddle the 0.75 threshold on purpose: evidence-covered
// answers always clear the gate, uncovered ones never do.
struct SimBackendConfig {
  double hit_band_lo = 0.78;
  double hit_band_hi = 0.95;
  double miss_band_lo = 0.30;
  double miss_band_hi = 0.60;
  // Minimum question-token overlap for fuzzy QA-item matching (supports
  // rewritten questions that share most tokens with the original).
  double fuzzy_match_threshold = 0.5;
};

// Pure function of (corpus, inputs): repeated calls are byte-identical, and
// the whole world is scannable by brute-force oracles.
class SimulatedBackend : public Backend {
 public:
  explicit SimulatedBackend(std::shared_ptr<const Corpus> corpus, SimBackendConfig config = {});

  VideoInfo video_info(const std::string& video_id) override;
  double score_clip(const std::string& video_id, const TimeRange& range,
                    const std::string& query) override;
  double score_text(const std::string& query, const std::string& text) override;
  std::vector<TextSpan> subtitles(const std::string& video_id) override;
  std::vector<TextSpan> captions(const std::string& video_id) override;
  QaResult video_qa(const QaRequest& request) override;
  std::string ocr(const Frame& frame) override;
  std::vector<Detection> detect(const Frame& frame, const std::string& text, double text_thr,
                                double box_thr) override;
  std::vector<double> scene_boundaries(const std::string& video_id) override;
  std::string text_hint(const std::string& video_id, const std::string& query) override;

  const Corpus& corpus() const { return *corpus_; }
  const SimBackendConfig& config() const { return config_; }

  // The QA item a query resolves to: exact question match first, then best
  // fuzzy token overlap >= threshold; ties go to the earliest item.
  const QAItem* match_item(const std::string& video_id, const std::string& query) const;

 private:
  const SyntheticVideo& require_video(const std::string& video_id) const;
  const FrameAnnotation* nearest_annotation(const SyntheticVideo& video, double timestamp) const;

  std::shared_ptr<const Corpus> corpus_;
  SimBackendConfig config_;
};

}  // namespace vispr
