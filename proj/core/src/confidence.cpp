#include "vispr/confidence.hpp"

#include <cmath>

namespace vispr {

Confidence compute_confidence(std::span<const double> token_logprobs) {
  if (token_logprobs.empty()) {
    throw DomainError("compute_confidence: empty logprob list");
  }
  double sum = 0.0;
  for (double lp : token_logprobs) {
    if (lp > 0.0) {
      throw DomainError("compute_confidence: logprob > 0 (" + std::to_string(lp) + ")");
    }
    sum += lp;
  }
  double mean = sum / static_cast<double>(token_logprobs.size());
  return Confidence(std::exp(mean));
}

DifficultyLabel label_difficulty(const std::string& predicted, const std::string& gold,
                                 Confidence conf, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("label_difficulty: tau must lie in (0, 1)");
  }
  // The comparison is strict: confidence exactly at tau is difficult.
  if (answers_match(predicted, gold) && conf.value() > tau) {
    return DifficultyLabel::Easy;
  }
  return DifficultyLabel::Difficult;
}

GapReport confidence_gap_report(std::span<const ConfidenceRecord> records) {
  double sum_c = 0.0, sum_i = 0.0;
  std::size_t n_c = 0, n_i = 0;
  for (const auto& r : records) {
    if (r.correct) {
      sum_c += r.confidence;
      ++n_c;
    } else {
      sum_i += r.confidence;
      ++n_i;
    }
  }
  if (n_c == 0 || n_i == 0) {
    throw DomainError("confidence_gap_report: need at least one correct and one incorrect record");
  }
  GapReport g;
  g.mean_correct = sum_c / static_cast<double>(n_c);
  g.mean_incorrect = sum_i / static_cast<double>(n_i);
  g.delta = g.mean_correct - g.mean_incorrect;
  return g;
}

std::vector<ThresholdPoint> accuracy_above_threshold(std::span<const ConfidenceRecord> records,
                                                     std::span<const double> thresholds) {
  if (records.empty()) {
    throw DomainError("accuracy_above_threshold: no records");
  }
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (thresholds[i] < thresholds[i - 1]) {
      throw DomainError("accuracy_above_threshold: thresholds must be sorted ascending");
    }
  }
  std::vector<ThresholdPoint> out;
  out.reserve(thresholds.size());
  for (double thr : thresholds) {
    std::size_t covered = 0, correct = 0;
    for (const auto& r : records) {
      if (r.confidence >= thr) {
        ++covered;
        if (r.correct) ++correct;
      }
    }
    ThresholdPoint p;
    p.threshold = thr;
    p.coverage = static_cast<double>(covered) / static_cast<double>(records.size());
    if (covered > 0) {
      p.accuracy = static_cast<double>(correct) / static_cast<double>(covered);
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace vispr
