#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vispr/types.hpp"

namespace vispr {

enum class DifficultyLabel { Easy, Difficult };

inline const char* to_string(DifficultyLabel d) {
  return d == DifficultyLabel::Easy ? "easy" : "difficult";
}

// Confidence of a decoded answer: exp of the mean log-likelihood of its
// tokens. Every logprob must be <= 0; positive values are protocol errors
// from the producing adapter and are rejected rather than clamped.
Confidence compute_confidence(std::span<const double> token_logprobs);

// Difficulty of a training item: easy only when the prediction matched the
// gold answer AND confidence strictly exceeded tau.
DifficultyLabel label_difficulty(const std::string& predicted, const std::string& gold,
                                 Confidence conf, double tau = 0.75);

struct ConfidenceRecord {
  double confidence = 0.0;
  bool correct = false;
};

// Mean confidence per correctness class and their gap.
struct GapReport {
  double mean_correct = 0.0;
  double mean_incorrect = 0.0;
  double delta = 0.0;  // mean_correct - mean_incorrect
};

GapReport confidence_gap_report(std::span<const ConfidenceRecord> records);

struct ThresholdPoint {
  double threshold = 0.0;
  std::optional<double> accuracy;  // absent when no record clears the threshold
  double coverage = 0.0;           // fraction of records with confidence >= threshold
};

// Accuracy and coverage restricted to records at or above each threshold.
// Thresholds must be sorted ascending.
std::vector<ThresholdPoint> accuracy_above_threshold(std::span<const ConfidenceRecord> records,
                                                     std::span<const double> thresholds);

}  // namespace vispr
