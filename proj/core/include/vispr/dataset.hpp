#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vispr/backend.hpp"
#include "vispr/confidence.hpp"
#include "vispr/planner.hpp"
#include "vispr/registry.hpp"
#include "vispr/world.hpp"

namespace vispr {

inline constexpr int kDatasetSchemaVersion = 1;

enum class Provenance { Planner, Rewrite, ParamVariant };

const char* to_string(Provenance p);
std::optional<Provenance> provenance_from_string(const std::string& s);

// Few-shot exemplars for program proposal.
struct SupportSet {
  struct Exemplar {
    std::string question;
    std::string answer;
    std::string program_text;
  };
  std::vector<Exemplar> exemplars;

  // Throws ValidationError when any exemplar program fails to parse.
  void validate(const Registry& registry) const;
};

struct TrainingRecord {
  std::string video_id;
  std::string question;
  std::vector<std::string> choices;
  std::string gold_answer;
  DifficultyLabel difficulty = DifficultyLabel::Easy;
  std::string target_text;  // supervised completion, parseable under the DSL
  std::vector<std::string> modules_used;
  Provenance provenance = Provenance::Planner;
  std::string split = "train";
};

struct LabelOutcome {
  DifficultyLabel difficulty = DifficultyLabel::Difficult;
  McAnswer fast;  // what the fast stage answered while labeling
  std::optional<TrainingRecord> easy_record;  // present iff difficulty == Easy
};

// Runs the fast stage and applies the difficulty rule; easy items come back
// fully rendered, difficult ones are queued for program proposal.
LabelOutcome label_and_render(const QAItem& item, const std::shared_ptr<Backend>& backend,
                              double tau = 0.75);

// Samples up to `attempts` candidate programs from the planner and keeps the
// first whose execution reproduces the gold answer.  The retained target is
// normalized: difficulty comment, fast-stage statements stripped, and it is
// re-verified after normalization.
std::optional<TrainingRecord> propose_and_verify(const QAItem& item, PlannerBackend& planner,
                                                 const std::shared_ptr<Backend>& backend,
                                                 const Registry& registry, int attempts = 3);

struct FrequencyReport {
  std::map<std::string, int> counts;    // every registry module, zeros included
  std::map<std::string, int> deficits;  // remaining shortfall after balancing
  int min_count = 0;
  int rewrites_attempted = 0;
  int rewrites_added = 0;
};

struct BalanceResult {
  std::vector<TrainingRecord> records;
  FrequencyReport report;
};

// Counts module usage; for each module short of min_count, asks the planner
// for rewritten (question, program) pairs that exercise it, keeping only
// rewrites whose execution reproduces the gold answer.  Each rewrite request
// consumes one unit of budget.  Unmet targets land in the deficit report.
BalanceResult balance_modules(std::vector<TrainingRecord> records,
                              const std::vector<QAItem>& items, PlannerBackend& planner,
                              const std::shared_ptr<Backend>& backend, const Registry& registry,
                              int min_count = 50, int budget = 0);

// One-parameter variants of a difficult record's program that still reach the
// gold answer, as additional records with provenance=param_variant.
std::vector<TrainingRecord> retain_variants(const TrainingRecord& record,
                                            const std::shared_ptr<Backend>& backend,
                                            const Registry& registry);

struct DatasetOptions {
  double tau = 0.75;
  int attempts = 3;
  int min_count = 50;
  int budget = 0;
  bool retain_param_variants = false;
  // Diversity cap: max records per module-combination key; 0 = unlimited.
  int combo_cap = 0;
  std::size_t max_records = 0;  // 0 = unlimited
};

struct DatasetBuild {
  std::vector<TrainingRecord> records;
  FrequencyReport report;
  std::vector<std::string> skipped;  // item ids with no verifiable program
};

DatasetBuild build_dataset(const std::vector<QAItem>& items, PlannerBackend& planner,
                           const std::shared_ptr<Backend>& backend, const Registry& registry,
                           const DatasetOptions& options = {});

// Stable diversity cap: groups records by their sorted module set and keeps
// at most `combo_cap` per group (0 = unlimited), then truncates to
// `max_records` (0 = unlimited), preserving input order throughout.
std::vector<TrainingRecord> sample_diverse(const std::vector<TrainingRecord>& records,
                                           int combo_cap, std::size_t max_records);

// Re-executes every difficult record's target; returns ids (indexes) of
// records that no longer reproduce gold.  Empty result = sound dataset.
std::vector<std::size_t> reverify_dataset(const std::vector<TrainingRecord>& records,
                                          const std::shared_ptr<Backend>& backend,
                                          const Registry& registry);

nlohmann::json to_json(const TrainingRecord& r);
TrainingRecord training_record_from_json(const nlohmann::json& j);

void save_dataset(const std::filesystem::path& path, const std::vector<TrainingRecord>& records);
std::vector<TrainingRecord> load_dataset(const std::filesystem::path& path);

nlohmann::json to_json(const FrequencyReport& r);
void save_frequency_report(const std::filesystem::path& path, const FrequencyReport& r);

}  // namespace vispr
