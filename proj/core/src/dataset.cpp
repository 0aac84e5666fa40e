#include "vispr/dataset.hpp"

#include <algorithm>
#include <fstream>

#include "vispr/errors.hpp"
#include "vispr/executor.hpp"
#include "vispr/modules.hpp"
#include "vispr/program.hpp"

namespace vispr {

namespace {

using nlohmann::json;

constexpr const char* kEasySentence = "This is an easy question";
constexpr const char* kDifficultSentence = "This is a difficult question";

std::vector<std::string> modules_of(const Program& p) {
  std::vector<std::string> out;
  for (const auto& st : p.statements) {
    if (std::find(out.begin(), out.end(), st.module) == out.end()) out.push_back(st.module);
  }
  return out;
}

bool reaches_gold(const Program& program, const std::shared_ptr<Backend>& backend,
                  const Registry& registry, const std::string& video_id,
                  const std::string& question, const std::vector<std::string>& choices,
                  const std::string& gold) {
  ExecutionResult res = execute(program, backend, ExecContext{video_id, question, choices},
                                registry);
  return res.ok() && res.answer && answers_match(*res.answer, gold);
}

// Difficult targets carry the difficulty comment and no fast-stage
// statements; the stripped program must still parse and validate.
std::optional<Program> normalize_difficult(const Program& in, const Registry& registry) {
  Program p = in;
  std::erase_if(p.statements, [](const Statement& s) { return s.module == kFastModule; });
  if (p.statements.empty()) return std::nullopt;
  p.planning_text = {kDifficultSentence};
  p.terminated = true;
  if (!p.return_variable) p.return_variable = "answer";
  try {
    return parse(render(p), registry);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::map<std::string, int> count_modules(const std::vector<TrainingRecord>& records,
                                         const Registry& registry) {
  std::map<std::string, int> counts;
  for (const auto& sig : registry.modules()) counts[sig.name] = 0;
  for (const auto& rec : records) {
    for (const auto& m : rec.modules_used) {
      auto it = counts.find(m);
      if (it != counts.end()) it->second += 1;
    }
  }
  return counts;
}

std::map<std::string, int> compute_deficits(const std::map<std::string, int>& counts,
                                            int min_count) {
  std::map<std::string, int> deficits;
  for (const auto& [name, count] : counts) {
    if (count < min_count) deficits[name] = min_count - count;
  }
  return deficits;
}

std::string combo_key(const TrainingRecord& rec) {
  std::vector<std::string> mods = rec.modules_used;
  std::sort(mods.begin(), mods.end());
  std::string key;
  for (const auto& m : mods) {
    if (!key.empty()) key += "+";
    key += m;
  }
  return key;
}

}  // namespace

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Planner: return "planner";
    case Provenance::Rewrite: return "rewrite";
    case Provenance::ParamVariant: return "param_variant";
  }
  return "planner";
}

std::optional<Provenance> provenance_from_string(const std::string& s) {
  for (Provenance p : {Provenance::Planner, Provenance::Rewrite, Provenance::ParamVariant}) {
    if (s == to_string(p)) return p;
  }
  return std::nullopt;
}

void SupportSet::validate(const Registry& registry) const {
  for (std::size_t i = 0; i < exemplars.size(); ++i) {
    try {
      parse(exemplars[i].program_text, registry);
    } catch (const Error& e) {
      throw ValidationError("support exemplar " + std::to_string(i) + ": " + e.what());
    }
  }
}

LabelOutcome label_and_render(const QAItem& item, const std::shared_ptr<Backend>& backend,
                              double tau) {
  if (!backend) throw DomainError("label_and_render: null backend");
  auto [conf, answer] = fast_think(*backend, item.video_id, item.question, item.choices);
  LabelOutcome out;
  out.fast = McAnswer{answer, conf};
  out.difficulty = label_difficulty(answer, item.gold_answer, conf, tau);
  if (out.difficulty == DifficultyLabel::Easy) {
    TrainingRecord rec;
    rec.video_id = item.video_id;
    rec.question = item.question;
    rec.choices = item.choices;
    rec.gold_answer = item.gold_answer;
    rec.difficulty = DifficultyLabel::Easy;
    rec.target_text = SyntheticPlanner::easy_text();
    rec.modules_used = {kFastModule};
    rec.provenance = Provenance::Planner;
    out.easy_record = std::move(rec);
  }
  return out;
}

std::optional<TrainingRecord> propose_and_verify(const QAItem& item, PlannerBackend& planner,
                                                 const std::shared_ptr<Backend>& backend,
                                                 const Registry& registry, int attempts) {
  if (attempts < 1) throw DomainError("propose_and_verify: attempts must be >= 1");
  for (int s = 0; s < attempts; ++s) {
    const std::string text =
        planner.complete({item.id, item.video_id, item.question, item.choices, "", "", s});
    Program proposed;
    try {
      proposed = parse(text, registry);
    } catch (const Error&) {
      continue;
    }
    auto normalized = normalize_difficult(proposed, registry);
    if (!normalized) continue;
    if (!reaches_gold(*normalized, backend, registry, item.video_id, item.question, item.choices,
                      item.gold_answer)) {
      continue;
    }
    TrainingRecord rec;
    rec.video_id = item.video_id;
    rec.question = item.question;
    rec.choices = item.choices;
    rec.gold_answer = item.gold_answer;
    rec.difficulty = DifficultyLabel::Difficult;
    rec.target_text = render(*normalized);
    rec.modules_used = modules_of(*normalized);
    rec.provenance = Provenance::Planner;
    return rec;
  }
  return std::nullopt;
}

BalanceResult balance_modules(std::vector<TrainingRecord> records,
                              const std::vector<QAItem>& items, PlannerBackend& planner,
                              const std::shared_ptr<Backend>& backend, const Registry& registry,
                              int min_count, int budget) {
  if (budget < 0) throw DomainError("balance_modules: budget must be >= 0");
  BalanceResult out;
  out.report.min_count = min_count;
  out.report.counts = count_modules(records, registry);

  int remaining = budget;
  for (const auto& sig : registry.modules()) {
    int& freq = out.report.counts[sig.name];
    if (freq >= min_count || items.empty()) continue;
    // Bound per-module attempts so a planner that can never exercise a module
    // does not soak the whole budget.
    const int cap = 4 * (min_count - freq) + 8;
    int attempts = 0;
    std::size_t item_idx = 0;
    int sample = 0;
    while (freq < min_count && remaining > 0 && attempts < cap) {
      const QAItem& item = items[item_idx % items.size()];
      ++item_idx;
      if (item_idx % items.size() == 0) ++sample;
      ++attempts;
      --remaining;
      out.report.rewrites_attempted += 1;
      std::optional<Rewrite> rw = planner.rewrite({item, sig.name, sample});
      if (!rw) continue;
      Program program;
      try {
        program = parse(rw->program_text, registry);
      } catch (const Error&) {
        continue;
      }
      auto mods = modules_of(program);
      if (std::find(mods.begin(), mods.end(), sig.name) == mods.end()) continue;
      if (!reaches_gold(program, backend, registry, item.video_id, rw->question, item.choices,
                        item.gold_answer)) {
        continue;
      }
      TrainingRecord rec;
      rec.video_id = item.video_id;
      rec.question = rw->question;
      rec.choices = item.choices;
      rec.gold_answer = item.gold_answer;
      rec.difficulty = rw->program_text.find(kEasySentence) != std::string::npos
                           ? DifficultyLabel::Easy
                           : DifficultyLabel::Difficult;
      rec.target_text = rw->program_text;
      rec.modules_used = mods;
      rec.provenance = Provenance::Rewrite;
      records.push_back(std::move(rec));
      out.report.rewrites_added += 1;
      for (const auto& m : mods) {
        auto it = out.report.counts.find(m);
        if (it != out.report.counts.end()) it->second += 1;
      }
    }
  }

  out.report.deficits = compute_deficits(out.report.counts, min_count);
  out.records = std::move(records);
  return out;
}

std::vector<TrainingRecord> retain_variants(const TrainingRecord& record,
                                            const std::shared_ptr<Backend>& backend,
                                            const Registry& registry) {
  if (record.difficulty != DifficultyLabel::Difficult) {
    throw DomainError("retain_variants: record must be difficult-path");
  }
  Program base = parse(record.target_text, registry);
  std::vector<TrainingRecord> out;
  for (const auto& binding : enumerate_bindings(base, registry)) {
    Program variant = substitute(base, binding, registry);
    if (!reaches_gold(variant, backend, registry, record.video_id, record.question,
                      record.choices, record.gold_answer)) {
      continue;
    }
    TrainingRecord rec = record;
    rec.target_text = render(variant);
    rec.modules_used = modules_of(variant);
    rec.provenance = Provenance::ParamVariant;
    out.push_back(std::move(rec));
  }
  return out;
}

DatasetBuild build_dataset(const std::vector<QAItem>& items, PlannerBackend& planner,
                           const std::shared_ptr<Backend>& backend, const Registry& registry,
                           const DatasetOptions& options) {
  if (!(options.tau > 0.0 && options.tau < 1.0)) {
    throw DomainError("build_dataset: tau must be in (0, 1)");
  }
  if (options.attempts < 1) throw DomainError("build_dataset: attempts must be >= 1");

  DatasetBuild out;
  for (const auto& item : items) {
    LabelOutcome label = label_and_render(item, backend, options.tau);
    if (label.easy_record) {
      out.records.push_back(std::move(*label.easy_record));
      continue;
    }
    auto record = propose_and_verify(item, planner, backend, registry, options.attempts);
    if (!record) {
      out.skipped.push_back(item.id);
      continue;
    }
    if (options.retain_param_variants) {
      auto variants = retain_variants(*record, backend, registry);
      out.records.push_back(std::move(*record));
      for (auto& v : variants) out.records.push_back(std::move(v));
    } else {
      out.records.push_back(std::move(*record));
    }
  }

  BalanceResult balanced = balance_modules(std::move(out.records), items, planner, backend,
                                           registry, options.min_count, options.budget);
  out.records = std::move(balanced.records);
  out.report = std::move(balanced.report);

  if (options.combo_cap > 0 || options.max_records > 0) {
    out.records = sample_diverse(out.records, options.combo_cap, options.max_records);
    out.report.counts = count_modules(out.records, registry);
    out.report.deficits = compute_deficits(out.report.counts, options.min_count);
  }
  return out;
}

std::vector<TrainingRecord> sample_diverse(const std::vector<TrainingRecord>& records,
                                           int combo_cap, std::size_t max_records) {
  std::vector<TrainingRecord> out;
  std::map<std::string, int> per_combo;
  for (const auto& rec : records) {
    if (combo_cap > 0 && per_combo[combo_key(rec)] >= combo_cap) continue;
    per_combo[combo_key(rec)] += 1;
    out.push_back(rec);
    if (max_records > 0 && out.size() >= max_records) break;
  }
  return out;
}

std::vector<std::size_t> reverify_dataset(const std::vector<TrainingRecord>& records,
                                          const std::shared_ptr<Backend>& backend,
                                          const Registry& registry) {
  std::vector<std::size_t> failing;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const TrainingRecord& rec = records[i];
    bool ok = false;
    try {
      if (rec.difficulty == DifficultyLabel::Difficult) {
        ok = reaches_gold(parse(rec.target_text, registry), backend, registry, rec.video_id,
                          rec.question, rec.choices, rec.gold_answer);
      } else {
        auto [conf, answer] = fast_think(*backend, rec.video_id, rec.question, rec.choices);
        ok = label_difficulty(answer, rec.gold_answer, conf) == DifficultyLabel::Easy;
      }
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok) failing.push_back(i);
  }
  return failing;
}

json to_json(const TrainingRecord& r) {
  return json{{"schema_version", kDatasetSchemaVersion},
              {"video_id", r.video_id},
              {"question", r.question},
              {"choices", r.choices},
              {"gold_answer", r.gold_answer},
              {"difficulty", to_string(r.difficulty)},
              {"target_text", r.target_text},
              {"modules_used", r.modules_used},
              {"provenance", to_string(r.provenance)},
              {"split", r.split}};
}

TrainingRecord training_record_from_json(const json& j) {
  const int version = j.value("schema_version", 0);
  if (version != kDatasetSchemaVersion) {
    throw ValidationError("unsupported training record schema version " +
                          std::to_string(version));
  }
  TrainingRecord r;
  r.video_id = j.at("video_id").get<std::string>();
  r.question = j.at("question").get<std::string>();
  r.choices = j.at("choices").get<std::vector<std::string>>();
  r.gold_answer = j.at("gold_answer").get<std::string>();
  const std::string difficulty = j.at("difficulty").get<std::string>();
  if (difficulty == "easy") {
    r.difficulty = DifficultyLabel::Easy;
  } else if (difficulty == "difficult") {
    r.difficulty = DifficultyLabel::Difficult;
  } else {
    throw ValidationError("unknown difficulty '" + difficulty + "'");
  }
  r.target_text = j.at("target_text").get<std::string>();
  r.modules_used = j.at("modules_used").get<std::vector<std::string>>();
  auto provenance = provenance_from_string(j.at("provenance").get<std::string>());
  if (!provenance) throw ValidationError("unknown provenance");
  r.provenance = *provenance;
  r.split = j.value("split", "train");
  return r;
}

void save_dataset(const std::filesystem::path& path,
                  const std::vector<TrainingRecord>& records) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write dataset '" + path.string() + "'");
  for (const auto& r : records) out << to_json(r).dump() << "\n";
}

std::vector<TrainingRecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset '" + path.string() + "'");
  std::vector<TrainingRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(training_record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ValidationError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

json to_json(const FrequencyReport& r) {
  return json{{"min_count", r.min_count},
              {"counts", r.counts},
              {"deficits", r.deficits},
              {"rewrites_attempted", r.rewrites_attempted},
              {"rewrites_added", r.rewrites_added}};
}

void save_frequency_report(const std::filesystem::path& path, const FrequencyReport& r) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write frequency report '" + path.string() + "'");
  out << to_json(r).dump(2) << "\n";
}

}  // namespace vispr
