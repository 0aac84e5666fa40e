#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vispr/world.hpp"

namespace vispr {

// One text-completion request.  `stop` truncates the completion before the
// stop sequence's first occurrence; `prior_output` asks the planner to
// continue generating after text it already produced for this query.
struct PlannerRequest {
  std::string query_id;
  std::string video_ref;
  std::string query;
  std::vector<std::string> choices;
  std::string stop;
  std::string prior_output;
  int sample_index = 0;
};

struct RewriteRequest {
  QAItem item;
  std::string module_name;
  int sample_index = 0;
};

// A rewritten (question, program) pair exercising a requested module.
struct Rewrite {
  std::string question;
  std::string program_text;
};

class PlannerBackend {
 public:
  virtual ~PlannerBackend() = default;
  virtual std::string complete(const PlannerRequest& request) = 0;
  virtual std::optional<Rewrite> rewrite(const RewriteRequest& request) {
    (void)request;
    return std::nullopt;
  }
  virtual bool healthy() const { return true; }
};

// Applies the continuation/stop mechanics shared by the local planners: drop
// the already-produced prefix, then cut before the stop sequence.
std::string apply_prior_and_stop(const std::string& full_text, const std::string& prior_output,
                                 const std::string& stop);

// Replays canned full-text completions keyed by query id (falling back to the
// query text).  Multiple entries per key are cycled by sample_index (clamped
// to the last).  Deterministic; throws PlannerError for unknown keys unless a
// default text is set, and always when marked unreachable.
class ScriptedPlanner : public PlannerBackend {
 public:
  ScriptedPlanner() = default;

  void add(const std::string& key, std::string full_text);
  void set_default(std::string full_text);
  void add_rewrite(const std::string& module_name, Rewrite rewrite);
  void set_unreachable(bool value) { unreachable_ = value; }

  std::string complete(const PlannerRequest& request) override;
  std::optional<Rewrite> rewrite(const RewriteRequest& request) override;
  bool healthy() const override { return !unreachable_; }

 private:
  std::map<std::string, std::vector<std::string>> completions_;
  std::map<std::string, std::vector<Rewrite>> rewrites_;
  std::optional<std::string> default_text_;
  bool unreachable_ = false;
};

// Stands in for the fine-tuned planner: consults the corpus item matching the
// query and emits the difficulty-labelled completion its training targets
// would contain — the fast marker line for items it perceives as easy (clean,
// noisy, and misperceived-difficult ones), a planning comment plus retrieval
// program for the rest.  Continuations extend an easy prefix with the slow
// program.
class SyntheticPlanner : public PlannerBackend {
 public:
  explicit SyntheticPlanner(std::shared_ptr<const Corpus> corpus);

  std::string complete(const PlannerRequest& request) override;
  std::optional<Rewrite> rewrite(const RewriteRequest& request) override;
  void set_unreachable(bool value) { unreachable_ = value; }
  bool healthy() const override { return !unreachable_; }

  // Completion building blocks, exposed so fixtures and the dataset builder
  // can render the same targets.
  static std::string easy_prefix();                 // marker line, no terminator
  static std::string slow_body();                   // retrieval program, no terminator
  static std::string difficult_text();              // comment + slow body + return
  static std::string easy_text();                   // marker line + return
  static std::string two_stage_text();              // marker line + slow body + return

  const QAItem* match_item(const std::string& query_id, const std::string& query) const;

 private:
  std::shared_ptr<const Corpus> corpus_;
  bool unreachable_ = false;
};

}  // namespace vispr
