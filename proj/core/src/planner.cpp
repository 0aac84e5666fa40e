#include "vispr/planner.hpp"

#include <algorithm>
#include <set>

#include "vispr/errors.hpp"

namespace vispr {

namespace {

double token_overlap(const std::string& a, const std::string& b) {
  auto ta = tokenize(a);
  auto tb = tokenize(b);
  std::set<std::string> sa(ta.begin(), ta.end());
  std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() || sb.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& t : sa) shared += sb.count(t);
  return static_cast<double>(shared) / static_cast<double>(std::max(sa.size(), sb.size()));
}

template <typename T>
const T& pick_sample(const std::vector<T>& samples, int index) {
  std::size_t i = index < 0 ? 0 : static_cast<std::size_t>(index);
  return samples[std::min(i, samples.size() - 1)];
}

// Statements that exercise one module without disturbing the answer-producing
// tail; aux_* targets stay clear of the tail's variables.
std::string module_exercise(const std::string& module) {
  const std::string frames = "aux_frames = extract_frames(video_path=v, num_frames=8)\n";
  if (module == "get_clips") return "aux_clips = get_clips(video_path=v, query=q, top_k=3)\n";
  if (module == "get_subtitles")
    return "aux_subs = get_subtitles(video_path=v, query=q, top_k=3)\n";
  if (module == "trim_before")
    return "aux_range = trim_before(video_path=v, timestamp=30.0, intervals=20)\n";
  if (module == "trim_after")
    return "aux_range = trim_after(video_path=v, timestamp=30.0, intervals=20)\n";
  if (module == "trim_range")
    return "aux_range = trim_range(video_path=v, start=0.0, end=30.0)\n";
  if (module == "extract_frames") return frames;
  if (module == "query_mc")
    return frames + "aux_mc = query_mc(frames=aux_frames, query=q, choices=choices)\n";
  if (module == "query_yn")
    return frames + "aux_yn, aux_conf = query_yn(frames=aux_frames, query=q)\n";
  if (module == "run_ocr") return frames + "aux_text = run_ocr(frame=aux_frames)\n";
  if (module == "detect_object")
    return frames +
           "aux_dets = detect_object(frame=aux_frames, text=q, text_thr=0.25, box_thr=0.25)\n";
  if (module == "get_subs_range")
    return "aux_subs = get_subs_range(video_path=v, start=0.0, end=30.0)\n";
  if (module == "get_caps_range")
    return "aux_caps = get_caps_range(video_path=v, start=0.0, end=30.0)\n";
  if (module == "get_subtitle_hint")
    return "aux_hint = get_subtitle_hint(video_path=v, query=q)\n";
  if (module == "crop")
    return frames + "aux_crop = crop(frame=aux_frames, box=[0.0, 0.0, 1.0, 1.0])\n";
  if (module == "split_video") return "aux_segs = split_video(video_path=v)\n";
  if (module == "split_event") return "aux_parts = split_event(text=q)\n";
  if (module == "fast_think")
    return "aux_conf, aux_fast = fast_think(video_path=v, query=q, choices=choices)\n";
  return "";
}

const std::vector<std::string>& rewrite_suffixes() {
  static const std::vector<std::string> suffixes = {"exactly", "precisely", "specifically",
                                                    "clearly", "directly"};
  return suffixes;
}

}  // namespace

std::string apply_prior_and_stop(const std::string& full_text, const std::string& prior_output,
                                 const std::string& stop) {
  std::string remainder = full_text;
  if (!prior_output.empty() && remainder.rfind(prior_output, 0) == 0) {
    remainder = remainder.substr(prior_output.size());
  }
  if (!stop.empty()) {
    auto pos = remainder.find(stop);
    if (pos != std::string::npos) remainder = remainder.substr(0, pos);
  }
  return remainder;
}

void ScriptedPlanner::add(const std::string& key, std::string full_text) {
  completions_[key].push_back(std::move(full_text));
}

void ScriptedPlanner::set_default(std::string full_text) {
  default_text_ = std::move(full_text);
}

void ScriptedPlanner::add_rewrite(const std::string& module_name, Rewrite rewrite) {
  rewrites_[module_name].push_back(std::move(rewrite));
}

std::string ScriptedPlanner::complete(const PlannerRequest& request) {
  if (unreachable_) throw PlannerError("scripted planner marked unreachable");
  const std::vector<std::string>* texts = nullptr;
  if (!request.query_id.empty()) {
    auto it = completions_.find(request.query_id);
    if (it != completions_.end()) texts = &it->second;
  }
  if (!texts) {
    auto it = completions_.find(request.query);
    if (it != completions_.end()) texts = &it->second;
  }
  const std::string& full =
      texts ? pick_sample(*texts, request.sample_index)
            : (default_text_ ? *default_text_
                             : throw PlannerError("no scripted completion for query '" +
                                                  request.query + "'"));
  return apply_prior_and_stop(full, request.prior_output, request.stop);
}

std::optional<Rewrite> ScriptedPlanner::rewrite(const RewriteRequest& request) {
  if (unreachable_) throw PlannerError("scripted planner marked unreachable");
  auto it = rewrites_.find(request.module_name);
  if (it == rewrites_.end() || it->second.empty()) return std::nullopt;
  return pick_sample(it->second, request.sample_index);
}

SyntheticPlanner::SyntheticPlanner(std::shared_ptr<const Corpus> corpus)
    : corpus_(std::move(corpus)) {
  if (!corpus_) throw DomainError("SyntheticPlanner: null corpus");
}

std::string SyntheticPlanner::easy_prefix() {
  return "# This is an easy question\n"
         "confidence, answer = fast_think(video_path=v, query=q, choices=choices)\n";
}

std::string SyntheticPlanner::slow_body() {
  return "clips = get_clips(video_path=v, query=q, top_k=3)\n"
         "frames = extract_frames(video_path=clips, num_frames=16)\n"
         "answer = query_mc(frames=frames, query=q, choices=choices)\n";
}

std::string SyntheticPlanner::easy_text() { return easy_prefix() + "return answer"; }

std::string SyntheticPlanner::two_stage_text() {
  return easy_prefix() + slow_body() + "return answer";
}

std::string SyntheticPlanner::difficult_text() {
  return "# This is a difficult question\n" + slow_body() + "return answer";
}

const QAItem* SyntheticPlanner::match_item(const std::string& query_id,
                                           const std::string& query) const {
  if (!query_id.empty()) {
    if (const QAItem* item = corpus_->find_item(query_id)) return item;
  }
  const QAItem* best = nullptr;
  double best_score = 0.0;
  for (const auto& item : corpus_->items) {
    if (item.question == query) return &item;
    double score = token_overlap(item.question, query);
    if (score >= 0.5 && score > best_score) {
      best = &item;
      best_score = score;
    }
  }
  return best;
}

std::string SyntheticPlanner::complete(const PlannerRequest& request) {
  if (unreachable_) throw PlannerError("synthetic planner marked unreachable");
  const QAItem* item = match_item(request.query_id, request.query);
  const bool perceived_easy =
      item && (is_easy_construction(item->construction) ||
               item->construction == Construction::MisperceivedDifficult);
  std::string full;
  if (!item) {
    full = difficult_text();
  } else if (perceived_easy) {
    // First pass emits the short easy completion; a continuation request
    // (prior output present) or a resample (sample_index > 0) means the easy
    // attempt did not stick, so extend into the two-stage program.
    const bool extend = !request.prior_output.empty() || request.sample_index > 0;
    full = extend ? two_stage_text() : easy_text();
  } else {
    full = difficult_text();
  }
  return apply_prior_and_stop(full, request.prior_output, request.stop);
}

std::optional<Rewrite> SyntheticPlanner::rewrite(const RewriteRequest& request) {
  if (unreachable_) throw PlannerError("synthetic planner marked unreachable");
  const std::string exercise = module_exercise(request.module_name);
  if (exercise.empty() && request.module_name != "fast_think") return std::nullopt;

  Rewrite out;
  out.question =
      request.item.question + " " +
      pick_sample(rewrite_suffixes(), request.sample_index % static_cast<int>(
                                          rewrite_suffixes().size()));
  if (is_easy_construction(request.item.construction)) {
    std::string body = request.module_name == "fast_think" ? "" : exercise;
    out.program_text = "# This is an easy question\n" + body +
                       "confidence, answer = fast_think(video_path=v, query=q, choices=choices)\n"
                       "return answer";
  } else {
    out.program_text =
        "# This is a difficult question\n" + exercise + slow_body() + "return answer";
  }
  return out;
}

}  // namespace vispr
