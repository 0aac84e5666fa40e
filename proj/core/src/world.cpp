#include "vispr/world.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vispr/errors.hpp"
#include "vispr/rng.hpp"

namespace vispr {

namespace {

using nlohmann::json;

// Filler vocabulary.  None of these words appear in question templates, so
// ambient text scores zero against every generated query.
const char* const kAmbientPool[] = {
    "meadow", "crane",   "lantern", "orchard", "harbor",  "violin", "compass", "marble",
    "willow", "falcon",  "ember",   "prairie", "anchor",  "breeze", "canyon",  "drift",
    "garnet", "hollow",  "ivory",   "jasper",  "kiln",    "lagoon", "mosaic",  "nectar",
    "opal",   "pebble",  "quarry",  "ridge",   "saffron", "thicket", "umber",  "vellum",
    "wharf",  "yonder",  "zephyr",  "basil",   "cedar",   "dune",    "fjord",  "grove"};

const char* const kAnswerPool[] = {"crimson", "amber", "cobalt", "jade",   "onyx",   "pearl",
                                   "russet",  "sable", "teal",   "ochre",  "indigo", "slate"};

const char* const kCodeLetters = "bcdfghjkmnpqrstvwxz";
const char* const kCodeDigits = "234679";

constexpr double kClipWindowSeconds = 10.0;
constexpr double kEasySpanLo = 0.15;
constexpr double kEasySpanHi = 0.85;
constexpr int kEasyEventCount = 5;
constexpr int kNoisyDecoyCount = 3;

std::string make_code(Rng& rng, std::set<std::string>& used) {
  for (;;) {
    std::string code;
    code += kCodeLetters[rng.uniform_int(0, 18)];
    code += kCodeLetters[rng.uniform_int(0, 18)];
    code += kCodeDigits[rng.uniform_int(0, 5)];
    code += kCodeLetters[rng.uniform_int(0, 18)];
    if (used.insert(code).second) return code;
  }
}

std::string ambient_word(Rng& rng) {
  return kAmbientPool[rng.uniform_int(0, std::size(kAmbientPool) - 1)];
}

// The evidence phrasing shares exactly {during, the, <code>, segment} with the
// question, and decoys repeat the same subset so their clip scores tie; ties
// resolve to the earlier clip, which is what makes decoys effective.
std::string question_for(const std::string& code) {
  return "What happens during the " + code + " segment?";
}
std::string evidence_detail(const std::string& code, const std::string& gold) {
  return "during the " + code + " segment shows " + gold;
}
std::string decoy_detail(const std::string& code, const std::string& filler) {
  return "during the " + code + " segment shows " + filler;
}

void annotate_event(SyntheticVideo& video, const Event& ev, const std::string& ocr_text,
                    const std::string& code) {
  for (int s = static_cast<int>(std::floor(ev.start)); s < ev.end; ++s) {
    double key = s + 0.5;
    if (key < ev.start || key >= ev.end || key >= video.duration) continue;
    if (video.frame_annotations.count(key)) continue;
    FrameAnnotation ann;
    ann.ocr_text = ocr_text;
    ann.ocr_box = Box{0.1, 0.1, 0.6, 0.3};
    Detection det;
    det.label = code + " marker";
    det.box = Box{0.25, 0.25, 0.85, 0.85};
    det.score = band_from_hash(fnv1a(code + ":" + std::to_string(s)), 0.5, 0.95);
    ann.objects.push_back(det);
    video.frame_annotations.emplace(key, std::move(ann));
  }
}

void add_subtitle(SyntheticVideo& video, double start, const std::string& text) {
  double end = std::min(start + 3.0, video.duration);
  if (end - start < 0.5) return;
  video.subtitles.push_back({start, end, text});
}

// Clip windows wholly outside [span_lo, span_hi]; earliest first, prefix
// before tail, capped at `want`.  Hosts for decoy events.
std::vector<int> outside_windows(double duration, double span_lo, double span_hi, int want) {
  std::vector<int> out;
  for (int w = 0; (w + 1) * kClipWindowSeconds <= span_lo + 1e-9 &&
                  static_cast<int>(out.size()) < want;
       ++w) {
    out.push_back(w);
  }
  for (int w = static_cast<int>(std::ceil(span_hi / kClipWindowSeconds));
       static_cast<int>(out.size()) < want; ++w) {
    if (w * kClipWindowSeconds < span_hi) continue;
    if (w * kClipWindowSeconds + 6.0 > duration) break;
    out.push_back(w);
  }
  return out;
}

struct ItemPlan {
  Construction construction;
};

void validate_video(const SyntheticVideo& v) {
  if (v.id.empty()) throw ValidationError("video id empty");
  if (v.duration <= 0) throw ValidationError(v.id + ": duration must be positive");
  if (v.fps <= 0) throw ValidationError(v.id + ": fps must be positive");
  auto check_span = [&](double s, double e, const char* what) {
    if (!(0 <= s && s < e && e <= v.duration)) {
      throw ValidationError(v.id + ": " + what + " span [" + std::to_string(s) + ", " +
                            std::to_string(e) + ") outside [0, duration]");
    }
  };
  for (const auto& ev : v.events) check_span(ev.start, ev.end, "event");
  for (const auto& s : v.subtitles) check_span(s.start, s.end, "subtitle");
  for (const auto& c : v.captions) check_span(c.start, c.end, "caption");
  double prev = 0;
  for (double b : v.scene_boundaries) {
    if (!(b > prev && b < v.duration)) {
      throw ValidationError(v.id + ": scene boundaries must be strictly increasing in (0, duration)");
    }
    prev = b;
  }
  for (const auto& [ts, ann] : v.frame_annotations) {
    if (ts < 0 || ts > v.duration) throw ValidationError(v.id + ": annotation timestamp outside video");
    if (!ann.ocr_box.valid()) throw ValidationError(v.id + ": invalid ocr box");
    for (const auto& d : ann.objects) {
      if (!d.box.valid()) throw ValidationError(v.id + ": invalid object box");
    }
  }
}

void validate_item(const QAItem& item, const Corpus& corpus) {
  const SyntheticVideo* video = corpus.find_video(item.video_id);
  if (!video) throw ValidationError(item.id + ": unknown video " + item.video_id);
  if (!item.choices.empty() &&
      std::find(item.choices.begin(), item.choices.end(), item.gold_answer) ==
          item.choices.end()) {
    throw ValidationError(item.id + ": gold answer not among choices");
  }
  if (item.evidence_span) {
    if (!(0 <= item.evidence_span->start && item.evidence_span->start < item.evidence_span->end &&
          item.evidence_span->end <= video->duration)) {
      throw ValidationError(item.id + ": evidence span outside video");
    }
  }
}

json box_to_json(const Box& b) { return json::array({b.x0, b.y0, b.x1, b.y1}); }

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ValidationError("box must be a 4-element array");
  return Box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json spans_to_json(const std::vector<TextSpan>& spans) {
  json arr = json::array();
  for (const auto& s : spans) {
    arr.push_back({{"start", s.start}, {"end", s.end}, {"text", s.text}});
  }
  return arr;
}

std::vector<TextSpan> spans_from_json(const json& arr) {
  std::vector<TextSpan> out;
  for (const auto& j : arr) {
    out.push_back({j.at("start").get<double>(), j.at("end").get<double>(),
                   j.at("text").get<std::string>()});
  }
  return out;
}

json video_to_json(const SyntheticVideo& v) {
  json events = json::array();
  for (const auto& ev : v.events) {
    events.push_back(
        {{"start", ev.start}, {"end", ev.end}, {"tags", ev.tags}, {"detail", ev.detail}});
  }
  json anns = json::array();
  for (const auto& [ts, ann] : v.frame_annotations) {
    json objs = json::array();
    for (const auto& d : ann.objects) {
      objs.push_back({{"label", d.label}, {"box", box_to_json(d.box)}, {"score", d.score}});
    }
    anns.push_back({{"timestamp", ts},
                    {"ocr_text", ann.ocr_text},
                    {"ocr_box", box_to_json(ann.ocr_box)},
                    {"objects", objs}});
  }
  return json{{"schema_version", 1},
              {"id", v.id},
              {"duration", v.duration},
              {"fps", v.fps},
              {"events", events},
              {"scene_boundaries", v.scene_boundaries},
              {"subtitles", spans_to_json(v.subtitles)},
              {"captions", spans_to_json(v.captions)},
              {"frame_annotations", anns}};
}

SyntheticVideo video_from_json(const json& j) {
  SyntheticVideo v;
  v.id = j.at("id").get<std::string>();
  v.duration = j.at("duration").get<double>();
  v.fps = j.at("fps").get<double>();
  for (const auto& e : j.at("events")) {
    Event ev;
    ev.start = e.at("start").get<double>();
    ev.end = e.at("end").get<double>();
    ev.tags = e.at("tags").get<std::vector<std::string>>();
    ev.detail = e.at("detail").get<std::string>();
    v.events.push_back(std::move(ev));
  }
  v.scene_boundaries = j.at("scene_boundaries").get<std::vector<double>>();
  v.subtitles = spans_from_json(j.at("subtitles"));
  v.captions = spans_from_json(j.at("captions"));
  for (const auto& a : j.at("frame_annotations")) {
    FrameAnnotation ann;
    ann.ocr_text = a.at("ocr_text").get<std::string>();
    ann.ocr_box = box_from_json(a.at("ocr_box"));
    for (const auto& o : a.at("objects")) {
      ann.objects.push_back({o.at("label").get<std::string>(), box_from_json(o.at("box")),
                             o.at("score").get<double>()});
    }
    v.frame_annotations.emplace(a.at("timestamp").get<double>(), std::move(ann));
  }
  return v;
}

json item_to_json(const QAItem& item) {
  json j{{"id", item.id},
         {"video_id", item.video_id},
         {"question", item.question},
         {"choices", item.choices},
         {"gold_answer", item.gold_answer},
         {"duration_bucket", to_string(item.duration_bucket)},
         {"construction", to_string(item.construction)}};
  if (item.evidence_span) {
    j["evidence_span"] = json::array({item.evidence_span->start, item.evidence_span->end});
  } else {
    j["evidence_span"] = nullptr;
  }
  return j;
}

QAItem item_from_json(const json& j) {
  QAItem item;
  item.id = j.at("id").get<std::string>();
  item.video_id = j.at("video_id").get<std::string>();
  item.question = j.at("question").get<std::string>();
  item.choices = j.at("choices").get<std::vector<std::string>>();
  item.gold_answer = j.at("gold_answer").get<std::string>();
  auto bucket = duration_bucket_from_string(j.at("duration_bucket").get<std::string>());
  if (!bucket) throw ValidationError(item.id + ": bad duration bucket");
  item.duration_bucket = *bucket;
  auto construction = construction_from_string(j.at("construction").get<std::string>());
  if (!construction) throw ValidationError(item.id + ": bad construction tag");
  item.construction = *construction;
  if (!j.at("evidence_span").is_null()) {
    const auto& span = j.at("evidence_span");
    item.evidence_span = TimeRange{span.at(0).get<double>(), span.at(1).get<double>()};
  }
  return item;
}

json spec_to_json(const CorpusSpec& s) {
  return json{{"n_videos", s.n_videos},
              {"duration_range", json::array({s.duration_range.first, s.duration_range.second})},
              {"qa_per_video", s.qa_per_video},
              {"easy_fraction", s.easy_fraction},
              {"noisy_easy_fraction", s.noisy_easy_fraction},
              {"misperceived_fraction", s.misperceived_fraction},
              {"decoy_fraction", s.decoy_fraction}};
}

CorpusSpec spec_from_json(const json& j) {
  CorpusSpec s;
  s.n_videos = j.at("n_videos").get<int>();
  s.duration_range = {j.at("duration_range").at(0).get<double>(),
                      j.at("duration_range").at(1).get<double>()};
  s.qa_per_video = j.at("qa_per_video").get<int>();
  s.easy_fraction = j.at("easy_fraction").get<double>();
  s.noisy_easy_fraction = j.value("noisy_easy_fraction", s.noisy_easy_fraction);
  s.misperceived_fraction = j.value("misperceived_fraction", s.misperceived_fraction);
  s.decoy_fraction = j.value("decoy_fraction", s.decoy_fraction);
  return s;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace

const char* to_string(DurationBucket b) {
  switch (b) {
    case DurationBucket::Short: return "short";
    case DurationBucket::Medium: return "medium";
    case DurationBucket::Long: return "long";
  }
  return "short";
}

std::optional<DurationBucket> duration_bucket_from_string(const std::string& s) {
  if (s == "short") return DurationBucket::Short;
  if (s == "medium") return DurationBucket::Medium;
  if (s == "long") return DurationBucket::Long;
  return std::nullopt;
}

DurationBucket bucket_for_duration(double seconds) {
  if (seconds < kShortMaxSeconds) return DurationBucket::Short;
  if (seconds < kMediumMaxSeconds) return DurationBucket::Medium;
  return DurationBucket::Long;
}

const char* to_string(Construction c) {
  switch (c) {
    case Construction::Easy: return "easy";
    case Construction::NoisyEasy: return "noisy_easy";
    case Construction::Difficult: return "difficult";
    case Construction::DecoyDifficult: return "decoy_difficult";
    case Construction::MisperceivedDifficult: return "misperceived_difficult";
  }
  return "easy";
}

std::optional<Construction> construction_from_string(const std::string& s) {
  if (s == "easy") return Construction::Easy;
  if (s == "noisy_easy") return Construction::NoisyEasy;
  if (s == "difficult") return Construction::Difficult;
  if (s == "decoy_difficult") return Construction::DecoyDifficult;
  if (s == "misperceived_difficult") return Construction::MisperceivedDifficult;
  return std::nullopt;
}

bool is_easy_construction(Construction c) {
  return c == Construction::Easy || c == Construction::NoisyEasy;
}

const SyntheticVideo* Corpus::find_video(const std::string& id) const {
  for (const auto& v : videos) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

const QAItem* Corpus::find_item(const std::string& id) const {
  for (const auto& item : items) {
    if (item.id == id) return &item;
  }
  return nullptr;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double relevance(const std::string& query, const std::string& span_text) {
  std::set<std::string> wanted;
  for (auto& t : tokenize(query)) wanted.insert(std::move(t));
  if (wanted.empty()) return 0.0;
  std::set<std::string> have;
  for (auto& t : tokenize(span_text)) have.insert(std::move(t));
  std::size_t hit = 0;
  for (const auto& t : wanted) {
    if (have.count(t)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(wanted.size());
}

Corpus generate_corpus(std::uint64_t seed, const CorpusSpec& spec) {
  if (spec.n_videos < 1) throw DomainError("n_videos must be positive");
  if (spec.qa_per_video < 1) throw DomainError("qa_per_video must be positive");
  if (spec.duration_range.first <= 0 || spec.duration_range.second < spec.duration_range.first) {
    throw DomainError("duration_range must be positive and ordered");
  }
  if (spec.easy_fraction < 0 || spec.easy_fraction > 1) {
    throw DomainError("easy_fraction must be in [0, 1]");
  }

  Rng rng(seed);
  Corpus corpus;
  corpus.seed = seed;
  corpus.spec = spec;

  const int total = spec.n_videos * spec.qa_per_video;
  const int n_easy = static_cast<int>(std::llround(spec.easy_fraction * total));
  const int n_difficult = total - n_easy;
  const int n_noisy =
      std::min(n_easy, static_cast<int>(std::llround(spec.noisy_easy_fraction * n_easy)));
  const int n_misperceived = std::min(
      n_difficult, static_cast<int>(std::llround(spec.misperceived_fraction * n_difficult)));
  const int n_decoy =
      std::min(n_difficult - n_misperceived,
               static_cast<int>(std::llround(spec.decoy_fraction * n_difficult)));

  std::vector<ItemPlan> plans;
  plans.reserve(total);
  for (int i = 0; i < n_noisy; ++i) plans.push_back({Construction::NoisyEasy});
  for (int i = n_noisy; i < n_easy; ++i) plans.push_back({Construction::Easy});
  for (int i = 0; i < n_misperceived; ++i) plans.push_back({Construction::MisperceivedDifficult});
  for (int i = 0; i < n_decoy; ++i) plans.push_back({Construction::DecoyDifficult});
  for (int i = n_misperceived + n_decoy; i < n_difficult; ++i) {
    plans.push_back({Construction::Difficult});
  }
  rng.shuffle(plans);

  std::set<std::string> used_codes;
  std::vector<std::string> answer_pool(std::begin(kAnswerPool), std::end(kAnswerPool));

  for (int vi = 0; vi < spec.n_videos; ++vi) {
    SyntheticVideo video;
    {
      std::ostringstream id;
      id << "vid_" << std::setw(3) << std::setfill('0') << vi;
      video.id = id.str();
    }
    video.duration =
        std::round(rng.uniform(spec.duration_range.first, spec.duration_range.second));
    video.duration = std::clamp(video.duration, spec.duration_range.first,
                                spec.duration_range.second);
    video.fps = 1.0;
    const double d = video.duration;

    // Ambient captions, one per clip window.
    for (double w = 0; w < d; w += kClipWindowSeconds) {
      video.captions.push_back(
          {w, std::min(w + kClipWindowSeconds, d), ambient_word(rng) + " " + ambient_word(rng) + " scene"});
    }
    // Ambient events and occasional ambient subtitles.
    for (double t = 5.0; t + 2.0 < d; t += 8.0 + static_cast<double>(rng.uniform_int(0, 6))) {
      video.events.push_back({t, t + 2.0, {"ambient"}, ambient_word(rng) + " " + ambient_word(rng)});
      if (rng.uniform_int(0, 3) == 0) {
        add_subtitle(video, t, "chatter about " + ambient_word(rng));
      }
    }
    // Scene boundaries.
    {
      int nb = static_cast<int>(rng.uniform_int(3, 6));
      double prev = 0;
      for (int b = 1; b <= nb; ++b) {
        double pos = std::round(b * d / (nb + 1) + rng.uniform(-3.0, 3.0));
        if (pos > prev + 1 && pos < d - 1) {
          video.scene_boundaries.push_back(pos);
          prev = pos;
        }
      }
    }

    std::set<int> used_k;
    for (int qi = 0; qi < spec.qa_per_video; ++qi) {
      const ItemPlan& plan = plans[static_cast<std::size_t>(vi * spec.qa_per_video + qi)];
      const std::string code = make_code(rng, used_codes);

      std::vector<std::string> pool = answer_pool;
      rng.shuffle(pool);
      std::vector<std::string> choices(pool.begin(), pool.begin() + 4);
      const std::string gold = choices[static_cast<std::size_t>(rng.uniform_int(0, 3))];

      QAItem item;
      item.id = video.id + "#q" + std::to_string(qi);
      item.video_id = video.id;
      item.question = question_for(code);
      item.choices = choices;
      item.gold_answer = gold;
      item.duration_bucket = bucket_for_duration(d);
      item.construction = plan.construction;

      if (is_easy_construction(plan.construction)) {
        const double lo = kEasySpanLo * d;
        const double hi = kEasySpanHi * d;
        item.evidence_span = TimeRange{lo, hi};
        for (int e = 0; e < kEasyEventCount; ++e) {
          double center = lo + (e + 0.5) * (hi - lo) / kEasyEventCount;
          Event ev{std::max(center - 1.0, lo), std::min(center + 1.0, hi),
                   {code, "segment"},
                   evidence_detail(code, gold)};
          annotate_event(video, ev, gold, code);
          if (e == 0 || e == kEasyEventCount - 1) {
            add_subtitle(video, ev.start, "someone mentions the " + code + " segment");
          }
          video.events.push_back(std::move(ev));
        }
        if (plan.construction == Construction::NoisyEasy) {
          for (int w : outside_windows(d, lo, hi, kNoisyDecoyCount)) {
            double s = w * kClipWindowSeconds + 4.0;
            video.events.push_back(
                {s, s + 2.0, {code, "segment"}, decoy_detail(code, ambient_word(rng))});
          }
        }
      } else {
        // Narrow span centered at k*d/8: those centers are the only points
        // missed by every (i+0.5)*d/n midpoint grid for n in {8,16,32,64}
        // (in d/128 units the grids cover all integers except multiples of
        // 16).  Half-width stays under d/128 so the whole span is dodged.
        const double half = std::min(1.0, d / 160.0);
        std::vector<int> ks{1, 2, 3, 4, 5, 6, 7};
        rng.shuffle(ks);
        int chosen = 0;
        for (int k : ks) {
          double a = k * d / 8.0 - half, b = k * d / 8.0 + half;
          if (used_k.count(k) || b >= d || a <= 0) continue;
          if (std::floor(a / kClipWindowSeconds) == std::floor(b / kClipWindowSeconds)) {
            chosen = k;
            break;
          }
        }
        if (chosen == 0) {
          for (int k : ks) {
            if (!used_k.count(k)) {
              chosen = k;
              break;
            }
          }
        }
        if (chosen == 0) chosen = ks[0];
        used_k.insert(chosen);

        const double center = chosen * d / 8.0;
        const double a = std::max(center - half, 0.0);
        const double b = std::min(center + half, d);
        item.evidence_span = TimeRange{a, b};
        Event ev{a, b, {code, "segment"}, evidence_detail(code, gold)};
        annotate_event(video, ev, gold, code);
        add_subtitle(video, a, "someone mentions the " + code + " segment");
        video.events.push_back(std::move(ev));

        if (plan.construction == Construction::DecoyDifficult) {
          int evidence_window = static_cast<int>(std::floor(a / kClipWindowSeconds));
          int wd = evidence_window >= 2 ? evidence_window - 2
                                        : (evidence_window >= 1 ? evidence_window - 1 : -1);
          if (wd >= 0) {
            double s = wd * kClipWindowSeconds + 4.0;
            video.events.push_back(
                {s, s + 2.0, {code, "segment"}, decoy_detail(code, ambient_word(rng))});
          }
        }
      }

      corpus.items.push_back(std::move(item));
    }

    std::sort(video.events.begin(), video.events.end(),
              [](const Event& x, const Event& y) { return x.start < y.start; });
    std::sort(video.subtitles.begin(), video.subtitles.end(),
              [](const TextSpan& x, const TextSpan& y) { return x.start < y.start; });
    validate_video(video);
    corpus.videos.push_back(std::move(video));
  }

  for (const auto& item : corpus.items) validate_item(item, corpus);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "videos");
  json manifest{{"schema_version", 1},
                {"seed", corpus.seed},
                {"spec", spec_to_json(corpus.spec)},
                {"videos", json::array()},
                {"items", json::array()}};
  for (const auto& v : corpus.videos) {
    manifest["videos"].push_back(v.id);
    write_json_file(dir / "videos" / (v.id + ".json"), video_to_json(v));
  }
  for (const auto& item : corpus.items) {
    manifest["items"].push_back(item_to_json(item));
  }
  write_json_file(dir / "manifest.json", manifest);
}

Corpus load_corpus(const std::filesystem::path& dir) {
  json manifest = read_json_file(dir / "manifest.json");
  Corpus corpus;
  corpus.seed = manifest.at("seed").get<std::uint64_t>();
  corpus.spec = spec_from_json(manifest.at("spec"));
  for (const auto& id : manifest.at("videos")) {
    SyntheticVideo v = video_from_json(read_json_file(dir / "videos" / (id.get<std::string>() + ".json")));
    validate_video(v);
    corpus.videos.push_back(std::move(v));
  }
  for (const auto& j : manifest.at("items")) {
    corpus.items.push_back(item_from_json(j));
  }
  for (const auto& item : corpus.items) validate_item(item, corpus);
  return corpus;
}

nlohmann::json corpus_spec_to_json(const CorpusSpec& spec) { return spec_to_json(spec); }

CorpusSpec corpus_spec_from_json(const nlohmann::json& j) { return spec_from_json(j); }

nlohmann::json qa_item_to_json(const QAItem& item) { return item_to_json(item); }

QAItem qa_item_from_json(const nlohmann::json& j) { return item_from_json(j); }

}  // namespace vispr
