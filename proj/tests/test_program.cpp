#include "vispr/program.hpp"

#include <gtest/gtest.h>

#include "vispr/errors.hpp"

namespace vispr {
namespace {

const Registry& reg() {
  static const Registry r = Registry::builtin();
  return r;
}

constexpr const char* kSlowText =
    "# This is a difficult question\n"
    "clips = get_clips(video_path=v, query=q, top_k=3)\n"
    "frames = extract_frames(video_path=clips, num_frames=16)\n"
    "answer = query_mc(frames=frames, query=q, choices=choices)\n"
    "return answer";

TEST(Parse, SlowProgramShape) {
  const Program p = parse(kSlowText, reg());
  ASSERT_EQ(p.statements.size(), 3u);
  EXPECT_EQ(p.planning_text, std::vector<std::string>{"This is a difficult question"});
  EXPECT_FALSE(p.has_fast_marker);
  EXPECT_TRUE(p.terminated);
  EXPECT_EQ(p.return_variable, "answer");

  const Statement& s0 = p.statements[0];
  EXPECT_EQ(s0.targets, std::vector<std::string>{"clips"});
  EXPECT_EQ(s0.module, "get_clips");
  ASSERT_EQ(s0.args.size(), 3u);
  EXPECT_EQ(s0.args[0].name, "video_path");
  EXPECT_TRUE(s0.args[0].value.is_var);
  EXPECT_EQ(s0.args[2].name, "top_k");
  EXPECT_EQ(s0.args[2].value.lit, Literal::integer(3));
}

TEST(Parse, MultiTargetAndAliases) {
  const Program p = parse(
      "confidence, answer = FastThink(video_path=v, query=q, choices=choices)\nreturn answer",
      reg());
  ASSERT_EQ(p.statements.size(), 1u);
  EXPECT_EQ(p.statements[0].module, "fast_think");  // canonicalized
  EXPECT_EQ(p.statements[0].targets, (std::vector<std::string>{"confidence", "answer"}));
  EXPECT_TRUE(p.has_fast_marker);  // raw text mentions fast_think
}

TEST(Parse, LiteralForms) {
  const Program p = parse(
      "frames = extract_frames(video_path=v, num_frames=8)\n"
      "cropped = crop(frame=frames, box=[0.1, 0.2, 0.9, 0.8])\n"
      "answer = query_mc(frames=cropped, query=\"what color?\", choices=[\"red\", \"blue\"])\n"
      "return answer",
      reg());
  ASSERT_EQ(p.statements.size(), 3u);
  EXPECT_EQ(p.statements[1].args[1].value.lit, Literal::box(Box{0.1, 0.2, 0.9, 0.8}));
  EXPECT_EQ(p.statements[2].args[1].value.lit, Literal::str("what color?"));
  EXPECT_EQ(p.statements[2].args[2].value.lit, Literal::list({"red", "blue"}));
}

TEST(Parse, EmptyListLiteral) {
  const Program p = parse("conf, ans = fast_think(video_path=v, query=q, choices=[])", reg());
  EXPECT_EQ(p.statements[0].args[2].value.lit, Literal::list({}));
}

TEST(Parse, TextAfterReturnIsIgnoredWithWarning) {
  const Program p = parse(
      "answer = fast_think(video_path=v, query=q)\n"
      "return answer\n"
      "garbage that would not parse ( ( (",
      reg());
  EXPECT_TRUE(p.terminated);
  EXPECT_FALSE(p.warnings.empty());
  ASSERT_EQ(p.statements.size(), 1u);
}

TEST(Parse, ErrorsCarryLineNumbers) {
  try {
    parse("clips = get_clips(video_path=v, query=q)\nthis is not a statement", reg());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Parse, RegistryViolations) {
  EXPECT_THROW(parse("x = warp_time(video_path=v)", reg()), ValidationError);
  EXPECT_THROW(parse("answer = query_mc(frames=undefined_var, query=q, choices=choices)", reg()),
               ValidationError);
  EXPECT_THROW(parse("clips = get_clips(query=q)", reg()), ValidationError);  // missing required
  EXPECT_THROW(parse("clips = get_clips(video_path=v, query=q, top_k=\"three\")", reg()),
               ValidationError);  // kind mismatch
  EXPECT_THROW(parse("clips = get_clips(video_path=v, query=q, query=q)", reg()),
               ValidationError);  // duplicate arg
  EXPECT_THROW(
      parse("a, b = get_clips(video_path=v, query=q)", reg()),
      ValidationError);  // too many targets
  EXPECT_THROW(parse("clips = get_clips(video_path=v, query=q, zoom=2)", reg()),
               ValidationError);  // unknown arg
}

TEST(Parse, ContextVariablesPreBound) {
  for (const auto& name : {"v", "q", "video_path", "query", "question", "choices"}) {
    EXPECT_TRUE(is_context_variable(name)) << name;
  }
  EXPECT_FALSE(is_context_variable("clips"));
  // query text referencing all context vars parses without defining them
  EXPECT_NO_THROW(parse("answer = query_mc(frames=video_path, query=question, choices=choices)",
                        reg()));
}

TEST(FastMarker, SubstringRuleOnRawText) {
  EXPECT_TRUE(contains_fast_marker("# fast_reasoning applies"));
  EXPECT_TRUE(contains_fast_marker("x = fast_think(video_path=v, query=q)"));
  // Marker counts even inside comments or unparsable text.
  EXPECT_TRUE(contains_fast_marker("random fast_reasoning garbage ((("));
  EXPECT_FALSE(contains_fast_marker("slow path only"));
  EXPECT_FALSE(contains_fast_marker("fast thinking"));

  const Program p = parse("# the fast_reasoning marker\nclips = get_clips(video_path=v, query=q)",
                          reg());
  EXPECT_TRUE(p.has_fast_marker);
}

TEST(Render, RoundTripsToEqualProgram) {
  const Program p = parse(kSlowText, reg());
  const std::string text = render(p);
  const Program q = parse(text, reg());
  EXPECT_EQ(p, q);
  EXPECT_EQ(render(q), text);  // canonical form is a fixed point
}

TEST(Render, RoundTripsLiteralHeavyPrograms) {
  const char* text =
      "# plan\n"
      "frames = extract_frames(video_path=v, num_frames=8)\n"
      "cropped = crop(frame=frames, box=[0.1, 0.2, 0.9, 0.8])\n"
      "hits = detect_object(frame=cropped, text=\"a \\\"quoted\\\" label\", text_thr=0.5)\n"
      "answer = query_mc(frames=cropped, query=q, choices=[\"red\", \"blue\"])\n"
      "return answer";
  const Program p = parse(text, reg());
  EXPECT_EQ(parse(render(p), reg()), p);
}

TEST(Substitute, ReplacesExplicitLiteral) {
  const Program p = parse(kSlowText, reg());
  const Program q = substitute(p, {0, "top_k", Literal::integer(5)}, reg());
  EXPECT_EQ(q.statements[0].find_arg("top_k")->lit, Literal::integer(5));
  // input untouched
  EXPECT_EQ(p.statements[0].find_arg("top_k")->lit, Literal::integer(3));
}

TEST(Substitute, AddsArgWhenStatementUsedDefault) {
  const Program p = parse(
      "clips = get_clips(video_path=v, query=q)\n"
      "frames = extract_frames(video_path=clips)\n"
      "answer = query_mc(frames=frames, query=q, choices=choices)\n"
      "return answer",
      reg());
  EXPECT_EQ(p.statements[0].find_arg("top_k"), nullptr);
  const Program q = substitute(p, {0, "top_k", Literal::integer(1)}, reg());
  ASSERT_NE(q.statements[0].find_arg("top_k"), nullptr);
  EXPECT_EQ(q.statements[0].find_arg("top_k")->lit, Literal::integer(1));
}

TEST(Substitute, RejectsBadBindings) {
  const Program p = parse(kSlowText, reg());
  EXPECT_THROW(substitute(p, {9, "top_k", Literal::integer(5)}, reg()), ValidationError);
  EXPECT_THROW(substitute(p, {0, "query", Literal::str("x")}, reg()), ValidationError);
  EXPECT_THROW(substitute(p, {0, "top_k", Literal::str("five")}, reg()), ValidationError);
}

TEST(EnumerateBindings, SlowProgramYieldsSevenVariants) {
  // get_clips.top_k has 3 candidates, extract_frames.num_frames has 4.
  const Program p = parse(kSlowText, reg());
  const auto bindings = enumerate_bindings(p, reg());
  ASSERT_EQ(bindings.size(), 7u);
  EXPECT_EQ(bindings[0], (ParamBinding{0, "top_k", Literal::integer(1)}));
  EXPECT_EQ(bindings[1], (ParamBinding{0, "top_k", Literal::integer(3)}));
  EXPECT_EQ(bindings[2], (ParamBinding{0, "top_k", Literal::integer(5)}));
  EXPECT_EQ(bindings[3], (ParamBinding{1, "num_frames", Literal::integer(8)}));
  EXPECT_EQ(bindings[6], (ParamBinding{1, "num_frames", Literal::integer(64)}));
}

TEST(EnumerateBindings, CoversEveryStatementInOrder) {
  const Program p = parse(
      "clips = get_clips(video_path=v, query=q)\n"
      "spans = get_subtitles(video_path=v, query=q, top_k=1)\n"
      "rng = trim_before(video_path=v, timestamp=30.0)\n"
      "return spans",
      reg());
  const auto bindings = enumerate_bindings(p, reg());
  // 3 (top_k) + 3 (top_k) + 4 (intervals)
  ASSERT_EQ(bindings.size(), 10u);
  EXPECT_EQ(bindings[0].statement_index, 0u);
  EXPECT_EQ(bindings[3].statement_index, 1u);
  EXPECT_EQ(bindings[6].statement_index, 2u);
  EXPECT_EQ(bindings[6].param_name, "intervals");
}

TEST(EnumerateBindings, OnlySearchableParamsContribute) {
  const Program p = parse(
      "frames = extract_frames(video_path=v, num_frames=16)\n"
      "answer = query_mc(frames=frames, query=q, choices=choices)\n"
      "return answer",
      reg());
  const auto bindings = enumerate_bindings(p, reg());
  EXPECT_EQ(bindings.size(), 4u);  // query_mc has no searchable params
}

}  // namespace
}  // namespace vispr
