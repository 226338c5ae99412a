#include <gtest/gtest.h>

#include <cmath>

#include "socialsim/policy.hpp"
#include "socialsim/transport.hpp"

using namespace socialsim;

namespace {

Feed three_post_feed() {
    Feed f;
    f.entries = {{PostId{10}, 3, 1, FeedSource::Followed},
                 {PostId{11}, 0, 0, FeedSource::Followed},
                 {PostId{42}, 7, 2, FeedSource::Algorithmic}};
    return f;
}

DecisionContext context(NormRegime regime, LoadLevel load = LoadLevel::High) {
    DecisionContext ctx;
    ctx.feed = three_post_feed();
    ctx.contents = {"first post", "second post", "third post"};
    ctx.profile = {AgentId{5}, "user_5", {"chips", "deepseek"}, true, false};
    ctx.recent_history = {{ActionKind::Like, PostId{3}, 1}};
    ctx.regime = regime;
    ctx.load = load;
    ctx.now = 7;
    return ctx;
}

}  // namespace

TEST(Prompt, NormFragmentOnlyInNormRegimes) {
    const auto none = build_prompt(context(NormRegime::NoNorm));
    const auto like = build_prompt(context(NormRegime::LikeDominant));
    const auto repost = build_prompt(context(NormRegime::RepostDominant));
    EXPECT_EQ(none.text().find("Community context"), std::string::npos);
    EXPECT_NE(like.system.find(std::string(norm_prompt_fragment(NormRegime::LikeDominant))), std::string::npos);
    EXPECT_NE(repost.system.find(std::string(norm_prompt_fragment(NormRegime::RepostDominant))), std::string::npos);
}

TEST(Prompt, ShowsFeedWithCountersAndHidesLoad) {
    const auto low = build_prompt(context(NormRegime::NoNorm, LoadLevel::Lowest));
    const auto high = build_prompt(context(NormRegime::NoNorm, LoadLevel::High));
    EXPECT_EQ(low.text(), high.text());
    EXPECT_NE(low.user.find("[post_id=42] likes=7 reshares=2\nthird post"), std::string::npos);
    EXPECT_NE(low.user.find("- like post 3"), std::string::npos);
    EXPECT_NE(low.user.find("chips, deepseek"), std::string::npos);
}

TEST(Prompt, PureFunctionOfContext) {
    EXPECT_EQ(build_prompt(context(NormRegime::LikeDominant)).text(),
              build_prompt(context(NormRegime::LikeDominant)).text());
}

TEST(Parse, ValidResponses) {
    const auto feed = three_post_feed();
    EXPECT_TRUE(parse_response(R"({"action":"read"})", feed).decision.is_read_all());
    const auto like = parse_response(R"({"action":"like","post_id":42})", feed);
    EXPECT_FALSE(like.warning);
    EXPECT_EQ(like.decision, Decision::engage(PostId{42}, ActionKind::Like));
    const auto quote = parse_response("Sure!\n```json\n{\"action\": \"Quote\", \"post_id\": 10, \"comment\": \"hm\"}\n```",
                                      feed);
    EXPECT_FALSE(quote.warning);
    EXPECT_EQ(quote.decision, Decision::engage(PostId{10}, ActionKind::Quote, "hm"));
    const auto repost = parse_response(R"({"action":"REPOST","post_id":11,"comment":"ignored"})", feed);
    EXPECT_EQ(repost.decision, Decision::engage(PostId{11}, ActionKind::Repost));
}

TEST(Parse, InvariantViolationsDegradeToReadAll) {
    const auto feed = three_post_feed();
    for (const char* raw : {
             "",
             "not json at all",
             "[1, 2, 3]",
             R"({"post_id": 10})",
             R"({"action": 5, "post_id": 10})",
             R"({"action": "share", "post_id": 10})",
             R"({"action": "like"})",
             R"({"action": "like", "post_id": 99})",
             R"({"action": "like", "post_id": -1})",
             R"({"action": "like", "post_id": "10"})",
             R"({"action": "like", "post_id": 10.5})",
             R"({"action": "quote", "post_id": 10})",
             R"({"action": "quote", "post_id": 10, "comment": ""})",
             R"({"action": "quote", "post_id": 10, "comment": 3})",
             "{\"action\": \"like\", \"post_id\": 10",
         }) {
        const auto out = parse_response(raw, feed);
        EXPECT_TRUE(out.decision.is_read_all()) << raw;
        EXPECT_TRUE(out.warning.has_value()) << raw;
    }
}

TEST(Parse, EmptyFeedOnlyAllowsRead) {
    const Feed empty;
    EXPECT_TRUE(parse_response(R"({"action":"like","post_id":0})", empty).decision.is_read_all());
}

TEST(Decision, Validity) {
    const auto feed = three_post_feed();
    EXPECT_TRUE(is_valid_decision(Decision::read_all(), feed));
    EXPECT_TRUE(is_valid_decision(Decision::engage(PostId{10}, ActionKind::Like), feed));
    EXPECT_FALSE(is_valid_decision(Decision::engage(PostId{9}, ActionKind::Like), feed));
    EXPECT_FALSE(is_valid_decision(Decision::engage(PostId{10}, ActionKind::Quote), feed));
    EXPECT_FALSE(is_valid_decision(Decision::engage(PostId{10}, ActionKind::Like, "x"), feed));
    EXPECT_FALSE(is_valid_decision(Decision::engage(PostId{10}, ActionKind::Read), feed));
}

TEST(Scripted, ConsumesStepsThenReads) {
    ScriptedPolicy p(ScriptedSpec{{{ActionKind::Like, 2, ""}, {ActionKind::Quote, 0, "q"}, {ActionKind::Repost, 9, ""}}});
    CounterRng rng(1);
    const auto ctx = context(NormRegime::NoNorm);
    EXPECT_EQ(p.decide(ctx, rng), Decision::engage(PostId{42}, ActionKind::Like));
    EXPECT_EQ(p.decide(ctx, rng), Decision::engage(PostId{10}, ActionKind::Quote, "q"));
    EXPECT_TRUE(p.decide(ctx, rng).is_read_all());  // position out of range
    EXPECT_TRUE(p.decide(ctx, rng).is_read_all());  // exhausted
}

TEST(Parametric, ProbabilitiesFollowSpec) {
    ParametricModel m(default_parametric_spec());
    const auto& s = m.spec();
    // Lowest load, no norm: only intercept and pop enter.
    EXPECT_NEAR(m.threshold_eta(2.0, LoadLevel::Lowest, NormRegime::NoNorm), s.threshold[0] + 2.0 * s.threshold[1], 1e-12);
    // High load, repost norm, composite 1: every High/Repost term enters.
    const double expected = s.threshold[0] + s.threshold[1] + s.threshold[4] + s.threshold[6] + s.threshold[9] +
                            s.threshold[11] + s.threshold[17] + s.threshold[23];
    EXPECT_NEAR(m.threshold_eta(1.0, LoadLevel::High, NormRegime::RepostDominant), expected, 1e-12);
    const auto p = m.allocation_probabilities(1.5, LoadLevel::Medium, NormRegime::LikeDominant);
    EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
    for (double v : p) EXPECT_GT(v, 0.0);
}

TEST(Parametric, DrawsAreReproducible) {
    ParametricLogitPolicy a(default_parametric_spec()), b(default_parametric_spec());
    const auto ctx = context(NormRegime::RepostDominant);
    for (std::uint64_t k = 0; k < 200; ++k) {
        CounterRng r1(k), r2(k);
        const auto d = a.decide(ctx, r1);
        EXPECT_EQ(d, b.decide(ctx, r2));
        EXPECT_TRUE(is_valid_decision(d, ctx.feed));
    }
}

TEST(Parametric, SinglePostEngageRateMatchesLogistic) {
    ParametricLogitPolicy p(default_parametric_spec());
    auto ctx = context(NormRegime::NoNorm, LoadLevel::Low);
    ctx.feed.entries.resize(1);
    ctx.contents.resize(1);
    const auto& e = ctx.feed.entries[0];
    const double expected = p.model().engage_probability(popularity_composite(e.likes_at_exposure, e.reshares_at_exposure),
                                                         LoadLevel::Low, NormRegime::NoNorm);
    int engaged = 0;
    const int n = 40000;
    for (int k = 0; k < n; ++k) {
        CounterRng r(static_cast<std::uint64_t>(k));
        engaged += p.decide(ctx, r).is_read_all() ? 0 : 1;
    }
    const double se = std::sqrt(expected * (1 - expected) / n);
    EXPECT_NEAR(static_cast<double>(engaged) / n, expected, 4 * se);
}

TEST(Parametric, SpecSizesValidated) {
    ParametricLogitSpec s = default_parametric_spec();
    s.threshold.resize(23);
    EXPECT_THROW(ParametricModel{s}, ConfigError);
}

TEST(Llm, RetriesThenDegrades) {
    int calls = 0;
    FunctionTransport failing([&](const ChatRequest&) {
        ++calls;
        return TransportResult::failure("down");
    });
    LlmSpec spec;
    spec.max_retries = 2;
    LlmPolicy p(spec, failing);
    CounterRng rng(1);
    EXPECT_TRUE(p.decide(context(NormRegime::NoNorm), rng).is_read_all());
    EXPECT_EQ(calls, 3);
    ASSERT_EQ(p.warnings().size(), 1u);
}

TEST(Llm, SendsPromptAndParses) {
    ChatRequest seen;
    FunctionTransport ok([&](const ChatRequest& r) {
        seen = r;
        return TransportResult::success(R"({"action":"repost","post_id":11})");
    });
    LlmPolicy p(LlmSpec{}, ok);
    CounterRng rng(1);
    const auto ctx = context(NormRegime::LikeDominant);
    EXPECT_EQ(p.decide(ctx, rng), Decision::engage(PostId{11}, ActionKind::Repost));
    EXPECT_EQ(seen.model, "qwen3-8b");
    EXPECT_DOUBLE_EQ(seen.temperature, 0.6);
    EXPECT_EQ(seen.system, build_prompt(ctx).system);
}

TEST(Transport, FixtureLookupByRequestHash) {
    const ChatRequest r{"m", 0.6, "sys", "usr"};
    const auto line = nlohmann::json{{"request_hash", r.hash()}, {"response_text", "{\"action\":\"read\"}"}}.dump();
    auto f = FixtureTransport::from_jsonl(line + "\n");
    EXPECT_EQ(*f.complete(r).text, "{\"action\":\"read\"}");
    EXPECT_FALSE(f.complete(ChatRequest{"m", 0.6, "sys", "other"}).ok());
}

TEST(Transport, RecordingThenReplayIsIdentical) {
    FunctionTransport mock(mock_completion);
    RecordingTransport rec(mock);
    std::vector<ChatRequest> reqs;
    for (int i = 0; i < 20; ++i)
        reqs.push_back({"m", 0.6, "sys", "[post_id=" + std::to_string(i) + "] likes=0 reshares=0\nbody"});
    std::vector<std::string> first;
    for (const auto& r : reqs) first.push_back(*rec.complete(r).text);
    auto replay = FixtureTransport::from_jsonl(rec.to_jsonl());
    for (std::size_t i = 0; i < reqs.size(); ++i) EXPECT_EQ(*replay.complete(reqs[i]).text, first[i]);
}

TEST(Transport, RequestBodyIsOpenAiShaped) {
    const ChatRequest r{"qwen3-8b", 0.6, "s", "u"};
    const auto b = r.body();
    EXPECT_EQ(b["model"], "qwen3-8b");
    EXPECT_EQ(b["messages"][0]["role"], "system");
    EXPECT_EQ(b["messages"][1]["content"], "u");
}
