#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "socialsim/core.hpp"
#include "socialsim/digest.hpp"
#include "socialsim/rng.hpp"
#include "socialsim/text.hpp"

using namespace socialsim;

TEST(Load, AlgorithmicCountsPerLevel) {
    EXPECT_EQ(LoadCondition{LoadLevel::Lowest}.algorithmic_count(), 4u);
    EXPECT_EQ(LoadCondition{LoadLevel::Low}.algorithmic_count(), 7u);
    EXPECT_EQ(LoadCondition{LoadLevel::Medium}.algorithmic_count(), 15u);
    EXPECT_EQ(LoadCondition{LoadLevel::High}.algorithmic_count(), 30u);
    EXPECT_EQ(LoadCondition::followed_count, 3u);
    EXPECT_EQ(LoadCondition{LoadLevel::High}.total(), 33u);
}

TEST(Load, NamesRoundTrip) {
    for (auto l : kAllLoads) EXPECT_EQ(parse_load(to_string(l)), l);
    for (auto n : kAllNorms) EXPECT_EQ(parse_norm(to_string(n)), n);
    for (auto a : kAllActions) EXPECT_EQ(parse_action(to_string(a)), a);
    EXPECT_FALSE(parse_load("huge"));
    EXPECT_FALSE(parse_norm(""));
    EXPECT_FALSE(parse_action("share"));
}

TEST(Norm, FragmentOnlyForNormRegimes) {
    EXPECT_TRUE(norm_prompt_fragment(NormRegime::NoNorm).empty());
    EXPECT_NE(norm_prompt_fragment(NormRegime::LikeDominant).find("80%"), std::string_view::npos);
    EXPECT_NE(norm_prompt_fragment(NormRegime::RepostDominant).find("90%"), std::string_view::npos);
}

TEST(Popularity, CompositeIsLogOfSum) {
    EXPECT_DOUBLE_EQ(popularity_composite(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(popularity_composite(3, 4), std::log(8.0));
    PopularityCounters c{5, 2, 3};
    EXPECT_EQ(reshares(c), 5u);
}

TEST(Popularity, QuoteContentEmbedsSource) {
    EXPECT_EQ(quote_content("so true", "original"), "so true\n\n> original");
}

TEST(RunConfig, Validation) {
    RunConfig c;
    EXPECT_NO_THROW(c.validate());
    c.activation_p = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c.activation_p = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = RunConfig{};
    c.weights = {0.5, 0.6};
    EXPECT_THROW(c.validate(), ConfigError);
    c = RunConfig{};
    c.timesteps = 0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Rng, SameKeySameStream) {
    CounterRng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, SplitStreamsIndependentOfSiblingUse) {
    CounterRng root(7);
    auto s1 = root.split({1, 5, 3});
    auto probe = root.split({1, 5, 4});
    for (int i = 0; i < 1000; ++i) probe();
    auto s1_again = root.split({1, 5, 3});
    for (int i = 0; i < 10; ++i) EXPECT_EQ(s1(), s1_again());
}

TEST(Rng, DistinctLabelsGiveDistinctStreams) {
    CounterRng root(7);
    std::set<std::uint64_t> firsts;
    for (std::uint64_t t = 0; t < 50; ++t)
        for (std::uint64_t a = 0; a < 50; ++a) firsts.insert(root.split({1, t, a})());
    EXPECT_EQ(firsts.size(), 2500u);
}

TEST(Rng, UniformMomentsAndRange) {
    CounterRng r(3);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sq += u * u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.005);
    EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(Rng, BelowIsUniformOverSmallRange) {
    CounterRng r(9);
    std::array<int, 7> counts{};
    for (int i = 0; i < 70000; ++i) ++counts[r.below(7)];
    for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Text, TopicTokensNormalize) {
    const auto t = topic_tokens("DeepSeek, deepseek! AI-chips (AI-chips) end.");
    EXPECT_EQ(t, (std::vector<std::string>{"ai-chips", "deepseek", "end"}));
    EXPECT_TRUE(topic_tokens("  ... !!! ").empty());
}

TEST(Text, JaccardOracle) {
    const std::vector<std::string> a{"a", "b", "c"}, b{"b", "c", "d", "e"};
    EXPECT_DOUBLE_EQ(jaccard(a, b), 2.0 / 5.0);
    EXPECT_DOUBLE_EQ(jaccard({}, {}), 0.0);
    EXPECT_DOUBLE_EQ(jaccard(a, {}), 0.0);
    EXPECT_DOUBLE_EQ(jaccard(a, a), 1.0);
}

TEST(Text, CountTokens) {
    EXPECT_EQ(count_tokens("  one two\tthree\nfour "), 4u);
    EXPECT_EQ(count_tokens(""), 0u);
}

TEST(Digest, KnownSha256) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
