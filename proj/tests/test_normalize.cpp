#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace sigaudit;

TEST(Normalize, UrlDecodeThenCollapse)
{
    EXPECT_EQ(url_decode("union%20%20select"), "union  select");
    EXPECT_EQ(whitespace_collapse(url_decode("union%20%20select")), "union select");
}

TEST(Normalize, NbspToSpace)
{
    EXPECT_EQ(nbsp_to_space(url_decode("union%A0select")), "union select");
    EXPECT_EQ(nbsp_to_space("a\xC2\xA0"
                            "b"),
              "a b");
}

TEST(Normalize, CaseFold) { EXPECT_EQ(case_fold("Union sElect"), "union select"); }

TEST(Normalize, QuotedDigitSimplify)
{
    EXPECT_EQ(quoted_digit_simplify("(1)or (5/\"1\")"), "(1)or (5/1)");
    EXPECT_EQ(quoted_digit_simplify("'12' or 'a1'"), "12 or 'a1'");
    EXPECT_EQ(quoted_digit_simplify("\"\""), "\"\"");
    EXPECT_EQ(quoted_digit_simplify("'1"), "'1");
}

TEST(Normalize, LenientAndStrictDecode)
{
    EXPECT_EQ(url_decode("100%"), "100%");
    EXPECT_EQ(url_decode("%zz%41"), "%zzA");
    EXPECT_THROW(url_decode("%zz", true), decode_error);
    EXPECT_EQ(url_decode("a+b"), "a+b");
}

TEST(Normalize, EmptyPipelineIsIdentity)
{
    const pipeline p;
    EXPECT_TRUE(p.empty());
    for (const char *s : {"", "%20", "Union sElect", "\xA0"}) EXPECT_EQ(apply(p, s), s);
    EXPECT_TRUE(prefilter_pass(p, "anything"));
}

TEST(Normalize, DefaultPipelineOrder)
{
    const auto p = pipeline::deployed();
    EXPECT_EQ(p.apply("UNION%A0%20SeLeCt%20%221%22"), "union select 1");
}

TEST(Normalize, PrefilterDecisions)
{
    const auto p = pipeline::deployed();
    EXPECT_FALSE(p.prefilter_pass(p.apply("1%20or%20%40user")));
    EXPECT_FALSE(p.prefilter_pass(p.apply("1%20and%201%20or%201%20having%201")));
    EXPECT_TRUE(p.prefilter_pass(p.apply("1;%20Select%20234")));
    for (const char *forwarded : {";", "\"", "'", "(", ")", "-", "#", "/", "=", "<", ">"}) {
        EXPECT_TRUE(p.prefilter_pass(std::string("1 ") + forwarded)) << forwarded;
    }
}

TEST(Normalize, ConfigRoundTrip)
{
    const auto p = pipeline::deployed();
    const auto back = pipeline::from_json(p.to_json());
    EXPECT_EQ(back.transforms(), p.transforms());
    EXPECT_EQ(back.prefilter(), p.prefilter());
    EXPECT_EQ(back.fingerprint(), p.fingerprint());
    EXPECT_NE(p.fingerprint(), pipeline::capability().fingerprint());
    const auto j = nlohmann::json::parse(R"({"transforms": ["url_decode", "case_fold"], "prefilter": null})");
    const auto q = pipeline::from_json(j);
    EXPECT_EQ(q.apply("A%41"), "aa");
    EXPECT_FALSE(q.prefilter().has_value());
    EXPECT_THROW(pipeline::from_json(nlohmann::json::parse(R"({"transforms": ["rot13"]})")), parse_error);
    EXPECT_THROW(pipeline::from_json(nlohmann::json::parse(R"j({"transforms": [], "prefilter": "(?=x)"})j")),
                 regex_dialect_error);
}

TEST(Normalize, Properties)
{
    std::mt19937_64 rng(11);
    const auto failure = testkit::pipeline_properties(rng, 2000);
    EXPECT_FALSE(failure.has_value()) << failure.value_or("");
}

TEST(Normalize, QuotedDigitOnlyTouchesDigitPairs)
{
    std::mt19937_64 rng(5);
    for (int k = 0; k < 2000; ++k) {
        const auto s = testkit::random_text(rng, "ab12'\" ", 12);
        const auto out = quoted_digit_simplify(s);
        std::string stripped_in, stripped_out;
        for (const char c : s) {
            if (c != '\'' && c != '"') stripped_in += c;
        }
        for (const char c : out) {
            if (c != '\'' && c != '"') stripped_out += c;
        }
        EXPECT_EQ(stripped_in, stripped_out) << s;
        if (s.find_first_of("'\"") == std::string::npos) {
            EXPECT_EQ(out, s);
        }
    }
}
