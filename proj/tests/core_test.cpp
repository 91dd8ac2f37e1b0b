#include <gtest/gtest.h>

#include <atomic>
#include <numeric>

#include "wum/core.hpp"
#include "wum/digest.hpp"

using namespace wum;

TEST(PageIdTest, ParsesPrefixedAndBareForms)
{
    EXPECT_EQ(PageId::parse("p64"), PageId{64});
    EXPECT_EQ(PageId::parse("43"), PageId{43});
    EXPECT_EQ(PageId::parse("0"), PageId{0});
    EXPECT_FALSE(PageId::parse("p"));
    EXPECT_FALSE(PageId::parse(""));
    EXPECT_FALSE(PageId::parse("p4x"));
    EXPECT_FALSE(PageId::parse("-"));
    EXPECT_EQ(PageId{7}.str(), "p7");
}

TEST(PageIdTest, IdListRoundTrip)
{
    std::vector<PageId> ids{{0}, {43}, {5}, {30}};
    EXPECT_EQ(join_ids(ids), "p0,p43,p5,p30");
    EXPECT_EQ(parse_id_list("0,43,5,30"), ids);
    EXPECT_EQ(parse_id_list(join_ids(ids)), ids);
    EXPECT_FALSE(parse_id_list("p1,,p2"));
}

TEST(StringsTest, SplitWhitespaceCollapsesRuns)
{
    auto t = split_ws("  a \t b\t\tc  ");
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[0], "a");
    EXPECT_EQ(t[2], "c");
    EXPECT_TRUE(split_ws("   ").empty());
}

TEST(StringsTest, SplitKeepsEmptyFields)
{
    auto t = split("a\t\tb", '\t');
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[1], "");
}

TEST(StringsTest, CaseInsensitiveSuffix)
{
    EXPECT_TRUE(iends_with("/img/LOGO.GIF", ".gif"));
    EXPECT_FALSE(iends_with("/gif", ".gif"));
}

TEST(Utf8Test, AcceptsValidRejectsInvalid)
{
    EXPECT_TRUE(valid_utf8("plain ascii"));
    EXPECT_TRUE(valid_utf8("caf\xC3\xA9"));
    EXPECT_TRUE(valid_utf8("\xF0\x9F\x98\x80"));
    EXPECT_FALSE(valid_utf8("\xC3"));          // truncated
    EXPECT_FALSE(valid_utf8("\xC0\xAF"));      // overlong
    EXPECT_FALSE(valid_utf8("\xED\xA0\x80"));  // surrogate
    EXPECT_FALSE(valid_utf8("ab\xFF"));
}

TEST(ParallelForTest, VisitsEveryIndexOnce)
{
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    EXPECT_EQ(std::accumulate(hits.begin(), hits.end(), 0), 1000);
    EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

TEST(ParallelForTest, PropagatesExceptions)
{
    EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw Error("boom"); }), Error);
}

TEST(DigestTest, KnownSha256Vectors)
{
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
