#include "ghsec/util.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace ghsec;

TEST(Time, ParsesNvdAndGithubForms)
{
    EXPECT_EQ(format_timestamp(parse_timestamp("2024-01-03T10:15:09.113")), "2024-01-03T10:15:09Z");
    EXPECT_EQ(format_timestamp(parse_timestamp("2023-12-20T08:00:00Z")), "2023-12-20T08:00:00Z");
    EXPECT_EQ(format_timestamp(parse_timestamp("2023-12-20 08:00:00+02:00")), "2023-12-20T06:00:00Z");
    EXPECT_EQ(format_timestamp(parse_timestamp("2021-09-01")), "2021-09-01T00:00:00Z");
    EXPECT_EQ(format_date(parse_date("2024-02-29")), "2024-02-29");
}

TEST(Time, RejectsMalformedDates)
{
    EXPECT_THROW(parse_date("2023-02-30"), ParseError);
    EXPECT_THROW(parse_timestamp("yesterday"), ParseError);
    EXPECT_THROW(parse_timestamp("2023-01-01T25:00:00Z"), ParseError);
}

TEST(Strings, CaseInsensitiveHelpers)
{
    EXPECT_TRUE(contains_ci("Found a SECURITY hole", "security"));
    EXPECT_FALSE(contains_ci("nothing here", "security"));
    EXPECT_TRUE(starts_with_ci("HTTPS://x", "https://"));
    EXPECT_EQ(trim("  a b \n"), "a b");
}

TEST(CveId, MatchesFourOrMoreDigitSerials)
{
    EXPECT_TRUE(is_cve_id("CVE-2023-48305"));
    EXPECT_TRUE(is_cve_id("CVE-2024-0001"));
    EXPECT_FALSE(is_cve_id("CVE-2024-001"));
    EXPECT_FALSE(is_cve_id("CVE-24-0001"));
    EXPECT_FALSE(is_cve_id("CVE-2024-0001x"));
    EXPECT_TRUE(contains_cve_id("fixed in CVE-2023-48305."));
    EXPECT_FALSE(contains_cve_id("see cve 2023"));
}

TEST(SplitMix64, KnownSequenceForSeedZero)
{
    // Reference outputs of the published SplitMix64 generator.
    SplitMix64 rng(0);
    EXPECT_EQ(rng.next(), 0xe220a8397b1dcdafULL);
    EXPECT_EQ(rng.next(), 0x6e789e6aa1b965f4ULL);
    EXPECT_EQ(rng.next(), 0x06c45d188009454fULL);
}

TEST(SplitMix64, BelowAndUniformStayInRange)
{
    SplitMix64 rng(9);
    for (int i = 0; i < 10000; ++i) {
        EXPECT_LT(rng.below(7), 7u);
        double u = rng.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(SplitMix64, ShuffleIsSeededPermutation)
{
    std::vector<int> a(50), b;
    for (int i = 0; i < 50; ++i)
        a[i] = i;
    b = a;
    SplitMix64(3).shuffle(a);
    SplitMix64(3).shuffle(b);
    EXPECT_EQ(a, b);
    EXPECT_EQ(std::set<int>(a.begin(), a.end()).size(), 50u);
}

TEST(Files, AtomicWriteLeavesNoTempFile)
{
    testing_support::TempDir dir;
    auto p = dir / "out.txt";
    atomic_write(p, "hello\n");
    EXPECT_EQ(read_file(p), "hello\n");
    EXPECT_FALSE(std::filesystem::exists(p.string() + ".tmp"));
    atomic_write(p, "again\n");
    EXPECT_EQ(read_file(p), "again\n");
}

TEST(Files, ReadMissingFileThrows)
{
    EXPECT_THROW(read_file("/nonexistent/ghsec/file"), IoError);
}

TEST(Digest, Sha256KnownVectors)
{
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
