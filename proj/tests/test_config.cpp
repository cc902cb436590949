#include "ghsec/config.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

using namespace ghsec;

TEST(Config, ParsesKeyValues)
{
    auto kv = config::parse_key_values("# comment\n\nseed = 7\n  out_dir=results  \n");
    EXPECT_EQ(kv.size(), 2u);
    EXPECT_EQ(kv.at("seed"), "7");
    EXPECT_EQ(kv.at("out_dir"), "results");
    EXPECT_THROW(config::parse_key_values("no equals sign"), ConfigError);
}

TEST(Config, EnvironmentInterpolation)
{
    ::setenv("GHSEC_CONFIG_TEST_VAR", "abc", 1);
    ::unsetenv("GHSEC_CONFIG_TEST_UNSET");
    auto kv = config::parse_key_values("a = x${GHSEC_CONFIG_TEST_VAR}y\nb = ${GHSEC_CONFIG_TEST_UNSET}\n");
    EXPECT_EQ(kv.at("a"), "xabcy");
    EXPECT_EQ(kv.at("b"), "");
}

TEST(Config, AppliesKnownKeys)
{
    config::RunConfig c;
    config::apply(c, "seed", "9");
    config::apply(c, "cutoff", "2020-01-01");
    config::apply(c, "gbdt.max_depth", "6");
    config::apply(c, "embedding.kind", "http");
    config::apply(c, "embedding.endpoint", "https://e.example/v1/embeddings");
    config::apply(c, "combined.features", "issue");
    config::apply(c, "baseline.word_boundary", "true");
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(format_date(c.cutoff), "2020-01-01");
    EXPECT_EQ(c.gbdt.max_depth, 6);
    EXPECT_EQ(c.embedding.kind, backends::BackendKind::HttpEmbedding);
    EXPECT_FALSE(c.combined_on_descriptions);
    EXPECT_TRUE(c.word_boundary);
}

TEST(Config, RejectsUnknownKeysAndBadValues)
{
    config::RunConfig c;
    EXPECT_THROW(config::apply(c, "sede", "1"), ConfigError);
    EXPECT_THROW(config::apply(c, "seed", "many"), ConfigError);
    EXPECT_THROW(config::apply(c, "cutoff", "2020-13-01"), ConfigError);
    EXPECT_THROW(config::apply(c, "train_fraction", "1.5"), ConfigError);
    EXPECT_THROW(config::apply(c, "embedding.kind", "quantum"), ConfigError);
}

TEST(Config, LoadAndCanonical)
{
    testing_support::TempDir dir;
    atomic_write(dir / "run.conf", "seed = 3\nnvd.api_key = secret-value\nrepos_top_k = 5\n");
    auto c = config::load(dir / "run.conf");
    EXPECT_EQ(c.seed, 3u);
    EXPECT_EQ(c.repos_top_k, 5u);
    auto text = config::canonical(c);
    EXPECT_EQ(text.find("secret-value"), std::string::npos);
    EXPECT_NE(text.find("repos_top_k"), std::string::npos);
    EXPECT_EQ(text, config::canonical(config::load(dir / "run.conf")));
    EXPECT_NE(text, config::canonical(config::RunConfig{}));
    atomic_write(dir / "bad.conf", "nope = 1\n");
    EXPECT_THROW(config::load(dir / "bad.conf"), ConfigError);
    EXPECT_THROW(config::load(dir / "missing.conf"), Error);
}
