#include <gtest/gtest.h>

#include "carnot/config.hpp"

using namespace carnot;

TEST(Config, ParsesKeysSectionsAndComments) {
    const Config c = Config::parse(
        "# comment\n"
        "seed = 42\n"
        "[graph]   # trailing comment\n"
        "family = gauss\n"
        "A = 1.5e0\n"
        "\n"
        "[patch]\n"
        "box = [-1, 1, -2, 2]\n"
        "name = \"quoted\"\n");
    EXPECT_EQ(c.u64("seed", 0), 42u);
    EXPECT_EQ(c.str("graph.family", ""), "gauss");
    EXPECT_EQ(c.real("graph.A", 0), 1.5);
    EXPECT_EQ(c.reals("patch.box"), (std::vector<double>{-1, 1, -2, 2}));
    EXPECT_EQ(c.str("patch.name", ""), "quoted");
    EXPECT_EQ(c.real("missing", 3.0), 3.0);
}

TEST(Config, Tuples) {
    const Config c = Config::parse("group.bracket = (1, 1, 2, 1.0), (2,1,3,-0.5)\n");
    const auto t = c.tuples("group.bracket");
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[1], (std::vector<double>{2, 1, 3, -0.5}));
}

TEST(Config, DiagnosticsCarryLineAndColumn) {
    try {
        Config::parse("a = 1\nb 2\n", "x.cfg");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 2);
        EXPECT_EQ(e.col(), 3);
        EXPECT_NE(std::string(e.what()).find("x.cfg:2:3"), std::string::npos);
    }
    const Config c = Config::parse("\n  n = abc\n", "y.cfg");
    try {
        c.real("n", 0);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 2);
        EXPECT_EQ(e.col(), 7);
    }
    EXPECT_THROW(Config::parse("a = 1\na = 2\n"), ConfigError);
    EXPECT_THROW(Config::parse("[open\n"), ConfigError);
    EXPECT_THROW(Config::parse("k =\n"), ConfigError);
    EXPECT_THROW(Config::parse("t = (1, 2\n").tuples("t"), ConfigError);
}

TEST(Config, UnknownKeysRejected) {
    const Config c = Config::parse("good = 1\n  bad = 2\n");
    try {
        c.require_known({"good"});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 2);
        EXPECT_EQ(e.col(), 3);
    }
}
