#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "carnot/harness.hpp"

using namespace carnot;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("carnot_harness_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_text(const std::string& sub, const std::string& text, const fs::path& out, std::string* err = nullptr) {
    Config cfg = Config::parse(text, "inline.cfg");
    cfg.set("output.dir", out.string());
    std::ostringstream e;
    const int rc = run_config(sub, cfg, e);
    if (err) *err = e.str();
    return rc;
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST(Harness, GroupCheckHeisenberg) {
    const fs::path d = scratch_dir("group");
    ASSERT_EQ(run_text("group-check", "group.preset = heisenberg\ncheck.samples = 300\n", d), kExitOk);
    const auto rows = csv_rows(d / "group-check.csv");
    ASSERT_EQ(rows.size(), 301u);
    EXPECT_EQ(rows[0][1], "associativity");
    double worst = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) worst = std::max(worst, std::stod(rows[i][1]));
    EXPECT_LE(worst, 1e-12);
    const auto j = nlohmann::json::parse(slurp(d / "group-check.json"));
    EXPECT_EQ(j["version"], version());
    EXPECT_EQ(j["config"]["group.preset"], "heisenberg");
    EXPECT_EQ(j["status"], "ok");
}

TEST(Harness, DeterministicCsv) {
    const std::string cfg = "group.preset = free\ngroup.k = 3\npaths.pairs = 200\nseed = 9\n";
    const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
    ASSERT_EQ(run_text("scan", cfg, a), kExitOk);
    Config c = Config::parse(cfg);
    c.set("output.dir", b.string());
    c.set("threads", "1");
    std::ostringstream e;
    ASSERT_EQ(run_config("scan", c, e), kExitOk);
    EXPECT_EQ(slurp(a / "scan.csv"), slurp(b / "scan.csv"));
}

TEST(Harness, SweepBelowGridSpacingIsInputError) {
    const fs::path d = scratch_dir("sweep_bad");
    std::string err;
    const int rc = run_text("norms-sweep",
                            "kernel.name = gauge_riesz\npatch.res = 10\nsweep.epsilons = [0.4, 0.2, 0.1]\n", d, &err);
    EXPECT_EQ(rc, kExitInput);
    EXPECT_NE(err.find("inline.cfg:3:"), std::string::npos) << err;
}

TEST(Harness, SweepRuns) {
    const fs::path d = scratch_dir("sweep");
    ASSERT_EQ(run_text("norms-sweep", "kernel.name = control\npatch.res = 8\nsweep.top = 1.6\nsweep.rungs = 3\n", d),
              kExitOk);
    const auto rows = csv_rows(d / "norms-sweep.csv");
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"epsilon", "norm", "iters", "residual"}));
    EXPECT_EQ(rows[1][0], "1.6");
}

TEST(Harness, AbelianPathHasOneRow) {
    const fs::path d = scratch_dir("path");
    ASSERT_EQ(run_text("path", "group.preset = abelian\ngroup.m = 2\npath.from = [0, 0]\npath.to = [3, 4]\n", d),
              kExitOk);
    const auto rows = csv_rows(d / "path.csv");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].back(), "5");
    const auto j = nlohmann::json::parse(slurp(d / "path.json"));
    EXPECT_EQ(j["results"]["ratio"], 1.0);
}

TEST(Harness, CustomGroupFromBrackets) {
    const Config c = Config::parse("group.m = 2\ngroup.n2 = 1\ngroup.bracket = (1, 1, 2, 1)\n");
    EXPECT_EQ(group_from_config(c), GroupSpec(2, 1, {0, 1, -1, 0}, "custom"));
    const Config bad = Config::parse("group.m = 2\ngroup.n2 = 1\ngroup.bracket = (1, 1, 2, 1), (1, 2, 1, 1)\n");
    EXPECT_THROW(group_from_config(bad), ConfigError);
    const Config ok = Config::parse("group.m = 2\ngroup.n2 = 1\ngroup.bracket = (1, 1, 2, 1), (1, 2, 1, -1)\n");
    EXPECT_NO_THROW(group_from_config(ok));
}

TEST(Harness, InputErrors) {
    const fs::path d = scratch_dir("errors");
    std::string err;
    EXPECT_EQ(run_text("group-check", "group.preset = lattice\n", d, &err), kExitInput);
    EXPECT_NE(err.find("inline.cfg:1:16"), std::string::npos) << err;
    EXPECT_EQ(run_text("group-check", "bogus.key = 1\n", d, &err), kExitInput);
    EXPECT_EQ(run_text("frobnicate", "", d, &err), kExitInput);
    RunRequest req{"group-check", (d / "missing.cfg").string(), std::nullopt, std::nullopt, std::nullopt};
    std::ostringstream e;
    EXPECT_EQ(run(req, e), kExitInput);
}

TEST(Harness, ShippedConfigsParse) {
    for (const auto& entry : fs::directory_iterator(CARNOT_CONFIG_DIR)) {
        if (entry.path().extension() != ".cfg") continue;
        EXPECT_NO_THROW(Config::load(entry.path().string())) << entry.path();
    }
}

TEST(Harness, HolderFitCommand) {
    const fs::path d = scratch_dir("holder");
    ASSERT_EQ(run_text("holder-fit", "graph.family = gauss\nholder.min_slope = 1.45\n", d), kExitOk);
    ASSERT_EQ(run_text("holder-fit", "graph.family = affine\ngraph.slope = [0.5]\ngraph.offset = 1\n", d), kExitOk);
    EXPECT_EQ(run_text("holder-fit", "graph.family = gauss\nholder.min_slope = 5\n", d), kExitInvariant);
}
