#pragma once
//
// Config-driven runner behind the carnotlab CLI. Each subcommand writes
// <out>/<subcommand>.csv and <out>/<subcommand>.json.
//

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "carnot/config.hpp"
#include "carnot/graphs.hpp"
#include "carnot/group.hpp"

namespace carnot {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitInput = 2;

std::string version();
const std::vector<std::string>& subcommands();

/// group.preset (heisenberg | free | abelian | custom) with group.n / group.k / group.m, or an explicit
/// group.m, group.n2, group.bracket = (l, i, j, value), ... with 1-based indices.
GroupSpec group_from_config(const Config& cfg);
/// graph.family (gauss | power | affine | zero) and its parameters on the adapted group.
GraphFunction graph_from_config(const Config& cfg, const GroupSpec& adapted);

struct RunRequest {
    std::string subcommand;
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

/// Loads the config and runs; returns one of the kExit codes. Diagnostics go to `err`.
int run(const RunRequest& req, std::ostream& err);
/// Same with an already-parsed config; --out/--seed/--threads should already be merged into it.
int run_config(const std::string& subcommand, const Config& cfg, std::ostream& err);

}  // namespace carnot
