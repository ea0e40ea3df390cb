#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace elue::cli {

// Subcommands: flops, params, score, frontier, simulate, train, leaderboard, serve.
// Returns 0 on success; on failure writes {"error": {...}} to `err` and returns
// the error's status code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace elue::cli
