#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

// Command-line driver behind tools/main.cpp, kept in the library so the
// subcommands can be exercised in-process by the tests.

namespace cohere {

// Seed lists combine comma-separated entries, each a single integer or an
// inclusive range "a..b". Throws std::invalid_argument on malformed input,
// empty lists, or a > b.
std::vector<std::uint64_t> parse_seeds(const std::string& text);

// Parse and execute one invocation (argv without the program name).
// Exit codes: 0 success, 1 verification found a violation, 2 configuration
// or usage error, 3 a run was aborted by an inline check.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cohere
