#pragma once

// Batch front end. `nlsob <command> --config <path> --out <prefix>` runs one
// experiment and writes <prefix>.csv and <prefix>.meta.json.
//
// Exit status: 0 success, 1 validation failure (kernel checks, kappa out of
// range, scheme disagreement), 2 parameter, contract or config error.

#include "nlsob/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace nlsob::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitParameter = 2;

struct RunOptions {
    std::string command;
    std::string out_prefix;
    std::optional<std::size_t> threads;
    std::optional<std::uint64_t> seed;
};

/// Runs `command` on a parsed config and writes the artifacts.
int run(const Config& config, const RunOptions& options, std::ostream& out, std::ostream& err);

/// Parses the command line (argv[0] is the program name) and dispatches.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace nlsob::cli
