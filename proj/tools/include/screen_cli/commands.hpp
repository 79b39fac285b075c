#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace screen::cli {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitFlagged = 2 };

struct Invocation {
    std::string config;                  // --config
    std::filesystem::path out = ".";     // --out
    std::vector<std::string> args;       // positional arguments
    bool quiet = false;
    std::ostream* stdout_stream = nullptr;
    std::ostream* stderr_stream = nullptr;
};

int cmd_solve(const Invocation& inv);
int cmd_oracle(const Invocation& inv);
int cmd_surface(const Invocation& inv);
int cmd_verify(const Invocation& inv);
int cmd_sweep(const Invocation& inv);

/// Full command line front end: subcommand dispatch, --threads and COULOMB_SCREEN_THREADS,
/// and the 0/1/2 exit protocol.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace screen::cli
