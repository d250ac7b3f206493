#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pref::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitNumeric = 3;

// Runs the command line `args` (without the program name) and returns the
// exit code. Normal output goes to `out`, warnings and errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Expands every `--config <file>` (or `--config=<file>`) into the file's
// key=value entries, written as `--key=value` tokens placed directly after
// the subcommand name so that explicit flags given later take precedence.
// Blank lines and lines starting with '#' are skipped. Throws IoError when
// the file cannot be read and UsageError on a malformed line.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace pref::cli
