#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace sgdinfer::cli {

/// Bad flags, bad config file or invalid settings. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// --help was given; `text` holds the rendered help.
struct HelpRequested {
  std::string text;
};

struct RunConfig {
  std::string subcommand;
  /// Merged settings: config file first, then command-line flags.
  nlohmann::json params = nlohmann::json::object();
  std::string out_dir = ".";
  int threads = 1;
};

/// Throws UsageError or HelpRequested.
RunConfig parse_args(int argc, const char* const* argv);

/// Runs the subcommand and writes its output files. Returns the exit code:
/// 0 success, 1 method failure, 2 usage or configuration error.
int run(const RunConfig& cfg, std::ostream& log);

/// parse_args + run with error reporting on `err`.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sgdinfer::cli
