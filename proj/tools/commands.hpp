#pragma once

// Subcommands of the hl tool. run() parses arguments, writes the artifact to
// `out` (or --out) and diagnostics to `err`, and returns the exit code:
// 0 when every embedded check passes, 1 when one fails, 2 on usage or I/O
// errors.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hl::cli {

/// Everything that determines a run. Written as the first line of every
/// artifact so the output can be regenerated.
struct RunConfig {
  std::string command;
  std::string grid = "0.01:0.99:99";
  double alpha = 0.75;
  int depth = 5;
  int level = 3;  ///< level of the random base function
  int l = 1;
  std::string d1;  ///< rational; empty means alpha/2
  std::uint64_t seed = 42;
  std::string precision = "double";
  std::string out;
  std::string json_out;
  std::string r;
  int r_count = 20;
  int trials = 20;
  int digits = 1000;
  std::string function = "random";
  bool capacity = false;
  bool census = false;

  nlohmann::json to_json() const;
};

/// "a:b:count" (count evenly spaced points, ends included), a comma list, or
/// empty.
std::vector<double> parse_grid(const std::string& spec);

/// Shortest decimal that reads back to the same double.
std::string fmt(double x);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hl::cli
