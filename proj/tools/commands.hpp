#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

namespace steklov::cli {

struct RunOptions {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::string out_dir = ".";
  bool out_given = false;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
};

// Executes one subcommand and returns the process exit status. Module and
// schema errors propagate as steklov::Error.
int run(const RunOptions& opts);

// Fixed battery of quick checks; prints one line per check and returns 0 when
// all pass.
int selftest(const RunOptions& opts);

}  // namespace steklov::cli
