#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "commands.hpp"
#include "steklov/errors.hpp"
#include "steklov/io_util.hpp"

namespace {

using steklov::ErrorKind;
using steklov::fail;

unsigned parse_threads(const std::string& text, const std::string& source) {
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || text.empty() || v == 0 || v > 1024)
    fail(ErrorKind::config, source + " must be an integer in [1, 1024]");
  return static_cast<unsigned>(v);
}

nlohmann::json load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot open config " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Steklov eigenvalue experiments on the disk"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir = ".", threads_text;
  std::uint64_t seed = 0;
  auto* config_opt = app.add_option("--config", config_path, "JSON configuration file");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* threads_opt = app.add_option("--threads", threads_text, "worker threads for grid experiments");
  auto* seed_opt = app.add_option("--seed", seed, "optimizer seed (u64)");
  (void)config_opt;
  for (const char* name : {"spectrum", "optimize", "sweep", "testfamily", "ellipse", "thetastar", "export", "selftest"})
    app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << steklov::error_record(ErrorKind::config, e.what()) << "\n";
    return steklov::exit_code(ErrorKind::config);
  }

  try {
    steklov::cli::RunOptions opts;
    opts.command = app.get_subcommands().front()->get_name();
    if (!config_path.empty()) opts.config = load_config(config_path);
    opts.out_dir = out_dir;
    opts.out_given = out_opt->count() > 0;
    if (threads_opt->count() > 0) {
      opts.threads = parse_threads(threads_text, "--threads");
    } else if (const char* env = std::getenv("STEKLOV_LAB_THREADS"); env && *env) {
      opts.threads = parse_threads(env, "STEKLOV_LAB_THREADS");
    } else {
      opts.threads = std::max(1u, std::thread::hardware_concurrency());
    }
    if (seed_opt->count() > 0) opts.seed = seed;
    return steklov::cli::run(opts);
  } catch (const steklov::Error& e) {
    std::cerr << steklov::error_record(e.kind(), e.what()) << "\n";
    return steklov::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << steklov::error_record(ErrorKind::invariant, e.what()) << "\n";
    return steklov::exit_code(ErrorKind::invariant);
  }
}
