#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "steklov/errors.hpp"

namespace steklov {

inline constexpr const char* kArtifactVersion = "steklov-lab 1.0.0";

// Shortest form is not used: every double is printed with 17 significant digits.
std::string format_double(double x);

// FNV-1a (64 bit) of the canonical (sorted-key) serialization, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

// JSON text with 17-significant-digit floats and sorted keys.
std::string dump_json(const nlohmann::json& j, int indent = 2);
void write_json(const std::string& path, const nlohmann::json& j);

// Header comment line embedding the artifact version and config hash.
std::string provenance_line(const std::string& hash);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& hash, std::vector<std::string> columns);
  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(const std::string& s);
  void end_row();
  void close();

 private:
  std::string path_;
  std::string buffer_;
  std::size_t n_cols_ = 0;
  std::size_t in_row_ = 0;
};

// Exit codes: 2 config, 3 resolution, 4 invariant violation, 5 io.
int exit_code(ErrorKind kind);
// One-line JSON record for stderr.
std::string error_record(ErrorKind kind, std::string_view message);

}  // namespace steklov
