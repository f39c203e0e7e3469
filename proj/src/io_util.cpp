#include "steklov/io_util.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace steklov {

std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::input_domain: return "input_domain";
    case ErrorKind::positivity: return "positivity";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::symmetry: return "symmetry";
    case ErrorKind::degenerate_trial: return "degenerate_trial";
    case ErrorKind::staleness: return "staleness";
    case ErrorKind::structure: return "structure";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::dependency: return "dependency";
    case ErrorKind::invariant: return "invariant";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void dump_into(const nlohmann::json& j, std::string& out, int indent, int depth) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string pad_close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad + nlohmann::json(it.key()).dump() + (indent > 0 ? ": " : ":");
        dump_into(it.value(), out, indent, depth + 1);
      }
      out += nl + pad_close + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) {
          out += ",";
          out += nl;
        }
        out += pad;
        dump_into(j[i], out, indent, depth + 1);
      }
      out += nl + pad_close + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  dump_into(j, out, indent, 0);
  return out;
}

std::string config_hash(const nlohmann::json& config) {
  const std::string text = dump_json(config, 0);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot open " + path + " for writing");
  f << dump_json(j) << "\n";
  if (!f) fail(ErrorKind::io, "write failed for " + path);
}

std::string provenance_line(const std::string& hash) {
  return std::string("# ") + kArtifactVersion + " config_hash=" + hash;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& hash, std::vector<std::string> columns)
    : path_(path), n_cols_(columns.size()) {
  buffer_ = provenance_line(hash) + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) buffer_ += (i ? "," : "") + columns[i];
  buffer_ += "\n";
}

CsvWriter& CsvWriter::cell(double x) { return cell(format_double(x)); }

CsvWriter& CsvWriter::cell(long long x) { return cell(std::to_string(x)); }

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (in_row_ == n_cols_) fail(ErrorKind::invariant, "csv row longer than the header");
  buffer_ += (in_row_ ? "," : "") + s;
  ++in_row_;
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != n_cols_) fail(ErrorKind::invariant, "csv row shorter than the header");
  buffer_ += "\n";
  in_row_ = 0;
}

void CsvWriter::close() {
  std::ofstream f(path_, std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot open " + path_ + " for writing");
  f << buffer_;
  if (!f) fail(ErrorKind::io, "write failed for " + path_);
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::input_domain:
    case ErrorKind::positivity:
    case ErrorKind::symmetry:
    case ErrorKind::degenerate_trial:
      return 2;
    case ErrorKind::resolution:
    case ErrorKind::staleness:
    case ErrorKind::dependency:
      return 3;
    case ErrorKind::structure:
    case ErrorKind::infeasible:
    case ErrorKind::invariant:
      return 4;
    case ErrorKind::io:
      return 5;
  }
  return 4;
}

std::string error_record(ErrorKind kind, std::string_view message) {
  nlohmann::json j;
  j["error"] = std::string(to_string(kind));
  j["exit_code"] = exit_code(kind);
  j["message"] = std::string(message);
  return j.dump();
}

}  // namespace steklov
