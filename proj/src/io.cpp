#include "ymlab/io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "ymlab/errors.hpp"
#include "ymlab/version.hpp"

namespace ymlab::io {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {
std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}
}  // namespace

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path.string());
  for (size_t i = 0; i < header.size(); ++i)
    f << (i ? "," : "") << quote_csv(header[i]);
  f << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i)
      f << (i ? "," : "") << quote_csv(row[i]);
    f << "\n";
  }
}

std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open: " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        row.push_back(std::move(field));
        field.clear();
      } else {
        field += c;
      }
    }
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json make_report(const std::string& command, const Json& config) {
  Json j;
  j["format_version"] = 1;
  j["command"] = command;
  j["code_version"] = std::string(kVersion) + "+" + kGitSha;
  const auto now = std::chrono::system_clock::now();
  j["timestamp"] =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch())
          .count();
  j["config"] = config;
  return j;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path.string());
  f << j.dump(2) << "\n";
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open: " + path.string());
  return Json::parse(f);
}

}  // namespace ymlab::io
