#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ymlab::io {

using Json = nlohmann::ordered_json;

/// %.17g formatting so that reports round-trip bit-exactly.
std::string format_double(double v);

/// RFC-style CSV: header row always present; fields containing commas,
/// quotes or newlines are quoted with doubled inner quotes.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& path);

/// Report skeleton shared by every command: format_version, command,
/// code_version, timestamp and the fully resolved config.
Json make_report(const std::string& command, const Json& config);

void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

}  // namespace ymlab::io
