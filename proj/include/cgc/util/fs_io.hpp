#pragma once

#include <string>

#include "json.hpp"

namespace cgc {

std::string read_file(const std::string& path);  // IoError on failure

// Writes to "<path>.tmp" then renames, so a crashed run never leaves a
// half-written artifact under the final name.
void write_file_atomic(const std::string& path, const std::string& content);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

void ensure_dir(const std::string& path);

}  // namespace cgc
