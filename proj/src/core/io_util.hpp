#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace binpack {

// Writes to "<path>.tmp" then renames over path.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// JSON parse that rejects duplicate keys in any object.
nlohmann::json parse_json_strict(const std::string& text);

}  // namespace binpack
