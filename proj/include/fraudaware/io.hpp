#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fraudaware/error.hpp"

namespace fraudaware {

using json = nlohmann::json;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path& path);
/// Writes to a sibling temp file, then renames over the target.
void write_text_file(const std::filesystem::path& path, std::string_view content);

json parse_json(std::string_view text, std::string_view what);
json load_json_file(const std::filesystem::path& path);

/// Canonical rendering used wherever byte-identical output matters.
std::string dump_json(const json& doc);

/// Schema version check on a versioned config document; throws Config.
void require_version(const json& doc, int expected, std::string_view what);

/// Typed field access that names the missing or mistyped field in the error.
template <typename T>
T require_field(const json& obj, std::string_view key, std::string_view what) {
  const std::string k(key);
  if (!obj.is_object() || !obj.contains(k)) {
    throw Error(ErrorCode::Schema, std::string(what) + ": missing field '" + k + "'");
  }
  try {
    return obj.at(k).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::Schema, std::string(what) + ": field '" + k + "' has the wrong type");
  }
}

}  // namespace fraudaware
