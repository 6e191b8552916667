#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qsum/error.hpp"

namespace qsum {

using Json = nlohmann::ordered_json;

namespace io {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(path.string() + ": write failed");
}

/// Pretty-printed JSON with a trailing newline.
inline void write_json(const std::filesystem::path& path, const Json& doc) {
  write_file(path, doc.dump(2) + "\n");
}

inline Json parse_json(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source + ": malformed JSON: " + e.what());
  }
}

inline Json read_json(const std::filesystem::path& path) {
  return parse_json(read_file(path), path.string());
}

inline const Json& require(const Json& obj, const char* field, const std::string& source) {
  if (!obj.is_object()) throw ParseError(source + ": expected a JSON object");
  auto it = obj.find(field);
  if (it == obj.end()) throw ParseError(source + ": missing field '" + field + "'");
  return *it;
}

inline std::string require_string(const Json& obj, const char* field, const std::string& source) {
  const auto& v = require(obj, field, source);
  if (!v.is_string()) throw ParseError(source + ": field '" + field + "' must be a string");
  return v.get<std::string>();
}

inline std::string optional_string(const Json& obj, const char* field, const std::string& source) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw ParseError(source + ": field '" + field + "' must be a string");
  return it->get<std::string>();
}

inline double require_number(const Json& obj, const char* field, const std::string& source) {
  const auto& v = require(obj, field, source);
  if (!v.is_number()) throw ParseError(source + ": field '" + field + "' must be a number");
  return v.get<double>();
}

}  // namespace io
}  // namespace qsum
