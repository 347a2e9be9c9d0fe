#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "causelog/errors.hpp"
#include "causelog/version.hpp"

namespace causelog {

using Json = nlohmann::json;

// Every artifact file carries one of these blocks so downstream stages can
// refuse inputs produced by an incompatible schema or configuration.
struct FileMeta {
  std::string format;
  int version = 1;
  std::string tool = kToolVersion;
  std::string config_hash;

  Json to_json() const {
    return Json{{"format", format},
                {"version", version},
                {"tool", tool},
                {"config_hash", config_hash}};
  }

  static FileMeta from_json(const Json& j) {
    FileMeta m;
    m.format = j.at("format").get<std::string>();
    m.version = j.at("version").get<int>();
    m.tool = j.value("tool", "");
    m.config_hash = j.value("config_hash", "");
    return m;
  }
};

inline void check_meta(const FileMeta& m, const std::string& expected_format,
                       int expected_version) {
  if (m.format != expected_format) {
    throw Error(ErrorCode::VersionMismatch,
                "expected format '" + expected_format + "', file has '" + m.format + "'");
  }
  if (m.version != expected_version) {
    throw Error(ErrorCode::VersionMismatch,
                "format '" + m.format + "' version " + std::to_string(m.version) +
                    " not supported (want " + std::to_string(expected_version) + ")");
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

inline Json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ParseError, "invalid JSON in " + path);
  return j;
}

inline void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

} // namespace causelog
