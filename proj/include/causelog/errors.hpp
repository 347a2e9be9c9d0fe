#pragma once

#include <stdexcept>
#include <string>

namespace causelog {

enum class ErrorCode {
  EmptyMessage,
  EmptyCorpus,
  ParseError,
  UnknownTemplate,
  VersionMismatch,
  SpecError,
  ScoreError,
  IoError,
  ConfigError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::EmptyMessage: return "EmptyMessage";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::SpecError: return "SpecError";
    case ErrorCode::ScoreError: return "ScoreError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

} // namespace causelog
