#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace causelog {

struct SyslogRecord {
  double timestamp = 0.0; // seconds since epoch, fractional part allowed
  std::string device;
  std::string facility;
  int severity = 6;
  std::string message;
};

struct IngestStats {
  size_t lines_total = 0;
  size_t lines_parsed = 0;
  size_t dropped_bad_timestamp = 0;
  size_t dropped_malformed = 0;
};

// Parses one `<timestamp> <device> <facility>.<severity> <message>` line.
// The timestamp is either ISO-8601 (2026-08-08T09:24:01.5Z), epoch seconds,
// or RFC-3164 style ("Aug  8 09:24:01", which spans three fields and gets
// `assume_year`). Returns nullopt for lines that cannot be parsed.
std::optional<SyslogRecord> parse_syslog_line(const std::string& line, int assume_year,
                                              IngestStats* stats = nullptr);

// Reads a newline-delimited corpus and stable-sorts by timestamp so that
// per-device order is preserved on ties.
std::vector<SyslogRecord> read_corpus(const std::string& path, int assume_year,
                                      IngestStats* stats = nullptr);

std::vector<SyslogRecord> parse_corpus_text(const std::string& text, int assume_year,
                                            IngestStats* stats = nullptr);

// Renders a record in the on-disk corpus format (ISO-8601 timestamp).
std::string format_syslog_line(const SyslogRecord& rec);

// ISO-8601 helpers shared with synthgen's config snapshot naming.
std::string format_iso8601(double epoch_seconds);
std::string format_date(int64_t epoch_day); // YYYY-MM-DD from days since epoch

} // namespace causelog
