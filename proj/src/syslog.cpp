#include "causelog/syslog.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "causelog/errors.hpp"
#include "causelog/meta.hpp"

namespace causelog {
namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t yy = static_cast<int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yy + (m <= 2));
}

std::optional<double> parse_hms(std::string_view s) {
  // hh:mm:ss with optional .fraction
  if (s.size() < 8 || s[2] != ':' || s[5] != ':') return std::nullopt;
  auto num2 = [&](size_t off) -> int {
    if (s[off] < '0' || s[off] > '9' || s[off + 1] < '0' || s[off + 1] > '9') return -1;
    return (s[off] - '0') * 10 + (s[off + 1] - '0');
  };
  int h = num2(0), mi = num2(3), se = num2(6);
  if (h < 0 || mi < 0 || se < 0 || h > 23 || mi > 59 || se > 60) return std::nullopt;
  double frac = 0.0;
  if (s.size() > 8) {
    if (s[8] != '.') return std::nullopt;
    std::string_view f = s.substr(9);
    if (!all_digits(f)) return std::nullopt;
    double scale = 0.1;
    for (char c : f) {
      frac += (c - '0') * scale;
      scale *= 0.1;
    }
  }
  return h * 3600.0 + mi * 60.0 + se + frac;
}

std::optional<double> parse_iso8601(std::string_view s) {
  // YYYY-MM-DD[T ]hh:mm:ss[.frac][Z]
  if (s.size() < 19) return std::nullopt;
  if (s[4] != '-' || s[7] != '-') return std::nullopt;
  if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
  if (!all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) || !all_digits(s.substr(8, 2)))
    return std::nullopt;
  int y = 0, m = 0, d = 0;
  std::from_chars(s.data(), s.data() + 4, y);
  std::from_chars(s.data() + 5, s.data() + 7, m);
  std::from_chars(s.data() + 8, s.data() + 10, d);
  if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
  std::string_view rest = s.substr(11);
  if (!rest.empty() && (rest.back() == 'Z')) rest.remove_suffix(1);
  auto hms = parse_hms(rest);
  if (!hms) return std::nullopt;
  return static_cast<double>(days_from_civil(y, m, d)) * 86400.0 + *hms;
}

const std::array<const char*, 12> kMonths = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                             "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

int month_index(std::string_view tok) {
  for (size_t i = 0; i < kMonths.size(); ++i) {
    if (tok == kMonths[i]) return static_cast<int>(i) + 1;
  }
  return 0;
}

std::optional<double> parse_epoch(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(v) || v < 0) return std::nullopt;
  return v;
}

int severity_from_token(std::string_view s) {
  if (s.size() == 1 && s[0] >= '0' && s[0] <= '7') return s[0] - '0';
  static const std::array<std::pair<const char*, int>, 10> names = {{
      {"emerg", 0}, {"alert", 1}, {"crit", 2}, {"err", 3}, {"error", 3},
      {"warn", 4}, {"warning", 4}, {"notice", 5}, {"info", 6}, {"debug", 7},
  }};
  for (const auto& [name, sev] : names) {
    if (s == name) return sev;
  }
  return -1;
}

} // namespace

std::optional<SyslogRecord> parse_syslog_line(const std::string& line, int assume_year,
                                              IngestStats* stats) {
  if (stats) stats->lines_total++;
  std::istringstream in(line);
  std::string first;
  if (!(in >> first)) {
    if (stats) stats->dropped_malformed++;
    return std::nullopt;
  }

  double ts = 0.0;
  if (auto iso = parse_iso8601(first)) {
    ts = *iso;
  } else if (int month = month_index(first); month != 0) {
    // RFC-3164: "Mmm dd hh:mm:ss" spans three whitespace fields; no year.
    std::string day_tok, time_tok;
    if (!(in >> day_tok >> time_tok) || !all_digits(day_tok)) {
      if (stats) stats->dropped_bad_timestamp++;
      return std::nullopt;
    }
    int day = 0;
    std::from_chars(day_tok.data(), day_tok.data() + day_tok.size(), day);
    auto hms = parse_hms(time_tok);
    if (!hms || day < 1 || day > 31) {
      if (stats) stats->dropped_bad_timestamp++;
      return std::nullopt;
    }
    ts = static_cast<double>(days_from_civil(assume_year, month, day)) * 86400.0 + *hms;
  } else if (auto epoch = parse_epoch(first)) {
    ts = *epoch;
  } else {
    if (stats) stats->dropped_bad_timestamp++;
    return std::nullopt;
  }

  SyslogRecord rec;
  rec.timestamp = ts;
  std::string facsev;
  if (!(in >> rec.device >> facsev)) {
    if (stats) stats->dropped_malformed++;
    return std::nullopt;
  }
  auto dot = facsev.rfind('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 >= facsev.size()) {
    if (stats) stats->dropped_malformed++;
    return std::nullopt;
  }
  rec.facility = facsev.substr(0, dot);
  int sev = severity_from_token(std::string_view(facsev).substr(dot + 1));
  if (sev < 0) {
    if (stats) stats->dropped_malformed++;
    return std::nullopt;
  }
  rec.severity = sev;

  std::getline(in, rec.message);
  size_t start = rec.message.find_first_not_of(' ');
  rec.message = start == std::string::npos ? std::string() : rec.message.substr(start);
  if (rec.message.empty() || rec.device.empty()) {
    if (stats) stats->dropped_malformed++;
    return std::nullopt;
  }
  if (stats) stats->lines_parsed++;
  return rec;
}

std::vector<SyslogRecord> parse_corpus_text(const std::string& text, int assume_year,
                                            IngestStats* stats) {
  std::vector<SyslogRecord> out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    if (nl > pos) {
      std::string line = text.substr(pos, nl - pos);
      if (auto rec = parse_syslog_line(line, assume_year, stats)) {
        out.push_back(std::move(*rec));
      }
    }
    pos = nl + 1;
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SyslogRecord& a, const SyslogRecord& b) {
                     return a.timestamp < b.timestamp;
                   });
  return out;
}

std::vector<SyslogRecord> read_corpus(const std::string& path, int assume_year,
                                      IngestStats* stats) {
  return parse_corpus_text(read_text_file(path), assume_year, stats);
}

std::string format_iso8601(double epoch_seconds) {
  int64_t whole = static_cast<int64_t>(std::floor(epoch_seconds));
  double frac = epoch_seconds - static_cast<double>(whole);
  int64_t day = whole / 86400;
  int64_t sod = whole % 86400;
  if (sod < 0) {
    sod += 86400;
    day -= 1;
  }
  int y;
  unsigned m, d;
  civil_from_days(day, y, m, d);
  char buf[64];
  int h = static_cast<int>(sod / 3600);
  int mi = static_cast<int>((sod % 3600) / 60);
  int se = static_cast<int>(sod % 60);
  if (frac > 1e-9) {
    int millis = static_cast<int>(std::lround(frac * 1000.0));
    if (millis >= 1000) millis = 999;
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", y, m, d, h, mi, se,
                  millis);
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", y, m, d, h, mi, se);
  }
  return buf;
}

std::string format_date(int64_t epoch_day) {
  int y;
  unsigned m, d;
  civil_from_days(epoch_day, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
  return buf;
}

std::string format_syslog_line(const SyslogRecord& rec) {
  std::ostringstream out;
  out << format_iso8601(rec.timestamp) << ' ' << rec.device << ' ' << rec.facility << '.'
      << rec.severity << ' ' << rec.message;
  return out.str();
}

} // namespace causelog
