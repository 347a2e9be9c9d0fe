#include <doctest.h>

#include <fstream>
#include <sstream>

#include "causelog/errors.hpp"
#include "causelog/syslog.hpp"
#include "causelog/tokenizer.hpp"

using namespace causelog;

namespace {

std::string masked_join(const std::string& message) {
  auto tokens = tokenize_line(message);
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += masked_text(tokens[i]);
  }
  return out;
}

} // namespace

TEST_CASE("tokenizer matches the hand-computed fixture") {
  std::ifstream in(std::string(CAUSELOG_SOURCE_DIR) + "/tests/fixtures/tokenizer_fixture.txt");
  REQUIRE(in.good());
  std::string line;
  size_t checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    std::string input = line.substr(0, tab);
    std::string expected = line.substr(tab + 1);
    CAPTURE(input);
    CHECK(masked_join(input) == expected);
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("empty and separator-only messages are errors") {
  CHECK_THROWS_AS(tokenize_line(""), Error);
  CHECK_THROWS_AS(tokenize_line("   "), Error);
  CHECK_THROWS_AS(tokenize_line("... ,,, :::"), Error);
  try {
    tokenize_line("");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyMessage);
  }
}

TEST_CASE("original text is preserved alongside the mask") {
  auto tokens = tokenize_line("Interface eth1/3 down");
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[1].kind == TokenKind::Iface);
  CHECK(tokens[1].text == "eth1/3");
  CHECK(masked_text(tokens[1]) == "<IFACE>");
}

TEST_CASE("token order follows the source text") {
  auto tokens = tokenize_line("a 1 b 2 c 3");
  std::vector<std::string> texts;
  for (const auto& t : tokens) texts.push_back(t.text);
  CHECK(texts == std::vector<std::string>{"a", "1", "b", "2", "c", "3"});
}

TEST_CASE("syslog line parsing accepts ISO-8601, epoch and RFC-3164 forms") {
  auto iso = parse_syslog_line("2026-01-05T00:10:05Z tor01 link.3 Interface eth0 link down",
                               2000);
  REQUIRE(iso.has_value());
  CHECK(iso->device == "tor01");
  CHECK(iso->facility == "link");
  CHECK(iso->severity == 3);
  CHECK(iso->message == "Interface eth0 link down");

  auto iso_frac = parse_syslog_line("2026-01-05T00:10:05.250Z tor01 link.3 x y", 2000);
  REQUIRE(iso_frac.has_value());
  CHECK(iso_frac->timestamp == doctest::Approx(iso->timestamp + 0.25));

  auto epoch = parse_syslog_line("1767572405 tor01 daemon.warning restart done", 2000);
  REQUIRE(epoch.has_value());
  CHECK(epoch->timestamp == doctest::Approx(1767572405.0));
  CHECK(epoch->severity == 4);

  auto rfc = parse_syslog_line("Jan  5 00:10:05 tor01 link.err Interface eth0 link down", 2026);
  REQUIRE(rfc.has_value());
  CHECK(rfc->timestamp == doctest::Approx(iso->timestamp));
  CHECK(rfc->severity == 3);
}

TEST_CASE("unparseable timestamps are dropped and counted") {
  IngestStats stats;
  std::string text =
      "2026-01-05T00:00:01Z tor01 link.3 Interface eth0 link down\n"
      "not-a-timestamp tor01 link.3 hello world\n"
      "2026-01-05T00:00:02Z tor01 link.3 Interface eth1 link down\n";
  auto recs = parse_corpus_text(text, 2000, &stats);
  CHECK(recs.size() == 2);
  CHECK(stats.lines_total == 3);
  CHECK(stats.dropped_bad_timestamp == 1);
}

TEST_CASE("ingestion sort is stable per device on timestamp ties") {
  std::string text =
      "2026-01-05T00:00:02Z tor01 link.3 second same-second line\n"
      "2026-01-05T00:00:02Z tor01 link.3 third same-second line\n"
      "2026-01-05T00:00:01Z tor01 link.3 first line\n";
  auto recs = parse_corpus_text(text, 2000);
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].message == "first line");
  CHECK(recs[1].message == "second same-second line");
  CHECK(recs[2].message == "third same-second line");
}

TEST_CASE("timestamp round-trips through the corpus format") {
  SyslogRecord rec;
  rec.timestamp = 1767572405.0;
  rec.device = "agg01";
  rec.facility = "routing";
  rec.severity = 2;
  rec.message = "OSPF process terminated unexpectedly";
  auto back = parse_syslog_line(format_syslog_line(rec), 2000);
  REQUIRE(back.has_value());
  CHECK(back->timestamp == doctest::Approx(rec.timestamp));
  CHECK(back->device == rec.device);
  CHECK(back->message == rec.message);
}
