#include "causelog/tokenizer.hpp"

#include <array>
#include <cctype>
#include <string_view>

#include "causelog/errors.hpp"

namespace causelog {
namespace {

bool is_strip_char(char c) {
  // Sentence/label punctuation removed from token edges.
  switch (c) {
    case '.': case ',': case ':': case ';': case '!': case '?':
    case '\'': case '"': case '`': case '%': case '*':
    case '(': case ')': case '[': case ']': case '{': case '}':
    case '<': case '>': case '=': case '|':
      return true;
    default:
      return false;
  }
}

bool is_split_char(char c) {
  // Interior punctuation that separates tokens. '.' '/' '-' '_' stay inside
  // tokens so IPs, interface names, and hyphenated words survive.
  switch (c) {
    case ',': case ';': case ':': case '(': case ')': case '[': case ']':
    case '{': case '}': case '"': case '\'': case '<': case '>': case '=':
    case '|':
      return true;
    default:
      return false;
  }
}

bool all_digit(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

bool is_number(std::string_view s) {
  if (s.empty()) return false;
  if (s.front() == '-') s.remove_prefix(1);
  if (s.empty()) return false;
  size_t dot = s.find('.');
  if (dot == std::string_view::npos) return all_digit(s);
  if (dot == 0 || dot + 1 == s.size()) return false;
  return all_digit(s.substr(0, dot)) && all_digit(s.substr(dot + 1)) &&
         s.find('.', dot + 1) == std::string_view::npos;
}

bool is_ip(std::string_view s) {
  // a.b.c.d with octets 0-255, optional /prefix
  size_t slash = s.find('/');
  std::string_view base = slash == std::string_view::npos ? s : s.substr(0, slash);
  if (slash != std::string_view::npos) {
    std::string_view pfx = s.substr(slash + 1);
    if (!all_digit(pfx) || pfx.size() > 2) return false;
  }
  int octets = 0;
  size_t pos = 0;
  while (pos <= base.size()) {
    size_t dot = base.find('.', pos);
    std::string_view part =
        base.substr(pos, (dot == std::string_view::npos ? base.size() : dot) - pos);
    if (!all_digit(part) || part.size() > 3) return false;
    int v = 0;
    for (char c : part) v = v * 10 + (c - '0');
    if (v > 255) return false;
    ++octets;
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return octets == 4;
}

bool is_hex_pair(std::string_view s) {
  if (s.size() != 2) return false;
  for (char c : s) {
    if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

bool is_mac(std::string_view s) {
  // six ':' or '-' separated hex pairs
  char sep = 0;
  if (s.size() != 17) return false;
  if (s[2] == ':' || s[2] == '-') sep = s[2];
  if (sep == 0) return false;
  for (int i = 0; i < 6; ++i) {
    size_t off = static_cast<size_t>(i) * 3;
    if (!is_hex_pair(s.substr(off, 2))) return false;
    if (i < 5 && s[off + 2] != sep) return false;
  }
  return true;
}

const std::array<std::string_view, 23> kIfacePrefixes = {
    "ethernet", "gigabitethernet", "tengigabitethernet", "fortygige", "hundredgige",
    "eth", "et", "xe", "ge", "gi", "te", "fa", "po", "ae", "em", "ens",
    "swp", "port", "bond", "tun", "lo", "mgmt", "vlan"};

bool is_iface(std::string_view s) {
  // <known prefix>[-]<digits>([/.:]<digits>)*
  size_t alpha_end = 0;
  while (alpha_end < s.size() && std::isalpha(static_cast<unsigned char>(s[alpha_end]))) {
    ++alpha_end;
  }
  if (alpha_end == 0 || alpha_end == s.size()) return false;
  std::string prefix;
  prefix.reserve(alpha_end);
  for (size_t i = 0; i < alpha_end; ++i) {
    prefix.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
  }
  bool known = false;
  for (auto p : kIfacePrefixes) {
    if (prefix == p) {
      known = true;
      break;
    }
  }
  if (!known) return false;
  std::string_view rest = s.substr(alpha_end);
  if (!rest.empty() && rest.front() == '-') rest.remove_prefix(1);
  if (rest.empty()) return false;
  bool want_digit = true;
  for (char c : rest) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      want_digit = false;
    } else if (c == '/' || c == '.' || c == ':') {
      if (want_digit) return false;
      want_digit = true;
    } else {
      return false;
    }
  }
  return !want_digit;
}

Token classify(std::string_view s) {
  if (is_ip(s)) return {TokenKind::Ip, std::string(s)};
  if (is_mac(s)) return {TokenKind::Mac, std::string(s)};
  if (is_iface(s)) return {TokenKind::Iface, std::string(s)};
  if (is_number(s)) return {TokenKind::Num, std::string(s)};
  return {TokenKind::Word, std::string(s)};
}

void emit_chunk(std::string_view chunk, std::vector<Token>& out) {
  while (!chunk.empty() && is_strip_char(chunk.front())) chunk.remove_prefix(1);
  while (!chunk.empty() && is_strip_char(chunk.back())) chunk.remove_suffix(1);
  if (chunk.empty()) return;

  Token tok = classify(chunk);
  if (tok.kind != TokenKind::Word) {
    out.push_back(std::move(tok));
    return;
  }

  // Unmasked chunks split at interior punctuation; each piece is re-examined.
  size_t start = 0;
  bool split = false;
  for (size_t i = 0; i < chunk.size(); ++i) {
    if (is_split_char(chunk[i])) {
      split = true;
      if (i > start) emit_chunk(chunk.substr(start, i - start), out);
      start = i + 1;
    }
  }
  if (split) {
    if (start < chunk.size()) emit_chunk(chunk.substr(start), out);
  } else {
    out.push_back(std::move(tok));
  }
}

} // namespace

const char* wildcard_marker(TokenKind kind) {
  switch (kind) {
    case TokenKind::Num: return "<NUM>";
    case TokenKind::Ip: return "<IP>";
    case TokenKind::Mac: return "<MAC>";
    case TokenKind::Iface: return "<IFACE>";
    case TokenKind::Word: return "";
  }
  return "";
}

const std::string& masked_text(const Token& tok) {
  static const std::string num = "<NUM>", ip = "<IP>", mac = "<MAC>", iface = "<IFACE>";
  switch (tok.kind) {
    case TokenKind::Num: return num;
    case TokenKind::Ip: return ip;
    case TokenKind::Mac: return mac;
    case TokenKind::Iface: return iface;
    case TokenKind::Word: return tok.text;
  }
  return tok.text;
}

std::vector<Token> tokenize_line(const std::string& message) {
  if (message.empty()) throw Error(ErrorCode::EmptyMessage, "empty syslog message");

  std::vector<Token> out;
  size_t start = 0;
  for (size_t i = 0; i <= message.size(); ++i) {
    if (i == message.size() || std::isspace(static_cast<unsigned char>(message[i]))) {
      if (i > start) emit_chunk(std::string_view(message).substr(start, i - start), out);
      start = i + 1;
    }
  }
  if (out.empty()) {
    throw Error(ErrorCode::EmptyMessage, "message contains only separators: " + message);
  }
  return out;
}

std::vector<std::string> masked_tokens(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(masked_text(t));
  return out;
}

} // namespace causelog
