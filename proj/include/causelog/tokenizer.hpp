#pragma once

#include <string>
#include <vector>

namespace causelog {

enum class TokenKind { Word, Num, Ip, Mac, Iface };

struct Token {
  TokenKind kind = TokenKind::Word;
  std::string text; // original text, before masking

  bool operator==(const Token& other) const = default;
};

// The masked view of a token: the literal text for words, a typed wildcard
// marker for everything else.
const std::string& masked_text(const Token& tok);
const char* wildcard_marker(TokenKind kind); // "<NUM>", "<IP>", ...

// Splits on whitespace and punctuation boundaries, then masks numerals, IP
// addresses, MAC addresses, and interface indices into typed tokens. Token
// order follows the source text. Throws Error(EmptyMessage) when the message
// is empty or contains only separators.
std::vector<Token> tokenize_line(const std::string& message);

std::vector<std::string> masked_tokens(const std::vector<Token>& tokens);

} // namespace causelog
