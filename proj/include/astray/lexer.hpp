#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "astray/errors.hpp"

namespace astray {

enum class TokenKind : std::uint8_t {
    Keyword,
    Identifier,
    IntLiteral,
    StringLiteral,  // text segment of a string template, escapes kept verbatim
    Operator,
    Punctuation,
    Comment,
};

std::string_view token_kind_label(TokenKind kind);

struct Token {
    TokenKind kind;
    std::string text;
    int line;           // 1-based
    int column;         // 1-based, in bytes
    std::size_t offset; // byte offset into the source

    friend bool operator==(const Token&, const Token&) = default;
};

// Splits source text into tokens. Whitespace is skipped; comments are
// emitted as Comment tokens and filtered later by the parser. The token
// texts, re-inserted at their recorded offsets, reproduce the input.
//
// Throws UnterminatedString and IllegalCharacter with the offending
// position.
std::vector<Token> tokenize(std::string_view source);

bool is_hard_keyword(std::string_view word);
bool is_soft_modifier(std::string_view word);
const std::vector<std::string>& hard_keywords();
const std::vector<std::string>& soft_modifiers();

}  // namespace astray
