#include "astray/lexer.hpp"

#include <cctype>
#include <unordered_set>

namespace astray {

namespace {

const std::vector<std::string> kKeywords = {
    "as",    "catch", "class", "else",  "false", "finally", "for",   "fun",
    "if",    "in",    "is",    "null",  "return", "throw",  "true",  "try",
    "val",   "var",   "when",  "while",
};

// Recognized contextually in modifier position; plain identifiers elsewhere.
const std::vector<std::string> kModifiers = {
    "abstract", "const",    "crossinline", "data",     "external", "final",
    "infix",    "inline",   "inner",       "internal", "lateinit", "noinline",
    "open",     "operator", "override",    "private",  "protected", "public",
    "reified",  "sealed",   "suspend",     "tailrec",  "vararg",
};

const std::unordered_set<std::string_view>& keyword_set() {
    static const std::unordered_set<std::string_view> s(kKeywords.begin(), kKeywords.end());
    return s;
}

const std::unordered_set<std::string_view>& modifier_set() {
    static const std::unordered_set<std::string_view> s(kModifiers.begin(), kModifiers.end());
    return s;
}

// Multi-character operators, longest match first.
const std::vector<std::string_view> kMultiOps = {
    "==", "!=", "<=", ">=", "&&", "||", "->", "..", "?.", "?:",
    "+=", "-=", "*=", "/=", "%=",
};

constexpr std::string_view kSingleOps = "=<>+-*/%!.?:@$";
constexpr std::string_view kPunct = "(){}[],;";

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_part(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
                continue;
            }
            if (c == '/' && peek(1) == '/') {
                lex_line_comment();
                continue;
            }
            if (c == '/' && peek(1) == '*') {
                lex_block_comment();
                continue;
            }
            if (c == '"') {
                lex_string_template();
                continue;
            }
            if (is_ident_start(c)) {
                lex_word();
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                lex_int();
                continue;
            }
            if (c == '$' && peek(1) == '{') {
                // Bare "${" outside a string template is not part of the subset.
                throw IllegalCharacter("unexpected '${' outside string template", line_, column_);
            }
            if (lex_operator_or_punct()) {
                continue;
            }
            throw IllegalCharacter(std::string("illegal character '") + c + "'", line_, column_);
        }
        return std::move(tokens_);
    }

private:
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void emit(TokenKind kind, std::size_t start, int line, int column) {
        tokens_.push_back(Token{kind, std::string(src_.substr(start, pos_ - start)), line, column, start});
    }

    void lex_line_comment() {
        std::size_t start = pos_;
        int line = line_, col = column_;
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        emit(TokenKind::Comment, start, line, col);
    }

    void lex_block_comment() {
        std::size_t start = pos_;
        int line = line_, col = column_;
        advance();  // '/'
        advance();  // '*'
        int depth = 1;  // block comments nest
        while (pos_ < src_.size() && depth > 0) {
            if (peek() == '/' && peek(1) == '*') {
                ++depth;
                advance();
                advance();
            } else if (peek() == '*' && peek(1) == '/') {
                --depth;
                advance();
                advance();
            } else {
                advance();
            }
        }
        if (depth > 0) {
            throw IllegalCharacter("unterminated block comment", line, col);
        }
        emit(TokenKind::Comment, start, line, col);
    }

    void lex_word() {
        std::size_t start = pos_;
        int line = line_, col = column_;
        while (pos_ < src_.size() && is_ident_part(src_[pos_])) advance();
        std::string_view word = src_.substr(start, pos_ - start);
        emit(keyword_set().count(word) ? TokenKind::Keyword : TokenKind::Identifier, start, line, col);
    }

    void lex_int() {
        std::size_t start = pos_;
        int line = line_, col = column_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        // Trailing L for long literals, as in 42L.
        if (pos_ < src_.size() && src_[pos_] == 'L') advance();
        emit(TokenKind::IntLiteral, start, line, col);
    }

    bool lex_operator_or_punct() {
        for (std::string_view op : kMultiOps) {
            if (src_.substr(pos_).starts_with(op)) {
                std::size_t start = pos_;
                int line = line_, col = column_;
                for (std::size_t i = 0; i < op.size(); ++i) advance();
                emit(TokenKind::Operator, start, line, col);
                return true;
            }
        }
        char c = src_[pos_];
        if (kSingleOps.find(c) != std::string_view::npos) {
            std::size_t start = pos_;
            int line = line_, col = column_;
            advance();
            emit(TokenKind::Operator, start, line, col);
            return true;
        }
        if (kPunct.find(c) != std::string_view::npos) {
            std::size_t start = pos_;
            int line = line_, col = column_;
            advance();
            emit(TokenKind::Punctuation, start, line, col);
            return true;
        }
        return false;
    }

    // Single-line string template: "text${expr}text$name". The opening and
    // closing quotes and the ${ } delimiters become Punctuation tokens, text
    // segments become StringLiteral tokens (escape sequences verbatim), and
    // interpolated expressions are lexed as regular tokens.
    void lex_string_template() {
        int open_line = line_, open_col = column_;
        std::size_t start = pos_;
        advance();  // opening quote
        emit(TokenKind::Punctuation, start, open_line, open_col);

        std::size_t seg_start = pos_;
        int seg_line = line_, seg_col = column_;
        auto flush_segment = [&] {
            if (pos_ > seg_start) {
                emit(TokenKind::StringLiteral, seg_start, seg_line, seg_col);
            }
        };

        while (true) {
            if (pos_ >= src_.size() || peek() == '\n') {
                throw UnterminatedString(open_line, open_col);
            }
            char c = peek();
            if (c == '\\') {
                if (pos_ + 1 >= src_.size()) throw UnterminatedString(open_line, open_col);
                advance();
                advance();
                continue;
            }
            if (c == '"') {
                flush_segment();
                std::size_t qstart = pos_;
                int qline = line_, qcol = column_;
                advance();
                emit(TokenKind::Punctuation, qstart, qline, qcol);
                return;
            }
            if (c == '$' && peek(1) == '{') {
                flush_segment();
                std::size_t dstart = pos_;
                int dline = line_, dcol = column_;
                advance();
                advance();
                emit(TokenKind::Punctuation, dstart, dline, dcol);
                lex_interpolation(open_line, open_col);
                seg_start = pos_;
                seg_line = line_;
                seg_col = column_;
                continue;
            }
            if (c == '$' && is_ident_start(peek(1))) {
                flush_segment();
                std::size_t dstart = pos_;
                int dline = line_, dcol = column_;
                advance();
                emit(TokenKind::Operator, dstart, dline, dcol);
                lex_word();
                seg_start = pos_;
                seg_line = line_;
                seg_col = column_;
                continue;
            }
            advance();
        }
    }

    // Lexes regular tokens inside ${...} until the matching closing brace.
    void lex_interpolation(int open_line, int open_col) {
        int depth = 1;
        while (true) {
            while (pos_ < src_.size() &&
                   (peek() == ' ' || peek() == '\t' || peek() == '\r')) {
                advance();
            }
            if (pos_ >= src_.size() || peek() == '\n') {
                throw UnterminatedString(open_line, open_col);
            }
            char c = peek();
            if (c == '{') {
                ++depth;
            } else if (c == '}') {
                --depth;
                if (depth == 0) {
                    std::size_t bstart = pos_;
                    int bline = line_, bcol = column_;
                    advance();
                    emit(TokenKind::Punctuation, bstart, bline, bcol);
                    return;
                }
            }
            if (c == '"') {
                lex_string_template();  // nested template
                continue;
            }
            if (is_ident_start(c)) {
                lex_word();
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                lex_int();
                continue;
            }
            if (c == '{' || c == '}') {
                std::size_t bstart = pos_;
                int bline = line_, bcol = column_;
                advance();
                emit(TokenKind::Punctuation, bstart, bline, bcol);
                continue;
            }
            if (lex_operator_or_punct()) {
                continue;
            }
            throw IllegalCharacter(std::string("illegal character '") + c + "' in string template",
                                   line_, column_);
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
    std::vector<Token> tokens_;
};

}  // namespace

std::string_view token_kind_label(TokenKind kind) {
    switch (kind) {
        case TokenKind::Keyword: return "keyword";
        case TokenKind::Identifier: return "identifier";
        case TokenKind::IntLiteral: return "literal-int";
        case TokenKind::StringLiteral: return "literal-string";
        case TokenKind::Operator: return "operator";
        case TokenKind::Punctuation: return "punctuation";
        case TokenKind::Comment: return "comment";
    }
    return "?";
}

std::vector<Token> tokenize(std::string_view source) {
    return Lexer(source).run();
}

bool is_hard_keyword(std::string_view word) { return keyword_set().count(word) > 0; }
bool is_soft_modifier(std::string_view word) { return modifier_set().count(word) > 0; }
const std::vector<std::string>& hard_keywords() { return kKeywords; }
const std::vector<std::string>& soft_modifiers() { return kModifiers; }

}  // namespace astray
