#include <string>
#include <vector>

#include "doctest.h"

#include "astray/lexer.hpp"
#include "support/fixtures.hpp"

using namespace astray;

namespace {

std::vector<std::string> texts(const std::vector<Token>& toks) {
    std::vector<std::string> out;
    for (const Token& t : toks) out.push_back(t.text);
    return out;
}

// Re-inserting every token at its recorded offset must reproduce the input,
// and the gaps between tokens must be pure whitespace.
void check_reconstruction(const std::string& src) {
    auto toks = tokenize(src);
    std::size_t pos = 0;
    for (const Token& t : toks) {
        REQUIRE(t.offset >= pos);
        for (std::size_t i = pos; i < t.offset; ++i) {
            bool ws = src[i] == ' ' || src[i] == '\t' || src[i] == '\n' || src[i] == '\r';
            REQUIRE(ws);
        }
        REQUIRE(src.compare(t.offset, t.text.size(), t.text) == 0);
        pos = t.offset + t.text.size();
    }
    for (std::size_t i = pos; i < src.size(); ++i) {
        bool ws = src[i] == ' ' || src[i] == '\t' || src[i] == '\n' || src[i] == '\r';
        REQUIRE(ws);
    }
}

}  // namespace

TEST_CASE("tokenize empty input") {
    CHECK(tokenize("").empty());
}

TEST_CASE("tokenize a minimal function") {
    auto toks = tokenize("fun f() {}");
    REQUIRE(toks.size() == 6);
    CHECK(toks[0].kind == TokenKind::Keyword);
    CHECK(toks[0].text == "fun");
    CHECK(toks[1].kind == TokenKind::Identifier);
    CHECK(toks[1].text == "f");
    CHECK(toks[2].kind == TokenKind::Punctuation);
    CHECK(toks[2].text == "(");
    CHECK(toks[3].text == ")");
    CHECK(toks[4].text == "{");
    CHECK(toks[5].text == "}");
    CHECK(toks[0].line == 1);
    CHECK(toks[0].column == 1);
    CHECK(toks[1].column == 5);
}

TEST_CASE("tokenize a string template interpolation") {
    auto toks = tokenize("val s = \"a${x}b\"");
    auto t = texts(toks);
    std::vector<std::string> expected = {"val", "s", "=", "\"", "a", "${", "x", "}", "b", "\""};
    CHECK(t == expected);
    CHECK(toks[4].kind == TokenKind::StringLiteral);
    CHECK(toks[5].kind == TokenKind::Punctuation);
    CHECK(toks[6].kind == TokenKind::Identifier);
    CHECK(toks[8].kind == TokenKind::StringLiteral);
}

TEST_CASE("tokenize shorthand template variable") {
    auto toks = tokenize("\"hi $name!\"");
    auto t = texts(toks);
    std::vector<std::string> expected = {"\"", "hi ", "$", "name", "!\"", "\""};
    // '!' stays inside the text segment; only the identifier is lifted out.
    CHECK(t[0] == "\"");
    CHECK(t[2] == "$");
    CHECK(t[3] == "name");
    CHECK(toks.back().text == "\"");
}

TEST_CASE("comments are emitted as comment tokens") {
    auto toks = tokenize("// header\nfun f() {} /* tail /* nested */ done */");
    REQUIRE(toks.front().kind == TokenKind::Comment);
    CHECK(toks.front().text == "// header");
    CHECK(toks.back().kind == TokenKind::Comment);
}

TEST_CASE("token positions strictly increase") {
    std::string src = read_fixture("corpus/control.kt");
    auto toks = tokenize(src);
    for (std::size_t i = 1; i < toks.size(); ++i) {
        CHECK(toks[i].offset > toks[i - 1].offset);
        bool line_order = toks[i].line > toks[i - 1].line ||
                          (toks[i].line == toks[i - 1].line &&
                           toks[i].column > toks[i - 1].column);
        CHECK(line_order);
    }
}

TEST_CASE("token texts plus whitespace reproduce the input") {
    for (const auto& name : corpus_fixture_names()) {
        check_reconstruction(read_fixture("corpus/" + name));
    }
    check_reconstruction("val s = \"a${x}b\"  // t\n");
}

TEST_CASE("unterminated string reports the opening position") {
    try {
        tokenize("val s = \"abc");
        FAIL("expected UnterminatedString");
    } catch (const UnterminatedString& e) {
        CHECK(e.line == 1);
        CHECK(e.column == 9);
    }
}

TEST_CASE("string may not span lines") {
    CHECK_THROWS_AS(tokenize("val s = \"a\nb\""), UnterminatedString);
}

TEST_CASE("illegal character reports position") {
    try {
        tokenize("fun f() {\n  val x = 1 ~ 2\n}");
        FAIL("expected IllegalCharacter");
    } catch (const IllegalCharacter& e) {
        CHECK(e.line == 2);
        CHECK(e.column == 13);
    }
}

TEST_CASE("keywords versus identifiers") {
    auto toks = tokenize("when whenever suspend fun");
    CHECK(toks[0].kind == TokenKind::Keyword);
    CHECK(toks[1].kind == TokenKind::Identifier);
    // suspend is a soft modifier, lexed as an identifier
    CHECK(toks[2].kind == TokenKind::Identifier);
    CHECK(is_soft_modifier(toks[2].text));
    CHECK(toks[3].kind == TokenKind::Keyword);
}
