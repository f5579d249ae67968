#include <random>
#include <string>
#include <vector>

#include "doctest.h"

#include "astray/parser.hpp"
#include "support/fixtures.hpp"

using namespace astray;

namespace {

SyntaxNode leaf(NodeKind kind, std::string text) { return make_leaf(kind, std::move(text)); }
SyntaxNode node(NodeKind kind, std::vector<SyntaxNode> children = {}) {
    return make_node(kind, std::move(children));
}

std::size_t count_kind(const SyntaxNode& tree, NodeKind kind) {
    std::size_t n = 0;
    for_each_node(tree, [&](const SyntaxNode& x) { n += x.kind == kind ? 1 : 0; });
    return n;
}

const SyntaxNode* find_first(const SyntaxNode& tree, NodeKind kind) {
    if (tree.kind == kind) return &tree;
    for (const SyntaxNode& c : tree.children) {
        if (const SyntaxNode* hit = find_first(c, kind)) return hit;
    }
    return nullptr;
}

}  // namespace

TEST_CASE("parse minimal function") {
    SyntaxNode file = parse_source("fun f() {}");
    SyntaxNode expected = node(NodeKind::File, {node(NodeKind::Function, {
                                                    leaf(NodeKind::Identifier, "f"),
                                                    node(NodeKind::ParameterList),
                                                    node(NodeKind::Block),
                                                })});
    CHECK(structurally_equal(file, expected));
}

TEST_CASE("parse empty file") {
    SyntaxNode file = parse_source("");
    CHECK(file.kind == NodeKind::File);
    CHECK(file.children.empty());
}

TEST_CASE("parse when expression with two branches") {
    SyntaxNode file = parse_source("fun g(x: Int) = when(x) { 1 -> 1 else -> 0 }");
    const SyntaxNode* fn = find_first(file, NodeKind::Function);
    REQUIRE(fn != nullptr);
    const SyntaxNode* when = find_first(*fn, NodeKind::WhenExpr);
    REQUIRE(when != nullptr);
    CHECK(count_kind(*when, NodeKind::WhenBranch) == 2);
    // subject + 2 branches
    REQUIRE(when->children.size() == 3);
    CHECK(when->children[0].kind == NodeKind::Identifier);
    CHECK(when->children[1].kind == NodeKind::WhenBranch);
    CHECK(when->children[2].children.size() == 1);  // else branch: body only
}

TEST_CASE("every function declaration becomes exactly one FUNCTION node") {
    std::string src = read_fixture("corpus/modifiers.kt");
    SyntaxNode file = parse_source(src);
    CHECK(count_kind(file, NodeKind::Function) == 9);  // 8 top-level + 1 nested
}

TEST_CASE("extension function carries receiver") {
    SyntaxNode file = parse_source("fun String.shout(): String = this");
    const SyntaxNode* fn = find_first(file, NodeKind::Function);
    REQUIRE(fn != nullptr);
    const SyntaxNode* recv = find_first(*fn, NodeKind::ReceiverType);
    REQUIRE(recv != nullptr);
    CHECK(recv->children[0].text == "String");
}

TEST_CASE("suspend modifier is recorded") {
    SyntaxNode file = parse_source("suspend fun f() {}");
    const SyntaxNode* mods = find_first(file, NodeKind::ModifierList);
    REQUIRE(mods != nullptr);
    REQUIRE(mods->children.size() == 1);
    CHECK(mods->children[0].kind == NodeKind::Modifier);
    CHECK(mods->children[0].text == "suspend");
}

TEST_CASE("string template parses into parts and entries") {
    SyntaxNode file = parse_source("fun f(x: Int) = \"a${x}b\"");
    const SyntaxNode* tmpl = find_first(file, NodeKind::StringTemplate);
    REQUIRE(tmpl != nullptr);
    REQUIRE(tmpl->children.size() == 3);
    CHECK(tmpl->children[0].kind == NodeKind::Literal);
    CHECK(tmpl->children[0].text == "a");
    CHECK(tmpl->children[1].kind == NodeKind::TemplateEntry);
    CHECK(tmpl->children[2].text == "b");
}

TEST_CASE("spans cover the declaration lines") {
    std::string src = "fun a() {\n    val x = 1\n}\n\nfun b() {}\n";
    SyntaxNode file = parse_source(src);
    REQUIRE(file.children.size() == 2);
    CHECK(file.children[0].span.first_line == 1);
    CHECK(file.children[0].span.last_line == 3);
    CHECK(file.children[1].span.first_line == 5);
    CHECK(file.children[1].span.last_line == 5);
}

TEST_CASE("only leaves carry text") {
    for (const auto& name : corpus_fixture_names()) {
        SyntaxNode file = parse_source(read_fixture("corpus/" + name));
        for_each_node(file, [](const SyntaxNode& n) {
            if (!n.children.empty()) CHECK(n.text.empty());
        });
    }
}

TEST_CASE("syntax errors report position and expected set") {
    try {
        parse_source("fun f( {}");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.line == 1);
        CHECK(!e.expected.empty());
    }
    CHECK_THROWS_AS(parse_source("fun"), SyntaxError);
    CHECK_THROWS_AS(parse_source("fun f() { val }"), SyntaxError);
}

TEST_CASE("bundled corpus parses in full") {
    for (const auto& name : corpus_fixture_names()) {
        CAPTURE(name);
        CHECK_NOTHROW(parse_source(read_fixture("corpus/" + name)));
    }
}

TEST_CASE("out-of-subset files fail with SyntaxError, never crash") {
    for (const auto& name : reject_fixture_names()) {
        CAPTURE(name);
        CHECK_THROWS_AS(parse_source(read_fixture("rejects/" + name)), SyntaxError);
    }
}

TEST_CASE("arbitrary input never crashes the parser") {
    std::mt19937_64 rng(987654);
    const std::string alphabet =
        "fun class val var when if else { } ( ) [ ] \" $ + - * / % . , : ; @ ! ? < > = & | \n "
        "name x1 y2 Int String 0 42 \\ _ ~ # ^ '";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::uniform_int_distribution<int> len(0, 200);
    for (int round = 0; round < 500; ++round) {
        std::string source;
        int n = len(rng);
        for (int i = 0; i < n; ++i) source += alphabet[pick(rng)];
        try {
            parse_source(source);
        } catch (const Error&) {
            // LexError or SyntaxError are the only acceptable outcomes
        }
    }
    CHECK(true);
}

TEST_CASE("pretty-print round trip is structurally identical") {
    for (const auto& name : corpus_fixture_names()) {
        CAPTURE(name);
        SyntaxNode first = parse_source(read_fixture("corpus/" + name));
        std::string printed = pretty_print(first);
        CAPTURE(printed);
        SyntaxNode second = parse_source(printed);
        CHECK(structurally_equal(first, second));
    }
}

TEST_CASE("grammar description") {
    const Grammar& g = supported_subset();
    CHECK(g.has_rule("whenExpr"));
    CHECK(g.excludes("typealias"));
    CHECK(g.accepts_modifier("suspend"));
    CHECK(!g.accepts_modifier("typealias"));
    CHECK(g.node_kinds.size() == kNodeKindCount);
    // machine readable
    CHECK(g.to_json_string().find("whenExpr") != std::string::npos);
}

TEST_CASE("operator precedence shapes the tree") {
    SyntaxNode file = parse_source("fun f(a: Int, b: Int, c: Int) = a + b * c");
    const SyntaxNode* top = find_first(file, NodeKind::BinaryExpr);
    REQUIRE(top != nullptr);
    CHECK(top->children[1].text == "+");
    CHECK(top->children[2].kind == NodeKind::BinaryExpr);
    CHECK(top->children[2].children[1].text == "*");
}

TEST_CASE("parenthesized expressions regroup") {
    SyntaxNode file = parse_source("fun f(a: Int, b: Int, c: Int) = (a + b) * c");
    const SyntaxNode* top = find_first(file, NodeKind::BinaryExpr);
    REQUIRE(top != nullptr);
    CHECK(top->children[1].text == "*");
    CHECK(top->children[0].kind == NodeKind::BinaryExpr);
}

TEST_CASE("call chain builds nested navigation") {
    SyntaxNode file = parse_source("fun f(q: Q) = q.a().b().c()");
    const SyntaxNode* fn = find_first(file, NodeKind::Function);
    CHECK(count_kind(*fn, NodeKind::CallExpr) == 3);
    CHECK(count_kind(*fn, NodeKind::Navigation) == 3);
}
