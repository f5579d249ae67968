#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "astray/ast.hpp"
#include "astray/lexer.hpp"

namespace astray {

// Machine-readable description of the language subset the bundled parser
// accepts.
struct Grammar {
    struct Rule {
        std::string name;
        std::string definition;
    };

    std::string version;
    std::vector<Rule> rules;
    std::vector<std::string> keywords;       // hard keywords
    std::vector<std::string> modifiers;      // soft modifiers, e.g. "suspend"
    std::vector<std::string> node_kinds;     // closed node-kind catalog
    std::vector<std::string> excluded;       // constructs outside the subset

    bool has_rule(std::string_view name) const;
    bool accepts_modifier(std::string_view name) const;
    bool excludes(std::string_view construct) const;
    std::string to_json_string() const;
};

const Grammar& supported_subset();

// Parses a comment-filtered token stream into a FILE-rooted tree.
// Throws SyntaxError with position and the expected-token set.
SyntaxNode parse(const std::vector<Token>& tokens);

// tokenize() + parse() in one step.
SyntaxNode parse_source(std::string_view source);

// Renders a tree back to source text. Reparsing the output yields a
// structurally identical tree; formatting and redundant parentheses are
// normalized.
std::string pretty_print(const SyntaxNode& tree);

}  // namespace astray
