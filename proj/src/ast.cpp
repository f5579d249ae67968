#include "astray/ast.hpp"

#include <array>
#include <unordered_map>

namespace astray {

namespace {

constexpr std::array<std::string_view, kNodeKindCount> kLabels = {
    "FILE",
    "CLASS",
    "FUNCTION",
    "PROPERTY",
    "MODIFIER_LIST",
    "MODIFIER",
    "ANNOTATION",
    "TYPE_PARAMETER_LIST",
    "TYPE_PARAMETER",
    "PARAMETER_LIST",
    "PARAMETER",
    "RECEIVER_TYPE",
    "TYPE_REF",
    "BLOCK",
    "WHEN_EXPR",
    "WHEN_BRANCH",
    "IF_EXPR",
    "TRY_EXPR",
    "CATCH_CLAUSE",
    "FINALLY_CLAUSE",
    "FOR_LOOP",
    "WHILE_LOOP",
    "RETURN",
    "THROW",
    "ASSIGNMENT",
    "BINARY_EXPR",
    "UNARY_EXPR",
    "CALL_EXPR",
    "VALUE_ARGUMENTS",
    "NAVIGATION",
    "INDEX_EXPR",
    "LAMBDA",
    "STRING_TEMPLATE",
    "TEMPLATE_ENTRY",
    "IDENTIFIER",
    "LITERAL",
    "OPERATOR",
};

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void fnv1a(std::uint64_t& h, std::string_view bytes) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
}

void fnv1a(std::uint64_t& h, char c) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
}

void hash_node(std::uint64_t& h, const SyntaxNode& node) {
    fnv1a(h, '(');
    fnv1a(h, node_kind_label(node.kind));
    if (!node.text.empty()) {
        fnv1a(h, '\x1f');
        fnv1a(h, node.text);
    }
    for (const SyntaxNode& child : node.children) {
        hash_node(h, child);
    }
    fnv1a(h, ')');
}

}  // namespace

std::string_view node_kind_label(NodeKind kind) {
    return kLabels[static_cast<std::size_t>(kind)];
}

std::optional<NodeKind> node_kind_from_label(std::string_view label) {
    static const std::unordered_map<std::string_view, NodeKind> lookup = [] {
        std::unordered_map<std::string_view, NodeKind> m;
        for (std::size_t i = 0; i < kNodeKindCount; ++i) {
            m.emplace(kLabels[i], static_cast<NodeKind>(i));
        }
        return m;
    }();
    auto it = lookup.find(label);
    if (it == lookup.end()) return std::nullopt;
    return it->second;
}

const std::vector<NodeKind>& all_node_kinds() {
    static const std::vector<NodeKind> kinds = [] {
        std::vector<NodeKind> v;
        v.reserve(kNodeKindCount);
        for (std::size_t i = 0; i < kNodeKindCount; ++i) {
            v.push_back(static_cast<NodeKind>(i));
        }
        return v;
    }();
    return kinds;
}

SyntaxNode make_leaf(NodeKind kind, std::string text, Span span) {
    SyntaxNode node;
    node.kind = kind;
    node.text = std::move(text);
    node.span = span;
    return node;
}

SyntaxNode make_node(NodeKind kind, std::vector<SyntaxNode> children, Span span) {
    SyntaxNode node;
    node.kind = kind;
    node.children = std::move(children);
    node.span = span;
    return node;
}

bool structurally_equal(const SyntaxNode& a, const SyntaxNode& b) {
    if (a.kind != b.kind || a.text != b.text) return false;
    if (a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!structurally_equal(a.children[i], b.children[i])) return false;
    }
    return true;
}

std::uint64_t normalized_tree_hash(const SyntaxNode& node) {
    std::uint64_t h = kFnvOffset;
    hash_node(h, node);
    return h;
}

std::string normalized_tree_hash_hex(const SyntaxNode& node) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = normalized_tree_hash(node);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::size_t count_nodes(const SyntaxNode& node) {
    std::size_t n = 1;
    for (const SyntaxNode& child : node.children) n += count_nodes(child);
    return n;
}

std::size_t tree_height(const SyntaxNode& node) {
    std::size_t best = 0;
    for (const SyntaxNode& child : node.children) {
        best = std::max(best, tree_height(child));
    }
    return best + 1;
}

void for_each_node(const SyntaxNode& node, const std::function<void(const SyntaxNode&)>& fn) {
    fn(node);
    for (const SyntaxNode& child : node.children) for_each_node(child, fn);
}

}  // namespace astray
