#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace astray {

// Closed catalog of syntax node kinds, shared between the bundled parser
// and the neutral tree ingestion path. Externally produced trees must use
// exactly these labels.
enum class NodeKind : std::uint8_t {
    File,
    Class,
    Function,
    Property,
    ModifierList,
    Modifier,
    Annotation,
    TypeParameterList,
    TypeParameter,
    ParameterList,
    Parameter,
    ReceiverType,
    TypeRef,
    Block,
    WhenExpr,
    WhenBranch,
    IfExpr,
    TryExpr,
    CatchClause,
    FinallyClause,
    ForLoop,
    WhileLoop,
    Return,
    Throw,
    Assignment,
    BinaryExpr,
    UnaryExpr,
    CallExpr,
    ValueArguments,
    Navigation,
    IndexExpr,
    Lambda,
    StringTemplate,
    TemplateEntry,
    Identifier,
    Literal,
    Operator,
};

inline constexpr std::size_t kNodeKindCount = static_cast<std::size_t>(NodeKind::Operator) + 1;

std::string_view node_kind_label(NodeKind kind);
std::optional<NodeKind> node_kind_from_label(std::string_view label);
const std::vector<NodeKind>& all_node_kinds();

// 1-based inclusive line range of a node in its source file.
struct Span {
    int first_line = 0;
    int last_line = 0;

    friend bool operator==(const Span&, const Span&) = default;
};

struct SyntaxNode {
    NodeKind kind = NodeKind::File;
    std::vector<SyntaxNode> children;
    std::string text;  // leaf nodes only
    Span span;

    bool is_leaf() const { return children.empty(); }
};

SyntaxNode make_leaf(NodeKind kind, std::string text, Span span = {});
SyntaxNode make_node(NodeKind kind, std::vector<SyntaxNode> children, Span span = {});

// Structural comparison: kinds, leaf texts and child order; spans ignored.
bool structurally_equal(const SyntaxNode& a, const SyntaxNode& b);

// FNV-1a over the normalized (span-free) serialization of the tree.
// Identifier and literal texts participate; two trees hash equal iff they
// are structurally equal (modulo 64-bit collisions).
std::uint64_t normalized_tree_hash(const SyntaxNode& node);
std::string normalized_tree_hash_hex(const SyntaxNode& node);

std::size_t count_nodes(const SyntaxNode& node);
// Height in nodes: a lone node has height 1.
std::size_t tree_height(const SyntaxNode& node);
void for_each_node(const SyntaxNode& node, const std::function<void(const SyntaxNode&)>& fn);

}  // namespace astray
