#include "astray/features.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace astray {

namespace {

using nlohmann::json;

const std::vector<MetricInfo> kCatalog = {
    // group 1: general code metrics
    {"line_count", 1, false},
    {"node_count", 1, false},
    {"tree_height", 1, false},
    {"leaf_count", 1, false},
    {"token_text_length", 1, false},
    {"statement_count", 1, false},
    {"block_count", 1, false},
    {"max_statements_per_block", 1, false},
    // group 2: structural metrics
    {"max_nesting_depth", 2, false},
    {"cyclomatic_complexity", 2, false},
    {"when_expr_count", 2, false},
    {"when_branch_count", 2, false},
    {"max_when_branches", 2, false},
    {"if_expr_count", 2, false},
    {"for_loop_count", 2, false},
    {"while_loop_count", 2, false},
    {"try_expr_count", 2, false},
    {"max_try_depth", 2, false},
    // group 3: external function metrics
    {"parameter_count", 3, false},
    {"type_parameter_count", 3, false},
    {"annotation_count", 3, false},
    {"default_parameter_count", 3, false},
    {"modifier_count", 3, false},
    {"catch_clause_count", 3, false},
    {"nested_function_count", 3, false},
    // group 4: particular language element counts
    {"call_expr_count", 4, false},
    {"max_call_chain_length", 4, false},
    {"max_call_nesting_depth", 4, false},
    {"lambda_count", 4, false},
    {"string_template_count", 4, false},
    {"template_entry_count", 4, false},
    {"binary_expr_count", 4, false},
    {"unary_expr_count", 4, false},
    {"assignment_count", 4, false},
    {"compound_assignment_count", 4, false},
    {"return_count", 4, false},
    {"throw_count", 4, false},
    {"literal_count", 4, false},
    {"int_literal_count", 4, false},
    {"string_literal_count", 4, false},
    {"null_literal_count", 4, false},
    {"identifier_count", 4, false},
    {"unique_identifier_count", 4, false},
    {"property_decl_count", 4, false},
    {"index_expr_count", 4, false},
    {"arithmetic_op_count", 4, false},
    {"comparison_op_count", 4, false},
    {"logical_op_count", 4, false},
    {"range_op_count", 4, false},
    // binary slots, always last
    {"has_suspend_modifier", 3, true},
    {"is_extension_function", 3, true},
};

bool is_nesting_kind(NodeKind kind) {
    switch (kind) {
        case NodeKind::Block:
        case NodeKind::WhenExpr:
        case NodeKind::IfExpr:
        case NodeKind::TryExpr:
        case NodeKind::ForLoop:
        case NodeKind::WhileLoop:
        case NodeKind::Lambda:
            return true;
        default:
            return false;
    }
}

bool all_digits(const std::string& text) {
    if (text.empty()) return false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(text[i]))) continue;
        if (text[i] == 'L' && i + 1 == text.size() && i > 0) continue;
        return false;
    }
    return true;
}

// Number of navigation hops reachable by walking receiver edges downward.
std::size_t chain_length(const SyntaxNode& node) {
    const SyntaxNode* cur = &node;
    std::size_t hops = 0;
    while (true) {
        if (cur->children.empty()) break;
        if (cur->kind == NodeKind::Navigation) {
            ++hops;
            cur = &cur->children[0];
        } else if (cur->kind == NodeKind::CallExpr || cur->kind == NodeKind::IndexExpr) {
            cur = &cur->children[0];
        } else {
            break;
        }
    }
    return hops;
}

struct Tally {
    std::size_t node_count = 0;
    std::size_t leaf_count = 0;
    std::size_t text_length = 0;
    std::size_t statement_count = 0;
    std::size_t block_count = 0;
    std::size_t max_block_statements = 0;
    std::size_t max_nesting = 0;
    std::size_t when_exprs = 0;
    std::size_t when_branches = 0;
    std::size_t max_when_branches = 0;
    std::size_t non_else_branches = 0;
    std::size_t ifs = 0;
    std::size_t fors = 0;
    std::size_t whiles = 0;
    std::size_t tries = 0;
    std::size_t max_try_depth = 0;
    std::size_t annotations = 0;
    std::size_t catches = 0;
    std::size_t functions = 0;
    std::size_t calls = 0;
    std::size_t max_chain = 0;
    std::size_t max_call_nesting = 0;
    std::size_t lambdas = 0;
    std::size_t templates = 0;
    std::size_t template_entries = 0;
    std::size_t binaries = 0;
    std::size_t unaries = 0;
    std::size_t assignments = 0;
    std::size_t compound_assignments = 0;
    std::size_t returns = 0;
    std::size_t throws = 0;
    std::size_t literals = 0;
    std::size_t int_literals = 0;
    std::size_t string_literals = 0;
    std::size_t null_literals = 0;
    std::size_t identifiers = 0;
    std::size_t properties = 0;
    std::size_t indexes = 0;
    std::size_t arith_ops = 0;
    std::size_t cmp_ops = 0;
    std::size_t logic_ops = 0;
    std::size_t range_ops = 0;
    std::size_t height = 0;
    std::unordered_set<std::string> identifier_texts;

    void visit(const SyntaxNode& n, std::size_t nesting, std::size_t try_depth,
               std::size_t call_depth, std::size_t depth) {
        ++node_count;
        height = std::max(height, depth);
        if (n.children.empty()) ++leaf_count;
        text_length += n.text.size();

        if (is_nesting_kind(n.kind)) {
            ++nesting;
            max_nesting = std::max(max_nesting, nesting);
        }

        switch (n.kind) {
            case NodeKind::Block:
                ++block_count;
                statement_count += n.children.size();
                max_block_statements = std::max(max_block_statements, n.children.size());
                break;
            case NodeKind::WhenExpr: {
                ++when_exprs;
                std::size_t branches = 0;
                for (const SyntaxNode& c : n.children) {
                    branches += c.kind == NodeKind::WhenBranch ? 1 : 0;
                }
                max_when_branches = std::max(max_when_branches, branches);
                break;
            }
            case NodeKind::WhenBranch:
                ++when_branches;
                if (n.children.size() >= 2) ++non_else_branches;
                break;
            case NodeKind::IfExpr: ++ifs; break;
            case NodeKind::ForLoop: ++fors; break;
            case NodeKind::WhileLoop: ++whiles; break;
            case NodeKind::TryExpr:
                ++tries;
                ++try_depth;
                max_try_depth = std::max(max_try_depth, try_depth);
                break;
            case NodeKind::CatchClause: ++catches; break;
            case NodeKind::Annotation: ++annotations; break;
            case NodeKind::Function: ++functions; break;
            case NodeKind::CallExpr:
                ++calls;
                ++call_depth;
                max_call_nesting = std::max(max_call_nesting, call_depth);
                max_chain = std::max(max_chain, chain_length(n));
                break;
            case NodeKind::Navigation:
                max_chain = std::max(max_chain, chain_length(n));
                break;
            case NodeKind::Lambda: ++lambdas; break;
            case NodeKind::StringTemplate: {
                ++templates;
                bool has_entry = false;
                for (const SyntaxNode& c : n.children) {
                    has_entry |= c.kind == NodeKind::TemplateEntry;
                }
                if (!has_entry) ++string_literals;
                break;
            }
            case NodeKind::TemplateEntry: ++template_entries; break;
            case NodeKind::BinaryExpr: ++binaries; break;
            case NodeKind::UnaryExpr: ++unaries; break;
            case NodeKind::Assignment:
                ++assignments;
                if (n.children.size() == 3 && n.children[1].text != "=") ++compound_assignments;
                break;
            case NodeKind::Return: ++returns; break;
            case NodeKind::Throw: ++throws; break;
            case NodeKind::Literal:
                ++literals;
                if (all_digits(n.text)) ++int_literals;
                if (n.text == "null") ++null_literals;
                break;
            case NodeKind::Identifier:
                ++identifiers;
                identifier_texts.insert(n.text);
                break;
            case NodeKind::Property: ++properties; break;
            case NodeKind::IndexExpr: ++indexes; break;
            case NodeKind::Operator: {
                const std::string& op = n.text;
                if (op == "+" || op == "-" || op == "*" || op == "/" || op == "%") ++arith_ops;
                else if (op == "==" || op == "!=" || op == "<" || op == ">" || op == "<=" ||
                         op == ">=") ++cmp_ops;
                else if (op == "&&" || op == "||" || op == "!") ++logic_ops;
                else if (op == "..") ++range_ops;
                break;
            }
            default: break;
        }

        for (const SyntaxNode& c : n.children) {
            visit(c, nesting, try_depth, call_depth, depth + 1);
        }
    }
};

const SyntaxNode* child_of_kind(const SyntaxNode& node, NodeKind kind) {
    for (const SyntaxNode& c : node.children) {
        if (c.kind == kind) return &c;
    }
    return nullptr;
}

}  // namespace

const std::vector<MetricInfo>& metric_catalog() { return kCatalog; }

int metric_index(std::string_view name) {
    static const std::unordered_map<std::string_view, int> lookup = [] {
        std::unordered_map<std::string_view, int> m;
        for (std::size_t i = 0; i < kCatalog.size(); ++i) m.emplace(kCatalog[i].name, i);
        return m;
    }();
    auto it = lookup.find(name);
    if (it == lookup.end()) throw Error("unknown metric: " + std::string(name));
    return it->second;
}

MetricVector compute_metrics(const CodeUnit& unit) { return compute_metrics(unit.tree); }

MetricVector compute_metrics(const SyntaxNode& fn) {
    Tally t;
    t.visit(fn, 0, 0, 0, 1);

    // Expression-body functions contribute one statement.
    bool has_expr_body = false;
    bool past_params = false;
    for (const SyntaxNode& c : fn.children) {
        if (c.kind == NodeKind::ParameterList) {
            past_params = true;
            continue;
        }
        if (past_params && c.kind != NodeKind::TypeRef && c.kind != NodeKind::Block) {
            has_expr_body = true;
        }
    }

    const SyntaxNode* mods = child_of_kind(fn, NodeKind::ModifierList);
    std::size_t modifier_count = 0;
    bool has_suspend = false;
    if (mods != nullptr) {
        for (const SyntaxNode& m : mods->children) {
            if (m.kind == NodeKind::Modifier) {
                ++modifier_count;
                has_suspend |= m.text == "suspend";
            }
        }
    }

    const SyntaxNode* params = child_of_kind(fn, NodeKind::ParameterList);
    std::size_t param_count = params ? params->children.size() : 0;
    std::size_t defaults = 0;
    if (params != nullptr) {
        for (const SyntaxNode& p : params->children) {
            if (p.children.empty()) continue;
            const SyntaxNode& last = p.children.back();
            if (last.kind != NodeKind::Identifier && last.kind != NodeKind::TypeRef &&
                last.kind != NodeKind::ModifierList) {
                ++defaults;
            }
        }
    }

    const SyntaxNode* type_params = child_of_kind(fn, NodeKind::TypeParameterList);

    double cyclomatic = 1.0 + static_cast<double>(t.ifs + t.fors + t.whiles + t.catches +
                                                  t.non_else_branches);
    std::size_t guard_ops = 0;
    for_each_node(fn, [&](const SyntaxNode& n) {
        if (n.kind == NodeKind::Operator && (n.text == "&&" || n.text == "||")) ++guard_ops;
    });
    cyclomatic += static_cast<double>(guard_ops);

    MetricVector out;
    out.values.assign(kMetricCount, 0.0);
    auto set = [&](std::string_view name, double value) { out.values[metric_index(name)] = value; };

    int lines = fn.span.last_line - fn.span.first_line + 1;
    set("line_count", fn.span.first_line == 0 ? 1.0 : static_cast<double>(lines));
    set("node_count", static_cast<double>(t.node_count));
    set("tree_height", static_cast<double>(t.height));
    set("leaf_count", static_cast<double>(t.leaf_count));
    set("token_text_length", static_cast<double>(t.text_length));
    set("statement_count", static_cast<double>(t.statement_count + (has_expr_body ? 1 : 0)));
    set("block_count", static_cast<double>(t.block_count));
    set("max_statements_per_block", static_cast<double>(t.max_block_statements));

    set("max_nesting_depth", static_cast<double>(t.max_nesting));
    set("cyclomatic_complexity", cyclomatic);
    set("when_expr_count", static_cast<double>(t.when_exprs));
    set("when_branch_count", static_cast<double>(t.when_branches));
    set("max_when_branches", static_cast<double>(t.max_when_branches));
    set("if_expr_count", static_cast<double>(t.ifs));
    set("for_loop_count", static_cast<double>(t.fors));
    set("while_loop_count", static_cast<double>(t.whiles));
    set("try_expr_count", static_cast<double>(t.tries));
    set("max_try_depth", static_cast<double>(t.max_try_depth));

    set("parameter_count", static_cast<double>(param_count));
    set("type_parameter_count",
        static_cast<double>(type_params ? type_params->children.size() : 0));
    set("annotation_count", static_cast<double>(t.annotations));
    set("default_parameter_count", static_cast<double>(defaults));
    set("modifier_count", static_cast<double>(modifier_count));
    set("catch_clause_count", static_cast<double>(t.catches));
    set("nested_function_count", static_cast<double>(t.functions > 0 ? t.functions - 1 : 0));

    set("call_expr_count", static_cast<double>(t.calls));
    set("max_call_chain_length", static_cast<double>(t.max_chain));
    set("max_call_nesting_depth", static_cast<double>(t.max_call_nesting));
    set("lambda_count", static_cast<double>(t.lambdas));
    set("string_template_count", static_cast<double>(t.templates));
    set("template_entry_count", static_cast<double>(t.template_entries));
    set("binary_expr_count", static_cast<double>(t.binaries));
    set("unary_expr_count", static_cast<double>(t.unaries));
    set("assignment_count", static_cast<double>(t.assignments));
    set("compound_assignment_count", static_cast<double>(t.compound_assignments));
    set("return_count", static_cast<double>(t.returns));
    set("throw_count", static_cast<double>(t.throws));
    set("literal_count", static_cast<double>(t.literals));
    set("int_literal_count", static_cast<double>(t.int_literals));
    set("string_literal_count", static_cast<double>(t.string_literals));
    set("null_literal_count", static_cast<double>(t.null_literals));
    set("identifier_count", static_cast<double>(t.identifiers));
    set("unique_identifier_count", static_cast<double>(t.identifier_texts.size()));
    set("property_decl_count", static_cast<double>(t.properties));
    set("index_expr_count", static_cast<double>(t.indexes));
    set("arithmetic_op_count", static_cast<double>(t.arith_ops));
    set("comparison_op_count", static_cast<double>(t.cmp_ops));
    set("logical_op_count", static_cast<double>(t.logic_ops));
    set("range_op_count", static_cast<double>(t.range_ops));

    set("has_suspend_modifier", has_suspend ? 1.0 : 0.0);
    set("is_extension_function", child_of_kind(fn, NodeKind::ReceiverType) ? 1.0 : 0.0);
    return out;
}

// --- N-grams ---

namespace {

void chains_from(const SyntaxNode& node, int remaining, std::vector<std::string>& acc,
                 NGramCounts& out) {
    acc.emplace_back(node_kind_label(node.kind));
    out[NGram{acc}] += 1;
    if (remaining > 1) {
        for (const SyntaxNode& child : node.children) {
            chains_from(child, remaining - 1, acc, out);
        }
    }
    acc.pop_back();
}

void walk_tree(const SyntaxNode& node, int n_max, std::vector<std::string>& acc, NGramCounts& out) {
    chains_from(node, n_max, acc, out);
    for (const SyntaxNode& child : node.children) {
        walk_tree(child, n_max, acc, out);
    }
}

}  // namespace

NGramCounts extract_tree_ngrams(const SyntaxNode& tree, int n_max) {
    if (n_max < 1) throw ConfigError("n_max must be >= 1");
    NGramCounts out;
    std::vector<std::string> acc;
    walk_tree(tree, n_max, acc, out);
    return out;
}

NGramCounts extract_bytecode_ngrams(const std::vector<std::string>& instructions, int n_max,
                                    int window) {
    if (n_max < 1) throw ConfigError("n_max must be >= 1");
    if (window < n_max) throw ConfigError("window must be >= n_max");
    if (instructions.empty()) throw EmptySequence("no instructions to extract N-grams from");

    // The window advances one instruction at a time; at each position only
    // the grams starting at the window head are emitted, so every contiguous
    // n-gram occurrence is counted exactly once regardless of window size.
    NGramCounts out;
    std::size_t n = instructions.size();
    for (std::size_t head = 0; head < n; ++head) {
        std::size_t limit = std::min<std::size_t>(static_cast<std::size_t>(n_max), n - head);
        NGram gram;
        gram.items.reserve(limit);
        for (std::size_t k = 0; k < limit; ++k) {
            gram.items.push_back(instructions[head + k]);
            out[gram] += 1;
        }
    }
    return out;
}

std::string_view ngram_domain_label(NGramDomain domain) {
    return domain == NGramDomain::Tree ? "tree" : "bytecode";
}

const VocabEntry* NGramVocabulary::find(const NGram& gram) const {
    auto it = std::lower_bound(
        lookup_.begin(), lookup_.end(), gram,
        [&](std::uint32_t pos, const NGram& g) { return entries[pos].gram < g; });
    if (it != lookup_.end() && entries[*it].gram == gram) return &entries[*it];
    return nullptr;
}

void NGramVocabulary::rebuild_lookup() {
    lookup_.resize(entries.size());
    for (std::uint32_t i = 0; i < entries.size(); ++i) lookup_[i] = i;
    std::sort(lookup_.begin(), lookup_.end(),
              [&](std::uint32_t a, std::uint32_t b) { return entries[a].gram < entries[b].gram; });
}

json NGramVocabulary::to_json() const {
    json j;
    j["domain"] = std::string(ngram_domain_label(domain));
    j["corpus_size"] = corpus_size;
    j["min_df"] = min_df;
    j["max_df_ratio"] = max_df_ratio;
    json entries_json = json::array();
    for (const VocabEntry& e : entries) {
        entries_json.push_back({{"items", e.gram.items}, {"index", e.index}, {"df", e.document_frequency}});
    }
    j["entries"] = std::move(entries_json);
    return j;
}

NGramVocabulary NGramVocabulary::from_json(const json& j) {
    NGramVocabulary v;
    v.domain = j.at("domain").get<std::string>() == "bytecode" ? NGramDomain::Bytecode
                                                               : NGramDomain::Tree;
    v.corpus_size = j.at("corpus_size").get<std::uint64_t>();
    v.min_df = j.at("min_df").get<int>();
    v.max_df_ratio = j.at("max_df_ratio").get<double>();
    for (const json& e : j.at("entries")) {
        VocabEntry entry;
        entry.gram.items = e.at("items").get<std::vector<std::string>>();
        entry.index = e.at("index").get<std::uint32_t>();
        entry.document_frequency = e.at("df").get<std::uint64_t>();
        v.entries.push_back(std::move(entry));
    }
    v.rebuild_lookup();
    return v;
}

NGramVocabulary build_vocabulary(const std::vector<NGramCounts>& per_unit_counts, int min_df,
                                 double max_df_ratio, NGramDomain domain) {
    if (per_unit_counts.empty()) {
        throw EmptyVocabulary("cannot build a vocabulary from zero units");
    }
    std::map<NGram, std::uint64_t> df;
    for (const NGramCounts& unit : per_unit_counts) {
        for (const auto& [gram, count] : unit) {
            (void)count;
            df[gram] += 1;  // presence, not multiplicity
        }
    }

    double cap = max_df_ratio * static_cast<double>(per_unit_counts.size());
    std::vector<std::pair<NGram, std::uint64_t>> retained;
    for (const auto& [gram, freq] : df) {
        if (static_cast<std::int64_t>(freq) < min_df) continue;
        if (static_cast<double>(freq) > cap) continue;
        retained.emplace_back(gram, freq);
    }
    if (retained.empty()) {
        throw EmptyVocabulary("document-frequency filter removed every N-gram");
    }

    std::sort(retained.begin(), retained.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;  // descending df
        return a.first < b.first;                              // ties: lexicographic
    });

    NGramVocabulary vocab;
    vocab.domain = domain;
    vocab.corpus_size = per_unit_counts.size();
    vocab.min_df = min_df;
    vocab.max_df_ratio = max_df_ratio;
    vocab.entries.reserve(retained.size());
    for (std::size_t i = 0; i < retained.size(); ++i) {
        vocab.entries.push_back(
            {std::move(retained[i].first), static_cast<std::uint32_t>(i), retained[i].second});
    }
    vocab.rebuild_lookup();
    return vocab;
}

double SparseVector::l2_norm() const {
    double sum = 0.0;
    for (const auto& [idx, value] : pairs) {
        (void)idx;
        sum += value * value;
    }
    return std::sqrt(sum);
}

SparseVector vectorize(const NGramCounts& counts, const NGramVocabulary& vocab) {
    if (vocab.entries.empty()) throw EmptyVocabulary("vocabulary is empty");
    SparseVector vec;
    vec.dimension = static_cast<std::uint32_t>(vocab.entries.size());
    for (const auto& [gram, count] : counts) {
        const VocabEntry* entry = vocab.find(gram);
        if (entry != nullptr) {
            vec.pairs.emplace_back(entry->index, static_cast<double>(count));
        }
    }
    std::sort(vec.pairs.begin(), vec.pairs.end());
    return vec;
}

}  // namespace astray
