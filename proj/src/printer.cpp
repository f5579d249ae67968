#include <sstream>
#include <string>

#include "astray/parser.hpp"

namespace astray {

namespace {

// Binding strength of binary operators, mirroring the parser's precedence
// ladder. Used to decide where parentheses are required.
int op_level(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 4;
    if (op == "in" || op == "is" || op == "!in" || op == "!is") return 5;
    if (op == "?:") return 6;
    if (op == "..") return 7;
    if (op == "+" || op == "-") return 8;
    if (op == "*" || op == "/" || op == "%") return 9;
    if (op == "as" || op == "as?") return 10;
    return 13;
}

constexpr int kPrefixLevel = 11;
constexpr int kPostfixLevel = 12;
constexpr int kAtomLevel = 13;

class Printer {
public:
    std::string print_file(const SyntaxNode& file) {
        for (std::size_t i = 0; i < file.children.size(); ++i) {
            if (i > 0) out_ += "\n";
            statement(file.children[i], 0);
        }
        return out_;
    }

private:
    std::string pad(int ind) const { return std::string(static_cast<std::size_t>(ind) * 4, ' '); }

    void statement(const SyntaxNode& n, int ind) {
        out_ += pad(ind) + stmt_text(n, ind) + "\n";
    }

    std::string stmt_text(const SyntaxNode& n, int ind) {
        switch (n.kind) {
            case NodeKind::Function: return function_text(n, ind);
            case NodeKind::Class: return class_text(n, ind);
            case NodeKind::Property: return property_text(n, ind);
            case NodeKind::Assignment:
                return expr(n.children[0], 0, ind) + " " + n.children[1].text + " " +
                       expr(n.children[2], 0, ind);
            case NodeKind::Return:
                return n.children.empty() ? "return" : "return " + expr(n.children[0], 0, ind);
            case NodeKind::Throw: return "throw " + expr(n.children[0], 0, ind);
            case NodeKind::ForLoop: return for_text(n, ind);
            case NodeKind::WhileLoop:
                return "while (" + expr(n.children[0], 0, ind) + ") " + body_text(n.children[1], ind);
            default: return expr(n, 0, ind);
        }
    }

    std::string modifiers_prefix(const SyntaxNode& mods, int ind) {
        std::string out;
        for (const SyntaxNode& m : mods.children) {
            if (m.kind == NodeKind::Annotation) {
                out += "@" + m.children[0].text;
                if (m.children.size() > 1) out += value_arguments_text(m.children[1], ind);
            } else {
                out += m.text;
            }
            out += " ";
        }
        return out;
    }

    std::string function_text(const SyntaxNode& fn, int ind) {
        std::string out;
        std::size_t i = 0;
        if (i < fn.children.size() && fn.children[i].kind == NodeKind::ModifierList) {
            out += modifiers_prefix(fn.children[i], ind);
            ++i;
        }
        out += "fun ";
        if (i < fn.children.size() && fn.children[i].kind == NodeKind::TypeParameterList) {
            out += type_parameters_text(fn.children[i], ind) + " ";
            ++i;
        }
        if (i < fn.children.size() && fn.children[i].kind == NodeKind::ReceiverType) {
            out += fn.children[i].children[0].text + ".";
            ++i;
        }
        out += fn.children[i].text;  // name
        ++i;
        out += parameter_list_text(fn.children[i], ind);
        ++i;
        if (i < fn.children.size() && fn.children[i].kind == NodeKind::TypeRef) {
            out += ": " + fn.children[i].text;
            ++i;
        }
        if (i < fn.children.size()) {
            const SyntaxNode& body = fn.children[i];
            if (body.kind == NodeKind::Block) {
                out += " " + block_text(body, ind);
            } else {
                out += " = " + expr(body, 0, ind);
            }
        }
        return out;
    }

    std::string class_text(const SyntaxNode& cls, int ind) {
        std::string out;
        std::size_t i = 0;
        if (i < cls.children.size() && cls.children[i].kind == NodeKind::ModifierList) {
            out += modifiers_prefix(cls.children[i], ind);
            ++i;
        }
        out += "class " + cls.children[i].text;
        ++i;
        if (i < cls.children.size() && cls.children[i].kind == NodeKind::TypeParameterList) {
            out += type_parameters_text(cls.children[i], ind);
            ++i;
        }
        if (i < cls.children.size() && cls.children[i].kind == NodeKind::ParameterList) {
            out += parameter_list_text(cls.children[i], ind);
            ++i;
        }
        bool first_super = true;
        while (i < cls.children.size() && (cls.children[i].kind == NodeKind::TypeRef ||
                                           (cls.children[i].kind == NodeKind::CallExpr &&
                                            cls.children[i].children[0].kind == NodeKind::TypeRef))) {
            out += first_super ? " : " : ", ";
            first_super = false;
            const SyntaxNode& sup = cls.children[i];
            if (sup.kind == NodeKind::TypeRef) {
                out += sup.text;
            } else {
                out += sup.children[0].text + value_arguments_text(sup.children[1], ind);
            }
            ++i;
        }
        if (i < cls.children.size() && cls.children[i].kind == NodeKind::Block) {
            out += " " + block_text(cls.children[i], ind);
        }
        return out;
    }

    std::string property_text(const SyntaxNode& prop, int ind) {
        std::string out;
        std::size_t i = 0;
        if (prop.children[i].kind == NodeKind::ModifierList) {
            out += modifiers_prefix(prop.children[i], ind);
            ++i;
        }
        out += prop.children[i].text;  // val | var
        ++i;
        out += " " + prop.children[i].text;  // name
        ++i;
        if (i < prop.children.size() && prop.children[i].kind == NodeKind::TypeRef) {
            out += ": " + prop.children[i].text;
            ++i;
        }
        if (i < prop.children.size()) {
            out += " = " + expr(prop.children[i], 0, ind);
        }
        return out;
    }

    std::string for_text(const SyntaxNode& loop, int ind) {
        std::string out = "for (" + loop.children[0].text;
        std::size_t i = 1;
        if (loop.children[i].kind == NodeKind::TypeRef) {
            out += ": " + loop.children[i].text;
            ++i;
        }
        out += " in " + expr(loop.children[i], 0, ind) + ") ";
        ++i;
        out += body_text(loop.children[i], ind);
        return out;
    }

    std::string type_parameters_text(const SyntaxNode& list, int ind) {
        std::string out = "<";
        for (std::size_t i = 0; i < list.children.size(); ++i) {
            if (i > 0) out += ", ";
            const SyntaxNode& tp = list.children[i];
            std::size_t j = 0;
            if (tp.children[j].kind == NodeKind::ModifierList) {
                out += modifiers_prefix(tp.children[j], ind);
                ++j;
            }
            out += tp.children[j].text;
            ++j;
            if (j < tp.children.size()) out += " : " + tp.children[j].text;
        }
        return out + ">";
    }

    std::string parameter_list_text(const SyntaxNode& list, int ind) {
        std::string out = "(";
        for (std::size_t i = 0; i < list.children.size(); ++i) {
            if (i > 0) out += ", ";
            out += parameter_text(list.children[i], ind);
        }
        return out + ")";
    }

    std::string parameter_text(const SyntaxNode& param, int ind) {
        std::string out;
        std::size_t i = 0;
        if (param.children[i].kind == NodeKind::ModifierList) {
            out += modifiers_prefix(param.children[i], ind);
            ++i;
        }
        out += param.children[i].text;  // name
        ++i;
        if (i < param.children.size() && param.children[i].kind == NodeKind::TypeRef) {
            out += ": " + param.children[i].text;
            ++i;
        }
        if (i < param.children.size()) {
            out += " = " + expr(param.children[i], 0, ind);
        }
        return out;
    }

    std::string block_text(const SyntaxNode& block, int ind) {
        if (block.children.empty()) return "{}";
        std::string out = "{\n";
        for (const SyntaxNode& s : block.children) {
            out += pad(ind + 1) + stmt_text(s, ind + 1) + "\n";
        }
        out += pad(ind) + "}";
        return out;
    }

    // Branch or loop body: block, control statement, or expression.
    std::string body_text(const SyntaxNode& n, int ind) {
        if (n.kind == NodeKind::Block) return block_text(n, ind);
        return stmt_text(n, ind);
    }

    std::string value_arguments_text(const SyntaxNode& args, int ind) {
        std::string out = "(";
        for (std::size_t i = 0; i < args.children.size(); ++i) {
            if (i > 0) out += ", ";
            const SyntaxNode& a = args.children[i];
            if (a.kind == NodeKind::Assignment) {
                out += a.children[0].text + " = " + expr(a.children[2], 0, ind);
            } else {
                out += expr(a, 0, ind);
            }
        }
        return out + ")";
    }

    std::string lambda_text(const SyntaxNode& lambda, int ind) {
        std::size_t i = 0;
        std::string head;
        if (i < lambda.children.size() && lambda.children[i].kind == NodeKind::ParameterList) {
            const SyntaxNode& params = lambda.children[i];
            for (std::size_t j = 0; j < params.children.size(); ++j) {
                if (j > 0) head += ", ";
                head += parameter_text(params.children[j], ind);
            }
            head += " ->";
            ++i;
        }
        std::size_t n_stmts = lambda.children.size() - i;
        if (n_stmts == 0) {
            return head.empty() ? "{}" : "{ " + head + " }";
        }
        if (n_stmts == 1) {
            std::string body = stmt_text(lambda.children[i], ind);
            if (body.find('\n') == std::string::npos) {
                return "{ " + (head.empty() ? "" : head + " ") + body + " }";
            }
        }
        std::string out = "{";
        if (!head.empty()) out += " " + head;
        out += "\n";
        for (; i < lambda.children.size(); ++i) {
            out += pad(ind + 1) + stmt_text(lambda.children[i], ind + 1) + "\n";
        }
        out += pad(ind) + "}";
        return out;
    }

    int own_level(const SyntaxNode& n) const {
        switch (n.kind) {
            case NodeKind::BinaryExpr: return op_level(n.children[1].text);
            case NodeKind::UnaryExpr: return kPrefixLevel;
            case NodeKind::CallExpr:
            case NodeKind::Navigation:
            case NodeKind::IndexExpr: return kPostfixLevel;
            case NodeKind::IfExpr: return 0;  // greedy else-branch needs parens in operands
            default: return kAtomLevel;
        }
    }

    std::string expr(const SyntaxNode& n, int required, int ind) {
        int level = own_level(n);
        std::string out = expr_raw(n, ind);
        if (level < required) return "(" + out + ")";
        return out;
    }

    std::string expr_raw(const SyntaxNode& n, int ind) {
        switch (n.kind) {
            case NodeKind::Identifier:
            case NodeKind::Literal:
            case NodeKind::TypeRef:
                return n.text;
            case NodeKind::StringTemplate: {
                std::string out = "\"";
                for (const SyntaxNode& part : n.children) {
                    if (part.kind == NodeKind::Literal) {
                        out += part.text;
                    } else {
                        out += "${" + expr(part.children[0], 0, ind) + "}";
                    }
                }
                return out + "\"";
            }
            case NodeKind::BinaryExpr: {
                int level = op_level(n.children[1].text);
                return expr(n.children[0], level, ind) + " " + n.children[1].text + " " +
                       expr(n.children[2], level + 1, ind);
            }
            case NodeKind::UnaryExpr: {
                const std::string& op = n.children[0].text;
                if (op == "in" || op == "is" || op == "!in" || op == "!is") {
                    return op + " " + expr(n.children[1], 0, ind);  // when-branch condition
                }
                return op + expr(n.children[1], kPrefixLevel, ind);
            }
            case NodeKind::Navigation:
                return expr(n.children[0], kPostfixLevel, ind) + n.children[1].text +
                       n.children[2].text;
            case NodeKind::CallExpr: {
                std::size_t i = 0;
                std::string out = expr(n.children[i], kPostfixLevel, ind);
                ++i;
                if (i < n.children.size() && n.children[i].kind == NodeKind::TypeRef) {
                    out += n.children[i].text;
                    ++i;
                }
                out += value_arguments_text(n.children[i], ind);
                ++i;
                if (i < n.children.size()) {
                    out += " " + lambda_text(n.children[i], ind);
                }
                return out;
            }
            case NodeKind::IndexExpr: {
                std::string out = expr(n.children[0], kPostfixLevel, ind) + "[";
                for (std::size_t i = 1; i < n.children.size(); ++i) {
                    if (i > 1) out += ", ";
                    out += expr(n.children[i], 0, ind);
                }
                return out + "]";
            }
            case NodeKind::Lambda: return lambda_text(n, ind);
            case NodeKind::IfExpr: {
                std::string out = "if (" + expr(n.children[0], 0, ind) + ") " +
                                  body_text(n.children[1], ind);
                if (n.children.size() > 2) {
                    out += " else " + body_text(n.children[2], ind);
                }
                return out;
            }
            case NodeKind::WhenExpr: {
                std::string out = "when";
                std::size_t i = 0;
                if (!n.children.empty() && n.children[0].kind != NodeKind::WhenBranch) {
                    out += " (" + expr(n.children[0], 0, ind) + ")";
                    i = 1;
                }
                out += " {\n";
                for (; i < n.children.size(); ++i) {
                    const SyntaxNode& branch = n.children[i];
                    out += pad(ind + 1);
                    if (branch.children.size() == 1) {
                        out += "else -> " + body_text(branch.children[0], ind + 1);
                    } else {
                        for (std::size_t c = 0; c + 1 < branch.children.size(); ++c) {
                            if (c > 0) out += ", ";
                            out += expr(branch.children[c], 0, ind + 1);
                        }
                        out += " -> " + body_text(branch.children.back(), ind + 1);
                    }
                    out += "\n";
                }
                return out + pad(ind) + "}";
            }
            case NodeKind::TryExpr: {
                std::string out = "try " + block_text(n.children[0], ind);
                for (std::size_t i = 1; i < n.children.size(); ++i) {
                    const SyntaxNode& clause = n.children[i];
                    if (clause.kind == NodeKind::CatchClause) {
                        out += " catch (" + parameter_text(clause.children[0], ind) + ") " +
                               block_text(clause.children[1], ind);
                    } else {
                        out += " finally " + block_text(clause.children[0], ind);
                    }
                }
                return out;
            }
            case NodeKind::Assignment:  // named argument or statement form
                return expr(n.children[0], 0, ind) + " " + n.children[1].text + " " +
                       expr(n.children[2], 0, ind);
            default:
                return stmt_text(n, ind);
        }
    }

    std::string out_;
};

}  // namespace

std::string pretty_print(const SyntaxNode& tree) {
    Printer printer;
    if (tree.kind == NodeKind::File) {
        return printer.print_file(tree);
    }
    SyntaxNode file = make_node(NodeKind::File, {tree});
    return printer.print_file(file);
}

}  // namespace astray
