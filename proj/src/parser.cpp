#include "astray/parser.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace astray {

namespace {

bool is_op(const Token& t, std::string_view text) {
    return (t.kind == TokenKind::Operator || t.kind == TokenKind::Punctuation) && t.text == text;
}

bool is_kw(const Token& t, std::string_view text) {
    return t.kind == TokenKind::Keyword && t.text == text;
}

class Parser {
public:
    explicit Parser(const std::vector<Token>& tokens) {
        toks_.reserve(tokens.size());
        for (const Token& t : tokens) {
            if (t.kind != TokenKind::Comment) toks_.push_back(t);
        }
    }

    SyntaxNode parse_file() {
        SyntaxNode file;
        file.kind = NodeKind::File;
        file.span = {1, toks_.empty() ? 1 : toks_.back().line};
        while (!at_end()) {
            file.children.push_back(parse_declaration());
        }
        return file;
    }

private:
    // --- token access ---

    bool at_end() const { return pos_ >= toks_.size(); }

    const Token& cur() const {
        if (pos_ < toks_.size()) return toks_[pos_];
        static Token eof{TokenKind::Punctuation, "<eof>", 0, 0, 0};
        Token& t = eof;
        t.line = toks_.empty() ? 1 : toks_.back().line;
        t.column = toks_.empty() ? 1 : toks_.back().column + static_cast<int>(toks_.back().text.size());
        return t;
    }

    const Token& peek(std::size_t ahead) const {
        static const Token eof{TokenKind::Punctuation, "<eof>", 0, 0, 0};
        return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead] : eof;
    }

    const Token& advance() { return toks_[pos_++]; }

    int cur_line() const { return cur().line; }
    int prev_line() const { return pos_ > 0 ? toks_[pos_ - 1].line : 1; }

    // Newline sensitivity: a binary operator or call/index/lambda suffix only
    // continues the current expression when it starts on the same line as the
    // token before it. Navigation ('.', '?.') is exempt so fluent chains can
    // wrap across lines.
    bool continues_line() const { return pos_ == 0 || at_end() || cur().line == toks_[pos_ - 1].line; }

    [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
        throw SyntaxError(msg + ", found '" + cur().text + "'", cur().line, cur().column,
                          std::move(expected));
    }

    void expect(std::string_view text) {
        if (at_end() || !(is_op(cur(), text) || is_kw(cur(), text))) {
            fail("expected '" + std::string(text) + "'", {std::string(text)});
        }
        advance();
    }

    bool accept(std::string_view text) {
        if (!at_end() && (is_op(cur(), text) || is_kw(cur(), text))) {
            advance();
            return true;
        }
        return false;
    }

    std::string expect_identifier(const char* what) {
        if (cur().kind != TokenKind::Identifier) {
            fail(std::string("expected ") + what, {"identifier"});
        }
        return advance().text;
    }

    void skip_semicolons() {
        while (accept(";")) {
        }
    }

    // --- declarations ---

    bool starts_declaration() const {
        // Scans over annotations and soft modifiers to see whether a
        // declaration keyword follows.
        std::size_t p = pos_;
        while (p < toks_.size()) {
            const Token& t = toks_[p];
            if (is_op(t, "@") && p + 1 < toks_.size() &&
                toks_[p + 1].kind == TokenKind::Identifier) {
                p += 2;
                if (p < toks_.size() && is_op(toks_[p], "(")) {
                    int depth = 0;
                    while (p < toks_.size()) {
                        if (is_op(toks_[p], "(")) ++depth;
                        if (is_op(toks_[p], ")") && --depth == 0) {
                            ++p;
                            break;
                        }
                        ++p;
                    }
                }
                continue;
            }
            if (t.kind == TokenKind::Identifier && is_soft_modifier(t.text)) {
                ++p;
                continue;
            }
            return t.kind == TokenKind::Keyword &&
                   (t.text == "fun" || t.text == "class" || t.text == "val" || t.text == "var");
        }
        return false;
    }

    SyntaxNode parse_declaration() {
        int start = cur_line();
        SyntaxNode mods = parse_modifier_list();
        if (is_kw(cur(), "fun")) return parse_function(std::move(mods), start);
        if (is_kw(cur(), "class")) return parse_class(std::move(mods), start);
        if (is_kw(cur(), "val") || is_kw(cur(), "var")) return parse_property(std::move(mods), start);
        fail("expected declaration", {"fun", "class", "val", "var"});
    }

    // Returns a MODIFIER_LIST node; empty list means "no modifiers" and is
    // dropped by the callers.
    SyntaxNode parse_modifier_list() {
        SyntaxNode list;
        list.kind = NodeKind::ModifierList;
        list.span = {cur_line(), cur_line()};
        while (!at_end()) {
            if (is_op(cur(), "@") && peek(1).kind == TokenKind::Identifier) {
                list.children.push_back(parse_annotation());
                continue;
            }
            if (cur().kind == TokenKind::Identifier && is_soft_modifier(cur().text)) {
                int line = cur_line();
                list.children.push_back(make_leaf(NodeKind::Modifier, advance().text, {line, line}));
                continue;
            }
            break;
        }
        list.span.last_line = list.children.empty() ? list.span.first_line : prev_line();
        return list;
    }

    SyntaxNode parse_annotation() {
        int start = cur_line();
        expect("@");
        int nline = cur_line();
        SyntaxNode name = make_leaf(NodeKind::Identifier, expect_identifier("annotation name"),
                                    {nline, nline});
        SyntaxNode ann = make_node(NodeKind::Annotation, {std::move(name)});
        if (!at_end() && is_op(cur(), "(")) {
            ann.children.push_back(parse_value_arguments());
        }
        ann.span = {start, prev_line()};
        return ann;
    }

    SyntaxNode parse_function(SyntaxNode mods, int start) {
        expect("fun");
        SyntaxNode fn;
        fn.kind = NodeKind::Function;
        if (!mods.children.empty()) fn.children.push_back(std::move(mods));

        if (is_op(cur(), "<")) fn.children.push_back(parse_type_parameter_list());

        // The name is the last '.'-separated segment before '('; anything in
        // front of it is the extension receiver type.
        std::string receiver;
        std::string name;
        int name_line = cur_line();
        while (true) {
            name_line = cur_line();
            std::string segment = parse_type_segment_text();
            if (is_op(cur(), ".")) {
                advance();
                receiver += receiver.empty() ? segment : "." + segment;
                continue;
            }
            if (is_op(cur(), "?.")) {  // nullable receiver: fun Int?.orZero()
                advance();
                segment += "?";
                receiver += receiver.empty() ? segment : "." + segment;
                continue;
            }
            name = std::move(segment);
            break;
        }
        if (name.empty() || !std::isalpha(static_cast<unsigned char>(name[0])) ||
            name.find('<') != std::string::npos || name.find('?') != std::string::npos) {
            throw SyntaxError("invalid function name '" + name + "'", name_line, 1, {"identifier"});
        }
        if (!receiver.empty()) {
            SyntaxNode recv = make_node(
                NodeKind::ReceiverType,
                {make_leaf(NodeKind::TypeRef, receiver, {start, name_line})}, {start, name_line});
            fn.children.push_back(std::move(recv));
        }
        fn.children.push_back(make_leaf(NodeKind::Identifier, name, {name_line, name_line}));

        fn.children.push_back(parse_parameter_list(/*allow_val_var=*/false));

        if (accept(":")) {
            int tline = cur_line();
            fn.children.push_back(make_leaf(NodeKind::TypeRef, parse_type_text(), {tline, prev_line()}));
        }

        if (!at_end() && is_op(cur(), "{")) {
            fn.children.push_back(parse_block());
        } else if (accept("=")) {
            fn.children.push_back(parse_expression());
        }
        fn.span = {start, prev_line()};
        return fn;
    }

    SyntaxNode parse_class(SyntaxNode mods, int start) {
        expect("class");
        SyntaxNode cls;
        cls.kind = NodeKind::Class;
        if (!mods.children.empty()) cls.children.push_back(std::move(mods));
        int nline = cur_line();
        cls.children.push_back(
            make_leaf(NodeKind::Identifier, expect_identifier("class name"), {nline, nline}));
        if (is_op(cur(), "<")) cls.children.push_back(parse_type_parameter_list());
        if (is_op(cur(), "(")) cls.children.push_back(parse_parameter_list(/*allow_val_var=*/true));
        if (accept(":")) {
            while (true) {
                int tline = cur_line();
                SyntaxNode type = make_leaf(NodeKind::TypeRef, parse_type_text(), {tline, prev_line()});
                if (!at_end() && is_op(cur(), "(")) {
                    SyntaxNode call = make_node(NodeKind::CallExpr, {std::move(type)});
                    call.children.push_back(parse_value_arguments());
                    call.span = {tline, prev_line()};
                    cls.children.push_back(std::move(call));
                } else {
                    cls.children.push_back(std::move(type));
                }
                if (!accept(",")) break;
            }
        }
        if (!at_end() && is_op(cur(), "{")) {
            int bstart = cur_line();
            expect("{");
            SyntaxNode body;
            body.kind = NodeKind::Block;
            while (!at_end() && !is_op(cur(), "}")) {
                skip_semicolons();
                if (at_end() || is_op(cur(), "}")) break;
                body.children.push_back(parse_declaration());
            }
            expect("}");
            body.span = {bstart, prev_line()};
            cls.children.push_back(std::move(body));
        }
        cls.span = {start, prev_line()};
        return cls;
    }

    SyntaxNode parse_property(SyntaxNode mods, int start) {
        SyntaxNode prop;
        prop.kind = NodeKind::Property;
        if (!mods.children.empty()) prop.children.push_back(std::move(mods));
        int kwline = cur_line();
        std::string kw = advance().text;  // val | var
        prop.children.push_back(make_leaf(NodeKind::Modifier, kw, {kwline, kwline}));
        int nline = cur_line();
        prop.children.push_back(
            make_leaf(NodeKind::Identifier, expect_identifier("property name"), {nline, nline}));
        if (accept(":")) {
            int tline = cur_line();
            prop.children.push_back(
                make_leaf(NodeKind::TypeRef, parse_type_text(), {tline, prev_line()}));
        }
        if (accept("=")) {
            prop.children.push_back(parse_expression());
        }
        prop.span = {start, prev_line()};
        return prop;
    }

    SyntaxNode parse_type_parameter_list() {
        int start = cur_line();
        expect("<");
        SyntaxNode list;
        list.kind = NodeKind::TypeParameterList;
        while (true) {
            SyntaxNode param;
            param.kind = NodeKind::TypeParameter;
            int pstart = cur_line();
            SyntaxNode mods = parse_modifier_list();
            if (!mods.children.empty()) param.children.push_back(std::move(mods));
            int nline = cur_line();
            param.children.push_back(
                make_leaf(NodeKind::Identifier, expect_identifier("type parameter"), {nline, nline}));
            if (accept(":")) {
                int tline = cur_line();
                param.children.push_back(
                    make_leaf(NodeKind::TypeRef, parse_type_text(), {tline, prev_line()}));
            }
            param.span = {pstart, prev_line()};
            list.children.push_back(std::move(param));
            if (!accept(",")) break;
        }
        expect(">");
        list.span = {start, prev_line()};
        return list;
    }

    SyntaxNode parse_parameter_list(bool allow_val_var) {
        int start = cur_line();
        expect("(");
        SyntaxNode list;
        list.kind = NodeKind::ParameterList;
        if (!is_op(cur(), ")")) {
            while (true) {
                list.children.push_back(parse_parameter(allow_val_var));
                if (!accept(",")) break;
            }
        }
        expect(")");
        list.span = {start, prev_line()};
        return list;
    }

    SyntaxNode parse_parameter(bool allow_val_var) {
        SyntaxNode param;
        param.kind = NodeKind::Parameter;
        int start = cur_line();
        SyntaxNode mods = parse_modifier_list();
        if (allow_val_var && (is_kw(cur(), "val") || is_kw(cur(), "var"))) {
            int kwline = cur_line();
            mods.children.push_back(make_leaf(NodeKind::Modifier, advance().text, {kwline, kwline}));
        }
        if (!mods.children.empty()) param.children.push_back(std::move(mods));
        int nline = cur_line();
        param.children.push_back(
            make_leaf(NodeKind::Identifier, expect_identifier("parameter name"), {nline, nline}));
        expect(":");
        int tline = cur_line();
        param.children.push_back(make_leaf(NodeKind::TypeRef, parse_type_text(), {tline, prev_line()}));
        if (accept("=")) {
            param.children.push_back(parse_expression());
        }
        param.span = {start, prev_line()};
        return param;
    }

    // --- types ---
    //
    // Types are stored as flat TYPE_REF leaves holding a canonical text
    // rendering (no whitespace), which keeps the tree schema small and still
    // round-trips through the pretty printer.

    std::string parse_type_text() {
        std::string text = parse_type_segment_text();
        while (is_op(cur(), ".")) {
            advance();
            text += "." + parse_type_segment_text();
        }
        return text;
    }

    std::string parse_type_segment_text() {
        std::string text;
        if (is_op(cur(), "(")) {
            // Function type: (T, U) -> R
            advance();
            text += "(";
            if (!is_op(cur(), ")")) {
                while (true) {
                    text += parse_type_text();
                    if (accept(",")) {
                        text += ",";
                        continue;
                    }
                    break;
                }
            }
            expect(")");
            text += ")";
            if (accept("->")) {
                text += "->" + parse_type_text();
            }
            return text;
        }
        if (is_op(cur(), "*")) {
            advance();
            return "*";
        }
        if (cur().kind != TokenKind::Identifier) {
            fail("expected type", {"identifier"});
        }
        text = advance().text;
        if (is_op(cur(), "<")) {
            advance();
            text += "<";
            while (true) {
                text += parse_type_text();
                if (accept(",")) {
                    text += ",";
                    continue;
                }
                break;
            }
            expect(">");
            text += ">";
        }
        while (is_op(cur(), "?")) {
            advance();
            text += "?";
        }
        return text;
    }

    // --- statements ---

    SyntaxNode parse_block() {
        int start = cur_line();
        expect("{");
        SyntaxNode block;
        block.kind = NodeKind::Block;
        while (!at_end() && !is_op(cur(), "}")) {
            skip_semicolons();
            if (at_end() || is_op(cur(), "}")) break;
            block.children.push_back(parse_statement());
        }
        expect("}");
        block.span = {start, prev_line()};
        return block;
    }

    SyntaxNode parse_statement() {
        if (starts_declaration()) return parse_declaration();
        if (is_kw(cur(), "for")) return parse_for();
        if (is_kw(cur(), "while")) return parse_while();
        if (is_kw(cur(), "return")) return parse_return();
        if (is_kw(cur(), "throw")) return parse_throw();
        return parse_expression_or_assignment();
    }

    SyntaxNode parse_for() {
        int start = cur_line();
        expect("for");
        expect("(");
        SyntaxNode loop;
        loop.kind = NodeKind::ForLoop;
        int nline = cur_line();
        loop.children.push_back(
            make_leaf(NodeKind::Identifier, expect_identifier("loop variable"), {nline, nline}));
        if (accept(":")) {
            int tline = cur_line();
            loop.children.push_back(
                make_leaf(NodeKind::TypeRef, parse_type_text(), {tline, prev_line()}));
        }
        expect("in");
        loop.children.push_back(parse_expression());
        expect(")");
        loop.children.push_back(parse_control_body());
        loop.span = {start, prev_line()};
        return loop;
    }

    SyntaxNode parse_while() {
        int start = cur_line();
        expect("while");
        expect("(");
        SyntaxNode loop;
        loop.kind = NodeKind::WhileLoop;
        loop.children.push_back(parse_expression());
        expect(")");
        loop.children.push_back(parse_control_body());
        loop.span = {start, prev_line()};
        return loop;
    }

    SyntaxNode parse_return() {
        int start = cur_line();
        expect("return");
        SyntaxNode ret;
        ret.kind = NodeKind::Return;
        if (!at_end() && !is_op(cur(), "}") && !is_op(cur(), ";") && !starts_declaration() &&
            !is_kw(cur(), "else") && cur().line == start) {
            ret.children.push_back(parse_expression());
        }
        ret.span = {start, prev_line()};
        return ret;
    }

    SyntaxNode parse_throw() {
        int start = cur_line();
        expect("throw");
        SyntaxNode thr;
        thr.kind = NodeKind::Throw;
        thr.children.push_back(parse_expression());
        thr.span = {start, prev_line()};
        return thr;
    }

    SyntaxNode parse_expression_or_assignment() {
        int start = cur_line();
        SyntaxNode lhs = parse_expression();
        static const std::vector<std::string_view> assign_ops = {"=", "+=", "-=", "*=", "/=", "%="};
        for (std::string_view op : assign_ops) {
            if (is_op(cur(), op) && continues_line()) {
                int oline = cur_line();
                advance();
                SyntaxNode node;
                node.kind = NodeKind::Assignment;
                node.children.push_back(std::move(lhs));
                node.children.push_back(make_leaf(NodeKind::Operator, std::string(op), {oline, oline}));
                node.children.push_back(parse_expression());
                node.span = {start, prev_line()};
                return node;
            }
        }
        return lhs;
    }

    // Body of an if branch, loop, or when branch: a block, a control-flow
    // statement, or a plain expression.
    SyntaxNode parse_control_body() {
        if (!at_end() && is_op(cur(), "{") && !lambda_has_arrow()) return parse_block();
        if (is_kw(cur(), "return")) return parse_return();
        if (is_kw(cur(), "throw")) return parse_throw();
        return parse_expression();
    }

    // --- expressions ---

    SyntaxNode binary(SyntaxNode lhs, const Token& op, SyntaxNode rhs, int start) {
        SyntaxNode node;
        node.kind = NodeKind::BinaryExpr;
        node.children.push_back(std::move(lhs));
        node.children.push_back(make_leaf(NodeKind::Operator, op.text, {op.line, op.line}));
        node.children.push_back(std::move(rhs));
        node.span = {start, prev_line()};
        return node;
    }

    SyntaxNode parse_expression() { return parse_disjunction(); }

    SyntaxNode parse_disjunction() {
        int start = cur_line();
        SyntaxNode lhs = parse_conjunction();
        while (is_op(cur(), "||") && continues_line()) {
            Token op = advance();
            lhs = binary(std::move(lhs), op, parse_conjunction(), start);
        }
        return lhs;
    }

    SyntaxNode parse_conjunction() {
        int start = cur_line();
        SyntaxNode lhs = parse_equality();
        while (is_op(cur(), "&&") && continues_line()) {
            Token op = advance();
            lhs = binary(std::move(lhs), op, parse_equality(), start);
        }
        return lhs;
    }

    SyntaxNode parse_equality() {
        int start = cur_line();
        SyntaxNode lhs = parse_comparison();
        while ((is_op(cur(), "==") || is_op(cur(), "!=")) && continues_line()) {
            Token op = advance();
            lhs = binary(std::move(lhs), op, parse_comparison(), start);
        }
        return lhs;
    }

    SyntaxNode parse_comparison() {
        int start = cur_line();
        SyntaxNode lhs = parse_check();
        while ((is_op(cur(), "<") || is_op(cur(), ">") || is_op(cur(), "<=") ||
               is_op(cur(), ">=")) && continues_line()) {
            Token op = advance();
            lhs = binary(std::move(lhs), op, parse_check(), start);
        }
        return lhs;
    }

    // in / !in / is / !is
    SyntaxNode parse_check() {
        int start = cur_line();
        SyntaxNode lhs = parse_elvis();
        while (continues_line()) {
            std::string op_text;
            int oline = cur_line();
            if (is_kw(cur(), "in")) {
                op_text = "in";
                advance();
            } else if (is_kw(cur(), "is")) {
                op_text = "is";
                advance();
            } else if (is_op(cur(), "!") && (is_kw(peek(1), "in") || is_kw(peek(1), "is"))) {
                advance();
                op_text = "!" + advance().text;
            } else {
                break;
            }
            SyntaxNode node;
            node.kind = NodeKind::BinaryExpr;
            node.children.push_back(std::move(lhs));
            node.children.push_back(make_leaf(NodeKind::Operator, op_text, {oline, oline}));
            if (op_text == "is" || op_text == "!is") {
                int tline = cur_line();
                node.children.push_back(
                    make_leaf(NodeKind::TypeRef, parse_type_text(), {tline, prev_line()}));
            } else {
                node.children.push_back(parse_elvis());
            }
            node.span = {start, prev_line()};
            lhs = std::move(node);
        }
        return lhs;
    }

    SyntaxNode parse_elvis() {
        int start = cur_line();
        SyntaxNode lhs = parse_range();
        while (is_op(cur(), "?:") && continues_line()) {
            Token op = advance();
            lhs = binary(std::move(lhs), op, parse_range(), start);
        }
        return lhs;
    }

    SyntaxNode parse_range() {
        int start = cur_line();
        SyntaxNode lhs = parse_additive();
        while (is_op(cur(), "..") && continues_line()) {
            Token op = advance();
            lhs = binary(std::move(lhs), op, parse_additive(), start);
        }
        return lhs;
    }

    SyntaxNode parse_additive() {
        int start = cur_line();
        SyntaxNode lhs = parse_multiplicative();
        while ((is_op(cur(), "+") || is_op(cur(), "-")) && continues_line()) {
            Token op = advance();
            lhs = binary(std::move(lhs), op, parse_multiplicative(), start);
        }
        return lhs;
    }

    SyntaxNode parse_multiplicative() {
        int start = cur_line();
        SyntaxNode lhs = parse_cast();
        while ((is_op(cur(), "*") || is_op(cur(), "/") || is_op(cur(), "%")) && continues_line()) {
            Token op = advance();
            lhs = binary(std::move(lhs), op, parse_cast(), start);
        }
        return lhs;
    }

    SyntaxNode parse_cast() {
        int start = cur_line();
        SyntaxNode lhs = parse_prefix_unary();
        while (is_kw(cur(), "as") && continues_line()) {
            int oline = cur_line();
            advance();
            std::string op_text = "as";
            if (is_op(cur(), "?") && cur().offset == toks_[pos_ - 1].offset + 2) {
                advance();
                op_text = "as?";
            }
            SyntaxNode node;
            node.kind = NodeKind::BinaryExpr;
            node.children.push_back(std::move(lhs));
            node.children.push_back(make_leaf(NodeKind::Operator, op_text, {oline, oline}));
            int tline = cur_line();
            node.children.push_back(
                make_leaf(NodeKind::TypeRef, parse_type_text(), {tline, prev_line()}));
            node.span = {start, prev_line()};
            lhs = std::move(node);
        }
        return lhs;
    }

    SyntaxNode parse_prefix_unary() {
        if (is_op(cur(), "!") && !is_kw(peek(1), "in") && !is_kw(peek(1), "is")) {
            int start = cur_line();
            Token op = advance();
            SyntaxNode node;
            node.kind = NodeKind::UnaryExpr;
            node.children.push_back(make_leaf(NodeKind::Operator, op.text, {op.line, op.line}));
            node.children.push_back(parse_prefix_unary());
            node.span = {start, prev_line()};
            return node;
        }
        if (is_op(cur(), "-") || is_op(cur(), "+")) {
            int start = cur_line();
            Token op = advance();
            SyntaxNode node;
            node.kind = NodeKind::UnaryExpr;
            node.children.push_back(make_leaf(NodeKind::Operator, op.text, {op.line, op.line}));
            node.children.push_back(parse_prefix_unary());
            node.span = {start, prev_line()};
            return node;
        }
        return parse_postfix();
    }

    // Checks whether a '<' at the current position opens a call-site type
    // argument list (balanced angle brackets immediately followed by a call).
    bool scan_type_arguments(std::size_t& end) const {
        std::size_t p = pos_;
        int depth = 0;
        while (p < toks_.size()) {
            const Token& t = toks_[p];
            if (is_op(t, "<")) {
                ++depth;
            } else if (is_op(t, ">")) {
                if (--depth == 0) {
                    ++p;
                    break;
                }
            } else if (t.kind == TokenKind::Identifier || is_op(t, ",") || is_op(t, ".") ||
                       is_op(t, "?") || is_op(t, "*") || is_op(t, "(") || is_op(t, ")") ||
                       is_op(t, "->")) {
                // allowed inside a type argument list
            } else {
                return false;
            }
            ++p;
        }
        if (depth != 0 || p >= toks_.size()) return false;
        if (!is_op(toks_[p], "(") && !is_op(toks_[p], "{")) return false;
        end = p;
        return true;
    }

    SyntaxNode parse_postfix() {
        int start = cur_line();
        SyntaxNode expr = parse_primary();
        while (!at_end()) {
            if (is_op(cur(), ".") || is_op(cur(), "?.")) {
                Token op = advance();
                int nline = cur_line();
                SyntaxNode nav;
                nav.kind = NodeKind::Navigation;
                nav.children.push_back(std::move(expr));
                nav.children.push_back(make_leaf(NodeKind::Operator, op.text, {op.line, op.line}));
                nav.children.push_back(
                    make_leaf(NodeKind::Identifier, expect_identifier("member name"), {nline, nline}));
                nav.span = {start, prev_line()};
                expr = std::move(nav);
                continue;
            }
            if (is_op(cur(), "(") && continues_line()) {
                SyntaxNode call;
                call.kind = NodeKind::CallExpr;
                call.children.push_back(std::move(expr));
                call.children.push_back(parse_value_arguments());
                if (!at_end() && is_op(cur(), "{")) {
                    call.children.push_back(parse_lambda());
                }
                call.span = {start, prev_line()};
                expr = std::move(call);
                continue;
            }
            if (is_op(cur(), "<") && continues_line()) {
                std::size_t end = 0;
                if (!scan_type_arguments(end)) break;
                int tline = cur_line();
                std::string text;
                while (pos_ < end) text += advance().text;
                SyntaxNode call;
                call.kind = NodeKind::CallExpr;
                call.children.push_back(std::move(expr));
                call.children.push_back(make_leaf(NodeKind::TypeRef, text, {tline, prev_line()}));
                if (is_op(cur(), "(")) {
                    call.children.push_back(parse_value_arguments());
                    if (!at_end() && is_op(cur(), "{")) call.children.push_back(parse_lambda());
                } else {
                    call.children.push_back(make_node(NodeKind::ValueArguments, {},
                                                      {cur_line(), cur_line()}));
                    call.children.push_back(parse_lambda());
                }
                call.span = {start, prev_line()};
                expr = std::move(call);
                continue;
            }
            if (is_op(cur(), "[") && continues_line()) {
                advance();
                SyntaxNode idx;
                idx.kind = NodeKind::IndexExpr;
                idx.children.push_back(std::move(expr));
                while (true) {
                    idx.children.push_back(parse_expression());
                    if (!accept(",")) break;
                }
                expect("]");
                idx.span = {start, prev_line()};
                expr = std::move(idx);
                continue;
            }
            if (is_op(cur(), "{") && continues_line() &&
                (expr.kind == NodeKind::Identifier || expr.kind == NodeKind::Navigation)) {
                // Trailing lambda without parentheses: f { ... }
                SyntaxNode call;
                call.kind = NodeKind::CallExpr;
                call.children.push_back(std::move(expr));
                call.children.push_back(
                    make_node(NodeKind::ValueArguments, {}, {cur_line(), cur_line()}));
                call.children.push_back(parse_lambda());
                call.span = {start, prev_line()};
                expr = std::move(call);
                continue;
            }
            break;
        }
        return expr;
    }

    SyntaxNode parse_value_arguments() {
        int start = cur_line();
        expect("(");
        SyntaxNode args;
        args.kind = NodeKind::ValueArguments;
        if (!is_op(cur(), ")")) {
            while (true) {
                args.children.push_back(parse_argument());
                if (!accept(",")) break;
            }
        }
        expect(")");
        args.span = {start, prev_line()};
        return args;
    }

    SyntaxNode parse_argument() {
        // Named argument: name = expression
        if (cur().kind == TokenKind::Identifier && is_op(peek(1), "=")) {
            int start = cur_line();
            SyntaxNode named;
            named.kind = NodeKind::Assignment;
            named.children.push_back(make_leaf(NodeKind::Identifier, advance().text, {start, start}));
            int oline = cur_line();
            advance();  // '='
            named.children.push_back(make_leaf(NodeKind::Operator, "=", {oline, oline}));
            named.children.push_back(parse_expression());
            named.span = {start, prev_line()};
            return named;
        }
        return parse_expression();
    }

    SyntaxNode parse_primary() {
        const Token& t = cur();
        if (t.kind == TokenKind::IntLiteral) {
            advance();
            return make_leaf(NodeKind::Literal, t.text, {t.line, t.line});
        }
        if (is_kw(t, "true") || is_kw(t, "false") || is_kw(t, "null")) {
            advance();
            return make_leaf(NodeKind::Literal, t.text, {t.line, t.line});
        }
        if (is_op(t, "\"")) return parse_string_template();
        if (t.kind == TokenKind::Identifier) {
            advance();
            return make_leaf(NodeKind::Identifier, t.text, {t.line, t.line});
        }
        if (is_op(t, "(")) {
            advance();
            SyntaxNode inner = parse_expression();
            expect(")");
            return inner;
        }
        if (is_kw(t, "if")) return parse_if();
        if (is_kw(t, "when")) return parse_when();
        if (is_kw(t, "try")) return parse_try();
        if (is_op(t, "{")) return parse_lambda();
        fail("expected expression",
             {"identifier", "literal", "(", "if", "when", "try", "{", "\""});
    }

    SyntaxNode parse_if() {
        int start = cur_line();
        expect("if");
        expect("(");
        SyntaxNode node;
        node.kind = NodeKind::IfExpr;
        node.children.push_back(parse_expression());
        expect(")");
        node.children.push_back(parse_control_body());
        if (accept("else")) {
            if (is_kw(cur(), "if")) {
                node.children.push_back(parse_if());
            } else {
                node.children.push_back(parse_control_body());
            }
        }
        node.span = {start, prev_line()};
        return node;
    }

    SyntaxNode parse_when() {
        int start = cur_line();
        expect("when");
        SyntaxNode node;
        node.kind = NodeKind::WhenExpr;
        if (accept("(")) {
            node.children.push_back(parse_expression());
            expect(")");
        }
        expect("{");
        while (!at_end() && !is_op(cur(), "}")) {
            node.children.push_back(parse_when_branch());
        }
        expect("}");
        node.span = {start, prev_line()};
        return node;
    }

    SyntaxNode parse_when_branch() {
        int start = cur_line();
        SyntaxNode branch;
        branch.kind = NodeKind::WhenBranch;
        if (is_kw(cur(), "else")) {
            advance();
            expect("->");
            branch.children.push_back(parse_control_body());
            branch.span = {start, prev_line()};
            return branch;
        }
        while (true) {
            branch.children.push_back(parse_when_condition());
            if (!accept(",")) break;
        }
        expect("->");
        branch.children.push_back(parse_control_body());
        branch.span = {start, prev_line()};
        return branch;
    }

    SyntaxNode parse_when_condition() {
        int start = cur_line();
        std::string op_text;
        if (is_kw(cur(), "in")) {
            advance();
            op_text = "in";
        } else if (is_kw(cur(), "is")) {
            advance();
            op_text = "is";
        } else if (is_op(cur(), "!") && (is_kw(peek(1), "in") || is_kw(peek(1), "is"))) {
            advance();
            op_text = "!" + advance().text;
        }
        if (op_text.empty()) return parse_expression();
        SyntaxNode cond;
        cond.kind = NodeKind::UnaryExpr;
        cond.children.push_back(make_leaf(NodeKind::Operator, op_text, {start, start}));
        if (op_text == "is" || op_text == "!is") {
            int tline = cur_line();
            cond.children.push_back(
                make_leaf(NodeKind::TypeRef, parse_type_text(), {tline, prev_line()}));
        } else {
            cond.children.push_back(parse_expression());
        }
        cond.span = {start, prev_line()};
        return cond;
    }

    SyntaxNode parse_try() {
        int start = cur_line();
        expect("try");
        SyntaxNode node;
        node.kind = NodeKind::TryExpr;
        node.children.push_back(parse_block());
        while (is_kw(cur(), "catch")) {
            int cstart = cur_line();
            advance();
            expect("(");
            SyntaxNode clause;
            clause.kind = NodeKind::CatchClause;
            SyntaxNode param;
            param.kind = NodeKind::Parameter;
            int nline = cur_line();
            param.children.push_back(
                make_leaf(NodeKind::Identifier, expect_identifier("exception name"), {nline, nline}));
            expect(":");
            int tline = cur_line();
            param.children.push_back(
                make_leaf(NodeKind::TypeRef, parse_type_text(), {tline, prev_line()}));
            param.span = {nline, prev_line()};
            clause.children.push_back(std::move(param));
            expect(")");
            clause.children.push_back(parse_block());
            clause.span = {cstart, prev_line()};
            node.children.push_back(std::move(clause));
        }
        if (is_kw(cur(), "finally")) {
            int fstart = cur_line();
            advance();
            SyntaxNode fin;
            fin.kind = NodeKind::FinallyClause;
            fin.children.push_back(parse_block());
            fin.span = {fstart, prev_line()};
            node.children.push_back(std::move(fin));
        }
        node.span = {start, prev_line()};
        return node;
    }

    // Scans '{ ident [: T] (, ident [: T])* ->' to decide whether a brace
    // opens a lambda with a parameter list.
    bool lambda_has_arrow() const {
        std::size_t p = pos_;
        if (p >= toks_.size() || !is_op(toks_[p], "{")) return false;
        ++p;
        if (p < toks_.size() && is_op(toks_[p], "->")) return true;
        while (p < toks_.size()) {
            if (toks_[p].kind != TokenKind::Identifier) return false;
            ++p;
            if (p < toks_.size() && is_op(toks_[p], ":")) {
                ++p;
                int depth = 0;
                while (p < toks_.size()) {
                    const Token& t = toks_[p];
                    if (is_op(t, "<") || is_op(t, "(")) ++depth;
                    else if (is_op(t, ">") || is_op(t, ")")) --depth;
                    else if (depth == 0 && (is_op(t, ",") || is_op(t, "->"))) break;
                    else if (t.kind != TokenKind::Identifier && !is_op(t, ".") && !is_op(t, "?") &&
                             !is_op(t, "*") && !is_op(t, "->")) {
                        return false;
                    }
                    ++p;
                }
            }
            if (p >= toks_.size()) return false;
            if (is_op(toks_[p], "->")) return true;
            if (is_op(toks_[p], ",")) {
                ++p;
                continue;
            }
            return false;
        }
        return false;
    }

    SyntaxNode parse_lambda() {
        int start = cur_line();
        bool with_params = lambda_has_arrow();
        expect("{");
        SyntaxNode lambda;
        lambda.kind = NodeKind::Lambda;
        if (with_params) {
            SyntaxNode params;
            params.kind = NodeKind::ParameterList;
            int pstart = cur_line();
            if (!is_op(cur(), "->")) {
                while (true) {
                    SyntaxNode param;
                    param.kind = NodeKind::Parameter;
                    int nline = cur_line();
                    param.children.push_back(make_leaf(NodeKind::Identifier,
                                                       expect_identifier("lambda parameter"),
                                                       {nline, nline}));
                    if (accept(":")) {
                        int tline = cur_line();
                        param.children.push_back(
                            make_leaf(NodeKind::TypeRef, parse_type_text(), {tline, prev_line()}));
                    }
                    param.span = {nline, prev_line()};
                    params.children.push_back(std::move(param));
                    if (!accept(",")) break;
                }
            }
            expect("->");
            params.span = {pstart, prev_line()};
            lambda.children.push_back(std::move(params));
        }
        while (!at_end() && !is_op(cur(), "}")) {
            skip_semicolons();
            if (at_end() || is_op(cur(), "}")) break;
            lambda.children.push_back(parse_statement());
        }
        expect("}");
        lambda.span = {start, prev_line()};
        return lambda;
    }

    SyntaxNode parse_string_template() {
        int start = cur_line();
        expect("\"");
        SyntaxNode tmpl;
        tmpl.kind = NodeKind::StringTemplate;
        while (!at_end() && !is_op(cur(), "\"")) {
            if (cur().kind == TokenKind::StringLiteral) {
                const Token& t = advance();
                tmpl.children.push_back(make_leaf(NodeKind::Literal, t.text, {t.line, t.line}));
                continue;
            }
            if (is_op(cur(), "${")) {
                int estart = cur_line();
                advance();
                SyntaxNode entry;
                entry.kind = NodeKind::TemplateEntry;
                entry.children.push_back(parse_expression());
                expect("}");
                entry.span = {estart, prev_line()};
                tmpl.children.push_back(std::move(entry));
                continue;
            }
            if (is_op(cur(), "$")) {
                int estart = cur_line();
                advance();
                SyntaxNode entry;
                entry.kind = NodeKind::TemplateEntry;
                int nline = cur_line();
                entry.children.push_back(make_leaf(NodeKind::Identifier,
                                                   expect_identifier("template variable"),
                                                   {nline, nline}));
                entry.span = {estart, prev_line()};
                tmpl.children.push_back(std::move(entry));
                continue;
            }
            fail("malformed string template", {"\"", "${", "$"});
        }
        expect("\"");
        tmpl.span = {start, prev_line()};
        return tmpl;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

SyntaxNode parse(const std::vector<Token>& tokens) {
    return Parser(tokens).parse_file();
}

SyntaxNode parse_source(std::string_view source) {
    return parse(tokenize(source));
}

}  // namespace astray
