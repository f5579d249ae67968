#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "astray/parser.hpp"

namespace astray {

namespace {

Grammar build_grammar() {
    Grammar g;
    g.version = "astray-grammar-1";
    g.rules = {
        {"file", "declaration*"},
        {"declaration", "modifierList? (functionDecl | classDecl | propertyDecl)"},
        {"modifierList", "(annotation | MODIFIER)*"},
        {"annotation", "'@' IDENT valueArguments?"},
        {"functionDecl",
         "'fun' typeParameterList? (receiverType '.')? IDENT parameterList (':' typeRef)? "
         "(block | '=' expression)?"},
        {"classDecl",
         "'class' IDENT typeParameterList? parameterList? (':' supertype (',' supertype)*)? "
         "classBody?"},
        {"propertyDecl", "('val' | 'var') IDENT (':' typeRef)? ('=' expression)?"},
        {"typeParameterList", "'<' typeParameter (',' typeParameter)* '>'"},
        {"typeParameter", "modifierList? IDENT (':' typeRef)?"},
        {"parameterList", "'(' (parameter (',' parameter)*)? ')'"},
        {"parameter", "modifierList? IDENT ':' typeRef ('=' expression)?"},
        {"typeRef", "IDENT typeArguments? '?'* ('.' typeRef)? | '(' typeRef* ')' '->' typeRef | '*'"},
        {"block", "'{' statement* '}'"},
        {"statement",
         "declaration | forLoop | whileLoop | returnStmt | throwStmt | assignment | expression"},
        {"forLoop", "'for' '(' IDENT (':' typeRef)? 'in' expression ')' controlBody"},
        {"whileLoop", "'while' '(' expression ')' controlBody"},
        {"returnStmt", "'return' expression?"},
        {"throwStmt", "'throw' expression"},
        {"assignment", "expression ('=' | '+=' | '-=' | '*=' | '/=' | '%=') expression"},
        {"controlBody", "block | returnStmt | throwStmt | expression"},
        {"expression", "disjunction"},
        {"disjunction", "conjunction ('||' conjunction)*"},
        {"conjunction", "equality ('&&' equality)*"},
        {"equality", "comparison (('==' | '!=') comparison)*"},
        {"comparison", "checkExpr (('<' | '>' | '<=' | '>=') checkExpr)*"},
        {"checkExpr", "elvisExpr (('in' | '!in') elvisExpr | ('is' | '!is') typeRef)*"},
        {"elvisExpr", "rangeExpr ('?:' rangeExpr)*"},
        {"rangeExpr", "additiveExpr ('..' additiveExpr)*"},
        {"additiveExpr", "multiplicativeExpr (('+' | '-') multiplicativeExpr)*"},
        {"multiplicativeExpr", "castExpr (('*' | '/' | '%') castExpr)*"},
        {"castExpr", "prefixUnaryExpr (('as' | 'as?') typeRef)*"},
        {"prefixUnaryExpr", "('!' | '-' | '+')* postfixExpr"},
        {"postfixExpr",
         "primary (valueArguments lambda? | typeArguments valueArguments lambda? | "
         "('.' | '?.') IDENT | '[' expression (',' expression)* ']' | lambda)*"},
        {"valueArguments", "'(' (argument (',' argument)*)? ')'"},
        {"argument", "(IDENT '=')? expression"},
        {"primary",
         "INT | 'true' | 'false' | 'null' | stringTemplate | IDENT | '(' expression ')' | "
         "ifExpr | whenExpr | tryExpr | lambda"},
        {"ifExpr", "'if' '(' expression ')' controlBody ('else' (ifExpr | controlBody))?"},
        {"whenExpr", "'when' ('(' expression ')')? '{' whenBranch* '}'"},
        {"whenBranch", "('else' | whenCondition (',' whenCondition)*) '->' controlBody"},
        {"whenCondition", "expression | ('in' | '!in') expression | ('is' | '!is') typeRef"},
        {"tryExpr", "'try' block catchClause* finallyClause?"},
        {"catchClause", "'catch' '(' IDENT ':' typeRef ')' block"},
        {"finallyClause", "'finally' block"},
        {"lambda", "'{' (parameter (',' parameter)* '->')? statement* '}'"},
        {"stringTemplate", "'\"' (TEXT | '$' IDENT | '${' expression '}')* '\"'"},
    };
    g.keywords = hard_keywords();
    g.modifiers = soft_modifiers();
    for (NodeKind kind : all_node_kinds()) {
        g.node_kinds.emplace_back(node_kind_label(kind));
    }
    // Constructs deliberately outside the subset; using them is a SyntaxError.
    g.excluded = {
        "typealias", "interface", "object",      "enum",   "import", "package",
        "do",        "companion", "constructor", "init",   "super",  "by",
        "sealed interface", "destructuring declarations", "labels", "raw strings",
    };
    return g;
}

}  // namespace

bool Grammar::has_rule(std::string_view name) const {
    return std::any_of(rules.begin(), rules.end(),
                       [&](const Rule& r) { return r.name == name; });
}

bool Grammar::accepts_modifier(std::string_view name) const {
    return std::find(modifiers.begin(), modifiers.end(), name) != modifiers.end();
}

bool Grammar::excludes(std::string_view construct) const {
    return std::find(excluded.begin(), excluded.end(), construct) != excluded.end();
}

std::string Grammar::to_json_string() const {
    nlohmann::json j;
    j["version"] = version;
    nlohmann::json rules_json = nlohmann::json::object();
    for (const Rule& r : rules) rules_json[r.name] = r.definition;
    j["rules"] = rules_json;
    j["keywords"] = keywords;
    j["modifiers"] = modifiers;
    j["node_kinds"] = node_kinds;
    j["excluded"] = excluded;
    return j.dump(2);
}

const Grammar& supported_subset() {
    static const Grammar g = build_grammar();
    return g;
}

}  // namespace astray
