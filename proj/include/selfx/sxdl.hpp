#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "selfx/kb.hpp"

// Textual knowledge-base language (.sxdl).
//
//   document     := statement* ;
//   statement    := classDecl | instanceDecl | linkDecl | envDecl | behaviorDecl ;
//   classDecl    := "class" IDENT ":" IDENT ";" ;
//   instanceDecl := "instance" IDENT ":" IDENT "{" (attrAssign | roleAssign)* "}" ;
//   attrAssign   := "has" IDENT "=" literal ";"
//                 | "has" IDENT (IDENT | literal) "{" attrAssign* "}" ;
//   roleAssign   := "role" IDENT "->" IDENT ";" ;
//   linkDecl     := "link" IDENT "." IDENT "->" IDENT ";" ;
//   envDecl      := "environment" "{" instanceDecl* "}" ;
//   behaviorDecl := "behavior" (IDENT | STRING) "{" "effect" ":" IDENT "{" attrAssign* "}" "}" ;
//   literal      := STRING | NUMBER | "true" | "false" | "nan" ;
//
// Comments run from "//" to the end of the line. Identifiers match
// [A-Za-z_][A-Za-z0-9_]*. A bare identifier in the value position of a nested
// attribute is its unit text, e.g. `has Voltage volt { has Exact = 5.0; }`.
// Names must be declared before they are referenced.

namespace selfx::sxdl {

struct SourceSpan {
    std::size_t line = 1;
    std::size_t column = 1;
};

class ParseError : public Error {
public:
    ParseError(std::string message, SourceSpan where, std::string token);

    const SourceSpan& where() const { return where_; }
    const std::string& token() const { return token_; }
    const std::string& detail() const { return detail_; }

private:
    SourceSpan where_;
    std::string token_;
    std::string detail_;
};

struct AttrAssign {
    std::string cls;
    Value value;
    bool nested = false;  // written with a `{ ... }` body
    std::vector<AttrAssign> children;
    SourceSpan span;
};

struct RoleAssign {
    std::string role;
    std::string target;
    SourceSpan span;
};

using InstanceItem = std::variant<AttrAssign, RoleAssign>;

struct InstanceDecl {
    std::string name;
    std::string cls;
    std::vector<InstanceItem> items;
    SourceSpan span;
};

struct ClassDecl {
    std::string name;
    std::string parent;
    SourceSpan span;
};

struct LinkDecl {
    std::string source;
    std::string role;
    std::string target;
    SourceSpan span;
};

struct EnvDecl {
    std::vector<InstanceDecl> instances;
    SourceSpan span;
};

struct BehaviorDecl {
    std::string name;
    std::string effect_cls;
    std::vector<AttrAssign> props;
    SourceSpan span;
};

using Statement = std::variant<ClassDecl, InstanceDecl, LinkDecl, EnvDecl, BehaviorDecl>;

struct Document {
    std::vector<Statement> statements;
};

/// Parses UTF-8 text (LF or CRLF). Throws ParseError with the position and
/// offending token on lexical errors, syntax errors and forward references.
Document parse(std::string_view text);
Document parse_file(const std::string& path);

/// A declaration that could not be asserted: unknown class or instance,
/// attribute-arity violation, link-kind violation.
class LoadError : public Error {
public:
    LoadError(const std::string& message, SourceSpan where);
    const SourceSpan& where() const { return where_; }

private:
    SourceSpan where_;
};

struct LoadReport {
    std::size_t classes_added = 0;
    std::size_t instances_added = 0;
    std::size_t links_added = 0;
    std::map<std::string, InstanceId> bindings;
};

/// Asserts every declaration of `doc` into `kb`. All or nothing: when any
/// declaration fails the knowledge base is left untouched.
LoadReport load(const Document& doc, KnowledgeBase& kb);

/// Canonical text of the asserted facts: LF line endings, two-space indent,
/// statements in assertion order. Built-in classes and inferred facts are
/// omitted. Throws when an asserted fact has no textual form (an attribute
/// that is role-linked, shared between owners, or owned by nothing).
std::string dump(const KnowledgeBase& kb);

/// Environment instances of a document flattened into named numeric
/// features, `<instance>.<AttributeClass>`. Numeric own values and Exact
/// children both count.
std::map<std::string, double> environment_features(const Document& doc);

}  // namespace selfx::sxdl
