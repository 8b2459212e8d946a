#ifndef KINDFORGE_PARSER_HPP
#define KINDFORGE_PARSER_HPP

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kindforge/syntax.hpp"

namespace kindforge {

enum class SiteCategory : std::uint8_t { TypeAbbreviation, Universal, Recursive, TypeAbstraction };

std::string_view to_string(SiteCategory c);

// A place where a kind annotation may be written: an abbreviation header or a
// forall, rec or type-abstraction binder.
struct AnnotationSite {
  Span span;
  SiteCategory category;
  // The ground kind the programmer wrote, if any.
  std::optional<Kind> written;
  // The kind in the AST: the written kind or a kind variable.
  Kind slot;
  // Name of the enclosing declaration.
  std::string owner;
};

struct TypeAbbrev {
  std::string name;
  int site;
  // Fully expanded. A self-referential abbreviation becomes a rec type bound
  // by the abbreviation's own name and sharing its site.
  TypeRef body;
  bool recursive = false;
  Span span;
};

struct ValueDecl {
  std::string name;
  // Prenex-generalized and expanded.
  TypeRef signature;
  ExprRef body;
  Span span;
};

using Decl = std::variant<TypeAbbrev, ValueDecl>;

struct Program {
  std::vector<Decl> decls;
  std::vector<AnnotationSite> sites;
  // Continues after every variable appearing in the program.
  FreshSupply supply;
};

Kind parse_kind(std::string_view src);

// Binders without a written kind receive fresh kind variables from `supply`.
TypeRef parse_type(std::string_view src, FreshSupply& supply);
TypeRef parse_type(std::string_view src);
ExprRef parse_expr(std::string_view src, FreshSupply& supply);
ExprRef parse_expr(std::string_view src);

Program parse_program(std::string_view src);

// Rewrites every binder so it carries the slot kind of its site.
Program with_site_kinds(Program p);

// Source text of a program; abbreviation uses are printed by name.
std::string print_program(const Program& p);

}  // namespace kindforge

#endif  // KINDFORGE_PARSER_HPP
