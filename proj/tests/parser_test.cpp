#include <gtest/gtest.h>

#include <set>

#include "kindforge/parser.hpp"

namespace kindforge {
namespace {

ErrorCode code_of(std::string_view src) {
  try {
    parse_program(src);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for:\n" << src;
  return ErrorCode::InvalidConstraint;
}

const ValueDecl& value(const Program& p, const std::string& name) {
  for (const Decl& d : p.decls)
    if (const auto* v = std::get_if<ValueDecl>(&d); v && v->name == name) return *v;
  throw std::runtime_error("no declaration " + name);
}

const TypeAbbrev& abbrev(const Program& p, const std::string& name) {
  for (const Decl& d : p.decls)
    if (const auto* a = std::get_if<TypeAbbrev>(&d); a && a->name == name) return *a;
  throw std::runtime_error("no abbreviation " + name);
}

void kind_vars(const TypeRef& t, std::set<std::uint32_t>& out) {
  if (const auto* f = as<types::Forall>(t)) {
    if (f->kind.is_var()) out.insert(f->kind.var_id());
    kind_vars(f->body, out);
  } else if (const auto* r = as<types::Rec>(t)) {
    if (r->kind.is_var()) out.insert(r->kind.var_id());
    kind_vars(r->body, out);
  } else if (const auto* a = as<types::Arrow>(t)) {
    kind_vars(a->dom, out);
    kind_vars(a->cod, out);
  } else if (const auto* s = as<types::Semi>(t)) {
    kind_vars(s->head, out);
    kind_vars(s->tail, out);
  }
}

int forall_count(const TypeRef& t) {
  int n = 0;
  for (TypeRef u = t; const auto* f = as<types::Forall>(u); u = f->body) ++n;
  return n;
}

TEST(Parser, Kinds) {
  EXPECT_EQ(parse_kind("*S"), Kind::su());
  EXPECT_EQ(parse_kind("1T"), Kind::tl());
  EXPECT_EQ(parse_kind("'k4"), Kind::var(4));
  EXPECT_THROW(parse_kind("2T"), ParseError);
}

TEST(Parser, SequencedMessage) {
  TypeRef t = parse_type("!Int;a");
  const auto* s = as<types::Semi>(t);
  ASSERT_TRUE(s);
  const auto* m = as<types::Msg>(s->head);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->polarity, Polarity::Out);
  ASSERT_TRUE(as<types::Base>(m->payload));
  EXPECT_EQ(as<types::Base>(m->payload)->name, "Int");
  ASSERT_TRUE(as<types::Var>(s->tail));
  EXPECT_EQ(as<types::Var>(s->tail)->name, "a");
}

TEST(Parser, LinearAbstraction) {
  ExprRef e = parse_expr("\\x:() 1-> x");
  const auto* a = as<exprs::Abs>(e);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->mult, Multiplicity::lin());
  EXPECT_EQ(a->param, "x");
  ASSERT_TRUE(as<types::Unit>(a->param_type));
  EXPECT_EQ(as<types::Unit>(a->param_type)->mult, Multiplicity::un());
  ASSERT_TRUE(as<exprs::Var>(a->body));
}

TEST(Parser, PrecedenceAndAssociativity) {
  EXPECT_TRUE(same_structure(parse_type("a -> b 1-> c"), parse_type("a -> (b 1-> c)")));
  EXPECT_TRUE(same_structure(parse_type("!Int;?Int;End -> a"), parse_type("(!Int;(?Int;End)) -> a")));
  EXPECT_TRUE(same_structure(parse_type("(a, b)"), parse_type("{fst: a, snd: b}")));
  EXPECT_TRUE(same_structure(parse_expr("f x y"), parse_expr("(f x) y")));
  EXPECT_TRUE(same_structure(parse_expr("f [Int] x"), parse_expr("(f [Int]) x")));
}

TEST(Parser, WrittenKindPassesThrough) {
  FreshSupply supply;
  TypeRef t = parse_type("rec a:1S . a;a", supply);
  const auto* r = as<types::Rec>(t);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->kind, Kind::sl());
  EXPECT_EQ(supply.next_kvar(), 0u);
}

TEST(Parser, OmittedKindsArePreOrder) {
  FreshSupply supply;
  TypeRef t = parse_type("forall a . (rec b . !a;b) -> forall c . c", supply);
  const auto* f = as<types::Forall>(t);
  ASSERT_TRUE(f);
  EXPECT_EQ(f->kind, Kind::var(0));
  const auto* arrow = as<types::Arrow>(f->body);
  EXPECT_EQ(as<types::Rec>(arrow->dom)->kind, Kind::var(1));
  EXPECT_EQ(as<types::Forall>(arrow->cod)->kind, Kind::var(2));
  EXPECT_EQ(supply.next_kvar(), 3u);
}

TEST(Parser, WrittenVariablesAreReserved) {
  FreshSupply supply;
  TypeRef t = parse_type("forall a:'k5 . forall b . a", supply);
  EXPECT_EQ(as<types::Forall>(as<types::Forall>(t)->body)->kind, Kind::var(6));
}

constexpr const char* kSerialise = R"(type Exp = <Lit: Int, Plus: (Exp, Exp)>
type ExpC = +{LitC: !Int, PlusC: ExpC;ExpC}
serialise : Exp -> ExpC;a -> a
serialise = /\a => \e:Exp -> \c:ExpC;a -> c
)";

TEST(Parser, SignatureGeneralization) {
  Program p = parse_program(kSerialise);
  const ValueDecl& v = value(p, "serialise");
  const auto* f = as<types::Forall>(v.signature);
  ASSERT_TRUE(f);
  EXPECT_EQ(f->var, "a");
  EXPECT_TRUE(f->kind.is_var());
  EXPECT_EQ(forall_count(v.signature), 1);
  const auto* arrow = as<types::Arrow>(f->body);
  ASSERT_TRUE(arrow);
  EXPECT_EQ(arrow->dom->alias, "Exp");
  EXPECT_EQ(pretty(f->body, {.use_aliases = true}), "Exp -> ExpC;a -> a");
}

TEST(Parser, SelfReferenceBecomesRec) {
  Program p = parse_program(kSerialise);
  const TypeAbbrev& a = abbrev(p, "ExpC");
  EXPECT_TRUE(a.recursive);
  const auto* r = as<types::Rec>(a.body);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->var, "ExpC");
  EXPECT_EQ(r->site, a.site);
  EXPECT_TRUE(r->kind.is_var());
  const auto* c = as<types::Choice>(r->body);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->view, View::Internal);
  EXPECT_EQ(p.sites[static_cast<std::size_t>(a.site)].category, SiteCategory::TypeAbbreviation);
}

TEST(Parser, GeneralizationIsIdempotent) {
  Program once = parse_program("f : a -> b -> a\nf = \\x:a -> \\y:b -> x\n");
  std::string printed = print_program(once);
  Program twice = parse_program(printed);
  EXPECT_EQ(forall_count(value(once, "f").signature), 2);
  EXPECT_EQ(forall_count(value(twice, "f").signature), 2);
  EXPECT_EQ(print_program(twice), printed);

  Program quantified = parse_program("f : forall a . a -> a\nf = \\x:a -> x\n");
  EXPECT_EQ(forall_count(value(quantified, "f").signature), 1);
}

TEST(Parser, FreshVariablePerOmittedAnnotation) {
  Program p = parse_program(
      "type S = rec x . !Int;x\n"
      "f : forall a:1T . forall b . (rec y:1S . ?Int;y) -> c -> a\n"
      "f = /\\a => /\\b:*T => /\\c => \\s:(rec y:1S . ?Int;y) -> \\z:c -> s\n");
  std::size_t omitted = 0;
  std::set<std::uint32_t> vars;
  for (const AnnotationSite& s : p.sites) {
    if (!s.written) {
      ++omitted;
      EXPECT_TRUE(s.slot.is_var());
      vars.insert(s.slot.var_id());
    } else {
      EXPECT_EQ(s.slot, *s.written);
    }
  }
  EXPECT_EQ(omitted, vars.size());
  // S, x, b, c in the signature, a and c in the body.
  EXPECT_EQ(omitted, 6u);
  std::set<std::uint32_t> in_signature;
  kind_vars(value(p, "f").signature, in_signature);
  EXPECT_EQ(in_signature.size(), 2u);
}

TEST(Parser, Errors) {
  EXPECT_EQ(code_of("f : ()\nf = ()\nf : ()\n"), ErrorCode::DuplicateName);
  EXPECT_EQ(code_of("type T = Int\ntype T = Bool\n"), ErrorCode::DuplicateName);
  EXPECT_EQ(code_of("f : Missing\nf = ()\n"), ErrorCode::UnknownTypeName);
  EXPECT_EQ(code_of("type A = !Int;B\ntype B = ?Int;A\nf : A\nf = ()\n"), ErrorCode::CyclicAbbreviation);
  EXPECT_EQ(code_of("data T = A | B\n"), ErrorCode::UnsupportedDeclaration);
  EXPECT_EQ(code_of("f = ()\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("f : ()\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("f : ()\n f = ()\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("f : (\nf = ()\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("f : {l: Int, l: Int}\nf = ()\n"), ErrorCode::DuplicateLabel);
}

TEST(Parser, ErrorPositions) {
  try {
    parse_program("f : () ->\nf = ()\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.span().line, 2u);
    EXPECT_EQ(e.span().col, 1u);
    EXPECT_EQ(e.expected(), "a type");
  }
}

TEST(Parser, LayoutContinuesIndentedLines) {
  Program p = parse_program("f : () -> ()\nf = \\x:() ->\n  let () = x in\n  x\ng : ()\ng = f ()\n");
  EXPECT_EQ(p.decls.size(), 2u);
  EXPECT_TRUE(same_structure(value(p, "g").body, parse_expr("f ()")));
}

TEST(Parser, PrintedProgramReparses) {
  Program p = parse_program(kSerialise);
  std::string printed = print_program(p);
  EXPECT_EQ(print_program(parse_program(printed)), printed);
}

}  // namespace
}  // namespace kindforge
