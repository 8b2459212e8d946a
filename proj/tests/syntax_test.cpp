#include <gtest/gtest.h>

#include "kindforge/parser.hpp"
#include "kindforge/syntax.hpp"
#include "support.hpp"

namespace kindforge {
namespace {

TEST(FreshSupply, CountsUp) {
  FreshSupply s;
  EXPECT_EQ(s.fresh_kind(), Kind::var(0));
  EXPECT_EQ(s.next_kvar(), 1u);
  FreshSupply seven(7);
  EXPECT_EQ(seven.fresh_kind(), Kind::var(7));
  FreshSupply three(3);
  EXPECT_EQ(three.fresh_kind(), Kind::var(3));
  EXPECT_EQ(three.fresh_kind(), Kind::var(4));
  EXPECT_EQ(three.fresh_mult(), Multiplicity::var(0));
  three.reserve_kvar(10);
  EXPECT_EQ(three.fresh_kind(), Kind::var(11));
}

TEST(Pretty, Kinds) {
  EXPECT_EQ(pretty(Kind::tu()), "*T");
  EXPECT_EQ(pretty(Kind::sl()), "1S");
  EXPECT_EQ(pretty(Kind::su()), "*S");
  EXPECT_EQ(pretty(Kind::tl()), "1T");
  EXPECT_EQ(pretty(Kind::var(2)), "'k2");
  EXPECT_EQ(pretty(Kind::concrete(Multiplicity::var(3), Prekind::T)), "'m3 T");
}

TEST(Pretty, Types) {
  auto semi = make_type(types::Semi{make_type(types::Msg{Polarity::Out, make_type(types::Base{"Int"})}),
                                    make_type(types::Var{"a"})});
  EXPECT_EQ(pretty(semi), "!Int;a");
  EXPECT_EQ(pretty(make_type(types::Unit{Multiplicity::un()})), "()");
  auto recv = make_type(types::Semi{make_type(types::Msg{Polarity::In, make_type(types::Base{"Int"})}),
                                    make_type(types::End{})});
  auto arrow = make_type(types::Arrow{Multiplicity::lin(), recv, make_type(types::Unit{Multiplicity::un()})});
  EXPECT_EQ(pretty(arrow), "?Int;End 1-> ()");
}

TEST(Pretty, Constraints) {
  EXPECT_EQ(pretty(Constraint::sub(Kind::var(0), Kind::tu())), "'k0 <: *T");
  EXPECT_EQ(pretty(Constraint::mult_eq(Multiplicity::var(1), {Kind::var(0), Kind::tu()})),
            "'m1 = lub(mult('k0), mult(*T))");
}

TEST(LabelMap, RejectsDuplicates) {
  LabelMap<int> m;
  m.insert("a", 1);
  EXPECT_THROW(m.insert("a", 2), Error);
  EXPECT_EQ(m.size(), 1u);
}

TEST(ConstraintSet, KeepsFirstOccurrenceOrder) {
  ConstraintSet s;
  s.add(Constraint::sub(Kind::var(0), Kind::tu(), {"A", {}}));
  s.add(Constraint::sub(Kind::var(1), Kind::tu(), {"A", {}}));
  s.add(Constraint::sub(Kind::var(0), Kind::tu(), {"B", {}}));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.items()[0].origin().rule, "A");
  EXPECT_EQ(s.items()[1], Constraint::sub(Kind::var(1), Kind::tu()));
}

TEST(Constraint, RejectsEmptyEquation) {
  EXPECT_THROW(Constraint::mult_eq(Multiplicity::var(0), {}), Error);
  EXPECT_THROW(Constraint::mult_eq(Multiplicity::lin(), {Kind::tu()}), Error);
}

TEST(RoundTrip, GeneratedTypes) {
  testing::SyntaxGen gen(20261015);
  for (int i = 0; i < 1000; ++i) {
    TypeRef t = gen.type();
    std::string text = pretty(t);
    TypeRef back = parse_type(text);
    ASSERT_TRUE(same_structure(t, back)) << text << "\nreparsed as\n" << pretty(back);
    EXPECT_EQ(pretty(back), text);
  }
}

TEST(RoundTrip, GeneratedExprs) {
  testing::SyntaxGen gen(42);
  for (int i = 0; i < 1000; ++i) {
    ExprRef e = gen.expr();
    std::string text = pretty(e);
    ExprRef back = parse_expr(text);
    ASSERT_TRUE(same_structure(e, back)) << text << "\nreparsed as\n" << pretty(back);
    EXPECT_EQ(pretty(back), text);
  }
}

TEST(Values, Classification) {
  EXPECT_TRUE(is_value(parse_expr("\\x:() -> x")));
  EXPECT_TRUE(is_value(parse_expr("/\\a => \\x:a -> x")));
  EXPECT_TRUE(is_value(parse_expr("{l = (), m = send}")));
  EXPECT_FALSE(is_value(parse_expr("f x")));
  EXPECT_FALSE(is_value(parse_expr("new End")));
}

}  // namespace
}  // namespace kindforge
