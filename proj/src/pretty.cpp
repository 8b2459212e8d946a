#include <fmt/format.h>

#include "kindforge/syntax.hpp"

namespace kindforge {

std::string pretty(Multiplicity m) {
  switch (m.tag()) {
    case Multiplicity::Tag::Un: return "*";
    case Multiplicity::Tag::Lin: return "1";
    case Multiplicity::Tag::Var: return fmt::format("'m{}", m.var_id());
  }
  return "?";
}

std::string pretty(Kind k) {
  if (k.is_var()) return fmt::format("'k{}", k.var_id());
  const char* pre = k.prekind() == Prekind::S ? "S" : "T";
  if (k.mult().is_var()) return fmt::format("{} {}", pretty(k.mult()), pre);
  return pretty(k.mult()) + pre;
}

std::string pretty(const Constraint& c) {
  if (c.is_sub()) return fmt::format("{} <: {}", pretty(c.as_sub().lhs), pretty(c.as_sub().rhs));
  const auto& eq = c.as_mult_eq();
  std::string out = fmt::format("'m{} = lub(", eq.var);
  for (std::size_t i = 0; i < eq.args.size(); ++i) {
    if (i) out += ", ";
    out += "mult(" + pretty(eq.args[i]) + ")";
  }
  return out + ")";
}

namespace {

// Precedence levels: 0 binders and arrows, 1 sequencing / application, 2 atoms.
class TypePrinter {
 public:
  explicit TypePrinter(PrettyOptions opts) : opts_(opts) {}

  std::string print(const TypeRef& t, int ctx) {
    if (opts_.use_aliases && !t->alias.empty()) return t->alias;
    std::string s = std::visit([&](const auto& n) { return node(n); }, t->node);
    return level(t) < ctx ? "(" + s + ")" : s;
  }

 private:
  int level(const TypeRef& t) const {
    if (opts_.use_aliases && !t->alias.empty()) return 2;
    if (as<types::Forall>(t) || as<types::Rec>(t) || as<types::Arrow>(t)) return 0;
    if (as<types::Semi>(t)) return 1;
    return 2;
  }

  std::string fields(const LabelMap<TypeRef>& m) {
    std::string out;
    for (const auto& [l, t] : m) {
      if (!out.empty()) out += ", ";
      out += l + ": " + print(t, 0);
    }
    return out;
  }

  std::string node(const types::Skip&) { return "Skip"; }
  std::string node(const types::End&) { return "End"; }
  std::string node(const types::Base& b) { return b.name; }
  std::string node(const types::Var& v) { return v.name; }
  std::string node(const types::Msg& m) {
    return (m.polarity == Polarity::Out ? "!" : "?") + print(m.payload, 2);
  }
  std::string node(const types::Choice& c) {
    return (c.view == View::Internal ? "+{" : "&{") + fields(c.branches) + "}";
  }
  std::string node(const types::Semi& s) { return print(s.head, 2) + ";" + print(s.tail, 1); }
  std::string node(const types::Unit& u) {
    return u.mult == Multiplicity::un() ? "()" : pretty(u.mult) + "()";
  }
  std::string node(const types::Arrow& a) {
    std::string arrow = a.mult == Multiplicity::un() ? " -> " : " " + pretty(a.mult) + "-> ";
    return print(a.dom, 1) + arrow + print(a.cod, 0);
  }
  std::string node(const types::Record& r) {
    if (is_pair(r.fields)) {
      auto it = r.fields.begin();
      std::string fst = print(it->second, 0);
      ++it;
      return "(" + fst + ", " + print(it->second, 0) + ")";
    }
    return "{" + fields(r.fields) + "}";
  }
  std::string node(const types::Variant& v) { return "<" + fields(v.fields) + ">"; }
  std::string node(const types::Forall& f) {
    return fmt::format("forall {}:{} . {}", f.var, pretty(f.kind), print(f.body, 0));
  }
  std::string node(const types::Rec& r) {
    return fmt::format("rec {}:{} . {}", r.var, pretty(r.kind), print(r.body, 0));
  }

  static bool is_pair(const LabelMap<TypeRef>& m) {
    if (m.size() != 2) return false;
    auto it = m.begin();
    return it->first == "fst" && std::next(it)->first == "snd";
  }

  PrettyOptions opts_;
};

class ExprPrinter {
 public:
  explicit ExprPrinter(PrettyOptions opts) : types_(opts) {}

  std::string print(const ExprRef& e, int ctx) {
    std::string s = std::visit([&](const auto& n) { return node(n); }, e->node);
    return level(e) < ctx ? "(" + s + ")" : s;
  }

 private:
  static int level(const ExprRef& e) {
    if (as<exprs::App>(e) || as<exprs::TApp>(e) || as<exprs::Select>(e) || as<exprs::New>(e)) return 1;
    if (as<exprs::Abs>(e) || as<exprs::TAbs>(e) || as<exprs::LetRecord>(e) || as<exprs::LetUnit>(e) ||
        as<exprs::Case>(e) || as<exprs::Match>(e))
      return 0;
    return 2;
  }

  std::string type(const TypeRef& t, int ctx) { return types_.print(t, ctx); }

  std::string branches(const LabelMap<Branch>& bs) {
    std::string out;
    for (const auto& [l, b] : bs) {
      if (!out.empty()) out += ", ";
      out += fmt::format("{} {} -> {}", l, b.binder, print(b.body, 0));
    }
    return "{" + out + "}";
  }

  std::string node(const exprs::UnitLit&) { return "()"; }
  std::string node(const exprs::IntLit& i) { return std::to_string(i.value); }
  std::string node(const exprs::BoolLit& b) { return b.value ? "true" : "false"; }
  std::string node(const exprs::Var& v) { return v.name; }
  std::string node(const exprs::Const& c) { return std::string(to_string(c.which)); }
  std::string node(const exprs::Abs& a) {
    std::string arrow = a.mult == Multiplicity::un() ? " -> " : " " + pretty(a.mult) + "-> ";
    return "\\" + a.param + ":" + type(a.param_type, 1) + arrow + print(a.body, 0);
  }
  std::string node(const exprs::TAbs& t) {
    return fmt::format("/\\{}:{} => {}", t.var, pretty(t.kind), print(t.body, 0));
  }
  std::string node(const exprs::App& a) { return print(a.fun, 1) + " " + print(a.arg, 2); }
  std::string node(const exprs::TApp& t) { return print(t.fun, 1) + " [" + type(t.arg, 0) + "]"; }
  std::string node(const exprs::RecordLit& r) {
    if (r.fields.size() == 2 && r.fields.begin()->first == "fst" && std::next(r.fields.begin())->first == "snd")
      return "(" + print(r.fields.begin()->second, 0) + ", " + print(std::next(r.fields.begin())->second, 0) + ")";
    std::string out;
    for (const auto& [l, v] : r.fields) {
      if (!out.empty()) out += ", ";
      out += l + " = " + print(v, 0);
    }
    return "{" + out + "}";
  }
  std::string node(const exprs::LetRecord& l) {
    std::string pattern;
    if (l.binders.size() == 2 && l.binders.begin()->first == "fst" &&
        std::next(l.binders.begin())->first == "snd") {
      pattern = "(" + l.binders.begin()->second + ", " + std::next(l.binders.begin())->second + ")";
    } else {
      for (const auto& [label, x] : l.binders) {
        if (!pattern.empty()) pattern += ", ";
        pattern += label + " = " + x;
      }
      pattern = "{" + pattern + "}";
    }
    return fmt::format("let {} = {} in {}", pattern, print(l.scrutinee, 0), print(l.body, 0));
  }
  std::string node(const exprs::LetUnit& l) {
    return fmt::format("let () = {} in {}", print(l.scrutinee, 0), print(l.body, 0));
  }
  std::string node(const exprs::Inject& i) {
    return fmt::format("({} {} : {})", i.label, print(i.payload, 2), type(i.ascription, 0));
  }
  std::string node(const exprs::Case& c) {
    return fmt::format("case {} of {}", print(c.scrutinee, 0), branches(c.branches));
  }
  std::string node(const exprs::Match& m) {
    return fmt::format("match {} with {}", print(m.scrutinee, 0), branches(m.branches));
  }
  std::string node(const exprs::New& n) { return "new " + type(n.channel, 2); }
  std::string node(const exprs::Select& s) { return "select " + s.label + " " + print(s.scrutinee, 2); }

  TypePrinter types_;
};

}  // namespace

std::string pretty(const TypeRef& t, PrettyOptions opts) { return TypePrinter(opts).print(t, 0); }

std::string pretty(const ExprRef& e, PrettyOptions opts) { return ExprPrinter(opts).print(e, 0); }

}  // namespace kindforge
