#include "kindforge/exprgen.hpp"

#include <fmt/format.h>

#include "kindforge/typeops.hpp"

namespace kindforge {

// Usage contexts -----------------------------------------------------------------

UsageCtx::UsageCtx(std::initializer_list<std::pair<std::string, Kind>> entries) {
  for (const auto& [x, k] : entries) insert(x, k);
}

void UsageCtx::insert(const std::string& name, Kind kind) {
  if (!contains(name)) entries_.emplace_back(name, kind);
}

void UsageCtx::erase(const std::string& name) {
  std::erase_if(entries_, [&](const auto& e) { return e.first == name; });
}

bool UsageCtx::contains(const std::string& name) const { return find(name).has_value(); }

std::optional<Kind> UsageCtx::find(const std::string& name) const {
  for (const auto& [x, k] : entries_)
    if (x == name) return k;
  return std::nullopt;
}

UsageCtx UsageCtx::united(const UsageCtx& other) const {
  UsageCtx out = *this;
  for (const auto& [x, k] : other) out.insert(x, k);
  return out;
}

ConstraintSet weaken(const std::string& x, Kind kind, const UsageCtx& usage, Origin origin) {
  ConstraintSet out;
  if (!usage.contains(x)) out.add(Constraint::sub(kind, Kind::tu(), std::move(origin)));
  return out;
}

ConstraintSet merge(const UsageCtx& u1, const UsageCtx& u2, Origin origin) {
  ConstraintSet out;
  for (const auto& [x, k] : u1)
    if (u2.contains(x)) out.add(Constraint::sub(k, Kind::tu(), origin));
  return out;
}

// Builtins -------------------------------------------------------------------------

namespace {

TypeRef tvar(const char* name) { return make_type(types::Var{name}); }
TypeRef unit() { return make_type(types::Unit{Multiplicity::un()}); }
TypeRef arrow(Multiplicity m, TypeRef a, TypeRef b) { return make_type(types::Arrow{m, std::move(a), std::move(b)}); }
TypeRef semi(TypeRef a, TypeRef b) { return make_type(types::Semi{std::move(a), std::move(b)}); }
TypeRef msg(Polarity p, TypeRef t) { return make_type(types::Msg{p, std::move(t)}); }
TypeRef forall(const char* var, Kind k, TypeRef body) { return make_type(types::Forall{var, k, std::move(body)}); }
TypeRef pair(TypeRef a, TypeRef b) {
  return make_type(types::Record{LabelMap<TypeRef>{{"fst", std::move(a)}, {"snd", std::move(b)}}});
}

}  // namespace

const BuiltinTable& default_builtins() {
  static const BuiltinTable table = [] {
    const auto un = Multiplicity::un();
    const auto lin = Multiplicity::lin();
    BuiltinTable t;
    t[Builtin::Send] = forall("a", Kind::tl(), forall("b", Kind::sl(),
        arrow(un, tvar("a"), arrow(lin, semi(msg(Polarity::Out, tvar("a")), tvar("b")), tvar("b")))));
    t[Builtin::Receive] = forall("a", Kind::tl(), forall("b", Kind::sl(),
        arrow(un, semi(msg(Polarity::In, tvar("a")), tvar("b")), pair(tvar("a"), tvar("b")))));
    t[Builtin::Close] = arrow(un, make_type(types::End{}), unit());
    t[Builtin::Fork] = arrow(un, arrow(lin, unit(), unit()), unit());
    return t;
  }();
  return table;
}

// Generation -----------------------------------------------------------------------

namespace {

struct Synth {
  TypeRef type;
  UsageCtx usage;
};

class ExprGenerator {
 public:
  ExprGenerator(const BuiltinTable& builtins, FreshSupply& supply, ConstraintSet& out)
      : builtins_(builtins), supply_(supply), out_(out) {}

  Synth run(const KindCtx& delta, const TypeCtx& gamma, const ExprRef& e) {
    return std::visit([&](const auto& n) { return gen(delta, gamma, e, n); }, e->node);
  }

 private:
  Kind kind_of(const KindCtx& delta, const TypeRef& t) { return gen_type(delta, t, supply_, out_); }

  void add(const ConstraintSet& cs) { out_.append(cs); }

  [[noreturn]] static void fail(ErrorCode code, const ExprRef& e, const std::string& msg) {
    throw Error(code, e->span, msg);
  }

  static void expect_equivalent(const TypeRef& expected, const TypeRef& found, const ExprRef& at) {
    if (!equivalent(expected, found))
      fail(ErrorCode::TypeMismatch, at,
           fmt::format("expected type '{}', found '{}'", pretty(expected, {true}), pretty(found, {true})));
  }

  // Head-normalises `t` and checks that it has the constructor `Node`.
  template <typename Node>
  static TypeRef expect_shape(const TypeRef& t, ErrorCode code, const char* what, const ExprRef& at) {
    TypeRef norm = whnf(t);
    if (!as<Node>(norm)) fail(code, at, fmt::format("expected {} type, found '{}'", what, pretty(t, {true})));
    return norm;
  }

  // Constants and literals ---------------------------------------------------------

  Synth gen(const KindCtx&, const TypeCtx&, const ExprRef&, const exprs::UnitLit&) {
    return {make_type(types::Unit{Multiplicity::un()}), {}};
  }
  Synth gen(const KindCtx&, const TypeCtx&, const ExprRef&, const exprs::IntLit&) {
    return {make_type(types::Base{"Int"}), {}};
  }
  Synth gen(const KindCtx&, const TypeCtx&, const ExprRef&, const exprs::BoolLit&) {
    return {make_type(types::Base{"Bool"}), {}};
  }

  Synth gen(const KindCtx&, const TypeCtx&, const ExprRef& e, const exprs::Const& c) {
    auto it = builtins_.find(c.which);
    if (it == builtins_.end()) fail(ErrorCode::UnboundVariable, e, "no scheme for builtin " + std::string(to_string(c.which)));
    kind_of({}, it->second);
    return {it->second, {}};
  }

  Synth gen(const KindCtx& delta, const TypeCtx& gamma, const ExprRef& e, const exprs::Var& v) {
    auto it = gamma.find(v.name);
    if (it == gamma.end()) fail(ErrorCode::UnboundVariable, e, "variable '" + v.name + "' is not in scope");
    Kind k = kind_of(delta, it->second);
    return {it->second, UsageCtx{{v.name, k}}};
  }

  // Abstractions and applications ---------------------------------------------------

  Synth gen(const KindCtx& delta, const TypeCtx& gamma, const ExprRef& e, const exprs::Abs& a) {
    Kind k = kind_of(delta, a.param_type);
    TypeCtx inner = gamma;
    inner[a.param] = a.param_type;
    Synth body = run(delta, inner, a.body);
    if (auto closure = as<exprs::Abs>(a.body))
      out_.add(Constraint::sub(k, Kind::concrete(closure->mult, Prekind::T), {"I-Abs", e->span}));
    add(weaken(a.param, k, body.usage, {"Weaken", e->span}));
    body.usage.erase(a.param);
    return {make_type(types::Arrow{a.mult, a.param_type, body.type}, e->span), std::move(body.usage)};
  }

  Synth gen(const KindCtx& delta, const TypeCtx& gamma, const ExprRef& e, const exprs::App& a) {
    Synth fun = run(delta, gamma, a.fun);
    TypeRef fun_type = whnf(fun.type);
    auto arrow_node = as<types::Arrow>(fun_type);
    if (!arrow_node) fail(ErrorCode::NotAFunction, a.fun, "expected a function, found type '" + pretty(fun.type, {true}) + "'");
    Synth arg = run(delta, gamma, a.arg);
    expect_equivalent(arrow_node->dom, arg.type, a.arg);
    kind_of(delta, fun_type);
    add(merge(fun.usage, arg.usage, {"Merge", e->span}));
    return {arrow_node->cod, fun.usage.united(arg.usage)};
  }

  Synth gen(const KindCtx& delta, const TypeCtx& gamma, const ExprRef& e, const exprs::TAbs& t) {
    if (!is_value(t.body)) fail(ErrorCode::NotAValue, t.body, "the body of a type abstraction must be a value");
    KindCtx inner = delta;
    inner[t.var] = t.kind;
    Synth body = run(inner, gamma, t.body);
    kind_of(inner, body.type);
    return {make_type(types::Forall{t.var, t.kind, body.type}, e->span), std::move(body.usage)};
  }

  Synth gen(const KindCtx& delta, const TypeCtx& gamma, const ExprRef& e, const exprs::TApp& t) {
    Synth fun = run(delta, gamma, t.fun);
    TypeRef fun_type = whnf(fun.type);
    auto quant = as<types::Forall>(fun_type);
    if (!quant) fail(ErrorCode::NotAForall, t.fun, "expected a polymorphic type, found '" + pretty(fun.type, {true}) + "'");
    Kind arg_kind = kind_of(delta, t.arg);
    out_.add(Constraint::sub(arg_kind, quant->kind, {"ITApp+sub", t.arg->span.known() ? t.arg->span : e->span}));
    return {substitute(quant->body, quant->var, t.arg), std::move(fun.usage)};
  }

  // Records ------------------------------------------------------------------------

  Synth gen(const KindCtx& delta, const TypeCtx& gamma, const ExprRef& e, const exprs::RecordLit& r) {
    LabelMap<TypeRef> fields;
    std::vector<UsageCtx> usages;
    for (const auto& [l, v] : r.fields) {
      Synth f = run(delta, gamma, v);
      kind_of(delta, f.type);
      fields.insert(l, f.type);
      usages.push_back(std::move(f.usage));
    }
    UsageCtx all;
    for (std::size_t i = 0; i < usages.size(); ++i) {
      for (std::size_t j = i + 1; j < usages.size(); ++j) add(merge(usages[i], usages[j], {"Merge", e->span}));
      all = all.united(usages[i]);
    }
    return {make_type(types::Record{std::move(fields)}, e->span), std::move(all)};
  }

  Synth gen(const KindCtx& delta, const TypeCtx& gamma, const ExprRef& e, const exprs::LetRecord& l) {
    Synth scrut = run(delta, gamma, l.scrutinee);
    TypeRef norm = expect_shape<types::Record>(scrut.type, ErrorCode::NotARecord, "a record", l.scrutinee);
    const auto& record = *as<types::Record>(norm);
    TypeCtx inner = gamma;
    for (const auto& [label, x] : l.binders) {
      const TypeRef* ft = record.fields.find(label);
      if (!ft) fail(ErrorCode::MissingLabel, e, "record has no field '" + label + "'");
      inner[x] = *ft;
    }
    if (l.binders.size() != record.fields.size())
      fail(ErrorCode::TypeMismatch, e, "pattern does not bind every field of '" + pretty(scrut.type, {true}) + "'");
    return eliminate(delta, inner, e, scrut, l.body, [&](const std::string& label) { return *record.fields.find(label); },
                     l.binders);
  }

  Synth gen(const KindCtx& delta, const TypeCtx& gamma, const ExprRef& e, const exprs::LetUnit& l) {
    Synth scrut = run(delta, gamma, l.scrutinee);
    if (!as<types::Unit>(whnf(scrut.type)))
      fail(ErrorCode::TypeMismatch, l.scrutinee, "expected a unit type, found '" + pretty(scrut.type, {true}) + "'");
    return eliminate(delta, gamma, e, scrut, l.body, [](const std::string&) { return TypeRef{}; }, {});
  }

  // Shared tail of record and unit elimination.
  template <typename FieldType>
  Synth eliminate(const KindCtx& delta, const TypeCtx& inner, const ExprRef& e, Synth& scrut, const ExprRef& body_expr,
                  FieldType field_type, const LabelMap<std::string>& binders) {
    Synth body = run(delta, inner, body_expr);
    kind_of(delta, body.type);
    std::vector<Kind> binder_kinds;
    for (const auto& [label, x] : binders) binder_kinds.push_back(kind_of(delta, field_type(label)));
    UsageCtx body_rest = body.usage;
    for (const auto& [label, x] : binders) body_rest.erase(x);
    add(merge(scrut.usage, body_rest, {"Merge", e->span}));
    std::size_t i = 0;
    for (const auto& [label, x] : binders) add(weaken(x, binder_kinds[i++], body.usage, {"Weaken", e->span}));
    return {body.type, scrut.usage.united(body_rest)};
  }

  // Variants and choices -------------------------------------------------------------

  Synth gen(const KindCtx& delta, const TypeCtx& gamma, const ExprRef& e, const exprs::Inject& i) {
    TypeRef norm = expect_shape<types::Variant>(i.ascription, ErrorCode::NotAVariant, "a variant", e);
    const auto& variant = *as<types::Variant>(norm);
    const TypeRef* target = variant.fields.find(i.label);
    if (!target) fail(ErrorCode::MissingLabel, e, "variant has no label '" + i.label + "'");
    Synth payload = run(delta, gamma, i.payload);
    expect_equivalent(*target, payload.type, i.payload);
    for (const auto& [l, t] : variant.fields) kind_of(delta, t);
    return {i.ascription, std::move(payload.usage)};
  }

  Synth gen(const KindCtx& delta, const TypeCtx& gamma, const ExprRef& e, const exprs::Case& c) {
    Synth scrut = run(delta, gamma, c.scrutinee);
    TypeRef norm = expect_shape<types::Variant>(scrut.type, ErrorCode::NotAVariant, "a variant", c.scrutinee);
    return branches(delta, gamma, e, scrut, as<types::Variant>(norm)->fields, c.branches);
  }

  Synth gen(const KindCtx& delta, const TypeCtx& gamma, const ExprRef& e, const exprs::Match& m) {
    Synth scrut = run(delta, gamma, m.scrutinee);
    TypeRef norm = expect_shape<types::Choice>(scrut.type, ErrorCode::NotAChoice, "an external choice", m.scrutinee);
    const auto& choice = *as<types::Choice>(norm);
    if (choice.view != View::External)
      fail(ErrorCode::NotAChoice, m.scrutinee, "match needs an external choice, found '" + pretty(scrut.type, {true}) + "'");
    return branches(delta, gamma, e, scrut, choice.branches, m.branches);
  }

  Synth branches(const KindCtx& delta, const TypeCtx& gamma, const ExprRef& e, Synth& scrut,
                 const LabelMap<TypeRef>& alts, const LabelMap<Branch>& bs) {
    for (const auto& [l, t] : alts)
      if (!bs.contains(l)) fail(ErrorCode::MissingLabel, e, "no branch for label '" + l + "'");
    TypeRef result;
    UsageCtx usage = scrut.usage;
    for (const auto& [l, b] : bs) {
      const TypeRef* alt = alts.find(l);
      if (!alt) fail(ErrorCode::MissingLabel, e, "label '" + l + "' is not among the alternatives");
      TypeCtx inner = gamma;
      inner[b.binder] = *alt;
      Synth body = run(delta, inner, b.body);
      Kind k = kind_of(delta, *alt);
      if (!result)
        result = body.type;
      else
        expect_equivalent(result, body.type, b.body);
      add(weaken(b.binder, k, body.usage, {"Weaken", b.body->span}));
      body.usage.erase(b.binder);
      usage = usage.united(body.usage);
    }
    return {result, std::move(usage)};
  }

  Synth gen(const KindCtx& delta, const TypeCtx& gamma, const ExprRef&, const exprs::Select& s) {
    Synth scrut = run(delta, gamma, s.scrutinee);
    TypeRef norm = expect_shape<types::Choice>(scrut.type, ErrorCode::NotAChoice, "an internal choice", s.scrutinee);
    const auto& choice = *as<types::Choice>(norm);
    if (choice.view != View::Internal)
      fail(ErrorCode::NotAChoice, s.scrutinee, "select needs an internal choice, found '" + pretty(scrut.type, {true}) + "'");
    const TypeRef* chosen = choice.branches.find(s.label);
    if (!chosen) fail(ErrorCode::MissingLabel, s.scrutinee, "choice has no label '" + s.label + "'");
    for (const auto& [l, t] : choice.branches) kind_of(delta, t);
    return {*chosen, std::move(scrut.usage)};
  }

  Synth gen(const KindCtx&, const TypeCtx&, const ExprRef& e, const exprs::New& n) {
    kind_of({}, n.channel);
    TypeRef other = dual(n.channel);
    return {make_type(types::Record{LabelMap<TypeRef>{{"fst", n.channel}, {"snd", other}}}, e->span), {}};
  }

  const BuiltinTable& builtins_;
  FreshSupply& supply_;
  ConstraintSet& out_;
};

}  // namespace

ExprResult gen_expr(const KindCtx& kinds, const TypeCtx& types, const ExprRef& e, const BuiltinTable& builtins,
                    FreshSupply& supply) {
  ConstraintSet out;
  Synth s = ExprGenerator(builtins, supply, out).run(kinds, types, e);
  return {s.type, std::move(out), std::move(s.usage)};
}

std::size_t node_count(const ExprRef& e) {
  auto branches = [](const LabelMap<Branch>& bs) {
    std::size_t c = 0;
    for (const auto& [l, b] : bs) c += 1 + node_count(b.body);
    return c;
  };
  return std::visit(
      [&](const auto& n) -> std::size_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, exprs::Abs>) {
          return 1 + node_count(n.param_type) + node_count(n.body);
        } else if constexpr (std::is_same_v<T, exprs::TAbs>) {
          return 1 + node_count(n.body);
        } else if constexpr (std::is_same_v<T, exprs::App>) {
          return 1 + node_count(n.fun) + node_count(n.arg);
        } else if constexpr (std::is_same_v<T, exprs::TApp>) {
          return 1 + node_count(n.fun) + node_count(n.arg);
        } else if constexpr (std::is_same_v<T, exprs::RecordLit>) {
          std::size_t c = 1;
          for (const auto& [l, v] : n.fields) c += 1 + node_count(v);
          return c;
        } else if constexpr (std::is_same_v<T, exprs::LetRecord>) {
          return 1 + n.binders.size() + node_count(n.scrutinee) + node_count(n.body);
        } else if constexpr (std::is_same_v<T, exprs::LetUnit>) {
          return 1 + node_count(n.scrutinee) + node_count(n.body);
        } else if constexpr (std::is_same_v<T, exprs::Inject>) {
          return 1 + node_count(n.ascription) + node_count(n.payload);
        } else if constexpr (std::is_same_v<T, exprs::Case> || std::is_same_v<T, exprs::Match>) {
          return 1 + node_count(n.scrutinee) + branches(n.branches);
        } else if constexpr (std::is_same_v<T, exprs::New>) {
          return 1 + node_count(n.channel);
        } else if constexpr (std::is_same_v<T, exprs::Select>) {
          return 1 + node_count(n.scrutinee);
        } else {
          return 1;
        }
      },
      e->node);
}

}  // namespace kindforge
