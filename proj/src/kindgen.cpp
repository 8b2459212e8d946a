#include "kindforge/kindgen.hpp"

namespace kindforge {

namespace {

class KindGenerator {
 public:
  KindGenerator(FreshSupply& supply, ConstraintSet& out) : supply_(supply), out_(out) {}

  Kind run(KindCtx& ctx, const TypeRef& t) {
    return std::visit([&](const auto& n) { return gen(ctx, t, n); }, t->node);
  }

 private:
  void sub(Kind lhs, Kind rhs, const char* rule, Span span) { out_.add(Constraint::sub(lhs, rhs, {rule, span})); }

  Kind gen(KindCtx&, const TypeRef&, const types::Skip&) { return Kind::su(); }
  Kind gen(KindCtx&, const TypeRef&, const types::End&) { return Kind::sl(); }
  Kind gen(KindCtx&, const TypeRef&, const types::Base&) { return Kind::tu(); }
  Kind gen(KindCtx&, const TypeRef&, const types::Unit& u) { return Kind::concrete(u.mult, Prekind::T); }

  Kind gen(KindCtx& ctx, const TypeRef& t, const types::Var& v) {
    auto it = ctx.find(v.name);
    if (it == ctx.end())
      throw Error(ErrorCode::UnboundTypeVariable, t->span, "type variable '" + v.name + "' is not in scope");
    return it->second;
  }

  Kind gen(KindCtx& ctx, const TypeRef&, const types::Msg& m) {
    run(ctx, m.payload);
    return Kind::sl();
  }

  Kind gen(KindCtx& ctx, const TypeRef& t, const types::Choice& c) {
    std::vector<Kind> ks;
    for (const auto& [label, branch] : c.branches) ks.push_back(run(ctx, branch));
    for (Kind k : ks) sub(k, Kind::sl(), "CG-Ch", t->span);
    return Kind::sl();
  }

  Kind gen(KindCtx& ctx, const TypeRef& t, const types::Semi& s) {
    Multiplicity phi = supply_.fresh_mult();
    Kind k1 = run(ctx, s.head);
    Kind k2 = run(ctx, s.tail);
    sub(k1, Kind::sl(), "CG-Seq", t->span);
    sub(k2, Kind::sl(), "CG-Seq", t->span);
    out_.add(Constraint::mult_eq(phi, {k1, k2}, {"CG-Seq", t->span}));
    return Kind::concrete(phi, Prekind::S);
  }

  Kind gen(KindCtx& ctx, const TypeRef&, const types::Arrow& a) {
    run(ctx, a.dom);
    run(ctx, a.cod);
    return Kind::concrete(a.mult, Prekind::T);
  }

  Kind gen(KindCtx& ctx, const TypeRef& t, const types::Record& r) { return fields(ctx, t, r.fields); }
  Kind gen(KindCtx& ctx, const TypeRef& t, const types::Variant& v) { return fields(ctx, t, v.fields); }

  Kind fields(KindCtx& ctx, const TypeRef& t, const LabelMap<TypeRef>& fs) {
    Multiplicity phi = supply_.fresh_mult();
    std::vector<Kind> ks;
    for (const auto& [label, field] : fs) ks.push_back(run(ctx, field));
    Kind result = Kind::concrete(phi, Prekind::T);
    out_.add(Constraint::mult_eq(phi, ks, {"CG-Rcd", t->span}));
    for (Kind k : ks) sub(k, result, "CG-Rcd", t->span);
    return result;
  }

  Kind gen(KindCtx& ctx, const TypeRef& t, const types::Rec& r) {
    Kind body = scoped(ctx, r.var, r.kind, r.body);
    sub(body, r.kind, "CG-Rec", t->span);
    return body;
  }

  Kind gen(KindCtx& ctx, const TypeRef& t, const types::Forall& f) {
    Multiplicity phi = supply_.fresh_mult();
    Kind body = scoped(ctx, f.var, f.kind, f.body);
    out_.add(Constraint::mult_eq(phi, {body}, {"CG-TAbs", t->span}));
    return Kind::concrete(phi, Prekind::T);
  }

  Kind scoped(KindCtx& ctx, const std::string& var, Kind kind, const TypeRef& body) {
    std::optional<Kind> saved;
    if (auto it = ctx.find(var); it != ctx.end()) saved = it->second;
    ctx[var] = kind;
    Kind result = run(ctx, body);
    if (saved)
      ctx[var] = *saved;
    else
      ctx.erase(var);
    return result;
  }

  FreshSupply& supply_;
  ConstraintSet& out_;
};

}  // namespace

Kind gen_type(const KindCtx& ctx, const TypeRef& type, FreshSupply& supply, ConstraintSet& out) {
  KindCtx scope = ctx;
  return KindGenerator(supply, out).run(scope, type);
}

TypeKinding gen_type(const KindCtx& ctx, const TypeRef& type, FreshSupply& supply) {
  ConstraintSet out;
  Kind k = gen_type(ctx, type, supply, out);
  return {k, std::move(out)};
}

std::size_t node_count(const TypeRef& type) {
  return std::visit(
      [](const auto& n) -> std::size_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, types::Msg>) {
          return 1 + node_count(n.payload);
        } else if constexpr (std::is_same_v<T, types::Choice>) {
          std::size_t c = 1;
          for (const auto& [l, b] : n.branches) c += 1 + node_count(b);
          return c;
        } else if constexpr (std::is_same_v<T, types::Record> || std::is_same_v<T, types::Variant>) {
          std::size_t c = 1;
          for (const auto& [l, f] : n.fields) c += 1 + node_count(f);
          return c;
        } else if constexpr (std::is_same_v<T, types::Semi>) {
          return 1 + node_count(n.head) + node_count(n.tail);
        } else if constexpr (std::is_same_v<T, types::Arrow>) {
          return 1 + node_count(n.dom) + node_count(n.cod);
        } else if constexpr (std::is_same_v<T, types::Forall> || std::is_same_v<T, types::Rec>) {
          return 1 + node_count(n.body);
        } else {
          return 1;
        }
      },
      type->node);
}

}  // namespace kindforge
