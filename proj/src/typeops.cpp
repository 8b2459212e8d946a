#include "kindforge/typeops.hpp"

#include <algorithm>
#include <functional>

namespace kindforge {

namespace {

using TypeFn = std::function<TypeRef(const TypeRef&)>;

LabelMap<TypeRef> map_labels(const LabelMap<TypeRef>& m, const TypeFn& f) {
  LabelMap<TypeRef> out;
  for (const auto& [l, t] : m) out.insert(l, f(t));
  return out;
}

// Rebuilds `t` with `f` applied to every immediate child type. Binder nodes are
// rebuilt with the same variable and kind.
TypeRef map_children(const TypeRef& t, const TypeFn& f) {
  Type::Node node = std::visit(
      [&](const auto& n) -> Type::Node {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, types::Msg>) {
          return types::Msg{n.polarity, f(n.payload)};
        } else if constexpr (std::is_same_v<T, types::Choice>) {
          return types::Choice{n.view, map_labels(n.branches, f)};
        } else if constexpr (std::is_same_v<T, types::Semi>) {
          return types::Semi{f(n.head), f(n.tail)};
        } else if constexpr (std::is_same_v<T, types::Arrow>) {
          return types::Arrow{n.mult, f(n.dom), f(n.cod)};
        } else if constexpr (std::is_same_v<T, types::Record>) {
          return types::Record{map_labels(n.fields, f)};
        } else if constexpr (std::is_same_v<T, types::Variant>) {
          return types::Variant{map_labels(n.fields, f)};
        } else if constexpr (std::is_same_v<T, types::Forall>) {
          return types::Forall{n.var, n.kind, f(n.body), n.site};
        } else if constexpr (std::is_same_v<T, types::Rec>) {
          return types::Rec{n.var, n.kind, f(n.body), n.site};
        } else {
          return n;
        }
      },
      t->node);
  return make_type(std::move(node), t->span, t->alias);
}

void collect_free(const TypeRef& t, std::set<std::string>& bound, std::set<std::string>& out) {
  if (auto v = as<types::Var>(t)) {
    if (!bound.count(v->name)) out.insert(v->name);
    return;
  }
  auto binder = [&](const std::string& var, const TypeRef& body) {
    bool fresh = bound.insert(var).second;
    collect_free(body, bound, out);
    if (fresh) bound.erase(var);
  };
  if (auto f = as<types::Forall>(t)) return binder(f->var, f->body);
  if (auto r = as<types::Rec>(t)) return binder(r->var, r->body);
  map_children(t, [&](const TypeRef& c) {
    collect_free(c, bound, out);
    return c;
  });
}

std::string rename_away(std::string name, const std::set<std::string>& avoid) {
  while (avoid.count(name)) name += "'";
  return name;
}

template <typename Binder>
TypeRef substitute_binder(const TypeRef& t, const Binder& b, const std::string& var, const TypeRef& repl,
                          const std::set<std::string>& repl_free) {
  if (b.var == var) return t;
  std::string name = b.var;
  TypeRef body = b.body;
  if (repl_free.count(b.var)) {
    std::set<std::string> avoid = repl_free;
    auto body_free = free_type_vars(b.body);
    avoid.insert(body_free.begin(), body_free.end());
    avoid.insert(var);
    name = rename_away(b.var, avoid);
    body = substitute(body, b.var, make_type(types::Var{name}, t->span));
  }
  body = substitute(body, var, repl);
  return make_type(Binder{name, b.kind, body, b.site}, t->span, t->alias);
}

TypeRef dual_in(const TypeRef& t, std::set<std::string>& rec_vars) {
  return std::visit(
      [&](const auto& n) -> TypeRef {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, types::Skip> || std::is_same_v<T, types::End>) {
          return make_type(n, t->span);
        } else if constexpr (std::is_same_v<T, types::Msg>) {
          Polarity p = n.polarity == Polarity::Out ? Polarity::In : Polarity::Out;
          return make_type(types::Msg{p, n.payload}, t->span);
        } else if constexpr (std::is_same_v<T, types::Choice>) {
          View v = n.view == View::Internal ? View::External : View::Internal;
          LabelMap<TypeRef> bs;
          for (const auto& [l, b] : n.branches) bs.insert(l, dual_in(b, rec_vars));
          return make_type(types::Choice{v, std::move(bs)}, t->span);
        } else if constexpr (std::is_same_v<T, types::Semi>) {
          return make_type(types::Semi{dual_in(n.head, rec_vars), dual_in(n.tail, rec_vars)}, t->span);
        } else if constexpr (std::is_same_v<T, types::Rec>) {
          bool fresh = rec_vars.insert(n.var).second;
          TypeRef body = dual_in(n.body, rec_vars);
          if (fresh) rec_vars.erase(n.var);
          return make_type(types::Rec{n.var, n.kind, body, n.site}, t->span);
        } else if constexpr (std::is_same_v<T, types::Var>) {
          if (!rec_vars.count(n.name))
            throw Error(ErrorCode::NotASessionType, t->span,
                        "cannot dualise free type variable '" + n.name + "'");
          return make_type(n, t->span);
        } else {
          throw Error(ErrorCode::NotASessionType, t->span, "'" + pretty(t) + "' is not a session type");
        }
      },
      t->node);
}

// Guards against non-contractive types such as `rec a . a`.
constexpr int kMaxUnfold = 64;

TypeRef whnf_bounded(const TypeRef& t, int& budget) {
  TypeRef cur = t;
  while (budget-- > 0) {
    if (auto r = as<types::Rec>(cur)) {
      cur = substitute(r->body, r->var, cur);
      continue;
    }
    auto s = as<types::Semi>(cur);
    if (!s) return cur;
    TypeRef head = whnf_bounded(s->head, budget);
    if (as<types::Skip>(head)) {
      cur = s->tail;
      continue;
    }
    if (auto hs = as<types::Semi>(head)) {
      cur = make_type(types::Semi{hs->head, make_type(types::Semi{hs->tail, s->tail}, cur->span)}, cur->span);
      continue;
    }
    if (auto c = as<types::Choice>(head)) {
      LabelMap<TypeRef> bs;
      for (const auto& [l, b] : c->branches) bs.insert(l, make_type(types::Semi{b, s->tail}, b->span));
      return make_type(types::Choice{c->view, std::move(bs)}, cur->span);
    }
    TypeRef tail = whnf_bounded(s->tail, budget);
    if (as<types::Skip>(tail)) return head;
    return make_type(types::Semi{head, tail}, cur->span);
  }
  return cur;
}

void flatten(const TypeRef& t, std::vector<TypeRef>& out);

// Sequential composition flattened and re-associated to the right, with Skip
// removed, everywhere in the type. Recursive types are left folded.
TypeRef canonical(const TypeRef& t) {
  if (as<types::Semi>(t) || as<types::Skip>(t)) {
    std::vector<TypeRef> parts;
    flatten(t, parts);
    if (parts.empty()) return make_type(types::Skip{}, t->span);
    TypeRef out = parts.back();
    for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) out = make_type(types::Semi{*it, out}, t->span);
    return out;
  }
  return map_children(t, [](const TypeRef& c) { return canonical(c); });
}

void flatten(const TypeRef& t, std::vector<TypeRef>& out) {
  if (const auto* s = as<types::Semi>(t)) {
    flatten(s->head, out);
    flatten(s->tail, out);
  } else if (!as<types::Skip>(t)) {
    out.push_back(canonical(t));
  }
}

class Equivalence {
 public:
  bool eq(const TypeRef& a, const TypeRef& b) {
    std::string ka = pretty(canonical(a)), kb = pretty(canonical(b));
    if (ka == kb) return true;
    std::string key = ka + " == " + kb;
    if (assumed_.count(key)) return true;
    assumed_.insert(key);
    TypeRef x = whnf(a);
    TypeRef y = whnf(b);
    if (x->node.index() != y->node.index()) return false;
    return std::visit([&](const auto& n) { return node(n, std::get<std::decay_t<decltype(n)>>(y->node)); },
                      x->node);
  }

 private:
  bool node(const types::Skip&, const types::Skip&) { return true; }
  bool node(const types::End&, const types::End&) { return true; }
  bool node(const types::Base& a, const types::Base& b) { return a.name == b.name; }
  bool node(const types::Var& a, const types::Var& b) { return a.name == b.name; }
  bool node(const types::Unit& a, const types::Unit& b) { return a.mult == b.mult; }
  bool node(const types::Msg& a, const types::Msg& b) { return a.polarity == b.polarity && eq(a.payload, b.payload); }
  bool node(const types::Semi& a, const types::Semi& b) { return eq(a.head, b.head) && eq(a.tail, b.tail); }
  bool node(const types::Arrow& a, const types::Arrow& b) {
    return a.mult == b.mult && eq(a.dom, b.dom) && eq(a.cod, b.cod);
  }
  bool node(const types::Choice& a, const types::Choice& b) { return a.view == b.view && labels(a.branches, b.branches); }
  bool node(const types::Record& a, const types::Record& b) { return labels(a.fields, b.fields); }
  bool node(const types::Variant& a, const types::Variant& b) { return labels(a.fields, b.fields); }
  bool node(const types::Forall& a, const types::Forall& b) {
    TypeRef v = make_type(types::Var{"%" + std::to_string(counter_++)});
    return eq(substitute(a.body, a.var, v), substitute(b.body, b.var, v));
  }
  // whnf never leaves a recursive type at the head.
  bool node(const types::Rec&, const types::Rec&) { return false; }

  bool labels(const LabelMap<TypeRef>& a, const LabelMap<TypeRef>& b) {
    if (a.size() != b.size()) return false;
    for (const auto& [l, t] : a) {
      const TypeRef* u = b.find(l);
      if (!u || !eq(t, *u)) return false;
    }
    return true;
  }

  std::set<std::string> assumed_;
  int counter_ = 0;
};

Kind solved(Kind k, const Solution& s) {
  if (!k.is_var()) return k;
  auto it = s.kind_vars.find(k.var_id());
  return it == s.kind_vars.end() ? k : it->second;
}

}  // namespace

std::set<std::string> free_type_vars(const TypeRef& t) {
  std::set<std::string> bound, out;
  collect_free(t, bound, out);
  return out;
}

TypeRef substitute(const TypeRef& t, const std::string& var, const TypeRef& replacement) {
  if (!free_type_vars(t).count(var)) return t;
  if (as<types::Var>(t)) return replacement;
  std::set<std::string> repl_free = free_type_vars(replacement);
  if (auto f = as<types::Forall>(t)) return substitute_binder(t, *f, var, replacement, repl_free);
  if (auto r = as<types::Rec>(t)) return substitute_binder(t, *r, var, replacement, repl_free);
  TypeRef out = map_children(t, [&](const TypeRef& c) { return substitute(c, var, replacement); });
  return make_type(out->node, out->span);
}

TypeRef dual(const TypeRef& t) {
  std::set<std::string> rec_vars;
  return dual_in(t, rec_vars);
}

TypeRef whnf(const TypeRef& t) {
  int budget = kMaxUnfold;
  return whnf_bounded(t, budget);
}

bool equivalent(const TypeRef& a, const TypeRef& b) { return Equivalence().eq(a, b); }

TypeRef apply_solution(const TypeRef& t, const Solution& solution) {
  if (auto f = as<types::Forall>(t))
    return make_type(types::Forall{f->var, solved(f->kind, solution), apply_solution(f->body, solution), f->site},
                     t->span, t->alias);
  if (auto r = as<types::Rec>(t))
    return make_type(types::Rec{r->var, solved(r->kind, solution), apply_solution(r->body, solution), r->site},
                     t->span, t->alias);
  return map_children(t, [&](const TypeRef& c) { return apply_solution(c, solution); });
}

ExprRef apply_solution(const ExprRef& e, const Solution& s) {
  auto ty = [&](const TypeRef& t) { return apply_solution(t, s); };
  auto ex = [&](const ExprRef& x) { return apply_solution(x, s); };
  auto branches = [&](const LabelMap<Branch>& bs) {
    LabelMap<Branch> out;
    for (const auto& [l, b] : bs) out.insert(l, Branch{b.binder, ex(b.body)});
    return out;
  };
  Expr::Node node = std::visit(
      [&](const auto& n) -> Expr::Node {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, exprs::Abs>) {
          return exprs::Abs{n.mult, n.param, ty(n.param_type), ex(n.body)};
        } else if constexpr (std::is_same_v<T, exprs::TAbs>) {
          return exprs::TAbs{n.var, solved(n.kind, s), ex(n.body), n.site};
        } else if constexpr (std::is_same_v<T, exprs::App>) {
          return exprs::App{ex(n.fun), ex(n.arg)};
        } else if constexpr (std::is_same_v<T, exprs::TApp>) {
          return exprs::TApp{ex(n.fun), ty(n.arg)};
        } else if constexpr (std::is_same_v<T, exprs::RecordLit>) {
          LabelMap<ExprRef> fs;
          for (const auto& [l, v] : n.fields) fs.insert(l, ex(v));
          return exprs::RecordLit{std::move(fs)};
        } else if constexpr (std::is_same_v<T, exprs::LetRecord>) {
          return exprs::LetRecord{n.binders, ex(n.scrutinee), ex(n.body)};
        } else if constexpr (std::is_same_v<T, exprs::LetUnit>) {
          return exprs::LetUnit{ex(n.scrutinee), ex(n.body)};
        } else if constexpr (std::is_same_v<T, exprs::Inject>) {
          return exprs::Inject{n.label, ty(n.ascription), ex(n.payload)};
        } else if constexpr (std::is_same_v<T, exprs::Case>) {
          return exprs::Case{ex(n.scrutinee), branches(n.branches)};
        } else if constexpr (std::is_same_v<T, exprs::Match>) {
          return exprs::Match{ex(n.scrutinee), branches(n.branches)};
        } else if constexpr (std::is_same_v<T, exprs::New>) {
          return exprs::New{ty(n.channel)};
        } else if constexpr (std::is_same_v<T, exprs::Select>) {
          return exprs::Select{n.label, ex(n.scrutinee)};
        } else {
          return n;
        }
      },
      e->node);
  return make_expr(std::move(node), e->span);
}

}  // namespace kindforge
