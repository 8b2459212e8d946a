#include "kindforge/syntax.hpp"

#include <algorithm>

namespace kindforge {

TypeRef make_type(Type::Node node, Span span, std::string alias) {
  return std::make_shared<const Type>(Type{std::move(node), span, std::move(alias)});
}

ExprRef make_expr(Expr::Node node, Span span) {
  return std::make_shared<const Expr>(Expr{std::move(node), span});
}

std::string_view to_string(Builtin b) {
  switch (b) {
    case Builtin::Send: return "send";
    case Builtin::Receive: return "receive";
    case Builtin::Close: return "close";
    case Builtin::Fork: return "fork";
  }
  return "?";
}

std::optional<Builtin> builtin_from_name(std::string_view name) {
  if (name == "send") return Builtin::Send;
  if (name == "receive") return Builtin::Receive;
  if (name == "close") return Builtin::Close;
  if (name == "fork") return Builtin::Fork;
  return std::nullopt;
}

bool is_value(const ExprRef& e) {
  if (as<exprs::Abs>(e) || as<exprs::TAbs>(e) || as<exprs::UnitLit>(e) || as<exprs::IntLit>(e) ||
      as<exprs::BoolLit>(e) || as<exprs::Var>(e) || as<exprs::Const>(e))
    return true;
  if (auto r = as<exprs::RecordLit>(e))
    return std::all_of(r->fields.begin(), r->fields.end(),
                       [](const auto& f) { return is_value(f.second); });
  if (auto i = as<exprs::Inject>(e)) return is_value(i->payload);
  return false;
}

// Constraints ------------------------------------------------------------------

Constraint Constraint::sub(Kind lhs, Kind rhs, Origin origin) {
  return Constraint(SubConstraint{lhs, rhs}, std::move(origin));
}

Constraint Constraint::mult_eq(Multiplicity lhs, std::vector<Kind> args, Origin origin) {
  if (!lhs.is_var())
    throw Error(ErrorCode::InvalidConstraint, origin.span,
                "left-hand side of a multiplicity equation must be a variable");
  if (args.empty())
    throw Error(ErrorCode::InvalidConstraint, origin.span,
                "multiplicity equation needs at least one argument");
  return Constraint(MultEquation{lhs.var_id(), std::move(args)}, std::move(origin));
}

bool operator==(const Constraint& a, const Constraint& b) {
  if (a.is_sub() != b.is_sub()) return false;
  if (a.is_sub()) return a.as_sub().lhs == b.as_sub().lhs && a.as_sub().rhs == b.as_sub().rhs;
  return a.as_mult_eq().var == b.as_mult_eq().var && a.as_mult_eq().args == b.as_mult_eq().args;
}

void ConstraintSet::add(Constraint c) {
  if (!seen_.insert(pretty(c)).second) return;
  items_.push_back(std::move(c));
}

void ConstraintSet::append(const ConstraintSet& other) {
  for (const auto& c : other) add(c);
}

void FreshSupply::reserve_kvar(std::uint32_t id) { next_kvar_ = std::max(next_kvar_, id + 1); }
void FreshSupply::reserve_mvar(std::uint32_t id) { next_mvar_ = std::max(next_mvar_, id + 1); }

// Structural equality ----------------------------------------------------------

namespace {

template <typename T, typename Eq>
bool same_labels(const LabelMap<T>& a, const LabelMap<T>& b, Eq eq) {
  if (a.size() != b.size()) return false;
  return std::equal(a.begin(), a.end(), b.begin(),
                    [&](const auto& x, const auto& y) { return x.first == y.first && eq(x.second, y.second); });
}

struct TypeEq {
  bool operator()(const TypeRef& a, const TypeRef& b) const { return same_structure(a, b); }
};

}  // namespace

bool same_structure(const TypeRef& a, const TypeRef& b) {
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b->node);
        if constexpr (std::is_same_v<T, types::Skip> || std::is_same_v<T, types::End>) {
          return true;
        } else if constexpr (std::is_same_v<T, types::Base> || std::is_same_v<T, types::Var>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, types::Msg>) {
          return x.polarity == y.polarity && same_structure(x.payload, y.payload);
        } else if constexpr (std::is_same_v<T, types::Choice>) {
          return x.view == y.view && same_labels(x.branches, y.branches, TypeEq{});
        } else if constexpr (std::is_same_v<T, types::Semi>) {
          return same_structure(x.head, y.head) && same_structure(x.tail, y.tail);
        } else if constexpr (std::is_same_v<T, types::Unit>) {
          return x.mult == y.mult;
        } else if constexpr (std::is_same_v<T, types::Arrow>) {
          return x.mult == y.mult && same_structure(x.dom, y.dom) && same_structure(x.cod, y.cod);
        } else if constexpr (std::is_same_v<T, types::Record> || std::is_same_v<T, types::Variant>) {
          return same_labels(x.fields, y.fields, TypeEq{});
        } else {  // Forall, Rec
          return x.var == y.var && x.kind == y.kind && same_structure(x.body, y.body);
        }
      },
      a->node);
}

bool same_structure(const ExprRef& a, const ExprRef& b) {
  if (a->node.index() != b->node.index()) return false;
  auto branches_eq = [](const Branch& x, const Branch& y) {
    return x.binder == y.binder && same_structure(x.body, y.body);
  };
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b->node);
        if constexpr (std::is_same_v<T, exprs::UnitLit>) {
          return true;
        } else if constexpr (std::is_same_v<T, exprs::IntLit> || std::is_same_v<T, exprs::BoolLit>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, exprs::Var>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, exprs::Const>) {
          return x.which == y.which;
        } else if constexpr (std::is_same_v<T, exprs::Abs>) {
          return x.mult == y.mult && x.param == y.param && same_structure(x.param_type, y.param_type) &&
                 same_structure(x.body, y.body);
        } else if constexpr (std::is_same_v<T, exprs::TAbs>) {
          return x.var == y.var && x.kind == y.kind && same_structure(x.body, y.body);
        } else if constexpr (std::is_same_v<T, exprs::App>) {
          return same_structure(x.fun, y.fun) && same_structure(x.arg, y.arg);
        } else if constexpr (std::is_same_v<T, exprs::TApp>) {
          return same_structure(x.fun, y.fun) && same_structure(x.arg, y.arg);
        } else if constexpr (std::is_same_v<T, exprs::RecordLit>) {
          return same_labels(x.fields, y.fields,
                             [](const ExprRef& p, const ExprRef& q) { return same_structure(p, q); });
        } else if constexpr (std::is_same_v<T, exprs::LetRecord>) {
          return same_labels(x.binders, y.binders, std::equal_to<>{}) &&
                 same_structure(x.scrutinee, y.scrutinee) && same_structure(x.body, y.body);
        } else if constexpr (std::is_same_v<T, exprs::LetUnit>) {
          return same_structure(x.scrutinee, y.scrutinee) && same_structure(x.body, y.body);
        } else if constexpr (std::is_same_v<T, exprs::Inject>) {
          return x.label == y.label && same_structure(x.ascription, y.ascription) &&
                 same_structure(x.payload, y.payload);
        } else if constexpr (std::is_same_v<T, exprs::Case> || std::is_same_v<T, exprs::Match>) {
          return same_structure(x.scrutinee, y.scrutinee) && same_labels(x.branches, y.branches, branches_eq);
        } else if constexpr (std::is_same_v<T, exprs::New>) {
          return same_structure(x.channel, y.channel);
        } else {  // Select
          return x.label == y.label && same_structure(x.scrutinee, y.scrutinee);
        }
      },
      a->node);
}

}  // namespace kindforge
