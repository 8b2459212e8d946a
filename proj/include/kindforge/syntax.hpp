#ifndef KINDFORGE_SYNTAX_HPP
#define KINDFORGE_SYNTAX_HPP

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "kindforge/error.hpp"

namespace kindforge {

// Kinds and multiplicities -----------------------------------------------------

class Multiplicity {
 public:
  enum class Tag : std::uint8_t { Un, Lin, Var };

  // Lin, the top.
  constexpr Multiplicity() : Multiplicity(Tag::Lin, 0) {}

  static constexpr Multiplicity un() { return Multiplicity(Tag::Un, 0); }
  static constexpr Multiplicity lin() { return Multiplicity(Tag::Lin, 0); }
  static constexpr Multiplicity var(std::uint32_t id) { return Multiplicity(Tag::Var, id); }

  constexpr Tag tag() const { return tag_; }
  constexpr bool is_var() const { return tag_ == Tag::Var; }
  constexpr std::uint32_t var_id() const { return id_; }

  friend constexpr bool operator==(Multiplicity, Multiplicity) = default;
  friend constexpr auto operator<=>(Multiplicity, Multiplicity) = default;

 private:
  constexpr Multiplicity(Tag tag, std::uint32_t id) : tag_(tag), id_(id) {}

  Tag tag_;
  std::uint32_t id_;
};

enum class Prekind : std::uint8_t { S, T };

// Either a multiplicity paired with a prekind, or a kind variable.
class Kind {
 public:
  // The top kind, 1T.
  constexpr Kind() : Kind(false, Multiplicity::lin(), Prekind::T, 0) {}

  static constexpr Kind concrete(Multiplicity mult, Prekind pre) { return Kind(false, mult, pre, 0); }
  static constexpr Kind var(std::uint32_t id) { return Kind(true, Multiplicity::un(), Prekind::S, id); }

  static constexpr Kind su() { return concrete(Multiplicity::un(), Prekind::S); }
  static constexpr Kind sl() { return concrete(Multiplicity::lin(), Prekind::S); }
  static constexpr Kind tu() { return concrete(Multiplicity::un(), Prekind::T); }
  static constexpr Kind tl() { return concrete(Multiplicity::lin(), Prekind::T); }

  constexpr bool is_var() const { return is_var_; }
  constexpr std::uint32_t var_id() const { return var_id_; }
  // Only meaningful when !is_var().
  constexpr Multiplicity mult() const { return mult_; }
  constexpr Prekind prekind() const { return pre_; }

  // No kind variable and no multiplicity variable.
  constexpr bool is_ground() const { return !is_var_ && !mult_.is_var(); }

  friend constexpr bool operator==(const Kind&, const Kind&) = default;
  friend constexpr auto operator<=>(const Kind&, const Kind&) = default;

 private:
  constexpr Kind(bool is_var, Multiplicity mult, Prekind pre, std::uint32_t id)
      : is_var_(is_var), mult_(mult), pre_(pre), var_id_(id) {}

  bool is_var_;
  Multiplicity mult_;
  Prekind pre_;
  std::uint32_t var_id_;
};

// The four ground kinds in a fixed order: *S, 1S, *T, 1T.
inline constexpr Kind kGroundKinds[] = {Kind::su(), Kind::sl(), Kind::tu(), Kind::tl()};

// Source-ordered label map; duplicate labels are rejected on insertion.
template <typename T>
class LabelMap {
 public:
  using Entry = std::pair<std::string, T>;

  LabelMap() = default;
  LabelMap(std::initializer_list<Entry> entries) {
    for (const auto& e : entries) insert(e.first, e.second);
  }

  void insert(std::string label, T value, Span span = {}) {
    if (contains(label))
      throw Error(ErrorCode::DuplicateLabel, span, "duplicate label '" + label + "'");
    entries_.emplace_back(std::move(label), std::move(value));
  }

  bool contains(const std::string& label) const { return find(label) != nullptr; }

  const T* find(const std::string& label) const {
    for (const auto& [l, v] : entries_)
      if (l == label) return &v;
    return nullptr;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::vector<Entry> entries_;
};

// Types ------------------------------------------------------------------------

enum class Polarity : std::uint8_t { Out, In };
enum class View : std::uint8_t { Internal, External };

struct Type;
using TypeRef = std::shared_ptr<const Type>;

namespace types {
struct Skip {};
struct End {};
// Opaque constants: Int, Bool, Char.
struct Base {
  std::string name;
};
struct Msg {
  Polarity polarity;
  TypeRef payload;
};
struct Choice {
  View view;
  LabelMap<TypeRef> branches;
};
struct Semi {
  TypeRef head;
  TypeRef tail;
};
struct Unit {
  Multiplicity mult;
};
struct Arrow {
  Multiplicity mult;
  TypeRef dom;
  TypeRef cod;
};
struct Record {
  LabelMap<TypeRef> fields;
};
struct Variant {
  LabelMap<TypeRef> fields;
};
// `site` indexes Program::sites, or -1 for binders that are not annotation sites.
struct Forall {
  std::string var;
  Kind kind;
  TypeRef body;
  int site = -1;
};
struct Rec {
  std::string var;
  Kind kind;
  TypeRef body;
  int site = -1;
};
struct Var {
  std::string name;
};
}  // namespace types

struct Type {
  using Node = std::variant<types::Skip, types::End, types::Base, types::Msg, types::Choice,
                            types::Semi, types::Unit, types::Arrow, types::Record,
                            types::Variant, types::Forall, types::Rec, types::Var>;
  Node node;
  Span span;
  // Name of the type abbreviation this subtree was expanded from, if any.
  std::string alias;
};

TypeRef make_type(Type::Node node, Span span = {}, std::string alias = {});

template <typename T>
const T* as(const TypeRef& t) {
  return std::get_if<T>(&t->node);
}

// Expressions ------------------------------------------------------------------

enum class Builtin : std::uint8_t { Send, Receive, Close, Fork };

std::string_view to_string(Builtin b);
std::optional<Builtin> builtin_from_name(std::string_view name);

struct Expr;
using ExprRef = std::shared_ptr<const Expr>;

struct Branch {
  std::string binder;
  ExprRef body;
};

namespace exprs {
struct UnitLit {};
struct IntLit {
  long long value;
};
struct BoolLit {
  bool value;
};
struct Var {
  std::string name;
};
struct Const {
  Builtin which;
};
struct Abs {
  Multiplicity mult;
  std::string param;
  TypeRef param_type;
  ExprRef body;
};
struct TAbs {
  std::string var;
  Kind kind;
  ExprRef body;
  int site = -1;
};
struct App {
  ExprRef fun;
  ExprRef arg;
};
struct TApp {
  ExprRef fun;
  TypeRef arg;
};
struct RecordLit {
  LabelMap<ExprRef> fields;
};
struct LetRecord {
  LabelMap<std::string> binders;
  ExprRef scrutinee;
  ExprRef body;
};
struct LetUnit {
  ExprRef scrutinee;
  ExprRef body;
};
struct Inject {
  std::string label;
  TypeRef ascription;
  ExprRef payload;
};
struct Case {
  ExprRef scrutinee;
  LabelMap<Branch> branches;
};
struct Match {
  ExprRef scrutinee;
  LabelMap<Branch> branches;
};
struct New {
  TypeRef channel;
};
struct Select {
  std::string label;
  ExprRef scrutinee;
};
}  // namespace exprs

struct Expr {
  using Node = std::variant<exprs::UnitLit, exprs::IntLit, exprs::BoolLit, exprs::Var,
                            exprs::Const, exprs::Abs, exprs::TAbs, exprs::App, exprs::TApp,
                            exprs::RecordLit, exprs::LetRecord, exprs::LetUnit, exprs::Inject,
                            exprs::Case, exprs::Match, exprs::New, exprs::Select>;
  Node node;
  Span span;
};

ExprRef make_expr(Expr::Node node, Span span = {});

template <typename T>
const T* as(const ExprRef& e) {
  return std::get_if<T>(&e->node);
}

// Syntactic values: the only admissible bodies of type abstractions.
bool is_value(const ExprRef& e);

// Constraints ------------------------------------------------------------------

struct Origin {
  std::string rule;
  Span span;
};

struct SubConstraint {
  Kind lhs;
  Kind rhs;
};

// var = lub(mult(args[0]), ..., mult(args[n-1])), n >= 1
struct MultEquation {
  std::uint32_t var;
  std::vector<Kind> args;
};

class Constraint {
 public:
  static Constraint sub(Kind lhs, Kind rhs, Origin origin = {});
  static Constraint mult_eq(Multiplicity lhs, std::vector<Kind> args, Origin origin = {});

  bool is_sub() const { return std::holds_alternative<SubConstraint>(body_); }
  const SubConstraint& as_sub() const { return std::get<SubConstraint>(body_); }
  const MultEquation& as_mult_eq() const { return std::get<MultEquation>(body_); }
  const Origin& origin() const { return origin_; }

  // Equality ignores provenance.
  friend bool operator==(const Constraint& a, const Constraint& b);

 private:
  Constraint(std::variant<SubConstraint, MultEquation> body, Origin origin)
      : body_(std::move(body)), origin_(std::move(origin)) {}

  std::variant<SubConstraint, MultEquation> body_;
  Origin origin_;
};

// Constraints in emission order, without repeats.
class ConstraintSet {
 public:
  void add(Constraint c);
  void append(const ConstraintSet& other);

  const std::vector<Constraint>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

 private:
  std::vector<Constraint> items_;
  std::unordered_set<std::string> seen_;
};

// Per-task supply of kind and multiplicity variables.
class FreshSupply {
 public:
  explicit FreshSupply(std::uint32_t next_kvar = 0, std::uint32_t next_mvar = 0)
      : next_kvar_(next_kvar), next_mvar_(next_mvar) {}

  Kind fresh_kind() { return Kind::var(next_kvar_++); }
  Multiplicity fresh_mult() { return Multiplicity::var(next_mvar_++); }

  // Makes sure ids already present in the input are never handed out.
  void reserve_kvar(std::uint32_t id);
  void reserve_mvar(std::uint32_t id);

  std::uint32_t next_kvar() const { return next_kvar_; }
  std::uint32_t next_mvar() const { return next_mvar_; }

 private:
  std::uint32_t next_kvar_;
  std::uint32_t next_mvar_;
};

// Pretty-printing ----------------------------------------------------------------

std::string pretty(Multiplicity m);
std::string pretty(Kind k);
std::string pretty(const Constraint& c);

struct PrettyOptions {
  // Print subtrees expanded from an abbreviation by the abbreviation's name.
  bool use_aliases = false;
};

std::string pretty(const TypeRef& t, PrettyOptions opts = {});
std::string pretty(const ExprRef& e, PrettyOptions opts = {});

// Structural equality ignoring spans, aliases and site indices.
bool same_structure(const TypeRef& a, const TypeRef& b);
bool same_structure(const ExprRef& a, const ExprRef& b);

}  // namespace kindforge

#endif  // KINDFORGE_SYNTAX_HPP
