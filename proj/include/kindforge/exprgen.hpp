#ifndef KINDFORGE_EXPRGEN_HPP
#define KINDFORGE_EXPRGEN_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kindforge/kindgen.hpp"
#include "kindforge/syntax.hpp"

namespace kindforge {

// Typing context: term variable -> type.
using TypeCtx = std::map<std::string, TypeRef>;

// Usage context: the variables an expression consumed, with the kinds of
// their types. At most one entry per variable; insertion order is kept.
class UsageCtx {
 public:
  UsageCtx() = default;
  UsageCtx(std::initializer_list<std::pair<std::string, Kind>> entries);

  // Keeps the existing entry if `name` is already present.
  void insert(const std::string& name, Kind kind);
  void erase(const std::string& name);
  bool contains(const std::string& name) const;
  std::optional<Kind> find(const std::string& name) const;

  // Left-biased union.
  UsageCtx united(const UsageCtx& other) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::vector<std::pair<std::string, Kind>> entries_;
};

// Closed, fully kind-annotated type schemes of the builtin constants.
using BuiltinTable = std::map<Builtin, TypeRef>;

// send    : forall a:1T . forall b:1S . a -> !a;b 1-> b
// receive : forall a:1T . forall b:1S . ?a;b -> (a, b)
// close   : End -> ()
// fork    : (() 1-> ()) -> ()
const BuiltinTable& default_builtins();

// {} when x is used in `usage`, else {kind <: *T}.
ConstraintSet weaken(const std::string& x, Kind kind, const UsageCtx& usage, Origin origin = {"Weaken", {}});

// {k <: *T | x:k in u1 and x in u2}, kinds taken from u1.
ConstraintSet merge(const UsageCtx& u1, const UsageCtx& u2, Origin origin = {"Merge", {}});

struct ExprResult {
  TypeRef type;
  ConstraintSet constraints;
  UsageCtx usage;
};

// Type synthesis for Church-style expressions, emitting kind constraints and
// the usage context.
ExprResult gen_expr(const KindCtx& kinds, const TypeCtx& types, const ExprRef& e, const BuiltinTable& builtins,
                    FreshSupply& supply);

// Number of nodes of an expression, including the types it mentions.
std::size_t node_count(const ExprRef& e);

}  // namespace kindforge

#endif  // KINDFORGE_EXPRGEN_HPP
