#ifndef KINDFORGE_KINDGEN_HPP
#define KINDFORGE_KINDGEN_HPP

#include <map>
#include <string>

#include "kindforge/syntax.hpp"

namespace kindforge {

// Kinding context: type variable -> kind.
using KindCtx = std::map<std::string, Kind>;

struct TypeKinding {
  Kind kind;
  ConstraintSet constraints;
};

// Constraint generation from types. Fresh multiplicity variables are drawn in
// pre-order. Throws UnboundTypeVariable for type variables missing from `ctx`.
TypeKinding gen_type(const KindCtx& ctx, const TypeRef& type, FreshSupply& supply);

// Same, appending to `out`.
Kind gen_type(const KindCtx& ctx, const TypeRef& type, FreshSupply& supply, ConstraintSet& out);

// Number of nodes of a type, counting each label entry as a node.
std::size_t node_count(const TypeRef& type);

}  // namespace kindforge

#endif  // KINDFORGE_KINDGEN_HPP
