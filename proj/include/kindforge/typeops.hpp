#ifndef KINDFORGE_TYPEOPS_HPP
#define KINDFORGE_TYPEOPS_HPP

#include <set>
#include <string>

#include "kindforge/solution.hpp"
#include "kindforge/syntax.hpp"

namespace kindforge {

std::set<std::string> free_type_vars(const TypeRef& t);

// Capture-avoiding t[replacement/var]. A binder that would capture a free
// variable of `replacement` is renamed by appending primes.
TypeRef substitute(const TypeRef& t, const std::string& var, const TypeRef& replacement);

// Session-type duality: flips message polarities and choice views, distributes
// over sequencing and recursion. Free type variables and non-session
// constructors raise NotASessionType.
TypeRef dual(const TypeRef& t);

// Weak head normal form: unfolds recursion at the head and re-associates
// sequential composition (Skip;T = T, (T;U);V = T;(U;V), +{l: T};U = +{l: T;U},
// T;Skip = T).
TypeRef whnf(const TypeRef& t);

// Type equivalence used by the typing rules: structural up to bound-variable
// renaming, the monoid laws of `;`, and unfolding of recursive types.
// Kinds on binders are ignored.
bool equivalent(const TypeRef& a, const TypeRef& b);

// Replaces solved kind variables in binder annotations by their values.
TypeRef apply_solution(const TypeRef& t, const Solution& solution);
ExprRef apply_solution(const ExprRef& e, const Solution& solution);

}  // namespace kindforge

#endif  // KINDFORGE_TYPEOPS_HPP
