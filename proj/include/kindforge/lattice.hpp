#ifndef KINDFORGE_LATTICE_HPP
#define KINDFORGE_LATTICE_HPP

#include <span>

#include "kindforge/solution.hpp"
#include "kindforge/syntax.hpp"

// The four ground kinds ordered as the product of un <= lin and S <= T:
//
//   *S <= *T <= 1T
//   *S <= 1S <= 1T
namespace kindforge::lattice {

bool mult_le(Multiplicity a, Multiplicity b);
bool prekind_le(Prekind a, Prekind b);

// Arguments must be ground.
bool subkind(Kind a, Kind b);
Kind glb(Kind a, Kind b);
Kind lub(Kind a, Kind b);

Multiplicity mult_glb(Multiplicity a, Multiplicity b);
// Lin if any element is lin. The sequence must be non-empty and ground.
Multiplicity mult_lub(std::span<const Multiplicity> ms);

// mult(m v) = m; variables are looked up in `solution`, which is then required.
// Throws UnresolvedVariable when a variable has no assignment.
Multiplicity mult_of(Kind k, const Solution* solution = nullptr);

}  // namespace kindforge::lattice

#endif  // KINDFORGE_LATTICE_HPP
