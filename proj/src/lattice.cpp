#include "kindforge/lattice.hpp"

#include <fmt/format.h>

namespace kindforge::lattice {

namespace {

void require_ground(Kind k) {
  if (!k.is_ground())
    throw Error(ErrorCode::UnresolvedVariable, {}, fmt::format("expected a ground kind, got {}", pretty(k)));
}

void require_ground(Multiplicity m) {
  if (m.is_var())
    throw Error(ErrorCode::UnresolvedVariable, {}, fmt::format("expected un or lin, got {}", pretty(m)));
}

Prekind prekind_meet(Prekind a, Prekind b) { return a == Prekind::T && b == Prekind::T ? Prekind::T : Prekind::S; }
Prekind prekind_join(Prekind a, Prekind b) { return a == Prekind::S && b == Prekind::S ? Prekind::S : Prekind::T; }

}  // namespace

bool mult_le(Multiplicity a, Multiplicity b) {
  require_ground(a);
  require_ground(b);
  return a == Multiplicity::un() || b == Multiplicity::lin();
}

bool prekind_le(Prekind a, Prekind b) { return a == Prekind::S || b == Prekind::T; }

bool subkind(Kind a, Kind b) {
  require_ground(a);
  require_ground(b);
  return mult_le(a.mult(), b.mult()) && prekind_le(a.prekind(), b.prekind());
}

Multiplicity mult_glb(Multiplicity a, Multiplicity b) { return mult_le(a, b) ? a : b; }

Kind glb(Kind a, Kind b) {
  require_ground(a);
  require_ground(b);
  return Kind::concrete(mult_glb(a.mult(), b.mult()), prekind_meet(a.prekind(), b.prekind()));
}

Kind lub(Kind a, Kind b) {
  require_ground(a);
  require_ground(b);
  Multiplicity m = mult_le(a.mult(), b.mult()) ? b.mult() : a.mult();
  return Kind::concrete(m, prekind_join(a.prekind(), b.prekind()));
}

Multiplicity mult_lub(std::span<const Multiplicity> ms) {
  if (ms.empty()) throw Error(ErrorCode::InvalidConstraint, {}, "lub of an empty multiplicity sequence");
  Multiplicity out = Multiplicity::un();
  for (Multiplicity m : ms) {
    require_ground(m);
    if (m == Multiplicity::lin()) out = m;
  }
  return out;
}

Multiplicity mult_of(Kind k, const Solution* solution) {
  if (k.is_var()) {
    if (!solution)
      throw Error(ErrorCode::UnresolvedVariable, {}, fmt::format("mult({}) needs a solution", pretty(k)));
    auto it = solution->kind_vars.find(k.var_id());
    if (it == solution->kind_vars.end())
      throw Error(ErrorCode::UnresolvedVariable, {}, fmt::format("no assignment for {}", pretty(k)));
    return mult_of(it->second, nullptr);
  }
  if (k.mult().is_var()) {
    if (!solution)
      throw Error(ErrorCode::UnresolvedVariable, {}, fmt::format("mult({}) needs a solution", pretty(k)));
    auto it = solution->mult_vars.find(k.mult().var_id());
    if (it == solution->mult_vars.end())
      throw Error(ErrorCode::UnresolvedVariable, {}, fmt::format("no assignment for {}", pretty(k.mult())));
    return it->second;
  }
  return k.mult();
}

}  // namespace kindforge::lattice
