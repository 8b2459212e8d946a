#ifndef KINDFORGE_SOLUTION_HPP
#define KINDFORGE_SOLUTION_HPP

#include <cstdint>
#include <map>

#include "kindforge/syntax.hpp"

namespace kindforge {

// Assignment of ground kinds to kind variables and un/lin to multiplicity variables.
struct Solution {
  std::map<std::uint32_t, Kind> kind_vars;
  std::map<std::uint32_t, Multiplicity> mult_vars;

  friend bool operator==(const Solution&, const Solution&) = default;
};

}  // namespace kindforge

#endif  // KINDFORGE_SOLUTION_HPP
