#pragma once

#include <set>
#include <string>
#include <string_view>

#include "formula.hpp"

namespace stldec {

/// Parses the concrete grammar
///   formula := term ("and" term)*
///   term    := ("G"|"F") "[" number "," number "]" atom
///            | atom "U" "[" number "," number "]" atom
///   atom    := ["not"] identifier | "true"
/// Positions in error messages are 1-based line:column.
StlFormula::Ptr parse_formula(std::string_view text);

/// Same, but every referenced predicate name must be present in `known`.
StlFormula::Ptr parse_formula(std::string_view text,
                              const std::set<std::string>& known);

}  // namespace stldec
