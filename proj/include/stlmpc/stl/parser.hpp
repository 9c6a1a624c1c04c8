// Recursive-descent parser for the STL formula text grammar:
//
//   formula := term (("and" | "or") term)*
//   term    := "not" term
//            | ("G" | "F") "[" num "," num "]" "(" formula ")"
//            | "(" formula ")"
//            | atom
//   atom    := linexpr (">=" | "<=") num | "true"
//   linexpr := ["+"|"-"] part (("+" | "-") part)*
//   part    := num "*" ident | num | ident
//
// "and"/"or" chains associate to the left at equal precedence.
// "<=" atoms are normalized to ">= 0" form by negation. Unknown
// dimension names are not checked here (evaluation-time concern).

#pragma once

#include <stdexcept>
#include <string>

#include "stlmpc/stl/ast.hpp"

namespace stlmpc {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t pos, const std::string& msg)
      : std::runtime_error("parse error at position " + std::to_string(pos) +
                           ": " + msg),
        pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

FormulaPtr parse_formula(const std::string& text);

}  // namespace stlmpc
