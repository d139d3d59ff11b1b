#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwqlyap/model.hpp"

namespace pwqlyap {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Expression tree. Variables are slot indices: state variables first, then
// inputs, then temporaries (such as ox = x aliases).
struct Expr {
  enum class Kind { number, variable, neg, add, sub, mul };
  Kind kind = Kind::number;
  double value = 0.0;
  int slot = -1;
  std::unique_ptr<Expr> lhs;
  std::unique_ptr<Expr> rhs;
};

struct Stmt;
using Block = std::vector<Stmt>;

// Guard lhs < rhs (strict) or lhs <= rhs (weak) after normalization.
struct Guard {
  std::unique_ptr<Expr> lhs;
  std::unique_ptr<Expr> rhs;
  bool strict = true;
};

struct Stmt {
  enum class Kind { assign, input, branch };
  Kind kind = Kind::assign;
  int line = 0;
  int column = 0;
  int slot = -1;               // assign, input
  std::unique_ptr<Expr> expr;  // assign
  Guard guard;                 // branch
  Block then_block;
  Block else_block;
};

struct InputVar {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
};

struct LoopProgram {
  std::vector<std::string> state_vars;
  std::vector<double> init_lo;
  std::vector<double> init_hi;
  std::vector<InputVar> inputs;
  std::vector<std::string> temporaries;
  Block body;

  int d() const { return static_cast<int>(state_vars.size()); }
  int m() const { return static_cast<int>(inputs.size()); }
  int leaves() const;
};

/// Grammar:
///   program := decl* "while" "(" "true" ")" block
///   decl    := ident "in" "[" num "," num "]" ";"
///   block   := "{" stmt* "}"
///   stmt    := ident "=" affine ";" | ident "=" "input" "(" num "," num ")" ";"
///            | "if" "(" affine cmp affine ")" block ("else" block)?
/// cmp is one of < <= > >=; '>' and '>=' are flipped at parse time. Affine
/// expressions combine identifiers and numbers with + - and products where
/// one side is constant. Comments run from "//" or "#" to end of line.
LoopProgram parse_program(const std::string& text);

/// One iteration by direct evaluation of the tree.
Vector interpret(const LoopProgram& program, const Vector& x, const Vector& u);

/// One cell per leaf. A then-branch of `e < c` adds the strict row e < c, the
/// else-branch the weak row -e <= -c (reversed for `<=` guards). Input
/// ranges are appended as weak rows to every cell and form U; X0 is the init
/// box crossed with U.
PwaSystem to_pwa(const LoopProgram& program);

}  // namespace pwqlyap
