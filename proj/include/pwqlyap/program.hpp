#pragma once

#include <string>
#include <vector>

#include "pwqlyap/feas.hpp"
#include "pwqlyap/model.hpp"
#include "pwqlyap/sdp_solver.hpp"

namespace pwqlyap {

enum class VarKind { alpha, beta, P, q, W, U, Z };

// One scalar decision variable. Symmetric matrix variables contribute one
// scalar per upper-triangular entry (row <= col).
struct Variable {
  VarKind kind;
  int cell = -1;    // owning cell (P, q, W, Z) or source cell (U)
  int target = -1;  // destination cell (U only)
  int row = 0;
  int col = 0;
  bool nonnegative = false;

  std::string name() const;
};

enum class BlockKind { boundedness, init, invariance };

const char* to_string(BlockKind k);

struct LmiTerm {
  int var;
  Matrix coeff;  // symmetric
};

/// Affine symmetric matrix expression constant + sum_v y_v coeff_v that must
/// be positive semidefinite. The margin is not folded into `constant`.
struct LmiBlock {
  BlockKind kind;
  int cell = -1;
  int target = -1;
  Matrix constant;
  std::vector<LmiTerm> terms;
  // Multiplier (W, Z or U) owned by this block and the E matrix it acts on.
  int first_multiplier = -1;
  int multiplier_size = 0;
  QuadMatrix quad;

  std::string label() const;
  Matrix evaluate(const Vector& y) const;
};

/// Decision variables and LMI blocks of the invariant-synthesis SDP:
/// minimize alpha + beta subject to every block minus margin * Id being PSD
/// and every multiplier entry nonnegative.
class ConicProgram {
 public:
  ConicProgram(int d, int m, std::size_t cells, double margin);

  int d() const { return d_; }
  int m() const { return m_; }
  int n() const { return d_ + m_; }
  std::size_t cells() const { return P_.size(); }
  double margin() const { return margin_; }

  int alpha() const { return alpha_; }
  int beta() const { return beta_; }
  int P_var(std::size_t cell, int r, int c) const;
  int q_var(std::size_t cell, int r) const;

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<LmiBlock>& blocks() const { return blocks_; }
  std::size_t num_vars() const { return vars_.size(); }
  Vector objective() const;

  // Block value at y; with_margin subtracts margin * Id as the solver sees it.
  Matrix evaluate(std::size_t block, const Vector& y, bool with_margin) const;

  Matrix P_value(const Vector& y, std::size_t cell) const;
  Vector q_value(const Vector& y, std::size_t cell) const;
  Matrix multiplier_value(const Vector& y, std::size_t block) const;

  // [[a, q'], [q, P]] as an LMI expression: P, q terms plus `alpha_coeff` on
  // the top-left corner through the alpha variable.
  std::vector<LmiTerm> level_form(std::size_t cell, double alpha_coeff) const;

  int add_multiplier(VarKind kind, int cell, int target, int size);
  std::size_t add_block(LmiBlock block);

  SdpData to_sdp_data() const;

 private:
  int d_;
  int m_;
  double margin_;
  int alpha_ = -1;
  int beta_ = -1;
  std::vector<std::vector<int>> P_;  // n*n lookup, symmetric
  std::vector<std::vector<int>> q_;
  std::vector<Variable> vars_;
  std::vector<LmiBlock> blocks_;
};

/// -F_i' [[0, q_j'], [q_j, P_j]] F_i + [[0, q_i'], [q_i, P_i]] - E_ij' U_ij E_ij
std::size_t assemble_invariance_block(ConicProgram& prog,
                                      const PwaSystem& system, std::size_t i,
                                      std::size_t j);

/// -[[-alpha, q_i'], [q_i, P_i]] - E_0i' Z_i E_0i
std::size_t assemble_init_block(ConicProgram& prog, const PwaSystem& system,
                                std::size_t i);

/// -E_i' W_i E_i + [[-alpha, q_i'], [q_i, P_i]] + [[beta, 0], [0, -Id]]
std::size_t assemble_boundedness_block(ConicProgram& prog,
                                       const PwaSystem& system, std::size_t i);

/// Blocks in canonical order: boundedness blocks by cell, init blocks by cell
/// (only where X0 meets the cell), then invariance blocks for the fireable
/// pairs in lexicographic order. Variables: alpha, beta, per-cell P and q,
/// then each block's multiplier entries in block order.
ConicProgram assemble_program(const PwaSystem& system, const SwitchGraph& graph,
                              const std::vector<bool>& init_meets,
                              double margin = 1e-7);

/// Convenience overload running the init/cell intersection LPs itself.
ConicProgram assemble_program(const PwaSystem& system, const SwitchGraph& graph,
                              double margin = 1e-7);

}  // namespace pwqlyap
