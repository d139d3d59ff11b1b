#include "pwqlyap/program.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace pwqlyap {

namespace {

const char* kind_name(VarKind k) {
  switch (k) {
    case VarKind::alpha: return "alpha";
    case VarKind::beta: return "beta";
    case VarKind::P: return "P";
    case VarKind::q: return "q";
    case VarKind::W: return "W";
    case VarKind::U: return "U";
    case VarKind::Z: return "Z";
  }
  return "?";
}

Matrix unit_sym(int n, int r, int c) {
  Matrix S = Matrix::Zero(n, n);
  S(r, c) = 1.0;
  S(c, r) = 1.0;
  return S;
}

// Accumulates terms, merging repeated variables.
class TermSum {
 public:
  void add(int var, const Matrix& coeff) {
    auto it = index_.find(var);
    if (it == index_.end()) {
      index_.emplace(var, terms_.size());
      terms_.push_back({var, coeff});
    } else {
      terms_[it->second].coeff += coeff;
    }
  }
  std::vector<LmiTerm> take() { return std::move(terms_); }

 private:
  std::map<int, std::size_t> index_;
  std::vector<LmiTerm> terms_;
};

// Registers the multiplier for q.E and adds -E' M E to `sum`.
void add_multiplier_terms(ConicProgram& prog, LmiBlock& block, TermSum& sum,
                          VarKind kind, int cell, int target) {
  const Matrix& E = block.quad.E;
  const int r = static_cast<int>(E.rows());
  const int first = prog.add_multiplier(kind, cell, target, r);
  block.first_multiplier = first;
  block.multiplier_size = r;
  int v = first;
  for (int k = 0; k < r; ++k) {
    for (int l = k; l < r; ++l, ++v) {
      Matrix coeff = E.row(k).transpose() * E.row(l);
      if (k != l) coeff += coeff.transpose().eval();
      sum.add(v, -coeff);
    }
  }
}

}  // namespace

std::string Variable::name() const {
  std::ostringstream os;
  os << kind_name(kind);
  if (cell >= 0) os << '[' << cell;
  if (target >= 0) os << "->" << target;
  if (cell >= 0) os << ']';
  if (kind == VarKind::P || kind == VarKind::W || kind == VarKind::U ||
      kind == VarKind::Z) {
    os << '(' << row << ',' << col << ')';
  } else if (kind == VarKind::q) {
    os << '(' << row << ')';
  }
  return os.str();
}

const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::boundedness: return "boundedness";
    case BlockKind::init: return "init";
    case BlockKind::invariance: return "invariance";
  }
  return "?";
}

std::string LmiBlock::label() const {
  std::ostringstream os;
  os << to_string(kind) << '[' << cell;
  if (kind == BlockKind::invariance) os << "->" << target;
  os << ']';
  return os.str();
}

Matrix LmiBlock::evaluate(const Vector& y) const {
  Matrix out = constant;
  for (const auto& t : terms) out += y(t.var) * t.coeff;
  return out;
}

ConicProgram::ConicProgram(int d, int m, std::size_t cells, double margin)
    : d_(d), m_(m), margin_(margin) {
  if (margin < 0.0) throw ModelError("margin must be nonnegative");
  alpha_ = static_cast<int>(vars_.size());
  vars_.push_back({VarKind::alpha});
  beta_ = static_cast<int>(vars_.size());
  vars_.push_back({VarKind::beta});
  const int n = d + m;
  P_.assign(cells, std::vector<int>(static_cast<std::size_t>(n * n), -1));
  q_.assign(cells, std::vector<int>(static_cast<std::size_t>(n), -1));
  for (std::size_t i = 0; i < cells; ++i) {
    for (int r = 0; r < n; ++r) {
      for (int c = r; c < n; ++c) {
        const int v = static_cast<int>(vars_.size());
        vars_.push_back({VarKind::P, static_cast<int>(i), -1, r, c, false});
        P_[i][static_cast<std::size_t>(r * n + c)] = v;
        P_[i][static_cast<std::size_t>(c * n + r)] = v;
      }
    }
    for (int r = 0; r < n; ++r) {
      q_[i][static_cast<std::size_t>(r)] = static_cast<int>(vars_.size());
      vars_.push_back({VarKind::q, static_cast<int>(i), -1, r, 0, false});
    }
  }
}

int ConicProgram::P_var(std::size_t cell, int r, int c) const {
  return P_.at(cell).at(static_cast<std::size_t>(r * n() + c));
}

int ConicProgram::q_var(std::size_t cell, int r) const {
  return q_.at(cell).at(static_cast<std::size_t>(r));
}

Vector ConicProgram::objective() const {
  Vector c = Vector::Zero(static_cast<Eigen::Index>(vars_.size()));
  c(alpha_) = 1.0;
  c(beta_) = 1.0;
  return c;
}

Matrix ConicProgram::evaluate(std::size_t block, const Vector& y,
                              bool with_margin) const {
  Matrix out = blocks_.at(block).evaluate(y);
  if (with_margin) out.diagonal().array() -= margin_;
  return out;
}

Matrix ConicProgram::P_value(const Vector& y, std::size_t cell) const {
  const int n = this->n();
  Matrix P(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) P(r, c) = y(P_var(cell, r, c));
  }
  return P;
}

Vector ConicProgram::q_value(const Vector& y, std::size_t cell) const {
  Vector q(n());
  for (int r = 0; r < n(); ++r) q(r) = y(q_var(cell, r));
  return q;
}

Matrix ConicProgram::multiplier_value(const Vector& y,
                                      std::size_t block) const {
  const LmiBlock& b = blocks_.at(block);
  const int r = b.multiplier_size;
  Matrix M(r, r);
  int v = b.first_multiplier;
  for (int k = 0; k < r; ++k) {
    for (int l = k; l < r; ++l, ++v) {
      M(k, l) = y(v);
      M(l, k) = y(v);
    }
  }
  return M;
}

std::vector<LmiTerm> ConicProgram::level_form(std::size_t cell,
                                              double alpha_coeff) const {
  const int n = this->n();
  const int n1 = n + 1;
  std::vector<LmiTerm> terms;
  if (alpha_coeff != 0.0) {
    Matrix a = Matrix::Zero(n1, n1);
    a(0, 0) = alpha_coeff;
    terms.push_back({alpha_, a});
  }
  for (int r = 0; r < n; ++r) {
    for (int c = r; c < n; ++c) {
      Matrix S = Matrix::Zero(n1, n1);
      S(r + 1, c + 1) = 1.0;
      S(c + 1, r + 1) = 1.0;
      terms.push_back({P_var(cell, r, c), S});
    }
  }
  for (int r = 0; r < n; ++r) {
    terms.push_back({q_var(cell, r), unit_sym(n1, 0, r + 1)});
  }
  return terms;
}

int ConicProgram::add_multiplier(VarKind kind, int cell, int target,
                                 int size) {
  const int first = static_cast<int>(vars_.size());
  for (int k = 0; k < size; ++k) {
    for (int l = k; l < size; ++l) {
      vars_.push_back({kind, cell, target, k, l, true});
    }
  }
  return first;
}

std::size_t ConicProgram::add_block(LmiBlock block) {
  blocks_.push_back(std::move(block));
  return blocks_.size() - 1;
}

SdpData ConicProgram::to_sdp_data() const {
  SdpData data;
  data.num_vars = static_cast<int>(vars_.size());
  data.c = objective();
  for (const auto& b : blocks_) {
    SdpBlockData sb;
    sb.F0 = -b.constant;
    sb.F0.diagonal().array() += margin_;
    for (const auto& t : b.terms) sb.terms.emplace_back(t.var, t.coeff);
    data.blocks.push_back(std::move(sb));
  }
  for (std::size_t v = 0; v < vars_.size(); ++v) {
    if (vars_[v].nonnegative) {
      data.rows.push_back({0.0, {{static_cast<int>(v), 1.0}}});
    }
  }
  return data;
}

std::size_t assemble_invariance_block(ConicProgram& prog,
                                      const PwaSystem& system, std::size_t i,
                                      std::size_t j) {
  const int n1 = prog.n() + 1;
  const Matrix F = homogenize(system.laws.at(i), system.d, system.m).F;
  LmiBlock block;
  block.kind = BlockKind::invariance;
  block.cell = static_cast<int>(i);
  block.target = static_cast<int>(j);
  block.constant = Matrix::Zero(n1, n1);
  block.quad =
      switch_quadratization(system.cells.at(i), system.laws[i], system.cells.at(j));
  TermSum sum;
  for (const auto& t : prog.level_form(j, 0.0)) {
    sum.add(t.var, -(F.transpose() * t.coeff * F));
  }
  for (const auto& t : prog.level_form(i, 0.0)) sum.add(t.var, t.coeff);
  add_multiplier_terms(prog, block, sum, VarKind::U, block.cell, block.target);
  block.terms = sum.take();
  for (const auto& t : block.terms) {
    if (t.var == prog.alpha()) {
      throw std::logic_error("invariance block " + block.label() +
                             " depends on alpha");
    }
  }
  return prog.add_block(std::move(block));
}

std::size_t assemble_init_block(ConicProgram& prog, const PwaSystem& system,
                                std::size_t i) {
  const int n1 = prog.n() + 1;
  LmiBlock block;
  block.kind = BlockKind::init;
  block.cell = static_cast<int>(i);
  block.constant = Matrix::Zero(n1, n1);
  block.quad = init_quadratization(system.init, system.cells.at(i));
  TermSum sum;
  for (const auto& t : prog.level_form(i, -1.0)) sum.add(t.var, -t.coeff);
  add_multiplier_terms(prog, block, sum, VarKind::Z, block.cell, -1);
  block.terms = sum.take();
  return prog.add_block(std::move(block));
}

std::size_t assemble_boundedness_block(ConicProgram& prog,
                                       const PwaSystem& system,
                                       std::size_t i) {
  const int n1 = prog.n() + 1;
  LmiBlock block;
  block.kind = BlockKind::boundedness;
  block.cell = static_cast<int>(i);
  block.constant = Matrix::Zero(n1, n1);
  block.constant.diagonal().tail(n1 - 1).setConstant(-1.0);
  block.quad = cell_quadratization(system.cells.at(i));
  TermSum sum;
  add_multiplier_terms(prog, block, sum, VarKind::W, block.cell, -1);
  for (const auto& t : prog.level_form(i, -1.0)) sum.add(t.var, t.coeff);
  Matrix e00 = Matrix::Zero(n1, n1);
  e00(0, 0) = 1.0;
  sum.add(prog.beta(), e00);
  block.terms = sum.take();
  return prog.add_block(std::move(block));
}

ConicProgram assemble_program(const PwaSystem& system, const SwitchGraph& graph,
                              const std::vector<bool>& init_meets,
                              double margin) {
  system.validate();
  if (graph.size() != system.size() || init_meets.size() != system.size()) {
    throw ModelError("assemble_program: switch graph or init mask has wrong size");
  }
  ConicProgram prog(system.d, system.m, system.size(), margin);
  for (std::size_t i = 0; i < system.size(); ++i) {
    assemble_boundedness_block(prog, system, i);
  }
  for (std::size_t i = 0; i < system.size(); ++i) {
    if (init_meets[i]) assemble_init_block(prog, system, i);
  }
  for (std::size_t i = 0; i < system.size(); ++i) {
    for (std::size_t j = 0; j < system.size(); ++j) {
      if (graph(i, j)) assemble_invariance_block(prog, system, i, j);
    }
  }
  return prog;
}

ConicProgram assemble_program(const PwaSystem& system, const SwitchGraph& graph,
                              double margin) {
  std::vector<bool> meets(system.size());
  for (std::size_t i = 0; i < system.size(); ++i) {
    meets[i] = init_intersects_cell(system, i);
  }
  return assemble_program(system, graph, meets, margin);
}

}  // namespace pwqlyap
