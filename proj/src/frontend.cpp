#include "pwqlyap/frontend.hpp"

#include <cctype>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>

namespace pwqlyap {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { ident, number, punct, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  double value = 0.0;
  int line = 1;
  int column = 1;
};

std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
        ++j;
      }
      t.kind = Tok::ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src.c_str() + i;
      char* end = nullptr;
      t.value = std::strtod(begin, &end);
      if (end == begin) throw ParseError(line, col, "malformed number");
      t.kind = Tok::number;
      t.text.assign(begin, static_cast<std::size_t>(end - begin));
      advance(static_cast<std::size_t>(end - begin));
    } else {
      static const char* two[] = {"<=", ">="};
      t.kind = Tok::punct;
      for (const char* p : two) {
        if (src.compare(i, 2, p) == 0) t.text = p;
      }
      if (t.text.empty()) {
        if (std::string("(){}[],;=<>+-*").find(c) == std::string::npos) {
          throw ParseError(line, col, std::string("unexpected character '") + c + "'");
        }
        t.text = std::string(1, c);
      }
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

// Products need one constant side to stay affine.
bool is_constant(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::number: return true;
    case Expr::Kind::variable: return false;
    case Expr::Kind::neg: return is_constant(*e.lhs);
    default: return is_constant(*e.lhs) && is_constant(*e.rhs);
  }
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

  LoopProgram run() {
    while (peek().kind == Tok::ident && peek().text != "while") decl();
    expect_word("while");
    expect("(");
    expect_word("true");
    expect(")");
    prog_.body = block();
    if (peek().kind != Tok::end) fail(peek(), "unexpected trailing input");
    return std::move(prog_);
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(t.line, t.column, msg);
  }
  bool is(const char* p) const {
    return peek().kind == Tok::punct && peek().text == p;
  }
  void expect(const char* p) {
    if (!is(p)) {
      fail(peek(), std::string("expected '") + p + "', found '" +
                       describe(peek()) + "'");
    }
    next();
  }
  void expect_word(const char* w) {
    if (peek().kind != Tok::ident || peek().text != w) {
      fail(peek(), std::string("expected '") + w + "', found '" +
                       describe(peek()) + "'");
    }
    next();
  }
  static std::string describe(const Token& t) {
    return t.kind == Tok::end ? "end of input" : t.text;
  }

  double signed_number() {
    double sign = 1.0;
    if (is("-")) {
      next();
      sign = -1.0;
    } else if (is("+")) {
      next();
    }
    if (peek().kind != Tok::number) fail(peek(), "expected a number");
    return sign * next().value;
  }

  void decl() {
    const Token name = next();
    if (name_kind_.count(name.text)) fail(name, "duplicate declaration of " + name.text);
    expect_word("in");
    expect("[");
    const double lo = signed_number();
    expect(",");
    const double hi = signed_number();
    expect("]");
    expect(";");
    if (!(lo <= hi)) fail(name, "empty range for " + name.text);
    name_kind_[name.text] = 's';
    prog_.state_vars.push_back(name.text);
    prog_.init_lo.push_back(lo);
    prog_.init_hi.push_back(hi);
  }

  Block block() {
    expect("{");
    Block out;
    while (!is("}")) {
      if (peek().kind == Tok::end) fail(peek(), "missing '}'");
      out.push_back(statement());
    }
    expect("}");
    return out;
  }

  Stmt statement() {
    const Token head = peek();
    Stmt s;
    s.line = head.line;
    s.column = head.column;
    if (head.kind == Tok::ident && head.text == "if") {
      next();
      s.kind = Stmt::Kind::branch;
      expect("(");
      auto lhs = expr();
      const Token cmp = next();
      if (cmp.kind != Tok::punct ||
          (cmp.text != "<" && cmp.text != "<=" && cmp.text != ">" && cmp.text != ">=")) {
        fail(cmp, "expected a comparison, found '" + describe(cmp) + "'");
      }
      auto rhs = expr();
      expect(")");
      const bool flip = cmp.text[0] == '>';
      s.guard.strict = cmp.text.size() == 1;
      s.guard.lhs = flip ? std::move(rhs) : std::move(lhs);
      s.guard.rhs = flip ? std::move(lhs) : std::move(rhs);
      s.then_block = block();
      if (peek().kind == Tok::ident && peek().text == "else") {
        next();
        if (peek().kind == Tok::ident && peek().text == "if") {
          s.else_block.push_back(statement());
        } else {
          s.else_block = block();
        }
      }
      return s;
    }
    if (head.kind != Tok::ident) fail(head, "expected a statement");
    next();
    expect("=");
    if (peek().kind == Tok::ident && peek().text == "input" &&
        peek(1).kind == Tok::punct && peek(1).text == "(") {
      next();
      next();
      const double lo = signed_number();
      expect(",");
      const double hi = signed_number();
      expect(")");
      expect(";");
      if (name_kind_.count(head.text)) {
        fail(head, head.text + " is already declared; inputs need a fresh name");
      }
      if (!(lo <= hi)) fail(head, "empty input range");
      name_kind_[head.text] = 'i';
      prog_.inputs.push_back({head.text, lo, hi});
      s.kind = Stmt::Kind::input;
      input_slots_[head.text] = prog_.m() - 1;
      s.slot = prog_.d() + prog_.m() - 1;
      return s;
    }
    s.kind = Stmt::Kind::assign;
    s.expr = expr();
    expect(";");
    auto it = name_kind_.find(head.text);
    if (it == name_kind_.end()) {
      name_kind_[head.text] = 't';
      prog_.temporaries.push_back(head.text);
      temp_slots_[head.text] = static_cast<int>(prog_.temporaries.size()) - 1;
    } else if (it->second == 'i') {
      fail(head, "cannot assign to input " + head.text);
    }
    s.slot = encode(head.text);
    return s;
  }

  // Inputs and temporaries are numbered while parsing, so slots stay
  // provisional (state k -> k, input k -> kInputBase + k, temporary k ->
  // kTempBase + k) until renumber() runs.
  static constexpr int kInputBase = 1 << 20;
  static constexpr int kTempBase = 1 << 24;

  int encode(const std::string& name) const {
    const char k = name_kind_.at(name);
    if (k == 's') {
      for (int i = 0; i < prog_.d(); ++i) {
        if (prog_.state_vars[static_cast<std::size_t>(i)] == name) return i;
      }
    }
    if (k == 'i') return kInputBase + input_slots_.at(name);
    return kTempBase + temp_slots_.at(name);
  }

  std::unique_ptr<Expr> make(Expr::Kind k, std::unique_ptr<Expr> a,
                             std::unique_ptr<Expr> b) {
    auto e = std::make_unique<Expr>();
    e->kind = k;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
  }

  std::unique_ptr<Expr> expr() {
    auto e = term();
    while (is("+") || is("-")) {
      const bool plus = next().text == "+";
      e = make(plus ? Expr::Kind::add : Expr::Kind::sub, std::move(e), term());
    }
    return e;
  }

  std::unique_ptr<Expr> term() {
    auto e = unary();
    while (is("*")) {
      const Token star = next();
      auto r = unary();
      if (!is_constant(*e) && !is_constant(*r)) {
        fail(star, "non-affine expression: product of two variables");
      }
      e = make(Expr::Kind::mul, std::move(e), std::move(r));
    }
    return e;
  }

  std::unique_ptr<Expr> unary() {
    if (is("-")) {
      next();
      return make(Expr::Kind::neg, unary(), nullptr);
    }
    if (is("+")) {
      next();
      return unary();
    }
    return primary();
  }

  std::unique_ptr<Expr> primary() {
    const Token t = next();
    auto e = std::make_unique<Expr>();
    if (t.kind == Tok::number) {
      e->kind = Expr::Kind::number;
      e->value = t.value;
      return e;
    }
    if (t.kind == Tok::ident) {
      if (!name_kind_.count(t.text)) fail(t, "unknown identifier " + t.text);
      e->kind = Expr::Kind::variable;
      e->slot = encode(t.text);
      return e;
    }
    if (t.kind == Tok::punct && t.text == "(") {
      e = expr();
      expect(")");
      return e;
    }
    fail(t, "expected an expression, found '" + describe(t) + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  LoopProgram prog_;
  std::map<std::string, char> name_kind_;
  std::map<std::string, int> input_slots_;
  std::map<std::string, int> temp_slots_;
};

// Final layout: state, inputs, temporaries.
void renumber(Expr& e, int d, int m) {
  if (e.kind == Expr::Kind::variable) {
    if (e.slot >= (1 << 24)) {
      e.slot = d + m + (e.slot - (1 << 24));
    } else if (e.slot >= (1 << 20)) {
      e.slot = e.slot - (1 << 20) + d;
    }
  }
  if (e.lhs) renumber(*e.lhs, d, m);
  if (e.rhs) renumber(*e.rhs, d, m);
}

void renumber(Block& b, int d, int m) {
  for (Stmt& s : b) {
    if (s.kind == Stmt::Kind::assign) {
      if (s.slot >= (1 << 24)) {
        s.slot = d + m + (s.slot - (1 << 24));
      } else if (s.slot >= (1 << 20)) {
        s.slot = s.slot - (1 << 20) + d;
      }
      renumber(*s.expr, d, m);
    } else if (s.kind == Stmt::Kind::branch) {
      renumber(*s.guard.lhs, d, m);
      renumber(*s.guard.rhs, d, m);
      renumber(s.then_block, d, m);
      renumber(s.else_block, d, m);
    }
  }
}

// Affine value over (1, x, u) as a row vector.
using Affine = Eigen::RowVectorXd;

Affine affine_of(const Expr& e, const std::vector<Affine>& env) {
  switch (e.kind) {
    case Expr::Kind::number: {
      Affine a = Affine::Zero(env.front().size());
      a(0) = e.value;
      return a;
    }
    case Expr::Kind::variable: return env[static_cast<std::size_t>(e.slot)];
    case Expr::Kind::neg: return -affine_of(*e.lhs, env);
    case Expr::Kind::add: return affine_of(*e.lhs, env) + affine_of(*e.rhs, env);
    case Expr::Kind::sub: return affine_of(*e.lhs, env) - affine_of(*e.rhs, env);
    case Expr::Kind::mul: {
      const Affine l = affine_of(*e.lhs, env);
      const Affine r = affine_of(*e.rhs, env);
      return is_constant(*e.lhs) ? Affine(l(0) * r) : Affine(r(0) * l);
    }
  }
  return {};
}

double value_of(const Expr& e, const std::vector<double>& env) {
  switch (e.kind) {
    case Expr::Kind::number: return e.value;
    case Expr::Kind::variable: return env[static_cast<std::size_t>(e.slot)];
    case Expr::Kind::neg: return -value_of(*e.lhs, env);
    case Expr::Kind::add: return value_of(*e.lhs, env) + value_of(*e.rhs, env);
    case Expr::Kind::sub: return value_of(*e.lhs, env) - value_of(*e.rhs, env);
    case Expr::Kind::mul: return value_of(*e.lhs, env) * value_of(*e.rhs, env);
  }
  return 0.0;
}

struct Leaf {
  // Guard rows g over (1, z): g(1, z) < 0 or <= 0.
  std::vector<Affine> strict;
  std::vector<Affine> weak;
  std::vector<Affine> env;
  std::vector<int> assigned;
};

std::vector<const Stmt*> flatten(const Block& b) {
  std::vector<const Stmt*> v;
  for (const Stmt& s : b) v.push_back(&s);
  return v;
}

// Symbolic execution of every path; a branch continues with its arm
// followed by the statements after it.
void explore(const std::vector<const Stmt*>& stmts, std::size_t at, Leaf leaf,
             const LoopProgram& prog, std::vector<Leaf>& out) {
  for (std::size_t k = at; k < stmts.size(); ++k) {
    const Stmt& s = *stmts[k];
    if (s.kind == Stmt::Kind::input) continue;
    if (s.kind == Stmt::Kind::assign) {
      leaf.env[static_cast<std::size_t>(s.slot)] = affine_of(*s.expr, leaf.env);
      if (s.slot < prog.d()) {
        if (leaf.assigned[static_cast<std::size_t>(s.slot)]++) {
          throw ParseError(s.line, s.column,
                           "state variable " +
                               prog.state_vars[static_cast<std::size_t>(s.slot)] +
                               " assigned twice on one path");
        }
      }
      continue;
    }
    // lhs - rhs < 0 (or <= 0)
    const Affine g = affine_of(*s.guard.lhs, leaf.env) -
                     affine_of(*s.guard.rhs, leaf.env);
    std::vector<const Stmt*> then_path = flatten(s.then_block);
    std::vector<const Stmt*> else_path = flatten(s.else_block);
    for (std::size_t r = k + 1; r < stmts.size(); ++r) {
      then_path.push_back(stmts[r]);
      else_path.push_back(stmts[r]);
    }
    Leaf t = leaf;
    Leaf e = std::move(leaf);
    if (s.guard.strict) {
      t.strict.push_back(g);
      e.weak.push_back(-g);
    } else {
      t.weak.push_back(g);
      e.strict.push_back(-g);
    }
    explore(then_path, 0, std::move(t), prog, out);
    explore(else_path, 0, std::move(e), prog, out);
    return;
  }
  for (int v = 0; v < prog.d(); ++v) {
    if (!leaf.assigned[static_cast<std::size_t>(v)]) {
      throw ParseError(0, 0, "state variable " +
                                 prog.state_vars[static_cast<std::size_t>(v)] +
                                 " is not assigned on every path");
    }
  }
  out.push_back(std::move(leaf));
}

std::vector<Leaf> leaves_of(const LoopProgram& prog) {
  const int d = prog.d();
  const int m = prog.m();
  const int slots = d + m + static_cast<int>(prog.temporaries.size());
  Leaf root;
  root.env.assign(static_cast<std::size_t>(slots), Affine::Zero(1 + d + m));
  for (int k = 0; k < d + m; ++k) root.env[static_cast<std::size_t>(k)](1 + k) = 1.0;
  root.assigned.assign(static_cast<std::size_t>(d), 0);
  std::vector<Leaf> out;
  explore(flatten(prog.body), 0, std::move(root), prog, out);
  return out;
}

void check_temporaries_defined(const Block& b, std::vector<bool>& defined,
                               int base) {
  // Temporaries must be assigned before use on the path that reads them;
  // reading one that is still unassigned would silently read zero.
  auto check_expr = [&](const Expr& e, const Stmt& s, auto&& self) -> void {
    if (e.kind == Expr::Kind::variable && e.slot >= base &&
        !defined[static_cast<std::size_t>(e.slot - base)]) {
      throw ParseError(s.line, s.column, "temporary read before assignment");
    }
    if (e.lhs) self(*e.lhs, s, self);
    if (e.rhs) self(*e.rhs, s, self);
  };
  for (const Stmt& s : b) {
    if (s.kind == Stmt::Kind::assign) {
      check_expr(*s.expr, s, check_expr);
      if (s.slot >= base) defined[static_cast<std::size_t>(s.slot - base)] = true;
    } else if (s.kind == Stmt::Kind::branch) {
      check_expr(*s.guard.lhs, s, check_expr);
      check_expr(*s.guard.rhs, s, check_expr);
      std::vector<bool> t = defined;
      std::vector<bool> e = defined;
      check_temporaries_defined(s.then_block, t, base);
      check_temporaries_defined(s.else_block, e, base);
      for (std::size_t k = 0; k < defined.size(); ++k) defined[k] = t[k] && e[k];
    }
  }
}

}  // namespace

int LoopProgram::leaves() const {
  return static_cast<int>(leaves_of(*this).size());
}

LoopProgram parse_program(const std::string& text) {
  Parser parser(text);
  LoopProgram prog = parser.run();
  if (prog.state_vars.empty()) throw ParseError(1, 1, "no state variables declared");
  renumber(prog.body, prog.d(), prog.m());
  std::vector<bool> defined(prog.temporaries.size(), false);
  check_temporaries_defined(prog.body, defined, prog.d() + prog.m());
  leaves_of(prog);  // assignment checks
  return prog;
}

Vector interpret(const LoopProgram& program, const Vector& x, const Vector& u) {
  const int d = program.d();
  const int m = program.m();
  if (x.size() != d || u.size() != m) throw ModelError("interpret: dimension mismatch");
  std::vector<double> env(static_cast<std::size_t>(d + m) + program.temporaries.size(), 0.0);
  for (int k = 0; k < d; ++k) env[static_cast<std::size_t>(k)] = x(k);
  for (int k = 0; k < m; ++k) env[static_cast<std::size_t>(d + k)] = u(k);
  const Block* block = &program.body;
  std::vector<std::pair<const Block*, std::size_t>> stack{{block, 0}};
  while (!stack.empty()) {
    auto& [b, at] = stack.back();
    if (at >= b->size()) {
      stack.pop_back();
      continue;
    }
    const Stmt& s = (*b)[at++];
    if (s.kind == Stmt::Kind::assign) {
      env[static_cast<std::size_t>(s.slot)] = value_of(*s.expr, env);
    } else if (s.kind == Stmt::Kind::branch) {
      const double l = value_of(*s.guard.lhs, env);
      const double r = value_of(*s.guard.rhs, env);
      const bool taken = s.guard.strict ? l < r : l <= r;
      stack.push_back({taken ? &s.then_block : &s.else_block, 0});
    }
  }
  Vector out(d);
  for (int k = 0; k < d; ++k) out(k) = env[static_cast<std::size_t>(k)];
  return out;
}

PwaSystem to_pwa(const LoopProgram& program) {
  const int d = program.d();
  const int m = program.m();
  const int n = d + m;
  // Input range rows over (x, u): u_k <= hi, -u_k <= -lo.
  Matrix Tin = Matrix::Zero(2 * m, n);
  Vector cin(2 * m);
  for (int k = 0; k < m; ++k) {
    Tin(2 * k, d + k) = 1.0;
    Tin(2 * k + 1, d + k) = -1.0;
    cin(2 * k) = program.inputs[static_cast<std::size_t>(k)].hi;
    cin(2 * k + 1) = -program.inputs[static_cast<std::size_t>(k)].lo;
  }
  PwaSystem sys;
  sys.d = d;
  sys.m = m;
  for (const Leaf& leaf : leaves_of(program)) {
    // Row g over (1, z) means g0 + g.z (< or <=) 0, i.e. g.z (< or <=) -g0.
    const auto ns = static_cast<Eigen::Index>(leaf.strict.size());
    const auto nw = static_cast<Eigen::Index>(leaf.weak.size());
    Matrix Ts(ns, n);
    Vector cs(ns);
    Matrix Tw(nw + 2 * m, n);
    Vector cw(nw + 2 * m);
    for (Eigen::Index r = 0; r < ns; ++r) {
      const Affine& g = leaf.strict[static_cast<std::size_t>(r)];
      Ts.row(r) = g.tail(n);
      cs(r) = g(0) == 0.0 ? 0.0 : -g(0);
    }
    for (Eigen::Index r = 0; r < nw; ++r) {
      const Affine& g = leaf.weak[static_cast<std::size_t>(r)];
      Tw.row(r) = g.tail(n);
      cw(r) = g(0) == 0.0 ? 0.0 : -g(0);
    }
    Tw.bottomRows(2 * m) = Tin;
    cw.tail(2 * m) = cin;
    sys.cells.emplace_back(Ts, cs, Tw, cw);
    AffineLaw law;
    law.A.resize(d, d);
    law.B.resize(d, m);
    law.b.resize(d);
    for (int v = 0; v < d; ++v) {
      const Affine& a = leaf.env[static_cast<std::size_t>(v)];
      law.b(v) = a(0);
      law.A.row(v) = a.segment(1, d);
      law.B.row(v) = a.segment(1 + d, m);
    }
    sys.laws.push_back(std::move(law));
  }
  Matrix Tu = Matrix::Zero(2 * m, m);
  for (int k = 0; k < m; ++k) {
    Tu(2 * k, k) = 1.0;
    Tu(2 * k + 1, k) = -1.0;
  }
  sys.input = Polyhedron(Matrix(0, m), Vector(0), Tu, cin);
  Matrix Ti = Matrix::Zero(2 * n, n);
  Vector ci(2 * n);
  for (int k = 0; k < d; ++k) {
    Ti(2 * k, k) = 1.0;
    Ti(2 * k + 1, k) = -1.0;
    ci(2 * k) = program.init_hi[static_cast<std::size_t>(k)];
    ci(2 * k + 1) = -program.init_lo[static_cast<std::size_t>(k)];
  }
  Ti.bottomRows(2 * m).rightCols(m) = Tu;
  ci.tail(2 * m) = cin;
  sys.init = Polyhedron(Matrix(0, n), Vector(0), Ti, ci);
  sys.validate();
  return sys;
}

}  // namespace pwqlyap
