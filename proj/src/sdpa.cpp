#include "pwqlyap/sdpa.hpp"

#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pwqlyap/json_io.hpp"

namespace pwqlyap {

namespace {

struct Entry {
  int block;
  int i;
  int j;
  double value;
};

void emit_matrix(std::ostringstream& os, int matno,
                 const std::vector<Entry>& entries) {
  for (const Entry& e : entries) {
    if (e.value == 0.0) continue;
    os << matno << ' ' << e.block << ' ' << e.i << ' ' << e.j << ' '
       << format_double(e.value) << '\n';
  }
}

void push_upper(std::vector<Entry>& out, int block, const Matrix& M) {
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = r; c < M.cols(); ++c) {
      out.push_back({block, static_cast<int>(r + 1), static_cast<int>(c + 1),
                     M(r, c)});
    }
  }
}

}  // namespace

std::string to_sdpa(const SdpData& data, const std::string& comment) {
  const int nsdp = static_cast<int>(data.blocks.size());
  const bool has_rows = !data.rows.empty();
  const int lp_block = nsdp + 1;
  std::ostringstream os;
  std::istringstream lines(comment);
  for (std::string line; std::getline(lines, line);) os << '"' << line << '\n';
  os << data.num_vars << '\n';
  os << nsdp + (has_rows ? 1 : 0) << '\n';
  for (int b = 0; b < nsdp; ++b) {
    os << data.blocks[static_cast<std::size_t>(b)].size()
       << (b + 1 < nsdp || has_rows ? " " : "");
  }
  if (has_rows) os << -static_cast<long>(data.rows.size());
  os << '\n';
  for (int v = 0; v < data.num_vars; ++v) {
    os << format_double(data.c(v)) << (v + 1 < data.num_vars ? " " : "");
  }
  os << '\n';

  // Bucket entries per matrix number so each comes out block-ordered.
  std::vector<std::vector<Entry>> per_mat(
      static_cast<std::size_t>(data.num_vars) + 1);
  for (int b = 0; b < nsdp; ++b) {
    const SdpBlockData& blk = data.blocks[static_cast<std::size_t>(b)];
    push_upper(per_mat[0], b + 1, blk.F0);
    for (const auto& [v, F] : blk.terms) {
      push_upper(per_mat[static_cast<std::size_t>(v) + 1], b + 1, F);
    }
  }
  for (std::size_t l = 0; l < data.rows.size(); ++l) {
    const int k = static_cast<int>(l) + 1;
    per_mat[0].push_back({lp_block, k, k, data.rows[l].f0});
    for (const auto& [v, a] : data.rows[l].terms) {
      per_mat[static_cast<std::size_t>(v) + 1].push_back({lp_block, k, k, a});
    }
  }
  for (std::size_t k = 0; k < per_mat.size(); ++k) {
    emit_matrix(os, static_cast<int>(k), per_mat[k]);
  }
  return os.str();
}

SdpData from_sdpa(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::ostringstream body;
  bool header = true;
  int counts = 0;
  while (std::getline(in, line)) {
    if (header && (line.empty() || line[0] == '"' || line[0] == '*')) continue;
    header = false;
    // mDim and nBlock lines may carry trailing text such as "=mdim".
    if (counts < 2) {
      std::istringstream first(line);
      std::string tok;
      if (!(first >> tok)) continue;
      line = tok;
      ++counts;
    }
    for (char& ch : line) {
      if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
    }
    body << line << '\n';
  }
  std::istringstream tok(body.str());
  SdpData data;
  int nblocks = 0;
  if (!(tok >> data.num_vars >> nblocks) || data.num_vars < 0 || nblocks < 0) {
    throw std::runtime_error("sdpa: bad header");
  }
  std::vector<long> sizes(static_cast<std::size_t>(nblocks));
  for (auto& s : sizes) {
    if (!(tok >> s) || s == 0) throw std::runtime_error("sdpa: bad block sizes");
  }
  data.c.resize(data.num_vars);
  for (int v = 0; v < data.num_vars; ++v) {
    if (!(tok >> data.c(v))) throw std::runtime_error("sdpa: bad objective");
  }
  // Semidefinite blocks map to data.blocks in order; diagonal blocks are
  // concatenated into rows.
  std::vector<int> index(static_cast<std::size_t>(nblocks));
  std::vector<std::size_t> row_offset(static_cast<std::size_t>(nblocks));
  for (int b = 0; b < nblocks; ++b) {
    const long s = sizes[static_cast<std::size_t>(b)];
    if (s > 0) {
      index[static_cast<std::size_t>(b)] = static_cast<int>(data.blocks.size());
      data.blocks.push_back({Matrix::Zero(s, s), {}});
    } else {
      row_offset[static_cast<std::size_t>(b)] = data.rows.size();
      data.rows.resize(data.rows.size() + static_cast<std::size_t>(-s));
    }
  }
  // Accumulate terms per (block, variable) before storing.
  std::vector<std::map<int, Matrix>> terms(data.blocks.size());
  std::vector<std::map<int, double>> row_terms(data.rows.size());
  int matno = 0;
  int blk = 0;
  long i = 0;
  long j = 0;
  double value = 0.0;
  while (tok >> matno >> blk >> i >> j >> value) {
    if (matno < 0 || matno > data.num_vars || blk < 1 || blk > nblocks) {
      throw std::runtime_error("sdpa: entry index out of range");
    }
    const auto b = static_cast<std::size_t>(blk - 1);
    const long s = sizes[b];
    if (i < 1 || j < 1 || i > std::labs(s) || j > std::labs(s)) {
      throw std::runtime_error("sdpa: entry position out of range");
    }
    if (s < 0) {
      if (i != j) throw std::runtime_error("sdpa: off-diagonal entry in LP block");
      const std::size_t r = row_offset[b] + static_cast<std::size_t>(i - 1);
      if (matno == 0) {
        data.rows[r].f0 = value;
      } else {
        row_terms[r][matno - 1] += value;
      }
      continue;
    }
    const auto k = static_cast<std::size_t>(index[b]);
    Matrix* M = nullptr;
    if (matno == 0) {
      M = &data.blocks[k].F0;
    } else {
      auto [it, fresh] = terms[k].try_emplace(matno - 1, Matrix::Zero(s, s));
      (void)fresh;
      M = &it->second;
    }
    (*M)(i - 1, j - 1) = value;
    (*M)(j - 1, i - 1) = value;
  }
  if (!tok.eof()) throw std::runtime_error("sdpa: malformed entry line");
  for (std::size_t k = 0; k < terms.size(); ++k) {
    for (auto& [v, M] : terms[k]) data.blocks[k].terms.emplace_back(v, std::move(M));
  }
  for (std::size_t r = 0; r < row_terms.size(); ++r) {
    for (const auto& [v, a] : row_terms[r]) data.rows[r].terms.emplace_back(v, a);
  }
  return data;
}

}  // namespace pwqlyap
