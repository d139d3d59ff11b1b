#include "pwqlyap/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pwqlyap {

using Json = nlohmann::ordered_json;

std::string format_double(double v) {
  if (!std::isfinite(v)) throw InputError("cannot serialize non-finite number");
  if (v == 0.0) return "0";  // also folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

bool is_scalar_array(const Json& j) {
  for (const auto& e : j) {
    if (e.is_array() || e.is_object()) return false;
  }
  return true;
}

void dump(const Json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += inner + Json(it.key()).dump() + ": ";
      dump(it.value(), indent + 1, out);
    }
    out += "\n" + pad + "}";
  } else if (j.is_array()) {
    if (is_scalar_array(j)) {
      out += "[";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ", ";
        dump(j[k], indent + 1, out);
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t k = 0; k < j.size(); ++k) {
      if (k) out += ",\n";
      out += inner;
      dump(j[k], indent + 1, out);
    }
    out += "\n" + pad + "]";
  } else if (j.is_number_float()) {
    out += format_double(j.get<double>());
  } else {
    out += j.dump();
  }
}


}  // namespace

std::string canonical_json(const nlohmann::ordered_json& j) {
  std::string out;
  dump(j, 0, out);
  out += "\n";
  return out;
}

namespace {

Json to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

Json to_json(const Polyhedron& p) {
  Json j = Json::object();
  j["Ts"] = to_json(p.Ts());
  j["cs"] = to_json(p.cs());
  j["Tw"] = to_json(p.Tw());
  j["cw"] = to_json(p.cw());
  return j;
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw InputError(where + ": missing key '" + key + "'");
  }
  return j[key];
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InputError(where + ": non-finite number");
  return v;
}

Vector vector_from(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    v(static_cast<Eigen::Index>(k)) = number(j[k], where);
  }
  return v;
}

// `cols` fixes the width when the matrix has no rows.
Matrix matrix_from(const Json& j, int cols, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array of rows");
  Matrix M(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = vector_from(j[r], where);
    if (row.size() != cols) {
      throw InputError(where + ": row " + std::to_string(r) + " has " +
                       std::to_string(row.size()) + " entries, expected " +
                       std::to_string(cols));
    }
    M.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return M;
}

Polyhedron polyhedron_from(const Json& j, int dim, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  auto opt = [&](const char* key) -> Json {
    return j.contains(key) ? j[key] : Json::array();
  };
  Matrix Ts = matrix_from(opt("Ts"), dim, where + ".Ts");
  Vector cs = vector_from(opt("cs"), where + ".cs");
  Matrix Tw = matrix_from(opt("Tw"), dim, where + ".Tw");
  Vector cw = vector_from(opt("cw"), where + ".cw");
  try {
    return Polyhedron(std::move(Ts), std::move(cs), std::move(Tw),
                      std::move(cw));
  } catch (const ModelError& e) {
    throw InputError(where + ": " + e.what());
  }
}

int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw InputError(where + ": expected an integer");
  const auto v = j.get<long long>();
  if (v < 0 || v > 1000) throw InputError(where + ": out of range");
  return static_cast<int>(v);
}

Json parse_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string system_to_json(const PwaSystem& system) {
  Json j = Json::object();
  j["d"] = system.d;
  j["m"] = system.m;
  Json cells = Json::array();
  for (const auto& c : system.cells) cells.push_back(to_json(c));
  j["cells"] = std::move(cells);
  Json laws = Json::array();
  for (const auto& law : system.laws) {
    Json l = Json::object();
    l["A"] = to_json(law.A);
    l["B"] = to_json(law.B);
    l["b"] = to_json(law.b);
    laws.push_back(std::move(l));
  }
  j["laws"] = std::move(laws);
  j["input"] = to_json(system.input);
  j["init"] = to_json(system.init);
  return canonical_json(j);
}

PwaSystem system_from_json(const std::string& text) {
  const Json j = parse_text(text);
  PwaSystem s;
  s.d = integer(field(j, "d", "system"), "d");
  s.m = integer(field(j, "m", "system"), "m");
  if (s.d < 1) throw InputError("d must be positive");
  const int n = s.d + s.m;
  const Json& cells = field(j, "cells", "system");
  const Json& laws = field(j, "laws", "system");
  if (!cells.is_array() || !laws.is_array()) {
    throw InputError("cells and laws must be arrays");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    s.cells.push_back(
        polyhedron_from(cells[i], n, "cells[" + std::to_string(i) + "]"));
  }
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const std::string where = "laws[" + std::to_string(i) + "]";
    AffineLaw law;
    law.A = matrix_from(field(laws[i], "A", where), s.d, where + ".A");
    law.B = matrix_from(field(laws[i], "B", where), s.m, where + ".B");
    law.b = vector_from(field(laws[i], "b", where), where + ".b");
    s.laws.push_back(std::move(law));
  }
  s.input = polyhedron_from(field(j, "input", "system"), s.m, "input");
  s.init = polyhedron_from(field(j, "init", "system"), n, "init");
  try {
    s.validate();
  } catch (const ModelError& e) {
    throw InputError(e.what());
  }
  return s;
}

std::string certificate_to_json(const Certificate& cert) {
  Json j = Json::object();
  j["alpha"] = cert.alpha;
  j["beta"] = cert.beta;
  j["eps"] = cert.eps;
  Json cells = Json::array();
  for (std::size_t i = 0; i < cert.P.size(); ++i) {
    Json c = Json::object();
    c["P"] = to_json(cert.P[i]);
    c["q"] = to_json(cert.q[i]);
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  Json res = Json::array();
  for (const auto& r : cert.residuals) {
    Json e = Json::object();
    e["block"] = r.block;
    e["min_eig"] = r.min_eig;
    res.push_back(std::move(e));
  }
  j["residuals"] = std::move(res);
  return canonical_json(j);
}

Certificate certificate_from_json(const std::string& text) {
  const Json j = parse_text(text);
  Certificate c;
  c.alpha = number(field(j, "alpha", "certificate"), "alpha");
  c.beta = number(field(j, "beta", "certificate"), "beta");
  c.eps = j.contains("eps") ? number(j["eps"], "eps") : 0.0;
  const Json& cells = field(j, "cells", "certificate");
  if (!cells.is_array() || cells.empty()) {
    throw InputError("certificate: cells must be a nonempty array");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string where = "cells[" + std::to_string(i) + "]";
    Vector q = vector_from(field(cells[i], "q", where), where + ".q");
    Matrix P = matrix_from(field(cells[i], "P", where),
                           static_cast<int>(q.size()), where + ".P");
    if (P.rows() != q.size()) throw InputError(where + ": P must be square");
    c.P.push_back(std::move(P));
    c.q.push_back(std::move(q));
  }
  if (j.contains("residuals")) {
    for (const auto& r : j["residuals"]) {
      c.residuals.push_back({field(r, "block", "residual").get<std::string>(),
                             number(field(r, "min_eig", "residual"), "min_eig")});
    }
  }
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw InputError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw InputError("cannot rename onto " + path + ": " + ec.message());
  }
}

PwaSystem load_system(const std::string& path) {
  return system_from_json(read_file(path));
}

Certificate load_certificate(const std::string& path) {
  return certificate_from_json(read_file(path));
}

}  // namespace pwqlyap
