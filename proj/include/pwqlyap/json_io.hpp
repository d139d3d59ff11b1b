#pragma once

#include <string>

#include "json.hpp"
#include "pwqlyap/certificate.hpp"
#include "pwqlyap/model.hpp"

namespace pwqlyap {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Canonical text: fixed key order, numbers printed with 17 significant
// digits, two-space indentation, trailing newline.
std::string system_to_json(const PwaSystem& system);
PwaSystem system_from_json(const std::string& text);

std::string certificate_to_json(const Certificate& cert);
Certificate certificate_from_json(const std::string& text);

std::string read_file(const std::string& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

PwaSystem load_system(const std::string& path);
Certificate load_certificate(const std::string& path);

// Canonical rendering of an arbitrary document.
std::string canonical_json(const nlohmann::ordered_json& j);

// %.17g, with non-finite values rejected.
std::string format_double(double v);

}  // namespace pwqlyap
