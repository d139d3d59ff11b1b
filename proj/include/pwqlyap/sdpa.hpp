#pragma once

#include <string>

#include "pwqlyap/sdp_solver.hpp"

namespace pwqlyap {

/// Sparse SDPA text. Semidefinite blocks come first in program order, then a
/// single diagonal block (negative size) holding all linear rows. Entries
/// are listed by matrix number, block, row, column over the upper triangle,
/// 1-based, with exact zeros omitted.
std::string to_sdpa(const SdpData& data, const std::string& comment = "");

/// Reads the sparse format back. Lines starting with '"' or '*' before the
/// dimension line are comments; ',', '{', '}', '(' and ')' count as blanks.
SdpData from_sdpa(const std::string& text);

}  // namespace pwqlyap
