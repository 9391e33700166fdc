#pragma once

#include <string>
#include <string_view>

#include "tqprep/table.hpp"

namespace tqprep {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

// Content hash over the full markdown rendering, prefixed "sha256:".
std::string table_digest(const Table& t);

}  // namespace tqprep
