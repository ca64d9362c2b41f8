#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include "json.hpp"

namespace miot {

using json = nlohmann::json;
using Timestamp = std::chrono::sys_seconds;

/// Canonical document form: keys sorted, two-space indent, UTF-8, trailing LF.
std::string canonical_dump(const json& doc);

/// Single-line form used for line-delimited logs.
std::string compact_dump(const json& doc);

json parse_document(std::string_view text);

std::string sha256_hex(std::string_view bytes);

Timestamp utc_now();
std::string to_rfc3339(Timestamp t);
Timestamp parse_rfc3339(std::string_view text);

/// Random RFC 4122 version-4 identifier, lowercase.
std::string new_uuid();
bool is_uuid(std::string_view text);

}  // namespace miot
