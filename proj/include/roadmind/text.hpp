#pragma once

#include <string>
#include <string_view>

namespace roadmind::text {

/// NFC-normalizes, collapses runs of Unicode whitespace to one ASCII space
/// and trims both ends. Invalid UTF-8 sequences become U+FFFD.
std::string normalize_name(std::string_view raw);

/// normalize_name followed by Unicode lower-casing; the key used when
/// matching free text against known road names.
std::string match_key(std::string_view raw);

std::string trim(std::string_view s);

}  // namespace roadmind::text
