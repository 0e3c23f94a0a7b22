#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hirag::text {

// Words are maximal runs of non-whitespace characters.
std::vector<std::string_view> split_words(std::string_view s);
std::size_t count_words(std::string_view s);

/// Collapse whitespace runs to one space and trim both ends.
std::string normalize_whitespace(std::string_view s);

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

/// Lowercased tokens split on anything that is not an ASCII letter or digit.
/// Bytes >= 0x80 are kept inside tokens so UTF-8 words survive intact.
std::vector<std::string> lexical_tokens(std::string_view s);

bool contains_case_insensitive(std::string_view haystack, std::string_view needle);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace hirag::text
