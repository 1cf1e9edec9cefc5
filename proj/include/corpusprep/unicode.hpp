#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace corpusprep::unicode {

// NFKC normalization of a UTF-8 string.
std::string nfkc(std::string_view text);

// Canonical decomposition followed by removal of combining marks (Mn).
std::string strip_accents(std::string_view text);

// Root-locale lowercasing (locale-independent, deterministic).
std::string to_lower(std::string_view text);

// Replace every ill-formed UTF-8 sequence with U+FFFD.
std::string repair_utf8(std::string_view bytes);

bool is_valid_utf8(std::string_view bytes);

// Unicode code point count (ill-formed sequences count as one replacement char).
std::size_t count_codepoints(std::string_view text);

bool is_letter(char32_t cp);       // category L*
bool is_punctuation(char32_t cp);  // category P*
bool is_decimal_digit(char32_t cp);  // category Nd
bool is_whitespace(char32_t cp);     // White_Space property

// Decodes the code point starting at byte offset i and advances i past it.
// Ill-formed input yields U+FFFD and advances by one byte.
char32_t next_codepoint(std::string_view text, std::size_t& i);

void append_utf8(std::string& out, char32_t cp);

}  // namespace corpusprep::unicode
