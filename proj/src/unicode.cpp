#include "corpusprep/unicode.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace corpusprep::unicode {

namespace {

const icu::Normalizer2& nfkc_instance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status) || n == nullptr)
    throw std::runtime_error("ICU NFKC normalizer unavailable");
  return *n;
}

const icu::Normalizer2& nfd_instance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status) || n == nullptr)
    throw std::runtime_error("ICU NFD normalizer unavailable");
  return *n;
}

std::string normalize_with(const icu::Normalizer2& norm, std::string_view text) {
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = norm.normalize(in, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

}  // namespace

std::string nfkc(std::string_view text) { return normalize_with(nfkc_instance(), text); }

std::string strip_accents(std::string_view text) {
  std::string decomposed = normalize_with(nfd_instance(), text);
  std::string out;
  out.reserve(decomposed.size());
  std::size_t i = 0;
  while (i < decomposed.size()) {
    char32_t cp = next_codepoint(decomposed, i);
    if (u_charType(static_cast<UChar32>(cp)) != U_NON_SPACING_MARK) append_utf8(out, cp);
  }
  return out;
}

std::string to_lower(std::string_view text) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  s.toLower(icu::Locale::getRoot());
  std::string result;
  s.toUTF8String(result);
  return result;
}

std::string repair_utf8(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  const auto* s = reinterpret_cast<const uint8_t*>(bytes.data());
  int32_t len = static_cast<int32_t>(bytes.size());
  int32_t i = 0;
  while (i < len) {
    UChar32 cp;
    U8_NEXT(s, i, len, cp);
    if (cp < 0) cp = 0xFFFD;
    append_utf8(out, static_cast<char32_t>(cp));
  }
  return out;
}

bool is_valid_utf8(std::string_view bytes) {
  const auto* s = reinterpret_cast<const uint8_t*>(bytes.data());
  int32_t len = static_cast<int32_t>(bytes.size());
  int32_t i = 0;
  while (i < len) {
    UChar32 cp;
    U8_NEXT(s, i, len, cp);
    if (cp < 0) return false;
  }
  return true;
}

std::size_t count_codepoints(std::string_view text) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    next_codepoint(text, i);
    ++n;
  }
  return n;
}

bool is_letter(char32_t cp) { return u_isalpha(static_cast<UChar32>(cp)) != 0; }

bool is_punctuation(char32_t cp) { return u_ispunct(static_cast<UChar32>(cp)) != 0; }

bool is_decimal_digit(char32_t cp) {
  return u_charType(static_cast<UChar32>(cp)) == U_DECIMAL_DIGIT_NUMBER;
}

bool is_whitespace(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0; }

char32_t next_codepoint(std::string_view text, std::size_t& i) {
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  int32_t len = static_cast<int32_t>(text.size());
  int32_t pos = static_cast<int32_t>(i);
  UChar32 cp;
  U8_NEXT(s, pos, len, cp);
  i = static_cast<std::size_t>(pos);
  return cp < 0 ? char32_t{0xFFFD} : static_cast<char32_t>(cp);
}

void append_utf8(std::string& out, char32_t cp) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t off = 0;
  UBool err = false;
  U8_APPEND(buf, off, U8_MAX_LENGTH, static_cast<UChar32>(cp), err);
  if (err) {
    out += "\xEF\xBF\xBD";  // U+FFFD
    return;
  }
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(off));
}

}  // namespace corpusprep::unicode
