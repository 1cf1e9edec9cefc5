#include "corpusprep/normalize.hpp"

#include <cstdint>

#include "corpusprep/unicode.hpp"

namespace corpusprep {

namespace {

namespace uni = corpusprep::unicode;

// Removes "<" [^<>]+ ">" spans. An unmatched "<" is kept as-is.
std::string remove_html_tags(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c != '<') {
      out += c;
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    bool closed = false;
    while (j < text.size()) {
      if (text[j] == '>') {
        closed = j > i + 1;  // "<>" is not a tag
        break;
      }
      if (text[j] == '<') break;
      ++j;
    }
    if (closed) {
      i = j + 1;  // drop the whole tag
    } else {
      out += c;
      ++i;
    }
  }
  return out;
}

// Decodes &amp; &lt; &gt; &quot; &apos; and numeric &#NN; / &#xNN; references.
// Unrecognized or malformed references pass through untouched.
std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out += text[i];
      ++i;
      continue;
    }
    std::size_t semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out += text[i];
      ++i;
      continue;
    }
    std::string_view name = text.substr(i + 1, semi - i - 1);
    if (name == "amp") out += '&';
    else if (name == "lt") out += '<';
    else if (name == "gt") out += '>';
    else if (name == "quot") out += '"';
    else if (name == "apos") out += '\'';
    else if (name.size() >= 2 && name[0] == '#') {
      bool hex = name[1] == 'x' || name[1] == 'X';
      std::string_view digits = name.substr(hex ? 2 : 1);
      std::uint32_t cp = 0;
      bool ok = !digits.empty();
      for (char d : digits) {
        std::uint32_t v;
        if (d >= '0' && d <= '9') v = static_cast<std::uint32_t>(d - '0');
        else if (hex && d >= 'a' && d <= 'f') v = static_cast<std::uint32_t>(d - 'a' + 10);
        else if (hex && d >= 'A' && d <= 'F') v = static_cast<std::uint32_t>(d - 'A' + 10);
        else { ok = false; break; }
        cp = cp * (hex ? 16 : 10) + v;
        if (cp > 0x10FFFF) { ok = false; break; }
      }
      // Refuse control chars other than \t \n; they would just be noise.
      if (ok && (cp == 0 || (cp < 0x20 && cp != '\t' && cp != '\n') ||
                 (cp >= 0xD800 && cp <= 0xDFFF)))
        ok = false;
      if (!ok) {
        out += text[i];
        ++i;
        continue;
      }
      uni::append_utf8(out, static_cast<char32_t>(cp));
    } else {
      out += text[i];
      ++i;
      continue;
    }
    i = semi + 1;
  }
  return out;
}

bool is_horizontal_ws(char32_t cp) { return cp != '\n' && uni::is_whitespace(cp); }

// Collapse runs of horizontal whitespace to one space, strip trailing
// whitespace per line, collapse 3+ newlines to 2, trim the document ends.
std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::string line;
  std::size_t i = 0;
  bool pending_space = false;
  auto flush_line = [&]() {
    out += line;  // pending_space discarded: trailing whitespace strip
    line.clear();
    pending_space = false;
  };
  while (i < text.size()) {
    char32_t cp = uni::next_codepoint(text, i);
    if (cp == '\n') {
      flush_line();
      out += '\n';
    } else if (is_horizontal_ws(cp)) {
      pending_space = true;
    } else {
      if (pending_space) line += ' ';
      pending_space = false;
      uni::append_utf8(line, cp);
    }
  }
  flush_line();

  // Collapse 3+ consecutive newlines to exactly 2.
  std::string collapsed;
  collapsed.reserve(out.size());
  std::size_t run = 0;
  for (char c : out) {
    if (c == '\n') {
      ++run;
      if (run <= 2) collapsed += c;
    } else {
      run = 0;
      collapsed += c;
    }
  }

  // Strip document-level leading/trailing whitespace.
  std::size_t begin = 0;
  while (begin < collapsed.size()) {
    std::size_t next = begin;
    char32_t cp = uni::next_codepoint(collapsed, next);
    if (!uni::is_whitespace(cp)) break;
    begin = next;
  }
  std::size_t end = collapsed.size();
  while (end > begin && (collapsed[end - 1] == '\n' || collapsed[end - 1] == ' '))
    --end;
  return collapsed.substr(begin, end - begin);
}

}  // namespace

std::string normalize_content(std::string_view text) {
  std::string s = uni::nfkc(text);
  // Removing an inner tag can join "<" ... ">" into a new tag; iterate to a
  // fixpoint so the output contains no removable span at all.
  while (true) {
    std::string stripped = remove_html_tags(s);
    if (stripped.size() == s.size()) break;
    s = std::move(stripped);
  }
  s = decode_entities(s);
  // Entities can decode to compatibility characters; re-normalize so the
  // output is NFKC and a second pass is a no-op.
  s = uni::nfkc(s);
  return normalize_whitespace(s);
}

bool is_idempotent_check(std::string_view text) {
  std::string once = normalize_content(text);
  return normalize_content(once) == once;
}

std::vector<std::string> normalize_for_lm(std::string_view text) {
  std::string lowered = uni::to_lower(text);
  std::string stripped = uni::strip_accents(lowered);
  std::string cleaned;
  cleaned.reserve(stripped.size());
  std::size_t i = 0;
  while (i < stripped.size()) {
    char32_t cp = uni::next_codepoint(stripped, i);
    if (uni::is_decimal_digit(cp)) cleaned += '0';
    else if (uni::is_punctuation(cp)) continue;
    else uni::append_utf8(cleaned, cp);
  }
  std::vector<std::string> tokens;
  std::string token;
  i = 0;
  while (i < cleaned.size()) {
    char32_t cp = uni::next_codepoint(cleaned, i);
    if (uni::is_whitespace(cp)) {
      if (!token.empty()) tokens.push_back(std::move(token));
      token.clear();
    } else {
      uni::append_utf8(token, cp);
    }
  }
  if (!token.empty()) tokens.push_back(std::move(token));
  return tokens;
}

}  // namespace corpusprep
