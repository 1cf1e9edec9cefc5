#include "doctest.h"

#include <random>

#include "corpusprep/normalize.hpp"
#include "corpusprep/unicode.hpp"

using namespace corpusprep;

namespace {

std::string random_unicode_string(std::mt19937_64& rng) {
  std::size_t len = rng() % 200;
  std::string out;
  for (std::size_t i = 0; i < len; ++i) {
    switch (rng() % 10) {
      case 0: out += '\n'; break;
      case 1: out += ' '; break;
      case 2: out += '\t'; break;
      case 3: unicode::append_utf8(out, 0x00C0 + rng() % 0x100); break;   // Latin-1 sup/ext
      case 4: unicode::append_utf8(out, 0x0370 + rng() % 0x2000); break;  // Greek..misc
      case 5: unicode::append_utf8(out, 0x4E00 + rng() % 0x100); break;   // CJK
      case 6: out += static_cast<char>('0' + rng() % 10); break;
      case 7: out += "<>"[rng() % 2]; break;
      default: out += static_cast<char>('a' + rng() % 26); break;
    }
  }
  return out;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) + 1;
}

}  // namespace

TEST_CASE("NFKC folds compatibility characters") {
  CHECK(normalize_content("\xEF\xAC\x81le") == "file");  // U+FB01 fi ligature
  CHECK(normalize_content("\xEF\xBC\xA1") == "A");       // fullwidth A
}

TEST_CASE("whitespace rules") {
  CHECK(normalize_content("a  \t b\n\n\n\nc") == "a b\n\nc");
  CHECK(normalize_content("  leading") == "leading");
  CHECK(normalize_content("trailing   \n") == "trailing");
  CHECK(normalize_content("a\nb") == "a\nb");
  CHECK(normalize_content("\n\n\na\n\n\n") == "a");
  CHECK(normalize_content("") == "");
  CHECK(normalize_content(" \t \n ") == "");
}

TEST_CASE("html tags and entities") {
  CHECK(normalize_content("x &amp; <b>y</b>") == "x & y");
  CHECK(normalize_content("<div class=\"x\">text</div>") == "text");
  CHECK(normalize_content("1 &lt; 2 &gt; 0") == "1 < 2 > 0");
  CHECK(normalize_content("say &quot;hi&quot;") == "say \"hi\"");
  CHECK(normalize_content("&#65;&#x42;") == "AB");
  // Unmatched '<' and unknown entities pass through.
  CHECK(normalize_content("a < b") == "a < b");
  CHECK(normalize_content("&nosuchentity; x") == "&nosuchentity; x");
  // Numeric reference to a compatibility char is re-normalized (idempotence).
  CHECK(normalize_content("&#64257;le") == "file");
}

TEST_CASE("entity and tag edge cases") {
  // Out-of-range and surrogate numeric references pass through.
  CHECK(normalize_content("&#1114112;") == "&#1114112;");
  CHECK(normalize_content("&#xD800;") == "&#xD800;");
  CHECK(normalize_content("&#0;") == "&#0;");
  // "<>" is not a tag; a tag may span a newline.
  CHECK(normalize_content("a <> b") == "a <> b");
  CHECK(normalize_content("a <span\nclass=x> b") == "a b");
  // Nested-looking spans collapse fully (fixpoint removal).
  CHECK(normalize_content("< <x> >") == "");
}

TEST_CASE("normalize_content preserves paragraph structure") {
  CHECK(normalize_content("p1 line\n\np2 line") == "p1 line\n\np2 line");
}

TEST_CASE("idempotence over generated inputs") {
  CHECK(is_idempotent_check(""));
  CHECK(is_idempotent_check(
      "Welcome to the world's foremost open content Organic Chemistry Textbook "
      "on the web!\n\nThe Study of Organic Chemistry"));
  std::mt19937_64 rng(77);
  for (int i = 0; i < 1000; ++i) {
    std::string s = random_unicode_string(rng);
    CAPTURE(s);
    CHECK(is_idempotent_check(s));
  }
}

TEST_CASE("normalization never increases line count") {
  std::mt19937_64 rng(78);
  for (int i = 0; i < 300; ++i) {
    std::string s = random_unicode_string(rng);
    CHECK(count_lines(normalize_content(s)) <= count_lines(s));
  }
}

TEST_CASE("normalize_for_lm applies ccnet rules") {
  CHECK(normalize_for_lm("Caf\xC3\xA9 2024!") ==
        std::vector<std::string>{"cafe", "0000"});
  CHECK(normalize_for_lm("A.B.C.") == std::vector<std::string>{"abc"});
  CHECK(normalize_for_lm("") == std::vector<std::string>{});
  CHECK(normalize_for_lm("  \n ") == std::vector<std::string>{});
  // ß has no canonical decomposition and stays put.
  CHECK(normalize_for_lm("Stra\xC3\x9F" "e 12") ==
        std::vector<std::string>{"stra\xC3\x9F" "e", "00"});
}

TEST_CASE("normalize_for_lm output is free of punctuation, uppercase, digits") {
  std::mt19937_64 rng(79);
  for (int i = 0; i < 300; ++i) {
    std::string s = random_unicode_string(rng);
    for (const auto& token : normalize_for_lm(s)) {
      std::size_t pos = 0;
      while (pos < token.size()) {
        char32_t cp = unicode::next_codepoint(token, pos);
        CHECK_FALSE(unicode::is_punctuation(cp));
        if (unicode::is_decimal_digit(cp)) CHECK(cp == U'0');
        bool ascii_upper = cp < 128 && cp >= 'A' && cp <= 'Z';
        CHECK_FALSE(ascii_upper);
      }
    }
  }
}
