#include "doctest.h"

#include <cmath>
#include <limits>
#include <string>

#include "corpusprep/error.hpp"
#include "corpusprep/quality.hpp"

using namespace corpusprep;

namespace {

std::string repeat_lines(const std::string& line, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += '\n';
    out += line;
  }
  return out;
}

const std::string kLongLine(120, 'x');
const std::string kShortLine = "short";

Document doc_with(std::string text, double score = 1.0) {
  Document doc;
  doc.meta.docid = "t/xx/0/0";
  doc.meta.download_date = "2024-01-01";
  doc.meta.language = "en";
  doc.meta.language_score = score;
  doc.text = std::move(text);
  return doc;
}

}  // namespace

TEST_CASE("tiny boundary at 5 lines") {
  auto four = annotate_quality(repeat_lines(kLongLine, 4));
  CHECK(four.count(QualityWarning::Tiny) == 1);
  auto five = annotate_quality(repeat_lines(kLongLine, 5));
  CHECK(five.empty());
}

TEST_CASE("noisy ratio is strict at 50%") {
  // "abc!!! ???": 3 letters of 10 chars -> 0.7 non-letters.
  auto noisy = annotate_quality("abc!!! ???");
  CHECK(noisy.count(QualityWarning::Noisy) == 1);
  // Exactly half non-letters keeps (strict >): 5 letters + 5 punct.
  CHECK(annotate_quality("abcde!!!!!").count(QualityWarning::Noisy) == 0);
  CHECK(annotate_quality("abcd!!!!!!").count(QualityWarning::Noisy) == 1);  // 0.6
  // Whitespace counts as non-letter by default, switchable.
  std::string tabbed = "a\t\t\tb";  // 2 letters of 5 chars
  CHECK(annotate_quality(tabbed).count(QualityWarning::Noisy) == 1);
  QualityOptions no_ws;
  no_ws.whitespace_in_noisy = false;
  CHECK(annotate_quality(tabbed, no_ws).count(QualityWarning::Noisy) == 0);
}

TEST_CASE("header window rule") {
  // 10 lines: first 2 short, rest long -> window ceil(0.2*10)=2, 100% > 50%.
  std::string text = kShortLine + "\n" + kShortLine;
  for (int i = 0; i < 8; ++i) text += "\n" + kLongLine;
  auto warnings = annotate_quality(text);
  CHECK(warnings == std::set<QualityWarning>{QualityWarning::Header});

  // Mirrored document -> Footer only.
  std::string mirrored;
  for (int i = 0; i < 8; ++i) mirrored += kLongLine + "\n";
  mirrored += kShortLine + "\n" + kShortLine;
  auto mirrored_warnings = annotate_quality(mirrored);
  CHECK(mirrored_warnings == std::set<QualityWarning>{QualityWarning::Footer});

  // Exactly 50% short in the window keeps (strict >): 1 short of window 2.
  std::string boundary = kShortLine;
  for (int i = 0; i < 9; ++i) boundary += "\n" + kLongLine;
  CHECK(annotate_quality(boundary).count(QualityWarning::Header) == 0);
}

TEST_CASE("header window is at least one line") {
  // 5 lines, first short: window = ceil(1) = 1, 100% short.
  std::string text = kShortLine;
  for (int i = 0; i < 4; ++i) text += "\n" + kLongLine;
  CHECK(annotate_quality(text).count(QualityWarning::Header) == 1);
}

TEST_CASE("short_sentences threshold is >= 50%") {
  auto mk = [&](int short_count, int total) {
    std::string text;
    for (int i = 0; i < total; ++i) {
      if (i) text += '\n';
      text += i < short_count ? kShortLine : kLongLine;
    }
    return annotate_quality(text);
  };
  CHECK(mk(5, 10).count(QualityWarning::ShortSentences) == 1);  // exactly 50%
  CHECK(mk(4, 10).count(QualityWarning::ShortSentences) == 0);
  CHECK(mk(6, 10).count(QualityWarning::ShortSentences) == 1);
}

TEST_CASE("prefilter boundaries") {
  CHECK(*prefilter(doc_with(std::string(199, 'a'), 0.9)) == DropReason::TooShort);
  CHECK_FALSE(prefilter(doc_with(std::string(200, 'a'), 0.9)).has_value());
  CHECK(*prefilter(doc_with(std::string(300, 'a'), 0.49)) == DropReason::LowLangScore);
  CHECK_FALSE(prefilter(doc_with(std::string(300, 'a'), 0.50)).has_value());
  CHECK(*prefilter(doc_with("")) == DropReason::TooShort);
  // too_short takes precedence when both fail.
  CHECK(*prefilter(doc_with("tiny", 0.1)) == DropReason::TooShort);
  // Characters are code points, not bytes.
  std::string two_hundred_cjk;
  for (int i = 0; i < 200; ++i) two_hundred_cjk += "\xE6\x97\xA5";
  CHECK_FALSE(prefilter(doc_with(two_hundred_cjk, 0.9)).has_value());
}

TEST_CASE("filter_quality applies the fatal policy") {
  auto policy = default_quality_policy();
  auto fatal = filter_quality({QualityWarning::Tiny}, policy);
  REQUIRE(fatal.size() == 1);
  CHECK(fatal[0] == QualityWarning::Tiny);
  CHECK(filter_quality({}, policy).empty());
  CHECK(filter_quality({QualityWarning::Header},
                       {QualityWarning::Tiny, QualityWarning::Noisy})
            .empty());
}

TEST_CASE("harmful threshold keeps scores at or above 5") {
  CHECK(filter_harmful_drops(4.9));
  CHECK_FALSE(filter_harmful_drops(5.0));
  CHECK_FALSE(filter_harmful_drops(10000.0));
  CHECK(filter_harmful_drops(4.999));
  CHECK_THROWS_AS(filter_harmful_drops(std::nan("")), ValidationError);
  CHECK_THROWS_AS(filter_harmful_drops(std::numeric_limits<double>::infinity()),
                  ValidationError);
}

TEST_CASE("annotate_quality is pure and deterministic") {
  std::string text = kShortLine + "\n" + kLongLine + "\n!!!";
  CHECK(annotate_quality(text) == annotate_quality(text));
}
