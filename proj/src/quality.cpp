#include "corpusprep/quality.hpp"

#include <cmath>

#include "corpusprep/error.hpp"
#include "corpusprep/unicode.hpp"

namespace corpusprep {

namespace {

namespace uni = corpusprep::unicode;

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (true) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

}  // namespace

std::set<QualityWarning> annotate_quality(std::string_view text, const QualityOptions& options) {
  std::set<QualityWarning> warnings;
  auto lines = split_lines(text);
  const std::size_t n = lines.size();

  if (n < 5) warnings.insert(QualityWarning::Tiny);

  // Noisy: non-letter ratio over all characters, strictly above 50%.
  std::size_t letters = 0, total = 0, non_ws_total = 0, non_ws_letters = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp = uni::next_codepoint(text, i);
    ++total;
    bool letter = uni::is_letter(cp);
    if (letter) ++letters;
    if (!uni::is_whitespace(cp)) {
      ++non_ws_total;
      if (letter) ++non_ws_letters;
    }
  }
  std::size_t noisy_total = options.whitespace_in_noisy ? total : non_ws_total;
  std::size_t noisy_letters = options.whitespace_in_noisy ? letters : non_ws_letters;
  if (noisy_total > 0) {
    double ratio = static_cast<double>(noisy_total - noisy_letters) /
                   static_cast<double>(noisy_total);
    if (ratio > 0.5) warnings.insert(QualityWarning::Noisy);
  }

  std::vector<bool> is_short(n);
  std::size_t short_count = 0;
  for (std::size_t k = 0; k < n; ++k) {
    is_short[k] = uni::count_codepoints(lines[k]) < 100;
    if (is_short[k]) ++short_count;
  }

  // Header/Footer: strictly more than 50% short lines within the first/last
  // ceil(0.2*n) lines (window is at least one line).
  std::size_t window = static_cast<std::size_t>(
      std::ceil(0.2 * static_cast<double>(n)));
  if (window == 0) window = 1;
  std::size_t head_short = 0, tail_short = 0;
  for (std::size_t k = 0; k < window && k < n; ++k) {
    if (is_short[k]) ++head_short;
    if (is_short[n - 1 - k]) ++tail_short;
  }
  if (2 * head_short > window) warnings.insert(QualityWarning::Header);
  if (2 * tail_short > window) warnings.insert(QualityWarning::Footer);

  // ShortSentences: at least 50% of all lines short.
  if (n > 0 && 2 * short_count >= n) warnings.insert(QualityWarning::ShortSentences);

  return warnings;
}

const char* to_string(DropReason reason) {
  switch (reason) {
    case DropReason::TooShort: return "too_short";
    case DropReason::LowLangScore: return "low_lang_score";
  }
  return "?";
}

std::optional<DropReason> prefilter(const Document& doc, std::size_t min_chars,
                                    double min_lang_score) {
  if (uni::count_codepoints(doc.text) < min_chars) return DropReason::TooShort;
  if (doc.meta.language_score < min_lang_score) return DropReason::LowLangScore;
  return std::nullopt;
}

std::vector<QualityWarning> filter_quality(const std::set<QualityWarning>& warnings,
                                           const std::set<QualityWarning>& policy) {
  std::vector<QualityWarning> fatal;
  for (QualityWarning w : warnings)
    if (policy.count(w)) fatal.push_back(w);
  return fatal;
}

std::set<QualityWarning> default_quality_policy() {
  return {QualityWarning::Tiny, QualityWarning::Noisy, QualityWarning::Header,
          QualityWarning::Footer, QualityWarning::ShortSentences};
}

bool filter_harmful_drops(double harmful_ppl, double threshold) {
  if (!std::isfinite(harmful_ppl))
    throw ValidationError("harmful perplexity is not finite");
  return harmful_ppl < threshold;
}

}  // namespace corpusprep
