#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "corpusprep/doc_model.hpp"

namespace corpusprep {

struct QualityOptions {
  // Whether whitespace counts as non-letter in the noisy ratio.
  bool whitespace_in_noisy = true;
};

// Ungoliant-style quality warnings over normalized text. Lines are
// '\n'-split segments; thresholds are line-based.
std::set<QualityWarning> annotate_quality(std::string_view text,
                                          const QualityOptions& options = {});

enum class DropReason { TooShort, LowLangScore };

const char* to_string(DropReason reason);

// Early removal: fewer than min_chars characters or language_score below
// min_lang_score. Returns the drop reason, or nullopt to keep.
std::optional<DropReason> prefilter(const Document& doc, std::size_t min_chars = 200,
                                    double min_lang_score = 0.5);

// Drop iff warnings intersect the fatal policy; returns the intersection
// (empty means keep).
std::vector<QualityWarning> filter_quality(const std::set<QualityWarning>& warnings,
                                           const std::set<QualityWarning>& policy);

std::set<QualityWarning> default_quality_policy();

// Drop iff harmful_ppl is strictly below the threshold. Throws on
// non-finite perplexity.
bool filter_harmful_drops(double harmful_ppl, double threshold = 5.0);

}  // namespace corpusprep
