#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace corpusprep {

// Content normalization shared by both pipelines: NFKC, HTML tag removal,
// entity decoding, whitespace cleanup. Idempotent on its own output.
std::string normalize_content(std::string_view text);

bool is_idempotent_check(std::string_view text);

// CCNet-style normalization applied before language-model scoring:
// lowercase, digits to zero, accents and punctuation stripped, then
// whitespace tokenization.
std::vector<std::string> normalize_for_lm(std::string_view text);

}  // namespace corpusprep
