#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "corpusprep/doc_model.hpp"

namespace corpusprep {

// Open-addressing hash table from 64-bit n-gram hash to count.
// Two grams sharing a 64-bit hash share a bucket; the classifier
// tolerates that.
class NgramTable {
 public:
  NgramTable() = default;

  void add(std::uint64_t key, double delta);
  double get(std::uint64_t key) const;
  std::size_t size() const { return size_; }

  // Deterministic (sorted by key) view for serialization.
  std::vector<std::pair<std::uint64_t, double>> sorted_entries() const;
  static NgramTable from_entries(const std::vector<std::pair<std::uint64_t, double>>& entries);

 private:
  void grow();
  std::size_t slot_for(std::uint64_t key) const;

  std::vector<std::uint64_t> keys_;
  std::vector<double> values_;
  std::vector<bool> used_;
  std::size_t size_ = 0;
};

struct LangProfile {
  std::string language;
  NgramTable counts;       // hashed char 1..3-gram counts
  double total_count = 0;  // sum of counts
  double prior = 0;        // training-share prior in (0,1]
};

struct LineLabel {
  std::string language;  // "unknown" when confidence < threshold
  double confidence = 0.0;
  std::size_t byte_len = 0;
};

enum class DocLangKind { Monolingual, Multilingual, Unknown };

struct DocLangDecision {
  DocLangKind kind = DocLangKind::Unknown;
  // (language, byte proportion), sorted by descending proportion then code.
  std::vector<std::pair<std::string, double>> languages;
  double weighted_confidence = 0.0;  // monolingual only
};

// Character n-gram multinomial classifier with add-alpha smoothing.
class LidModel {
 public:
  static constexpr double kDefaultAlpha = 0.5;
  static constexpr double kLineConfidenceThreshold = 0.8;
  static constexpr double kDocConfidenceThreshold = 0.6;

  // corpus: language code -> training text (>= 2 languages, each >= 10,000 chars).
  static LidModel train(const std::map<std::string, std::string>& corpus,
                        double alpha = kDefaultAlpha);

  LineLabel classify_line(std::string_view line) const;
  DocLangDecision classify_document(std::string_view text) const;

  // Raw per-line labels for annotation (one per non-empty line).
  std::vector<LineLabel> label_lines(std::string_view text) const;

  void save(const std::filesystem::path& path) const;
  static LidModel load(const std::filesystem::path& path);

  const std::vector<LangProfile>& profiles() const { return profiles_; }
  double alpha() const { return alpha_; }

 private:
  std::vector<LangProfile> profiles_;
  double alpha_ = kDefaultAlpha;
  std::uint64_t vocabulary_size_ = 0;  // distinct grams across all languages
};

// OSCAR 22.01 document-level aggregation over per-line labels.
DocLangDecision aggregate_line_labels(const std::vector<LineLabel>& lines);

// Writes the decision into the document metadata (language, language_score)
// and re-mints the docid language segment to match.
Document apply_language(const Document& doc, const DocLangDecision& decision);

}  // namespace corpusprep
