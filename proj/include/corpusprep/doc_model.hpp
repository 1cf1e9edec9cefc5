#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace corpusprep {

// Five Ungoliant-style document quality warnings.
enum class QualityWarning { Tiny, Noisy, Header, Footer, ShortSentences };

const char* to_string(QualityWarning w);
std::optional<QualityWarning> quality_warning_from_string(const std::string& name);

struct Metadata {
  std::string docid;  // "corpus/language/fileno/docno"
  std::optional<std::string> url;
  std::optional<std::string> title;
  std::string download_date;  // YYYY-MM-DD
  std::string language;       // 2-3 letter ISO 639 code, or "xx"
  double language_score = 0.0;
  // Unknown meta keys seen on parse, preserved verbatim and re-emitted
  // after the known keys.
  std::vector<std::pair<std::string, std::string>> extra;  // key -> raw JSON value

  bool operator==(const Metadata&) const = default;
};

struct Document {
  Metadata meta;
  std::string text;

  bool operator==(const Document&) const = default;
};

// Per-line language evidence attached by the langid stage.
struct LineLanguage {
  std::string language;
  double confidence = 0.0;
  std::size_t byte_len = 0;

  bool operator==(const LineLanguage&) const = default;
};

struct Annotations {
  std::set<QualityWarning> warnings;
  std::optional<double> harmful_ppl;  // strictly positive and finite when present
  std::optional<std::vector<LineLanguage>> line_languages;
};

// Components of a docid; ordering is tuple order, fileno/docno numeric.
struct DocidParts {
  std::string corpus;
  std::string language;
  std::uint64_t fileno = 0;
  std::uint64_t docno = 0;

  auto tuple() const { return std::tie(corpus, language, fileno, docno); }
  bool operator<(const DocidParts& o) const { return tuple() < o.tuple(); }
  bool operator==(const DocidParts& o) const { return tuple() == o.tuple(); }
};

std::string make_docid(const std::string& corpus, const std::string& language,
                       std::uint64_t fileno, std::uint64_t docno);

// Throws ValidationError if the docid does not have four segments with
// numeric fileno/docno.
DocidParts parse_docid(const std::string& docid);

// Tuple-order comparison of two docids: (corpus, language, fileno, docno),
// not lexicographic text order. Docids that fail to parse sort by raw text.
bool docid_less(const std::string& a, const std::string& b);

// One JSONL line, keys in schema order, absent optionals omitted,
// deterministic bytes. No trailing newline.
std::string serialize_document(const Document& doc);

Document parse_document(const std::string& line);

struct Violation {
  std::string field;
  std::string rule;
};

// Total function: empty result iff all Metadata invariants hold.
std::vector<Violation> validate_metadata(const Document& doc);

}  // namespace corpusprep
