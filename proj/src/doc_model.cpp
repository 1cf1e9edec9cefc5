#include "corpusprep/doc_model.hpp"

#include <array>
#include <charconv>
#include <sstream>

#include "corpusprep/error.hpp"
#include "corpusprep/unicode.hpp"
#include "json.hpp"

namespace corpusprep {

using ordered_json = nlohmann::ordered_json;

const char* to_string(QualityWarning w) {
  switch (w) {
    case QualityWarning::Tiny: return "tiny";
    case QualityWarning::Noisy: return "noisy";
    case QualityWarning::Header: return "header";
    case QualityWarning::Footer: return "footer";
    case QualityWarning::ShortSentences: return "short_sentences";
  }
  return "?";
}

std::optional<QualityWarning> quality_warning_from_string(const std::string& name) {
  static const std::array<QualityWarning, 5> all = {
      QualityWarning::Tiny, QualityWarning::Noisy, QualityWarning::Header,
      QualityWarning::Footer, QualityWarning::ShortSentences};
  for (QualityWarning w : all)
    if (name == to_string(w)) return w;
  return std::nullopt;
}

std::string make_docid(const std::string& corpus, const std::string& language,
                       std::uint64_t fileno, std::uint64_t docno) {
  if (corpus.empty()) throw ValidationError("make_docid: corpus must be non-empty");
  if (corpus.find('\n') != std::string::npos)
    throw ValidationError("make_docid: corpus must not contain newlines");
  if (language.empty()) throw ValidationError("make_docid: language must be non-empty");
  std::ostringstream out;
  out << corpus << '/' << language << '/' << fileno << '/' << docno;
  return out.str();
}

namespace {

bool parse_u64(const std::string& s, std::uint64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string> split_segments(const std::string& docid) {
  std::vector<std::string> segments;
  std::size_t start = 0;
  while (true) {
    std::size_t slash = docid.find('/', start);
    if (slash == std::string::npos) {
      segments.push_back(docid.substr(start));
      break;
    }
    segments.push_back(docid.substr(start, slash - start));
    start = slash + 1;
  }
  return segments;
}

}  // namespace

DocidParts parse_docid(const std::string& docid) {
  auto segments = split_segments(docid);
  if (segments.size() != 4)
    throw ValidationError("docid must have four slash-separated segments: " + docid);
  for (const auto& seg : segments)
    if (seg.empty()) throw ValidationError("docid has an empty segment: " + docid);
  DocidParts parts;
  parts.corpus = segments[0];
  parts.language = segments[1];
  if (!parse_u64(segments[2], parts.fileno))
    throw ValidationError("docid fileno is not a non-negative integer: " + docid);
  if (!parse_u64(segments[3], parts.docno))
    throw ValidationError("docid docno is not a non-negative integer: " + docid);
  return parts;
}

bool docid_less(const std::string& a, const std::string& b) {
  try {
    return parse_docid(a) < parse_docid(b);
  } catch (const ValidationError&) {
    return a < b;
  }
}

namespace {

bool valid_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (s[i] < '0' || s[i] > '9') return false;
  int year = std::stoi(s.substr(0, 4));
  int month = std::stoi(s.substr(5, 2));
  int day = std::stoi(s.substr(8, 2));
  if (month < 1 || month > 12 || day < 1) return false;
  static const int days_in_month[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int max_day = days_in_month[month - 1];
  bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  if (month == 2 && leap) max_day = 29;
  return day <= max_day;
}

bool valid_language_code(const std::string& s) {
  if (s.size() < 2 || s.size() > 3) return false;
  for (char c : s)
    if (c < 'a' || c > 'z') return false;
  return true;
}

}  // namespace

std::vector<Violation> validate_metadata(const Document& doc) {
  std::vector<Violation> violations;
  const Metadata& m = doc.meta;
  try {
    parse_docid(m.docid);
  } catch (const ValidationError& e) {
    violations.push_back({"docid", e.what()});
  }
  if (!valid_date(m.download_date))
    violations.push_back({"download_date", "must be a valid YYYY-MM-DD date: '" +
                                               m.download_date + "'"});
  if (!valid_language_code(m.language))
    violations.push_back(
        {"language", "must be a 2-3 letter lowercase code or 'xx': '" + m.language + "'"});
  if (!(m.language_score >= 0.0 && m.language_score <= 1.0))
    violations.push_back({"language_score", "must be in [0,1]"});
  return violations;
}

std::string serialize_document(const Document& doc) {
  auto violations = validate_metadata(doc);
  if (!violations.empty()) {
    std::string msg = "document fails validation:";
    for (const auto& v : violations) msg += " " + v.field + " (" + v.rule + ")";
    throw ValidationError(msg);
  }
  ordered_json meta;
  meta["docid"] = doc.meta.docid;
  if (doc.meta.url) meta["url"] = *doc.meta.url;
  if (doc.meta.title) meta["title"] = *doc.meta.title;
  meta["download_date"] = doc.meta.download_date;
  meta["language"] = doc.meta.language;
  meta["language_score"] = doc.meta.language_score;
  for (const auto& [key, raw] : doc.meta.extra)
    meta[key] = ordered_json::parse(raw);
  ordered_json root;
  root["meta"] = std::move(meta);
  root["text"] = doc.text;
  try {
    return root.dump();
  } catch (const ordered_json::type_error& e) {
    throw ValidationError(std::string("text: not serializable as UTF-8 JSON (") + e.what() + ")");
  }
}

Document parse_document(const std::string& line) {
  ordered_json root;
  try {
    root = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError("JSONL parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!root.is_object()) throw ValidationError("JSONL record is not an object");
  if (!root.contains("text") || !root["text"].is_string())
    throw ValidationError("record missing required string field 'text'");
  if (!root.contains("meta") || !root["meta"].is_object())
    throw ValidationError("record missing required object field 'meta'");
  const auto& meta = root["meta"];
  if (!meta.contains("docid") || !meta["docid"].is_string())
    throw ValidationError("record missing required field 'meta.docid'");

  Document doc;
  doc.text = root["text"].get<std::string>();
  for (auto it = meta.begin(); it != meta.end(); ++it) {
    const std::string& key = it.key();
    if (key == "docid") {
      doc.meta.docid = it.value().get<std::string>();
    } else if (key == "url" && it.value().is_string()) {
      doc.meta.url = it.value().get<std::string>();
    } else if (key == "title" && it.value().is_string()) {
      doc.meta.title = it.value().get<std::string>();
    } else if (key == "download_date" && it.value().is_string()) {
      doc.meta.download_date = it.value().get<std::string>();
    } else if (key == "language" && it.value().is_string()) {
      doc.meta.language = it.value().get<std::string>();
    } else if (key == "language_score" && it.value().is_number()) {
      doc.meta.language_score = it.value().get<double>();
    } else {
      doc.meta.extra.emplace_back(key, it.value().dump());
    }
  }
  return doc;
}

}  // namespace corpusprep
