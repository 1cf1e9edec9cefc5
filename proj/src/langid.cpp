#include "corpusprep/langid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "corpusprep/error.hpp"
#include "corpusprep/unicode.hpp"

namespace corpusprep {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = kFnvOffset) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t mix(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Hashes of all character 1..3-grams over the code points of `text`.
void for_each_gram(std::string_view text, const std::function<void(std::uint64_t)>& fn) {
  // Byte offsets of code point boundaries.
  std::vector<std::size_t> bounds;
  bounds.reserve(text.size() + 1);
  std::size_t i = 0;
  bounds.push_back(0);
  while (i < text.size()) {
    unicode::next_codepoint(text, i);
    bounds.push_back(i);
  }
  std::size_t cps = bounds.size() - 1;
  for (std::size_t start = 0; start < cps; ++start) {
    for (std::size_t n = 1; n <= 3 && start + n <= cps; ++n) {
      std::size_t from = bounds[start];
      std::size_t to = bounds[start + n];
      std::uint64_t h = fnv1a(text.data() + from, to - from, kFnvOffset ^ (n * 0x100000001b3ull));
      fn(mix(h));
    }
  }
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(out, bits);
}

double read_f64(std::istream& in) {
  std::uint64_t bits = read_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  std::uint64_t n = read_u64(in);
  if (!in || n > (1ull << 32))
    throw ParseError("model file corrupt: implausible string length");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

constexpr char kLidMagic[8] = {'C', 'P', 'L', 'I', 'D', '\0', '\0', '\1'};

}  // namespace

void NgramTable::grow() {
  std::size_t new_cap = used_.empty() ? 1024 : used_.size() * 2;
  std::vector<std::uint64_t> old_keys = std::move(keys_);
  std::vector<double> old_values = std::move(values_);
  std::vector<bool> old_used = std::move(used_);
  keys_.assign(new_cap, 0);
  values_.assign(new_cap, 0.0);
  used_.assign(new_cap, false);
  size_ = 0;
  for (std::size_t i = 0; i < old_used.size(); ++i)
    if (old_used[i]) add(old_keys[i], old_values[i]);
}

std::size_t NgramTable::slot_for(std::uint64_t key) const {
  std::size_t mask = used_.size() - 1;
  std::size_t slot = mix(key) & mask;
  while (used_[slot] && keys_[slot] != key) slot = (slot + 1) & mask;
  return slot;
}

void NgramTable::add(std::uint64_t key, double delta) {
  if (used_.empty() || size_ * 10 >= used_.size() * 7) grow();
  std::size_t slot = slot_for(key);
  if (!used_[slot]) {
    used_[slot] = true;
    keys_[slot] = key;
    values_[slot] = 0.0;
    ++size_;
  }
  values_[slot] += delta;
}

double NgramTable::get(std::uint64_t key) const {
  if (used_.empty()) return 0.0;
  std::size_t slot = slot_for(key);
  return used_[slot] ? values_[slot] : 0.0;
}

std::vector<std::pair<std::uint64_t, double>> NgramTable::sorted_entries() const {
  std::vector<std::pair<std::uint64_t, double>> entries;
  entries.reserve(size_);
  for (std::size_t i = 0; i < used_.size(); ++i)
    if (used_[i]) entries.emplace_back(keys_[i], values_[i]);
  std::sort(entries.begin(), entries.end());
  return entries;
}

NgramTable NgramTable::from_entries(const std::vector<std::pair<std::uint64_t, double>>& entries) {
  NgramTable t;
  for (const auto& [k, v] : entries) t.add(k, v);
  return t;
}

LidModel LidModel::train(const std::map<std::string, std::string>& corpus, double alpha) {
  if (corpus.size() < 2)
    throw ValidationError("lid training needs at least 2 languages, got " +
                          std::to_string(corpus.size()));
  for (const auto& [lang, text] : corpus)
    if (unicode::count_codepoints(text) < 10000)
      throw ValidationError("lid training text for '" + lang +
                            "' is under 10,000 characters");

  LidModel model;
  model.alpha_ = alpha;
  std::set<std::uint64_t> vocabulary;
  double grand_total = 0.0;
  for (const auto& [lang, text] : corpus) {
    LangProfile profile;
    profile.language = lang;
    for_each_gram(text, [&](std::uint64_t h) {
      profile.counts.add(h, 1.0);
      profile.total_count += 1.0;
      vocabulary.insert(h);
    });
    grand_total += profile.total_count;
    model.profiles_.push_back(std::move(profile));
  }
  for (auto& profile : model.profiles_) profile.prior = profile.total_count / grand_total;
  model.vocabulary_size_ = vocabulary.size();
  return model;
}

LineLabel LidModel::classify_line(std::string_view line) const {
  LineLabel label{"unknown", 0.0, line.size()};
  if (line.empty()) return label;

  std::vector<std::uint64_t> grams;
  for_each_gram(line, [&](std::uint64_t h) { grams.push_back(h); });
  if (grams.empty()) return label;

  std::vector<double> scores(profiles_.size());
  double v = static_cast<double>(vocabulary_size_) + 1.0;
  for (std::size_t p = 0; p < profiles_.size(); ++p) {
    const LangProfile& profile = profiles_[p];
    double denom = std::log(profile.total_count + alpha_ * v);
    double score = std::log(profile.prior);
    for (std::uint64_t g : grams)
      score += std::log(profile.counts.get(g) + alpha_) - denom;
    scores[p] = score;
  }
  double max_score = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - max_score);
  std::size_t best = 0;
  for (std::size_t p = 1; p < profiles_.size(); ++p)
    if (scores[p] > scores[best]) best = p;
  double posterior = std::exp(scores[best] - max_score) / z;

  label.confidence = posterior;
  if (posterior >= kLineConfidenceThreshold) label.language = profiles_[best].language;
  return label;
}

std::vector<LineLabel> LidModel::label_lines(std::string_view text) const {
  std::vector<LineLabel> labels;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    std::string_view line = nl == std::string_view::npos
                                ? text.substr(start)
                                : text.substr(start, nl - start);
    if (!line.empty()) labels.push_back(classify_line(line));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return labels;
}

DocLangDecision aggregate_line_labels(const std::vector<LineLabel>& lines) {
  DocLangDecision decision;
  double total_bytes = 0.0;
  for (const auto& line : lines) total_bytes += static_cast<double>(line.byte_len);
  if (total_bytes <= 0.0) {
    decision.kind = DocLangKind::Unknown;
    return decision;
  }

  std::map<std::string, double> lang_bytes;          // non-unknown
  std::map<std::string, double> lang_weighted;       // bytes * confidence
  double unknown_bytes = 0.0;
  for (const auto& line : lines) {
    double b = static_cast<double>(line.byte_len);
    if (line.language == "unknown") {
      unknown_bytes += b;
    } else {
      lang_bytes[line.language] += b;
      lang_weighted[line.language] += b * line.confidence;
    }
  }

  std::size_t m = lang_bytes.size();
  bool multilingual = lines.size() >= 5 && m >= 2 && m <= 5;
  if (multilingual) {
    double floor = 1.0 / (static_cast<double>(m) + 1.0);
    for (const auto& [lang, bytes] : lang_bytes)
      if (bytes / total_bytes < floor) multilingual = false;
    if (unknown_bytes / total_bytes > floor) multilingual = false;
  }

  if (multilingual) {
    decision.kind = DocLangKind::Multilingual;
    for (const auto& [lang, bytes] : lang_bytes)
      decision.languages.emplace_back(lang, bytes / total_bytes);
    std::sort(decision.languages.begin(), decision.languages.end(),
              [](const auto& a, const auto& b) {
                return a.second != b.second ? a.second > b.second : a.first < b.first;
              });
    return decision;
  }

  // Monolingual: the language with the highest weighted confidence.
  std::string best_lang;
  double best_weighted = -1.0;
  for (const auto& [lang, weighted] : lang_weighted) {
    double wc = weighted / total_bytes;
    if (wc > best_weighted) {
      best_weighted = wc;
      best_lang = lang;
    }
  }
  if (best_lang.empty() || best_weighted < LidModel::kDocConfidenceThreshold) {
    decision.kind = DocLangKind::Unknown;
    decision.weighted_confidence = std::max(best_weighted, 0.0);
    if (!best_lang.empty())
      decision.languages.emplace_back(best_lang, lang_bytes[best_lang] / total_bytes);
    return decision;
  }
  decision.kind = DocLangKind::Monolingual;
  decision.weighted_confidence = best_weighted;
  decision.languages.emplace_back(best_lang, lang_bytes[best_lang] / total_bytes);
  return decision;
}

DocLangDecision LidModel::classify_document(std::string_view text) const {
  return aggregate_line_labels(label_lines(text));
}

Document apply_language(const Document& doc, const DocLangDecision& decision) {
  Document out = doc;
  switch (decision.kind) {
    case DocLangKind::Monolingual:
      out.meta.language = decision.languages.front().first;
      out.meta.language_score = decision.weighted_confidence;
      break;
    case DocLangKind::Multilingual:
      out.meta.language = decision.languages.front().first;
      out.meta.language_score = decision.languages.front().second;
      break;
    case DocLangKind::Unknown:
      out.meta.language = "und";
      out.meta.language_score = 0.0;
      break;
  }
  try {
    DocidParts parts = parse_docid(doc.meta.docid);
    out.meta.docid = make_docid(parts.corpus, out.meta.language, parts.fileno, parts.docno);
  } catch (const ValidationError&) {
    // Leave non-conforming docids untouched.
  }
  return out;
}

void LidModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kLidMagic, sizeof(kLidMagic));
  write_f64(out, alpha_);
  write_u64(out, vocabulary_size_);
  write_u64(out, profiles_.size());
  for (const auto& profile : profiles_) {
    write_string(out, profile.language);
    write_f64(out, profile.prior);
    write_f64(out, profile.total_count);
    auto entries = profile.counts.sorted_entries();
    write_u64(out, entries.size());
    for (const auto& [k, v] : entries) {
      write_u64(out, k);
      write_f64(out, v);
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

LidModel LidModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kLidMagic, 8) != 0)
    throw ParseError("not a lid model file: " + path.string());
  LidModel model;
  model.alpha_ = read_f64(in);
  model.vocabulary_size_ = read_u64(in);
  std::uint64_t n_profiles = read_u64(in);
  for (std::uint64_t p = 0; p < n_profiles; ++p) {
    LangProfile profile;
    profile.language = read_string(in);
    profile.prior = read_f64(in);
    profile.total_count = read_f64(in);
    std::uint64_t n_entries = read_u64(in);
    std::vector<std::pair<std::uint64_t, double>> entries;
    entries.reserve(n_entries);
    for (std::uint64_t i = 0; i < n_entries; ++i) {
      std::uint64_t k = read_u64(in);
      double v = read_f64(in);
      entries.emplace_back(k, v);
    }
    profile.counts = NgramTable::from_entries(entries);
    model.profiles_.push_back(std::move(profile));
  }
  if (!in) throw ParseError("lid model file truncated: " + path.string());
  return model;
}

}  // namespace corpusprep
