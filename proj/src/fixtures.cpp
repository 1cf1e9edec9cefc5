#include "corpusprep/fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "corpusprep/dedup.hpp"
#include "corpusprep/doc_model.hpp"
#include "corpusprep/error.hpp"
#include "json.hpp"

namespace corpusprep::fixtures {

namespace {

const std::map<std::string, std::vector<std::string>>& word_pools() {
  static const std::map<std::string, std::vector<std::string>> pools = {
      {"en",
       {"the", "house", "river", "between", "morning", "light", "people", "would",
        "through", "city", "garden", "window", "because", "thought", "letter",
        "winter", "street", "children", "evening", "history", "question", "answer",
        "mountain", "weather", "yellow", "water", "market", "village", "father",
        "mother", "library", "bridge", "station", "found", "nothing", "always",
        "together", "small", "world", "under", "about", "worked", "school",
        "teacher", "early", "never", "return", "summer", "night", "silence"}},
      {"de",
       {"der", "die", "das", "haus", "fluss", "zwischen", "morgen", "licht",
        "menschen", "würde", "durch", "stadt", "garten", "fenster", "weil",
        "gedanke", "brief", "winter", "straße", "kinder", "abend", "geschichte",
        "frage", "antwort", "berg", "wetter", "gelb", "wasser", "markt", "dorf",
        "vater", "mutter", "bücherei", "brücke", "bahnhof", "gefunden", "nichts",
        "immer", "zusammen", "klein", "welt", "unter", "über", "gearbeitet",
        "schule", "lehrer", "früh", "niemals", "zurück", "sommer", "nacht",
        "stille", "schön", "müde", "größer"}},
      {"fr",
       {"le", "la", "maison", "rivière", "entre", "matin", "lumière", "gens",
        "serait", "travers", "ville", "jardin", "fenêtre", "parce", "pensée",
        "lettre", "hiver", "rue", "enfants", "soir", "histoire", "question",
        "réponse", "montagne", "météo", "jaune", "eau", "marché", "village",
        "père", "mère", "bibliothèque", "pont", "gare", "trouvé", "rien",
        "toujours", "ensemble", "petit", "monde", "sous", "travaillé", "école",
        "professeur", "tôt", "jamais", "retour", "été", "nuit", "silence",
        "déjà", "après", "château"}},
  };
  return pools;
}

const std::map<std::string, std::vector<std::string>>& topic_pools() {
  static const std::map<std::string, std::vector<std::string>> pools = {
      {"spam",
       {"jackpot", "casino", "bonus", "winner", "deposit", "spins", "free",
        "claim", "prize", "lucky", "bet", "cash", "instant", "payout", "vip",
        "slots", "poker", "roulette", "signup", "offer", "limited", "exclusive",
        "wager", "reward", "coins", "play", "now", "double", "triple", "win"}},
      {"reference",
       {"university", "library", "history", "science", "museum", "research",
        "article", "century", "published", "archive", "professor", "journal",
        "theory", "analysis", "chapter", "volume", "edition", "institute",
        "lecture", "academy", "study", "review", "author", "document",
        "collection", "society", "report", "survey", "method", "evidence"}},
  };
  return pools;
}

// mt19937_64 raw draws with modulo keep fixtures identical across
// platforms; std::uniform_int_distribution is not bit-stable.
std::size_t draw(std::mt19937_64& rng, std::size_t bound) {
  return static_cast<std::size_t>(rng() % bound);
}

std::string sample_from_pool(const std::vector<std::string>& pool, std::size_t min_chars,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::string out;
  while (out.size() < min_chars) {
    std::size_t len = 9 + draw(rng, 7);
    std::string line;
    for (std::size_t w = 0; w < len; ++w) {
      if (!line.empty()) line += ' ';
      line += pool[draw(rng, pool.size())];
    }
    out += line;
    out += '\n';
  }
  return out;
}

// One synthetic document: n_lines lines of ~line_words words each.
std::vector<std::string> make_doc_tokens(const std::vector<std::string>& pool,
                                         std::mt19937_64& rng, std::size_t n_tokens) {
  std::vector<std::string> tokens(n_tokens);
  for (auto& token : tokens) token = pool[draw(rng, pool.size())];
  return tokens;
}

std::string tokens_to_text(const std::vector<std::string>& tokens, std::size_t words_per_line) {
  std::string text;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    text += tokens[i];
    if ((i + 1) % words_per_line == 0) text += '\n';
    else if (i + 1 < tokens.size()) text += ' ';
  }
  if (!text.empty() && text.back() != '\n') text += '\n';
  while (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

}  // namespace

std::vector<std::string> available_languages() {
  std::vector<std::string> languages;
  for (const auto& [language, pool] : word_pools()) languages.push_back(language);
  return languages;
}

std::string language_sample(const std::string& language, std::size_t min_chars,
                            std::uint64_t seed) {
  auto it = word_pools().find(language);
  if (it == word_pools().end())
    throw ValidationError("no bundled word pool for language '" + language + "'");
  return sample_from_pool(it->second, min_chars, seed ^ 0xC0FFEE);
}

std::string topic_sample(const std::string& topic, std::size_t min_chars, std::uint64_t seed) {
  auto it = topic_pools().find(topic);
  if (it == topic_pools().end())
    throw ValidationError("no bundled topic pool '" + topic + "'");
  return sample_from_pool(it->second, min_chars, seed ^ 0x70D1C5);
}

double exact_jaccard_oracle(const std::string& text_a, const std::string& text_b,
                            std::size_t k) {
  auto sa = shingle(text_a, k);
  auto sb = shingle(text_b, k);
  if (sa.empty() && sb.empty()) return text_a == text_b ? 1.0 : 0.0;
  std::size_t inter = 0;
  for (std::uint64_t s : sa) inter += sb.count(s);
  std::size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

SyntheticDump gen_synthetic_dump(const std::filesystem::path& out_dir, std::uint64_t seed,
                                 std::size_t n_docs, std::size_t dup_pairs,
                                 const std::vector<std::string>& languages,
                                 const std::string& dump_label, double jaccard_floor) {
  if (n_docs < dup_pairs * 2)
    throw ValidationError("gen_synthetic_dump: n_docs must be >= 2*dup_pairs");
  if (languages.empty())
    throw ValidationError("gen_synthetic_dump: need at least one language");
  for (const auto& language : languages)
    if (!word_pools().count(language))
      throw ValidationError("gen_synthetic_dump: no word pool for '" + language + "'");

  std::filesystem::create_directories(out_dir);
  std::mt19937_64 rng(seed);

  const std::size_t n_base = n_docs - dup_pairs;
  std::vector<std::vector<std::string>> doc_tokens(n_docs);
  std::vector<std::string> doc_language(n_docs);
  for (std::size_t i = 0; i < n_base; ++i) {
    doc_language[i] = languages[i % languages.size()];
    // 120+ tokens so a single-token edit cannot push shingle Jaccard
    // below a 0.9 floor; 18-word lines stay above the 100-char rule.
    doc_tokens[i] = make_doc_tokens(word_pools().at(doc_language[i]), rng, 120 + draw(rng, 81));
  }

  constexpr std::size_t kWordsPerLine = 18;
  SyntheticDump dump;
  // Near duplicates of the first dup_pairs base docs; every 5th pair exact.
  for (std::size_t p = 0; p < dup_pairs; ++p) {
    std::size_t src = p;
    std::size_t dst = n_base + p;
    doc_language[dst] = doc_language[src];
    bool exact = (p % 5 == 4);
    const auto& pool = word_pools().at(doc_language[src]);
    std::vector<std::string> perturbed = doc_tokens[src];
    double jaccard = 1.0;
    if (!exact) {
      // Start with sparse edits; back off until the floor holds.
      std::size_t edits = std::max<std::size_t>(1, perturbed.size() / 60);
      while (true) {
        perturbed = doc_tokens[src];
        for (std::size_t e = 0; e < edits; ++e)
          perturbed[draw(rng, perturbed.size())] = pool[draw(rng, pool.size())];
        jaccard = exact_jaccard_oracle(tokens_to_text(doc_tokens[src], kWordsPerLine),
                                       tokens_to_text(perturbed, kWordsPerLine));
        if (jaccard >= jaccard_floor && jaccard < 1.0) break;
        if (jaccard >= 1.0) continue;  // edits landed on identical words
        if (edits == 1) break;
        edits -= 1;
      }
    }
    doc_tokens[dst] = perturbed;
    PlantedPair pair;
    pair.docid_a = make_docid(dump_label, "xx", 0, src);
    pair.docid_b = make_docid(dump_label, "xx", 0, dst);
    pair.jaccard = exact ? 1.0 : jaccard;
    dump.pairs.push_back(pair);
  }

  // WET bytes: one warcinfo record, then one conversion record per doc.
  std::ostringstream wet;
  auto write_record = [&wet](const std::vector<std::pair<std::string, std::string>>& headers,
                             const std::string& body) {
    wet << "WARC/1.0\r\n";
    for (const auto& [name, value] : headers) wet << name << ": " << value << "\r\n";
    wet << "Content-Length: " << body.size() << "\r\n\r\n";
    wet << body << "\r\n\r\n";
  };
  write_record({{"WARC-Type", "warcinfo"}, {"WARC-Date", "2024-05-27T00:00:00Z"}},
               "software: corpusprep synthetic fixture\r\n");
  for (std::size_t i = 0; i < n_docs; ++i) {
    std::string body = tokens_to_text(doc_tokens[i], kWordsPerLine);
    write_record({{"WARC-Type", "conversion"},
                  {"WARC-Target-URI", "http://fixture.example/" + std::to_string(i)},
                  {"WARC-Date", "2024-05-27T12:00:00Z"},
                  {"WARC-Record-ID", "<urn:fixture:" + std::to_string(i) + ">"}},
                 body);
    dump.doc_languages.emplace_back(make_docid(dump_label, "xx", 0, i), doc_language[i]);
  }

  dump.wet_file = out_dir / (dump_label + ".wet");
  std::ofstream wet_out(dump.wet_file, std::ios::binary);
  if (!wet_out) throw IoError("cannot write " + dump.wet_file.string());
  wet_out << wet.str();
  wet_out.close();

  dump.manifest_file = out_dir / (dump_label + ".manifest.jsonl");
  std::ofstream manifest(dump.manifest_file, std::ios::binary);
  if (!manifest) throw IoError("cannot write " + dump.manifest_file.string());
  for (const auto& [docid, language] : dump.doc_languages) {
    nlohmann::ordered_json j;
    j["kind"] = "doc";
    j["docid"] = docid;
    j["language"] = language;
    manifest << j.dump() << "\n";
  }
  for (const auto& pair : dump.pairs) {
    nlohmann::ordered_json j;
    j["kind"] = "dup_pair";
    j["a"] = pair.docid_a;
    j["b"] = pair.docid_b;
    j["jaccard"] = pair.jaccard;
    manifest << j.dump() << "\n";
  }
  manifest.close();
  return dump;
}

}  // namespace corpusprep::fixtures
