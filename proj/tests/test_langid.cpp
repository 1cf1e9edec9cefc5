#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "corpusprep/error.hpp"
#include "corpusprep/fixtures.hpp"
#include "corpusprep/langid.hpp"

using namespace corpusprep;
namespace fs = std::filesystem;

namespace {

// Train/held-out splits from the bundled generators, disjoint seeds.
LidModel fixture_model() {
  static LidModel model = LidModel::train({
      {"en", fixtures::language_sample("en", 20000, 1)},
      {"de", fixtures::language_sample("de", 20000, 2)},
      {"fr", fixtures::language_sample("fr", 20000, 3)},
  });
  return model;
}

std::vector<std::string> sample_lines(const std::string& language, std::uint64_t seed,
                                      std::size_t max_lines) {
  std::string text = fixtures::language_sample(language, 20000, seed);
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line) && lines.size() < max_lines)
    if (!line.empty()) lines.push_back(line);
  return lines;
}

LineLabel line(const std::string& language, double confidence, std::size_t bytes) {
  return LineLabel{language, confidence, bytes};
}

}  // namespace

TEST_CASE("training preconditions") {
  CHECK_THROWS_AS(LidModel::train({{"en", fixtures::language_sample("en", 20000, 1)}}),
                  ValidationError);
  CHECK_THROWS_AS(LidModel::train({{"en", "too short"}, {"de", "auch zu kurz"}}),
                  ValidationError);
}

TEST_CASE("held-out line accuracy is at least 95%") {
  LidModel model = fixture_model();
  std::size_t correct = 0, total = 0;
  for (const char* language : {"en", "de", "fr"}) {
    for (const auto& text_line : sample_lines(language, 100 + total, 60)) {
      LineLabel label = model.classify_line(text_line);
      ++total;
      if (label.language == language) ++correct;
    }
  }
  REQUIRE(total >= 150);
  CHECK(static_cast<double>(correct) / static_cast<double>(total) >= 0.95);
}

TEST_CASE("classify_line edge cases") {
  LidModel model = fixture_model();
  LineLabel empty = model.classify_line("");
  CHECK(empty.language == "unknown");
  CHECK(empty.confidence == 0.0);
  CHECK(empty.byte_len == 0);

  std::string sentence = "the house between the river and the garden";
  LineLabel english = model.classify_line(sentence);
  CHECK(english.language == "en");
  CHECK(english.confidence >= 0.8);
  CHECK(english.byte_len == sentence.size());
}

TEST_CASE("identical training text gives posterior near priors") {
  std::string same = fixtures::language_sample("en", 20000, 9);
  LidModel model = LidModel::train({{"aa", same}, {"bb", same}});
  LineLabel label = model.classify_line("the house between the river");
  // Equal likelihoods, equal priors: posterior 0.5 -> below 0.8 -> unknown.
  CHECK(label.language == "unknown");
  CHECK(label.confidence == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("aggregation: monolingual weighted confidence") {
  // 6 equal-size lines, all en at 0.9 -> monolingual en, confidence 0.9.
  std::vector<LineLabel> lines6(6, line("en", 0.9, 40));
  DocLangDecision decision = aggregate_line_labels(lines6);
  CHECK(decision.kind == DocLangKind::Monolingual);
  REQUIRE(decision.languages.size() == 1);
  CHECK(decision.languages[0].first == "en");
  CHECK(decision.weighted_confidence == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("aggregation: multilingual 1/(m+1) rule") {
  // 6 equal lines, 3 en + 3 de at 0.9 -> multilingual {en:0.5, de:0.5}.
  std::vector<LineLabel> lines;
  for (int i = 0; i < 3; ++i) lines.push_back(line("en", 0.9, 40));
  for (int i = 0; i < 3; ++i) lines.push_back(line("de", 0.9, 40));
  DocLangDecision decision = aggregate_line_labels(lines);
  CHECK(decision.kind == DocLangKind::Multilingual);
  REQUIRE(decision.languages.size() == 2);
  CHECK(decision.languages[0].second == doctest::Approx(0.5));
  CHECK(decision.languages[1].second == doctest::Approx(0.5));
}

TEST_CASE("aggregation: low weighted confidence becomes unknown") {
  std::vector<LineLabel> lines(6, line("en", 0.55, 40));
  DocLangDecision decision = aggregate_line_labels(lines);
  CHECK(decision.kind == DocLangKind::Unknown);
}

TEST_CASE("aggregation: proportion floor failure falls back to monolingual") {
  // en dominates; de at 10% < 1/(2+1) -> not multilingual.
  std::vector<LineLabel> lines;
  for (int i = 0; i < 9; ++i) lines.push_back(line("en", 0.95, 40));
  lines.push_back(line("de", 0.95, 40));
  DocLangDecision decision = aggregate_line_labels(lines);
  CHECK(decision.kind == DocLangKind::Monolingual);
  CHECK(decision.languages[0].first == "en");
}

TEST_CASE("aggregation: too much unknown blocks multilingual") {
  std::vector<LineLabel> lines;
  for (int i = 0; i < 2; ++i) lines.push_back(line("en", 0.9, 40));
  for (int i = 0; i < 2; ++i) lines.push_back(line("de", 0.9, 40));
  for (int i = 0; i < 2; ++i) lines.push_back(line("unknown", 0.3, 40));
  // unknown proportion 1/3 > 1/(2+1)? equal; rule is "not larger than".
  DocLangDecision decision = aggregate_line_labels(lines);
  CHECK(decision.kind == DocLangKind::Multilingual);

  lines.push_back(line("unknown", 0.3, 40));  // unknown now 3/7 > 1/3
  decision = aggregate_line_labels(lines);
  CHECK(decision.kind != DocLangKind::Multilingual);
}

TEST_CASE("aggregation: fewer than 5 lines cannot be multilingual") {
  std::vector<LineLabel> lines;
  lines.push_back(line("en", 0.9, 40));
  lines.push_back(line("en", 0.9, 40));
  lines.push_back(line("de", 0.9, 40));
  lines.push_back(line("de", 0.9, 40));
  DocLangDecision decision = aggregate_line_labels(lines);
  CHECK(decision.kind != DocLangKind::Multilingual);
  // Monolingual fallback: best weighted confidence is 0.45 < 0.6 -> Unknown.
  CHECK(decision.kind == DocLangKind::Unknown);

  // Same split with a dominant language stays monolingual.
  std::vector<LineLabel> dominant;
  dominant.push_back(line("en", 0.95, 100));
  dominant.push_back(line("en", 0.95, 100));
  dominant.push_back(line("en", 0.95, 100));
  dominant.push_back(line("de", 0.95, 20));
  DocLangDecision mono = aggregate_line_labels(dominant);
  CHECK(mono.kind == DocLangKind::Monolingual);
  CHECK(mono.languages[0].first == "en");
}

TEST_CASE("aggregation: byte proportions sum to one") {
  std::vector<LineLabel> lines;
  lines.push_back(line("en", 0.9, 10));
  lines.push_back(line("de", 0.9, 30));
  lines.push_back(line("fr", 0.9, 25));
  lines.push_back(line("unknown", 0.4, 15));
  lines.push_back(line("en", 0.9, 20));
  double total = 100.0;
  double lang_sum = 0.0;
  DocLangDecision decision = aggregate_line_labels(lines);
  for (const auto& [language, proportion] : decision.languages) lang_sum += proportion;
  double unknown = 15.0 / total;
  CHECK(lang_sum + unknown == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("multilingual decisions respect the proportion floor") {
  std::mt19937_64 rng(4096);
  const char* codes[] = {"en", "de", "fr", "es", "it", "pt", "unknown"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::size_t n = 1 + rng() % 12;
    std::vector<LineLabel> lines;
    for (std::size_t i = 0; i < n; ++i)
      lines.push_back(line(codes[rng() % 7], 0.8 + 0.2 * static_cast<double>(rng() % 100) / 100.0,
                           1 + rng() % 200));
    DocLangDecision decision = aggregate_line_labels(lines);
    if (decision.kind != DocLangKind::Multilingual) continue;
    std::size_t m = decision.languages.size();
    CHECK(m >= 2);
    CHECK(m <= 5);
    double floor = 1.0 / (static_cast<double>(m) + 1.0);
    for (const auto& [language, proportion] : decision.languages)
      CHECK(proportion >= floor - 1e-12);
  }
}

TEST_CASE("apply_language fills metadata and re-mints the docid") {
  Document doc;
  doc.meta.docid = "2024-22/xx/0/7";
  doc.meta.download_date = "2024-04-01";
  doc.meta.language = "xx";
  doc.meta.language_score = 0.0;
  doc.text = "whatever";

  DocLangDecision mono;
  mono.kind = DocLangKind::Monolingual;
  mono.languages = {{"en", 1.0}};
  mono.weighted_confidence = 0.9;
  Document tagged = apply_language(doc, mono);
  CHECK(tagged.meta.language == "en");
  CHECK(tagged.meta.language_score == 0.9);
  CHECK(tagged.meta.docid == "2024-22/en/0/7");

  DocLangDecision multi;
  multi.kind = DocLangKind::Multilingual;
  multi.languages = {{"de", 0.6}, {"fr", 0.4}};
  tagged = apply_language(doc, multi);
  CHECK(tagged.meta.language == "de");
  CHECK(tagged.meta.language_score == 0.6);

  DocLangDecision unknown;
  unknown.kind = DocLangKind::Unknown;
  tagged = apply_language(doc, unknown);
  CHECK(tagged.meta.language == "und");
  CHECK(tagged.meta.language_score == 0.0);
  CHECK(tagged.meta.docid == "2024-22/und/0/7");
}

TEST_CASE("classify_document matches per-line aggregation") {
  LidModel model = fixture_model();
  std::string text;
  for (const auto& l : sample_lines("en", 500, 3)) text += l + "\n";
  for (const auto& l : sample_lines("de", 501, 3)) text += l + "\n";
  DocLangDecision direct = model.classify_document(text);
  DocLangDecision via_lines = aggregate_line_labels(model.label_lines(text));
  CHECK(direct.kind == via_lines.kind);
  CHECK(direct.languages == via_lines.languages);
}

TEST_CASE("training is deterministic down to the model bytes") {
  auto corpus = std::map<std::string, std::string>{
      {"en", fixtures::language_sample("en", 12000, 4)},
      {"fr", fixtures::language_sample("fr", 12000, 5)},
  };
  fs::path path_a = fs::temp_directory_path() / "corpusprep_lid_det_a.bin";
  fs::path path_b = fs::temp_directory_path() / "corpusprep_lid_det_b.bin";
  LidModel::train(corpus).save(path_a);
  LidModel::train(corpus).save(path_b);
  std::ifstream in_a(path_a, std::ios::binary), in_b(path_b, std::ios::binary);
  std::ostringstream buf_a, buf_b;
  buf_a << in_a.rdbuf();
  buf_b << in_b.rdbuf();
  CHECK(buf_a.str() == buf_b.str());
  CHECK(!buf_a.str().empty());
  fs::remove(path_a);
  fs::remove(path_b);
}

TEST_CASE("model save/load round trip preserves decisions") {
  LidModel model = fixture_model();
  fs::path path = fs::temp_directory_path() / "corpusprep_test_lid.bin";
  model.save(path);
  LidModel loaded = LidModel::load(path);
  for (const char* language : {"en", "de", "fr"}) {
    for (const auto& text_line : sample_lines(language, 900, 10)) {
      LineLabel a = model.classify_line(text_line);
      LineLabel b = loaded.classify_line(text_line);
      CHECK(a.language == b.language);
      CHECK(a.confidence == doctest::Approx(b.confidence).epsilon(1e-12));
    }
  }
  fs::remove(path);
}
