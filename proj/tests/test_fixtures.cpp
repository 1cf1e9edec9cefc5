#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "corpusprep/error.hpp"
#include "corpusprep/fixtures.hpp"
#include "corpusprep/ingest.hpp"

using namespace corpusprep;
namespace fs = std::filesystem;

namespace {

std::string file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("corpusprep_fixture_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("exact jaccard oracle") {
  CHECK(fixtures::exact_jaccard_oracle("same words here", "same words here") == 1.0);
  CHECK(fixtures::exact_jaccard_oracle("alpha beta gamma delta epsilon",
                                       "one two three four five") == 0.0);
  // "a b c d e f" vs "b c d e f g": {abcde,bcdef} vs {bcdef,cdefg} -> 1/3.
  CHECK(fixtures::exact_jaccard_oracle("a b c d e f", "b c d e f g", 5) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(fixtures::exact_jaccard_oracle("", "") == 1.0);
  CHECK(fixtures::exact_jaccard_oracle("", "  ") == 0.0);
  // Symmetry.
  CHECK(fixtures::exact_jaccard_oracle("a b c d e f", "b c d e f g") ==
        fixtures::exact_jaccard_oracle("b c d e f g", "a b c d e f"));
}

TEST_CASE("language samples are deterministic and sizable") {
  std::string a = fixtures::language_sample("en", 10000, 3);
  std::string b = fixtures::language_sample("en", 10000, 3);
  CHECK(a == b);
  CHECK(a.size() >= 10000);
  CHECK(fixtures::language_sample("en", 1000, 3) != fixtures::language_sample("de", 1000, 3));
  CHECK_THROWS_AS(fixtures::language_sample("zz", 1000, 3), ValidationError);
}

TEST_CASE("topic samples use distinct lexicons") {
  std::string spam = fixtures::topic_sample("spam", 2000, 5);
  std::string reference = fixtures::topic_sample("reference", 2000, 5);
  CHECK(spam.find("casino") != std::string::npos);
  CHECK(reference.find("casino") == std::string::npos);
  CHECK_THROWS_AS(fixtures::topic_sample("nope", 100, 1), ValidationError);
}

TEST_CASE("synthetic dump plants the requested pairs") {
  fs::path dir = temp_dir("dump_small");
  auto dump = fixtures::gen_synthetic_dump(dir, 7, 100, 10, {"en", "de"});
  CHECK(dump.pairs.size() == 10);
  CHECK(dump.doc_languages.size() == 100);

  // Manifest lists every planted relationship.
  std::ifstream manifest(dump.manifest_file);
  std::size_t pair_lines = 0, doc_lines = 0;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.find("\"dup_pair\"") != std::string::npos) ++pair_lines;
    if (line.find("\"kind\":\"doc\"") != std::string::npos) ++doc_lines;
  }
  CHECK(pair_lines == 10);
  CHECK(doc_lines == 100);

  // The WET file parses back into exactly n_docs conversion records.
  auto docs = ingest_wet_file(dump.wet_file, DumpRef{2024, 22}, "2024-22", 0);
  CHECK(docs.size() == 100);
  fs::remove_all(dir);
}

TEST_CASE("same seed gives byte-identical fixtures") {
  fs::path dir_a = temp_dir("dump_det_a");
  fs::path dir_b = temp_dir("dump_det_b");
  auto dump_a = fixtures::gen_synthetic_dump(dir_a, 7, 60, 6, {"en"});
  auto dump_b = fixtures::gen_synthetic_dump(dir_b, 7, 60, 6, {"en"});
  CHECK(file_bytes(dump_a.wet_file) == file_bytes(dump_b.wet_file));
  CHECK(file_bytes(dump_a.manifest_file) == file_bytes(dump_b.manifest_file));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("planted pairs meet the declared jaccard floor") {
  fs::path dir = temp_dir("dump_floor");
  auto dump = fixtures::gen_synthetic_dump(dir, 11, 80, 8, {"en", "fr"}, "2023-5", 0.9);
  auto docs = ingest_wet_file(dump.wet_file, DumpRef{2023, 5}, "2023-5", 0);
  REQUIRE(docs.size() == 80);
  for (const auto& pair : dump.pairs) {
    auto a = parse_docid(pair.docid_a).docno;
    auto b = parse_docid(pair.docid_b).docno;
    double jaccard = fixtures::exact_jaccard_oracle(docs[a].text, docs[b].text);
    CHECK(jaccard == doctest::Approx(pair.jaccard).epsilon(1e-12));
    CHECK(jaccard >= 0.9);
  }
  fs::remove_all(dir);
}

TEST_CASE("infeasible parameters are rejected") {
  fs::path dir = temp_dir("dump_bad");
  CHECK_THROWS_AS(fixtures::gen_synthetic_dump(dir, 1, 10, 6, {"en"}), ValidationError);
  CHECK_THROWS_AS(fixtures::gen_synthetic_dump(dir, 1, 10, 2, {}), ValidationError);
  CHECK_THROWS_AS(fixtures::gen_synthetic_dump(dir, 1, 10, 2, {"zz"}), ValidationError);
  fs::remove_all(dir);
}
