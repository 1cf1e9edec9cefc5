#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace corpusprep::fixtures {

// Languages with bundled word pools for synthetic text generation.
std::vector<std::string> available_languages();

// Deterministic synthetic text in the given language: sentences resampled
// from a bundled word pool, one sentence per line, at least min_chars long.
std::string language_sample(const std::string& language, std::size_t min_chars,
                            std::uint64_t seed);

// Topic-skewed samples driving the harmful-perplexity fixtures. The
// "spam" pool stands in for harmful content, "reference" for neutral text.
std::string topic_sample(const std::string& topic, std::size_t min_chars, std::uint64_t seed);

struct PlantedPair {
  std::string docid_a;
  std::string docid_b;
  double jaccard = 0.0;  // exact shingle Jaccard, verified at generation
};

struct SyntheticDump {
  std::filesystem::path wet_file;
  std::filesystem::path manifest_file;
  std::vector<PlantedPair> pairs;
  std::vector<std::pair<std::string, std::string>> doc_languages;  // docid -> language
};

// Writes a WET fixture with planted near/exact duplicates plus a ground
// truth manifest (JSONL). Near-duplicate pairs meet `jaccard_floor` under
// the exact shingle oracle. Docids follow "<dump>/xx/0/<docno>".
SyntheticDump gen_synthetic_dump(const std::filesystem::path& out_dir, std::uint64_t seed,
                                 std::size_t n_docs, std::size_t dup_pairs,
                                 const std::vector<std::string>& languages,
                                 const std::string& dump_label = "2024-22",
                                 double jaccard_floor = 0.9);

// |S_a intersect S_b| / |S_a union S_b| over exact word-k-gram shingle sets.
// Both-empty shingle sets: 1.0 for byte-identical texts, else 0.0.
double exact_jaccard_oracle(const std::string& text_a, const std::string& text_b,
                            std::size_t k = 5);

}  // namespace corpusprep::fixtures
