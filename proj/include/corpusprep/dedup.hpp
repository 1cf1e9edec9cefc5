#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "corpusprep/doc_model.hpp"

namespace corpusprep {

struct MinHashSignature {
  std::vector<std::uint64_t> values;  // K permutation minima
  std::uint64_t seed = 0;

  std::size_t num_hashes() const { return values.size(); }
};

struct DedupParams {
  std::size_t num_hashes = 128;  // K
  std::size_t bands = 16;        // b
  std::size_t rows = 8;          // r; b*r must equal K
  double threshold = 0.7;        // verify threshold on estimated Jaccard
  std::uint64_t seed = 0x5eed;
  std::size_t shingle_k = 5;     // word shingle width
  bool exact_verify = false;     // verify candidates with exact Jaccard
};

// Word k-gram shingle hashes over lowercased whitespace tokens. Documents
// shorter than k tokens yield one whole-sequence shingle; empty yields none.
std::set<std::uint64_t> shingle(std::string_view text, std::size_t k = 5);

MinHashSignature minhash_signature(const std::set<std::uint64_t>& shingles,
                                   std::size_t num_hashes = 128, std::uint64_t seed = 0x5eed);

// Fraction of agreeing positions; unbiased estimator of shingle Jaccard.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

struct DupCluster {
  std::string representative;         // minimum docid under tuple order
  std::vector<std::string> members;   // sorted by tuple order, includes representative
};

struct DedupResult {
  std::vector<Document> kept;            // input order, duplicates removed
  std::vector<DupCluster> clusters;      // only clusters with >= 2 members
  std::vector<std::string> dropped;      // docids removed, with their representative
  std::vector<std::pair<std::string, std::string>> drop_pairs;  // (docid, representative)
};

// Banded LSH over signatures; candidate pairs sharing any band are verified
// at `threshold` and clustered with union-find. All docs must share one
// (dump, language) partition.
DedupResult dedup_partition(const std::vector<Document>& docs, const DedupParams& params = {});

// Union-find over string ids; used by dedup and exposed for cluster audits.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
  }
  std::size_t find(std::size_t x);
  void unite(std::size_t a, std::size_t b);

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

}  // namespace corpusprep
