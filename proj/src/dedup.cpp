#include "corpusprep/dedup.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <unordered_map>

#include "corpusprep/error.hpp"
#include "corpusprep/unicode.hpp"

namespace corpusprep {

namespace {

constexpr std::uint64_t kMersennePrime = (1ull << 61) - 1;

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t mulmod_p(std::uint64_t a, std::uint64_t x) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(a) * x) % kMersennePrime);
}

std::vector<std::string> tokenize_lower(std::string_view text) {
  std::string lowered = unicode::to_lower(text);
  std::vector<std::string> tokens;
  std::string token;
  std::size_t i = 0;
  while (i < lowered.size()) {
    char32_t cp = unicode::next_codepoint(lowered, i);
    if (unicode::is_whitespace(cp)) {
      if (!token.empty()) tokens.push_back(std::move(token));
      token.clear();
    } else {
      unicode::append_utf8(token, cp);
    }
  }
  if (!token.empty()) tokens.push_back(std::move(token));
  return tokens;
}

std::uint64_t hash_window(const std::vector<std::string>& tokens, std::size_t from,
                          std::size_t count) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = from; i < from + count; ++i) {
    h = fnv1a(tokens[i], h);
    h = fnv1a(std::string_view("\x1f", 1), h);
  }
  return h;
}

}  // namespace

std::set<std::uint64_t> shingle(std::string_view text, std::size_t k) {
  std::set<std::uint64_t> shingles;
  auto tokens = tokenize_lower(text);
  if (tokens.empty()) return shingles;
  if (tokens.size() < k) {
    shingles.insert(hash_window(tokens, 0, tokens.size()));
    return shingles;
  }
  for (std::size_t i = 0; i + k <= tokens.size(); ++i)
    shingles.insert(hash_window(tokens, i, k));
  return shingles;
}

MinHashSignature minhash_signature(const std::set<std::uint64_t>& shingles,
                                   std::size_t num_hashes, std::uint64_t seed) {
  if (shingles.empty())
    throw ValidationError("cannot build a minhash signature of an empty shingle set");
  // Raw mt19937_64 draws keep signatures bit-identical across platforms.
  std::mt19937_64 rng(seed);
  MinHashSignature sig;
  sig.seed = seed;
  sig.values.resize(num_hashes);
  std::vector<std::uint64_t> a(num_hashes), b(num_hashes);
  for (std::size_t i = 0; i < num_hashes; ++i) {
    a[i] = 1 + rng() % (kMersennePrime - 1);
    b[i] = rng() % kMersennePrime;
  }
  for (std::size_t i = 0; i < num_hashes; ++i) {
    std::uint64_t best = ~0ull;
    for (std::uint64_t x : shingles) {
      std::uint64_t h = mulmod_p(a[i], x % kMersennePrime) + b[i];
      if (h >= kMersennePrime) h -= kMersennePrime;
      if (h < best) best = h;
    }
    sig.values[i] = best;
  }
  return sig;
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.values.size() != b.values.size())
    throw ConfigError("minhash signatures have different K");
  if (a.seed != b.seed) throw ConfigError("minhash signatures use different seeds");
  if (a.values.empty()) return 0.0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    if (a.values[i] == b.values[i]) ++agree;
  return static_cast<double>(agree) / static_cast<double>(a.values.size());
}

std::size_t UnionFind::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

void UnionFind::unite(std::size_t a, std::size_t b) {
  std::size_t ra = find(a), rb = find(b);
  if (ra == rb) return;
  if (rank_[ra] < rank_[rb]) std::swap(ra, rb);
  parent_[rb] = ra;
  if (rank_[ra] == rank_[rb]) ++rank_[ra];
}

DedupResult dedup_partition(const std::vector<Document>& docs, const DedupParams& params) {
  if (params.bands * params.rows != params.num_hashes)
    throw ConfigError("lsh bands*rows must equal the signature size K");
  DedupResult result;
  if (docs.empty()) return result;

  const std::string partition_language = docs.front().meta.language;
  for (const auto& doc : docs)
    if (doc.meta.language != partition_language)
      throw ConfigError("dedup_partition got mixed languages: '" + partition_language +
                        "' vs '" + doc.meta.language + "' (" + doc.meta.docid + ")");

  const std::size_t n = docs.size();
  std::vector<std::set<std::uint64_t>> shingle_sets(n);
  std::vector<MinHashSignature> sigs(n);
  std::vector<bool> has_sig(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    shingle_sets[i] = shingle(docs[i].text, params.shingle_k);
    if (!shingle_sets[i].empty()) {
      sigs[i] = minhash_signature(shingle_sets[i], params.num_hashes, params.seed);
      has_sig[i] = true;
    }
  }

  // Banded LSH buckets -> candidate pairs.
  UnionFind uf(n);
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  for (std::size_t band = 0; band < params.bands; ++band) {
    buckets.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (!has_sig[i]) continue;
      std::string_view bytes(
          reinterpret_cast<const char*>(sigs[i].values.data() + band * params.rows),
          params.rows * sizeof(std::uint64_t));
      buckets[fnv1a(bytes)].push_back(i);
    }
    for (const auto& [hash_value, members] : buckets) {
      if (members.size() < 2) continue;
      for (std::size_t x = 0; x + 1 < members.size(); ++x) {
        for (std::size_t y = x + 1; y < members.size(); ++y) {
          std::size_t i = members[x], j = members[y];
          if (uf.find(i) == uf.find(j)) continue;
          double similarity =
              params.exact_verify
                  ? [&] {
                      std::size_t inter = 0;
                      const auto& sa = shingle_sets[i];
                      const auto& sb = shingle_sets[j];
                      for (std::uint64_t s : sa) inter += sb.count(s);
                      std::size_t uni = sa.size() + sb.size() - inter;
                      return uni == 0 ? 0.0
                                      : static_cast<double>(inter) / static_cast<double>(uni);
                    }()
                  : estimate_jaccard(sigs[i], sigs[j]);
          if (similarity >= params.threshold) uf.unite(i, j);
        }
      }
    }
  }

  // Clusters; representative = minimum docid in tuple order.
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[uf.find(i)].push_back(i);

  std::vector<bool> drop(n, false);
  for (auto& [root, members] : groups) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return docid_less(docs[a].meta.docid, docs[b].meta.docid);
    });
    DupCluster cluster;
    cluster.representative = docs[members.front()].meta.docid;
    for (std::size_t i : members) cluster.members.push_back(docs[i].meta.docid);
    for (std::size_t k = 1; k < members.size(); ++k) {
      drop[members[k]] = true;
      result.dropped.push_back(docs[members[k]].meta.docid);
      result.drop_pairs.emplace_back(docs[members[k]].meta.docid, cluster.representative);
    }
    result.clusters.push_back(std::move(cluster));
  }
  std::sort(result.clusters.begin(), result.clusters.end(),
            [](const DupCluster& a, const DupCluster& b) {
              return docid_less(a.representative, b.representative);
            });
  std::sort(result.dropped.begin(), result.dropped.end(), docid_less);
  std::sort(result.drop_pairs.begin(), result.drop_pairs.end(),
            [](const auto& a, const auto& b) { return docid_less(a.first, b.first); });

  for (std::size_t i = 0; i < n; ++i)
    if (!drop[i]) result.kept.push_back(docs[i]);
  return result;
}

}  // namespace corpusprep
