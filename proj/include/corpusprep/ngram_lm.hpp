#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace corpusprep {

struct PerplexityScore {
  double value = 0.0;       // exp of mean negative log-likelihood per token
  std::size_t token_count = 0;  // scored tokens incl </s>, excl <s>
};

// Exact n-gram counts for orders 1..order over <s>/</s>-bounded sentences.
// <s> is context-only and never counted as a predicted unigram.
class NgramCounts {
 public:
  static NgramCounts count(const std::vector<std::vector<std::string>>& sentences,
                           int order = 5);

  int order() const { return order_; }
  std::uint64_t total_tokens() const { return total_tokens_; }
  std::uint64_t count_of(const std::vector<std::string>& gram) const;

  static constexpr std::uint32_t kUnkId = 0;
  static constexpr std::uint32_t kBosId = 1;
  static constexpr std::uint32_t kEosId = 2;

 private:
  friend class KNModel;
  using Key = std::string;  // big-endian packed ids, lexicographic == numeric

  int order_ = 0;
  std::uint64_t total_tokens_ = 0;  // predicted unigram occurrences (incl </s>)
  std::vector<std::string> vocab_;  // id -> token; [0]=<unk>, [1]=<s>, [2]=</s>
  std::unordered_map<std::string, std::uint32_t> token_ids_;
  // raw_[n-1]: n-gram -> occurrence count
  std::vector<std::unordered_map<Key, std::uint64_t>> raw_;
};

// Interpolated modified Kneser-Ney model. Internals are natural-log;
// perplexity is base-independent.
class KNModel {
 public:
  static KNModel train(const NgramCounts& counts);

  // Convenience: count + train over sentences of normalize_for_lm tokens.
  static KNModel train_from_sentences(const std::vector<std::vector<std::string>>& sentences,
                                      int order = 5);

  // Builds a bare unigram model from explicit probabilities (no smoothing,
  // caller is responsible for normalization). Tokens may include "</s>" and
  // "<unk>".
  static KNModel from_unigram_probs(const std::vector<std::pair<std::string, double>>& probs);

  // Natural-log P(word | context); context is the preceding tokens, at most
  // order-1 of which are used. Out-of-vocabulary words map to <unk>.
  double log_prob(std::span<const std::string> context, const std::string& word) const;

  // Natural-log backoff weight of a context; 0.0 for contexts without one.
  double log_backoff(std::span<const std::string> context) const;

  // Perplexity of a token sequence treated as one sentence.
  PerplexityScore perplexity_tokens(const std::vector<std::string>& tokens) const;

  // normalize_for_lm + perplexity_tokens. Throws ValidationError if the text
  // normalizes to zero tokens.
  PerplexityScore perplexity(std::string_view text) const;

  void save(const std::filesystem::path& path) const;
  static KNModel load(const std::filesystem::path& path);

  int order() const { return order_; }
  // Discounts D1, D2, D3+ for a 1-based order n.
  std::array<double, 3> discounts(int n) const { return discounts_[n - 1]; }
  bool used_fallback_discount(int n) const { return fallback_[n - 1] != 0; }
  // Prediction vocabulary: every id except <s>.
  std::vector<std::string> prediction_vocab() const;

 private:
  using Key = std::string;

  std::uint32_t id_or_unk(const std::string& token) const;
  double log_prob_ids(const std::vector<std::uint32_t>& context, std::uint32_t word) const;

  int order_ = 0;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::uint32_t> token_ids_;
  std::vector<std::array<double, 3>> discounts_;
  std::vector<std::uint8_t> fallback_;
  std::vector<double> unigram_logp_;  // by id; <s> pinned to -inf sentinel
  // ngram_logp_[n-1]: n-gram -> log P(w | first n-1 ids), n = 2..order
  std::vector<std::unordered_map<Key, double>> ngram_logp_;
  // context_logbo_[k-1]: k-gram context -> log backoff weight, k = 1..order-1
  std::vector<std::unordered_map<Key, double>> context_logbo_;
};

}  // namespace corpusprep
