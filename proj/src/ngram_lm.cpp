#include "corpusprep/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "corpusprep/error.hpp"
#include "corpusprep/normalize.hpp"

namespace corpusprep {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr char kKnMagic[8] = {'C', 'P', 'K', 'N', '\0', '\0', '\0', '\1'};

void append_id(std::string& key, std::uint32_t id) {
  // Big-endian so lexicographic key order equals numeric sequence order.
  key.push_back(static_cast<char>((id >> 24) & 0xff));
  key.push_back(static_cast<char>((id >> 16) & 0xff));
  key.push_back(static_cast<char>((id >> 8) & 0xff));
  key.push_back(static_cast<char>(id & 0xff));
}

std::string pack_ids(std::span<const std::uint32_t> ids) {
  std::string key;
  key.reserve(ids.size() * 4);
  for (std::uint32_t id : ids) append_id(key, id);
  return key;
}

std::uint32_t id_at(const std::string& key, std::size_t index) {
  const auto* p = reinterpret_cast<const unsigned char*>(key.data()) + index * 4;
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
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

}  // namespace

NgramCounts NgramCounts::count(const std::vector<std::vector<std::string>>& sentences,
                               int order) {
  if (order < 1) throw ValidationError("ngram order must be >= 1");
  std::uint64_t token_total = 0;
  for (const auto& sentence : sentences) token_total += sentence.size();
  if (token_total == 0) throw ValidationError("cannot count n-grams of an empty token stream");

  NgramCounts counts;
  counts.order_ = order;
  counts.vocab_ = {"<unk>", "<s>", "</s>"};
  for (std::uint32_t i = 0; i < counts.vocab_.size(); ++i)
    counts.token_ids_[counts.vocab_[i]] = i;

  // Deterministic ids: sorted distinct tokens after the reserved three.
  std::set<std::string> distinct;
  for (const auto& sentence : sentences)
    for (const auto& token : sentence) distinct.insert(token);
  for (const auto& token : distinct) {
    if (counts.token_ids_.count(token)) continue;
    counts.token_ids_[token] = static_cast<std::uint32_t>(counts.vocab_.size());
    counts.vocab_.push_back(token);
  }

  counts.raw_.assign(static_cast<std::size_t>(order), {});
  std::vector<std::uint32_t> padded;
  for (const auto& sentence : sentences) {
    if (sentence.empty()) continue;
    padded.clear();
    padded.push_back(kBosId);
    for (const auto& token : sentence) padded.push_back(counts.token_ids_.at(token));
    padded.push_back(kEosId);
    // Windows end at predicted positions 1..m+1; <s> is never predicted.
    for (std::size_t end = 1; end < padded.size(); ++end) {
      for (int n = 1; n <= order; ++n) {
        if (static_cast<std::size_t>(n) > end + 1) break;
        std::size_t start = end + 1 - static_cast<std::size_t>(n);
        std::string key = pack_ids(std::span(padded).subspan(start, static_cast<std::size_t>(n)));
        ++counts.raw_[static_cast<std::size_t>(n) - 1][key];
        if (n == 1) ++counts.total_tokens_;
      }
    }
  }
  return counts;
}

std::uint64_t NgramCounts::count_of(const std::vector<std::string>& gram) const {
  if (gram.empty() || gram.size() > static_cast<std::size_t>(order_)) return 0;
  std::vector<std::uint32_t> ids;
  for (const auto& token : gram) {
    auto it = token_ids_.find(token);
    if (it == token_ids_.end()) return 0;
    ids.push_back(it->second);
  }
  const auto& table = raw_[gram.size() - 1];
  auto it = table.find(pack_ids(ids));
  return it == table.end() ? 0 : it->second;
}

KNModel KNModel::train(const NgramCounts& counts) {
  if (counts.total_tokens_ < 100)
    throw ValidationError("kneser-ney training needs at least 100 tokens, got " +
                          std::to_string(counts.total_tokens_));
  const int order = counts.order_;

  KNModel model;
  model.order_ = order;
  model.vocab_ = counts.vocab_;
  model.token_ids_ = counts.token_ids_;
  model.discounts_.assign(static_cast<std::size_t>(order), {0.75, 0.75, 0.75});
  model.fallback_.assign(static_cast<std::size_t>(order), 0);
  model.ngram_logp_.assign(static_cast<std::size_t>(order > 1 ? order - 1 : 0), {});
  model.context_logbo_.assign(static_cast<std::size_t>(order > 1 ? order - 1 : 0), {});

  // Adjusted counts: raw at the top order; continuation counts below,
  // except n-grams anchored at <s> which keep raw counts.
  std::vector<std::map<Key, std::uint64_t>> adjusted(static_cast<std::size_t>(order));
  for (const auto& [key, value] : counts.raw_[static_cast<std::size_t>(order) - 1])
    adjusted[static_cast<std::size_t>(order) - 1][key] = value;
  for (int n = order - 1; n >= 1; --n) {
    auto& table = adjusted[static_cast<std::size_t>(n) - 1];
    // Continuation counts: distinct left extensions at order n+1.
    for (const auto& [key, value] : counts.raw_[static_cast<std::size_t>(n)]) {
      (void)value;
      table[key.substr(4)] += 1;
    }
    // <s>-anchored n-grams keep raw counts (they cannot be left-extended).
    for (const auto& [key, value] : counts.raw_[static_cast<std::size_t>(n) - 1]) {
      if (id_at(key, 0) == NgramCounts::kBosId) table[key] = value;
    }
  }

  // Discounts per order from count-of-counts over adjusted counts.
  for (int n = 1; n <= order; ++n) {
    std::uint64_t cc[5] = {0, 0, 0, 0, 0};  // cc[k] = #entries with count k, 1..4
    for (const auto& [key, value] : adjusted[static_cast<std::size_t>(n) - 1])
      if (value >= 1 && value <= 4) ++cc[value];
    auto& d = model.discounts_[static_cast<std::size_t>(n) - 1];
    if (cc[1] == 0 || cc[2] == 0) {
      d = {0.75, 0.75, 0.75};
      model.fallback_[static_cast<std::size_t>(n) - 1] = 1;
      continue;
    }
    double y = static_cast<double>(cc[1]) / (static_cast<double>(cc[1]) + 2.0 * cc[2]);
    for (int j = 1; j <= 3; ++j) {
      double nj = static_cast<double>(cc[j]);
      double nj1 = static_cast<double>(j < 4 ? cc[j + 1] : 0);
      double dj;
      if (nj == 0.0) {
        dj = 0.75;
        model.fallback_[static_cast<std::size_t>(n) - 1] = 1;
      } else {
        dj = j - (j + 1) * y * nj1 / nj;
        dj = std::clamp(dj, 0.0, static_cast<double>(j) - 1e-6);
      }
      d[static_cast<std::size_t>(j) - 1] = dj;
    }
  }

  auto discount_for = [&](int n, std::uint64_t count) {
    const auto& d = model.discounts_[static_cast<std::size_t>(n) - 1];
    if (count == 0) return 0.0;
    if (count == 1) return d[0];
    if (count == 2) return d[1];
    return d[2];
  };

  // Unigrams: interpolate with the uniform zero-gram over the prediction
  // vocabulary (every token but <s>, plus <unk>).
  const auto& uni = adjusted[0];
  double uni_total = 0.0;
  for (const auto& [key, value] : uni) uni_total += static_cast<double>(value);
  double vhat = 0.0;
  for (std::uint32_t id = 0; id < model.vocab_.size(); ++id)
    if (id != NgramCounts::kBosId) vhat += 1.0;
  // vocab_ already contains <unk> as id 0, so vhat covers vocab + unk.
  double gamma1 = 0.0;
  {
    double dsum = 0.0;
    for (const auto& [key, value] : uni) dsum += discount_for(1, value);
    gamma1 = dsum / uni_total;
  }
  model.unigram_logp_.assign(model.vocab_.size(), kNegInf);
  double p0 = 1.0 / vhat;
  for (std::uint32_t id = 0; id < model.vocab_.size(); ++id) {
    if (id == NgramCounts::kBosId) continue;
    std::string key;
    append_id(key, id);
    auto it = uni.find(key);
    double a = it == uni.end() ? 0.0 : static_cast<double>(it->second);
    double p = (a > 0.0 ? (a - discount_for(1, static_cast<std::uint64_t>(a))) / uni_total : 0.0) +
               gamma1 * p0;
    model.unigram_logp_[id] = std::log(p);
  }

  // Higher orders, bottom-up; adjusted maps are sorted so contexts group
  // into contiguous runs.
  for (int n = 2; n <= order; ++n) {
    const auto& table = adjusted[static_cast<std::size_t>(n) - 1];
    auto it = table.begin();
    while (it != table.end()) {
      Key context = it->first.substr(0, static_cast<std::size_t>(n - 1) * 4);
      auto run_begin = it;
      double denom = 0.0;
      double discount_sum = 0.0;
      while (it != table.end() &&
             it->first.compare(0, context.size(), context) == 0) {
        denom += static_cast<double>(it->second);
        discount_sum += discount_for(n, it->second);
        ++it;
      }
      double gamma = discount_sum / denom;
      model.context_logbo_[static_cast<std::size_t>(n) - 2][context] = std::log(gamma);
      for (auto e = run_begin; e != it; ++e) {
        std::uint32_t word = id_at(e->first, static_cast<std::size_t>(n) - 1);
        std::vector<std::uint32_t> lower_ctx;
        for (std::size_t k = 1; k < static_cast<std::size_t>(n) - 1 + 1; ++k) {
          if (k >= 1 && k <= static_cast<std::size_t>(n - 2))
            lower_ctx.push_back(id_at(e->first, k));
        }
        double lower = model.log_prob_ids(lower_ctx, word);
        double a = static_cast<double>(e->second);
        double p = (a - discount_for(n, e->second)) / denom + gamma * std::exp(lower);
        model.ngram_logp_[static_cast<std::size_t>(n) - 2][e->first] = std::log(p);
      }
    }
  }
  return model;
}

KNModel KNModel::train_from_sentences(const std::vector<std::vector<std::string>>& sentences,
                                      int order) {
  return train(NgramCounts::count(sentences, order));
}

KNModel KNModel::from_unigram_probs(
    const std::vector<std::pair<std::string, double>>& probs) {
  KNModel model;
  model.order_ = 1;
  model.vocab_ = {"<unk>", "<s>", "</s>"};
  model.discounts_.assign(1, {0.0, 0.0, 0.0});
  model.fallback_.assign(1, 1);
  for (std::uint32_t i = 0; i < model.vocab_.size(); ++i)
    model.token_ids_[model.vocab_[i]] = i;
  model.unigram_logp_.assign(3, kNegInf);
  for (const auto& [token, p] : probs) {
    auto it = model.token_ids_.find(token);
    std::uint32_t id;
    if (it == model.token_ids_.end()) {
      id = static_cast<std::uint32_t>(model.vocab_.size());
      model.token_ids_[token] = id;
      model.vocab_.push_back(token);
      model.unigram_logp_.push_back(kNegInf);
    } else {
      id = it->second;
    }
    model.unigram_logp_[id] = std::log(p);
  }
  return model;
}

std::uint32_t KNModel::id_or_unk(const std::string& token) const {
  auto it = token_ids_.find(token);
  return it == token_ids_.end() ? NgramCounts::kUnkId : it->second;
}

double KNModel::log_prob_ids(const std::vector<std::uint32_t>& context,
                             std::uint32_t word) const {
  std::size_t k = context.size();
  if (k > static_cast<std::size_t>(order_ - 1))
    k = static_cast<std::size_t>(order_ - 1);
  // Use the last k context tokens.
  std::size_t offset = context.size() - k;
  double accumulated = 0.0;
  while (k > 0) {
    std::string key = pack_ids(std::span(context).subspan(offset, k));
    const auto& table = ngram_logp_[k - 1];
    std::string full = key;
    append_id(full, word);
    auto hit = table.find(full);
    if (hit != table.end()) return accumulated + hit->second;
    const auto& ctx_table = context_logbo_[k - 1];
    auto ctx_hit = ctx_table.find(key);
    if (ctx_hit != ctx_table.end()) accumulated += ctx_hit->second;
    ++offset;
    --k;
  }
  double base = word < unigram_logp_.size() ? unigram_logp_[word] : kNegInf;
  if (base == kNegInf && word != NgramCounts::kBosId)
    base = unigram_logp_[NgramCounts::kUnkId];
  return accumulated + base;
}

double KNModel::log_prob(std::span<const std::string> context, const std::string& word) const {
  std::vector<std::uint32_t> ids;
  ids.reserve(context.size());
  for (const auto& token : context) ids.push_back(id_or_unk(token));
  return log_prob_ids(ids, id_or_unk(word));
}

double KNModel::log_backoff(std::span<const std::string> context) const {
  if (context.empty() || context.size() > static_cast<std::size_t>(order_ - 1)) return 0.0;
  std::vector<std::uint32_t> ids;
  ids.reserve(context.size());
  for (const auto& token : context) ids.push_back(id_or_unk(token));
  const auto& table = context_logbo_[context.size() - 1];
  auto it = table.find(pack_ids(ids));
  return it == table.end() ? 0.0 : it->second;
}

PerplexityScore KNModel::perplexity_tokens(const std::vector<std::string>& tokens) const {
  if (tokens.empty()) throw ValidationError("cannot score an empty token sequence");
  std::vector<std::uint32_t> ids;
  ids.reserve(tokens.size() + 2);
  ids.push_back(NgramCounts::kBosId);
  for (const auto& token : tokens) ids.push_back(id_or_unk(token));
  ids.push_back(NgramCounts::kEosId);

  double log_sum = 0.0;
  std::size_t scored = 0;
  std::vector<std::uint32_t> context;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    std::size_t ctx_len = std::min(i, static_cast<std::size_t>(order_ - 1));
    context.assign(ids.begin() + static_cast<std::ptrdiff_t>(i - ctx_len),
                   ids.begin() + static_cast<std::ptrdiff_t>(i));
    log_sum += log_prob_ids(context, ids[i]);
    ++scored;
  }
  PerplexityScore score;
  score.token_count = scored;
  score.value = std::exp(-log_sum / static_cast<double>(scored));
  return score;
}

PerplexityScore KNModel::perplexity(std::string_view text) const {
  auto tokens = normalize_for_lm(text);
  if (tokens.empty())
    throw ValidationError("text normalizes to zero tokens; cannot score");
  return perplexity_tokens(tokens);
}

std::vector<std::string> KNModel::prediction_vocab() const {
  std::vector<std::string> out;
  for (std::uint32_t id = 0; id < vocab_.size(); ++id)
    if (id != NgramCounts::kBosId) out.push_back(vocab_[id]);
  return out;
}

void KNModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kKnMagic, sizeof(kKnMagic));
  write_u64(out, static_cast<std::uint64_t>(order_));
  write_u64(out, vocab_.size());
  for (const auto& token : vocab_) write_string(out, token);
  for (int n = 1; n <= order_; ++n) {
    const auto& d = discounts_[static_cast<std::size_t>(n) - 1];
    write_f64(out, d[0]);
    write_f64(out, d[1]);
    write_f64(out, d[2]);
    write_u64(out, fallback_[static_cast<std::size_t>(n) - 1]);
  }
  for (double lp : unigram_logp_) write_f64(out, lp);
  auto write_table = [&](const std::unordered_map<Key, double>& table) {
    std::vector<std::pair<Key, double>> entries(table.begin(), table.end());
    std::sort(entries.begin(), entries.end());
    write_u64(out, entries.size());
    for (const auto& [key, value] : entries) {
      write_string(out, key);
      write_f64(out, value);
    }
  };
  for (const auto& table : ngram_logp_) write_table(table);
  for (const auto& table : context_logbo_) write_table(table);
  if (!out) throw IoError("write failed: " + path.string());
}

KNModel KNModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kKnMagic, 8) != 0)
    throw ParseError("not a kneser-ney model file: " + path.string());
  KNModel model;
  model.order_ = static_cast<int>(read_u64(in));
  std::uint64_t vocab_size = read_u64(in);
  model.vocab_.reserve(vocab_size);
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    model.vocab_.push_back(read_string(in));
    model.token_ids_[model.vocab_.back()] = static_cast<std::uint32_t>(i);
  }
  model.discounts_.assign(static_cast<std::size_t>(model.order_), {});
  model.fallback_.assign(static_cast<std::size_t>(model.order_), 0);
  for (int n = 1; n <= model.order_; ++n) {
    auto& d = model.discounts_[static_cast<std::size_t>(n) - 1];
    d[0] = read_f64(in);
    d[1] = read_f64(in);
    d[2] = read_f64(in);
    model.fallback_[static_cast<std::size_t>(n) - 1] = static_cast<std::uint8_t>(read_u64(in));
  }
  model.unigram_logp_.assign(vocab_size, kNegInf);
  for (std::uint64_t i = 0; i < vocab_size; ++i) model.unigram_logp_[i] = read_f64(in);
  auto read_table = [&](std::unordered_map<Key, double>& table) {
    std::uint64_t n = read_u64(in);
    table.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string key = read_string(in);
      double value = read_f64(in);
      table.emplace(std::move(key), value);
    }
  };
  model.ngram_logp_.assign(static_cast<std::size_t>(model.order_ - 1), {});
  model.context_logbo_.assign(static_cast<std::size_t>(model.order_ - 1), {});
  for (auto& table : model.ngram_logp_) read_table(table);
  for (auto& table : model.context_logbo_) read_table(table);
  if (!in) throw ParseError("kneser-ney model file truncated: " + path.string());
  return model;
}

}  // namespace corpusprep
