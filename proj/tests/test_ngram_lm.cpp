#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "corpusprep/error.hpp"
#include "corpusprep/fixtures.hpp"
#include "corpusprep/ngram_lm.hpp"
#include "corpusprep/normalize.hpp"

using namespace corpusprep;
namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> sentences_from_text(const std::string& text) {
  std::vector<std::vector<std::string>> sentences;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = normalize_for_lm(line);
    if (!tokens.empty()) sentences.push_back(std::move(tokens));
  }
  return sentences;
}

const std::vector<std::vector<std::string>>& fixture_sentences() {
  static const auto sentences =
      sentences_from_text(fixtures::language_sample("en", 120000, 42));
  return sentences;
}

const KNModel& fixture_model() {
  static const KNModel model = KNModel::train_from_sentences(fixture_sentences(), 5);
  return model;
}

double sum_over_vocab(const KNModel& model, const std::vector<std::string>& context) {
  double sum = 0.0;
  for (const auto& word : model.prediction_vocab())
    sum += std::exp(model.log_prob(context, word));
  return sum;
}

std::string file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("count_ngrams hand examples") {
  NgramCounts counts = NgramCounts::count({{"a", "b", "a", "b"}}, 2);
  CHECK(counts.count_of({"a", "b"}) == 2);
  CHECK(counts.count_of({"b", "a"}) == 1);
  CHECK(counts.count_of({"<s>", "a"}) == 1);
  CHECK(counts.count_of({"b", "</s>"}) == 1);
  CHECK(counts.count_of({"a"}) == 2);
  CHECK(counts.count_of({"</s>"}) == 1);
  CHECK(counts.count_of({"<s>"}) == 0);  // <s> is never a predicted unigram

  NgramCounts single = NgramCounts::count({{"a"}}, 2);
  CHECK(single.count_of({"a"}) == 1);

  CHECK_THROWS_AS(NgramCounts::count({}, 2), ValidationError);
  CHECK_THROWS_AS(NgramCounts::count({{}}, 2), ValidationError);
}

TEST_CASE("training requires 100 tokens") {
  CHECK_THROWS_AS(KNModel::train_from_sentences({{"a", "b", "a"}}, 2), ValidationError);
}

TEST_CASE("repeated pattern: P(b|a) > P(a|a)") {
  std::vector<std::vector<std::string>> sentences(30, {"a", "b", "a", "b", "a", "b"});
  KNModel model = KNModel::train_from_sentences(sentences, 2);
  std::vector<std::string> ctx = {"a"};
  CHECK(model.log_prob(ctx, "b") > model.log_prob(ctx, "a"));
}

TEST_CASE("conditional distributions sum to one at every order") {
  const KNModel& model = fixture_model();
  const auto& sentences = fixture_sentences();
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto& sentence = sentences[rng() % sentences.size()];
    for (std::size_t ctx_len = 0; ctx_len <= 4; ++ctx_len) {
      if (sentence.size() < ctx_len) continue;
      std::size_t start = sentence.size() > ctx_len
                              ? rng() % (sentence.size() - ctx_len)
                              : 0;
      std::vector<std::string> context(sentence.begin() + start,
                                       sentence.begin() + start + ctx_len);
      double sum = sum_over_vocab(model, context);
      CAPTURE(ctx_len);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  // Unseen context backs off and still sums to one.
  std::vector<std::string> unseen = {"zzzz", "qqqq"};
  CHECK(sum_over_vocab(model, unseen) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("discounts satisfy 0 < D1 < 1 on a large corpus") {
  const KNModel& model = fixture_model();
  for (int n = 1; n <= 5; ++n) {
    auto d = model.discounts(n);
    CAPTURE(n);
    if (model.used_fallback_discount(n)) continue;
    CHECK(d[0] > 0.0);
    CHECK(d[0] < 1.0);
    CHECK(d[1] > 0.0);
    CHECK(d[1] < 2.0);
    CHECK(d[2] > 0.0);
    CHECK(d[2] < 3.0);
  }
}

TEST_CASE("interpolation lower bound: P(w|ctx) >= bo(ctx) * P(w|ctx')") {
  const KNModel& model = fixture_model();
  const auto& sentences = fixture_sentences();
  std::mt19937_64 rng(11);
  auto vocab = model.prediction_vocab();
  for (int trial = 0; trial < 1000; ++trial) {
    const auto& sentence = sentences[rng() % sentences.size()];
    std::size_t ctx_len = 1 + rng() % 4;
    if (sentence.size() < ctx_len) continue;
    std::size_t start = sentence.size() > ctx_len ? rng() % (sentence.size() - ctx_len) : 0;
    std::vector<std::string> context(sentence.begin() + start,
                                     sentence.begin() + start + ctx_len);
    const std::string& word = vocab[rng() % vocab.size()];
    std::vector<std::string> shorter(context.begin() + 1, context.end());
    double full = std::exp(model.log_prob(context, word));
    double backed = std::exp(model.log_backoff(context) + model.log_prob(shorter, word));
    CHECK(full >= backed - 1e-12);
  }
}

TEST_CASE("unseen words score as <unk>") {
  const KNModel& model = fixture_model();
  std::vector<std::string> ctx = {"the"};
  CHECK(model.log_prob(ctx, "notinthevocabulary") ==
        doctest::Approx(model.log_prob(ctx, "<unk>")).epsilon(1e-12));
}

TEST_CASE("constant-probability model gives perplexity 1/p") {
  KNModel uniform = KNModel::from_unigram_probs(
      {{"a", 0.25}, {"b", 0.25}, {"</s>", 0.25}, {"<unk>", 0.25}});
  PerplexityScore score = uniform.perplexity_tokens({"a", "b", "a", "b", "a"});
  CHECK(score.value == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(score.token_count == 6);  // five tokens plus </s>, <s> excluded
}

TEST_CASE("perplexity is base-independent") {
  const KNModel& model = fixture_model();
  auto tokens = fixture_sentences()[0];
  PerplexityScore natural = model.perplexity_tokens(tokens);
  // Recompute through base-10 logs.
  std::vector<std::string> ids = tokens;
  double log10_sum = 0.0;
  std::vector<std::string> context = {"<s>"};
  std::vector<std::string> padded = tokens;
  padded.push_back("</s>");
  std::vector<std::string> window;
  window.push_back("<s>");
  for (std::size_t i = 0; i < padded.size(); ++i) {
    std::vector<std::string> ctx(window.end() - std::min<std::size_t>(window.size(), 4),
                                 window.end());
    log10_sum += model.log_prob(ctx, padded[i]) / std::log(10.0);
    window.push_back(padded[i]);
  }
  double base10 = std::pow(10.0, -log10_sum / static_cast<double>(padded.size()));
  CHECK(std::fabs(natural.value - base10) / natural.value < 1e-9);
}

TEST_CASE("held-in text beats shuffled text, 20 of 20 trials") {
  const KNModel& model = fixture_model();
  const auto& sentences = fixture_sentences();
  std::mt19937_64 rng(13);
  int wins = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> tokens;
    while (tokens.size() < 60) {
      const auto& sentence = sentences[rng() % sentences.size()];
      tokens.insert(tokens.end(), sentence.begin(), sentence.end());
    }
    double held_in = model.perplexity_tokens(tokens).value;
    std::shuffle(tokens.begin(), tokens.end(), rng);
    double shuffled = model.perplexity_tokens(tokens).value;
    if (held_in < shuffled) ++wins;
  }
  CHECK(wins == 20);
}

TEST_CASE("own-corpus perplexity beats another language") {
  const KNModel& model = fixture_model();
  std::string held_in = fixtures::language_sample("en", 4000, 4242);
  std::string other = fixtures::language_sample("fr", 4000, 4242);
  CHECK(model.perplexity(held_in).value < model.perplexity(other).value);
}

TEST_CASE("zero-token text cannot be scored") {
  const KNModel& model = fixture_model();
  CHECK_THROWS_AS(model.perplexity("!! ?? ... ---"), ValidationError);
  CHECK_THROWS_AS(model.perplexity(""), ValidationError);
  CHECK_THROWS_AS(model.perplexity_tokens({}), ValidationError);
}

TEST_CASE("sentences shorter than the order still train and normalize") {
  // No 4- or 5-gram windows exist; those orders get empty tables and the
  // query chain backs off cleanly.
  std::vector<std::vector<std::string>> sentences;
  for (int i = 0; i < 60; ++i) sentences.push_back({"t" + std::to_string(i % 7), "u"});
  KNModel model = KNModel::train_from_sentences(sentences, 5);
  CHECK(model.used_fallback_discount(5));
  std::vector<std::string> long_ctx = {"t0", "u", "t1", "u"};
  double sum = 0.0;
  for (const auto& word : model.prediction_vocab())
    sum += std::exp(model.log_prob(long_ctx, word));
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(model.perplexity_tokens({"t0", "u"}).value > 1.0);
}

TEST_CASE("corrupt model files are rejected") {
  fs::path path = fs::temp_directory_path() / "corpusprep_kn_corrupt.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "CPKN";  // truncated magic + nothing else
  }
  CHECK_THROWS_AS(KNModel::load(path), ParseError);
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a model file at all, just text";
  }
  CHECK_THROWS_AS(KNModel::load(path), ParseError);
  fs::remove(path);
}

TEST_CASE("hand-derived bigram model numerics") {
  // 40 x "a b" + 20 x "a c", order 2.
  // Raw bigrams: (<s>,a)=60 (a,b)=40 (b,</s>)=40 (a,c)=20 (c,</s>)=20.
  // Order-2 count-of-counts has n1=0 -> fixed 0.75 discounts, flagged.
  // Unigram continuation counts: a=1 b=1 c=1 </s>=2 (T=5); n1=3, n2=1:
  //   Y=0.6, D1=0.6, D2 clamps to 2-1e-6, D3 falls back to 0.75.
  std::vector<std::vector<std::string>> sentences;
  for (int i = 0; i < 40; ++i) sentences.push_back({"a", "b"});
  for (int i = 0; i < 20; ++i) sentences.push_back({"a", "c"});
  KNModel model = KNModel::train_from_sentences(sentences, 2);

  CHECK(model.used_fallback_discount(2));
  CHECK(model.used_fallback_discount(1));  // D3 estimate degenerate (n3=0)
  CHECK(model.discounts(1)[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(model.discounts(2)[0] == doctest::Approx(0.75).epsilon(1e-12));

  // Unigram layer: vhat=5, p0=0.2, gamma1=(3*0.6+(2-1e-6))/5.
  double gamma1 = (1.8 + 2.0 - 1e-6) / 5.0;
  double p1_a = 0.4 / 5.0 + gamma1 * 0.2;
  double p1_b = p1_a;
  double p1_eos = (2.0 - (2.0 - 1e-6)) / 5.0 + gamma1 * 0.2;
  double p1_unk = gamma1 * 0.2;
  std::vector<std::string> empty_ctx;
  CHECK(std::exp(model.log_prob(empty_ctx, "a")) == doctest::Approx(p1_a).epsilon(1e-12));
  CHECK(std::exp(model.log_prob(empty_ctx, "</s>")) ==
        doctest::Approx(p1_eos).epsilon(1e-12));
  CHECK(std::exp(model.log_prob(empty_ctx, "<unk>")) ==
        doctest::Approx(p1_unk).epsilon(1e-12));

  // Bigram layer with the 0.75 fallback discount.
  std::vector<std::string> ctx_a = {"a"};
  double gamma_a = (0.75 + 0.75) / 60.0;
  double p_b_given_a = (40.0 - 0.75) / 60.0 + gamma_a * p1_b;
  CHECK(std::exp(model.log_prob(ctx_a, "b")) ==
        doctest::Approx(p_b_given_a).epsilon(1e-12));
  std::vector<std::string> ctx_bos = {"<s>"};
  double p_a_given_bos = (60.0 - 0.75) / 60.0 + (0.75 / 60.0) * p1_a;
  CHECK(std::exp(model.log_prob(ctx_bos, "a")) ==
        doctest::Approx(p_a_given_bos).epsilon(1e-12));

  // Perplexity of "a b" assembled from the same hand-computed probabilities.
  double p_eos_given_b = (40.0 - 0.75) / 40.0 + (0.75 / 40.0) * p1_eos;
  double expected_ppl =
      std::exp(-(std::log(p_a_given_bos) + std::log(p_b_given_a) + std::log(p_eos_given_b)) /
               3.0);
  CHECK(model.perplexity_tokens({"a", "b"}).value ==
        doctest::Approx(expected_ppl).epsilon(1e-12));
}

TEST_CASE("hand-derived estimated discounts at the top order") {
  // Unique two-token sentences "x_i y_i" with multiplicities chosen to pin
  // the bigram count-of-counts: 50 pairs x1, 20 pairs x2, 8 pairs x3,
  // 4 pairs x4 -> n1=150 n2=60 n3=24 n4=12 (each pair contributes the
  // types (<s>,x), (x,y), (y,</s>) at its multiplicity).
  //   Y  = 150/270 = 5/9
  //   D1 = 1 - 2Y(60/150) = 5/9
  //   D2 = 2 - 3Y(24/60)  = 4/3
  //   D3 = 3 - 4Y(12/24)  = 17/9
  std::vector<std::vector<std::string>> sentences;
  auto add_pairs = [&](int count, int multiplicity, const std::string& tag) {
    for (int i = 0; i < count; ++i)
      for (int m = 0; m < multiplicity; ++m)
        sentences.push_back({"x" + tag + std::to_string(i), "y" + tag + std::to_string(i)});
  };
  add_pairs(50, 1, "a");
  add_pairs(20, 2, "b");
  add_pairs(8, 3, "c");
  add_pairs(4, 4, "d");
  KNModel model = KNModel::train_from_sentences(sentences, 2);

  CHECK_FALSE(model.used_fallback_discount(2));
  auto d2 = model.discounts(2);
  CHECK(d2[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
  CHECK(d2[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(d2[2] == doctest::Approx(17.0 / 9.0).epsilon(1e-12));

  // Unigram layer: every x and y has continuation count 1; </s> has 82
  // (one per distinct y). n2 = 0 there, so order 1 falls back to 0.75.
  CHECK(model.used_fallback_discount(1));
  double total_continuation = 82.0 + 82.0 + 82.0;
  double gamma1 = (165.0 * 0.75) / total_continuation;
  double vhat = 166.0;  // 164 words + </s> + <unk>
  double p1_y = 0.25 / total_continuation + gamma1 / vhat;

  // P(y | x) for a multiplicity-4 pair: one extension of count 4.
  std::vector<std::string> ctx = {"xd0"};
  double gamma_x = (17.0 / 9.0) / 4.0;
  double expected = (4.0 - 17.0 / 9.0) / 4.0 + gamma_x * p1_y;
  CHECK(std::exp(model.log_prob(ctx, "yd0")) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("model files are byte-identical across runs and survive reload") {
  auto sentences = sentences_from_text(fixtures::language_sample("de", 30000, 5));
  KNModel first = KNModel::train_from_sentences(sentences, 5);
  KNModel second = KNModel::train_from_sentences(sentences, 5);
  fs::path path_a = fs::temp_directory_path() / "corpusprep_kn_a.bin";
  fs::path path_b = fs::temp_directory_path() / "corpusprep_kn_b.bin";
  first.save(path_a);
  second.save(path_b);
  CHECK(file_bytes(path_a) == file_bytes(path_b));

  KNModel loaded = KNModel::load(path_a);
  std::vector<std::string> ctx = {"der", "fluss"};
  CHECK(loaded.log_prob(ctx, "haus") ==
        doctest::Approx(first.log_prob(ctx, "haus")).epsilon(1e-12));
  auto tokens = sentences[0];
  CHECK(loaded.perplexity_tokens(tokens).value ==
        doctest::Approx(first.perplexity_tokens(tokens).value).epsilon(1e-12));
  fs::remove(path_a);
  fs::remove(path_b);
}
