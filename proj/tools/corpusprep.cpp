#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "corpusprep/analytics.hpp"
#include "corpusprep/dedup.hpp"
#include "corpusprep/error.hpp"
#include "corpusprep/fixtures.hpp"
#include "corpusprep/ingest.hpp"
#include "corpusprep/langid.hpp"
#include "corpusprep/ngram_lm.hpp"
#include "corpusprep/normalize.hpp"
#include "corpusprep/pipeline.hpp"
#include "corpusprep/quality.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace corpusprep;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitConfigError = 2;

// Reads per-language training texts from <dir>/<lang>.txt files.
std::map<std::string, std::string> read_language_dir(const fs::path& dir) {
  std::map<std::string, std::string> corpus;
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    corpus[entry.path().stem().string()] = buf.str();
  }
  return corpus;
}

std::vector<std::vector<std::string>> corpus_sentences(const fs::path& input) {
  std::vector<std::vector<std::string>> sentences;
  auto add_text = [&](const std::string& text) {
    auto tokens = normalize_for_lm(text);
    if (!tokens.empty()) sentences.push_back(std::move(tokens));
  };
  if (fs::is_directory(input)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(input))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      if (file.extension() == ".jsonl") {
        for (const auto& doc : read_jsonl_documents(file)) add_text(doc.text);
      } else {
        std::ifstream in(file, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        add_text(buf.str());
      }
    }
  } else if (input.extension() == ".jsonl") {
    for (const auto& doc : read_jsonl_documents(input)) add_text(doc.text);
  } else {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw IoError("cannot open " + input.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    add_text(buf.str());
  }
  return sentences;
}

void print_summary(const RunSummary& summary) {
  std::cout << "run " << summary.label << " -> " << summary.run_dir.string() << "\n";
  for (const auto& [language, count] : summary.ingested_per_language) {
    std::uint64_t kept =
        summary.kept_per_language.count(language) ? summary.kept_per_language.at(language) : 0;
    std::cout << "  " << language << ": ingested " << count << ", kept " << kept << "\n";
  }
  for (const auto& [stage, count] : summary.drops_per_stage)
    std::cout << "  drops[" << stage << "] = " << count << "\n";
  for (const auto& timing : summary.timings)
    std::cout << "  cpu[" << timing.stage << "] = " << timing.cpu_seconds << "s\n";
  for (const auto& warning : summary.warnings) std::cout << "  warning: " << warning << "\n";
}

PipelineConfig load_config_with_overrides(const std::string& config_path,
                                          const std::string& input, const std::string& output,
                                          const std::string& dump, std::size_t workers,
                                          std::optional<std::uint64_t> seed) {
  PipelineConfig config = config_path.empty() ? PipelineConfig{}
                                              : PipelineConfig::from_file(config_path);
  if (config.quality_policy.empty() && config_path.empty())
    config.quality_policy = default_quality_policy();
  if (!input.empty()) config.input = input;
  if (!output.empty()) config.output = output;
  if (!dump.empty()) config.dump = dump;
  if (workers > 0) config.workers = workers;
  if (seed) config.dedup.seed = *seed;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpusprep: multilingual corpus preparation pipelines"};
  app.require_subcommand(1);

  // ingest
  auto* cmd_ingest = app.add_subcommand("ingest", "Convert WET or text corpora to JSONL");
  std::string in_path, out_path, corpus_name = "corpus", dump_label;
  bool ingest_wet = false;
  cmd_ingest->add_option("--input", in_path)->required();
  cmd_ingest->add_option("--output", out_path)->required();
  cmd_ingest->add_option("--corpus", corpus_name);
  cmd_ingest->add_option("--dump", dump_label);
  cmd_ingest->add_flag("--wet", ingest_wet, "Treat inputs as WET files");

  // lid-train
  auto* cmd_lid_train = app.add_subcommand("lid-train", "Train the language classifier");
  std::string lid_in, lid_out;
  cmd_lid_train->add_option("--in", lid_in)->required();
  cmd_lid_train->add_option("--out", lid_out)->required();

  // lid-tag
  auto* cmd_lid_tag = app.add_subcommand("lid-tag", "Tag documents with detected language");
  std::string tag_model, tag_in, tag_out;
  cmd_lid_tag->add_option("--model", tag_model)->required();
  cmd_lid_tag->add_option("--in", tag_in)->required();
  cmd_lid_tag->add_option("--out", tag_out)->required();

  // lm-train
  auto* cmd_lm_train = app.add_subcommand("lm-train", "Train a Kneser-Ney n-gram model");
  std::string lm_in, lm_out;
  int lm_order = 5;
  cmd_lm_train->add_option("--in", lm_in)->required();
  cmd_lm_train->add_option("--out", lm_out)->required();
  cmd_lm_train->add_option("--order", lm_order);

  // lm-score
  auto* cmd_lm_score = app.add_subcommand("lm-score", "Score documents with an n-gram model");
  std::string score_model, score_in, score_out, score_field = "harmful_ppl";
  cmd_lm_score->add_option("--model", score_model)->required();
  cmd_lm_score->add_option("--in", score_in)->required();
  cmd_lm_score->add_option("--out", score_out)->required();
  cmd_lm_score->add_option("--field", score_field);

  // run-curated / run-web
  std::string config_path, run_input, run_output, run_dump;
  std::size_t run_workers = 0;
  std::optional<std::uint64_t> run_seed;
  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path);
    cmd->add_option("--input", run_input);
    cmd->add_option("--output", run_output);
    cmd->add_option("--dump", run_dump);
    cmd->add_option("--workers", run_workers);
    std::uint64_t seed_value = 0;
    cmd->add_option("--seed", seed_value)->each([&run_seed](const std::string& v) {
      run_seed = std::stoull(v);
    });
  };
  auto* cmd_curated = app.add_subcommand("run-curated", "Run the curated pipeline");
  add_run_options(cmd_curated);
  auto* cmd_web = app.add_subcommand("run-web", "Run the web pipeline");
  add_run_options(cmd_web);

  // dedup
  auto* cmd_dedup = app.add_subcommand("dedup", "Deduplicate one JSONL partition");
  std::string dd_in, dd_out, dd_clusters, dd_partition = "partition";
  std::uint64_t dd_seed = 0x5eed;
  double dd_threshold = 0.7;
  cmd_dedup->add_option("--input", dd_in)->required();
  cmd_dedup->add_option("--output", dd_out)->required();
  cmd_dedup->add_option("--clusters", dd_clusters);
  cmd_dedup->add_option("--partition", dd_partition);
  cmd_dedup->add_option("--seed", dd_seed);
  cmd_dedup->add_option("--threshold", dd_threshold);

  // analyze
  auto* cmd_analyze = app.add_subcommand("analyze", "Compute report files from a run directory");
  std::string an_run, an_out, an_timings;
  cmd_analyze->add_option("--run", an_run)->required();
  cmd_analyze->add_option("--out", an_out);
  cmd_analyze->add_option("--timings", an_timings);

  // report
  auto* cmd_report = app.add_subcommand("report", "Print a report.json as tables");
  std::string rp_path;
  cmd_report->add_option("--report", rp_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_ingest) {
      std::vector<Document> docs;
      if (ingest_wet) {
        DumpRef dump = parse_dump_label(dump_label.empty() ? "2024-22" : dump_label);
        std::vector<fs::path> files, wet_named;
        if (fs::is_directory(in_path)) {
          for (const auto& entry : fs::directory_iterator(in_path)) {
            if (!entry.is_regular_file()) continue;
            files.push_back(entry.path());
            if (entry.path().filename().string().find(".wet") != std::string::npos)
              wet_named.push_back(entry.path());
          }
          if (!wet_named.empty()) files = std::move(wet_named);
          std::sort(files.begin(), files.end());
        } else {
          files.push_back(in_path);
        }
        std::string corpus = dump_label.empty() ? corpus_name : dump_label;
        for (std::size_t f = 0; f < files.size(); ++f) {
          auto file_docs = ingest_wet_file(files[f], dump, corpus, f);
          docs.insert(docs.end(), file_docs.begin(), file_docs.end());
        }
      } else {
        IngestStats stats;
        docs = ingest_text_corpus(in_path, corpus_name, &stats);
        for (const auto& error : stats.errors) std::cerr << "warning: " << error << "\n";
      }
      write_jsonl_documents(out_path, docs);
      std::cout << docs.size() << " documents -> " << out_path << "\n";
    } else if (*cmd_lid_train) {
      auto corpus = read_language_dir(lid_in);
      LidModel model = LidModel::train(corpus);
      model.save(lid_out);
      std::cout << "lid model (" << corpus.size() << " languages) -> " << lid_out << "\n";
    } else if (*cmd_lid_tag) {
      LidModel model = LidModel::load(tag_model);
      auto docs = read_jsonl_documents(tag_in);
      for (auto& doc : docs) doc = apply_language(doc, model.classify_document(doc.text));
      write_jsonl_documents(tag_out, docs);
      std::cout << docs.size() << " documents tagged -> " << tag_out << "\n";
    } else if (*cmd_lm_train) {
      auto sentences = corpus_sentences(lm_in);
      KNModel model = KNModel::train_from_sentences(sentences, lm_order);
      model.save(lm_out);
      std::cout << "kneser-ney model (order " << lm_order << ") -> " << lm_out << "\n";
    } else if (*cmd_lm_score) {
      KNModel model = KNModel::load(score_model);
      std::ifstream in(score_in);
      if (!in) throw IoError("cannot open " + score_in);
      std::ofstream out(score_out, std::ios::binary);
      if (!out) throw IoError("cannot write " + score_out);
      std::string line;
      std::size_t unscoreable = 0;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        Document doc = parse_document(line);
        nlohmann::ordered_json j = nlohmann::ordered_json::parse(serialize_document(doc));
        auto tokens = normalize_for_lm(doc.text);
        if (tokens.empty()) ++unscoreable;  // kept without a score
        else j[score_field] = model.perplexity_tokens(tokens).value;
        out << j.dump() << "\n";
      }
      if (unscoreable > 0)
        std::cerr << "warning: " << unscoreable
                  << " document(s) normalize to zero tokens; left unscored\n";
      std::cout << "scored -> " << score_out << "\n";
    } else if (*cmd_curated) {
      PipelineConfig config = load_config_with_overrides(config_path, run_input, run_output,
                                                         run_dump, run_workers, run_seed);
      config.pipeline = "curated";
      print_summary(run_curated(config));
    } else if (*cmd_web) {
      PipelineConfig config = load_config_with_overrides(config_path, run_input, run_output,
                                                         run_dump, run_workers, run_seed);
      config.pipeline = "web";
      print_summary(run_web(config));
    } else if (*cmd_dedup) {
      auto docs = read_jsonl_documents(dd_in);
      DedupParams params;
      params.seed = dd_seed;
      params.threshold = dd_threshold;
      DedupResult result = dedup_partition(docs, params);
      write_jsonl_documents(dd_out, result.kept);
      if (!dd_clusters.empty()) {
        std::ofstream out(dd_clusters, std::ios::binary);
        for (const auto& cluster : result.clusters) {
          nlohmann::ordered_json j;
          j["representative"] = cluster.representative;
          j["members"] = cluster.members;
          j["partition"] = dd_partition;
          out << j.dump() << "\n";
        }
      }
      std::cout << result.kept.size() << " kept, " << result.dropped.size() << " removed\n";
    } else if (*cmd_analyze) {
      fs::path out_dir = an_out.empty() ? fs::path(an_run) / "report" : fs::path(an_out);
      std::optional<fs::path> timings;
      if (!an_timings.empty()) timings = an_timings;
      run_analyze(an_run, out_dir, timings);
      std::cout << "report -> " << out_dir.string() << "\n";
    } else if (*cmd_report) {
      std::ifstream in(rp_path);
      if (!in) throw IoError("cannot open " + rp_path);
      nlohmann::ordered_json j = nlohmann::ordered_json::parse(in);
      std::cout << "schema_version " << j.value("schema_version", 0) << "\n";
      if (j.contains("removal_stats")) {
        std::cout << "language  ingested  after_filter  after_dedup  r_filter  r_dedup\n";
        for (auto it = j["removal_stats"].begin(); it != j["removal_stats"].end(); ++it) {
          const auto& e = it.value();
          std::cout << it.key() << "  " << e.value("docs_ingested", 0) << "  "
                    << e.value("docs_after_filtering", 0) << "  "
                    << e.value("docs_after_dedup", 0) << "  " << e.value("r_filter", 0.0)
                    << "  " << e.value("r_dedup", 0.0) << "\n";
        }
      }
      if (j.contains("stage_share")) {
        std::cout << "stage shares:\n";
        for (auto it = j["stage_share"].begin(); it != j["stage_share"].end(); ++it)
          std::cout << "  " << it.key() << "  " << it.value().value("rounded", 0.0) << "%\n";
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}
