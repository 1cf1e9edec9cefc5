#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "corpusprep/analytics.hpp"
#include "corpusprep/dedup.hpp"
#include "corpusprep/doc_model.hpp"

namespace corpusprep {

struct PipelineConfig {
  std::string pipeline;  // "curated" | "web"
  std::filesystem::path input;
  std::filesystem::path output;
  std::string corpus;      // curated corpus name
  std::string dump;        // web dump label YYYY-WW
  std::string ingest_date = "1970-01-01";

  std::size_t min_chars = 200;
  double min_lang_score = 0.5;
  double harmful_ppl_threshold = 5.0;
  bool harmful_filter_enabled = true;
  std::set<QualityWarning> quality_policy;  // defaults to all five

  std::filesystem::path lid_model;
  std::filesystem::path harmful_lm;

  std::size_t workers = 1;
  DedupParams dedup;
  bool dedup_curated = false;

  // Throws ConfigError on unknown keys, bad types, or out-of-range values.
  static PipelineConfig from_json_text(const std::string& json_text);
  static PipelineConfig from_file(const std::filesystem::path& path);
  void validate() const;
};

struct RunSummary {
  std::string label;  // dump label or corpus name
  std::map<std::string, std::uint64_t> ingested_per_language;
  std::map<std::string, std::uint64_t> kept_per_language;
  std::map<std::string, std::uint64_t> drops_per_stage;
  std::vector<StageTiming> timings;
  std::filesystem::path run_dir;
  std::vector<std::string> warnings;
};

// Curated pipeline: ingest -> normalize -> langid -> prefilter
// (-> optional dedup), outputs one JSONL per (corpus, language).
RunSummary run_curated(const PipelineConfig& config);

// Web pipeline: WET ingest -> normalize -> quality/harmful/langid
// annotation -> prefilter -> quality+harmful filters -> per-language dedup.
RunSummary run_web(const PipelineConfig& config);

// Reads drops.jsonl + counts.json from a run directory and writes report
// files. Stage timings are folded in only when `timings_file` is given so
// that report bytes stay deterministic.
AnalyticsReport run_analyze(const std::filesystem::path& run_dir,
                            const std::filesystem::path& report_dir,
                            const std::optional<std::filesystem::path>& timings_file = {});

// Shared JSONL helpers.
std::vector<Document> read_jsonl_documents(const std::filesystem::path& path);
void write_jsonl_documents(const std::filesystem::path& path,
                           const std::vector<Document>& docs);
std::vector<DropLogEntry> read_drop_log(const std::filesystem::path& path);

}  // namespace corpusprep
