#include "corpusprep/pipeline.hpp"

#include <time.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "corpusprep/error.hpp"
#include "corpusprep/ingest.hpp"
#include "corpusprep/langid.hpp"
#include "corpusprep/ngram_lm.hpp"
#include "corpusprep/normalize.hpp"
#include "corpusprep/quality.hpp"
#include "json.hpp"

namespace corpusprep {

using ordered_json = nlohmann::ordered_json;

namespace {

double process_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

// Strided parallel for: result independent of worker count and scheduling.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::size_t n_threads = std::min(workers, count);
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(n_threads);
  threads.reserve(n_threads);
  for (std::size_t w = 0; w < n_threads; ++w) {
    threads.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < count; i += n_threads) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct StagedDoc {
  Document doc;
  Annotations ann;
  bool dropped = false;
};

std::vector<LineLanguage> to_line_languages(const std::vector<LineLabel>& labels) {
  std::vector<LineLanguage> out;
  out.reserve(labels.size());
  for (const auto& label : labels)
    out.push_back({label.language, label.confidence, label.byte_len});
  return out;
}

void require_key_subset(const ordered_json& object, const std::set<std::string>& allowed,
                        const std::string& where) {
  for (auto it = object.begin(); it != object.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown config key '" + it.key() + "' in " + where);
}

}  // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  require_key_subset(j,
                     {"pipeline", "input", "output", "corpus", "dump", "ingest_date",
                      "min_chars", "min_lang_score", "harmful_ppl_threshold",
                      "harmful_filter_enabled", "quality_policy", "lid_model", "harmful_lm",
                      "workers", "dedup", "dedup_curated"},
                     "config");
  PipelineConfig config;
  config.quality_policy = default_quality_policy();
  auto get_string = [&](const char* key, std::string& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) throw ConfigError(std::string(key) + " must be a string");
    out = j[key].get<std::string>();
  };
  get_string("pipeline", config.pipeline);
  get_string("corpus", config.corpus);
  get_string("dump", config.dump);
  get_string("ingest_date", config.ingest_date);
  std::string path_buf;
  path_buf.clear(); get_string("input", path_buf); if (!path_buf.empty()) config.input = path_buf;
  path_buf.clear(); get_string("output", path_buf); if (!path_buf.empty()) config.output = path_buf;
  path_buf.clear(); get_string("lid_model", path_buf); if (!path_buf.empty()) config.lid_model = path_buf;
  path_buf.clear(); get_string("harmful_lm", path_buf); if (!path_buf.empty()) config.harmful_lm = path_buf;

  if (j.contains("min_chars")) {
    if (!j["min_chars"].is_number_unsigned() && !j["min_chars"].is_number_integer())
      throw ConfigError("min_chars must be a non-negative integer");
    auto v = j["min_chars"].get<std::int64_t>();
    if (v < 0) throw ConfigError("min_chars must be non-negative");
    config.min_chars = static_cast<std::size_t>(v);
  }
  if (j.contains("min_lang_score")) {
    if (!j["min_lang_score"].is_number()) throw ConfigError("min_lang_score must be a number");
    config.min_lang_score = j["min_lang_score"].get<double>();
    if (config.min_lang_score < 0.0 || config.min_lang_score > 1.0)
      throw ConfigError("min_lang_score must be in [0,1]");
  }
  if (j.contains("harmful_ppl_threshold")) {
    if (!j["harmful_ppl_threshold"].is_number())
      throw ConfigError("harmful_ppl_threshold must be a number");
    config.harmful_ppl_threshold = j["harmful_ppl_threshold"].get<double>();
    if (config.harmful_ppl_threshold <= 0.0)
      throw ConfigError("harmful_ppl_threshold must be positive");
  }
  if (j.contains("harmful_filter_enabled")) {
    if (!j["harmful_filter_enabled"].is_boolean())
      throw ConfigError("harmful_filter_enabled must be a boolean");
    config.harmful_filter_enabled = j["harmful_filter_enabled"].get<bool>();
  }
  if (j.contains("quality_policy")) {
    if (!j["quality_policy"].is_array()) throw ConfigError("quality_policy must be an array");
    config.quality_policy.clear();
    for (const auto& name : j["quality_policy"]) {
      if (!name.is_string()) throw ConfigError("quality_policy entries must be strings");
      auto w = quality_warning_from_string(name.get<std::string>());
      if (!w) throw ConfigError("unknown quality warning '" + name.get<std::string>() + "'");
      config.quality_policy.insert(*w);
    }
  }
  if (j.contains("workers")) {
    if (!j["workers"].is_number_integer() && !j["workers"].is_number_unsigned())
      throw ConfigError("workers must be an integer");
    auto v = j["workers"].get<std::int64_t>();
    if (v < 1) throw ConfigError("workers must be >= 1");
    config.workers = static_cast<std::size_t>(v);
  }
  if (j.contains("dedup_curated")) {
    if (!j["dedup_curated"].is_boolean()) throw ConfigError("dedup_curated must be a boolean");
    config.dedup_curated = j["dedup_curated"].get<bool>();
  }
  if (j.contains("dedup")) {
    const auto& d = j["dedup"];
    if (!d.is_object()) throw ConfigError("dedup must be an object");
    require_key_subset(d, {"num_hashes", "bands", "rows", "threshold", "seed", "shingle_k",
                           "exact_verify"},
                       "dedup");
    auto get_size = [&](const char* key, std::size_t& out) {
      if (!d.contains(key)) return;
      if (!d[key].is_number_integer() && !d[key].is_number_unsigned())
        throw ConfigError(std::string("dedup.") + key + " must be an integer");
      auto v = d[key].get<std::int64_t>();
      if (v < 1) throw ConfigError(std::string("dedup.") + key + " must be >= 1");
      out = static_cast<std::size_t>(v);
    };
    get_size("num_hashes", config.dedup.num_hashes);
    get_size("bands", config.dedup.bands);
    get_size("rows", config.dedup.rows);
    get_size("shingle_k", config.dedup.shingle_k);
    if (d.contains("threshold")) {
      if (!d["threshold"].is_number()) throw ConfigError("dedup.threshold must be a number");
      config.dedup.threshold = d["threshold"].get<double>();
      if (config.dedup.threshold < 0.0 || config.dedup.threshold > 1.0)
        throw ConfigError("dedup.threshold must be in [0,1]");
    }
    if (d.contains("seed")) {
      if (!d["seed"].is_number_integer() && !d["seed"].is_number_unsigned())
        throw ConfigError("dedup.seed must be an integer");
      config.dedup.seed = d["seed"].get<std::uint64_t>();
    }
    if (d.contains("exact_verify")) {
      if (!d["exact_verify"].is_boolean())
        throw ConfigError("dedup.exact_verify must be a boolean");
      config.dedup.exact_verify = d["exact_verify"].get<bool>();
    }
  }
  config.validate();
  return config;
}

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

void PipelineConfig::validate() const {
  if (!pipeline.empty() && pipeline != "curated" && pipeline != "web")
    throw ConfigError("pipeline must be 'curated' or 'web'");
  if (dedup.bands * dedup.rows != dedup.num_hashes)
    throw ConfigError("dedup.bands * dedup.rows must equal dedup.num_hashes");
}

namespace {

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::string drop_entry_json(const DropLogEntry& entry) {
  ordered_json j;
  j["docid"] = entry.docid;
  j["stage"] = entry.stage;
  j["reason"] = entry.reason;
  j["language"] = entry.language;
  return j.dump();
}

void sort_drop_entries(std::vector<DropLogEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const DropLogEntry& a, const DropLogEntry& b) {
    return docid_less(a.docid, b.docid);
  });
}

struct StageLog {
  std::vector<DropLogEntry> prefilter, quality, harmful, dedup;

  std::vector<DropLogEntry> merged() {
    sort_drop_entries(prefilter);
    sort_drop_entries(quality);
    sort_drop_entries(harmful);
    sort_drop_entries(dedup);
    std::vector<DropLogEntry> all;
    all.insert(all.end(), prefilter.begin(), prefilter.end());
    all.insert(all.end(), quality.begin(), quality.end());
    all.insert(all.end(), harmful.begin(), harmful.end());
    all.insert(all.end(), dedup.begin(), dedup.end());
    return all;
  }
};

std::string quality_reason(const std::vector<QualityWarning>& fatal) {
  std::string reason = "quality_warnings:";
  for (std::size_t i = 0; i < fatal.size(); ++i) {
    if (i) reason += '+';
    reason += to_string(fatal[i]);
  }
  return reason;
}

std::string annotations_json(const Document& doc, const Annotations& ann) {
  ordered_json j;
  j["docid"] = doc.meta.docid;
  ordered_json warnings = ordered_json::array();
  for (QualityWarning w : ann.warnings) warnings.push_back(to_string(w));
  j["warnings"] = warnings;
  if (ann.harmful_ppl) j["harmful_ppl"] = *ann.harmful_ppl;
  if (ann.line_languages) {
    ordered_json lines = ordered_json::array();
    for (const auto& line : *ann.line_languages) {
      ordered_json e;
      e["lang"] = line.language;
      e["confidence"] = line.confidence;
      e["bytes"] = line.byte_len;
      lines.push_back(e);
    }
    j["line_languages"] = lines;
  }
  return j.dump();
}

void persist_stage(const std::filesystem::path& dir, const std::string& stage,
                   const std::vector<StagedDoc>& docs, bool with_annotations) {
  std::vector<std::string> doc_lines, ann_lines;
  for (const auto& staged : docs) {
    if (staged.dropped) continue;
    doc_lines.push_back(serialize_document(staged.doc));
    if (with_annotations) ann_lines.push_back(annotations_json(staged.doc, staged.ann));
  }
  write_lines(dir / stage / "docs.jsonl", doc_lines);
  if (with_annotations) write_lines(dir / stage / "annotations.jsonl", ann_lines);
}

void write_counts(const std::filesystem::path& path, const std::string& label,
                  const std::string& pipeline,
                  const std::map<std::string, std::uint64_t>& ingested,
                  const std::map<std::string, std::uint64_t>& kept) {
  ordered_json j;
  j["label"] = label;
  j["pipeline"] = pipeline;
  ordered_json per;
  for (const auto& [language, count] : ingested) {
    ordered_json e;
    e["ingested"] = count;
    e["kept"] = kept.count(language) ? kept.at(language) : 0;
    per[language] = e;
  }
  j["per_language"] = per;
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

void write_timings(const std::filesystem::path& path, const std::vector<StageTiming>& timings) {
  ordered_json arr = ordered_json::array();
  for (const auto& timing : timings) {
    ordered_json e;
    e["stage"] = timing.stage;
    e["cpu_seconds"] = timing.cpu_seconds;
    arr.push_back(e);
  }
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << arr.dump(2) << "\n";
}

// Groups kept docs by language and writes <label>.<lang>.jsonl files,
// each sorted by docid tuple order.
std::map<std::string, std::uint64_t> write_final_outputs(
    const std::filesystem::path& final_dir, const std::string& label,
    std::vector<StagedDoc>& docs) {
  std::map<std::string, std::vector<const Document*>> by_language;
  for (const auto& staged : docs)
    if (!staged.dropped) by_language[staged.doc.meta.language].push_back(&staged.doc);
  std::map<std::string, std::uint64_t> kept;
  std::filesystem::create_directories(final_dir);
  for (auto& [language, group] : by_language) {
    std::sort(group.begin(), group.end(), [](const Document* a, const Document* b) {
      return docid_less(a->meta.docid, b->meta.docid);
    });
    std::vector<std::string> lines;
    lines.reserve(group.size());
    for (const Document* doc : group) lines.push_back(serialize_document(*doc));
    write_lines(final_dir / (label + "." + language + ".jsonl"), lines);
    kept[language] = group.size();
  }
  return kept;
}

LidModel load_lid_model_or_fail(const PipelineConfig& config) {
  if (config.lid_model.empty())
    throw ConfigError("lid_model is required before any processing");
  if (!std::filesystem::exists(config.lid_model))
    throw ConfigError("lid_model not found: " + config.lid_model.string());
  return LidModel::load(config.lid_model);
}

// Per-language dedup over kept docs; appends drop log + cluster lines.
void dedup_stage(std::vector<StagedDoc>& docs, const PipelineConfig& config,
                 const std::string& partition_prefix, StageLog& log,
                 std::vector<std::string>& cluster_lines) {
  std::map<std::string, std::vector<std::size_t>> by_language;
  for (std::size_t i = 0; i < docs.size(); ++i)
    if (!docs[i].dropped) by_language[docs[i].doc.meta.language].push_back(i);

  for (const auto& [language, indices] : by_language) {
    std::vector<Document> partition;
    partition.reserve(indices.size());
    for (std::size_t i : indices) partition.push_back(docs[i].doc);
    DedupResult result = dedup_partition(partition, config.dedup);

    std::set<std::string> dropped(result.dropped.begin(), result.dropped.end());
    for (std::size_t i : indices)
      if (dropped.count(docs[i].doc.meta.docid)) docs[i].dropped = true;
    for (const auto& [docid, representative] : result.drop_pairs)
      log.dedup.push_back({docid, "dedup", "duplicate_of:" + representative, language});
    for (const auto& cluster : result.clusters) {
      ordered_json j;
      j["representative"] = cluster.representative;
      ordered_json members = ordered_json::array();
      for (const auto& member : cluster.members) members.push_back(member);
      j["members"] = members;
      j["partition"] = partition_prefix + "/" + language;
      cluster_lines.push_back(j.dump());
    }
  }
}

}  // namespace

RunSummary run_curated(const PipelineConfig& config) {
  if (config.corpus.empty()) throw ConfigError("run_curated needs a corpus name");
  if (config.input.empty() || config.output.empty())
    throw ConfigError("run_curated needs input and output paths");
  LidModel lid = load_lid_model_or_fail(config);

  RunSummary summary;
  summary.label = config.corpus;
  summary.run_dir = config.output / config.corpus;
  std::filesystem::create_directories(summary.run_dir);

  double t0 = process_cpu_seconds();
  IngestStats ingest_stats;
  std::vector<Document> raw =
      ingest_text_corpus(config.input, config.corpus, &ingest_stats, config.ingest_date);
  for (const auto& error : ingest_stats.errors) summary.warnings.push_back(error);

  std::vector<StagedDoc> docs(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) docs[i].doc = std::move(raw[i]);
  parallel_for(docs.size(), config.workers, [&](std::size_t i) {
    docs[i].doc.text = normalize_content(docs[i].doc.text);
  });
  double t1 = process_cpu_seconds();
  summary.timings.push_back({"conversion", t1 - t0});

  parallel_for(docs.size(), config.workers, [&](std::size_t i) {
    auto labels = lid.label_lines(docs[i].doc.text);
    docs[i].ann.line_languages = to_line_languages(labels);
    docs[i].doc = apply_language(docs[i].doc, aggregate_line_labels(labels));
  });
  for (const auto& staged : docs) ++summary.ingested_per_language[staged.doc.meta.language];
  persist_stage(summary.run_dir, "annotated", docs, true);

  StageLog log;
  for (auto& staged : docs) {
    auto reason = prefilter(staged.doc, config.min_chars, config.min_lang_score);
    if (reason) {
      staged.dropped = true;
      log.prefilter.push_back({staged.doc.meta.docid, "prefilter", to_string(*reason),
                               staged.doc.meta.language});
    }
  }
  persist_stage(summary.run_dir, "prefiltered", docs, false);
  double t2 = process_cpu_seconds();
  summary.timings.push_back({"filtering", t2 - t1});

  std::vector<std::string> cluster_lines;
  if (config.dedup_curated) {
    dedup_stage(docs, config, config.corpus, log, cluster_lines);
    double t3 = process_cpu_seconds();
    summary.timings.push_back({"deduplication", t3 - t2});
  }

  summary.kept_per_language = write_final_outputs(summary.run_dir / "final", config.corpus, docs);
  auto drops = log.merged();
  std::vector<std::string> drop_lines;
  for (const auto& entry : drops) drop_lines.push_back(drop_entry_json(entry));
  write_lines(summary.run_dir / "logs" / "drops.jsonl", drop_lines);
  if (config.dedup_curated)
    write_lines(summary.run_dir / "logs" / "clusters.jsonl", cluster_lines);
  write_counts(summary.run_dir / "logs" / "counts.json", config.corpus, "curated",
               summary.ingested_per_language, summary.kept_per_language);
  write_timings(summary.run_dir / "logs" / "timings.json", summary.timings);

  summary.drops_per_stage["prefilter"] = log.prefilter.size();
  summary.drops_per_stage["dedup"] = log.dedup.size();
  return summary;
}

RunSummary run_web(const PipelineConfig& config) {
  if (config.dump.empty()) throw ConfigError("run_web needs a dump label");
  DumpRef dump = parse_dump_label(config.dump);
  if (config.input.empty() || config.output.empty())
    throw ConfigError("run_web needs input and output paths");
  LidModel lid = load_lid_model_or_fail(config);
  std::optional<KNModel> harmful_lm;
  if (config.harmful_filter_enabled) {
    if (config.harmful_lm.empty())
      throw ConfigError("harmful_lm is required while harmful filtering is enabled");
    if (!std::filesystem::exists(config.harmful_lm))
      throw ConfigError("harmful_lm not found: " + config.harmful_lm.string());
    harmful_lm = KNModel::load(config.harmful_lm);
  }

  // Input layout: <input>/<dump>/raw/, <input>/raw/, or flat files.
  std::filesystem::path raw_dir = config.input / config.dump / "raw";
  if (!std::filesystem::is_directory(raw_dir)) raw_dir = config.input / "raw";
  if (!std::filesystem::is_directory(raw_dir)) raw_dir = config.input;
  if (!std::filesystem::is_directory(raw_dir))
    throw IoError("no WET input directory under " + config.input.string());

  RunSummary summary;
  summary.label = config.dump;
  summary.run_dir = config.output / config.dump;
  std::filesystem::create_directories(summary.run_dir);

  double t0 = process_cpu_seconds();
  // Prefer *.wet* files; fall back to every regular file when none match.
  std::vector<std::filesystem::path> files, wet_named;
  for (const auto& entry : std::filesystem::directory_iterator(raw_dir)) {
    if (!entry.is_regular_file()) continue;
    files.push_back(entry.path());
    if (entry.path().filename().string().find(".wet") != std::string::npos)
      wet_named.push_back(entry.path());
  }
  if (!wet_named.empty()) files = std::move(wet_named);
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no WET files under " + raw_dir.string());

  IngestStats ingest_stats;
  std::vector<StagedDoc> docs;
  for (std::size_t f = 0; f < files.size(); ++f) {
    auto file_docs = ingest_wet_file(files[f], dump, config.dump, f, true, &ingest_stats);
    for (auto& doc : file_docs) {
      StagedDoc staged;
      staged.doc = std::move(doc);
      docs.push_back(std::move(staged));
    }
  }
  parallel_for(docs.size(), config.workers, [&](std::size_t i) {
    docs[i].doc.text = normalize_content(docs[i].doc.text);
  });
  double t1 = process_cpu_seconds();
  summary.timings.push_back({"conversion", t1 - t0});

  // Annotation: quality warnings, harmful perplexity, line languages.
  std::vector<std::string> unscoreable;
  std::mutex unscoreable_mutex;
  parallel_for(docs.size(), config.workers, [&](std::size_t i) {
    StagedDoc& staged = docs[i];
    staged.ann.warnings = annotate_quality(staged.doc.text);
    auto labels = lid.label_lines(staged.doc.text);
    staged.ann.line_languages = to_line_languages(labels);
    staged.doc = apply_language(staged.doc, aggregate_line_labels(labels));
    if (harmful_lm) {
      auto tokens = normalize_for_lm(staged.doc.text);
      if (tokens.empty()) {
        std::lock_guard<std::mutex> lock(unscoreable_mutex);
        unscoreable.push_back(staged.doc.meta.docid);
      } else {
        staged.ann.harmful_ppl = harmful_lm->perplexity_tokens(tokens).value;
      }
    }
  });
  std::sort(unscoreable.begin(), unscoreable.end(), docid_less);
  for (const auto& docid : unscoreable)
    summary.warnings.push_back("unscoreable for harmful perplexity (zero tokens): " + docid);
  for (const auto& staged : docs) ++summary.ingested_per_language[staged.doc.meta.language];
  persist_stage(summary.run_dir, "annotated", docs, true);

  StageLog log;
  for (auto& staged : docs) {
    if (staged.dropped) continue;
    auto reason = prefilter(staged.doc, config.min_chars, config.min_lang_score);
    if (reason) {
      staged.dropped = true;
      log.prefilter.push_back({staged.doc.meta.docid, "prefilter", to_string(*reason),
                               staged.doc.meta.language});
    }
  }
  persist_stage(summary.run_dir, "prefiltered", docs, false);

  for (auto& staged : docs) {
    if (staged.dropped) continue;
    auto fatal = filter_quality(staged.ann.warnings, config.quality_policy);
    if (!fatal.empty()) {
      staged.dropped = true;
      log.quality.push_back({staged.doc.meta.docid, "quality", quality_reason(fatal),
                             staged.doc.meta.language});
      continue;
    }
    if (harmful_lm && staged.ann.harmful_ppl &&
        filter_harmful_drops(*staged.ann.harmful_ppl, config.harmful_ppl_threshold)) {
      staged.dropped = true;
      log.harmful.push_back({staged.doc.meta.docid, "harmful", "harmful_ppl_below_threshold",
                             staged.doc.meta.language});
    }
  }
  persist_stage(summary.run_dir, "filtered", docs, false);
  double t2 = process_cpu_seconds();
  summary.timings.push_back({"filtering", t2 - t1});

  std::vector<std::string> cluster_lines;
  dedup_stage(docs, config, config.dump, log, cluster_lines);
  double t3 = process_cpu_seconds();
  summary.timings.push_back({"deduplication", t3 - t2});

  summary.kept_per_language = write_final_outputs(summary.run_dir / "final", config.dump, docs);
  auto drops = log.merged();
  std::vector<std::string> drop_lines;
  for (const auto& entry : drops) drop_lines.push_back(drop_entry_json(entry));
  write_lines(summary.run_dir / "logs" / "drops.jsonl", drop_lines);
  write_lines(summary.run_dir / "logs" / "clusters.jsonl", cluster_lines);
  write_counts(summary.run_dir / "logs" / "counts.json", config.dump, "web",
               summary.ingested_per_language, summary.kept_per_language);
  write_timings(summary.run_dir / "logs" / "timings.json", summary.timings);

  summary.drops_per_stage["prefilter"] = log.prefilter.size();
  summary.drops_per_stage["quality"] = log.quality.size();
  summary.drops_per_stage["harmful"] = log.harmful.size();
  summary.drops_per_stage["dedup"] = log.dedup.size();
  return summary;
}

std::vector<Document> read_jsonl_documents(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Document> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    docs.push_back(parse_document(line));
  }
  return docs;
}

void write_jsonl_documents(const std::filesystem::path& path,
                           const std::vector<Document>& docs) {
  std::vector<std::string> lines;
  lines.reserve(docs.size());
  for (const auto& doc : docs) lines.push_back(serialize_document(doc));
  write_lines(path, lines);
}

std::vector<DropLogEntry> read_drop_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<DropLogEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line);
    DropLogEntry entry;
    entry.docid = j.value("docid", "");
    entry.stage = j.value("stage", "");
    entry.reason = j.value("reason", "");
    entry.language = j.value("language", "");
    entries.push_back(std::move(entry));
  }
  return entries;
}

AnalyticsReport run_analyze(const std::filesystem::path& run_dir,
                            const std::filesystem::path& report_dir,
                            const std::optional<std::filesystem::path>& timings_file) {
  std::filesystem::path counts_path = run_dir / "logs" / "counts.json";
  std::filesystem::path drops_path = run_dir / "logs" / "drops.jsonl";
  std::vector<std::string> missing;
  if (!std::filesystem::exists(counts_path)) missing.push_back(counts_path.string());
  if (!std::filesystem::exists(drops_path)) missing.push_back(drops_path.string());
  if (!missing.empty()) {
    std::string msg = "run directory incomplete; missing:";
    for (const auto& path : missing) msg += " " + path;
    throw IoError(msg);
  }

  std::ifstream counts_in(counts_path);
  ordered_json counts_json = ordered_json::parse(counts_in);
  std::map<std::string, std::uint64_t> ingested;
  for (auto it = counts_json["per_language"].begin(); it != counts_json["per_language"].end();
       ++it)
    ingested[it.key()] = it.value()["ingested"].get<std::uint64_t>();

  auto drops = read_drop_log(drops_path);
  AnalyticsReport report;
  report.removal = compute_removal_stats(drops, ingested);

  std::map<std::string, std::pair<double, std::uint64_t>> filter_values, dedup_values;
  std::vector<double> ingested_sizes, filter_pcts, filtered_sizes, dedup_pcts;
  for (const auto& [language, removal] : report.removal.per_language) {
    filter_values[language] = {removal.r_filter, removal.docs_ingested};
    dedup_values[language] = {removal.r_dedup, removal.docs_ingested};
    ingested_sizes.push_back(static_cast<double>(removal.docs_ingested));
    filter_pcts.push_back(removal.r_filter);
    filtered_sizes.push_back(static_cast<double>(removal.docs_after_filtering));
    dedup_pcts.push_back(removal.r_dedup);
  }
  try {
    report.filtering_disparity = disparity_index(filter_values);
  } catch (const ValidationError&) {
  }
  try {
    report.dedup_disparity = disparity_index(dedup_values);
  } catch (const ValidationError&) {
  }
  try {
    report.filter_vs_ingested = pearson(ingested_sizes, filter_pcts);
  } catch (const ValidationError&) {
  }
  try {
    report.dedup_vs_filtered = pearson(filtered_sizes, dedup_pcts);
  } catch (const ValidationError&) {
  }

  if (timings_file) {
    std::ifstream timings_in(*timings_file);
    if (!timings_in) throw IoError("cannot open " + timings_file->string());
    ordered_json timings_json = ordered_json::parse(timings_in);
    std::vector<StageTiming> timings;
    for (const auto& e : timings_json)
      timings.push_back({e["stage"].get<std::string>(), e["cpu_seconds"].get<double>()});
    report.stage_shares = stage_share(timings);
  }

  emit_report(report, report_dir);
  return report;
}

}  // namespace corpusprep
