#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "corpusprep/analytics.hpp"
#include "corpusprep/dedup.hpp"
#include "corpusprep/doc_model.hpp"
#include "corpusprep/error.hpp"
#include "corpusprep/fixtures.hpp"
#include "corpusprep/ingest.hpp"
#include "corpusprep/langid.hpp"
#include "corpusprep/ngram_lm.hpp"
#include "corpusprep/normalize.hpp"
#include "corpusprep/pipeline.hpp"
#include "corpusprep/quality.hpp"

namespace py = pybind11;
using namespace corpusprep;

namespace {

py::dict document_to_dict(const Document& doc) {
  py::dict meta;
  meta["docid"] = doc.meta.docid;
  if (doc.meta.url) meta["url"] = *doc.meta.url;
  if (doc.meta.title) meta["title"] = *doc.meta.title;
  meta["download_date"] = doc.meta.download_date;
  meta["language"] = doc.meta.language;
  meta["language_score"] = doc.meta.language_score;
  py::dict out;
  out["meta"] = meta;
  out["text"] = doc.text;
  return out;
}

Document document_from_dict(const py::dict& d) {
  Document doc;
  py::dict meta = d["meta"].cast<py::dict>();
  doc.meta.docid = meta["docid"].cast<std::string>();
  if (meta.contains("url")) doc.meta.url = meta["url"].cast<std::string>();
  if (meta.contains("title")) doc.meta.title = meta["title"].cast<std::string>();
  if (meta.contains("download_date"))
    doc.meta.download_date = meta["download_date"].cast<std::string>();
  if (meta.contains("language")) doc.meta.language = meta["language"].cast<std::string>();
  if (meta.contains("language_score"))
    doc.meta.language_score = meta["language_score"].cast<double>();
  doc.text = d["text"].cast<std::string>();
  return doc;
}

std::set<std::uint64_t> shingles_from_any(const py::object& obj, std::size_t k) {
  if (py::isinstance<py::str>(obj)) return shingle(obj.cast<std::string>(), k);
  std::set<std::uint64_t> s;
  for (const auto& item : obj) s.insert(item.cast<std::uint64_t>());
  return s;
}

}  // namespace

PYBIND11_MODULE(_corpusprep, m) {
  m.doc() = "Multilingual corpus preparation: normalization, language id, "
            "quality filtering, Kneser-Ney scoring, MinHash/LSH dedup, analytics.";

  py::register_exception<ParseError>(m, "ParseError");
  py::register_exception<ValidationError>(m, "ValidationError");
  py::register_exception<ConfigError>(m, "ConfigError");

  // normalize
  m.def("normalize_content", [](const std::string& text) { return normalize_content(text); });
  m.def("normalize_for_lm", [](const std::string& text) { return normalize_for_lm(text); });
  m.def("is_idempotent_check",
        [](const std::string& text) { return is_idempotent_check(text); });

  // doc model
  m.def("make_docid", &make_docid);
  m.def("serialize_document",
        [](const py::dict& d) { return serialize_document(document_from_dict(d)); });
  m.def("parse_document",
        [](const std::string& line) { return document_to_dict(parse_document(line)); });
  m.def("validate_metadata", [](const py::dict& d) {
    std::vector<std::string> out;
    for (const auto& v : validate_metadata(document_from_dict(d)))
      out.push_back(v.field + ": " + v.rule);
    return out;
  });

  // quality
  m.def("annotate_quality", [](const std::string& text) {
    std::vector<std::string> names;
    for (QualityWarning w : annotate_quality(text)) names.emplace_back(to_string(w));
    return names;
  });
  m.def(
      "prefilter",
      [](const py::dict& d, std::size_t min_chars, double min_lang_score) -> py::object {
        auto reason = prefilter(document_from_dict(d), min_chars, min_lang_score);
        if (!reason) return py::none();
        return py::str(to_string(*reason));
      },
      py::arg("doc"), py::arg("min_chars") = 200, py::arg("min_lang_score") = 0.5);
  m.def("filter_harmful_drops", &filter_harmful_drops, py::arg("harmful_ppl"),
        py::arg("threshold") = 5.0);

  // langid
  py::class_<LidModel>(m, "LidModel")
      .def_static("train",
                  [](const std::map<std::string, std::string>& corpus) {
                    return LidModel::train(corpus);
                  })
      .def_static("load", &LidModel::load)
      .def("save", &LidModel::save)
      .def("classify_line",
           [](const LidModel& model, const std::string& line) {
             LineLabel label = model.classify_line(line);
             return py::make_tuple(label.language, label.confidence, label.byte_len);
           })
      .def("classify_document", [](const LidModel& model, const std::string& text) {
        DocLangDecision decision = model.classify_document(text);
        py::dict out;
        out["kind"] = decision.kind == DocLangKind::Monolingual     ? "monolingual"
                      : decision.kind == DocLangKind::Multilingual ? "multilingual"
                                                                    : "unknown";
        out["languages"] = decision.languages;
        out["weighted_confidence"] = decision.weighted_confidence;
        return out;
      });

  // ngram lm
  py::class_<KNModel>(m, "KNModel")
      .def_static("train",
                  [](const std::vector<std::vector<std::string>>& sentences, int order) {
                    return KNModel::train_from_sentences(sentences, order);
                  },
                  py::arg("sentences"), py::arg("order") = 5)
      .def_static("load", &KNModel::load)
      .def("save", &KNModel::save)
      .def("log_prob",
           [](const KNModel& model, const std::vector<std::string>& context,
              const std::string& word) { return model.log_prob(context, word); })
      .def("perplexity", [](const KNModel& model, const std::string& text) {
        PerplexityScore score = model.perplexity(text);
        return py::make_tuple(score.value, score.token_count);
      });

  // dedup
  m.def("shingle", [](const std::string& text, std::size_t k) { return shingle(text, k); },
        py::arg("text"), py::arg("k") = 5);
  m.def(
      "minhash_signature",
      [](const py::object& shingles_or_text, std::size_t k, std::size_t num_hashes,
         std::uint64_t seed) {
        return minhash_signature(shingles_from_any(shingles_or_text, k), num_hashes, seed)
            .values;
      },
      py::arg("shingles_or_text"), py::arg("k") = 5, py::arg("num_hashes") = 128,
      py::arg("seed") = 0x5eed);
  m.def(
      "estimate_jaccard",
      [](const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
         std::uint64_t seed) {
        MinHashSignature sa{a, seed}, sb{b, seed};
        return estimate_jaccard(sa, sb);
      },
      py::arg("a"), py::arg("b"), py::arg("seed") = 0x5eed);
  m.def(
      "dedup_documents",
      [](const std::vector<py::dict>& dicts, double threshold, std::uint64_t seed) {
        std::vector<Document> docs;
        docs.reserve(dicts.size());
        for (const auto& d : dicts) docs.push_back(document_from_dict(d));
        DedupParams params;
        params.threshold = threshold;
        params.seed = seed;
        DedupResult result = dedup_partition(docs, params);
        py::list kept;
        for (const auto& doc : result.kept) kept.append(document_to_dict(doc));
        py::list clusters;
        for (const auto& cluster : result.clusters) {
          py::dict c;
          c["representative"] = cluster.representative;
          c["members"] = cluster.members;
          clusters.append(c);
        }
        return py::make_tuple(kept, clusters);
      },
      py::arg("docs"), py::arg("threshold") = 0.7, py::arg("seed") = 0x5eed);

  // analytics
  m.def("pearson", [](const std::vector<double>& xs, const std::vector<double>& ys) {
    CorrelationResult r = pearson(xs, ys);
    py::dict out;
    out["r"] = r.r;
    out["n"] = r.n;
    out["t"] = r.t;
    out["p_two_tailed"] = r.p_two_tailed;
    return out;
  });
  m.def("regularized_incomplete_beta", &regularized_incomplete_beta);
  m.def(
      "disparity_index",
      [](const std::map<std::string, std::pair<double, std::uint64_t>>& values,
         const std::string& mode) {
        DisparityReport report = disparity_index(
            values, mode == "ratio" ? DisparityMode::RemovedToTotalRatio
                                    : DisparityMode::FormulaAsPrinted);
        py::dict out;
        for (const auto& [language, entry] : report.per_language)
          out[py::str(language)] = py::make_tuple(entry.removed_ratio, entry.z_score);
        return out;
      },
      py::arg("values"), py::arg("mode") = "formula");
  m.def("linear_regression",
        [](const std::vector<double>& xs, const std::vector<double>& ys) {
          RegressionResult r = linear_regression(xs, ys);
          return py::make_tuple(r.slope, r.intercept, r.residuals);
        });
  m.def("stage_share", [](const std::map<std::string, double>& timings) {
    std::vector<StageTiming> list;
    for (const auto& [stage, seconds] : timings) list.push_back({stage, seconds});
    py::dict out;
    for (const auto& [stage, share] : stage_share(list))
      out[py::str(stage)] = py::make_tuple(share.raw, share.rounded);
    return out;
  });

  // fixtures
  m.def("exact_jaccard_oracle", &fixtures::exact_jaccard_oracle, py::arg("text_a"),
        py::arg("text_b"), py::arg("k") = 5);
  m.def("language_sample", &fixtures::language_sample);
  m.def(
      "gen_synthetic_dump",
      [](const std::string& out_dir, std::uint64_t seed, std::size_t n_docs,
         std::size_t dup_pairs, const std::vector<std::string>& languages,
         const std::string& dump_label) {
        auto dump = fixtures::gen_synthetic_dump(out_dir, seed, n_docs, dup_pairs, languages,
                                                 dump_label);
        py::dict out;
        out["wet_file"] = dump.wet_file.string();
        out["manifest_file"] = dump.manifest_file.string();
        out["pairs"] = dump.pairs.size();
        return out;
      },
      py::arg("out_dir"), py::arg("seed"), py::arg("n_docs"), py::arg("dup_pairs"),
      py::arg("languages"), py::arg("dump_label") = "2024-22");

  // pipelines
  m.def("run_curated", [](const std::string& config_json) {
    RunSummary summary = run_curated(PipelineConfig::from_json_text(config_json));
    py::dict out;
    out["label"] = summary.label;
    out["run_dir"] = summary.run_dir.string();
    out["ingested"] = summary.ingested_per_language;
    out["kept"] = summary.kept_per_language;
    out["drops"] = summary.drops_per_stage;
    return out;
  });
  m.def("run_web", [](const std::string& config_json) {
    RunSummary summary = run_web(PipelineConfig::from_json_text(config_json));
    py::dict out;
    out["label"] = summary.label;
    out["run_dir"] = summary.run_dir.string();
    out["ingested"] = summary.ingested_per_language;
    out["kept"] = summary.kept_per_language;
    out["drops"] = summary.drops_per_stage;
    return out;
  });
  m.def(
      "run_analyze",
      [](const std::string& run_dir, const std::string& report_dir) {
        run_analyze(run_dir, report_dir);
      },
      py::arg("run_dir"), py::arg("report_dir"));

  m.attr("__version__") = "0.1.0";
}
