#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace corpusprep {

struct LanguageRemoval {
  std::uint64_t docs_ingested = 0;
  std::uint64_t docs_after_filtering = 0;
  std::uint64_t docs_after_dedup = 0;
  double r_filter = 0.0;  // percentage removed by filtering
  double r_dedup = 0.0;   // percentage removed by deduplication
};

struct RemovalStats {
  std::map<std::string, LanguageRemoval> per_language;
  std::vector<std::string> warnings;  // e.g. zero-ingest languages omitted
};

struct DropLogEntry {
  std::string docid;
  std::string stage;   // prefilter | quality | harmful | dedup
  std::string reason;
  std::string language;
};

// Exact per-language counts and removal percentages from drop logs plus
// per-language ingest counts.
RemovalStats compute_removal_stats(const std::vector<DropLogEntry>& drops,
                                   const std::map<std::string, std::uint64_t>& ingested);

enum class DisparityMode { FormulaAsPrinted, RemovedToTotalRatio };

struct DisparityEntry {
  double removed_ratio = 0.0;  // R_l
  double z_score = 0.0;        // DI_l
};

struct DisparityReport {
  DisparityMode mode = DisparityMode::FormulaAsPrinted;
  double mean = 0.0;   // mu_R
  double stddev = 0.0; // population sigma_R
  std::map<std::string, DisparityEntry> per_language;
};

// Z-score of the removed-to-data ratio per language.
// values: language -> (r_l removal percentage, D_l document count).
DisparityReport disparity_index(
    const std::map<std::string, std::pair<double, std::uint64_t>>& values,
    DisparityMode mode = DisparityMode::FormulaAsPrinted);

struct CorrelationResult {
  double r = 0.0;
  std::size_t n = 0;
  double t = 0.0;
  double p_two_tailed = 1.0;
};

// Sample Pearson correlation with a two-tailed Student-t p-value computed
// via the regularized incomplete beta function.
CorrelationResult pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Continued-fraction regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double x, double a, double b);

// Two-tailed p for a t statistic with df degrees of freedom.
double student_t_two_tailed(double t, double df);

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
};

RegressionResult linear_regression(const std::vector<double>& xs, const std::vector<double>& ys);

struct StageTiming {
  std::string stage;
  double cpu_seconds = 0.0;
};

struct StageShare {
  double raw = 0.0;      // exact percentage
  double rounded = 0.0;  // one decimal, for reports
};

std::map<std::string, StageShare> stage_share(const std::vector<StageTiming>& timings);

struct AnalyticsReport {
  RemovalStats removal;
  std::optional<DisparityReport> filtering_disparity;
  std::optional<DisparityReport> dedup_disparity;
  std::optional<CorrelationResult> filter_vs_ingested;
  std::optional<CorrelationResult> dedup_vs_filtered;
  std::optional<std::map<std::string, StageShare>> stage_shares;
};

// Writes report.json plus removal_by_language.csv, disparity.csv and (when
// timings are present) stage_share.csv. Deterministic bytes, LF endings.
void emit_report(const AnalyticsReport& report, const std::filesystem::path& out_dir);

}  // namespace corpusprep
