#include "corpusprep/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "corpusprep/error.hpp"
#include "json.hpp"

namespace corpusprep {

using ordered_json = nlohmann::ordered_json;

RemovalStats compute_removal_stats(const std::vector<DropLogEntry>& drops,
                                   const std::map<std::string, std::uint64_t>& ingested) {
  RemovalStats stats;
  std::map<std::string, std::uint64_t> filter_drops, dedup_drops;
  for (const auto& entry : drops) {
    if (entry.stage == "dedup") ++dedup_drops[entry.language];
    else ++filter_drops[entry.language];  // prefilter | quality | harmful
  }
  for (const auto& [language, count] : ingested) {
    if (count == 0) {
      stats.warnings.push_back("language '" + language + "' has zero ingested documents; omitted");
      continue;
    }
    LanguageRemoval removal;
    removal.docs_ingested = count;
    std::uint64_t filtered = filter_drops.count(language) ? filter_drops.at(language) : 0;
    std::uint64_t deduped = dedup_drops.count(language) ? dedup_drops.at(language) : 0;
    if (filtered + deduped > count)
      throw ValidationError("drop log exceeds ingest count for language '" + language + "'");
    removal.docs_after_filtering = count - filtered;
    removal.docs_after_dedup = removal.docs_after_filtering - deduped;
    removal.r_filter = 100.0 * static_cast<double>(filtered) / static_cast<double>(count);
    removal.r_dedup = removal.docs_after_filtering == 0
                          ? 0.0
                          : 100.0 * static_cast<double>(deduped) /
                                static_cast<double>(removal.docs_after_filtering);
    stats.per_language[language] = removal;
  }
  return stats;
}

DisparityReport disparity_index(
    const std::map<std::string, std::pair<double, std::uint64_t>>& values,
    DisparityMode mode) {
  if (values.size() < 2)
    throw ValidationError("disparity index needs at least 2 languages");
  DisparityReport report;
  report.mode = mode;
  for (const auto& [language, value] : values) {
    const auto& [removal_pct, doc_count] = value;
    double ratio;
    if (mode == DisparityMode::FormulaAsPrinted) {
      if (doc_count == 0)
        throw ValidationError("language '" + language + "' has zero documents");
      ratio = removal_pct / static_cast<double>(doc_count);
    } else {
      ratio = removal_pct / 100.0;
    }
    report.per_language[language].removed_ratio = ratio;
  }
  double mean = 0.0;
  for (const auto& [language, entry] : report.per_language) mean += entry.removed_ratio;
  mean /= static_cast<double>(report.per_language.size());
  double var = 0.0;
  for (const auto& [language, entry] : report.per_language) {
    double d = entry.removed_ratio - mean;
    var += d * d;
  }
  var /= static_cast<double>(report.per_language.size());  // population variance
  double sigma = std::sqrt(var);
  if (sigma == 0.0)
    throw ValidationError("disparity index undefined: all removal ratios are equal");
  report.mean = mean;
  report.stddev = sigma;
  for (auto& [language, entry] : report.per_language)
    entry.z_score = (entry.removed_ratio - mean) / sigma;
  return report;
}

namespace {

// Modified Lentz continued fraction for the incomplete beta function.
double incomplete_beta_cf(double x, double a, double b) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  constexpr int kMaxIter = 10000;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw ValidationError("incomplete beta continued fraction failed to converge");
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0) || a <= 0.0 || b <= 0.0)
    throw ValidationError("regularized_incomplete_beta: arguments out of domain");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                     a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * incomplete_beta_cf(x, a, b) / a;
  return 1.0 - front * incomplete_beta_cf(1.0 - x, b, a) / b;
}

double student_t_two_tailed(double t, double df) {
  if (df <= 0.0) throw ValidationError("student t needs positive degrees of freedom");
  if (std::isinf(t)) return 0.0;
  double x = df / (df + t * t);
  return regularized_incomplete_beta(x, df / 2.0, 0.5);
}

CorrelationResult pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw ValidationError("pearson: input lengths differ");
  if (xs.size() < 3) throw ValidationError("pearson: need at least 3 points");
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ValidationError("pearson: undefined for zero-variance input");

  CorrelationResult result;
  result.n = xs.size();
  result.r = sxy / std::sqrt(sxx * syy);
  result.r = std::clamp(result.r, -1.0, 1.0);
  double df = n - 2.0;
  if (std::fabs(result.r) >= 1.0) {
    result.t = std::numeric_limits<double>::infinity() * (result.r > 0 ? 1.0 : -1.0);
    result.p_two_tailed = 0.0;
  } else {
    result.t = result.r * std::sqrt(df / (1.0 - result.r * result.r));
    result.p_two_tailed = student_t_two_tailed(result.t, df);
  }
  return result;
}

RegressionResult linear_regression(const std::vector<double>& xs,
                                   const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw ValidationError("linear_regression: input lengths differ");
  if (xs.size() < 2) throw ValidationError("linear_regression: need at least 2 points");
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) throw ValidationError("linear_regression: zero variance in x");
  RegressionResult result;
  result.slope = sxy / sxx;
  result.intercept = my - result.slope * mx;
  result.residuals.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    result.residuals[i] = ys[i] - (result.slope * xs[i] + result.intercept);
  return result;
}

std::map<std::string, StageShare> stage_share(const std::vector<StageTiming>& timings) {
  double total = 0.0;
  std::map<std::string, StageShare> shares;
  for (const auto& timing : timings) {
    if (timing.cpu_seconds < 0.0)
      throw ValidationError("stage '" + timing.stage + "' has negative cpu time");
    if (shares.count(timing.stage))
      throw ValidationError("duplicate stage '" + timing.stage + "'");
    shares[timing.stage] = {};
    total += timing.cpu_seconds;
  }
  if (total <= 0.0) throw ValidationError("stage_share: total cpu time is zero");
  for (const auto& timing : timings) {
    double raw = 100.0 * timing.cpu_seconds / total;
    shares[timing.stage].raw = raw;
    shares[timing.stage].rounded = std::round(raw * 10.0) / 10.0;
  }
  return shares;
}

namespace {

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

ordered_json correlation_json(const CorrelationResult& c) {
  ordered_json j;
  j["r"] = c.r;
  j["n"] = c.n;
  j["t"] = c.t;
  j["p_two_tailed"] = c.p_two_tailed;
  return j;
}

ordered_json disparity_json(const DisparityReport& d) {
  ordered_json j;
  j["mode"] = d.mode == DisparityMode::FormulaAsPrinted ? "formula" : "ratio";
  j["mu"] = d.mean;
  j["sigma"] = d.stddev;
  ordered_json per;
  for (const auto& [language, entry] : d.per_language) {
    ordered_json e;
    e["R"] = entry.removed_ratio;
    e["DI"] = entry.z_score;
    per[language] = e;
  }
  j["per_language"] = per;
  return j;
}

std::string disparity_csv_rows(const std::string& metric, const DisparityReport& d) {
  // Rows sorted by DI descending within the metric.
  std::vector<std::pair<std::string, DisparityEntry>> rows(d.per_language.begin(),
                                                           d.per_language.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.second.z_score != b.second.z_score ? a.second.z_score > b.second.z_score
                                                : a.first < b.first;
  });
  std::string out;
  for (const auto& [language, entry] : rows)
    out += metric + "," + language + "," + format_double(entry.removed_ratio) + "," +
           format_double(entry.z_score) + "\n";
  return out;
}

}  // namespace

void emit_report(const AnalyticsReport& report, const std::filesystem::path& out_dir) {
  try {
    std::filesystem::create_directories(out_dir);
  } catch (const std::filesystem::filesystem_error& e) {
    throw IoError("cannot create report directory " + out_dir.string() + ": " + e.what());
  }

  ordered_json root;
  root["schema_version"] = 1;
  ordered_json removal;
  for (const auto& [language, r] : report.removal.per_language) {
    ordered_json e;
    e["docs_ingested"] = r.docs_ingested;
    e["docs_after_filtering"] = r.docs_after_filtering;
    e["docs_after_dedup"] = r.docs_after_dedup;
    e["r_filter"] = r.r_filter;
    e["r_dedup"] = r.r_dedup;
    removal[language] = e;
  }
  root["removal_stats"] = removal;
  root["warnings"] = report.removal.warnings;
  root["disparity"] = ordered_json::object();
  root["disparity"]["filtering"] =
      report.filtering_disparity ? disparity_json(*report.filtering_disparity)
                                 : ordered_json(nullptr);
  root["disparity"]["deduplication"] =
      report.dedup_disparity ? disparity_json(*report.dedup_disparity) : ordered_json(nullptr);
  root["correlations"] = ordered_json::object();
  root["correlations"]["filter_removal_vs_ingested"] =
      report.filter_vs_ingested ? correlation_json(*report.filter_vs_ingested)
                                : ordered_json(nullptr);
  root["correlations"]["dedup_removal_vs_filtered"] =
      report.dedup_vs_filtered ? correlation_json(*report.dedup_vs_filtered)
                               : ordered_json(nullptr);
  if (report.stage_shares) {
    ordered_json shares;
    for (const auto& [stage, share] : *report.stage_shares) {
      ordered_json e;
      e["raw"] = share.raw;
      e["rounded"] = share.rounded;
      shares[stage] = e;
    }
    root["stage_share"] = shares;
  }
  write_file(out_dir / "report.json", root.dump(2) + "\n");

  std::string removal_csv = "language,r_filter,r_dedup\n";
  for (const auto& [language, r] : report.removal.per_language)
    removal_csv += language + "," + format_double(r.r_filter) + "," +
                   format_double(r.r_dedup) + "\n";
  write_file(out_dir / "removal_by_language.csv", removal_csv);

  std::string disparity_csv = "metric,language,R,DI\n";
  if (report.filtering_disparity)
    disparity_csv += disparity_csv_rows("filtering", *report.filtering_disparity);
  if (report.dedup_disparity)
    disparity_csv += disparity_csv_rows("deduplication", *report.dedup_disparity);
  write_file(out_dir / "disparity.csv", disparity_csv);

  if (report.stage_shares) {
    std::string share_csv = "stage,cpu_share_pct\n";
    std::ostringstream rounded;
    for (const auto& [stage, share] : *report.stage_shares) {
      rounded.str("");
      rounded.setf(std::ios::fixed);
      rounded.precision(1);
      rounded << share.rounded;
      share_csv += stage + "," + rounded.str() + "\n";
    }
    write_file(out_dir / "stage_share.csv", share_csv);
  }
}

}  // namespace corpusprep
