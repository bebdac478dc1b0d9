#pragma once

// Batch evaluation: replay record sets through the engine and summarise the
// certainty degrees per anomaly (mean, sample standard deviation, CV).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "cchain/csv.hpp"
#include "cchain/engine.hpp"
#include "cchain/format.hpp"
#include "cchain/json_util.hpp"
#include "cchain/kb_json.hpp"

namespace cchain {

/// `{"profile": {id: value}, "certainty": {symptom_id: 0-100}}`
inline AnswerScript parse_answer_script(std::string_view text) {
  auto doc = json_util::parse_document(text);
  json_util::Reader top(doc, "");
  top.only({"profile", "certainty"});
  AnswerScript script;
  if (top.has("profile")) {
    for (const auto& [key, value] : top.object("profile").items()) {
      if (value.is_number()) {
        script.profile[key] = value.get<double>();
      } else if (value.is_string()) {
        script.profile[key] = value.get<std::string>();
      } else {
        json_util::schema_error("/profile/" + key, "expected a number or a string");
      }
    }
  }
  if (top.has("certainty")) {
    for (const auto& [key, value] : top.object("certainty").items()) {
      if (!value.is_number()) json_util::schema_error("/certainty/" + key, "expected a number");
      script.certainty[key] = value.get<double>();
    }
  }
  return script;
}

struct Record {
  std::string record_id;
  std::string anomaly_id;
  AnswerScript script;
};

struct RecordSet {
  std::string label;
  std::vector<Record> records;
};

/// Manifest `record_id,anomaly,file` (header required); files relative to the manifest.
inline RecordSet load_record_set(const std::filesystem::path& dir, const std::string& manifest_name = "manifest.csv") {
  const auto manifest = dir / manifest_name;
  auto rows = csv::parse(read_text_file(manifest.string()));
  if (rows.empty() || rows.front() != csv::Row{"record_id", "anomaly", "file"}) {
    throw SyntaxError("manifest header must be record_id,anomaly,file", 1, 1);
  }
  RecordSet set{dir.filename().string(), {}};
  std::set<std::string> ids;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 3) throw SyntaxError("expected 3 fields", i + 1, 1);
    if (!ids.insert(r[0]).second) throw Error(ErrorKind::invariant, "duplicate record id " + r[0], r[0]);
    set.records.push_back({r[0], r[1], parse_answer_script(read_text_file((dir / r[2]).string()))});
  }
  return set;
}

struct RecordResult {
  std::string record_id;
  std::string anomaly_id;
  std::optional<Diagnosis> diagnosis;
  std::string error;  // set when the record could not be replayed
};

/// One diagnosis per record, in record order. Records are replayed on a small
/// thread pool; a failing record yields an error entry and nothing else.
inline std::vector<RecordResult> run_batch(std::shared_ptr<const KnowledgeBase> kb, const RecordSet& set,
                                           unsigned threads = 0) {
  std::vector<RecordResult> results(set.records.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < set.records.size(); i += step) {
      const auto& rec = set.records[i];
      auto& out = results[i];
      out.record_id = rec.record_id;
      out.anomaly_id = rec.anomaly_id;
      try {
        out.diagnosis = replay(kb, rec.anomaly_id, rec.script);
      } catch (const Error& e) {
        out.error = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, set.records.size())));
  std::vector<std::future<void>> jobs;
  for (unsigned t = 1; t < threads; ++t) jobs.push_back(std::async(std::launch::async, work, t, threads));
  work(0, threads);
  for (auto& j : jobs) j.get();
  return results;
}

struct SummaryStats {
  double x_bar = 0.0;
  double s = 0.0;   // sample standard deviation (n - 1)
  double cv = 0.0;  // s / x_bar
  std::size_t n = 0;
};

/// Mean, sample standard deviation and coefficient of variation.
inline SummaryStats summarize(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorKind::insufficient_data, "standard deviation needs at least two values");
  }
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  SummaryStats out;
  out.x_bar = mean;
  out.s = std::sqrt(ss / (n - 1.0));
  out.n = values.size();
  if (!(mean > 0.0)) throw Error(ErrorKind::insufficient_data, "coefficient of variation needs a positive mean");
  out.cv = out.s / mean;
  return out;
}

struct GroupSummary {
  std::string anomaly_id;
  std::size_t n = 0;
  double x_bar = 0.0;
  std::optional<double> s;   // n >= 2
  std::optional<double> cv;  // n >= 2 and mean > 0
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t rfi = 0;
};

/// Per-anomaly summaries in KB anomaly order. No-evidence diagnoses count as
/// degree 0. Failed records are skipped.
inline std::vector<GroupSummary> summarize_by_anomaly(const KnowledgeBase& kb,
                                                      std::span<const RecordResult> results) {
  std::vector<GroupSummary> out;
  for (const auto& a : kb.anomalies()) {
    GroupSummary g;
    g.anomaly_id = a.id;
    std::vector<double> degrees;
    for (const auto& r : results) {
      if (r.anomaly_id != a.id || !r.diagnosis) continue;
      degrees.push_back(r.diagnosis->certainty_degree.value_or(0.0));
      switch (r.diagnosis->verdict) {
        case Verdict::positive: ++g.positives; break;
        case Verdict::negative: ++g.negatives; break;
        case Verdict::needs_examination: ++g.rfi; break;
      }
    }
    if (degrees.empty()) continue;
    g.n = degrees.size();
    double sum = 0.0;
    for (double d : degrees) sum += d;
    g.x_bar = sum / static_cast<double>(g.n);
    if (g.n >= 2) {
      double ss = 0.0;
      for (double d : degrees) ss += (d - g.x_bar) * (d - g.x_bar);
      g.s = std::sqrt(ss / static_cast<double>(g.n - 1));
      if (g.x_bar > 0.0) g.cv = *g.s / g.x_bar;
    }
    out.push_back(std::move(g));
  }
  return out;
}

namespace eval_detail {
inline std::string opt3(const std::optional<double>& v) { return v ? format_truncated3(*v) : "NA"; }
}  // namespace eval_detail

/// `anomaly,x_bar,s,cv,n,positives,negatives,rfi`, 3-decimal truncation, NA where undefined.
inline std::string emit_report(std::span<const GroupSummary> groups) {
  std::vector<csv::Row> rows;
  for (const auto& g : groups) {
    rows.push_back({g.anomaly_id, format_truncated3(g.x_bar), eval_detail::opt3(g.s), eval_detail::opt3(g.cv),
                    std::to_string(g.n), std::to_string(g.positives), std::to_string(g.negatives),
                    std::to_string(g.rfi)});
  }
  return csv::write({"anomaly", "x_bar", "s", "cv", "n", "positives", "negatives", "rfi"}, rows);
}

/// `anomaly,mean,lower,upper` with lower/upper = mean -/+ s; s taken as 0 when undefined.
inline std::string emit_errorbar_data(std::span<const GroupSummary> groups) {
  std::vector<csv::Row> rows;
  for (const auto& g : groups) {
    const double s = g.s.value_or(0.0);
    rows.push_back({g.anomaly_id, format_truncated3(g.x_bar), format_truncated3(g.x_bar - s),
                    format_truncated3(g.x_bar + s)});
  }
  return csv::write({"anomaly", "mean", "lower", "upper"}, rows);
}

}  // namespace cchain
