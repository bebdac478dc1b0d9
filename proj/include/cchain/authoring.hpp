#pragma once

// Knowledge authoring: expert questionnaire sheets in, knowledge bases out.
//
//   sheet --average--> per-symptom CF --+--> probability table (report only)
//                                       +--> certainty-effect table --> symptoms + class rules
//   cut-off sheet --average--> cut-off table
//
// Probability of a symptom is its CF over the sum of all CFs. The certainty
// effect of a class is its maximum CF over the sum of the per-class maxima.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cchain/certainty.hpp"
#include "cchain/csv.hpp"
#include "cchain/format.hpp"
#include "cchain/kb_json.hpp"
#include "cchain/knowledge_base.hpp"

namespace cchain {

struct QuestionnaireRow {
  std::string symptom_id;
  std::string prompt;
  std::string class_label;
  std::vector<CertaintyValue> expert_cfs;
};

struct QuestionnaireSheet {
  std::string anomaly_id;
  std::vector<QuestionnaireRow> rows;
};

struct AveragedCf {
  std::string symptom_id;
  std::string class_label;
  CertaintyValue cf;
};

struct ProbabilityRow {
  std::string symptom_id;
  CertaintyValue certainty_factor;
  double probability = 0.0;
  double cumulative_probability = 0.0;
  double probability_amendment = 0.0;
  std::string class_label;
};

struct EffectRow {
  std::string class_label;
  CertaintyValue class_max_cf;
  double certainty_effect = 0.0;
  double uncertainty_effect = 0.0;
  double cumulative_certainty_effect = 0.0;
};

enum class CutoffKind { tpd, tnd };

struct ExpertCutoffRow {
  std::string anomaly_id;
  CutoffKind kind = CutoffKind::tpd;
  std::vector<double> expert_values;
  std::optional<double> reference;  // an externally supplied value to check against
};

struct ExpertCutoffSheet {
  std::vector<ExpertCutoffRow> rows;
};

struct CutoffDiscrepancy {
  std::string anomaly_id;
  CutoffKind kind;
  double computed;
  double reference;
};

struct CutoffTable {
  std::vector<CutoffEntry> entries;
  std::vector<CutoffDiscrepancy> discrepancies;
};

inline constexpr double kCutoffDiscrepancyThreshold = 0.005;

inline std::string_view to_string(CutoffKind k) { return k == CutoffKind::tpd ? "tpd" : "tnd"; }

namespace authoring_detail {

inline double parse_number(std::string_view field, std::size_t line, std::size_t column) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty() || !std::isfinite(value)) {
    throw SyntaxError("expected a number, got \"" + std::string(field) + "\"", line, column);
  }
  return value;
}

}  // namespace authoring_detail

inline void validate_sheet(const QuestionnaireSheet& sheet) {
  if (!is_identifier(sheet.anomaly_id)) {
    throw Error(ErrorKind::invariant, "anomaly id must match [a-z][a-z0-9_]*", sheet.anomaly_id);
  }
  if (sheet.rows.empty()) {
    throw Error(ErrorKind::invariant, "questionnaire has no symptoms", sheet.anomaly_id);
  }
  std::set<std::string> ids;
  const auto experts = sheet.rows.front().expert_cfs.size();
  for (const auto& row : sheet.rows) {
    if (!ids.insert(row.symptom_id).second) {
      throw Error(ErrorKind::invariant, "duplicate symptom id \"" + row.symptom_id + "\"", row.symptom_id);
    }
    if (row.class_label.empty()) {
      throw Error(ErrorKind::invariant, "symptom \"" + row.symptom_id + "\" has no class", row.symptom_id);
    }
    if (row.expert_cfs.empty() || row.expert_cfs.size() != experts) {
      throw Error(ErrorKind::invariant, "every symptom needs one CF per expert", row.symptom_id);
    }
    for (auto cf : row.expert_cfs) {
      if (cf.percent() < 0.0) throw Error(ErrorKind::range, "expert CF must be in [0, 100]", row.symptom_id);
    }
  }
}

/// `symptom_id,prompt,class,cf_expert1..cf_expertN`, header row required.
inline QuestionnaireSheet parse_questionnaire_csv(std::string_view text, const std::string& anomaly_id) {
  auto rows = csv::parse(text);
  if (rows.empty()) throw SyntaxError("empty questionnaire", 1, 1);
  const auto& header = rows.front();
  if (header.size() < 4 || header[0] != "symptom_id" || header[1] != "prompt" || header[2] != "class") {
    throw SyntaxError("header must be symptom_id,prompt,class,cf_expert1..cf_expertN", 1, 1);
  }
  QuestionnaireSheet sheet{anomaly_id, {}};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != header.size()) {
      throw SyntaxError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(r.size()),
                        i + 1, 1);
    }
    QuestionnaireRow row{r[0], r[1], r[2], {}};
    for (std::size_t c = 3; c < r.size(); ++c) {
      double v = authoring_detail::parse_number(r[c], i + 1, c + 1);
      if (v < 0.0 || v > 100.0) throw Error(ErrorKind::range, "expert CF must be in [0, 100]", row.symptom_id);
      row.expert_cfs.emplace_back(v);
    }
    sheet.rows.push_back(std::move(row));
  }
  validate_sheet(sheet);
  return sheet;
}

/// Per-symptom mean over the experts.
inline std::vector<AveragedCf> average_expert_cfs(const QuestionnaireSheet& sheet) {
  validate_sheet(sheet);
  std::vector<AveragedCf> out;
  for (const auto& row : sheet.rows) {
    double sum = 0.0;
    for (auto cf : row.expert_cfs) sum += cf.percent();
    out.push_back({row.symptom_id, row.class_label,
                   CertaintyValue(sum / static_cast<double>(row.expert_cfs.size()))});
  }
  return out;
}

inline std::vector<ProbabilityRow> probability_table(std::span<const AveragedCf> cfs) {
  if (cfs.empty()) throw Error(ErrorKind::empty_input, "probability table of zero symptoms");
  double total = 0.0;
  for (const auto& c : cfs) total += c.cf.percent();
  if (!(total > 0.0)) throw Error(ErrorKind::degenerate_sheet, "all certainty factors are zero");

  std::vector<ProbabilityRow> out;
  double running = 0.0;
  for (const auto& c : cfs) {
    ProbabilityRow row;
    row.symptom_id = c.symptom_id;
    row.certainty_factor = c.cf;
    row.probability = c.cf.percent() / total;
    running += row.probability;
    row.cumulative_probability = running;
    row.probability_amendment = 1.0 - row.probability;
    row.class_label = c.class_label;
    out.push_back(std::move(row));
  }
  return out;
}

/// One row per class, in order of first appearance.
inline std::vector<EffectRow> certainty_effect_table(std::span<const AveragedCf> cfs) {
  if (cfs.empty()) throw Error(ErrorKind::empty_input, "certainty-effect table of zero classes");
  std::vector<std::string> order;
  std::map<std::string, double> class_max;
  for (const auto& c : cfs) {
    auto [it, inserted] = class_max.emplace(c.class_label, c.cf.percent());
    if (inserted) {
      order.push_back(c.class_label);
    } else {
      it->second = std::max(it->second, c.cf.percent());
    }
  }
  double total = 0.0;
  for (const auto& [label, max_cf] : class_max) total += max_cf;
  if (!(total > 0.0)) throw Error(ErrorKind::degenerate_sheet, "every class maximum is zero");

  std::vector<EffectRow> out;
  double running = 0.0;
  for (const auto& label : order) {
    EffectRow row;
    row.class_label = label;
    row.class_max_cf = CertaintyValue(class_max[label]);
    row.certainty_effect = class_max[label] / total;
    row.uncertainty_effect = 1.0 - row.certainty_effect;
    running += row.certainty_effect;
    row.cumulative_certainty_effect = running;
    out.push_back(std::move(row));
  }
  return out;
}

/// `anomaly,kind,v1..vN[,reference]` with kind in {tpd, tnd}, header row required.
inline ExpertCutoffSheet parse_cutoff_csv(std::string_view text) {
  auto rows = csv::parse(text);
  if (rows.empty()) throw SyntaxError("empty cut-off sheet", 1, 1);
  const auto& header = rows.front();
  if (header.size() < 3 || header[0] != "anomaly" || header[1] != "kind") {
    throw SyntaxError("header must be anomaly,kind,v1..vN[,reference]", 1, 1);
  }
  const bool has_reference = header.back() == "reference";
  const std::size_t value_end = has_reference ? header.size() - 1 : header.size();
  if (value_end < 3) throw SyntaxError("cut-off sheet needs at least one expert column", 1, 1);

  ExpertCutoffSheet sheet;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != header.size()) {
      throw SyntaxError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(r.size()),
                        i + 1, 1);
    }
    ExpertCutoffRow row;
    row.anomaly_id = r[0];
    if (r[1] == "tpd") {
      row.kind = CutoffKind::tpd;
    } else if (r[1] == "tnd") {
      row.kind = CutoffKind::tnd;
    } else {
      throw SyntaxError("kind must be tpd or tnd, got \"" + r[1] + "\"", i + 1, 2);
    }
    for (std::size_t c = 2; c < value_end; ++c) {
      double v = authoring_detail::parse_number(r[c], i + 1, c + 1);
      if (v < 0.0 || v > 1.0) throw Error(ErrorKind::range, "cut-off values must be in [0, 1]", row.anomaly_id);
      row.expert_values.push_back(v);
    }
    if (has_reference && !r.back().empty()) {
      row.reference = authoring_detail::parse_number(r.back(), i + 1, header.size());
    }
    sheet.rows.push_back(std::move(row));
  }
  return sheet;
}

/// Mean of the expert values per anomaly and kind. Means that drift from a
/// supplied reference by more than 0.005 are reported, never corrected.
inline CutoffTable aggregate_cutoffs(const ExpertCutoffSheet& sheet) {
  struct Pair {
    std::optional<double> tpd, tnd;
    std::vector<double> tpd_experts, tnd_experts;
  };
  std::vector<std::string> order;
  std::map<std::string, Pair> by_anomaly;
  CutoffTable table;

  for (const auto& row : sheet.rows) {
    if (row.expert_values.empty()) {
      throw Error(ErrorKind::invalid_cutoff, "cut-off row without expert values", row.anomaly_id);
    }
    double sum = 0.0;
    for (double v : row.expert_values) {
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::range, "cut-off values must be in [0, 1]", row.anomaly_id);
      sum += v;
    }
    const double mean = sum / static_cast<double>(row.expert_values.size());
    if (!by_anomaly.count(row.anomaly_id)) order.push_back(row.anomaly_id);
    auto& pair = by_anomaly[row.anomaly_id];
    auto& slot = row.kind == CutoffKind::tpd ? pair.tpd : pair.tnd;
    if (slot) {
      throw Error(ErrorKind::invalid_cutoff,
                  "duplicate " + std::string(to_string(row.kind)) + " row for " + row.anomaly_id, row.anomaly_id);
    }
    slot = mean;
    (row.kind == CutoffKind::tpd ? pair.tpd_experts : pair.tnd_experts) = row.expert_values;
    if (row.reference && std::abs(mean - *row.reference) > kCutoffDiscrepancyThreshold) {
      table.discrepancies.push_back({row.anomaly_id, row.kind, mean, *row.reference});
    }
  }

  for (const auto& id : order) {
    const auto& pair = by_anomaly[id];
    if (!pair.tpd || !pair.tnd) {
      throw Error(ErrorKind::invalid_cutoff, "anomaly " + id + " needs both a tpd and a tnd row", id);
    }
    if (pair.tpd_experts.size() == pair.tnd_experts.size()) {
      for (std::size_t e = 0; e < pair.tpd_experts.size(); ++e) {
        if (!(pair.tnd_experts[e] < pair.tpd_experts[e])) {
          throw Error(ErrorKind::invalid_cutoff,
                      "expert " + std::to_string(e + 1) + " gives tnd >= tpd for " + id, id);
        }
      }
    }
    if (!(*pair.tnd < *pair.tpd)) {
      throw Error(ErrorKind::invalid_cutoff, "mean tnd must be below mean tpd for " + id, id);
    }
    table.entries.push_back({id, *pair.tpd, *pair.tnd});
  }
  return table;
}

// Extra premises/guards attached to a generated class rule.
struct RuleExtension {
  std::string rule_id;
  std::vector<Premise> premises;
  std::vector<Guard> guards;
};

/// Everything a knowledge base needs that the questionnaires do not carry.
struct Scaffold {
  std::vector<Anomaly> anomalies;  // display names and up-front profile questions
  std::vector<ProfileQuestion> profile_questions;
  std::vector<DerivedFactDef> derived_facts;
  std::vector<Rule> rules;
  std::vector<RuleExtension> rule_extensions;
  Metadata metadata;
};

inline Scaffold parse_scaffold(std::string_view text) {
  using namespace kb_json_detail;
  auto doc = json_util::parse_document(text);
  Reader top(doc, "");
  top.only({"anomalies", "profile_questions", "derived_facts", "rules", "rule_extensions", "metadata"});
  Scaffold s;
  if (top.has("anomalies")) read_section(top, "anomalies", s.anomalies, read_anomaly);
  if (top.has("profile_questions")) read_section(top, "profile_questions", s.profile_questions, read_question);
  if (top.has("derived_facts")) read_section(top, "derived_facts", s.derived_facts, read_fact);
  if (top.has("rules")) read_section(top, "rules", s.rules, read_rule);
  if (top.has("rule_extensions")) {
    read_section(top, "rule_extensions", s.rule_extensions, [](const json& node, const std::string& path) {
      Reader r(node, path);
      r.only({"rule", "premises", "guards"});
      return RuleExtension{r.string("rule"), read_premises(r), read_guards(r)};
    });
  }
  if (top.has("metadata")) s.metadata = read_metadata(top.object("metadata"), "/metadata");
  return s;
}

/// Identifier of the generated rule for one symptom class.
inline std::string class_rule_id(const std::string& anomaly_id, const std::string& class_label) {
  std::string label = class_label;
  std::transform(label.begin(), label.end(), label.begin(), [](unsigned char c) { return std::tolower(c); });
  return anomaly_id + "_class_" + label;
}

/// Assemble and validate a knowledge base.
///
/// Each class becomes one goal rule with a single premise on the class's
/// strongest symptom (first declared on ties), thresholded at the class
/// effect, antecedent CF 100. Remaining class members are kept in the symptom
/// catalogue with the shared class effect but are not asked.
inline KnowledgeBase build_kb(const std::vector<QuestionnaireSheet>& sheets, const CutoffTable& cutoffs,
                              const Scaffold& scaffold = {}) {
  KnowledgeBaseData data;
  data.metadata = scaffold.metadata;
  data.profile_questions = scaffold.profile_questions;
  data.derived_facts = scaffold.derived_facts;

  std::map<std::string, const QuestionnaireSheet*> sheet_by_anomaly;
  for (const auto& sheet : sheets) {
    validate_sheet(sheet);
    if (!sheet_by_anomaly.emplace(sheet.anomaly_id, &sheet).second) {
      throw Error(ErrorKind::invariant, "two questionnaires for anomaly " + sheet.anomaly_id, sheet.anomaly_id);
    }
  }
  for (const auto& a : scaffold.anomalies) {
    if (!sheet_by_anomaly.count(a.id)) {
      throw Error(ErrorKind::reference, "scaffold anomaly \"" + a.id + "\" has no questionnaire", a.id);
    }
    data.anomalies.push_back(a);
  }
  for (const auto& sheet : sheets) {
    bool listed = std::any_of(data.anomalies.begin(), data.anomalies.end(),
                              [&](const Anomaly& a) { return a.id == sheet.anomaly_id; });
    if (!listed) data.anomalies.push_back({sheet.anomaly_id, sheet.anomaly_id, {}});
  }

  for (const auto& anomaly : data.anomalies) {
    const auto& sheet = *sheet_by_anomaly.at(anomaly.id);
    const auto averaged = average_expert_cfs(sheet);
    const auto effects = certainty_effect_table(averaged);

    std::map<std::string, double> effect_of;
    for (const auto& row : effects) effect_of[row.class_label] = row.certainty_effect;

    for (std::size_t i = 0; i < sheet.rows.size(); ++i) {
      const auto& row = sheet.rows[i];
      data.symptoms.push_back(Symptom{row.symptom_id, row.prompt, anomaly.id, row.class_label, averaged[i].cf,
                                      CertaintyEffect(effect_of.at(row.class_label))});
    }
    for (const auto& row : effects) {
      const AveragedCf* strongest = nullptr;
      for (const auto& c : averaged) {
        if (c.class_label == row.class_label && (!strongest || c.cf > strongest->cf)) strongest = &c;
      }
      Rule rule;
      rule.id = class_rule_id(anomaly.id, row.class_label);
      rule.premises.push_back(
          Premise{Premise::Kind::symptom, strongest->symptom_id, CertaintyEffect(row.certainty_effect), std::nullopt});
      rule.antecedent_cf = CertaintyValue(100.0);
      rule.conclusion = {Conclusion::Kind::anomaly, anomaly.id};
      data.rules.push_back(std::move(rule));
    }
  }

  for (const auto& ext : scaffold.rule_extensions) {
    auto it = std::find_if(data.rules.begin(), data.rules.end(), [&](const Rule& r) { return r.id == ext.rule_id; });
    if (it == data.rules.end()) {
      throw Error(ErrorKind::reference, "rule extension targets unknown rule \"" + ext.rule_id + "\"", ext.rule_id);
    }
    it->premises.insert(it->premises.end(), ext.premises.begin(), ext.premises.end());
    it->guards.insert(it->guards.end(), ext.guards.begin(), ext.guards.end());
  }
  data.rules.insert(data.rules.end(), scaffold.rules.begin(), scaffold.rules.end());

  for (const auto& anomaly : data.anomalies) {
    auto it = std::find_if(cutoffs.entries.begin(), cutoffs.entries.end(),
                           [&](const CutoffEntry& c) { return c.anomaly_id == anomaly.id; });
    if (it != cutoffs.entries.end()) data.cutoffs.push_back(*it);
  }
  for (const auto& c : cutoffs.entries) {
    if (!sheet_by_anomaly.count(c.anomaly_id)) {
      throw Error(ErrorKind::reference, "cut-off for unknown anomaly \"" + c.anomaly_id + "\"", c.anomaly_id);
    }
  }
  return KnowledgeBase(std::move(data));
}

/// Probability report: symptom_id,certainty_factor,probability,cumulative_probability,probability_amendment,class
inline std::string probability_report_csv(std::span<const ProbabilityRow> rows) {
  std::vector<csv::Row> out;
  for (const auto& r : rows) {
    out.push_back({r.symptom_id, format_truncated3(r.certainty_factor.percent()), format_truncated3(r.probability),
                   format_truncated3(r.cumulative_probability), format_truncated3(r.probability_amendment),
                   r.class_label});
  }
  return csv::write({"symptom_id", "certainty_factor", "probability", "cumulative_probability",
                     "probability_amendment", "class"},
                    out);
}

/// Certainty-effect report: class,class_max_cf,certainty_effect,uncertainty_effect,cumulative_certainty_effect
inline std::string effect_report_csv(std::span<const EffectRow> rows) {
  std::vector<csv::Row> out;
  for (const auto& r : rows) {
    out.push_back({r.class_label, format_truncated3(r.class_max_cf.percent()), format_truncated3(r.certainty_effect),
                   format_truncated3(r.uncertainty_effect), format_truncated3(r.cumulative_certainty_effect)});
  }
  return csv::write({"class", "class_max_cf", "certainty_effect", "uncertainty_effect",
                     "cumulative_certainty_effect"},
                    out);
}

/// anomaly,tpd,tnd followed by any discrepancy notes as anomaly,kind,computed,reference.
inline std::string cutoff_report_csv(const CutoffTable& table) {
  std::vector<csv::Row> rows;
  for (const auto& e : table.entries) {
    rows.push_back({e.anomaly_id, format_truncated3(e.tpd), format_truncated3(e.tnd)});
  }
  std::string out = csv::write({"anomaly", "tpd", "tnd"}, rows);
  if (!table.discrepancies.empty()) {
    std::vector<csv::Row> notes;
    for (const auto& d : table.discrepancies) {
      notes.push_back({d.anomaly_id, std::string(to_string(d.kind)), format_fixed6(d.computed),
                       format_fixed6(d.reference)});
    }
    out += "\n" + csv::write({"discrepancy_anomaly", "kind", "computed", "reference"}, notes);
  }
  return out;
}

}  // namespace cchain
