#include <gtest/gtest.h>

#include <numeric>

#include "cchain/authoring.hpp"
#include "support.hpp"

using namespace cchain;
using testsupport::data_path;

namespace {

QuestionnaireSheet flatback_sheet() {
  return parse_questionnaire_csv(read_text_file(data_path("demo/questionnaires/flatback.csv")), "flatback");
}

QuestionnaireSheet tiny_sheet(const std::string& anomaly, const std::vector<std::string>& ids) {
  QuestionnaireSheet s{anomaly, {}};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    s.rows.push_back({ids[i], ids[i] + "?", std::string(1, static_cast<char>('A' + i)),
                      {CertaintyValue(50), CertaintyValue(50)}});
  }
  return s;
}

CutoffTable cutoffs_for(const std::vector<std::string>& anomalies) {
  CutoffTable t;
  for (const auto& a : anomalies) t.entries.push_back({a, 0.7, 0.4});
  return t;
}

}  // namespace

TEST(AverageExpertCfs, MeanOfColumns) {
  QuestionnaireSheet s{"x", {{"s1", "?", "A", {CertaintyValue(80), CertaintyValue(60), CertaintyValue(70), CertaintyValue(74)}}}};
  auto avg = average_expert_cfs(s);
  ASSERT_EQ(avg.size(), 1u);
  EXPECT_DOUBLE_EQ(avg[0].cf.percent(), 71.0);
}

TEST(AverageExpertCfs, RejectsRaggedSheets) {
  QuestionnaireSheet s{"x", {{"s1", "?", "A", {CertaintyValue(80)}}, {"s2", "?", "B", {CertaintyValue(80), CertaintyValue(1)}}}};
  EXPECT_THROW(average_expert_cfs(s), Error);
}

TEST(QuestionnaireCsv, ParsesDemoSheet) {
  auto s = flatback_sheet();
  ASSERT_EQ(s.rows.size(), 7u);
  EXPECT_EQ(s.rows[0].symptom_id, "flat_thoracic");
  EXPECT_EQ(s.rows[0].expert_cfs.size(), 4u);
}

TEST(QuestionnaireCsv, ReportsBadCellPosition) {
  try {
    parse_questionnaire_csv("symptom_id,prompt,class,e1\ns1,Q,A,eighty\n", "x");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 4u);
  }
  EXPECT_THROW(parse_questionnaire_csv("symptom_id,prompt,class,e1\ns1,Q,A,180\n", "x"), Error);
}

TEST(ProbabilityTable, FlatBackValues) {
  auto rows = probability_table(average_expert_cfs(flatback_sheet()));
  const double cf[] = {80, 60, 30, 20, 20, 10, 5};
  const double total = std::accumulate(std::begin(cf), std::end(cf), 0.0);
  double running = 0;
  ASSERT_EQ(rows.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) {
    running += cf[i] / total;
    EXPECT_NEAR(rows[i].probability, cf[i] / total, 1e-12);
    EXPECT_NEAR(rows[i].cumulative_probability, running, 1e-12);
    EXPECT_EQ(rows[i].probability_amendment, 1.0 - rows[i].probability);
  }
  EXPECT_NEAR(rows.back().cumulative_probability, 1.0, 1e-12);
}

TEST(ProbabilityTable, DegenerateSheet) {
  std::vector<AveragedCf> zeros{{"a", "A", CertaintyValue(0)}, {"b", "B", CertaintyValue(0)}};
  try {
    probability_table(zeros);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_sheet);
  }
  EXPECT_THROW(probability_table({}), Error);
}

TEST(CertaintyEffectTable, UsesClassMaxima) {
  auto rows = certainty_effect_table(average_expert_cfs(flatback_sheet()));
  ASSERT_EQ(rows.size(), 6u);
  const double maxima[] = {80, 30, 20, 20, 10, 5};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(rows[i].certainty_effect, maxima[i] / 165.0, 1e-12);
    EXPECT_NEAR(rows[i].uncertainty_effect, 1 - maxima[i] / 165.0, 1e-12);
  }
  EXPECT_EQ(rows[0].class_label, "A");
  EXPECT_NEAR(rows.back().cumulative_certainty_effect, 1.0, 1e-12);
}

TEST(CertaintyEffectTable, SumsToOneOnRandomSheets) {
  for (int n = 0; n < 200; ++n) {
    std::vector<AveragedCf> cfs;
    int count = testsupport::uniform_int(1, 12);
    for (int i = 0; i < count; ++i) {
      cfs.push_back({"s" + std::to_string(i), std::string(1, static_cast<char>('A' + testsupport::uniform_int(0, 5))),
                     CertaintyValue(testsupport::uniform(0.5, 100))});
    }
    auto rows = certainty_effect_table(cfs);
    double sum = 0;
    for (const auto& r : rows) sum += r.certainty_effect;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Reports, TruncateToThreeDecimals) {
  auto averaged = average_expert_cfs(flatback_sheet());
  auto csv = effect_report_csv(certainty_effect_table(averaged));
  EXPECT_NE(csv.find("A,80.000,0.484,0.515,0.484"), std::string::npos) << csv;
  EXPECT_NE(csv.find("F,5.000,0.030,0.969,1.000"), std::string::npos) << csv;
  auto prob = probability_report_csv(probability_table(averaged));
  EXPECT_NE(prob.find("flat_thoracic,80.000,0.355,0.355,0.644,A"), std::string::npos) << prob;
}

TEST(Cutoffs, MeansAndDiscrepancies) {
  auto sheet = parse_cutoff_csv(read_text_file(data_path("demo/cutoffs.csv")));
  auto table = aggregate_cutoffs(sheet);
  ASSERT_EQ(table.entries.size(), 5u);
  for (const auto& row : sheet.rows) {
    const double mean = std::accumulate(row.expert_values.begin(), row.expert_values.end(), 0.0) / 4.0;
    const auto& e = *std::find_if(table.entries.begin(), table.entries.end(),
                                  [&](const CutoffEntry& c) { return c.anomaly_id == row.anomaly_id; });
    EXPECT_NEAR(row.kind == CutoffKind::tpd ? e.tpd : e.tnd, mean, 1e-12);
  }
  ASSERT_EQ(table.discrepancies.size(), 1u);
  EXPECT_EQ(table.discrepancies[0].anomaly_id, "kyphosis");
  EXPECT_EQ(table.discrepancies[0].kind, CutoffKind::tpd);
  EXPECT_NEAR(table.discrepancies[0].computed, 0.805, 1e-12);
}

TEST(Cutoffs, ExpertTndMustStayBelowTpd) {
  const char* text = "anomaly,kind,e1,e2\nx,tpd,0.7,0.5\nx,tnd,0.4,0.6\n";
  try {
    aggregate_cutoffs(parse_cutoff_csv(text));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_cutoff);
  }
  EXPECT_THROW(aggregate_cutoffs(parse_cutoff_csv("anomaly,kind,e1\nx,tpd,0.7\n")), Error);
  EXPECT_THROW(parse_cutoff_csv("anomaly,kind,e1\nx,tpx,0.7\n"), SyntaxError);
}

TEST(BuildKb, OneRulePerClass) {
  auto kb = build_kb({flatback_sheet()}, cutoffs_for({"flatback"}));
  EXPECT_EQ(kb.symptoms().size(), 7u);
  ASSERT_EQ(kb.rules().size(), 6u);
  EXPECT_EQ(kb.rules()[0].id, "flatback_class_a");
  EXPECT_EQ(kb.rules()[0].premises[0].ref, "flat_thoracic");
  EXPECT_NEAR(kb.rules()[0].premises[0].threshold->fraction(), 80.0 / 165.0, 1e-12);
  // flat_lumbar shares class A's effect.
  EXPECT_EQ(kb.find_symptom("flat_lumbar")->certainty_effect, kb.find_symptom("flat_thoracic")->certainty_effect);
}

TEST(BuildKb, DuplicateSymptomIdsAcrossSheets) {
  try {
    build_kb({tiny_sheet("one", {"dup", "a"}), tiny_sheet("two", {"dup", "b"})}, cutoffs_for({"one", "two"}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invariant);
  }
}

TEST(BuildKb, MissingCutoff) {
  EXPECT_THROW(build_kb({tiny_sheet("one", {"a"})}, cutoffs_for({})), Error);
  EXPECT_THROW(build_kb({tiny_sheet("one", {"a"})}, cutoffs_for({"one", "ghost"})), Error);
}

TEST(BuildKb, DemoBuildIsReproducible) {
  std::vector<QuestionnaireSheet> sheets;
  for (const char* name : {"scoliosis", "flatback", "kyphosis", "cervical_lordosis", "swayback"}) {
    sheets.push_back(parse_questionnaire_csv(
        read_text_file(data_path(std::string("demo/questionnaires/") + name + ".csv")), name));
  }
  auto table = aggregate_cutoffs(parse_cutoff_csv(read_text_file(data_path("demo/cutoffs.csv"))));
  auto scaffold = parse_scaffold(read_text_file(data_path("demo/scaffold.json")));
  auto kb = build_kb(sheets, table, scaffold);
  EXPECT_EQ(serialize_kb(kb), read_text_file(data_path("demo/kb.json")));
}

TEST(Scaffold, UnknownExtensionTarget) {
  auto scaffold = parse_scaffold(R"({"rule_extensions": [{"rule": "nope", "guards": []}]})");
  EXPECT_THROW(build_kb({tiny_sheet("one", {"a"})}, cutoffs_for({"one"}), scaffold), Error);
}
