#pragma once

// Knowledge-base file format: a UTF-8 JSON document with the sections
// anomalies, symptoms, profile_questions, derived_facts, rules, cutoffs and
// metadata. The field-level schema lives in docs/kb.schema.json.

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>

#include "cchain/json_util.hpp"
#include "cchain/knowledge_base.hpp"

namespace cchain {

namespace kb_json_detail {

using json_util::json;
using json_util::Reader;
using json_util::schema_error;

inline std::string idx(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

inline CertaintyValue read_cf(const Reader& r, const std::string& key) {
  double v = r.number(key);
  if (!(v >= 0.0 && v <= 100.0)) schema_error(r.child(key), "certainty factor must be in [0, 100]");
  return CertaintyValue(v);
}

inline CertaintyEffect read_effect(const Reader& r, const std::string& key) {
  double v = r.number(key);
  if (!(v >= 0.0 && v <= 1.0)) schema_error(r.child(key), "fraction must be in [0, 1]");
  return CertaintyEffect(v);
}

inline ProfileAnswer read_answer(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  schema_error(path, "expected a number or a string");
}

inline json write_answer(const ProfileAnswer& a) {
  if (const auto* d = std::get_if<double>(&a)) return json(*d);
  return json(std::get<std::string>(a));
}

inline Anomaly read_anomaly(const json& node, const std::string& path) {
  Reader r(node, path);
  r.only({"id", "name", "profile"});
  Anomaly a{r.string("id"), r.string("name"), {}};
  if (r.has("profile")) a.profile = r.strings("profile");
  return a;
}

inline Symptom read_symptom(const json& node, const std::string& path) {
  Reader r(node, path);
  r.only({"id", "prompt", "anomaly", "class", "certainty_factor", "certainty_effect"});
  return Symptom{r.string("id"), r.string("prompt"), r.string("anomaly"), r.string("class"),
                 read_cf(r, "certainty_factor"), read_effect(r, "certainty_effect")};
}

inline ProfileQuestion read_question(const json& node, const std::string& path) {
  Reader r(node, path);
  r.only({"id", "prompt", "kind", "unit", "values"});
  ProfileQuestion q{r.string("id"), r.string("prompt"), AnswerKind::numeric, {}, {}};
  auto kind = r.string("kind");
  if (kind == "numeric") {
    if (r.has("values")) schema_error(r.child("values"), "numeric questions take no values");
    if (r.has("unit")) q.unit = r.string("unit");
  } else if (kind == "categorical") {
    if (r.has("unit")) schema_error(r.child("unit"), "categorical questions take no unit");
    q.kind = AnswerKind::categorical;
    q.allowed_values = r.strings("values");
  } else {
    schema_error(r.child("kind"), "expected \"numeric\" or \"categorical\"");
  }
  return q;
}

inline DerivedFactDef read_fact(const json& node, const std::string& path) {
  Reader r(node, path);
  r.only({"id", "inputs", "mapping"});
  DerivedFactDef f{r.string("id"), {}, {}};
  if (r.has("inputs")) {
    const auto& inputs = r.array("inputs");
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      Reader ir(inputs[j], idx(r.child("inputs"), j));
      ir.only({"question", "bins"});
      FactInput in{ir.string("question"), {}};
      if (ir.has("bins")) {
        const auto& bins = ir.array("bins");
        for (std::size_t k = 0; k < bins.size(); ++k) {
          Reader br(bins[k], idx(ir.child("bins"), k));
          br.only({"label", "below"});
          Bin b{br.string("label"), std::nullopt};
          if (br.has("below")) b.below = br.number("below");
          in.bins.push_back(std::move(b));
        }
      }
      f.inputs.push_back(std::move(in));
    }
  }
  if (r.has("mapping")) {
    const auto& mapping = r.array("mapping");
    for (std::size_t j = 0; j < mapping.size(); ++j) {
      Reader mr(mapping[j], idx(r.child("mapping"), j));
      mr.only({"when", "value"});
      MappingEntry e;
      for (const auto& [key, value] : mr.object("when").items()) {
        if (!value.is_string()) schema_error(mr.child("when") + "/" + key, "expected a string");
        e.when[key] = value.get<std::string>();
      }
      e.value = mr.string("value");
      f.mapping.push_back(std::move(e));
    }
  }
  return f;
}

inline std::vector<Premise> read_premises(const Reader& r) {
  std::vector<Premise> out;
  if (!r.has("premises")) return out;
  const auto& premises = r.array("premises");
  for (std::size_t j = 0; j < premises.size(); ++j) {
    Reader pr(premises[j], idx(r.child("premises"), j));
    pr.only({"symptom", "fact", "threshold", "equals"});
    Premise p;
    if (pr.has("symptom") == pr.has("fact")) {
      schema_error(pr.path(), "premise needs exactly one of \"symptom\" or \"fact\"");
    }
    if (pr.has("symptom")) {
      p.kind = Premise::Kind::symptom;
      p.ref = pr.string("symptom");
    } else {
      p.kind = Premise::Kind::fact;
      p.ref = pr.string("fact");
    }
    if (pr.has("threshold")) p.threshold = read_effect(pr, "threshold");
    if (pr.has("equals")) p.equals = pr.string("equals");
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<Guard> read_guards(const Reader& r) {
  std::vector<Guard> out;
  if (!r.has("guards")) return out;
  const auto& guards = r.array("guards");
  for (std::size_t j = 0; j < guards.size(); ++j) {
    Reader gr(guards[j], idx(r.child("guards"), j));
    gr.only({"question", "op", "value", "values"});
    Guard g;
    g.question = gr.string("question");
    auto op = parse_guard_op(gr.string("op"));
    if (!op) schema_error(gr.child("op"), "unknown guard operator");
    g.op = *op;
    if (g.op == GuardOp::in) {
      if (gr.has("value")) schema_error(gr.child("value"), "\"in\" guards take \"values\"");
      const auto& values = gr.array("values");
      for (std::size_t k = 0; k < values.size(); ++k) {
        g.values.push_back(read_answer(values[k], idx(gr.child("values"), k)));
      }
    } else {
      if (gr.has("values")) schema_error(gr.child("values"), "only \"in\" guards take \"values\"");
      g.values.push_back(read_answer(gr.at("value"), gr.child("value")));
    }
    out.push_back(std::move(g));
  }
  return out;
}

inline Rule read_rule(const json& node, const std::string& path) {
  Reader r(node, path);
  r.only({"id", "premises", "guards", "antecedent_cf", "conclusion"});
  Rule rule;
  rule.id = r.string("id");
  if (r.has("antecedent_cf")) rule.antecedent_cf = read_cf(r, "antecedent_cf");
  rule.premises = read_premises(r);
  rule.guards = read_guards(r);
  Reader cr(r.object("conclusion"), r.child("conclusion"));
  cr.only({"anomaly", "fact"});
  if (cr.has("anomaly") == cr.has("fact")) {
    schema_error(cr.path(), "conclusion needs exactly one of \"anomaly\" or \"fact\"");
  }
  if (cr.has("anomaly")) {
    rule.conclusion = {Conclusion::Kind::anomaly, cr.string("anomaly")};
  } else {
    rule.conclusion = {Conclusion::Kind::fact, cr.string("fact")};
  }
  return rule;
}

inline CutoffEntry read_cutoff(const json& node, const std::string& path) {
  Reader r(node, path);
  r.only({"anomaly", "tpd", "tnd"});
  return CutoffEntry{r.string("anomaly"), read_effect(r, "tpd").fraction(), read_effect(r, "tnd").fraction()};
}

inline Metadata read_metadata(const json& node, const std::string& path) {
  Reader m(node, path);
  m.only({"version", "provenance"});
  Metadata out;
  out.version = m.string("version");
  if (m.has("provenance")) out.provenance = m.strings("provenance");
  return out;
}

template <typename T, typename Fn>
void read_section(const Reader& top, const std::string& key, std::vector<T>& out, Fn read_one) {
  const auto& arr = top.array(key);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(read_one(arr[i], idx("/" + key, i)));
}

inline KnowledgeBaseData read_data(const json& doc) {
  Reader top(doc, "");
  top.only({"anomalies", "symptoms", "profile_questions", "derived_facts", "rules", "cutoffs", "metadata"});
  KnowledgeBaseData data;
  read_section(top, "anomalies", data.anomalies, read_anomaly);
  read_section(top, "symptoms", data.symptoms, read_symptom);
  if (top.has("profile_questions")) read_section(top, "profile_questions", data.profile_questions, read_question);
  if (top.has("derived_facts")) read_section(top, "derived_facts", data.derived_facts, read_fact);
  read_section(top, "rules", data.rules, read_rule);
  read_section(top, "cutoffs", data.cutoffs, read_cutoff);
  data.metadata = read_metadata(top.object("metadata"), "/metadata");
  return data;
}

inline json write_data(const KnowledgeBaseData& data) {
  json doc = json::object();

  json anomalies = json::array();
  for (const auto& a : data.anomalies) {
    anomalies.push_back({{"id", a.id}, {"name", a.name}, {"profile", a.profile}});
  }
  doc["anomalies"] = std::move(anomalies);

  json symptoms = json::array();
  for (const auto& s : data.symptoms) {
    symptoms.push_back({{"id", s.id},
                        {"prompt", s.prompt},
                        {"anomaly", s.anomaly_id},
                        {"class", s.class_label},
                        {"certainty_factor", s.certainty_factor.percent()},
                        {"certainty_effect", s.certainty_effect.fraction()}});
  }
  doc["symptoms"] = std::move(symptoms);

  json questions = json::array();
  for (const auto& q : data.profile_questions) {
    json jq = {{"id", q.id}, {"prompt", q.prompt}};
    if (q.kind == AnswerKind::numeric) {
      jq["kind"] = "numeric";
      if (!q.unit.empty()) jq["unit"] = q.unit;
    } else {
      jq["kind"] = "categorical";
      jq["values"] = q.allowed_values;
    }
    questions.push_back(std::move(jq));
  }
  doc["profile_questions"] = std::move(questions);

  json facts = json::array();
  for (const auto& f : data.derived_facts) {
    json jf = {{"id", f.id}, {"inputs", json::array()}, {"mapping", json::array()}};
    for (const auto& in : f.inputs) {
      json ji = {{"question", in.question}};
      if (!in.bins.empty()) {
        json bins = json::array();
        for (const auto& b : in.bins) {
          json jb = {{"label", b.label}};
          if (b.below) jb["below"] = *b.below;
          bins.push_back(std::move(jb));
        }
        ji["bins"] = std::move(bins);
      }
      jf["inputs"].push_back(std::move(ji));
    }
    for (const auto& e : f.mapping) {
      json when = json::object();
      for (const auto& [k, v] : e.when) when[k] = v;
      jf["mapping"].push_back({{"when", std::move(when)}, {"value", e.value}});
    }
    facts.push_back(std::move(jf));
  }
  doc["derived_facts"] = std::move(facts);

  json rules = json::array();
  for (const auto& r : data.rules) {
    json jr = {{"id", r.id}, {"antecedent_cf", r.antecedent_cf.percent()},
               {"premises", json::array()}, {"guards", json::array()}};
    for (const auto& p : r.premises) {
      json jp = json::object();
      jp[p.kind == Premise::Kind::symptom ? "symptom" : "fact"] = p.ref;
      if (p.threshold) jp["threshold"] = p.threshold->fraction();
      if (p.equals) jp["equals"] = *p.equals;
      jr["premises"].push_back(std::move(jp));
    }
    for (const auto& g : r.guards) {
      json jg = {{"question", g.question}, {"op", guard_op_name(g.op)}};
      if (g.op == GuardOp::in) {
        json values = json::array();
        for (const auto& v : g.values) values.push_back(write_answer(v));
        jg["values"] = std::move(values);
      } else {
        jg["value"] = write_answer(g.values.front());
      }
      jr["guards"].push_back(std::move(jg));
    }
    jr["conclusion"] = {{r.conclusion.kind == Conclusion::Kind::anomaly ? "anomaly" : "fact", r.conclusion.ref}};
    rules.push_back(std::move(jr));
  }
  doc["rules"] = std::move(rules);

  json cutoffs = json::array();
  for (const auto& c : data.cutoffs) {
    cutoffs.push_back({{"anomaly", c.anomaly_id}, {"tpd", c.tpd}, {"tnd", c.tnd}});
  }
  doc["cutoffs"] = std::move(cutoffs);

  doc["metadata"] = {{"version", data.metadata.version}, {"provenance", data.metadata.provenance}};
  return doc;
}

}  // namespace kb_json_detail

/// Parse and fully validate a knowledge-base document.
inline KnowledgeBase parse_kb(std::string_view document) {
  auto doc = json_util::parse_document(document);
  return KnowledgeBase(kb_json_detail::read_data(doc));
}

/// Canonical text: sorted keys, 6-decimal numbers. Byte-stable for equal KBs.
inline std::string serialize_kb(const KnowledgeBase& kb) {
  return json_util::canonical_dump(kb_json_detail::write_data(kb.data()));
}

/// Copy with every number rounded to the 6 decimals the file format keeps.
inline KnowledgeBaseData quantized(KnowledgeBaseData data) {
  for (auto& s : data.symptoms) {
    s.certainty_factor = CertaintyValue(quantize6(s.certainty_factor.percent()));
    s.certainty_effect = CertaintyEffect(quantize6(s.certainty_effect.fraction()));
  }
  for (auto& f : data.derived_facts) {
    for (auto& in : f.inputs) {
      for (auto& b : in.bins) {
        if (b.below) b.below = quantize6(*b.below);
      }
    }
  }
  for (auto& r : data.rules) {
    r.antecedent_cf = CertaintyValue(quantize6(r.antecedent_cf.percent()));
    for (auto& p : r.premises) {
      if (p.threshold) p.threshold = CertaintyEffect(quantize6(p.threshold->fraction()));
    }
    for (auto& g : r.guards) {
      for (auto& v : g.values) {
        if (auto* d = std::get_if<double>(&v)) *d = quantize6(*d);
      }
    }
  }
  for (auto& c : data.cutoffs) {
    c.tpd = quantize6(c.tpd);
    c.tnd = quantize6(c.tnd);
  }
  return data;
}

/// Field-by-field equality at file-format precision.
inline bool structurally_equal(const KnowledgeBase& a, const KnowledgeBase& b) {
  return quantized(a.data()) == quantized(b.data());
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open file: " + path, path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write file: " + path, path);
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed: " + path, path);
}

inline std::shared_ptr<const KnowledgeBase> load_kb(const std::string& path) {
  return std::make_shared<const KnowledgeBase>(parse_kb(read_text_file(path)));
}

}  // namespace cchain
