#pragma once

// Knowledge-base domain model and its validator.
//
// A KnowledgeBase is built once from a KnowledgeBaseData bundle, validated,
// and never mutated afterwards; sessions share it through shared_ptr<const>.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "cchain/certainty.hpp"
#include "cchain/error.hpp"

namespace cchain {

struct Anomaly {
  std::string id;
  std::string name;
  // Profile questions asked up front for this anomaly, whether or not a rule uses them.
  std::vector<std::string> profile;

  bool operator==(const Anomaly&) const = default;
};

struct Symptom {
  std::string id;
  std::string prompt;
  std::string anomaly_id;
  std::string class_label;
  CertaintyValue certainty_factor;
  CertaintyEffect certainty_effect;

  bool operator==(const Symptom&) const = default;
};

enum class AnswerKind { numeric, categorical };

struct ProfileQuestion {
  std::string id;
  std::string prompt;
  AnswerKind kind = AnswerKind::numeric;
  std::string unit;                         // numeric only
  std::vector<std::string> allowed_values;  // categorical only

  bool operator==(const ProfileQuestion&) const = default;
};

using ProfileAnswer = std::variant<double, std::string>;

// Numeric input discretisation: the first bin whose `below` exceeds the value;
// the last bin has no bound.
struct Bin {
  std::string label;
  std::optional<double> below;

  bool operator==(const Bin&) const = default;
};

struct FactInput {
  std::string question;
  std::vector<Bin> bins;

  bool operator==(const FactInput&) const = default;
};

inline constexpr const char* kWildcard = "*";

struct MappingEntry {
  std::map<std::string, std::string> when;  // question id -> label or "*"
  std::string value;

  bool operator==(const MappingEntry&) const = default;
};

// A fact with inputs is derived from profile answers through `mapping`.
// A fact without inputs is inferred: rules conclude it and their CFs combine.
struct DerivedFactDef {
  std::string id;
  std::vector<FactInput> inputs;
  std::vector<MappingEntry> mapping;

  bool inferred() const { return inputs.empty(); }
  bool operator==(const DerivedFactDef&) const = default;
};

struct Premise {
  enum class Kind { symptom, fact };
  Kind kind = Kind::symptom;
  std::string ref;
  std::optional<CertaintyEffect> threshold;  // symptom premises; defaults to the symptom's effect
  std::optional<std::string> equals;         // mapped-fact premises

  bool operator==(const Premise&) const = default;
};

enum class GuardOp { eq, ne, lt, le, gt, ge, in };

struct Guard {
  std::string question;
  GuardOp op = GuardOp::eq;
  std::vector<ProfileAnswer> values;  // one value, or the set for `in`

  bool operator==(const Guard&) const = default;
};

struct Conclusion {
  enum class Kind { anomaly, fact };
  Kind kind = Kind::anomaly;
  std::string ref;

  bool operator==(const Conclusion&) const = default;
};

struct Rule {
  std::string id;
  std::vector<Premise> premises;
  std::vector<Guard> guards;
  CertaintyValue antecedent_cf{100.0};
  Conclusion conclusion;

  bool operator==(const Rule&) const = default;
};

struct CutoffEntry {
  std::string anomaly_id;
  double tpd = 1.0;
  double tnd = 0.0;

  bool operator==(const CutoffEntry&) const = default;
};

struct Metadata {
  std::string version = "1";
  std::vector<std::string> provenance;

  bool operator==(const Metadata&) const = default;
};

struct KnowledgeBaseData {
  std::vector<Anomaly> anomalies;
  std::vector<Symptom> symptoms;
  std::vector<ProfileQuestion> profile_questions;
  std::vector<DerivedFactDef> derived_facts;
  std::vector<Rule> rules;
  std::vector<CutoffEntry> cutoffs;
  Metadata metadata;

  bool operator==(const KnowledgeBaseData&) const = default;
};

inline const std::string& guard_op_name(GuardOp op) {
  static const std::string names[] = {"eq", "ne", "lt", "le", "gt", "ge", "in"};
  return names[static_cast<int>(op)];
}

inline std::optional<GuardOp> parse_guard_op(const std::string& s) {
  static const std::map<std::string, GuardOp> ops = {
      {"eq", GuardOp::eq}, {"ne", GuardOp::ne}, {"lt", GuardOp::lt}, {"le", GuardOp::le},
      {"gt", GuardOp::gt}, {"ge", GuardOp::ge}, {"in", GuardOp::in}};
  auto it = ops.find(s);
  if (it == ops.end()) return std::nullopt;
  return it->second;
}

inline bool is_identifier(const std::string& s) {
  static const std::regex pattern("[a-z][a-z0-9_]*");
  return std::regex_match(s, pattern);
}

/// Label of the bin a numeric answer falls into.
inline const std::string& bin_label(const std::vector<Bin>& bins, double value) {
  for (const auto& bin : bins) {
    if (!bin.below || value < *bin.below) return bin.label;
  }
  return bins.back().label;
}

namespace detail {

[[noreturn]] inline void invariant_violation(const std::string& invariant, const std::string& entity,
                                            ErrorKind kind = ErrorKind::invariant) {
  throw Error(kind, "invariant violation: " + invariant + " (" + entity + ")", invariant);
}

[[noreturn]] inline void dangling(const std::string& what, const std::string& id,
                                  const std::string& from) {
  throw Error(ErrorKind::reference, "unknown " + what + " \"" + id + "\" referenced by " + from, id);
}

template <typename T>
std::unordered_map<std::string, std::size_t> index_unique(const std::vector<T>& items,
                                                          const std::string& what) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& id = items[i].id;
    if (!is_identifier(id)) {
      invariant_violation("identifiers must match [a-z][a-z0-9_]*", what + " \"" + id + "\"");
    }
    if (!index.emplace(id, i).second) {
      invariant_violation(what + " ids must be unique", id);
    }
  }
  return index;
}

// Domain of one mapped-fact input as the labels the mapping is keyed by.
inline std::vector<std::string> input_domain(const FactInput& input, const ProfileQuestion& q) {
  if (q.kind == AnswerKind::categorical) return q.allowed_values;
  std::vector<std::string> labels;
  for (const auto& b : input.bins) labels.push_back(b.label);
  return labels;
}

}  // namespace detail

/// Lookup of a mapped fact's value from labelled inputs; first matching entry wins.
inline const std::string* lookup_mapping(const DerivedFactDef& def,
                                         const std::map<std::string, std::string>& labels) {
  for (const auto& entry : def.mapping) {
    bool match = true;
    for (const auto& [question, want] : entry.when) {
      auto it = labels.find(question);
      if (it == labels.end() || (want != kWildcard && want != it->second)) {
        match = false;
        break;
      }
    }
    if (match) return &entry.value;
  }
  return nullptr;
}

class KnowledgeBase {
 public:
  enum class Validation { full, skip };

  explicit KnowledgeBase(KnowledgeBaseData data, Validation validation = Validation::full)
      : data_(std::move(data)) {
    build_indexes(validation == Validation::full);
    if (validation == Validation::full) validate();
  }

  const KnowledgeBaseData& data() const { return data_; }
  const std::vector<Anomaly>& anomalies() const { return data_.anomalies; }
  const std::vector<Symptom>& symptoms() const { return data_.symptoms; }
  const std::vector<ProfileQuestion>& profile_questions() const { return data_.profile_questions; }
  const std::vector<DerivedFactDef>& derived_facts() const { return data_.derived_facts; }
  const std::vector<Rule>& rules() const { return data_.rules; }
  const std::vector<CutoffEntry>& cutoffs() const { return data_.cutoffs; }
  const Metadata& metadata() const { return data_.metadata; }

  const Anomaly* find_anomaly(const std::string& id) const { return find(anomaly_index_, data_.anomalies, id); }
  const Symptom* find_symptom(const std::string& id) const { return find(symptom_index_, data_.symptoms, id); }
  const ProfileQuestion* find_question(const std::string& id) const {
    return find(question_index_, data_.profile_questions, id);
  }
  const DerivedFactDef* find_fact(const std::string& id) const { return find(fact_index_, data_.derived_facts, id); }
  const Rule* find_rule(const std::string& id) const { return find(rule_index_, data_.rules, id); }

  const CutoffEntry* find_cutoff(const std::string& anomaly_id) const {
    for (const auto& c : data_.cutoffs) {
      if (c.anomaly_id == anomaly_id) return &c;
    }
    return nullptr;
  }

  const Anomaly& anomaly(const std::string& id) const {
    if (const auto* a = find_anomaly(id)) return *a;
    throw Error(ErrorKind::unknown_anomaly, "unknown anomaly \"" + id + "\"", id);
  }

  const CutoffEntry& cutoff(const std::string& anomaly_id) const {
    if (const auto* c = find_cutoff(anomaly_id)) return *c;
    throw Error(ErrorKind::unknown_anomaly, "no cut-off for anomaly \"" + anomaly_id + "\"", anomaly_id);
  }

  std::size_t symptom_position(const std::string& id) const { return symptom_index_.at(id); }
  std::size_t question_position(const std::string& id) const { return question_index_.at(id); }

 private:
  template <typename T>
  static const T* find(const std::unordered_map<std::string, std::size_t>& index,
                       const std::vector<T>& items, const std::string& id) {
    auto it = index.find(id);
    return it == index.end() ? nullptr : &items[it->second];
  }

  void build_indexes(bool strict) {
    if (strict) {
      anomaly_index_ = detail::index_unique(data_.anomalies, "anomaly");
      symptom_index_ = detail::index_unique(data_.symptoms, "symptom");
      question_index_ = detail::index_unique(data_.profile_questions, "profile question");
      fact_index_ = detail::index_unique(data_.derived_facts, "derived fact");
      rule_index_ = detail::index_unique(data_.rules, "rule");
      return;
    }
    auto loose = [](const auto& items) {
      std::unordered_map<std::string, std::size_t> index;
      for (std::size_t i = 0; i < items.size(); ++i) index.emplace(items[i].id, i);
      return index;
    };
    anomaly_index_ = loose(data_.anomalies);
    symptom_index_ = loose(data_.symptoms);
    question_index_ = loose(data_.profile_questions);
    fact_index_ = loose(data_.derived_facts);
    rule_index_ = loose(data_.rules);
  }

  void validate() const {
    using detail::dangling;
    using detail::invariant_violation;

    for (const auto& a : data_.anomalies) {
      for (const auto& q : a.profile) {
        if (!find_question(q)) dangling("profile question", q, "anomaly " + a.id);
      }
    }

    for (const auto& q : data_.profile_questions) {
      if (q.kind == AnswerKind::categorical) {
        std::set<std::string> distinct(q.allowed_values.begin(), q.allowed_values.end());
        if (q.allowed_values.size() < 2 || distinct.size() != q.allowed_values.size()) {
          invariant_violation("categorical questions need at least 2 distinct allowed values", q.id);
        }
      } else if (!q.allowed_values.empty()) {
        invariant_violation("numeric questions take no allowed values", q.id);
      }
      // Answers name their question by id alone.
      if (find_symptom(q.id)) invariant_violation("question and symptom ids must not collide", q.id);
    }

    static const std::regex class_pattern("[A-Z]");
    for (const auto& s : data_.symptoms) {
      if (!find_anomaly(s.anomaly_id)) dangling("anomaly", s.anomaly_id, "symptom " + s.id);
      if (!std::regex_match(s.class_label, class_pattern)) {
        invariant_violation("symptom class must be a single letter A-Z", s.id);
      }
      if (s.certainty_factor.percent() < 0.0) {
        invariant_violation("symptom certainty factor must be in [0, 100]", s.id);
      }
    }

    validate_effects();
    validate_facts();
    validate_rules();
    validate_cutoffs();
  }

  void validate_effects() const {
    for (const auto& a : data_.anomalies) {
      std::map<std::string, double> class_effect;
      for (const auto& s : data_.symptoms) {
        if (s.anomaly_id != a.id) continue;
        auto [it, inserted] = class_effect.emplace(s.class_label, s.certainty_effect.fraction());
        if (!inserted && std::abs(it->second - s.certainty_effect.fraction()) > 1e-6) {
          detail::invariant_violation("symptoms of one class share one certainty effect", s.id);
        }
      }
      if (class_effect.empty()) {
        detail::invariant_violation("every anomaly needs at least one symptom", a.id);
      }
      double total = 0.0;
      for (const auto& [label, effect] : class_effect) total += effect;
      if (std::abs(total - 1.0) > 0.005) {
        detail::invariant_violation("certainty effects must sum to 1", a.id);
      }
    }
  }

  void validate_facts() const {
    for (const auto& f : data_.derived_facts) {
      if (f.inferred()) {
        if (!f.mapping.empty()) detail::invariant_violation("inferred facts carry no mapping", f.id);
        continue;
      }
      std::vector<std::vector<std::string>> domains;
      std::set<std::string> seen;
      for (const auto& in : f.inputs) {
        const auto* q = find_question(in.question);
        if (!q) detail::dangling("profile question", in.question, "derived fact " + f.id);
        if (!seen.insert(in.question).second) {
          detail::invariant_violation("fact inputs must be distinct", f.id);
        }
        if (q->kind == AnswerKind::numeric) {
          if (in.bins.empty() || in.bins.back().below) {
            detail::invariant_violation("numeric inputs need bins ending in an unbounded bin", f.id);
          }
          std::set<std::string> labels;
          for (std::size_t i = 0; i < in.bins.size(); ++i) {
            if (!labels.insert(in.bins[i].label).second || in.bins[i].label.empty()) {
              detail::invariant_violation("bin labels must be distinct and non-empty", f.id);
            }
            if (i + 1 < in.bins.size()) {
              if (!in.bins[i].below) {
                detail::invariant_violation("only the last bin may be unbounded", f.id);
              }
              if (i > 0 && !(*in.bins[i].below > *in.bins[i - 1].below)) {
                detail::invariant_violation("bin bounds must increase", f.id);
              }
            }
          }
        } else if (!in.bins.empty()) {
          detail::invariant_violation("categorical inputs take no bins", f.id);
        }
        domains.push_back(detail::input_domain(in, *q));
      }
      for (const auto& entry : f.mapping) {
        if (entry.value.empty()) detail::invariant_violation("mapping values must be non-empty", f.id);
        if (entry.when.size() != f.inputs.size()) {
          detail::invariant_violation("mapping entries must key every input", f.id);
        }
        for (std::size_t i = 0; i < f.inputs.size(); ++i) {
          auto it = entry.when.find(f.inputs[i].question);
          if (it == entry.when.end()) {
            detail::invariant_violation("mapping entries must key every input", f.id);
          }
          const auto& dom = domains[i];
          if (it->second != kWildcard && std::find(dom.begin(), dom.end(), it->second) == dom.end()) {
            detail::invariant_violation("mapping keys must lie in the input domain", f.id);
          }
        }
      }
      check_mapping_total(f, domains);
    }
  }

  void check_mapping_total(const DerivedFactDef& f,
                           const std::vector<std::vector<std::string>>& domains) const {
    std::size_t combos = 1;
    for (const auto& d : domains) {
      combos *= d.size();
      if (combos > 1'000'000) detail::invariant_violation("mapping input domain too large", f.id);
    }
    std::vector<std::size_t> cursor(domains.size(), 0);
    for (std::size_t n = 0; n < combos; ++n) {
      std::map<std::string, std::string> labels;
      for (std::size_t i = 0; i < domains.size(); ++i) labels[f.inputs[i].question] = domains[i][cursor[i]];
      if (!lookup_mapping(f, labels)) {
        detail::invariant_violation("mapping must be total over the input domain", f.id, ErrorKind::incomplete_mapping);
      }
      for (std::size_t i = 0; i < cursor.size(); ++i) {
        if (++cursor[i] < domains[i].size()) break;
        cursor[i] = 0;
      }
    }
  }

  static bool answer_fits(const ProfileQuestion& q, const ProfileAnswer& v) {
    if (q.kind == AnswerKind::numeric) return std::holds_alternative<double>(v);
    if (!std::holds_alternative<std::string>(v)) return false;
    const auto& s = std::get<std::string>(v);
    return std::find(q.allowed_values.begin(), q.allowed_values.end(), s) != q.allowed_values.end();
  }

  void validate_rules() const {
    for (const auto& r : data_.rules) {
      if (r.premises.empty() && r.guards.empty()) {
        detail::invariant_violation("rules need at least one premise or guard", r.id);
      }
      if (r.antecedent_cf.percent() < 0.0) {
        detail::invariant_violation("antecedent CF must be in [0, 100]", r.id);
      }
      for (const auto& p : r.premises) {
        if (p.kind == Premise::Kind::symptom) {
          if (!find_symptom(p.ref)) detail::dangling("symptom", p.ref, "rule " + r.id);
          if (p.equals) detail::invariant_violation("symptom premises take no equals", r.id);
          continue;
        }
        const auto* f = find_fact(p.ref);
        if (!f) detail::dangling("derived fact", p.ref, "rule " + r.id);
        if (p.threshold) detail::invariant_violation("fact premises take no threshold", r.id);
        if (f->inferred()) {
          if (p.equals) detail::invariant_violation("inferred-fact premises take no equals", r.id);
        } else {
          if (!p.equals) detail::invariant_violation("mapped-fact premises need equals", r.id);
          bool produced = std::any_of(f->mapping.begin(), f->mapping.end(),
                                      [&](const MappingEntry& e) { return e.value == *p.equals; });
          if (!produced) detail::invariant_violation("premise value is never produced by the fact", r.id);
        }
      }
      for (const auto& g : r.guards) {
        const auto* q = find_question(g.question);
        if (!q) detail::dangling("profile question", g.question, "rule " + r.id);
        if (g.values.empty() || (g.op != GuardOp::in && g.values.size() != 1)) {
          detail::invariant_violation("guards take one value, or a set for in", r.id);
        }
        bool ordering = g.op == GuardOp::lt || g.op == GuardOp::le || g.op == GuardOp::gt || g.op == GuardOp::ge;
        if (ordering && q->kind != AnswerKind::numeric) {
          detail::invariant_violation("ordering guards need a numeric question", r.id);
        }
        for (const auto& v : g.values) {
          if (!answer_fits(*q, v)) detail::invariant_violation("guard value must fit the question", r.id);
        }
      }
      const auto& c = r.conclusion;
      if (c.kind == Conclusion::Kind::anomaly) {
        if (!find_anomaly(c.ref)) detail::dangling("anomaly", c.ref, "rule " + r.id);
      } else {
        const auto* f = find_fact(c.ref);
        if (!f) detail::dangling("derived fact", c.ref, "rule " + r.id);
        if (!f->inferred()) detail::invariant_violation("rules may only conclude inferred facts", r.id);
      }
    }
    check_acyclic();
  }

  // Facts form a DAG: an edge runs from each fact premise to the fact its rule concludes.
  void check_acyclic() const {
    std::map<std::string, std::set<std::string>> edges;
    for (const auto& r : data_.rules) {
      if (r.conclusion.kind != Conclusion::Kind::fact) continue;
      for (const auto& p : r.premises) {
        if (p.kind == Premise::Kind::fact) edges[p.ref].insert(r.conclusion.ref);
      }
    }
    enum class Mark { none, active, done };
    std::map<std::string, Mark> mark;
    std::vector<std::string> path;
    std::function<void(const std::string&)> visit = [&](const std::string& node) {
      mark[node] = Mark::active;
      path.push_back(node);
      for (const auto& next : edges[node]) {
        if (mark[next] == Mark::active) {
          std::string cycle;
          auto start = std::find(path.begin(), path.end(), next);
          for (auto it = start; it != path.end(); ++it) cycle += *it + " -> ";
          cycle += next;
          detail::invariant_violation("rule dependencies must be acyclic", cycle);
        }
        if (mark[next] == Mark::none) visit(next);
      }
      path.pop_back();
      mark[node] = Mark::done;
    };
    for (const auto& f : data_.derived_facts) {
      if (mark[f.id] == Mark::none) visit(f.id);
    }
  }

  void validate_cutoffs() const {
    std::set<std::string> seen;
    for (const auto& c : data_.cutoffs) {
      if (!find_anomaly(c.anomaly_id)) detail::dangling("anomaly", c.anomaly_id, "cutoffs");
      if (!seen.insert(c.anomaly_id).second) {
        detail::invariant_violation("exactly one cut-off per anomaly", c.anomaly_id, ErrorKind::invalid_cutoff);
      }
      if (!(c.tnd >= 0.0 && c.tnd < c.tpd && c.tpd <= 1.0)) {
        detail::invariant_violation("cut-offs need 0 <= tnd < tpd <= 1", c.anomaly_id, ErrorKind::invalid_cutoff);
      }
    }
    for (const auto& a : data_.anomalies) {
      if (!seen.count(a.id)) detail::invariant_violation("exactly one cut-off per anomaly", a.id, ErrorKind::invalid_cutoff);
    }
  }

  KnowledgeBaseData data_;
  std::unordered_map<std::string, std::size_t> anomaly_index_;
  std::unordered_map<std::string, std::size_t> symptom_index_;
  std::unordered_map<std::string, std::size_t> question_index_;
  std::unordered_map<std::string, std::size_t> fact_index_;
  std::unordered_map<std::string, std::size_t> rule_index_;
};

/// Rules whose conclusion is the anomaly, in KB order.
inline std::vector<const Rule*> goal_rules(const KnowledgeBase& kb, const std::string& anomaly_id) {
  kb.anomaly(anomaly_id);
  std::vector<const Rule*> out;
  for (const auto& r : kb.rules()) {
    if (r.conclusion.kind == Conclusion::Kind::anomaly && r.conclusion.ref == anomaly_id) out.push_back(&r);
  }
  return out;
}

/// Everything a session for one goal can touch, found by chaining backwards
/// from the goal rules through inferred-fact sub-goals.
struct GoalScope {
  std::vector<const Rule*> rules;                     // KB order
  std::vector<const Symptom*> symptoms;               // KB order
  std::vector<const ProfileQuestion*> profile;        // KB order
  std::vector<const DerivedFactDef*> facts;           // KB order
};

inline GoalScope goal_scope(const KnowledgeBase& kb, const std::string& anomaly_id) {
  const auto& anomaly = kb.anomaly(anomaly_id);
  std::set<std::string> rule_ids, symptom_ids, question_ids, fact_ids;
  std::vector<std::string> pending_facts;

  auto take_rule = [&](const Rule& r) {
    if (!rule_ids.insert(r.id).second) return;
    for (const auto& p : r.premises) {
      if (p.kind == Premise::Kind::symptom) {
        symptom_ids.insert(p.ref);
      } else if (fact_ids.insert(p.ref).second) {
        pending_facts.push_back(p.ref);
      }
    }
    for (const auto& g : r.guards) question_ids.insert(g.question);
  };

  for (const auto* r : goal_rules(kb, anomaly_id)) take_rule(*r);
  while (!pending_facts.empty()) {
    auto fact = pending_facts.back();
    pending_facts.pop_back();
    if (const auto* def = kb.find_fact(fact)) {
      for (const auto& in : def->inputs) question_ids.insert(in.question);
    }
    for (const auto& r : kb.rules()) {
      if (r.conclusion.kind == Conclusion::Kind::fact && r.conclusion.ref == fact) take_rule(r);
    }
  }
  question_ids.insert(anomaly.profile.begin(), anomaly.profile.end());

  GoalScope scope;
  for (const auto& r : kb.rules()) {
    if (rule_ids.count(r.id)) scope.rules.push_back(&r);
  }
  for (const auto& s : kb.symptoms()) {
    if (symptom_ids.count(s.id)) scope.symptoms.push_back(&s);
  }
  for (const auto& q : kb.profile_questions()) {
    if (question_ids.count(q.id)) scope.profile.push_back(&q);
  }
  for (const auto& f : kb.derived_facts()) {
    if (fact_ids.count(f.id)) scope.facts.push_back(&f);
  }
  return scope;
}

}  // namespace cchain
