#pragma once

// Goal-driven diagnosis sessions.
//
// A session chains backwards from one anomaly: its goal rules, the inferred
// facts those rules need, and the rules behind those facts. Premises nobody
// concludes are primitives and get asked. Unanswered symptoms sit in a
// certainty memory ordered by their current value (initially 100 x effect);
// the top entry is the next question.
//
// An answer at or above the current value satisfies the premise and replaces
// the memory value; a lower answer leaves the memory untouched and the premise
// unsatisfied. Fired goal rules contribute their CF to the certainty degree
// (plain mean); rules concluding an inferred fact accumulate with combine_cf.
//
// Session state is derived from the append-only event log alone, which is what
// makes undo and crash recovery a replay.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "cchain/certainty.hpp"
#include "cchain/error.hpp"
#include "cchain/knowledge_base.hpp"

namespace cchain {

enum class Verdict { positive, negative, needs_examination };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::positive: return "POSITIVE";
    case Verdict::negative: return "NEGATIVE";
    case Verdict::needs_examination: return "NEEDS_EXAMINATION";
  }
  return "?";
}

// Absorbs representation error when a degree lands exactly on a cut-off.
inline constexpr double kBoundaryTolerance = 1e-9;

/// degree >= tpd is POSITIVE, degree <= tnd is NEGATIVE, anything between needs examination.
inline Verdict classify_verdict(double certainty_degree, const CutoffEntry& cutoff) {
  if (!(certainty_degree >= 0.0 && certainty_degree <= 1.0)) {
    throw Error(ErrorKind::range, "certainty degree must be in [0, 1]");
  }
  if (certainty_degree >= cutoff.tpd - kBoundaryTolerance) return Verdict::positive;
  if (certainty_degree <= cutoff.tnd + kBoundaryTolerance) return Verdict::negative;
  return Verdict::needs_examination;
}

struct Event {
  enum class Type { profile_answered, symptom_answered, undone, stopped };

  std::uint64_t seq = 0;
  Type type = Type::symptom_answered;
  std::string question_id;
  ProfileAnswer value;

  bool operator==(const Event&) const = default;
};

inline std::string_view to_string(Event::Type t) {
  switch (t) {
    case Event::Type::profile_answered: return "profile_answered";
    case Event::Type::symptom_answered: return "symptom_answered";
    case Event::Type::undone: return "undone";
    case Event::Type::stopped: return "stopped";
  }
  return "?";
}

class CertaintyMemory {
 public:
  struct Entry {
    std::string symptom_id;
    double value = 0.0;           // percent
    std::size_t kb_position = 0;  // tie-break
    bool operator==(const Entry&) const = default;
  };

  /// Unanswered symptoms, highest current value first, KB order on ties.
  const std::vector<Entry>& unanswered() const { return unanswered_; }
  /// Answered symptoms with their final values, in answer order.
  const std::vector<Entry>& answered() const { return answered_; }

  std::optional<double> value_of(const std::string& symptom_id) const {
    for (const auto* list : {&unanswered_, &answered_}) {
      for (const auto& e : *list) {
        if (e.symptom_id == symptom_id) return e.value;
      }
    }
    return std::nullopt;
  }

  bool is_answered(const std::string& symptom_id) const {
    return std::any_of(answered_.begin(), answered_.end(),
                       [&](const Entry& e) { return e.symptom_id == symptom_id; });
  }

  bool operator==(const CertaintyMemory&) const = default;

 private:
  friend class Session;

  void seed(std::vector<Entry> entries) {
    unanswered_ = std::move(entries);
    answered_.clear();
    sort();
  }

  // Moves the symptom to the answered set; returns the value it held before.
  double settle(const std::string& symptom_id, double answer) {
    auto it = std::find_if(unanswered_.begin(), unanswered_.end(),
                           [&](const Entry& e) { return e.symptom_id == symptom_id; });
    Entry entry = *it;
    unanswered_.erase(it);
    const double before = entry.value;
    if (answer >= entry.value - kBoundaryTolerance) entry.value = answer;
    answered_.push_back(entry);
    return before;
  }

  void sort() {
    std::stable_sort(unanswered_.begin(), unanswered_.end(), [](const Entry& a, const Entry& b) {
      if (a.value != b.value) return a.value > b.value;
      return a.kb_position < b.kb_position;
    });
  }

  std::vector<Entry> unanswered_;
  std::vector<Entry> answered_;
};

struct ProfilePrompt {
  const ProfileQuestion* question = nullptr;
};

struct SymptomPrompt {
  const Symptom* symptom = nullptr;
  double current_value = 0.0;  // percent; the threshold an answer must reach
};

struct Done {};

using Question = std::variant<ProfilePrompt, SymptomPrompt, Done>;

inline std::string question_id(const Question& q) {
  if (const auto* p = std::get_if<ProfilePrompt>(&q)) return p->question->id;
  if (const auto* s = std::get_if<SymptomPrompt>(&q)) return s->symptom->id;
  return {};
}

struct FiredRule {
  std::string rule_id;
  CertaintyValue cf;
  bool operator==(const FiredRule&) const = default;
};

struct Diagnosis {
  std::string anomaly_id;
  std::optional<double> certainty_degree;  // nullopt: no evidence
  Verdict verdict = Verdict::negative;
  std::vector<FiredRule> fired_rules;
  bool early = false;

  bool no_evidence() const { return !certainty_degree.has_value(); }
  std::size_t fired_rule_count() const { return fired_rules.size(); }

  /// "scoliosis: 89% POSITIVE", or "x: no evidence NEGATIVE".
  std::string display() const {
    std::string degree = certainty_degree ? std::to_string(display_percent(*certainty_degree)) + "%" : "no evidence";
    return anomaly_id + ": " + degree + " " + std::string(to_string(verdict));
  }
};

/// Without fired rules there is no degree; such a diagnosis reads as NEGATIVE.
inline Diagnosis make_diagnosis(const std::string& anomaly_id, std::vector<FiredRule> fired,
                                const CutoffEntry& cutoff, bool early) {
  Diagnosis d;
  d.anomaly_id = anomaly_id;
  d.early = early;
  if (!fired.empty()) {
    std::vector<CertaintyValue> cfs;
    for (const auto& f : fired) cfs.push_back(f.cf);
    d.certainty_degree = certainty_degree(cfs);
    d.verdict = classify_verdict(*d.certainty_degree, cutoff);
  } else {
    d.verdict = Verdict::negative;
  }
  d.fired_rules = std::move(fired);
  return d;
}

struct StateDelta {
  std::vector<std::string> newly_fired;
  std::optional<double> certainty_degree;
  bool premise_satisfied = false;  // symptom answers only
};

enum class AnswerMode { any_unanswered, pending_only };

struct FinalizeOptions {
  bool early = false;
  bool accept_no_evidence = false;
};

class Session {
 public:
  /// Seed the memory with every reachable symptom at 100 x its effect.
  Session(std::shared_ptr<const KnowledgeBase> kb, std::string anomaly_id)
      : kb_(std::move(kb)), anomaly_id_(std::move(anomaly_id)) {
    if (!kb_) throw Error(ErrorKind::invariant, "session without a knowledge base");
    scope_ = goal_scope(*kb_, anomaly_id_);
    cutoff_ = kb_->cutoff(anomaly_id_);
    rebuild();
  }

  /// Rebuild a session from its log, validating every event as it is applied.
  static Session from_events(std::shared_ptr<const KnowledgeBase> kb, std::string anomaly_id,
                             const std::vector<Event>& events) {
    Session s(std::move(kb), std::move(anomaly_id));
    for (const auto& e : events) s.apply(e);
    return s;
  }

  const KnowledgeBase& kb() const { return *kb_; }
  const std::shared_ptr<const KnowledgeBase>& kb_ptr() const { return kb_; }
  const std::string& anomaly_id() const { return anomaly_id_; }
  const GoalScope& scope() const { return scope_; }
  const CutoffEntry& cutoff() const { return cutoff_; }
  const std::vector<Event>& events() const { return events_; }

  const CertaintyMemory& memory() const { return memory_; }
  const std::map<std::string, ProfileAnswer>& profile_answers() const { return profile_; }
  const std::map<std::string, std::string>& derived_facts() const { return derived_; }
  const std::map<std::string, CertaintyValue>& inferred_facts() const { return inferred_; }
  const std::vector<FiredRule>& fired_rules() const { return fired_; }
  bool stopped() const { return stopped_; }

  std::optional<double> certainty_degree() const {
    if (fired_.empty()) return std::nullopt;
    std::vector<CertaintyValue> cfs;
    for (const auto& f : fired_) cfs.push_back(f.cf);
    return cchain::certainty_degree(cfs);
  }

  std::size_t answered_count() const { return answer_stack_.size(); }
  std::size_t question_count() const { return scope_.profile.size() + scope_.symptoms.size(); }

  /// Pending profile question first, then the top of the certainty memory.
  Question next_question() const {
    for (const auto* q : scope_.profile) {
      if (!profile_.count(q->id)) return ProfilePrompt{q};
    }
    if (!memory_.unanswered().empty()) {
      const auto& top = memory_.unanswered().front();
      return SymptomPrompt{kb_->find_symptom(top.symptom_id), top.value};
    }
    return Done{};
  }

  StateDelta submit_answer(const std::string& question, const ProfileAnswer& value,
                           AnswerMode mode = AnswerMode::any_unanswered) {
    require_active();
    Event e;
    e.seq = next_seq();
    e.question_id = question;
    e.value = value;
    if (in_scope_symptom(question)) {
      e.type = Event::Type::symptom_answered;
    } else if (in_scope_question(question)) {
      e.type = Event::Type::profile_answered;
    } else {
      throw Error(ErrorKind::unknown_question,
                  "\"" + question + "\" is not a question of the " + anomaly_id_ + " session", question);
    }
    if (mode == AnswerMode::pending_only) {
      auto pending = question_id(next_question());
      if (pending != question) {
        const bool answered = memory_.is_answered(question) || profile_.count(question);
        throw Error(answered ? ErrorKind::already_answered : ErrorKind::not_pending,
                    "question \"" + question + "\" is not the pending question \"" + pending + "\"", question);
      }
    }
    return commit(std::move(e));
  }

  StateDelta submit_certainty(const std::string& symptom_id, double answer,
                              AnswerMode mode = AnswerMode::any_unanswered) {
    return submit_answer(symptom_id, ProfileAnswer(answer), mode);
  }

  /// Mask the most recent effective answer.
  StateDelta undo() {
    require_active();
    if (answer_stack_.empty()) throw Error(ErrorKind::nothing_to_undo, "nothing to undo");
    Event e;
    e.seq = next_seq();
    e.type = Event::Type::undone;
    return commit(std::move(e));
  }

  /// Value of a mapped fact, asking for missing inputs through `ask` when given.
  /// Inferred facts report "true" once any supporting rule has fired.
  std::string resolve_subgoal(const std::string& fact_id,
                              const std::function<ProfileAnswer(const ProfileQuestion&)>& ask = {}) {
    const auto* def = kb_->find_fact(fact_id);
    if (!def) throw Error(ErrorKind::reference, "unknown derived fact \"" + fact_id + "\"", fact_id);
    if (def->inferred()) return inferred_.count(fact_id) ? "true" : "false";
    if (auto it = derived_.find(fact_id); it != derived_.end()) return it->second;

    for (const auto& in : def->inputs) {
      if (profile_.count(in.question)) continue;
      const auto& q = *kb_->find_question(in.question);
      if (!ask) {
        throw Error(ErrorKind::missing_answer, "fact " + fact_id + " needs an answer to " + q.id, q.id);
      }
      submit_answer(q.id, ask(q));
    }
    if (auto it = derived_.find(fact_id); it != derived_.end()) return it->second;
    // Only reachable when the fact is outside this session's scope.
    return derive_mapped(*def);
  }

  /// Current diagnosis without ending the session.
  Diagnosis preview() const {
    return make_diagnosis(anomaly_id_, fired_, cutoff_, !std::holds_alternative<Done>(next_question()));
  }

  /// Close the session. Early stop is allowed at any point when `early` is set.
  Diagnosis finalize(const FinalizeOptions& options = {}) {
    require_active();
    const bool complete = std::holds_alternative<Done>(next_question());
    if (!complete && !options.early) {
      throw Error(ErrorKind::session_incomplete, "questions remain; finalize with early stop to end now");
    }
    if (fired_.empty() && !options.accept_no_evidence) {
      throw Error(ErrorKind::no_evidence, "no rule has fired for " + anomaly_id_);
    }
    Event e;
    e.seq = next_seq();
    e.type = Event::Type::stopped;
    commit(std::move(e));
    return make_diagnosis(anomaly_id_, fired_, cutoff_, !complete);
  }

  /// Apply a logged event, validating it like a live call would.
  void apply(const Event& e) {
    require_active();
    if (e.seq != next_seq()) {
      throw Error(ErrorKind::corrupt_log,
                  "event sequence gap: expected " + std::to_string(next_seq()) + ", got " + std::to_string(e.seq));
    }
    if ((e.type == Event::Type::symptom_answered && !in_scope_symptom(e.question_id)) ||
        (e.type == Event::Type::profile_answered && !in_scope_question(e.question_id))) {
      throw Error(ErrorKind::unknown_question, "event names unknown question \"" + e.question_id + "\"",
                  e.question_id);
    }
    if (e.type == Event::Type::undone && answer_stack_.empty()) {
      throw Error(ErrorKind::nothing_to_undo, "nothing to undo");
    }
    commit(e);
  }

  /// Effective answers, oldest first, as (question, value).
  std::vector<std::pair<std::string, ProfileAnswer>> effective_answers() const {
    std::vector<std::pair<std::string, ProfileAnswer>> out;
    for (auto seq : answer_stack_) out.emplace_back(events_[seq - 1].question_id, events_[seq - 1].value);
    return out;
  }

  /// Equality of everything derived from the log. Sequence numbers are not
  /// compared, so answer-undo-answer equals the direct answer.
  bool same_state(const Session& other) const {
    return anomaly_id_ == other.anomaly_id_ && memory_ == other.memory_ && profile_ == other.profile_ &&
           derived_ == other.derived_ && inferred_ == other.inferred_ && fired_ == other.fired_ &&
           effective_answers() == other.effective_answers() && stopped_ == other.stopped_;
  }

 private:
  std::uint64_t next_seq() const { return events_.size() + 1; }

  void require_active() const {
    if (stopped_) throw Error(ErrorKind::not_pending, "session for " + anomaly_id_ + " is already finalized");
  }

  bool in_scope_symptom(const std::string& id) const {
    return std::any_of(scope_.symptoms.begin(), scope_.symptoms.end(),
                       [&](const Symptom* s) { return s->id == id; });
  }

  bool in_scope_question(const std::string& id) const {
    return std::any_of(scope_.profile.begin(), scope_.profile.end(),
                       [&](const ProfileQuestion* q) { return q->id == id; });
  }

  // Validate the event against the current state, then rebuild from the
  // extended log; nothing changes if either step throws.
  StateDelta commit(Event e) {
    if (e.type == Event::Type::symptom_answered || e.type == Event::Type::profile_answered) {
      check_answer(e);
    }
    Session next = *this;
    next.events_.push_back(std::move(e));
    next.rebuild();

    StateDelta delta;
    for (const auto& f : next.fired_) {
      bool known = std::any_of(fired_.begin(), fired_.end(), [&](const FiredRule& o) { return o.rule_id == f.rule_id; });
      if (!known) delta.newly_fired.push_back(f.rule_id);
    }
    const auto& last = next.events_.back();
    if (last.type == Event::Type::symptom_answered) {
      delta.premise_satisfied = next.satisfied_.count(last.question_id) > 0;
    }
    *this = std::move(next);
    delta.certainty_degree = certainty_degree();
    return delta;
  }

  void check_answer(const Event& e) const {
    const auto& id = e.question_id;
    if (e.type == Event::Type::symptom_answered) {
      if (memory_.is_answered(id)) throw Error(ErrorKind::already_answered, "\"" + id + "\" is already answered", id);
      const auto* d = std::get_if<double>(&e.value);
      if (!d) throw Error(ErrorKind::type_mismatch, "certainty answers are numbers 0-100", id);
      if (!(*d >= 0.0 && *d <= 100.0) || std::floor(*d) != *d) {
        throw Error(ErrorKind::range, "certainty answer must be an integer in [0, 100]", id);
      }
      return;
    }
    if (profile_.count(id)) throw Error(ErrorKind::already_answered, "\"" + id + "\" is already answered", id);
    const auto& q = *kb_->find_question(id);
    if (q.kind == AnswerKind::numeric) {
      const auto* d = std::get_if<double>(&e.value);
      if (!d || !std::isfinite(*d)) throw Error(ErrorKind::type_mismatch, "\"" + id + "\" takes a number", id);
    } else {
      const auto* s = std::get_if<std::string>(&e.value);
      if (!s || std::find(q.allowed_values.begin(), q.allowed_values.end(), *s) == q.allowed_values.end()) {
        throw Error(ErrorKind::type_mismatch, "\"" + id + "\" takes one of its allowed values", id);
      }
    }
  }

  // Derive the whole state from events_.
  void rebuild() {
    answer_stack_.clear();
    stopped_ = false;
    for (const auto& e : events_) {
      switch (e.type) {
        case Event::Type::profile_answered:
        case Event::Type::symptom_answered:
          answer_stack_.push_back(e.seq);
          break;
        case Event::Type::undone:
          if (!answer_stack_.empty()) answer_stack_.pop_back();
          break;
        case Event::Type::stopped:
          stopped_ = true;
          break;
      }
    }

    std::vector<CertaintyMemory::Entry> seed;
    for (const auto* s : scope_.symptoms) {
      seed.push_back({s->id, s->certainty_effect.percent(), kb_->symptom_position(s->id)});
    }
    memory_.seed(std::move(seed));
    profile_.clear();
    derived_.clear();
    inferred_.clear();
    fired_.clear();
    satisfied_.clear();
    answers_.clear();

    for (auto seq : answer_stack_) {
      const auto& e = events_[seq - 1];
      if (e.type == Event::Type::profile_answered) {
        profile_[e.question_id] = e.value;
      } else {
        const double answer = std::get<double>(e.value);
        answers_[e.question_id] = answer;
        const double before = memory_.settle(e.question_id, answer);
        if (answer >= before - kBoundaryTolerance) satisfied_.insert(e.question_id);
      }
      evaluate();
    }
  }

  std::string derive_mapped(const DerivedFactDef& def) const {
    std::map<std::string, std::string> labels;
    for (const auto& in : def.inputs) {
      const auto& answer = profile_.at(in.question);
      if (const auto* d = std::get_if<double>(&answer)) {
        labels[in.question] = bin_label(in.bins, *d);
      } else {
        labels[in.question] = std::get<std::string>(answer);
      }
    }
    const auto* value = lookup_mapping(def, labels);
    if (!value) {
      std::string tuple;
      for (const auto& [q, l] : labels) tuple += (tuple.empty() ? "" : ", ") + q + "=" + l;
      throw Error(ErrorKind::incomplete_mapping, "fact " + def.id + " has no mapping for (" + tuple + ")", def.id);
    }
    return *value;
  }

  bool guard_passes(const Guard& g) const {
    auto it = profile_.find(g.question);
    if (it == profile_.end()) return false;
    const auto& answer = it->second;
    const auto& v = g.values.front();
    switch (g.op) {
      case GuardOp::eq: return answer == v;
      case GuardOp::ne: return answer != v;
      case GuardOp::in: return std::find(g.values.begin(), g.values.end(), answer) != g.values.end();
      default: break;
    }
    const auto* a = std::get_if<double>(&answer);
    const auto* b = std::get_if<double>(&v);
    if (!a || !b) return false;
    switch (g.op) {
      case GuardOp::lt: return *a < *b;
      case GuardOp::le: return *a <= *b;
      case GuardOp::gt: return *a > *b;
      case GuardOp::ge: return *a >= *b;
      default: return false;
    }
  }

  std::optional<CertaintyValue> rule_strength(const Rule& r) const {
    for (const auto& g : r.guards) {
      if (!guard_passes(g)) return std::nullopt;
    }
    std::vector<CertaintyValue> cfs;
    for (const auto& p : r.premises) {
      if (p.kind == Premise::Kind::symptom) {
        auto it = answers_.find(p.ref);
        if (it == answers_.end()) return std::nullopt;
        const double threshold =
            p.threshold ? p.threshold->percent() : kb_->find_symptom(p.ref)->certainty_effect.percent();
        if (!satisfied_.count(p.ref) || it->second < threshold - kBoundaryTolerance) return std::nullopt;
        cfs.emplace_back(it->second);
      } else if (p.equals) {
        auto it = derived_.find(p.ref);
        if (it == derived_.end() || it->second != *p.equals) return std::nullopt;
        cfs.emplace_back(100.0);
      } else {
        auto it = inferred_.find(p.ref);
        if (it == inferred_.end()) return std::nullopt;
        cfs.push_back(it->second);
      }
    }
    const CertaintyValue premise = cfs.empty() ? CertaintyValue(100.0) : conjoin_premises(cfs);
    return rule_cf(r.antecedent_cf, premise);
  }

  // Recompute facts and firings from the answers so far. Newly fired goal
  // rules are appended in KB order; already fired ones keep their place.
  void evaluate() {
    for (const auto* f : scope_.facts) {
      if (f->inferred() || derived_.count(f->id)) continue;
      bool ready = std::all_of(f->inputs.begin(), f->inputs.end(),
                               [&](const FactInput& in) { return profile_.count(in.question) > 0; });
      if (ready) derived_[f->id] = derive_mapped(*f);
    }

    // Inferred facts form a DAG, so this settles within facts+1 passes.
    for (std::size_t pass = 0; pass <= scope_.facts.size(); ++pass) {
      std::map<std::string, std::vector<CertaintyValue>> support;
      for (const auto* r : scope_.rules) {
        if (r->conclusion.kind != Conclusion::Kind::fact) continue;
        if (auto cf = rule_strength(*r); cf && cf->percent() > 0.0) support[r->conclusion.ref].push_back(*cf);
      }
      std::map<std::string, CertaintyValue> next;
      for (const auto& [fact, cfs] : support) next[fact] = combine_many(cfs);
      if (next == inferred_) break;
      inferred_ = std::move(next);
    }

    for (const auto* r : scope_.rules) {
      if (r->conclusion.kind != Conclusion::Kind::anomaly) continue;
      auto cf = rule_strength(*r);
      auto it = std::find_if(fired_.begin(), fired_.end(), [&](const FiredRule& f) { return f.rule_id == r->id; });
      if (!cf) {
        if (it != fired_.end()) fired_.erase(it);
      } else if (it != fired_.end()) {
        it->cf = *cf;
      } else {
        fired_.push_back({r->id, *cf});
      }
    }
  }

  std::shared_ptr<const KnowledgeBase> kb_;
  std::string anomaly_id_;
  GoalScope scope_;
  CutoffEntry cutoff_;

  std::vector<Event> events_;
  std::vector<std::uint64_t> answer_stack_;  // seqs of effective answers, oldest first
  bool stopped_ = false;

  CertaintyMemory memory_;
  std::map<std::string, ProfileAnswer> profile_;
  std::map<std::string, double> answers_;
  std::set<std::string> satisfied_;
  std::map<std::string, std::string> derived_;
  std::map<std::string, CertaintyValue> inferred_;
  std::vector<FiredRule> fired_;
};

inline Session start_session(std::shared_ptr<const KnowledgeBase> kb, const std::string& anomaly_id,
                             const std::map<std::string, ProfileAnswer>& profile = {}) {
  Session s(std::move(kb), anomaly_id);
  for (const auto* q : s.scope().profile) {
    if (auto it = profile.find(q->id); it != profile.end()) s.submit_answer(q->id, it->second);
  }
  return s;
}

struct AnswerScript {
  std::map<std::string, ProfileAnswer> profile;
  std::map<std::string, double> certainty;
};

/// Batch mode: answer every question the engine asks from the script.
inline Diagnosis replay(std::shared_ptr<const KnowledgeBase> kb, const std::string& anomaly_id,
                        const AnswerScript& script) {
  Session s(std::move(kb), anomaly_id);
  for (;;) {
    auto q = s.next_question();
    if (std::holds_alternative<Done>(q)) break;
    const auto id = question_id(q);
    if (std::holds_alternative<ProfilePrompt>(q)) {
      auto it = script.profile.find(id);
      if (it == script.profile.end()) {
        throw Error(ErrorKind::script_underrun, "script has no profile answer for \"" + id + "\"", id);
      }
      s.submit_answer(id, it->second);
    } else {
      auto it = script.certainty.find(id);
      if (it == script.certainty.end()) {
        throw Error(ErrorKind::script_underrun, "script has no certainty answer for \"" + id + "\"", id);
      }
      s.submit_certainty(id, it->second);
    }
  }
  return s.finalize({.early = false, .accept_no_evidence = true});
}

}  // namespace cchain
