#pragma once

// Session API, independent of any transport. http_server.hpp binds it to
// cpp-httplib; tests drive it directly.
//
//   GET  /anomalies
//   POST /sessions                  {"anomaly": id}
//   GET  /sessions/{id}
//   POST /sessions/{id}/answers     {"question_id": id, "value": v}   ?strict=false
//   POST /sessions/{id}/undo
//   POST /sessions/{id}/finalize
//
// Every mutation is appended to the session's log before it is acknowledged.

#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <shared_mutex>
#include <string>

#include "cchain/engine.hpp"
#include "cchain/event_log.hpp"
#include "cchain/json_util.hpp"

namespace cchain {

struct ApiResponse {
  int status = 200;
  json_util::json body;
};

inline json_util::json answer_to_json(const ProfileAnswer& a) {
  if (const auto* d = std::get_if<double>(&a)) return *d;
  return std::get<std::string>(a);
}

inline json_util::json diagnosis_to_json(const Diagnosis& d) {
  using json_util::json;
  json fired = json::array();
  for (const auto& f : d.fired_rules) fired.push_back({{"rule_id", f.rule_id}, {"cf", f.cf.percent()}});
  return {{"anomaly", d.anomaly_id},
          {"certainty_degree", d.certainty_degree ? json(*d.certainty_degree) : json(nullptr)},
          {"verdict", std::string(to_string(d.verdict))},
          {"fired_rule_count", d.fired_rule_count()},
          {"fired_rules", std::move(fired)},
          {"early", d.early},
          {"display", d.display()}};
}

/// The client-facing view of a session; a pure function of the session.
inline json_util::json session_view(const std::string& session_id, const Session& s) {
  using json_util::json;
  json pending = nullptr;
  auto q = s.next_question();
  if (const auto* p = std::get_if<ProfilePrompt>(&q)) {
    pending = {{"id", p->question->id}, {"prompt", p->question->prompt}};
    if (p->question->kind == AnswerKind::numeric) {
      pending["kind"] = "numeric";
      pending["unit"] = p->question->unit;
    } else {
      pending["kind"] = "categorical";
      pending["allowed_values"] = p->question->allowed_values;
    }
  } else if (const auto* sp = std::get_if<SymptomPrompt>(&q)) {
    pending = {{"id", sp->symptom->id}, {"prompt", sp->symptom->prompt}, {"kind", "certainty"},
               {"min", 0}, {"max", 100}};
  }

  // Effective answers, oldest first, for back-navigation.
  std::vector<const Event*> stack;
  for (const auto& e : s.events()) {
    if (e.type == Event::Type::profile_answered || e.type == Event::Type::symptom_answered) {
      stack.push_back(&e);
    } else if (e.type == Event::Type::undone && !stack.empty()) {
      stack.pop_back();
    }
  }
  json history = json::array();
  for (const auto* e : stack) history.push_back({{"question_id", e->question_id}, {"value", answer_to_json(e->value)}});

  json fired = json::array();
  for (const auto& f : s.fired_rules()) fired.push_back({{"rule_id", f.rule_id}, {"cf", f.cf.percent()}});

  auto degree = s.certainty_degree();
  const auto& cut = s.cutoff();
  json preview = {{"tpd", cut.tpd}, {"tnd", cut.tnd},
                  {"verdict", std::string(to_string(s.preview().verdict))}};

  return {{"session_id", session_id},
          {"anomaly", s.anomaly_id()},
          {"pending_question", std::move(pending)},
          {"progress", {{"answered", s.answered_count()}, {"total", s.question_count()}}},
          {"certainty_degree", degree ? json(*degree) : json(nullptr)},
          {"verdict_preview", std::move(preview)},
          {"fired_rules", std::move(fired)},
          {"answers", std::move(history)},
          {"can_undo", s.answered_count() > 0 && !s.stopped()},
          {"finalized", s.stopped()}};
}

inline int http_status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::unknown_anomaly: return 404;
    case ErrorKind::range:
    case ErrorKind::type_mismatch:
    case ErrorKind::unknown_question: return 422;
    case ErrorKind::not_pending:
    case ErrorKind::already_answered:
    case ErrorKind::nothing_to_undo: return 409;
    case ErrorKind::syntax: return 400;
    default: return 500;
  }
}

inline ApiResponse error_response(int status, const std::string& message, std::string_view kind) {
  return {status, {{"error", {{"kind", std::string(kind)}, {"message", message}}}}};
}

class SessionService {
 public:
  SessionService(std::shared_ptr<const KnowledgeBase> kb, SessionStore store)
      : kb_(std::move(kb)), store_(std::move(store)) {}

  const KnowledgeBase& kb() const { return *kb_; }
  const SessionStore& store() const { return store_; }

  /// Route a request. `path` excludes the query string; `strict` comes from `?strict=`.
  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body,
                     bool strict = true) {
    static const std::regex session_re(R"(/sessions/([^/]+))");
    static const std::regex action_re(R"(/sessions/([^/]+)/(answers|undo|finalize))");
    std::smatch m;
    try {
      if (path == "/anomalies" && method == "GET") return list_anomalies();
      if (path == "/sessions" && method == "POST") return create_session(body);
      if (std::regex_match(path, m, session_re) && method == "GET") return get_session(m[1]);
      if (std::regex_match(path, m, action_re) && method == "POST") {
        if (m[2] == "answers") return answer(m[1], body, strict);
        if (m[2] == "undo") return undo(m[1]);
        return finalize(m[1]);
      }
      return error_response(404, "no route for " + method + " " + path, "not_found");
    } catch (const Error& e) {
      return error_response(http_status_for(e.kind()), e.what(), to_string(e.kind()));
    }
  }

  ApiResponse list_anomalies() const {
    json_util::json out = json_util::json::array();
    for (const auto& a : kb_->anomalies()) {
      const auto& c = kb_->cutoff(a.id);
      out.push_back({{"id", a.id}, {"name", a.name}, {"tpd", c.tpd}, {"tnd", c.tnd}});
    }
    return {200, out};
  }

  ApiResponse create_session(const std::string& body) {
    auto doc = json_util::parse_document(body);
    json_util::Reader r(doc, "");
    r.only({"anomaly"});
    const auto anomaly = r.string("anomaly");
    Session session(kb_, anomaly);  // throws unknown_anomaly
    const auto id = store_.create(anomaly);
    auto slot = std::make_shared<Slot>(std::move(session));
    {
      std::unique_lock lock(map_mutex_);
      sessions_.emplace(id, slot);
    }
    std::lock_guard guard(slot->mutex);
    return {201, session_view(id, slot->session)};
  }

  ApiResponse get_session(const std::string& id) {
    auto slot = lookup(id);
    if (!slot) return not_found(id);
    std::lock_guard guard(slot->mutex);
    return {200, session_view(id, slot->session)};
  }

  ApiResponse answer(const std::string& id, const std::string& body, bool strict) {
    auto doc = json_util::parse_document(body);
    json_util::Reader r(doc, "");
    r.only({"question_id", "value"});
    const auto question = r.string("question_id");
    const auto& v = r.at("value");
    ProfileAnswer value;
    if (v.is_number()) {
      value = v.get<double>();
    } else if (v.is_string()) {
      value = v.get<std::string>();
    } else {
      return error_response(422, "value must be a number or a string", "type_mismatch");
    }
    return mutate(id, [&](Session& s) {
      s.submit_answer(question, value, strict ? AnswerMode::pending_only : AnswerMode::any_unanswered);
      return ApiResponse{200, {}};
    });
  }

  ApiResponse undo(const std::string& id) {
    return mutate(id, [](Session& s) {
      s.undo();
      return ApiResponse{200, {}};
    });
  }

  ApiResponse finalize(const std::string& id) {
    return mutate(id, [](Session& s) {
      const bool complete = std::holds_alternative<Done>(s.next_question());
      auto d = s.finalize({.early = !complete, .accept_no_evidence = true});
      return ApiResponse{200, diagnosis_to_json(d)};
    });
  }

 private:
  struct Slot {
    explicit Slot(Session s) : session(std::move(s)) {}
    std::mutex mutex;
    Session session;
  };

  static ApiResponse not_found(const std::string& id) {
    return error_response(404, "unknown session " + id, "not_found");
  }

  std::shared_ptr<Slot> lookup(const std::string& id) {
    {
      std::shared_lock lock(map_mutex_);
      if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
    }
    if (!store_.exists(id)) return nullptr;
    // Known on disk but not in memory: a session from before a restart.
    auto recovered = store_.recover(kb_, id);
    std::unique_lock lock(map_mutex_);
    auto [it, inserted] = sessions_.emplace(id, std::make_shared<Slot>(std::move(recovered.session)));
    return it->second;
  }

  // Apply `op` to a copy, log the new events, then publish the copy.
  template <typename Op>
  ApiResponse mutate(const std::string& id, Op op) {
    auto slot = lookup(id);
    if (!slot) return not_found(id);
    std::lock_guard guard(slot->mutex);
    Session next = slot->session;
    ApiResponse response = op(next);
    for (std::size_t i = slot->session.events().size(); i < next.events().size(); ++i) {
      store_.append(id, next.events()[i]);
    }
    slot->session = std::move(next);
    if (response.body.is_null()) response.body = session_view(id, slot->session);
    return response;
  }

  std::shared_ptr<const KnowledgeBase> kb_;
  SessionStore store_;
  std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

}  // namespace cchain
