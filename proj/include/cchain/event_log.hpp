#pragma once

// Session persistence: one JSON-lines file per session.
//
//   {"anomaly":"scoliosis","session_id":"...","type":"session","v":1}
//   {"question_id":"spine_curve","seq":1,"type":"symptom_answered","v":1,"value":89}
//   {"seq":2,"type":"undone","v":1}
//
// The first line is the session header, every further line one event. An event
// counts once its newline is on disk: a final line without one (crash
// mid-write) or one that does not parse is dropped with a warning. A bad line
// anywhere else makes the log corrupt. Repeated sequence numbers are idempotent
// replays of an already logged event and are skipped.

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cchain/engine.hpp"
#include "cchain/json_util.hpp"

namespace cchain {

inline constexpr int kEventLogVersion = 1;

namespace event_log_detail {

using json_util::json;

inline std::optional<Event::Type> parse_type(const std::string& s) {
  if (s == "profile_answered") return Event::Type::profile_answered;
  if (s == "symptom_answered") return Event::Type::symptom_answered;
  if (s == "undone") return Event::Type::undone;
  if (s == "stopped") return Event::Type::stopped;
  return std::nullopt;
}

}  // namespace event_log_detail

inline std::string event_to_json_line(const Event& e) {
  using json_util::json;
  json j = {{"v", kEventLogVersion}, {"seq", e.seq}, {"type", std::string(to_string(e.type))}};
  if (e.type == Event::Type::profile_answered || e.type == Event::Type::symptom_answered) {
    j["question_id"] = e.question_id;
    if (const auto* d = std::get_if<double>(&e.value)) {
      j["value"] = *d;
    } else {
      j["value"] = std::get<std::string>(e.value);
    }
  }
  return j.dump();
}

inline Event event_from_json_line(const std::string& line) {
  using json_util::json;
  json j = json_util::parse_document(line);
  json_util::Reader r(j, "");
  r.only({"v", "seq", "type", "question_id", "value"});
  if (r.number("v") != kEventLogVersion) json_util::schema_error("/v", "unsupported event schema version");
  Event e;
  double seq = r.number("seq");
  if (seq < 1 || std::floor(seq) != seq) json_util::schema_error("/seq", "expected a positive integer");
  e.seq = static_cast<std::uint64_t>(seq);
  auto type = event_log_detail::parse_type(r.string("type"));
  if (!type) json_util::schema_error("/type", "unknown event type");
  e.type = *type;
  if (e.type == Event::Type::profile_answered || e.type == Event::Type::symptom_answered) {
    e.question_id = r.string("question_id");
    const auto& v = r.at("value");
    if (v.is_number()) {
      e.value = v.get<double>();
    } else if (v.is_string()) {
      e.value = v.get<std::string>();
    } else {
      json_util::schema_error("/value", "expected a number or a string");
    }
  }
  return e;
}

struct SessionHeader {
  std::string session_id;
  std::string anomaly_id;
};

inline std::string header_to_json_line(const SessionHeader& h) {
  using json_util::json;
  return json{{"v", kEventLogVersion}, {"type", "session"}, {"session_id", h.session_id}, {"anomaly", h.anomaly_id}}
      .dump();
}

inline SessionHeader header_from_json_line(const std::string& line) {
  auto j = json_util::parse_document(line);
  json_util::Reader r(j, "");
  r.only({"v", "type", "session_id", "anomaly"});
  if (r.number("v") != kEventLogVersion) json_util::schema_error("/v", "unsupported event schema version");
  if (r.string("type") != "session") json_util::schema_error("/type", "expected a session header");
  return {r.string("session_id"), r.string("anomaly")};
}

struct RecoveredSession {
  SessionHeader header;
  Session session;
  std::vector<std::string> warnings;
};

/// Rebuild a session from log text (header line + event lines).
inline RecoveredSession recover_session(std::shared_ptr<const KnowledgeBase> kb, std::string_view text) {
  std::vector<std::string> lines;
  bool torn_tail = false;
  {
    std::size_t start = 0;
    while (start < text.size()) {
      auto nl = text.find('\n', start);
      if (nl == std::string_view::npos) {
        lines.emplace_back(text.substr(start));
        torn_tail = true;  // no terminating newline: the write never completed
        break;
      }
      lines.emplace_back(text.substr(start, nl - start));
      start = nl + 1;
    }
  }
  if (lines.empty()) throw Error(ErrorKind::corrupt_log, "session log is empty (no header)");

  std::vector<std::string> warnings;
  SessionHeader header;
  try {
    header = header_from_json_line(lines.front());
  } catch (const Error& e) {
    throw Error(ErrorKind::corrupt_log, "line 1: bad session header: " + std::string(e.what()));
  }
  Session session(kb, header.anomaly_id);

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const bool last = i + 1 == lines.size();
    if (lines[i].empty() && !last) {
      throw Error(ErrorKind::corrupt_log, "line " + std::to_string(i + 1) + ": empty line");
    }
    if (lines[i].empty()) continue;
    if (last && torn_tail) {
      warnings.push_back("line " + std::to_string(i + 1) + ": dropped unterminated final event");
      break;
    }
    try {
      Event e = event_from_json_line(lines[i]);
      if (e.seq <= session.events().size()) {
        if (session.events()[e.seq - 1] != e) {
          throw Error(ErrorKind::corrupt_log, "conflicting event for seq " + std::to_string(e.seq));
        }
        continue;
      }
      session.apply(e);
    } catch (const Error& err) {
      if (last && err.kind() == ErrorKind::syntax) {
        warnings.push_back("line " + std::to_string(i + 1) + ": dropped incomplete final event (" + err.what() + ")");
        break;
      }
      throw Error(ErrorKind::corrupt_log, "line " + std::to_string(i + 1) + ": " + err.what());
    }
  }
  return {std::move(header), std::move(session), std::move(warnings)};
}

/// Random RFC 4122 version-4 identifier.
inline std::string make_uuid() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::uniform_int_distribution<std::uint64_t> dist;
  std::uint64_t hi = dist(rng), lo = dist(rng);
  hi = (hi & 0xFFFFFFFFFFFF0FFFULL) | 0x0000000000004000ULL;
  lo = (lo & 0x3FFFFFFFFFFFFFFFULL) | 0x8000000000000000ULL;
  char buf[37];
  std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx", static_cast<unsigned>(hi >> 32),
                static_cast<unsigned>((hi >> 16) & 0xFFFF), static_cast<unsigned>(hi & 0xFFFF),
                static_cast<unsigned>(lo >> 48), static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFULL));
  return buf;
}

/// Directory of `<session id>.jsonl` logs. Appends are flushed with fsync
/// before returning.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create store directory " + root_.string() + ": " + ec.message());
  }

  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path path_of(const std::string& session_id) const { return root_ / (session_id + ".jsonl"); }

  bool exists(const std::string& session_id) const {
    return is_identifier_safe(session_id) && std::filesystem::exists(path_of(session_id));
  }

  /// New log holding only the header; returns the session id.
  std::string create(const std::string& anomaly_id) {
    auto id = make_uuid();
    append_line(id, header_to_json_line({id, anomaly_id}));
    return id;
  }

  void append(const std::string& session_id, const Event& e) { append_line(session_id, event_to_json_line(e)); }

  std::string read(const std::string& session_id) const {
    if (!is_identifier_safe(session_id)) throw Error(ErrorKind::io, "bad session id", session_id);
    std::ifstream in(path_of(session_id), std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "no stored session " + session_id, session_id);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  RecoveredSession recover(std::shared_ptr<const KnowledgeBase> kb, const std::string& session_id) const {
    return recover_session(std::move(kb), read(session_id));
  }

  std::vector<std::string> list() const {
    std::vector<std::string> ids;
    for (const auto& entry : std::filesystem::directory_iterator(root_)) {
      if (entry.path().extension() == ".jsonl") ids.push_back(entry.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

 private:
  static bool is_identifier_safe(const std::string& id) {
    return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
      return (c >= 'a' && c <= 'f') || (c >= '0' && c <= '9') || c == '-';
    });
  }

  void append_line(const std::string& session_id, const std::string& line) {
    const auto path = path_of(session_id);
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) throw Error(ErrorKind::io, "cannot open " + path.string());
    const std::string data = line + "\n";
    std::size_t written = 0;
    while (written < data.size()) {
      auto n = ::write(fd, data.data() + written, data.size() - written);
      if (n < 0) {
        ::close(fd);
        throw Error(ErrorKind::io, "write failed: " + path.string());
      }
      written += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
  }

  std::filesystem::path root_;
};

}  // namespace cchain
