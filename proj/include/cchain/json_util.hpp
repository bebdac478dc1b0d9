#pragma once

// Small helpers over nlohmann::json: strict field access with path-qualified
// errors, and the canonical pretty printer used for knowledge-base files.

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "cchain/error.hpp"
#include "cchain/format.hpp"
#include "json.hpp"

namespace cchain::json_util {

using nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& path, const std::string& message) {
  throw Error(ErrorKind::syntax, "schema error at " + (path.empty() ? "/" : path) + ": " + message, path);
}

/// Parse text, translating the library's byte offset into line/column.
inline json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    auto pos = what.find("parse error");
    throw SyntaxError(pos == std::string::npos ? what : what.substr(pos), line, column);
  }
}

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) schema_error(path_, "expected an object");
  }

  /// Reject keys outside `allowed`.
  void only(std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, value] : node_.items()) {
      bool ok = false;
      for (auto a : allowed) ok = ok || key == a;
      if (!ok) schema_error(path_ + "/" + key, "unknown field");
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& at(const std::string& key) const {
    if (!node_.contains(key)) schema_error(path_, "missing field \"" + key + "\"");
    return node_.at(key);
  }

  std::string string(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_string()) schema_error(child(key), "expected a string");
    return v.get<std::string>();
  }

  double number(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number()) schema_error(child(key), "expected a number");
    return v.get<double>();
  }

  const json& array(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_array()) schema_error(child(key), "expected an array");
    return v;
  }

  const json& object(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_object()) schema_error(child(key), "expected an object");
    return v;
  }

  std::vector<std::string> strings(const std::string& key) const {
    std::vector<std::string> out;
    const auto& arr = array(key);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_string()) schema_error(child(key) + "/" + std::to_string(i), "expected a string");
      out.push_back(arr[i].get<std::string>());
    }
    return out;
  }

  std::string child(const std::string& key) const { return path_ + "/" + key; }
  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
};

namespace detail {

inline void write_canonical(const json& node, std::string& out, int depth) {
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(depth + 1) * 2, ' ');
  switch (node.type()) {
    case json::value_t::object: {
      if (node.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : node.items()) {  // std::map: sorted
        if (!first) out += ",\n";
        first = false;
        out += inner + json(key).dump() + ": ";
        write_canonical(value, out, depth + 1);
      }
      out += "\n" + indent + "}";
      return;
    }
    case json::value_t::array: {
      if (node.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < node.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        write_canonical(node[i], out, depth + 1);
      }
      out += "\n" + indent + "]";
      return;
    }
    case json::value_t::number_float:
    case json::value_t::number_integer:
    case json::value_t::number_unsigned:
      out += format_fixed6(node.get<double>());
      return;
    default:
      out += node.dump();
      return;
  }
}

}  // namespace detail

/// Sorted keys, two-space indent, every number with exactly 6 decimals, LF.
inline std::string canonical_dump(const json& node) {
  std::string out;
  detail::write_canonical(node, out, 0);
  out += "\n";
  return out;
}

}  // namespace cchain::json_util
