// Copyright 2026 The Kettle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KETTLE_CANONICAL_JSON_HPP
#define KETTLE_CANONICAL_JSON_HPP

#include <cstdio>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "kettle/errors.hpp"
#include "kettle/json_util.hpp"

namespace kettle {

// Canonical JSON value: the provenance schema is float-free and null-free,
// so the value type admits only booleans, 64-bit integers, UTF-8 strings,
// arrays, and objects. Objects sort their keys by byte order, which equals
// Unicode code-point order for UTF-8 keys.
class CanonicalValue {
 public:
  using Array = std::vector<CanonicalValue>;
  using Object = std::map<std::string, CanonicalValue>;

  CanonicalValue() : value_(Object{}) {}
  CanonicalValue(bool b) : value_(b) {}
  CanonicalValue(int64_t n) : value_(n) {}
  CanonicalValue(const char* s) : value_(std::string(s)) {}
  CanonicalValue(std::string s) : value_(std::move(s)) {}
  CanonicalValue(std::string_view s) : value_(std::string(s)) {}
  CanonicalValue(Array a) : value_(std::move(a)) {}
  CanonicalValue(Object o) : value_(std::move(o)) {}

  bool is_object() const { return std::holds_alternative<Object>(value_); }

  Object& object() { return std::get<Object>(value_); }
  const Object& object() const { return std::get<Object>(value_); }
  Array& array() { return std::get<Array>(value_); }

  // Serialization target: UTF-8, sorted keys, no insignificant whitespace,
  // minimal escaping, shortest integer form. Re-encoding a parsed encoding
  // reproduces the bytes exactly.
  std::string encode() const {
    std::string out;
    encode_to(out);
    return out;
  }

 private:
  void encode_to(std::string& out) const {
    struct Visitor {
      std::string& out;
      void operator()(bool b) const { out += b ? "true" : "false"; }
      void operator()(int64_t n) const { out += std::to_string(n); }
      void operator()(const std::string& s) const { encode_string(s, out); }
      void operator()(const Array& a) const {
        out += '[';
        bool first = true;
        for (const auto& v : a) {
          if (!first) out += ',';
          first = false;
          v.encode_to(out);
        }
        out += ']';
      }
      void operator()(const Object& o) const {
        out += '{';
        bool first = true;
        for (const auto& [key, v] : o) {
          if (!first) out += ',';
          first = false;
          encode_string(key, out);
          out += ':';
          v.encode_to(out);
        }
        out += '}';
      }
    };
    std::visit(Visitor{out}, value_);
  }

  static void encode_string(const std::string& s, std::string& out) {
    out += '"';
    for (unsigned char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\b': out += "\\b"; break;
        case '\t': out += "\\t"; break;
        case '\n': out += "\\n"; break;
        case '\f': out += "\\f"; break;
        case '\r': out += "\\r"; break;
        default:
          if (c < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out += buf;
          } else {
            out += static_cast<char>(c);  // UTF-8 passes through unescaped
          }
      }
    }
    out += '"';
  }

  std::variant<bool, int64_t, std::string, Array, Object> value_;
};

// Lowers a parsed JSON document into the canonical value space. Anything the
// schema excludes (floats, nulls, integers outside int64) is rejected.
inline CanonicalValue to_canonical(const Json& j) {
  switch (j.type()) {
    case Json::value_t::boolean:
      return CanonicalValue(j.get<bool>());
    case Json::value_t::number_integer:
      return CanonicalValue(j.get<int64_t>());
    case Json::value_t::number_unsigned: {
      uint64_t n = j.get<uint64_t>();
      if (n > static_cast<uint64_t>(INT64_MAX)) {
        throw Error(Errc::non_canonicalizable, "integer out of int64 range");
      }
      return CanonicalValue(static_cast<int64_t>(n));
    }
    case Json::value_t::string:
      return CanonicalValue(j.get<std::string>());
    case Json::value_t::array: {
      CanonicalValue::Array a;
      a.reserve(j.size());
      for (const auto& v : j) a.push_back(to_canonical(v));
      return CanonicalValue(std::move(a));
    }
    case Json::value_t::object: {
      CanonicalValue::Object o;
      for (auto it = j.begin(); it != j.end(); ++it) {
        o.emplace(it.key(), to_canonical(it.value()));
      }
      return CanonicalValue(std::move(o));
    }
    case Json::value_t::number_float:
      throw Error(Errc::non_canonicalizable,
                  "floating-point value outside the canonical schema");
    default:
      throw Error(Errc::non_canonicalizable,
                  "value outside the canonical schema");
  }
}

}  // namespace kettle

#endif  // KETTLE_CANONICAL_JSON_HPP
