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

#ifndef KETTLE_JSON_UTIL_HPP
#define KETTLE_JSON_UTIL_HPP

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kettle/errors.hpp"
#include "kettle/support.hpp"

namespace kettle {

using Json = nlohmann::json;

// Parses JSON text, rejecting duplicate object keys. The digest-bound file
// formats must not let two spellings of the same field reach the consumer.
inline Json parse_json(std::string_view text, Errc on_error) {
  std::vector<std::set<std::string>> seen;
  bool duplicate = false;
  auto cb = [&](int /*depth*/, Json::parse_event_t event, Json& parsed) {
    switch (event) {
      case Json::parse_event_t::object_start:
        seen.emplace_back();
        break;
      case Json::parse_event_t::object_end:
        seen.pop_back();
        break;
      case Json::parse_event_t::key:
        if (!seen.back().insert(parsed.get<std::string>()).second) {
          duplicate = true;
        }
        break;
      default:
        break;
    }
    return true;
  };
  Json j;
  try {
    j = Json::parse(text, cb);
  } catch (const Json::exception& e) {
    throw Error(on_error, std::string("JSON parse error: ") + e.what());
  }
  if (duplicate) {
    throw Error(on_error, "duplicate object key");
  }
  return j;
}

// Strict-walk helpers. `on_unknown` lets statement parsing surface
// UnknownField while file formats report their own malformed-* code.
inline void require_object(const Json& j, const std::string& ctx,
                           Errc on_error) {
  if (!j.is_object()) {
    throw Error(on_error, ctx + " must be a JSON object");
  }
}

inline void require_known_fields(const Json& j,
                                 const std::set<std::string>& allowed,
                                 const std::string& ctx, Errc on_unknown) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (allowed.find(it.key()) == allowed.end()) {
      throw Error(on_unknown, "unknown field '" + it.key() + "' in " + ctx);
    }
  }
}

inline const Json& require_field(const Json& j, const std::string& key,
                                 const std::string& ctx, Errc on_error) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(on_error, "missing field '" + key + "' in " + ctx);
  }
  return *it;
}

inline std::string get_string(const Json& j, const std::string& key,
                              const std::string& ctx, Errc on_error) {
  const Json& v = require_field(j, key, ctx, on_error);
  if (!v.is_string()) {
    throw Error(on_error, "field '" + key + "' in " + ctx + " must be a string");
  }
  return v.get<std::string>();
}

inline bool get_bool(const Json& j, const std::string& key,
                     const std::string& ctx, Errc on_error) {
  const Json& v = require_field(j, key, ctx, on_error);
  if (!v.is_boolean()) {
    throw Error(on_error,
                "field '" + key + "' in " + ctx + " must be a boolean");
  }
  return v.get<bool>();
}

inline uint64_t get_uint(const Json& j, const std::string& key,
                         const std::string& ctx, Errc on_error,
                         uint64_t max_value) {
  const Json& v = require_field(j, key, ctx, on_error);
  if (!v.is_number_unsigned() && !(v.is_number_integer() &&
                                   v.get<int64_t>() >= 0)) {
    throw Error(on_error, "field '" + key + "' in " + ctx +
                              " must be a non-negative integer");
  }
  uint64_t n = v.get<uint64_t>();
  if (n > max_value) {
    throw Error(on_error, "field '" + key + "' in " + ctx + " out of range");
  }
  return n;
}

inline std::string get_hex(const Json& j, const std::string& key,
                           const std::string& ctx, size_t hex_len,
                           Errc on_error) {
  std::string s = get_string(j, key, ctx, on_error);
  if (s.size() != hex_len || !is_lower_hex(s)) {
    throw Error(on_error, "field '" + key + "' in " + ctx + " must be " +
                              std::to_string(hex_len) + " lowercase hex chars");
  }
  return s;
}

}  // namespace kettle

#endif  // KETTLE_JSON_UTIL_HPP
