#pragma once

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "sarslide/errors.hpp"

namespace sarslide {

/// Rejects any key of `object` not listed in `allowed`.
inline void require_known_keys(const nlohmann::json& object, std::initializer_list<std::string_view> allowed,
                               const std::string& context) {
  if (!object.is_object()) throw ConfigError(context + ": expected a JSON object");
  for (const auto& item : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError(context + ": unknown key '" + item.key() + "'");
    }
  }
}

/// Reads `key` into `out` when present; type errors become ConfigError.
template <typename T>
void read_optional(const nlohmann::json& object, const char* key, T& out, const std::string& context) {
  if (!object.contains(key) || object.at(key).is_null()) return;
  try {
    out = object.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(context + ": key '" + key + "' has the wrong type");
  }
}

}  // namespace sarslide
