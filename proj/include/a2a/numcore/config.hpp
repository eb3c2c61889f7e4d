// a2a/numcore/config.hpp

// Copyright 2026  a2a-lab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <set>
#include <string>

#include "a2a/numcore/layer.hpp"

namespace a2a {

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string &what) : Error(what) {}
};

/// Reads optional keys from a json object and rejects any key nobody asked
/// for once Finish() is called.
class ConfigReader {
 public:
  ConfigReader(const Json &j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_null() && !j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  ConfigReader &Get(const char *key, T &out) {
    seen_.insert(key);
    if (j_.is_null() || !j_.contains(key)) return *this;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception &e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
    return *this;
  }

  const Json *Sub(const char *key) {
    seen_.insert(key);
    if (j_.is_null() || !j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  void Finish() const {
    if (j_.is_null()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const Json &j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace a2a
