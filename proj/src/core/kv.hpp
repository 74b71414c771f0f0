// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace retarget {

// Line-oriented "key = value" files: one pair per line, '#' comments,
// later keys override earlier ones. Used for run configs and stats files.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text);
  static KeyValueFile load(const std::string& path);
  void save(const std::string& path) const;
  std::string serialize() const;

  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, int64_t value);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  int64_t get_int(const std::string& key) const;
  int64_t get_int_or(const std::string& key, int64_t fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;

  // Insertion-ordered keys, for stable serialization.
  const std::vector<std::string>& keys() const { return order_; }

  // Overlay other's pairs on top of this one.
  void merge(const KeyValueFile& other);

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

}  // namespace retarget
