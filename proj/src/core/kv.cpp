// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/kv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace retarget {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::malformed_input,
           "config line " + std::to_string(lineno) + " has no '=': " + t);
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      fail(ErrorCode::malformed_input, "config line " + std::to_string(lineno) + " has empty key");
    kv.set(key, trim(t.substr(eq + 1)));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string KeyValueFile::serialize() const {
  std::ostringstream out;
  for (const auto& key : order_) out << key << " = " << values_.at(key) << "\n";
  return out.str();
}

void KeyValueFile::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) fail(ErrorCode::io_error, "cannot write " + tmp);
    out << serialize();
    if (!out) fail(ErrorCode::io_error, "failed writing " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(ErrorCode::io_error, "cannot rename " + tmp + " to " + path);
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) order_.push_back(key);
  values_[key] = value;
}

void KeyValueFile::set_double(const std::string& key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  set(key, buf);
}

void KeyValueFile::set_int(const std::string& key, int64_t value) {
  set(key, std::to_string(value));
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueFile::get_or(const std::string& key, const std::string& fallback) const {
  auto v = get(key);
  return v ? *v : fallback;
}

double KeyValueFile::get_double(const std::string& key) const {
  auto v = get(key);
  if (!v) fail(ErrorCode::invalid_config, "missing config key: " + key);
  try {
    size_t pos = 0;
    const double d = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    fail(ErrorCode::invalid_config, "config key " + key + " is not a number: " + *v);
  }
}

double KeyValueFile::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int64_t KeyValueFile::get_int(const std::string& key) const {
  auto v = get(key);
  if (!v) fail(ErrorCode::invalid_config, "missing config key: " + key);
  try {
    size_t pos = 0;
    const long long i = std::stoll(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing characters");
    return i;
  } catch (const std::exception&) {
    fail(ErrorCode::invalid_config, "config key " + key + " is not an integer: " + *v);
  }
}

int64_t KeyValueFile::get_int_or(const std::string& key, int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool KeyValueFile::get_bool_or(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  fail(ErrorCode::invalid_config, "config key " + key + " is not a boolean: " + *v);
}

void KeyValueFile::merge(const KeyValueFile& other) {
  for (const auto& key : other.order_) set(key, *other.get(key));
}

}  // namespace retarget
