/* Copyright (c) 2026 The hogformer-cpp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "common/log.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <mutex>

namespace hogformer::log {
namespace {

void stderr_sink(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

struct State {
  std::mutex mu;
  Sink sink = &stderr_sink;
  void* user = nullptr;
  Level level = Level::kInfo;
};

State& state() {
  static State s;
  return s;
}

const char* level_name(Level l) {
  switch (l) {
    case Level::kDebug: return "DEBUG";
    case Level::kInfo: return "INFO";
    case Level::kWarn: return "WARN";
    case Level::kError: return "ERROR";
  }
  return "INFO";
}

}  // namespace

void set_sink(Sink sink, void* user) {
  std::lock_guard lock(state().mu);
  state().sink = sink ? sink : &stderr_sink;
  state().user = sink ? user : nullptr;
}

void set_level(Level level) {
  std::lock_guard lock(state().mu);
  state().level = level;
}

std::string iso8601_now() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const std::time_t t = system_clock::to_time_t(now);
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

void write(Level level, std::string_view message) {
  auto& s = state();
  std::lock_guard lock(s.mu);
  if (level < s.level) return;
  std::string line = iso8601_now();
  line += ' ';
  line += level_name(level);
  line += ' ';
  line.append(message.begin(), message.end());
  s.sink(line.c_str(), s.user);
}

}  // namespace hogformer::log
