// Copyright 2026 The gkpfloquet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gkpfloquet/errors.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace gkp {

namespace {

void stderr_sink(const char* message, void*) { std::fprintf(stderr, "gkpfloquet warning: %s\n", message); }

std::mutex g_sink_mutex;
WarningSink g_sink = &stderr_sink;
void* g_sink_user = nullptr;

}  // namespace

void set_warning_sink(WarningSink sink, void* user) {
  std::lock_guard<std::mutex> lock(g_sink_mutex);
  g_sink = sink;
  g_sink_user = user;
}

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(g_sink_mutex);
  if (g_sink != nullptr) g_sink(message.c_str(), g_sink_user);
}

}  // namespace gkp
