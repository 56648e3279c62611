/*
   Copyright 2026 The minicube Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "minicube/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

#include "minicube/time.hpp"

namespace minicube {

namespace {
std::atomic<log_level> threshold{log_level::warn};
std::mutex sink_mutex;

const char* label(log_level l) {
    switch (l) {
        case log_level::debug: return "debug";
        case log_level::info: return "info";
        case log_level::warn: return "warn";
        case log_level::error: return "error";
        case log_level::off: return "off";
    }
    return "?";
}
}  // namespace

void set_log_level(log_level level) { threshold = level; }
log_level get_log_level() { return threshold; }

void log(log_level level, std::string_view message) {
    if (level < threshold.load()) return;
    std::lock_guard lock(sink_mutex);
    std::cerr << format_iso(now_utc()) << " [" << label(level) << "] " << message << '\n';
}

}  // namespace minicube
