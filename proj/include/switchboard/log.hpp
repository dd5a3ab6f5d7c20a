/*
 * Copyright 2026 The Switchboard Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SWITCHBOARD_LOG_HPP_
#define SWITCHBOARD_LOG_HPP_

#include <functional>
#include <string>

namespace switchboard {

enum class LogLevel { kDebug, kInfo, kWarning, kError, kOff };

// Receives every message at or above the current level. The default sink
// writes "[level] message" lines to stderr.
using LogSink = std::function<void(LogLevel, const std::string&)>;

void set_log_level(LogLevel level);
LogLevel log_level();
void set_log_sink(LogSink sink);

void log_message(LogLevel level, const std::string& message);
inline void log_info(const std::string& m) { log_message(LogLevel::kInfo, m); }
inline void log_warning(const std::string& m) { log_message(LogLevel::kWarning, m); }
inline void log_error(const std::string& m) { log_message(LogLevel::kError, m); }

}  // namespace switchboard

#endif  // SWITCHBOARD_LOG_HPP_
