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

#ifndef MINICUBE_TIME_HPP
#define MINICUBE_TIME_HPP

#include <chrono>
#include <string>
#include <string_view>

namespace minicube {

using instant = std::chrono::sys_seconds;

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_iso(instant t);

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" with optional trailing 'Z'.
instant parse_iso(std::string_view text);

/**
 * Parses `text` with a strftime-like `format`, as UTC.
 *
 * Supported: %Y (4 digits), %m %d %H %M %S (2 digits), %j (3 digits, day of
 * year), %% and literal characters. The whole text must be consumed.
 */
instant parse_timestamp(std::string_view text, std::string_view format);

instant now_utc();

}  // namespace minicube

#endif
