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

#ifndef MINICUBE_LOG_HPP
#define MINICUBE_LOG_HPP

#include <string_view>

namespace minicube {

enum class log_level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

/// Messages below the threshold are dropped; the default is warn.
void set_log_level(log_level level);
log_level get_log_level();
void log(log_level level, std::string_view message);

}  // namespace minicube

#endif
