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

#ifndef MINICUBE_SOURCES_HPP
#define MINICUBE_SOURCES_HPP

#include <memory>
#include <string>
#include <vector>

#include "minicube/byte_source.hpp"

namespace minicube {

enum class source_kind { local_dir, http_listing };

std::string_view to_string(source_kind k);
source_kind source_kind_from_string(std::string_view s);

/// Last path component of a file path or URL, without query string.
std::string filename_of(const std::string& uri);

bool is_http_uri(const std::string& uri);

/**
 * Opens a URI for reading. Plain paths and file:// URIs are read with pread;
 * http:// URIs are fetched whole into memory.
 */
std::shared_ptr<const byte_source> open_uri(const std::string& uri);

/**
 * Enumerates candidate files below a source root, sorted.
 *
 * local_dir walks the directory recursively; http_listing fetches a plain
 * text document with one URI per line (relative entries resolve against the
 * listing URL, blank lines and '#' comments are skipped). Throws
 * source_unavailable when the root cannot be read.
 */
std::vector<std::string> list_source(source_kind kind, const std::string& root);

/// GET helper shared by listing and file fetches; throws source_unavailable.
std::string http_get(const std::string& url);

}  // namespace minicube

#endif
