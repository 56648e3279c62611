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

#include "minicube/sources.hpp"

#include <httplib.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "minicube/error.hpp"

namespace minicube {

namespace {

struct parsed_url {
    std::string origin;  // scheme://host[:port]
    std::string path;    // starts with '/'
};

parsed_url split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw error(errc::invalid_argument, "not a URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string resolve_against(const std::string& base, const std::string& ref) {
    if (ref.find("://") != std::string::npos) return ref;
    auto u = split_url(base);
    if (!ref.empty() && ref.front() == '/') return u.origin + ref;
    auto dir_end = u.path.rfind('/');
    return u.origin + u.path.substr(0, dir_end + 1) + ref;
}

std::string trim(std::string s) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), is_space));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), is_space).base(), s.end());
    return s;
}

}  // namespace

std::string_view to_string(source_kind k) { return k == source_kind::local_dir ? "local_dir" : "http_listing"; }

source_kind source_kind_from_string(std::string_view s) {
    if (s == "local_dir") return source_kind::local_dir;
    if (s == "http_listing") return source_kind::http_listing;
    throw error(errc::invalid_argument, "unknown source kind '" + std::string(s) + "'");
}

std::string filename_of(const std::string& uri) {
    std::string s = uri.substr(0, uri.find_first_of("?#"));
    auto slash = s.find_last_of('/');
    return slash == std::string::npos ? s : s.substr(slash + 1);
}

bool is_http_uri(const std::string& uri) { return uri.starts_with("http://") || uri.starts_with("https://"); }

std::string http_get(const std::string& url) {
    auto u = split_url(url);
    httplib::Client client(u.origin);
    client.set_connection_timeout(5);
    client.set_read_timeout(30);
    auto res = client.Get(u.path);
    if (!res) {
        throw error(errc::source_unavailable, "GET " + url + " failed", httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw error(errc::source_unavailable, "GET " + url + " returned HTTP " + std::to_string(res->status));
    }
    return std::move(res->body);
}

std::shared_ptr<const byte_source> open_uri(const std::string& uri) {
    if (is_http_uri(uri)) {
        std::string body = http_get(uri);
        std::vector<std::byte> bytes(body.size());
        std::memcpy(bytes.data(), body.data(), body.size());
        return std::make_shared<memory_source>(std::move(bytes));
    }
    std::string path = uri.starts_with("file://") ? uri.substr(7) : uri;
    return std::make_shared<file_source>(path);
}

std::vector<std::string> list_source(source_kind kind, const std::string& root) {
    std::vector<std::string> out;
    if (kind == source_kind::local_dir) {
        namespace fs = std::filesystem;
        std::error_code ec;
        if (!fs::is_directory(root, ec)) throw error(errc::source_unavailable, "source directory " + root + " is not readable");
        for (fs::recursive_directory_iterator it(root, ec), end; !ec && it != end; it.increment(ec)) {
            if (it->is_regular_file(ec)) out.push_back(it->path().string());
        }
        if (ec) throw error(errc::source_unavailable, "cannot list " + root, ec.message());
    } else {
        std::istringstream lines(http_get(root));
        for (std::string line; std::getline(lines, line);) {
            line = trim(line);
            if (line.empty() || line.front() == '#') continue;
            out.push_back(resolve_against(root, line));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace minicube
