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

#include "minicube/byte_source.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

#include "minicube/error.hpp"

namespace minicube {

void memory_source::read(std::uint64_t offset, std::span<std::byte> out) const {
    if (offset > _bytes.size() || out.size() > _bytes.size() - offset) {
        throw error(errc::decode_error, "read past end of buffer",
                    "offset " + std::to_string(offset) + " length " + std::to_string(out.size()));
    }
    std::memcpy(out.data(), _bytes.data() + offset, out.size());
}

file_source::file_source(const std::string& path) : _path(path) {
    _fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (_fd < 0) {
        throw error(errc::io_failure, "cannot open " + path, std::strerror(errno));
    }
    struct stat st {};
    if (::fstat(_fd, &st) != 0) {
        ::close(_fd);
        throw error(errc::io_failure, "cannot stat " + path, std::strerror(errno));
    }
    _size = static_cast<std::uint64_t>(st.st_size);
}

file_source::~file_source() {
    if (_fd >= 0) ::close(_fd);
}

void file_source::read(std::uint64_t offset, std::span<std::byte> out) const {
    if (offset > _size || out.size() > _size - offset) {
        throw error(errc::decode_error, "read past end of " + _path,
                    "offset " + std::to_string(offset) + " length " + std::to_string(out.size()));
    }
    std::size_t done = 0;
    while (done < out.size()) {
        ssize_t n = ::pread(_fd, out.data() + done, out.size() - done, static_cast<off_t>(offset + done));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw error(errc::io_failure, "read failed on " + _path, std::strerror(errno));
        }
        if (n == 0) throw error(errc::decode_error, "unexpected end of " + _path);
        done += static_cast<std::size_t>(n);
    }
}

std::vector<std::byte> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io_failure, "cannot open " + path);
    in.seekg(0, std::ios::end);
    auto n = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    std::vector<std::byte> out(n);
    in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(n));
    if (!in) throw error(errc::io_failure, "cannot read " + path);
    return out;
}

}  // namespace minicube
