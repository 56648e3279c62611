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

#ifndef MINICUBE_BYTE_SOURCE_HPP
#define MINICUBE_BYTE_SOURCE_HPP

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace minicube {

/**
 * Random-access, read-only view of a file's bytes.
 *
 * Implementations must allow concurrent read() calls from several threads.
 */
class byte_source {
   public:
    virtual ~byte_source() = default;
    virtual std::uint64_t size() const = 0;
    /// Fills `out` with bytes starting at `offset`; throws decode_error on short reads.
    virtual void read(std::uint64_t offset, std::span<std::byte> out) const = 0;
};

class memory_source : public byte_source {
   public:
    explicit memory_source(std::vector<std::byte> bytes) : _bytes(std::move(bytes)) {}
    std::uint64_t size() const override { return _bytes.size(); }
    void read(std::uint64_t offset, std::span<std::byte> out) const override;
    std::span<const std::byte> bytes() const { return _bytes; }

   private:
    std::vector<std::byte> _bytes;
};

/// pread-backed file access; the descriptor stays open for the object's lifetime.
class file_source : public byte_source {
   public:
    explicit file_source(const std::string& path);
    ~file_source() override;
    file_source(const file_source&) = delete;
    file_source& operator=(const file_source&) = delete;

    std::uint64_t size() const override { return _size; }
    void read(std::uint64_t offset, std::span<std::byte> out) const override;

   private:
    int _fd = -1;
    std::uint64_t _size = 0;
    std::string _path;
};

/// Wraps another source and counts bytes and calls served.
class counting_source : public byte_source {
   public:
    explicit counting_source(std::shared_ptr<const byte_source> inner) : _inner(std::move(inner)) {}
    std::uint64_t size() const override { return _inner->size(); }
    void read(std::uint64_t offset, std::span<std::byte> out) const override {
        _bytes += out.size();
        ++_calls;
        _inner->read(offset, out);
    }
    std::uint64_t bytes_read() const { return _bytes.load(); }
    std::uint64_t calls() const { return _calls.load(); }
    void reset() {
        _bytes = 0;
        _calls = 0;
    }

   private:
    std::shared_ptr<const byte_source> _inner;
    mutable std::atomic<std::uint64_t> _bytes{0};
    mutable std::atomic<std::uint64_t> _calls{0};
};

std::vector<std::byte> read_file_bytes(const std::string& path);

}  // namespace minicube

#endif
