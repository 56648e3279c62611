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

// Minimal GeoTIFF writer for tests: classic TIFF, chunky, none or deflate.

#ifndef MINICUBE_TESTS_TIFF_WRITER_HPP
#define MINICUBE_TESTS_TIFF_WRITER_HPP

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "minicube/raster_io.hpp"

namespace minicube::testing {

struct tiff_spec {
    int width = 0;
    int height = 0;
    int bands = 1;
    sample_type type = sample_type::uint16;
    bool big_endian = false;
    bool tiled = false;
    int tile_size = 16;
    int rows_per_strip = 8;
    bool deflate = false;
    std::optional<std::string> nodata;  // GDAL_NODATA text
    geo_transform transform;            // north-up only
    int epsg = 32630;
};

namespace detail {

class byte_writer {
   public:
    explicit byte_writer(bool big) : _big(big) {}
    std::vector<std::uint8_t> bytes;

    template <typename T>
    void put(T v) {
        std::uint8_t raw[sizeof(T)];
        std::memcpy(raw, &v, sizeof(T));
        if (_big) {
            for (std::size_t i = sizeof(T); i-- > 0;) bytes.push_back(raw[i]);
        } else {
            bytes.insert(bytes.end(), raw, raw + sizeof(T));
        }
    }
    template <typename T>
    void put_at(std::size_t pos, T v) {
        std::uint8_t raw[sizeof(T)];
        std::memcpy(raw, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T); ++i) bytes[pos + i] = _big ? raw[sizeof(T) - 1 - i] : raw[i];
    }
    void align() {
        if (bytes.size() % 2) bytes.push_back(0);
    }

   private:
    bool _big;
};

inline void put_sample(byte_writer& w, sample_type t, double v) {
    switch (t) {
        case sample_type::uint8: w.put(static_cast<std::uint8_t>(v)); break;
        case sample_type::uint16: w.put(static_cast<std::uint16_t>(v)); break;
        case sample_type::int16: w.put(static_cast<std::int16_t>(v)); break;
        case sample_type::uint32: w.put(static_cast<std::uint32_t>(v)); break;
        case sample_type::int32: w.put(static_cast<std::int32_t>(v)); break;
        case sample_type::float32: w.put(static_cast<float>(v)); break;
        case sample_type::float64: w.put(v); break;
    }
}

inline std::vector<std::uint8_t> deflate_bytes(const std::vector<std::uint8_t>& in) {
    uLongf size = compressBound(static_cast<uLong>(in.size()));
    std::vector<std::uint8_t> out(size);
    if (compress2(out.data(), &size, in.data(), static_cast<uLong>(in.size()), 6) != Z_OK) {
        throw std::runtime_error("deflate failed");
    }
    out.resize(size);
    return out;
}

}  // namespace detail

/// `values` is band-major: values[b*h*w + r*w + c].
inline std::vector<std::uint8_t> encode_geotiff(const tiff_spec& s, const std::vector<double>& values) {
    using detail::byte_writer;
    if (values.size() != static_cast<std::size_t>(s.width) * s.height * s.bands) {
        throw std::invalid_argument("value count does not match raster shape");
    }
    const int cw = s.tiled ? s.tile_size : s.width;
    const int ch = s.tiled ? s.tile_size : std::min(s.rows_per_strip, s.height);
    const int across = (s.width + cw - 1) / cw;
    const int down = (s.height + ch - 1) / ch;
    const std::size_t plane = static_cast<std::size_t>(s.width) * s.height;

    std::vector<std::vector<std::uint8_t>> chunks;
    for (int ty = 0; ty < down; ++ty) {
        for (int tx = 0; tx < across; ++tx) {
            byte_writer cwr(s.big_endian);
            int rows = s.tiled ? ch : std::min(ch, s.height - ty * ch);
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cw; ++c) {
                    int col = tx * cw + c, row = ty * ch + r;
                    for (int b = 0; b < s.bands; ++b) {
                        double v = (col < s.width && row < s.height)
                                       ? values[b * plane + static_cast<std::size_t>(row) * s.width + col]
                                       : 0.0;
                        detail::put_sample(cwr, s.type, v);
                    }
                }
            }
            chunks.push_back(s.deflate ? detail::deflate_bytes(cwr.bytes) : std::move(cwr.bytes));
        }
    }

    byte_writer w(s.big_endian);
    w.bytes.push_back(s.big_endian ? 'M' : 'I');
    w.bytes.push_back(s.big_endian ? 'M' : 'I');
    w.put<std::uint16_t>(42);
    w.put<std::uint32_t>(0);  // IFD offset, patched below

    std::vector<std::uint32_t> offsets, counts;
    for (const auto& c : chunks) {
        w.align();
        offsets.push_back(static_cast<std::uint32_t>(w.bytes.size()));
        counts.push_back(static_cast<std::uint32_t>(c.size()));
        w.bytes.insert(w.bytes.end(), c.begin(), c.end());
    }

    struct entry {
        std::uint16_t tag;
        std::uint16_t type;  // 2 ascii, 3 short, 4 long, 12 double
        std::vector<double> nums;
        std::string text;
    };
    const int bits = bits_of(s.type);
    const int format = (s.type == sample_type::float32 || s.type == sample_type::float64) ? 3
                       : (s.type == sample_type::int16 || s.type == sample_type::int32) ? 2
                                                                                       : 1;
    std::vector<entry> entries;
    auto shorts = [&](std::uint16_t tag, std::vector<double> v) { entries.push_back({tag, 3, std::move(v), {}}); };
    auto longs = [&](std::uint16_t tag, std::vector<double> v) { entries.push_back({tag, 4, std::move(v), {}}); };
    longs(256, {double(s.width)});
    longs(257, {double(s.height)});
    shorts(258, std::vector<double>(s.bands, bits));
    shorts(259, {s.deflate ? 8.0 : 1.0});
    shorts(262, {1});
    if (!s.tiled) longs(273, std::vector<double>(offsets.begin(), offsets.end()));
    shorts(277, {double(s.bands)});
    if (!s.tiled) longs(278, {double(ch)});
    if (!s.tiled) longs(279, std::vector<double>(counts.begin(), counts.end()));
    shorts(284, {1});
    if (s.tiled) {
        shorts(322, {double(cw)});
        shorts(323, {double(ch)});
        longs(324, std::vector<double>(offsets.begin(), offsets.end()));
        longs(325, std::vector<double>(counts.begin(), counts.end()));
    }
    shorts(339, std::vector<double>(s.bands, format));
    const auto& c = s.transform.c;
    entries.push_back({33550, 12, {c[1], -c[5], 0.0}, {}});
    entries.push_back({33922, 12, {0, 0, 0, c[0], c[3], 0}, {}});
    if (s.epsg == 4326) {
        shorts(34735, {1, 1, 0, 3, 1024, 0, 1, 2, 1025, 0, 1, 1, 2048, 0, 1, 4326});
    } else {
        shorts(34735, {1, 1, 0, 3, 1024, 0, 1, 1, 1025, 0, 1, 1, 3072, 0, 1, double(s.epsg)});
    }
    if (s.nodata) entries.push_back({42113, 2, {}, *s.nodata + '\0'});

    // out-of-line payloads first, then the IFD
    std::vector<std::uint32_t> payload_at(entries.size(), 0);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto& e = entries[i];
        std::size_t n = e.type == 2 ? e.text.size() : e.nums.size();
        std::size_t unit = e.type == 3 ? 2 : e.type == 4 ? 4 : e.type == 12 ? 8 : 1;
        if (n * unit <= 4) continue;
        w.align();
        payload_at[i] = static_cast<std::uint32_t>(w.bytes.size());
        if (e.type == 2) {
            w.bytes.insert(w.bytes.end(), e.text.begin(), e.text.end());
        } else {
            for (double v : e.nums) {
                if (e.type == 3) w.put(static_cast<std::uint16_t>(v));
                if (e.type == 4) w.put(static_cast<std::uint32_t>(v));
                if (e.type == 12) w.put(v);
            }
        }
    }
    w.align();
    w.put_at<std::uint32_t>(4, static_cast<std::uint32_t>(w.bytes.size()));
    w.put<std::uint16_t>(static_cast<std::uint16_t>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        std::size_t n = e.type == 2 ? e.text.size() : e.nums.size();
        w.put(e.tag);
        w.put(e.type);
        w.put(static_cast<std::uint32_t>(n));
        if (payload_at[i]) {
            w.put(payload_at[i]);
            continue;
        }
        std::size_t start = w.bytes.size();
        if (e.type == 2) {
            w.bytes.insert(w.bytes.end(), e.text.begin(), e.text.end());
        } else {
            for (double v : e.nums) {
                if (e.type == 3) w.put(static_cast<std::uint16_t>(v));
                if (e.type == 4) w.put(static_cast<std::uint32_t>(v));
            }
        }
        while (w.bytes.size() < start + 4) w.bytes.push_back(0);
    }
    w.put<std::uint32_t>(0);
    return std::move(w.bytes);
}

inline void write_geotiff(const std::string& path, const tiff_spec& s, const std::vector<double>& values) {
    auto bytes = encode_geotiff(s, values);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace minicube::testing

#endif
