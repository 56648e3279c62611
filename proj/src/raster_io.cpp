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

#include "minicube/raster_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>

#include "minicube/error.hpp"

namespace minicube {

namespace {

// TIFF tags
constexpr std::uint16_t tag_image_width = 256;
constexpr std::uint16_t tag_image_length = 257;
constexpr std::uint16_t tag_bits_per_sample = 258;
constexpr std::uint16_t tag_compression = 259;
constexpr std::uint16_t tag_strip_offsets = 273;
constexpr std::uint16_t tag_samples_per_pixel = 277;
constexpr std::uint16_t tag_rows_per_strip = 278;
constexpr std::uint16_t tag_strip_byte_counts = 279;
constexpr std::uint16_t tag_planar_configuration = 284;
constexpr std::uint16_t tag_predictor = 317;
constexpr std::uint16_t tag_tile_width = 322;
constexpr std::uint16_t tag_tile_length = 323;
constexpr std::uint16_t tag_tile_offsets = 324;
constexpr std::uint16_t tag_tile_byte_counts = 325;
constexpr std::uint16_t tag_sample_format = 339;
constexpr std::uint16_t tag_model_pixel_scale = 33550;
constexpr std::uint16_t tag_model_tiepoint = 33922;
constexpr std::uint16_t tag_geo_key_directory = 34735;
constexpr std::uint16_t tag_gdal_nodata = 42113;

// GeoKeys
constexpr std::uint16_t key_geographic_type = 2048;
constexpr std::uint16_t key_projected_cs_type = 3072;

struct ifd_entry {
    std::uint16_t tag = 0;
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::uint64_t value_pos = 0;  // file offset of the first value byte
};

int type_size(std::uint16_t type) {
    switch (type) {
        case 1: case 2: case 6: case 7: return 1;
        case 3: case 8: return 2;
        case 4: case 9: case 11: return 4;
        case 5: case 10: case 12: return 8;
        default: return 0;
    }
}

class tiff_decoder {
   public:
    tiff_decoder(const byte_source& src, bool big_endian) : _src(src), _big(big_endian) {}

    std::uint16_t u16(std::uint64_t pos) const {
        std::array<std::byte, 2> b;
        _src.read(pos, b);
        return _big ? static_cast<std::uint16_t>((std::to_integer<unsigned>(b[0]) << 8) | std::to_integer<unsigned>(b[1]))
                    : static_cast<std::uint16_t>((std::to_integer<unsigned>(b[1]) << 8) | std::to_integer<unsigned>(b[0]));
    }

    std::uint32_t u32(std::uint64_t pos) const {
        std::array<std::byte, 4> b;
        _src.read(pos, b);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            unsigned byte = std::to_integer<unsigned>(b[_big ? i : 3 - i]);
            v = (v << 8) | byte;
        }
        return v;
    }

    double f64(std::uint64_t pos) const {
        std::array<std::byte, 8> b;
        _src.read(pos, b);
        if (_big != (std::endian::native == std::endian::big)) std::reverse(b.begin(), b.end());
        double v;
        std::memcpy(&v, b.data(), 8);
        return v;
    }

    float f32(std::uint64_t pos) const {
        std::uint32_t bits = u32(pos);
        return std::bit_cast<float>(bits);
    }

    std::map<std::uint16_t, ifd_entry> read_first_ifd(std::uint64_t ifd_offset) const {
        std::map<std::uint16_t, ifd_entry> entries;
        std::uint16_t n = u16(ifd_offset);
        for (std::uint16_t i = 0; i < n; ++i) {
            std::uint64_t pos = ifd_offset + 2 + 12ull * i;
            ifd_entry e;
            e.tag = u16(pos);
            e.type = u16(pos + 2);
            e.count = u32(pos + 4);
            int sz = type_size(e.type);
            if (sz == 0) continue;  // unknown field types are skipped, as TIFF readers must
            std::uint64_t total = static_cast<std::uint64_t>(sz) * e.count;
            e.value_pos = total <= 4 ? pos + 8 : u32(pos + 8);
            entries.emplace(e.tag, e);
        }
        return entries;
    }

    std::vector<std::uint64_t> integers(const ifd_entry& e) const {
        std::vector<std::uint64_t> out;
        out.reserve(e.count);
        for (std::uint32_t i = 0; i < e.count; ++i) {
            switch (e.type) {
                case 1: case 7: {
                    std::array<std::byte, 1> b;
                    _src.read(e.value_pos + i, b);
                    out.push_back(std::to_integer<std::uint64_t>(b[0]));
                    break;
                }
                case 3: out.push_back(u16(e.value_pos + 2ull * i)); break;
                case 4: out.push_back(u32(e.value_pos + 4ull * i)); break;
                default:
                    throw error(errc::unsupported_format,
                                "tag " + std::to_string(e.tag) + " has non-integer type " + std::to_string(e.type));
            }
        }
        return out;
    }

    std::vector<double> reals(const ifd_entry& e) const {
        std::vector<double> out;
        out.reserve(e.count);
        for (std::uint32_t i = 0; i < e.count; ++i) {
            switch (e.type) {
                case 12: out.push_back(f64(e.value_pos + 8ull * i)); break;
                case 11: out.push_back(f32(e.value_pos + 4ull * i)); break;
                case 5: {
                    double num = u32(e.value_pos + 8ull * i);
                    double den = u32(e.value_pos + 8ull * i + 4);
                    out.push_back(den == 0 ? 0.0 : num / den);
                    break;
                }
                default: {
                    ifd_entry one = e;
                    auto ints = integers(one);
                    return {ints.begin(), ints.end()};
                }
            }
        }
        return out;
    }

    std::string ascii(const ifd_entry& e) const {
        std::string s(e.count, '\0');
        _src.read(e.value_pos, std::as_writable_bytes(std::span<char>(s.data(), s.size())));
        auto nul = s.find('\0');
        if (nul != std::string::npos) s.resize(nul);
        return s;
    }

   private:
    const byte_source& _src;
    bool _big;
};

const ifd_entry& require(const std::map<std::uint16_t, ifd_entry>& tags, std::uint16_t tag, const char* name) {
    auto it = tags.find(tag);
    if (it == tags.end()) throw error(errc::missing_tag, std::string("required tag ") + name + " is absent", name);
    return it->second;
}

std::uint64_t single_integer(const tiff_decoder& dec, const ifd_entry& e) {
    auto v = dec.integers(e);
    if (v.empty()) throw error(errc::unsupported_format, "tag " + std::to_string(e.tag) + " has no value");
    return v.front();
}

sample_type resolve_sample_type(std::uint64_t format, std::uint64_t bits) {
    if (format == 1 && bits == 8) return sample_type::uint8;
    if (format == 1 && bits == 16) return sample_type::uint16;
    if (format == 2 && bits == 16) return sample_type::int16;
    if (format == 1 && bits == 32) return sample_type::uint32;
    if (format == 2 && bits == 32) return sample_type::int32;
    if (format == 3 && bits == 32) return sample_type::float32;
    if (format == 3 && bits == 64) return sample_type::float64;
    throw error(errc::unsupported_format, "unsupported sample format " + std::to_string(format) + " with " +
                                              std::to_string(bits) + " bits");
}

int parse_crs(const tiff_decoder& dec, const ifd_entry& dir_entry) {
    auto dir = dec.integers(dir_entry);
    if (dir.size() < 4) throw error(errc::malformed_geokeys, "GeoKeyDirectory shorter than its header");
    std::uint64_t nkeys = dir[3];
    if (dir.size() < 4 + 4 * nkeys) {
        throw error(errc::malformed_geokeys, "GeoKeyDirectory declares " + std::to_string(nkeys) + " keys but holds " +
                                                 std::to_string((dir.size() - 4) / 4));
    }
    std::optional<std::uint64_t> projected, geographic;
    for (std::uint64_t k = 0; k < nkeys; ++k) {
        std::uint64_t id = dir[4 + 4 * k];
        std::uint64_t location = dir[4 + 4 * k + 1];
        std::uint64_t value = dir[4 + 4 * k + 3];
        if (location != 0) continue;  // CRS codes are always stored inline
        if (id == key_projected_cs_type) projected = value;
        if (id == key_geographic_type) geographic = value;
    }
    if (projected) return static_cast<int>(*projected);
    if (geographic) return static_cast<int>(*geographic);
    throw error(errc::missing_tag, "GeoKeyDirectory carries neither ProjectedCSTypeGeoKey nor GeographicTypeGeoKey",
                "ProjectedCSTypeGeoKey");
}

int bytes_per_sample(const raster_metadata& m) { return m.bits_per_sample / 8; }

double decode_sample(const std::byte* p, sample_type t, bool swap) {
    std::array<std::byte, 8> b{};
    int n = bits_of(t) / 8;
    std::memcpy(b.data(), p, static_cast<std::size_t>(n));
    if (swap) std::reverse(b.begin(), b.begin() + n);
    switch (t) {
        case sample_type::uint8: return static_cast<double>(std::to_integer<std::uint8_t>(b[0]));
        case sample_type::uint16: { std::uint16_t v; std::memcpy(&v, b.data(), 2); return v; }
        case sample_type::int16: { std::int16_t v; std::memcpy(&v, b.data(), 2); return v; }
        case sample_type::uint32: { std::uint32_t v; std::memcpy(&v, b.data(), 4); return v; }
        case sample_type::int32: { std::int32_t v; std::memcpy(&v, b.data(), 4); return v; }
        case sample_type::float32: { float v; std::memcpy(&v, b.data(), 4); return v; }
        case sample_type::float64: { double v; std::memcpy(&v, b.data(), 8); return v; }
    }
    return 0;
}

// The nodata value as it would be stored in the file's sample type, or nullopt
// when the type cannot represent it (then no cell can match).
std::optional<double> stored_nodata(const raster_metadata& m) {
    if (!m.nodata) return std::nullopt;
    double v = *m.nodata;
    auto int_fits = [&](double lo, double hi) -> std::optional<double> {
        if (std::isnan(v) || v < lo || v > hi || std::trunc(v) != v) return std::nullopt;
        return v;
    };
    switch (m.type) {
        case sample_type::uint8: return int_fits(0, 255);
        case sample_type::uint16: return int_fits(0, 65535);
        case sample_type::int16: return int_fits(-32768, 32767);
        case sample_type::uint32: return int_fits(0, 4294967295.0);
        case sample_type::int32: return int_fits(-2147483648.0, 2147483647.0);
        case sample_type::float32: return static_cast<double>(static_cast<float>(v));
        case sample_type::float64: return v;
    }
    return std::nullopt;
}

void inflate_chunk(std::span<const std::byte> in, std::span<std::byte> out, std::size_t chunk_index) {
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw error(errc::decode_error, "zlib initialisation failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<std::byte*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    std::size_t produced = out.size() - zs.avail_out;
    inflateEnd(&zs);
    // A writer may store a full-height last strip; extra output is acceptable.
    bool filled = produced == out.size();
    if (!filled || !(rc == Z_STREAM_END || rc == Z_OK || rc == Z_BUF_ERROR)) {
        throw error(errc::decode_error, "deflate decompression failed for chunk " + std::to_string(chunk_index),
                    "produced " + std::to_string(produced) + " of " + std::to_string(out.size()) + " bytes");
    }
}

}  // namespace

geo_transform geo_transform::translated(double col, double row) const {
    geo_transform t = *this;
    t.c[0] = c[0] + col * c[1] + row * c[2];
    t.c[3] = c[3] + col * c[4] + row * c[5];
    return t;
}

std::string_view to_string(sample_type t) {
    switch (t) {
        case sample_type::uint8: return "uint8";
        case sample_type::uint16: return "uint16";
        case sample_type::int16: return "int16";
        case sample_type::uint32: return "uint32";
        case sample_type::int32: return "int32";
        case sample_type::float32: return "float32";
        case sample_type::float64: return "float64";
    }
    return "uint8";
}

sample_type sample_type_from_string(std::string_view s) {
    for (auto t : {sample_type::uint8, sample_type::uint16, sample_type::int16, sample_type::uint32, sample_type::int32,
                   sample_type::float32, sample_type::float64}) {
        if (to_string(t) == s) return t;
    }
    throw error(errc::invalid_argument, "unknown sample type '" + std::string(s) + "'");
}

int bits_of(sample_type t) {
    switch (t) {
        case sample_type::uint8: return 8;
        case sample_type::uint16:
        case sample_type::int16: return 16;
        case sample_type::uint32:
        case sample_type::int32:
        case sample_type::float32: return 32;
        case sample_type::float64: return 64;
    }
    return 8;
}

raster_metadata parse_metadata(std::span<const std::byte> bytes) {
    memory_source src(std::vector<std::byte>(bytes.begin(), bytes.end()));
    return parse_metadata(src);
}

raster_metadata parse_metadata(const byte_source& source) {
    if (source.size() < 8) throw error(errc::unsupported_format, "file too short for a TIFF header");
    std::array<std::byte, 4> head;
    source.read(0, head);
    bool big;
    if (head[0] == std::byte{'I'} && head[1] == std::byte{'I'}) {
        big = false;
    } else if (head[0] == std::byte{'M'} && head[1] == std::byte{'M'}) {
        big = true;
    } else {
        throw error(errc::unsupported_format, "not a TIFF file (bad byte-order mark)");
    }
    tiff_decoder dec(source, big);
    std::uint16_t magic = dec.u16(2);
    if (magic == 43) throw error(errc::unsupported_format, "BigTIFF is not supported");
    if (magic != 42) throw error(errc::unsupported_format, "not a TIFF file (magic " + std::to_string(magic) + ")");

    auto tags = dec.read_first_ifd(dec.u32(4));

    raster_metadata m;
    m.byte_order = big ? byte_order::big : byte_order::little;
    m.width = static_cast<int>(single_integer(dec, require(tags, tag_image_width, "ImageWidth")));
    m.height = static_cast<int>(single_integer(dec, require(tags, tag_image_length, "ImageLength")));
    if (m.width <= 0 || m.height <= 0) throw error(errc::unsupported_format, "empty raster");

    auto bits = dec.integers(require(tags, tag_bits_per_sample, "BitsPerSample"));
    auto comp = single_integer(dec, require(tags, tag_compression, "Compression"));
    m.band_count = static_cast<int>(single_integer(dec, require(tags, tag_samples_per_pixel, "SamplesPerPixel")));
    if (m.band_count < 1) throw error(errc::unsupported_format, "SamplesPerPixel must be at least 1");

    if (comp == 1) {
        m.compression = compression::none;
    } else if (comp == 8) {
        m.compression = compression::deflate;
    } else {
        throw error(errc::unsupported_format, "unsupported compression " + std::to_string(comp));
    }
    if (auto it = tags.find(tag_planar_configuration); it != tags.end() && m.band_count > 1 &&
                                                        single_integer(dec, it->second) != 1) {
        throw error(errc::unsupported_format, "only chunky planar configuration is supported");
    }
    if (auto it = tags.find(tag_predictor); it != tags.end() && single_integer(dec, it->second) != 1) {
        throw error(errc::unsupported_format, "predictors are not supported");
    }

    for (auto b : bits) {
        if (b != bits.front()) throw error(errc::unsupported_format, "bands with differing bit depths");
    }
    std::uint64_t format = 1;
    if (auto it = tags.find(tag_sample_format); it != tags.end()) {
        auto formats = dec.integers(it->second);
        for (auto f : formats) {
            if (f != formats.front()) throw error(errc::unsupported_format, "bands with differing sample formats");
        }
        format = formats.front();
    }
    m.type = resolve_sample_type(format, bits.front());
    m.bits_per_sample = static_cast<int>(bits.front());

    bool tiled = tags.contains(tag_tile_width) || tags.contains(tag_tile_offsets);
    if (tiled) {
        m.layout = raster_layout::tiled;
        m.chunk_width = static_cast<int>(single_integer(dec, require(tags, tag_tile_width, "TileWidth")));
        m.chunk_height = static_cast<int>(single_integer(dec, require(tags, tag_tile_length, "TileLength")));
        m.chunk_offsets = dec.integers(require(tags, tag_tile_offsets, "TileOffsets"));
        m.chunk_byte_counts = dec.integers(require(tags, tag_tile_byte_counts, "TileByteCounts"));
        if (m.chunk_width <= 0 || m.chunk_height <= 0 || m.chunk_width % 16 != 0 || m.chunk_height % 16 != 0) {
            throw error(errc::unsupported_format, "tile dimensions must be positive multiples of 16");
        }
    } else {
        m.layout = raster_layout::stripped;
        m.chunk_offsets = dec.integers(require(tags, tag_strip_offsets, "StripOffsets"));
        auto rps = single_integer(dec, require(tags, tag_rows_per_strip, "RowsPerStrip"));
        m.chunk_byte_counts = dec.integers(require(tags, tag_strip_byte_counts, "StripByteCounts"));
        m.chunk_width = m.width;
        m.chunk_height = static_cast<int>(std::min<std::uint64_t>(rps, static_cast<std::uint64_t>(m.height)));
        if (m.chunk_height <= 0) throw error(errc::unsupported_format, "RowsPerStrip must be positive");
    }
    std::size_t across = (m.width + m.chunk_width - 1) / m.chunk_width;
    std::size_t down = (m.height + m.chunk_height - 1) / m.chunk_height;
    if (m.chunk_offsets.size() != across * down || m.chunk_byte_counts.size() != across * down) {
        throw error(errc::unsupported_format, "chunk table size does not match the raster layout",
                    "expected " + std::to_string(across * down) + " entries");
    }

    auto scale = dec.reals(require(tags, tag_model_pixel_scale, "ModelPixelScaleTag"));
    auto tie = dec.reals(require(tags, tag_model_tiepoint, "ModelTiepointTag"));
    if (scale.size() < 2 || tie.size() < 6) throw error(errc::unsupported_format, "truncated georeferencing tags");
    m.transform.c = {tie[3] - tie[0] * scale[0], scale[0], 0.0, tie[4] + tie[1] * scale[1], 0.0, -scale[1]};
    m.crs_epsg = parse_crs(dec, require(tags, tag_geo_key_directory, "GeoKeyDirectoryTag"));

    if (auto it = tags.find(tag_gdal_nodata); it != tags.end()) {
        std::string text = dec.ascii(it->second);
        auto first = text.find_first_not_of(" \t");
        if (first != std::string::npos) {
            char* end = nullptr;
            double v = std::strtod(text.c_str() + first, &end);
            if (end != text.c_str() + first) m.nodata = v;
        }
    }
    return m;
}

pixel_patch read_window(const byte_source& source, const raster_metadata& meta, int band_index,
                        const pixel_window& window) {
    if (band_index < 0 || band_index >= meta.band_count) {
        throw error(errc::out_of_bounds, "band index " + std::to_string(band_index) + " outside [0," +
                                             std::to_string(meta.band_count) + ")");
    }
    long long c0 = std::max<long long>(window.col, 0);
    long long r0 = std::max<long long>(window.row, 0);
    long long c1 = std::min<long long>(window.col + window.width, meta.width);
    long long r1 = std::min<long long>(window.row + window.height, meta.height);
    if (window.width <= 0 || window.height <= 0 || c0 >= c1 || r0 >= r1) {
        throw error(errc::out_of_bounds, "window does not intersect the raster");
    }

    pixel_patch patch;
    patch.width = static_cast<int>(c1 - c0);
    patch.height = static_cast<int>(r1 - r0);
    patch.values.assign(static_cast<std::size_t>(patch.width) * patch.height, 0.0);
    patch.valid.assign(patch.values.size(), true);
    patch.transform = meta.transform.translated(static_cast<double>(c0), static_cast<double>(r0));

    const int bps = bytes_per_sample(meta);
    const std::size_t stride = static_cast<std::size_t>(bps) * meta.band_count;
    const bool swap = (meta.byte_order == byte_order::big) != (std::endian::native == std::endian::big);
    const std::optional<double> nodata = stored_nodata(meta);
    const bool nodata_nan = nodata && std::isnan(*nodata);
    const long long cw = meta.chunk_width;
    const long long ch = meta.chunk_height;
    const long long across = (meta.width + cw - 1) / cw;

    auto store = [&](const std::byte* pixel, long long col, long long row) {
        double v = decode_sample(pixel + static_cast<std::size_t>(band_index) * bps, meta.type, swap);
        std::size_t idx = static_cast<std::size_t>(row - r0) * patch.width + static_cast<std::size_t>(col - c0);
        patch.values[idx] = v;
        if (nodata && (nodata_nan ? std::isnan(v) : v == *nodata)) patch.valid[idx] = false;
    };

    std::vector<std::byte> buffer;
    std::vector<std::byte> compressed;
    for (long long cy = r0 / ch; cy * ch < r1; ++cy) {
        for (long long cx = c0 / cw; cx * cw < c1; ++cx) {
            std::size_t index = static_cast<std::size_t>(cy * across + cx);
            long long chunk_row0 = cy * ch;
            long long chunk_col0 = cx * cw;
            // Strips hold only the rows that exist; tiles are always full size.
            long long rows_present =
                meta.layout == raster_layout::stripped ? std::min(ch, meta.height - chunk_row0) : ch;
            std::size_t required = static_cast<std::size_t>(rows_present) * cw * stride;
            std::uint64_t offset = meta.chunk_offsets[index];
            std::uint64_t count = meta.chunk_byte_counts[index];

            long long rr0 = std::max(r0, chunk_row0), rr1 = std::min(r1, chunk_row0 + rows_present);
            long long cc0 = std::max(c0, chunk_col0), cc1 = std::min(c1, chunk_col0 + cw);

            if (meta.compression == compression::none) {
                if (count < required) {
                    throw error(errc::decode_error, "chunk " + std::to_string(index) + " is shorter than its layout",
                                std::to_string(count) + " < " + std::to_string(required) + " bytes");
                }
                std::size_t seg = static_cast<std::size_t>(cc1 - cc0) * stride;
                buffer.resize(seg);
                for (long long row = rr0; row < rr1; ++row) {
                    std::uint64_t pos = offset + (static_cast<std::uint64_t>(row - chunk_row0) * cw +
                                                  static_cast<std::uint64_t>(cc0 - chunk_col0)) *
                                                     stride;
                    source.read(pos, buffer);
                    for (long long col = cc0; col < cc1; ++col) {
                        store(buffer.data() + static_cast<std::size_t>(col - cc0) * stride, col, row);
                    }
                }
            } else {
                compressed.resize(count);
                source.read(offset, compressed);
                buffer.resize(required);
                inflate_chunk(compressed, buffer, index);
                for (long long row = rr0; row < rr1; ++row) {
                    const std::byte* line = buffer.data() + static_cast<std::size_t>(row - chunk_row0) * cw * stride;
                    for (long long col = cc0; col < cc1; ++col) {
                        store(line + static_cast<std::size_t>(col - chunk_col0) * stride, col, row);
                    }
                }
            }
        }
    }
    return patch;
}

}  // namespace minicube
