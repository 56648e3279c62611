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

#ifndef MINICUBE_RASTER_IO_HPP
#define MINICUBE_RASTER_IO_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minicube/byte_source.hpp"

namespace minicube {

/**
 * Affine map from pixel (col,row) to world (x,y):
 *   x = c[0] + col*c[1] + row*c[2]
 *   y = c[3] + col*c[4] + row*c[5]
 */
struct geo_transform {
    std::array<double, 6> c{0, 1, 0, 0, 0, 1};

    double determinant() const { return c[1] * c[5] - c[2] * c[4]; }
    /// Same map re-anchored so that pixel (col,row) becomes the origin.
    geo_transform translated(double col, double row) const;

    friend bool operator==(const geo_transform&, const geo_transform&) = default;
};

enum class sample_type { uint8, uint16, int16, uint32, int32, float32, float64 };

std::string_view to_string(sample_type t);
sample_type sample_type_from_string(std::string_view s);
int bits_of(sample_type t);

enum class raster_layout { stripped, tiled };
enum class compression { none, deflate };
enum class byte_order { little, big };

struct raster_metadata {
    int width = 0;
    int height = 0;
    int band_count = 1;
    sample_type type = sample_type::uint8;
    int bits_per_sample = 8;
    std::optional<double> nodata;
    geo_transform transform;
    int crs_epsg = 0;
    raster_layout layout = raster_layout::stripped;
    /// Tile width/height for tiled rasters; (width, rows_per_strip) for stripped ones.
    int chunk_width = 0;
    int chunk_height = 0;
    enum compression compression = compression::none;
    enum byte_order byte_order = byte_order::little;

    /// Offsets and byte counts, one entry per strip or tile, in file order.
    std::vector<std::uint64_t> chunk_offsets;
    std::vector<std::uint64_t> chunk_byte_counts;

    friend bool operator==(const raster_metadata&, const raster_metadata&) = default;
};

/// Half-open pixel rectangle [col, col+width) x [row, row+height).
struct pixel_window {
    long long col = 0;
    long long row = 0;
    long long width = 0;
    long long height = 0;
};

struct pixel_patch {
    int width = 0;
    int height = 0;
    std::vector<double> values;  // row-major
    std::vector<bool> valid;     // row-major, false where the stored value is nodata
    geo_transform transform;
    std::string band_name;

    double at(int col, int row) const { return values[static_cast<std::size_t>(row) * width + col]; }
    bool valid_at(int col, int row) const { return valid[static_cast<std::size_t>(row) * width + col]; }
};

raster_metadata parse_metadata(const byte_source& source);
raster_metadata parse_metadata(std::span<const std::byte> bytes);

/**
 * Reads one band of `window` (clipped to the raster extent) as reals.
 *
 * Only the strips or tiles intersecting the window are touched; for
 * uncompressed data only the row segments inside the window are read.
 */
pixel_patch read_window(const byte_source& source, const raster_metadata& meta, int band_index,
                        const pixel_window& window);

}  // namespace minicube

#endif
