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

#ifndef MINICUBE_EXPORT_HPP
#define MINICUBE_EXPORT_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "minicube/engine.hpp"

namespace minicube {

enum class export_format { csv, geojson };

std::string_view to_string(export_format f);
export_format export_format_from_string(std::string_view s);

/// Deduplication key of exported rows.
struct row_key {
    std::string polygon_id;
    std::string product;
    instant timestamp;
    std::string measure;

    friend auto operator<=>(const row_key&, const row_key&) = default;
    friend bool operator==(const row_key&, const row_key&) = default;
};

/**
 * Sidecar "<destination>.manifest": first line "minicube-manifest 1", then
 * one JSON object with the query fingerprint and covered keys.
 */
struct export_manifest {
    int version = 1;
    std::string fingerprint;
    aggregate_mode mode = aggregate_mode::zonal;
    export_format format = export_format::csv;
    std::set<row_key> covered;
    instant created_at;
    instant updated_at;
};

std::string manifest_path(const std::string& destination);
export_manifest read_manifest(const std::string& destination);

/// At most 9 significant digits, trailing zeros dropped (printf "%.9g").
std::string format_real(double v);

/// RFC 4180 text (CRLF line ends) with a header row, rows in table order.
std::string table_to_csv(const observation_table& t);
/// Inverse of table_to_csv; the fingerprint is not part of the file and stays empty.
observation_table table_from_csv(std::string_view csv);

/**
 * One Feature per polygon of a zonal table; properties map
 * "<measure>@<timestamp>" to {product: stats}. Geometry comes from `geometry`
 * (polygons missing there get a null geometry).
 */
std::string table_to_geojson(const observation_table& t, const std::map<std::string, geo_polygon>& geometry);

struct export_options {
    std::map<std::string, geo_polygon> geometry;  // GeoJSON only
    /// Called after temporary files are written and before they replace the destination.
    std::function<void()> before_commit;
};

export_manifest export_table(const observation_table& t, export_format format, const std::string& destination,
                             const export_options& options = {});

/**
 * Adds rows of `t_new` whose keys the destination does not cover yet; covered
 * rows are left byte-for-byte unchanged (first write wins). The file is
 * rewritten sorted and swapped in by rename, under "<destination>.lock".
 */
export_manifest merge_incremental(const std::string& destination, const observation_table& t_new,
                                  const export_options& options = {});

struct rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const rgb&, const rgb&) = default;
};

/// Linear ramp from ramp_low (value <= lo) to ramp_high (value >= hi).
constexpr rgb ramp_low{215, 48, 39};
constexpr rgb ramp_high{26, 152, 80};
rgb ramp_color(double value, double lo, double hi);
std::string to_hex(rgb c);

/// Per-cell values over a region window, drawn as coloured pixel footprints.
struct region_coloring {
    pixel_region region;
    geo_transform transform;     // raster geotransform the region indexes into
    std::vector<double> values;  // region window, row-major; NaN = no value
    double lo = 0;
    double hi = 1;
};

std::string render_polygon_svg(const geo_polygon& p, const std::optional<region_coloring>& coloring = std::nullopt);
std::string render_timeseries_svg(std::span<const std::pair<instant, double>> series, const std::string& title = {});

}  // namespace minicube

#endif
