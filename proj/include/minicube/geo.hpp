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

#ifndef MINICUBE_GEO_HPP
#define MINICUBE_GEO_HPP

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "minicube/raster_io.hpp"

namespace minicube {

/// EPSG code restricted to WGS84 geographic (4326) and WGS84/UTM (326zz, 327zz).
struct crs_id {
    int epsg = 4326;

    static crs_id wgs84() { return {4326}; }
    static crs_id utm(int zone, bool north) { return {(north ? 32600 : 32700) + zone}; }
    /// Throws unsupported_crs unless `epsg` is one of the supported codes.
    static crs_id checked(int epsg);

    bool is_supported() const;
    bool is_geographic() const { return epsg == 4326; }
    bool is_utm() const { return (epsg > 32600 && epsg <= 32660) || (epsg > 32700 && epsg <= 32760); }
    int utm_zone() const { return epsg % 100; }
    bool utm_north() const { return epsg < 32700; }

    friend bool operator==(const crs_id&, const crs_id&) = default;
    friend auto operator<=>(const crs_id&, const crs_id&) = default;
};

struct point {
    double x = 0;
    double y = 0;
    friend bool operator==(const point&, const point&) = default;
};

using ring = std::vector<point>;

struct bbox {
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

    bool intersects(const bbox& o) const {
        return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y && o.min_y <= max_y;
    }
    friend bool operator==(const bbox&, const bbox&) = default;
};

/**
 * Region of interest. Rings are implicitly closed (a repeated first vertex
 * at the end is tolerated and ignored).
 */
struct geo_polygon {
    std::string id;
    ring exterior;
    std::vector<ring> holes;
    crs_id crs;
    std::map<std::string, std::string> attributes;

    bbox bounds() const;
    /// Throws invalid_argument when the exterior has fewer than 3 distinct vertices.
    void validate() const;

    friend bool operator==(const geo_polygon&, const geo_polygon&) = default;
};

struct pixel_region {
    int col = 0;  // origin of the bounding window
    int row = 0;
    int width = 0;
    int height = 0;
    std::vector<bool> mask;  // row-major, true = pixel centre inside

    bool at(int c, int r) const { return mask[static_cast<std::size_t>(r) * width + c]; }
    std::size_t cell_count() const;
    pixel_window window() const { return {col, row, width, height}; }
};

point world_to_pixel(const geo_transform& gt, double x, double y);
point pixel_to_world(const geo_transform& gt, double col, double row);

enum class hemisphere { north, south };

struct utm_coord {
    double easting = 0;
    double northing = 0;
};

struct lon_lat {
    double lon = 0;
    double lat = 0;
};

/// WGS84 transverse Mercator (k0 = 0.9996) using the 6th-order Krueger series.
utm_coord utm_forward(int zone, hemisphere h, double lon, double lat);
lon_lat utm_inverse(int zone, hemisphere h, double easting, double northing);

/// Standard 6-degree zone of a longitude (no Norway/Svalbard exceptions).
int utm_zone_of(double lon);

/// Area centroid of a ring; falls back to the vertex mean for degenerate rings.
point ring_centroid(const ring& r);

/// UTM CRS containing the centroid of a geographic polygon's exterior.
crs_id utm_crs_for(const geo_polygon& p);

geo_polygon transform_polygon(const geo_polygon& p, crs_id target);

/**
 * Pixels whose centres fall inside `p` under the even-odd rule.
 *
 * The test point is the pixel centre nudged by +1e-9 pixel heights in world y,
 * with a ray cast towards +x; a centre exactly on an edge therefore belongs to
 * exactly one of two polygons sharing that edge. The result is clipped to the
 * raster and trimmed to its tight bounding window; nullopt means no centre is
 * inside.
 */
std::optional<pixel_region> rasterize_polygon(const geo_polygon& p, const geo_transform& gt, int raster_width,
                                              int raster_height);

}  // namespace minicube

#endif
