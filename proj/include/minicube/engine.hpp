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

#ifndef MINICUBE_ENGINE_HPP
#define MINICUBE_ENGINE_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "minicube/catalog.hpp"

namespace minicube {

enum class aggregate_mode { zonal, per_pixel };

std::string_view to_string(aggregate_mode m);
aggregate_mode aggregate_mode_from_string(std::string_view s);

struct load_query {
    std::vector<std::string> polygon_ids;
    std::vector<geo_polygon> inline_polygons;
    std::vector<std::string> products;
    std::vector<std::string> measures;  // band names, "ndvi" or "evi"
    instant start;                      // inclusive
    instant end;                        // exclusive
    aggregate_mode aggregate = aggregate_mode::zonal;

    void validate() const;
    /// Hash of everything except the time interval.
    std::string fingerprint() const;
};

struct zonal_summary {
    double mean = 0;
    double stddev = 0;  // population
    double min = 0;
    double max = 0;
    double median = 0;
    friend bool operator==(const zonal_summary&, const zonal_summary&) = default;
};

struct zonal_stats {
    std::size_t count = 0;        // pixels in the region
    std::size_t valid_count = 0;  // in the region and valid
    std::optional<zonal_summary> summary;  // absent when valid_count == 0
    friend bool operator==(const zonal_stats&, const zonal_stats&) = default;
};

struct zonal_row {
    std::string polygon_id;
    std::string product;
    instant timestamp;
    std::string measure;
    zonal_stats stats;
    friend bool operator==(const zonal_row&, const zonal_row&) = default;
};

struct pixel_row {
    std::string polygon_id;
    std::string product;
    instant timestamp;
    std::string measure;
    int col = 0;
    int row = 0;
    double x = 0;
    double y = 0;
    double value = 0;
    friend bool operator==(const pixel_row&, const pixel_row&) = default;
};

/// Rows ordered by (polygon_id, timestamp, measure, product), then row-major pixels.
struct observation_table {
    aggregate_mode mode = aggregate_mode::zonal;
    std::string fingerprint;
    std::vector<zonal_row> zonal;
    std::vector<pixel_row> pixels;

    std::size_t size() const { return mode == aggregate_mode::zonal ? zonal.size() : pixels.size(); }
};

enum class index_kind { ndvi, evi };

// EVI = gain * (nir - red) / (nir + c1*red - c2*blue + l)
struct evi_coefficients {
    static constexpr double gain = 2.5;
    static constexpr double c1 = 6.0;
    static constexpr double c2 = 7.5;
    static constexpr double l = 1.0;
};

/// Cells whose index denominator is smaller than this in magnitude become invalid.
constexpr double index_denominator_guard = 1e-12;

std::optional<index_kind> index_from_name(std::string_view name);
std::string_view to_string(index_kind k);

/// Cellwise index over role-keyed patches ("nir", "red", and for EVI "blue").
pixel_patch compute_index(index_kind kind, const std::map<std::string, pixel_patch>& bands);

/// Statistics over cells that are both inside the region and valid; patch and region share one window.
zonal_stats compute_zonal_stats(const pixel_patch& patch, const pixel_region& region);

/// Band serving an index role: the product's role map first, then B08/B04/B02.
std::optional<std::string> band_for_role(const product_definition& product, const std::string& role);

struct engine_options {
    unsigned threads = 0;  // 0 = hardware concurrency
    /// Opens dataset files; defaults to open_uri. Tests substitute counting sources.
    std::function<std::shared_ptr<const byte_source>(const std::string&)> opener;
};

class engine {
   public:
    explicit engine(const catalog& cat, engine_options options = {});

    observation_table load(const load_query& q) const;

    /// Zonal rows of one polygon/product/measure ordered by timestamp; empty when start >= end.
    std::vector<std::pair<instant, zonal_stats>> timeseries(const std::string& polygon_id, const std::string& product,
                                                            const std::string& measure, instant start,
                                                            instant end) const;

   private:
    const catalog& _catalog;
    engine_options _options;
};

}  // namespace minicube

#endif
