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

#ifndef MINICUBE_CATALOG_HPP
#define MINICUBE_CATALOG_HPP

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "minicube/geo.hpp"
#include "minicube/raster_io.hpp"
#include "minicube/sources.hpp"
#include "minicube/time.hpp"

namespace minicube {

struct band_def {
    std::string name;
    sample_type type = sample_type::uint16;
    std::optional<double> nodata;
    double scale = 1.0;  // stored value * scale = physical value
    int band_index_in_file = 0;

    friend bool operator==(const band_def&, const band_def&) = default;
};

struct product_definition {
    std::string name;
    std::vector<band_def> bands;
    crs_id crs;
    double resolution_x = 0;
    double resolution_y = 0;
    std::string filename_rule;
    std::string timestamp_format;
    source_kind source = source_kind::local_dir;
    std::string source_root;
    /// Index band roles ("nir", "red", "blue") to band names; empty entries fall back to Sentinel-2 names.
    std::map<std::string, std::string> roles;

    const band_def* find_band(std::string_view band_name) const;
    void validate() const;

    friend bool operator==(const product_definition&, const product_definition&) = default;
};

struct dataset_record {
    std::string id;
    std::string product;
    std::string scene;
    instant timestamp;
    geo_polygon footprint;
    geo_transform transform;
    int width = 0;
    int height = 0;
    std::map<std::string, std::string> files;  // band name -> URI
    instant ingested_at;
    bool partial = false;

    friend bool operator==(const dataset_record&, const dataset_record&) = default;
};

struct annotation_record {
    std::string id;
    std::string polygon_id;
    std::string label;
    std::string author;
    instant created_at;
    std::optional<std::string> note;

    friend bool operator==(const annotation_record&, const annotation_record&) = default;
};

/**
 * Filename rule with named captures, e.g. "{scene}_{timestamp}_{band}.tif".
 *
 * "{name}" matches a non-empty shortest run of characters, "{name:regex}"
 * matches the given ECMAScript expression, "*" matches anything, and all
 * other characters are literal. The whole filename must match.
 */
class filename_pattern {
   public:
    explicit filename_pattern(const std::string& rule);

    std::optional<std::map<std::string, std::string>> match(const std::string& filename) const;
    bool has_capture(const std::string& name) const;

   private:
    std::regex _re;
    std::vector<std::string> _names;
};

struct sample_file {
    std::string filename;
    std::vector<std::byte> bytes;
};

/**
 * Builds a product definition by reading sample files.
 *
 * With a band capture in the rule, every sample names one band (one file per
 * band); otherwise the first sample's bands become band_0..band_{n-1}.
 */
product_definition infer_product_definition(std::span<const sample_file> samples, const std::string& name,
                                            const std::string& filename_rule, const std::string& timestamp_format);

/// Time and space filter for query_datasets; absent fields do not filter.
struct dataset_filter {
    std::optional<std::string> product;
    std::optional<bbox> area;
    std::optional<crs_id> area_crs;
    std::optional<instant> start;  // inclusive
    std::optional<instant> end;    // exclusive
};

struct scan_failure {
    std::string uri;
    std::string code;
    std::string message;
};

struct scan_report {
    std::string product;
    std::vector<dataset_record> ingested;
    std::vector<scan_failure> failures;
};

struct catalog_state {
    std::map<std::string, product_definition> products;
    std::map<std::string, dataset_record> datasets;
    std::map<std::string, geo_polygon> polygons;
    std::vector<annotation_record> annotations;

    friend bool operator==(const catalog_state&, const catalog_state&) = default;
};

/// Persistence seam for the catalog: an ordered log of self-describing text records.
class catalog_storage {
   public:
    virtual ~catalog_storage() = default;
    /// All records in replay order (snapshot first, then the log).
    virtual std::vector<std::string> load() = 0;
    virtual void append(std::span<const std::string> records) = 0;
    /// Replaces snapshot and log with `records`.
    virtual void compact(std::span<const std::string> records) = 0;
};

/**
 * Newline-delimited records under a directory: "catalog.snapshot" and
 * "catalog.log", each starting with the line "minicube-catalog 1".
 * A torn final log line is ignored on load.
 */
class file_storage : public catalog_storage {
   public:
    explicit file_storage(std::string directory);
    std::vector<std::string> load() override;
    void append(std::span<const std::string> records) override;
    void compact(std::span<const std::string> records) override;

    std::string log_path() const;
    std::string snapshot_path() const;

   private:
    std::string _dir;
};

class memory_storage : public catalog_storage {
   public:
    std::vector<std::string> load() override { return _records; }
    void append(std::span<const std::string> records) override {
        _records.insert(_records.end(), records.begin(), records.end());
    }
    void compact(std::span<const std::string> records) override { _records.assign(records.begin(), records.end()); }

   private:
    std::vector<std::string> _records;
};

/**
 * Spatio-temporal index of products, scenes, polygons and annotations.
 *
 * One writer at a time (writes serialize on an internal mutex); readers take
 * a shared lock and only ever see fully ingested scenes.
 */
class catalog {
   public:
    explicit catalog(std::unique_ptr<catalog_storage> storage, std::size_t compact_every = 10000);
    static std::unique_ptr<catalog> open_directory(const std::string& directory);

    void register_product(const product_definition& def);
    std::vector<product_definition> products() const;
    product_definition product(const std::string& name) const;

    /// Groups `uris` into scenes and indexes each; known complete scenes are returned unchanged.
    std::vector<dataset_record> ingest_scene(const std::string& product, const std::vector<std::string>& uris);
    std::vector<dataset_record> query_datasets(const dataset_filter& filter) const;
    std::vector<dataset_record> datasets() const;

    scan_report scan_source(const std::string& product);

    std::size_t ingest_polygons(std::string_view geojson, std::optional<crs_id> crs_override = std::nullopt);
    std::vector<geo_polygon> polygons() const;
    std::optional<geo_polygon> polygon(const std::string& id) const;

    annotation_record add_annotation(const std::string& polygon_id, const std::string& label, const std::string& author,
                                     std::optional<std::string> note);
    std::vector<annotation_record> annotations(const std::optional<std::string>& polygon_id = std::nullopt) const;

    void compact();
    catalog_state state() const;

   private:
    void apply(const std::string& record);
    void persist(std::span<const std::string> records);
    void compact_if_due();
    void compact_locked();
    std::vector<dataset_record> ingest_locked(const product_definition& def, const std::vector<std::string>& uris,
                                              std::vector<scan_failure>* failures);

    std::unique_ptr<catalog_storage> _storage;
    std::size_t _compact_every;
    std::size_t _appended = 0;
    catalog_state _state;
    mutable std::shared_mutex _state_mutex;
    std::mutex _write_mutex;
};

/// Footprint rectangle spanned by the raster corners.
geo_polygon footprint_of(const geo_transform& gt, int width, int height, crs_id crs);

/// Stable scene id: content hash of (product, scene, timestamp).
std::string scene_id(const std::string& product, const std::string& scene, instant timestamp);

/// Parses a GeoJSON FeatureCollection of Polygon/MultiPolygon features.
std::vector<geo_polygon> parse_geojson_polygons(std::string_view geojson, std::optional<crs_id> crs_override);

}  // namespace minicube

#endif
