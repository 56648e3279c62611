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

#include "minicube/catalog.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "minicube/error.hpp"
#include "minicube/hash.hpp"
#include "minicube/json_codec.hpp"

namespace minicube {

using nlohmann::json;

namespace {

constexpr const char* catalog_header = "minicube-catalog 1";

std::string escape_regex(char c) {
    static const std::string special = R"(\^$.|?*+()[]{}/)";
    if (special.find(c) != std::string::npos) return std::string("\\") + c;
    return std::string(1, c);
}

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isalnum(ch) || ch == '_'; });
}

std::string record_line(std::string_view kind, json payload) {
    return json{{"kind", kind}, {"record", std::move(payload)}}.dump();
}

// error from opening/parsing a member file, tagged with the offending URI
[[noreturn]] void rethrow_for(const std::string& uri, const error& e) {
    throw error(e.code(), filename_of(uri) + ": " + e.what(), uri);
}

void write_all(int fd, const std::string& data, const std::string& path) {
    std::size_t done = 0;
    while (done < data.size()) {
        ssize_t n = ::write(fd, data.data() + done, data.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw error(errc::io_failure, "write failed on " + path);
        }
        done += static_cast<std::size_t>(n);
    }
}

void write_file_atomically(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw error(errc::io_failure, "cannot create " + tmp);
    try {
        write_all(fd, content, tmp);
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::fsync(fd);
    ::close(fd);
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw error(errc::io_failure, "cannot rename " + tmp);
}

// Complete lines after the header; bytes after the final newline are a torn write.
std::vector<std::string> read_record_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    auto last_newline = text.rfind('\n');
    if (last_newline == std::string::npos) return {};
    text.resize(last_newline + 1);
    std::vector<std::string> lines;
    std::istringstream ls(text);
    std::string line;
    bool first = true;
    while (std::getline(ls, line)) {
        if (first) {
            if (line != catalog_header) throw error(errc::corrupt_catalog, path + " has an unknown header '" + line + "'");
            first = false;
            continue;
        }
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

bbox dense_bounds(const geo_polygon& rect, crs_id target) {
    // densify so the transformed bounds cover curved edges
    geo_polygon dense = rect;
    dense.exterior.clear();
    const auto& r = rect.exterior;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const point& a = r[i];
        const point& b = r[(i + 1) % r.size()];
        for (int k = 0; k < 16; ++k) {
            double t = k / 16.0;
            dense.exterior.push_back({a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t});
        }
    }
    return transform_polygon(dense, target).bounds();
}

const std::string& require_capture(const std::map<std::string, std::string>& caps, const std::string& name) {
    static const std::string empty;
    auto it = caps.find(name);
    return it == caps.end() ? empty : it->second;
}

}  // namespace

// ---------------------------------------------------------------------------
// filename_pattern

filename_pattern::filename_pattern(const std::string& rule) {
    std::string re;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        char c = rule[i];
        if (c == '{') {
            // the capture ends at the brace balancing this one, e.g. "{ts:\d{8}}"
            std::size_t close = i + 1;
            for (int depth = 1; close < rule.size(); ++close) {
                if (rule[close] == '\\') {
                    ++close;
                } else if (rule[close] == '{') {
                    ++depth;
                } else if (rule[close] == '}' && --depth == 0) {
                    break;
                }
            }
            if (close >= rule.size()) throw error(errc::invalid_pattern, "unbalanced '{' in rule '" + rule + "'");
            std::string body = rule.substr(i + 1, close - i - 1);
            std::string name = body, expr = ".+?";
            if (auto colon = body.find(':'); colon != std::string::npos) {
                name = body.substr(0, colon);
                expr = body.substr(colon + 1);
                if (expr.empty()) throw error(errc::invalid_pattern, "empty expression for capture '" + name + "'");
            }
            if (!is_identifier(name)) throw error(errc::invalid_pattern, "bad capture name '" + name + "' in rule");
            if (std::find(_names.begin(), _names.end(), name) != _names.end()) {
                throw error(errc::invalid_pattern, "capture '" + name + "' appears twice");
            }
            _names.push_back(name);
            re += "(" + expr + ")";
            i = close;
        } else if (c == '}') {
            throw error(errc::invalid_pattern, "unbalanced '}' in rule '" + rule + "'");
        } else if (c == '*') {
            re += ".*?";
        } else {
            re += escape_regex(c);
        }
    }
    if (!has_capture("timestamp")) throw error(errc::invalid_pattern, "rule '" + rule + "' lacks a {timestamp} capture");
    try {
        _re = std::regex(re, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
        throw error(errc::invalid_pattern, "rule '" + rule + "' is not a valid expression", e.what());
    }
    // user-supplied sub-expressions must not contain their own groups
    if (_re.mark_count() != _names.size()) {
        throw error(errc::invalid_pattern, "capture expressions in '" + rule + "' must not contain groups");
    }
}

std::optional<std::map<std::string, std::string>> filename_pattern::match(const std::string& filename) const {
    std::smatch m;
    if (!std::regex_match(filename, m, _re)) return std::nullopt;
    std::map<std::string, std::string> caps;
    for (std::size_t i = 0; i < _names.size(); ++i) caps[_names[i]] = m[i + 1].str();
    return caps;
}

bool filename_pattern::has_capture(const std::string& name) const {
    return std::find(_names.begin(), _names.end(), name) != _names.end();
}

// ---------------------------------------------------------------------------
// product definitions

const band_def* product_definition::find_band(std::string_view band_name) const {
    for (const auto& b : bands) {
        if (b.name == band_name) return &b;
    }
    return nullptr;
}

void product_definition::validate() const {
    if (name.empty()) throw error(errc::invalid_argument, "product name is empty");
    if (bands.empty()) throw error(errc::invalid_argument, "product '" + name + "' has no bands");
    std::set<std::string> seen;
    for (const auto& b : bands) {
        if (!seen.insert(b.name).second) throw error(errc::invalid_argument, "duplicate band name '" + b.name + "'");
        if (!(b.scale > 0)) throw error(errc::invalid_argument, "band '" + b.name + "' scale must be positive");
        if (b.band_index_in_file < 0) throw error(errc::invalid_argument, "band '" + b.name + "' has a negative index");
    }
    if (!(resolution_x > 0) || !(resolution_y > 0)) {
        throw error(errc::invalid_argument, "product '" + name + "' resolution must be positive");
    }
    crs_id::checked(crs.epsg);
    filename_pattern pattern(filename_rule);
    if (timestamp_format.empty()) throw error(errc::invalid_argument, "product '" + name + "' has no timestamp format");
    for (const auto& [role, band] : roles) {
        if (!find_band(band)) {
            throw error(errc::invalid_argument, "role '" + role + "' refers to unknown band '" + band + "'");
        }
    }
}

product_definition infer_product_definition(std::span<const sample_file> samples, const std::string& name,
                                            const std::string& filename_rule, const std::string& timestamp_format) {
    filename_pattern pattern(filename_rule);
    if (samples.empty()) throw error(errc::invalid_argument, "product inference needs at least one sample");
    const bool band_capture = pattern.has_capture("band");

    product_definition def;
    def.name = name;
    def.filename_rule = filename_rule;
    def.timestamp_format = timestamp_format;

    bool first = true;
    for (const auto& sample : samples) {
        auto caps = pattern.match(filename_of(sample.filename));
        if (!caps) {
            throw error(errc::pattern_mismatch, "sample '" + sample.filename + "' does not match '" + filename_rule + "'",
                        sample.filename);
        }
        try {
            parse_timestamp(require_capture(*caps, "timestamp"), timestamp_format);
        } catch (const error& e) {
            throw error(errc::pattern_mismatch, "sample '" + sample.filename + "': " + e.what(), sample.filename);
        }
        raster_metadata meta = parse_metadata(sample.bytes);
        if (first) {
            def.crs = crs_id::checked(meta.crs_epsg);
            def.resolution_x = std::abs(meta.transform.c[1]);
            def.resolution_y = std::abs(meta.transform.c[5]);
        }
        if (band_capture) {
            const std::string& band = require_capture(*caps, "band");
            if (!def.find_band(band)) def.bands.push_back({band, meta.type, meta.nodata, 1.0, 0});
        } else if (first) {
            for (int b = 0; b < meta.band_count; ++b) {
                def.bands.push_back({"band_" + std::to_string(b), meta.type, meta.nodata, 1.0, b});
            }
        }
        first = false;
    }
    std::sort(def.bands.begin(), def.bands.end(), [](const band_def& a, const band_def& b) { return a.name < b.name; });
    // Sentinel-2 names get index roles filled in
    for (auto [role, band] : {std::pair{"nir", "B08"}, {"red", "B04"}, {"blue", "B02"}}) {
        if (def.find_band(band)) def.roles[role] = band;
    }
    def.validate();
    return def;
}

geo_polygon footprint_of(const geo_transform& gt, int width, int height, crs_id crs) {
    geo_polygon p;
    p.crs = crs;
    for (auto [c, r] : {std::pair{0, 0}, {width, 0}, {width, height}, {0, height}}) {
        p.exterior.push_back(pixel_to_world(gt, c, r));
    }
    return p;
}

std::string scene_id(const std::string& product, const std::string& scene, instant timestamp) {
    return content_hash(product + '\n' + scene + '\n' + format_iso(timestamp));
}

// ---------------------------------------------------------------------------
// GeoJSON

std::vector<geo_polygon> parse_geojson_polygons(std::string_view geojson, std::optional<crs_id> crs_override) {
    json doc;
    try {
        doc = json::parse(geojson);
    } catch (const json::parse_error& e) {
        throw error(errc::malformed_geojson, "input is not valid JSON", e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
        !doc["features"].is_array()) {
        throw error(errc::malformed_geojson, "input is not a GeoJSON FeatureCollection");
    }
    crs_id crs = crs_override.value_or(crs_id::wgs84());
    if (!crs.is_supported()) throw error(errc::unsupported_crs, "unsupported CRS EPSG:" + std::to_string(crs.epsg));

    std::vector<geo_polygon> out;
    std::set<std::string> ids;
    const auto& features = doc["features"];
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto& f = features[i];
        auto bad = [&](const std::string& why) {
            return error(errc::malformed_geojson, "feature " + std::to_string(i) + ": " + why, std::to_string(i));
        };
        if (!f.is_object() || f.value("type", "") != "Feature") throw bad("not a Feature object");
        if (!f.contains("geometry") || !f["geometry"].is_object()) throw bad("missing geometry");
        const auto& geom = f["geometry"];
        std::string type = geom.value("type", "");
        if (type != "Polygon" && type != "MultiPolygon") throw bad("unsupported geometry type '" + type + "'");
        if (!geom.contains("coordinates") || !geom["coordinates"].is_array()) throw bad("missing coordinates");

        std::string id;
        if (f.contains("id") && f["id"].is_string()) {
            id = f["id"].get<std::string>();
        } else if (f.contains("id") && f["id"].is_number()) {
            id = f["id"].dump();
        } else {
            id = "poly_" + std::to_string(i);
        }
        std::map<std::string, std::string> attributes;
        if (f.contains("properties") && f["properties"].is_object()) {
            for (const auto& [k, v] : f["properties"].items()) attributes[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }

        auto parse_ring = [&](const json& r) {
            if (!r.is_array()) throw bad("ring is not an array");
            ring out_ring;
            for (const auto& pos : r) {
                if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
                    throw bad("invalid position");
                }
                out_ring.push_back({pos[0].get<double>(), pos[1].get<double>()});
            }
            if (out_ring.size() > 1 && out_ring.front() == out_ring.back()) out_ring.pop_back();
            return out_ring;
        };
        auto parse_polygon = [&](const json& rings, const std::string& poly_id) {
            if (!rings.is_array() || rings.empty()) throw bad("polygon without rings");
            geo_polygon p;
            p.id = poly_id;
            p.crs = crs;
            p.attributes = attributes;
            p.exterior = parse_ring(rings[0]);
            for (std::size_t k = 1; k < rings.size(); ++k) p.holes.push_back(parse_ring(rings[k]));
            try {
                p.validate();
            } catch (const error& e) {
                throw bad(e.what());
            }
            if (!ids.insert(p.id).second) throw bad("duplicate id '" + p.id + "'");
            out.push_back(std::move(p));
        };

        if (type == "Polygon") {
            parse_polygon(geom["coordinates"], id);
        } else {
            const auto& parts = geom["coordinates"];
            for (std::size_t k = 0; k < parts.size(); ++k) parse_polygon(parts[k], id + "_" + std::to_string(k));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// storage

file_storage::file_storage(std::string directory) : _dir(std::move(directory)) {
    std::error_code ec;
    std::filesystem::create_directories(_dir, ec);
    if (ec) throw error(errc::io_failure, "cannot create catalog directory " + _dir, ec.message());
}

std::string file_storage::log_path() const { return _dir + "/catalog.log"; }
std::string file_storage::snapshot_path() const { return _dir + "/catalog.snapshot"; }

std::vector<std::string> file_storage::load() {
    auto records = read_record_file(snapshot_path());
    auto log = read_record_file(log_path());
    records.insert(records.end(), log.begin(), log.end());
    return records;
}

void file_storage::append(std::span<const std::string> records) {
    if (records.empty()) return;
    std::string path = log_path();
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) throw error(errc::io_failure, "cannot open " + path);
    std::string data;
    off_t size = ::lseek(fd, 0, SEEK_END);
    if (size == 0) data = std::string(catalog_header) + "\n";
    for (const auto& r : records) {
        data += r;
        data += '\n';
    }
    try {
        write_all(fd, data, path);
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::fsync(fd);
    ::close(fd);
}

void file_storage::compact(std::span<const std::string> records) {
    std::string content = std::string(catalog_header) + "\n";
    for (const auto& r : records) {
        content += r;
        content += '\n';
    }
    write_file_atomically(snapshot_path(), content);
    write_file_atomically(log_path(), std::string(catalog_header) + "\n");
}

// ---------------------------------------------------------------------------
// catalog

catalog::catalog(std::unique_ptr<catalog_storage> storage, std::size_t compact_every)
    : _storage(std::move(storage)), _compact_every(compact_every) {
    for (const auto& line : _storage->load()) apply(line);
}

std::unique_ptr<catalog> catalog::open_directory(const std::string& directory) {
    return std::make_unique<catalog>(std::make_unique<file_storage>(directory));
}

void catalog::apply(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
        const std::string kind = j.at("kind").get<std::string>();
        const json& r = j.at("record");
        if (kind == "product") {
            auto d = r.get<product_definition>();
            _state.products[d.name] = std::move(d);
        } else if (kind == "dataset") {
            auto d = r.get<dataset_record>();
            _state.datasets[d.id] = std::move(d);
        } else if (kind == "polygon") {
            auto p = r.get<geo_polygon>();
            _state.polygons[p.id] = std::move(p);
        } else if (kind == "annotation") {
            auto a = r.get<annotation_record>();
            bool known = std::any_of(_state.annotations.begin(), _state.annotations.end(),
                                     [&](const annotation_record& x) { return x.id == a.id; });
            if (!known) _state.annotations.push_back(std::move(a));
        } else {
            throw error(errc::corrupt_catalog, "unknown record kind '" + kind + "'");
        }
    } catch (const error&) {
        throw;
    } catch (const std::exception& e) {
        throw error(errc::corrupt_catalog, "unreadable catalog record", e.what());
    }
}

void catalog::persist(std::span<const std::string> records) {
    _storage->append(records);
    _appended += records.size();
}

// called with the write mutex held, after the state has absorbed the records
void catalog::compact_if_due() {
    if (_compact_every > 0 && _appended >= _compact_every) compact_locked();
}

void catalog::compact() {
    std::lock_guard writer(_write_mutex);
    compact_locked();
}

void catalog::compact_locked() {
    std::vector<std::string> records;
    {
        std::shared_lock lock(_state_mutex);
        for (const auto& [_, d] : _state.products) records.push_back(record_line("product", d));
        for (const auto& [_, d] : _state.datasets) records.push_back(record_line("dataset", d));
        for (const auto& [_, p] : _state.polygons) records.push_back(record_line("polygon", p));
        for (const auto& a : _state.annotations) records.push_back(record_line("annotation", a));
    }
    _storage->compact(records);
    _appended = 0;
}

catalog_state catalog::state() const {
    std::shared_lock lock(_state_mutex);
    return _state;
}

void catalog::register_product(const product_definition& def) {
    def.validate();
    std::lock_guard writer(_write_mutex);
    {
        std::shared_lock lock(_state_mutex);
        if (auto it = _state.products.find(def.name); it != _state.products.end()) {
            if (it->second == def) return;
            throw error(errc::conflicting_definition, "product '" + def.name + "' is already registered differently");
        }
    }
    std::string line = record_line("product", def);
    persist(std::span(&line, 1));
    {
        std::unique_lock lock(_state_mutex);
        _state.products[def.name] = def;
    }
    compact_if_due();
}

std::vector<product_definition> catalog::products() const {
    std::shared_lock lock(_state_mutex);
    std::vector<product_definition> out;
    for (const auto& [_, d] : _state.products) out.push_back(d);
    return out;
}

product_definition catalog::product(const std::string& name) const {
    std::shared_lock lock(_state_mutex);
    auto it = _state.products.find(name);
    if (it == _state.products.end()) throw error(errc::unknown_product, "unknown product '" + name + "'", name);
    return it->second;
}

std::vector<dataset_record> catalog::ingest_scene(const std::string& product_name, const std::vector<std::string>& uris) {
    auto def = product(product_name);
    std::lock_guard writer(_write_mutex);
    return ingest_locked(def, uris, nullptr);
}

std::vector<dataset_record> catalog::ingest_locked(const product_definition& def, const std::vector<std::string>& uris,
                                                   std::vector<scan_failure>* failures) {
    filename_pattern pattern(def.filename_rule);
    const bool band_capture = pattern.has_capture("band");

    struct member {
        std::string uri;
        std::string band;
    };
    std::map<std::pair<std::string, instant>, std::vector<member>> groups;
    for (const auto& uri : uris) {
        try {
            std::string name = filename_of(uri);
            auto caps = pattern.match(name);
            if (!caps) throw error(errc::pattern_mismatch, "'" + name + "' does not match '" + def.filename_rule + "'", uri);
            instant ts;
            try {
                ts = parse_timestamp(require_capture(*caps, "timestamp"), def.timestamp_format);
            } catch (const error& e) {
                throw error(errc::pattern_mismatch, name + ": " + e.what(), uri);
            }
            std::string band;
            if (band_capture) {
                band = require_capture(*caps, "band");
                if (!def.find_band(band)) {
                    throw error(errc::pattern_mismatch, name + ": band '" + band + "' is not part of product '" + def.name + "'", uri);
                }
            }
            groups[{require_capture(*caps, "scene"), ts}].push_back({uri, band});
        } catch (const error& e) {
            if (!failures) throw;
            failures->push_back({uri, std::string(errc_name(e.code())), e.what()});
        }
    }

    std::vector<dataset_record> result;
    std::vector<dataset_record> fresh;
    for (const auto& [key, members] : groups) {
        const auto& [scene, ts] = key;
        try {
            dataset_record rec;
            rec.id = scene_id(def.name, scene, ts);
            rec.product = def.name;
            rec.scene = scene;
            rec.timestamp = ts;

            std::optional<dataset_record> existing;
            {
                std::shared_lock lock(_state_mutex);
                if (auto it = _state.datasets.find(rec.id); it != _state.datasets.end()) existing = it->second;
            }
            if (existing && !existing->partial) {
                result.push_back(*existing);
                continue;
            }
            if (existing) rec.files = existing->files;

            bool added = false;
            for (const auto& m : members) {
                if (band_capture) {
                    auto [it, inserted] = rec.files.emplace(m.band, m.uri);
                    if (!inserted && it->second != m.uri) {
                        throw error(errc::inconsistent_scene, "scene has two files for band '" + m.band + "'", m.uri);
                    }
                    added |= inserted;
                } else {
                    if (members.size() != 1) {
                        throw error(errc::inconsistent_scene, "several files for a single-file scene", m.uri);
                    }
                    for (const auto& b : def.bands) added |= rec.files.emplace(b.name, m.uri).second;
                }
            }
            if (existing && !added) {
                result.push_back(*existing);
                continue;
            }

            std::optional<raster_metadata> reference;
            std::set<std::string> opened;
            for (const auto& [band, uri] : rec.files) {
                if (!opened.insert(uri).second) continue;
                raster_metadata meta;
                try {
                    auto src = open_uri(uri);
                    meta = parse_metadata(*src);
                } catch (const error& e) {
                    rethrow_for(uri, e);
                }
                if (meta.crs_epsg != def.crs.epsg) {
                    throw error(errc::inconsistent_scene,
                                filename_of(uri) + ": CRS EPSG:" + std::to_string(meta.crs_epsg) + " differs from product EPSG:" +
                                    std::to_string(def.crs.epsg), uri);
                }
                if (reference && (meta.transform != reference->transform || meta.width != reference->width ||
                                  meta.height != reference->height)) {
                    throw error(errc::inconsistent_scene, filename_of(uri) + ": grid differs from the rest of the scene", uri);
                }
                for (const auto& [b, u] : rec.files) {
                    if (u == uri && def.find_band(b)->band_index_in_file >= meta.band_count) {
                        throw error(errc::inconsistent_scene, filename_of(uri) + ": has no band index for '" + b + "'", uri);
                    }
                }
                if (!reference) reference = meta;
            }
            rec.transform = reference->transform;
            rec.width = reference->width;
            rec.height = reference->height;
            if (existing && (existing->transform != rec.transform || existing->width != rec.width ||
                             existing->height != rec.height)) {
                throw error(errc::inconsistent_scene, "new files disagree with the already indexed part of the scene",
                            members.front().uri);
            }
            rec.footprint = footprint_of(rec.transform, rec.width, rec.height, def.crs);
            rec.footprint.id = rec.id;
            rec.ingested_at = now_utc();
            rec.partial = rec.files.size() < def.bands.size();
            fresh.push_back(rec);
            result.push_back(std::move(rec));
        } catch (const error& e) {
            if (!failures) throw;
            std::string uri = e.detail().empty() || !std::any_of(members.begin(), members.end(),
                                                                 [&](const member& m) { return m.uri == e.detail(); })
                                  ? members.front().uri
                                  : e.detail();
            failures->push_back({uri, std::string(errc_name(e.code())), e.what()});
        }
    }

    if (!fresh.empty()) {
        std::vector<std::string> lines;
        for (const auto& r : fresh) lines.push_back(record_line("dataset", r));
        persist(lines);
        {
            std::unique_lock lock(_state_mutex);
            for (auto& r : fresh) _state.datasets[r.id] = r;
        }
        compact_if_due();
    }
    return result;
}

std::vector<dataset_record> catalog::query_datasets(const dataset_filter& filter) const {
    std::shared_lock lock(_state_mutex);
    if (filter.product && !_state.products.contains(*filter.product)) {
        throw error(errc::unknown_product, "unknown product '" + *filter.product + "'", *filter.product);
    }
    std::map<std::string, bbox> area_by_product;
    auto area_for = [&](const product_definition& def) -> const bbox& {
        auto it = area_by_product.find(def.name);
        if (it != area_by_product.end()) return it->second;
        bbox b = *filter.area;
        if (filter.area_crs && *filter.area_crs != def.crs) {
            geo_polygon rect;
            rect.crs = *filter.area_crs;
            rect.exterior = {{b.min_x, b.min_y}, {b.max_x, b.min_y}, {b.max_x, b.max_y}, {b.min_x, b.max_y}};
            b = dense_bounds(rect, def.crs);
        }
        return area_by_product.emplace(def.name, b).first->second;
    };

    std::vector<dataset_record> out;
    for (const auto& [_, rec] : _state.datasets) {
        if (rec.partial) continue;
        if (filter.product && rec.product != *filter.product) continue;
        if (filter.start && rec.timestamp < *filter.start) continue;
        if (filter.end && !(rec.timestamp < *filter.end)) continue;
        if (filter.area && !area_for(_state.products.at(rec.product)).intersects(rec.footprint.bounds())) continue;
        out.push_back(rec);
    }
    std::sort(out.begin(), out.end(), [](const dataset_record& a, const dataset_record& b) {
        return std::tie(a.timestamp, a.id) < std::tie(b.timestamp, b.id);
    });
    return out;
}

std::vector<dataset_record> catalog::datasets() const {
    std::shared_lock lock(_state_mutex);
    std::vector<dataset_record> out;
    for (const auto& [_, rec] : _state.datasets) out.push_back(rec);
    return out;
}

scan_report catalog::scan_source(const std::string& product_name) {
    auto def = product(product_name);
    if (def.source_root.empty()) {
        throw error(errc::invalid_argument, "product '" + product_name + "' has no source root configured");
    }
    std::lock_guard writer(_write_mutex);
    auto listing = list_source(def.source, def.source_root);

    filename_pattern pattern(def.filename_rule);
    std::vector<std::string> candidates;
    {
        std::shared_lock lock(_state_mutex);
        for (const auto& uri : listing) {
            auto caps = pattern.match(filename_of(uri));
            if (!caps) continue;
            // filename alone identifies the scene, so known scenes cost no I/O
            try {
                instant ts = parse_timestamp(require_capture(*caps, "timestamp"), def.timestamp_format);
                auto it = _state.datasets.find(scene_id(def.name, require_capture(*caps, "scene"), ts));
                if (it != _state.datasets.end()) {
                    if (!it->second.partial) continue;
                    bool known_file = std::any_of(it->second.files.begin(), it->second.files.end(),
                                                  [&](const auto& kv) { return kv.second == uri; });
                    if (known_file) continue;
                }
            } catch (const error&) {
                // reported by ingest below
            }
            candidates.push_back(uri);
        }
    }

    scan_report report;
    report.product = product_name;
    std::set<std::string> before;
    {
        std::shared_lock lock(_state_mutex);
        for (const auto& [id, rec] : _state.datasets) {
            if (!rec.partial) before.insert(id);
        }
    }
    for (auto& rec : ingest_locked(def, candidates, &report.failures)) {
        if (!before.contains(rec.id)) report.ingested.push_back(std::move(rec));
    }
    return report;
}

std::size_t catalog::ingest_polygons(std::string_view geojson, std::optional<crs_id> crs_override) {
    auto polys = parse_geojson_polygons(geojson, crs_override);
    std::vector<std::string> lines;
    lines.reserve(polys.size());
    for (const auto& p : polys) lines.push_back(record_line("polygon", p));
    std::lock_guard writer(_write_mutex);
    persist(lines);
    {
        std::unique_lock lock(_state_mutex);
        for (auto& p : polys) _state.polygons[p.id] = std::move(p);
    }
    compact_if_due();
    return lines.size();
}

std::vector<geo_polygon> catalog::polygons() const {
    std::shared_lock lock(_state_mutex);
    std::vector<geo_polygon> out;
    out.reserve(_state.polygons.size());
    for (const auto& [_, p] : _state.polygons) out.push_back(p);
    return out;
}

std::optional<geo_polygon> catalog::polygon(const std::string& id) const {
    std::shared_lock lock(_state_mutex);
    auto it = _state.polygons.find(id);
    if (it == _state.polygons.end()) return std::nullopt;
    return it->second;
}

annotation_record catalog::add_annotation(const std::string& polygon_id, const std::string& label,
                                          const std::string& author, std::optional<std::string> note) {
    if (label.empty()) throw error(errc::invalid_argument, "annotation label is empty");
    std::lock_guard writer(_write_mutex);
    annotation_record a;
    {
        std::shared_lock lock(_state_mutex);
        if (!_state.polygons.contains(polygon_id)) {
            throw error(errc::unknown_polygon, "unknown polygon '" + polygon_id + "'", polygon_id);
        }
        a.created_at = now_utc();
        a.id = "ann_" + content_hash(polygon_id + '\n' + label + '\n' + author + '\n' + format_iso(a.created_at) + '\n' +
                                     std::to_string(_state.annotations.size()));
    }
    a.polygon_id = polygon_id;
    a.label = label;
    a.author = author;
    a.note = std::move(note);
    std::string line = record_line("annotation", a);
    persist(std::span(&line, 1));
    {
        std::unique_lock lock(_state_mutex);
        _state.annotations.push_back(a);
    }
    compact_if_due();
    return a;
}

std::vector<annotation_record> catalog::annotations(const std::optional<std::string>& polygon_id) const {
    std::shared_lock lock(_state_mutex);
    std::vector<annotation_record> out;
    for (const auto& a : _state.annotations) {
        if (!polygon_id || a.polygon_id == *polygon_id) out.push_back(a);
    }
    return out;
}

}  // namespace minicube
