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

#include "minicube/json_codec.hpp"

#include <cmath>

#include "minicube/error.hpp"

namespace minicube {

using nlohmann::json;

namespace {

json nodata_to_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    if (std::isnan(*v)) return "nan";
    if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
    return *v;
}

std::optional<double> nodata_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s == "nan") return NAN;
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
        return std::stod(s);
    }
    return j.get<double>();
}

json ring_to_json(const ring& r) {
    json a = json::array();
    for (const auto& p : r) a.push_back({p.x, p.y});
    return a;
}

ring ring_from_json(const json& a) {
    ring r;
    for (const auto& p : a) r.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return r;
}

}  // namespace

void to_json(json& j, const geo_transform& gt) { j = gt.c; }
void from_json(const json& j, geo_transform& gt) { gt.c = j.get<std::array<double, 6>>(); }

void to_json(json& j, const geo_polygon& p) {
    json holes = json::array();
    for (const auto& h : p.holes) holes.push_back(ring_to_json(h));
    j = json{{"id", p.id}, {"crs", p.crs.epsg}, {"exterior", ring_to_json(p.exterior)}, {"holes", holes},
             {"attributes", p.attributes}};
}

void from_json(const json& j, geo_polygon& p) {
    p.id = j.at("id").get<std::string>();
    p.crs = crs_id{j.at("crs").get<int>()};
    p.exterior = ring_from_json(j.at("exterior"));
    p.holes.clear();
    for (const auto& h : j.at("holes")) p.holes.push_back(ring_from_json(h));
    p.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
}

void to_json(json& j, const band_def& b) {
    j = json{{"name", b.name},
             {"sample_type", std::string(to_string(b.type))},
             {"nodata", nodata_to_json(b.nodata)},
             {"scale", b.scale},
             {"band_index_in_file", b.band_index_in_file}};
}

void from_json(const json& j, band_def& b) {
    b.name = j.at("name").get<std::string>();
    b.type = sample_type_from_string(j.at("sample_type").get<std::string>());
    b.nodata = j.contains("nodata") ? nodata_from_json(j.at("nodata")) : std::nullopt;
    b.scale = j.value("scale", 1.0);
    b.band_index_in_file = j.value("band_index_in_file", 0);
}

void to_json(json& j, const product_definition& d) {
    j = json{{"name", d.name},
             {"bands", d.bands},
             {"crs", d.crs.epsg},
             {"resolution", {d.resolution_x, d.resolution_y}},
             {"filename_rule", d.filename_rule},
             {"timestamp_format", d.timestamp_format},
             {"source_kind", std::string(to_string(d.source))},
             {"source_root", d.source_root},
             {"roles", d.roles}};
}

void from_json(const json& j, product_definition& d) {
    d.name = j.at("name").get<std::string>();
    d.bands = j.at("bands").get<std::vector<band_def>>();
    d.crs = crs_id{j.at("crs").get<int>()};
    const auto& res = j.at("resolution");
    d.resolution_x = res.at(0).get<double>();
    d.resolution_y = res.at(1).get<double>();
    d.filename_rule = j.at("filename_rule").get<std::string>();
    d.timestamp_format = j.at("timestamp_format").get<std::string>();
    d.source = source_kind_from_string(j.value("source_kind", std::string("local_dir")));
    d.source_root = j.value("source_root", std::string());
    d.roles = j.value("roles", std::map<std::string, std::string>{});
}

void to_json(json& j, const dataset_record& r) {
    j = json{{"id", r.id},
             {"product", r.product},
             {"scene", r.scene},
             {"timestamp", format_iso(r.timestamp)},
             {"footprint", r.footprint},
             {"geotransform", r.transform},
             {"width", r.width},
             {"height", r.height},
             {"files", r.files},
             {"ingested_at", format_iso(r.ingested_at)},
             {"partial", r.partial}};
}

void from_json(const json& j, dataset_record& r) {
    r.id = j.at("id").get<std::string>();
    r.product = j.at("product").get<std::string>();
    r.scene = j.at("scene").get<std::string>();
    r.timestamp = parse_iso(j.at("timestamp").get<std::string>());
    r.footprint = j.at("footprint").get<geo_polygon>();
    r.transform = j.at("geotransform").get<geo_transform>();
    r.width = j.at("width").get<int>();
    r.height = j.at("height").get<int>();
    r.files = j.at("files").get<std::map<std::string, std::string>>();
    r.ingested_at = parse_iso(j.at("ingested_at").get<std::string>());
    r.partial = j.value("partial", false);
}

void to_json(json& j, const annotation_record& a) {
    j = json{{"id", a.id},
             {"polygon_id", a.polygon_id},
             {"label", a.label},
             {"author", a.author},
             {"created_at", format_iso(a.created_at)}};
    j["note"] = a.note ? json(*a.note) : json(nullptr);
}

void from_json(const json& j, annotation_record& a) {
    a.id = j.at("id").get<std::string>();
    a.polygon_id = j.at("polygon_id").get<std::string>();
    a.label = j.at("label").get<std::string>();
    a.author = j.at("author").get<std::string>();
    a.created_at = parse_iso(j.at("created_at").get<std::string>());
    if (j.contains("note") && !j.at("note").is_null()) {
        a.note = j.at("note").get<std::string>();
    } else {
        a.note.reset();
    }
}

json to_geojson_geometry(const geo_polygon& p) {
    auto closed = [](const ring& r) {
        json a = ring_to_json(r);
        if (!r.empty()) a.push_back({r.front().x, r.front().y});
        return a;
    };
    json rings = json::array();
    rings.push_back(closed(p.exterior));
    for (const auto& h : p.holes) rings.push_back(closed(h));
    return json{{"type", "Polygon"}, {"coordinates", rings}};
}

json to_geojson_feature(const geo_polygon& p) {
    json props = p.attributes;
    if (props.is_null()) props = json::object();
    return json{{"type", "Feature"},
                {"id", p.id},
                {"properties", props},
                {"geometry", to_geojson_geometry(p)},
                {"crs_epsg", p.crs.epsg}};
}

}  // namespace minicube
