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

#ifndef MINICUBE_JSON_CODEC_HPP
#define MINICUBE_JSON_CODEC_HPP

// nlohmann/json conversions for catalog and engine types (found by ADL).

#include <json.hpp>

#include "minicube/catalog.hpp"

namespace minicube {

void to_json(nlohmann::json& j, const geo_transform& gt);
void from_json(const nlohmann::json& j, geo_transform& gt);

void to_json(nlohmann::json& j, const geo_polygon& p);
void from_json(const nlohmann::json& j, geo_polygon& p);

void to_json(nlohmann::json& j, const band_def& b);
void from_json(const nlohmann::json& j, band_def& b);

void to_json(nlohmann::json& j, const product_definition& d);
void from_json(const nlohmann::json& j, product_definition& d);

void to_json(nlohmann::json& j, const dataset_record& r);
void from_json(const nlohmann::json& j, dataset_record& r);

void to_json(nlohmann::json& j, const annotation_record& a);
void from_json(const nlohmann::json& j, annotation_record& a);

/// GeoJSON Feature with Polygon geometry; attributes become properties.
nlohmann::json to_geojson_feature(const geo_polygon& p);
nlohmann::json to_geojson_geometry(const geo_polygon& p);

}  // namespace minicube

#endif
