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

#ifndef MINICUBE_ERROR_HPP
#define MINICUBE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace minicube {

enum class errc {
    // raster_io
    unsupported_format,
    missing_tag,
    malformed_geokeys,
    out_of_bounds,
    decode_error,
    // geo
    singular_transform,
    out_of_domain,
    unsupported_crs,
    // catalog
    invalid_pattern,
    conflicting_definition,
    pattern_mismatch,
    inconsistent_scene,
    unknown_product,
    source_unavailable,
    malformed_geojson,
    corrupt_catalog,
    // engine
    unknown_polygon,
    unknown_measure,
    missing_band_role,
    shape_mismatch,
    invalid_query,
    // export
    io_failure,
    fingerprint_mismatch,
    corrupt_manifest,
    lock_held,
    // service
    invalid_argument,
    not_found,
    internal,
};

/// Stable snake_case identifier, used as the machine-readable code in API errors.
std::string_view errc_name(errc code) noexcept;

/// True for codes caused by bad user input rather than by the program.
bool is_user_error(errc code) noexcept;

class error : public std::runtime_error {
   public:
    error(errc code, std::string message, std::string detail = {})
        : std::runtime_error(std::move(message)), _code(code), _detail(std::move(detail)) {}

    errc code() const noexcept { return _code; }
    const std::string& detail() const noexcept { return _detail; }

   private:
    errc _code;
    std::string _detail;
};

}  // namespace minicube

#endif
