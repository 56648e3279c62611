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

#include "minicube/error.hpp"

namespace minicube {

std::string_view errc_name(errc code) noexcept {
    switch (code) {
        case errc::unsupported_format: return "unsupported_format";
        case errc::missing_tag: return "missing_tag";
        case errc::malformed_geokeys: return "malformed_geokeys";
        case errc::out_of_bounds: return "out_of_bounds";
        case errc::decode_error: return "decode_error";
        case errc::singular_transform: return "singular_transform";
        case errc::out_of_domain: return "out_of_domain";
        case errc::unsupported_crs: return "unsupported_crs";
        case errc::invalid_pattern: return "invalid_pattern";
        case errc::conflicting_definition: return "conflicting_definition";
        case errc::pattern_mismatch: return "pattern_mismatch";
        case errc::inconsistent_scene: return "inconsistent_scene";
        case errc::unknown_product: return "unknown_product";
        case errc::source_unavailable: return "source_unavailable";
        case errc::malformed_geojson: return "malformed_geojson";
        case errc::corrupt_catalog: return "corrupt_catalog";
        case errc::unknown_polygon: return "unknown_polygon";
        case errc::unknown_measure: return "unknown_measure";
        case errc::missing_band_role: return "missing_band_role";
        case errc::shape_mismatch: return "shape_mismatch";
        case errc::invalid_query: return "invalid_query";
        case errc::io_failure: return "io_failure";
        case errc::fingerprint_mismatch: return "fingerprint_mismatch";
        case errc::corrupt_manifest: return "corrupt_manifest";
        case errc::lock_held: return "lock_held";
        case errc::invalid_argument: return "invalid_argument";
        case errc::not_found: return "not_found";
        case errc::internal: return "internal";
    }
    return "internal";
}

bool is_user_error(errc code) noexcept {
    switch (code) {
        case errc::internal:
        case errc::io_failure:
        case errc::corrupt_catalog:
            return false;
        default:
            return true;
    }
}

}  // namespace minicube
