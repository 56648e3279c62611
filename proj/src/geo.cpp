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

#include "minicube/geo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include "minicube/error.hpp"

namespace minicube {

namespace {

constexpr double wgs84_a = 6378137.0;
constexpr double wgs84_f = 1.0 / 298.257223563;
constexpr double utm_k0 = 0.9996;
constexpr double utm_false_easting = 500000.0;
constexpr double utm_false_northing_south = 10000000.0;
constexpr double deg = std::numbers::pi / 180.0;

// Krueger series coefficients to sixth order in the third flattening n.
struct tm_series {
    double e;       // first eccentricity
    double e2m;     // 1 - e^2
    double a1;      // rectifying radius
    std::array<double, 6> alpha;
    std::array<double, 6> beta;

    tm_series() {
        const double f = wgs84_f;
        const double n = f / (2 - f);
        const double n2 = n * n, n3 = n2 * n, n4 = n3 * n, n5 = n4 * n, n6 = n5 * n;
        const double e2 = f * (2 - f);
        e = std::sqrt(e2);
        e2m = 1 - e2;
        a1 = wgs84_a / (1 + n) * (1 + n2 / 4 + n4 / 64 + n6 / 256);
        alpha = {
            n / 2 - 2 * n2 / 3 + 5 * n3 / 16 + 41 * n4 / 180 - 127 * n5 / 288 + 7891 * n6 / 37800,
            13 * n2 / 48 - 3 * n3 / 5 + 557 * n4 / 1440 + 281 * n5 / 630 - 1983433 * n6 / 1935360,
            61 * n3 / 240 - 103 * n4 / 140 + 15061 * n5 / 26880 + 167603 * n6 / 181440,
            49561 * n4 / 161280 - 179 * n5 / 168 + 6601661 * n6 / 7257600,
            34729 * n5 / 80640 - 3418889 * n6 / 1995840,
            212378941 * n6 / 319334400,
        };
        beta = {
            n / 2 - 2 * n2 / 3 + 37 * n3 / 96 - n4 / 360 - 81 * n5 / 512 + 96199 * n6 / 604800,
            n2 / 48 + n3 / 15 - 437 * n4 / 1440 + 46 * n5 / 105 - 1118711 * n6 / 3870720,
            17 * n3 / 480 - 37 * n4 / 840 - 209 * n5 / 4480 + 5569 * n6 / 90720,
            4397 * n4 / 161280 - 11 * n5 / 504 - 830251 * n6 / 7257600,
            4583 * n5 / 161280 - 108847 * n6 / 3991680,
            20648693 * n6 / 638668800,
        };
    }

    // tan of the conformal latitude from tan of the geodetic latitude
    double taup(double tau) const {
        double sigma = std::sinh(e * std::atanh(e * tau / std::hypot(1.0, tau)));
        return tau * std::hypot(1.0, sigma) - sigma * std::hypot(1.0, tau);
    }

    double tau_from_taup(double target) const {
        double tau = target / e2m;
        for (int i = 0; i < 10; ++i) {
            double tp = taup(tau);
            double dtau = (target - tp) * (1 + e2m * tau * tau) / (e2m * std::hypot(1.0, tp) * std::hypot(1.0, tau));
            tau += dtau;
            if (std::abs(dtau) <= 1e-15 * std::max(1.0, std::abs(tau))) break;
        }
        return tau;
    }
};

const tm_series& series() {
    static const tm_series s;
    return s;
}

double central_meridian(int zone) { return -183.0 + 6.0 * zone; }

void check_zone(int zone) {
    if (zone < 1 || zone > 60) throw error(errc::out_of_domain, "UTM zone " + std::to_string(zone) + " outside 1..60");
}

// even-odd crossing test with the nudged ordinate already applied
bool crosses_odd(const geo_polygon& p, double tx, double ty) {
    bool inside = false;
    auto scan = [&](const ring& r) {
        std::size_t n = r.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const point& a = r[i];
            const point& b = r[j];
            if ((a.y > ty) != (b.y > ty)) {
                double xi = a.x + (ty - a.y) * (b.x - a.x) / (b.y - a.y);
                if (tx < xi) inside = !inside;
            }
        }
    };
    scan(p.exterior);
    for (const auto& h : p.holes) scan(h);
    return inside;
}

void add_crossings(const ring& r, double ty, std::vector<double>& xs) {
    std::size_t n = r.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const point& a = r[i];
        const point& b = r[j];
        if ((a.y > ty) != (b.y > ty)) xs.push_back(a.x + (ty - a.y) * (b.x - a.x) / (b.y - a.y));
    }
}

pixel_region trim(const std::vector<bool>& mask, int col0, int row0, int w, int min_c, int max_c, int min_r, int max_r) {
    pixel_region region;
    region.col = col0 + min_c;
    region.row = row0 + min_r;
    region.width = max_c - min_c + 1;
    region.height = max_r - min_r + 1;
    region.mask.assign(static_cast<std::size_t>(region.width) * region.height, false);
    for (int r = min_r; r <= max_r; ++r) {
        for (int c = min_c; c <= max_c; ++c) {
            if (mask[static_cast<std::size_t>(r) * w + c]) {
                region.mask[static_cast<std::size_t>(r - min_r) * region.width + (c - min_c)] = true;
            }
        }
    }
    return region;
}

}  // namespace

crs_id crs_id::checked(int epsg) {
    crs_id c{epsg};
    if (!c.is_supported()) throw error(errc::unsupported_crs, "unsupported CRS EPSG:" + std::to_string(epsg));
    return c;
}

bool crs_id::is_supported() const { return is_geographic() || is_utm(); }

bbox geo_polygon::bounds() const {
    bbox b{INFINITY, INFINITY, -INFINITY, -INFINITY};
    for (const auto& pt : exterior) {
        b.min_x = std::min(b.min_x, pt.x);
        b.min_y = std::min(b.min_y, pt.y);
        b.max_x = std::max(b.max_x, pt.x);
        b.max_y = std::max(b.max_y, pt.y);
    }
    return b;
}

void geo_polygon::validate() const {
    auto distinct = [](const ring& r) {
        std::set<std::pair<double, double>> seen;
        for (const auto& pt : r) seen.emplace(pt.x, pt.y);
        return seen.size();
    };
    if (distinct(exterior) < 3) {
        throw error(errc::invalid_argument, "polygon '" + id + "' exterior needs at least 3 distinct vertices");
    }
    bbox outer = bounds();
    for (const auto& h : holes) {
        if (distinct(h) < 3) throw error(errc::invalid_argument, "polygon '" + id + "' has a degenerate hole");
        for (const auto& pt : h) {
            if (pt.x < outer.min_x || pt.x > outer.max_x || pt.y < outer.min_y || pt.y > outer.max_y) {
                throw error(errc::invalid_argument, "polygon '" + id + "' has a hole outside its exterior bounds");
            }
        }
    }
}

std::size_t pixel_region::cell_count() const { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true)); }

point world_to_pixel(const geo_transform& gt, double x, double y) {
    const auto& c = gt.c;
    double det = gt.determinant();
    if (det == 0.0 || !std::isfinite(det)) throw error(errc::singular_transform, "geotransform is not invertible");
    double dx = x - c[0];
    double dy = y - c[3];
    return {(c[5] * dx - c[2] * dy) / det, (c[1] * dy - c[4] * dx) / det};
}

point pixel_to_world(const geo_transform& gt, double col, double row) {
    const auto& c = gt.c;
    return {c[0] + col * c[1] + row * c[2], c[3] + col * c[4] + row * c[5]};
}

utm_coord utm_forward(int zone, hemisphere h, double lon, double lat) {
    check_zone(zone);
    if (!(std::abs(lat) <= 84.0)) throw error(errc::out_of_domain, "latitude " + std::to_string(lat) + " beyond 84 degrees");
    if (!(std::abs(lon) <= 180.0)) throw error(errc::out_of_domain, "longitude " + std::to_string(lon) + " outside +-180");
    const auto& s = series();
    double dlon = std::remainder(lon - central_meridian(zone), 360.0);
    double lam = dlon * deg;
    double tau = std::tan(lat * deg);
    double taup = s.taup(tau);
    double xip = std::atan2(taup, std::cos(lam));
    double etap = std::asinh(std::sin(lam) / std::hypot(taup, std::cos(lam)));
    double xi = xip, eta = etap;
    for (int j = 1; j <= 6; ++j) {
        xi += s.alpha[j - 1] * std::sin(2 * j * xip) * std::cosh(2 * j * etap);
        eta += s.alpha[j - 1] * std::cos(2 * j * xip) * std::sinh(2 * j * etap);
    }
    utm_coord out;
    out.easting = utm_false_easting + utm_k0 * s.a1 * eta;
    out.northing = utm_k0 * s.a1 * xi + (h == hemisphere::south ? utm_false_northing_south : 0.0);
    return out;
}

lon_lat utm_inverse(int zone, hemisphere h, double easting, double northing) {
    check_zone(zone);
    if (!(easting >= 100000.0 && easting <= 900000.0)) {
        throw error(errc::out_of_domain, "easting " + std::to_string(easting) + " outside 100000..900000");
    }
    if (!(northing >= 0.0 && northing <= utm_false_northing_south)) {
        throw error(errc::out_of_domain, "northing " + std::to_string(northing) + " outside 0..10000000");
    }
    const auto& s = series();
    double xi = (northing - (h == hemisphere::south ? utm_false_northing_south : 0.0)) / (utm_k0 * s.a1);
    double eta = (easting - utm_false_easting) / (utm_k0 * s.a1);
    double xip = xi, etap = eta;
    for (int j = 1; j <= 6; ++j) {
        xip -= s.beta[j - 1] * std::sin(2 * j * xi) * std::cosh(2 * j * eta);
        etap -= s.beta[j - 1] * std::cos(2 * j * xi) * std::sinh(2 * j * eta);
    }
    double sinh_etap = std::sinh(etap);
    double cos_xip = std::cos(xip);
    double taup = std::sin(xip) / std::hypot(sinh_etap, cos_xip);
    double lam = std::atan2(sinh_etap, cos_xip);
    double tau = s.tau_from_taup(taup);
    return {central_meridian(zone) + lam / deg, std::atan(tau) / deg};
}

int utm_zone_of(double lon) {
    int zone = static_cast<int>(std::floor((lon + 180.0) / 6.0)) + 1;
    return std::clamp(zone, 1, 60);
}

point ring_centroid(const ring& r) {
    double area2 = 0, cx = 0, cy = 0;
    std::size_t n = r.size();
    if (n == 0) return {};
    // shift to the first vertex to limit cancellation
    const point o = r.front();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        double xj = r[j].x - o.x, yj = r[j].y - o.y;
        double xi = r[i].x - o.x, yi = r[i].y - o.y;
        double cross = xj * yi - xi * yj;
        area2 += cross;
        cx += (xj + xi) * cross;
        cy += (yj + yi) * cross;
    }
    if (std::abs(area2) < 1e-300) {
        point m{};
        for (const auto& pt : r) {
            m.x += pt.x;
            m.y += pt.y;
        }
        return {m.x / n, m.y / n};
    }
    return {o.x + cx / (3 * area2), o.y + cy / (3 * area2)};
}

crs_id utm_crs_for(const geo_polygon& p) {
    if (!p.crs.is_geographic()) throw error(errc::unsupported_crs, "zone selection needs a geographic polygon");
    point c = ring_centroid(p.exterior);
    return crs_id::utm(utm_zone_of(c.x), c.y >= 0);
}

geo_polygon transform_polygon(const geo_polygon& p, crs_id target) {
    if (!p.crs.is_supported()) throw error(errc::unsupported_crs, "unsupported source CRS EPSG:" + std::to_string(p.crs.epsg));
    if (!target.is_supported()) throw error(errc::unsupported_crs, "unsupported target CRS EPSG:" + std::to_string(target.epsg));
    if (p.crs == target) return p;
    if (p.crs.is_utm() && target.is_utm()) return transform_polygon(transform_polygon(p, crs_id::wgs84()), target);

    auto convert = [&](const point& pt) -> point {
        if (target.is_utm()) {
            auto u = utm_forward(target.utm_zone(), target.utm_north() ? hemisphere::north : hemisphere::south, pt.x, pt.y);
            return {u.easting, u.northing};
        }
        auto g = utm_inverse(p.crs.utm_zone(), p.crs.utm_north() ? hemisphere::north : hemisphere::south, pt.x, pt.y);
        return {g.lon, g.lat};
    };
    geo_polygon out = p;
    out.crs = target;
    for (auto& pt : out.exterior) pt = convert(pt);
    for (auto& h : out.holes) {
        for (auto& pt : h) pt = convert(pt);
    }
    return out;
}

std::optional<pixel_region> rasterize_polygon(const geo_polygon& p, const geo_transform& gt, int raster_width,
                                              int raster_height) {
    if (p.exterior.size() < 3 || raster_width <= 0 || raster_height <= 0) return std::nullopt;
    const auto& c = gt.c;
    const double eps = 1e-9 * std::hypot(c[2], c[5]);

    // candidate pixel window from the bounds of every ring
    bbox b = p.bounds();
    for (const auto& h : p.holes) {
        for (const auto& v : h) {
            b.min_x = std::min(b.min_x, v.x);
            b.max_x = std::max(b.max_x, v.x);
            b.min_y = std::min(b.min_y, v.y);
            b.max_y = std::max(b.max_y, v.y);
        }
    }
    double min_col = INFINITY, max_col = -INFINITY, min_row = INFINITY, max_row = -INFINITY;
    for (auto [x, y] : {std::pair{b.min_x, b.min_y}, {b.min_x, b.max_y}, {b.max_x, b.min_y}, {b.max_x, b.max_y}}) {
        point px = world_to_pixel(gt, x, y);
        min_col = std::min(min_col, px.x);
        max_col = std::max(max_col, px.x);
        min_row = std::min(min_row, px.y);
        max_row = std::max(max_row, px.y);
    }
    auto clamp_index = [](double v, int hi) {
        if (!(v > -1e9)) return -1;
        if (!(v < 1e9)) return hi;
        return std::clamp(static_cast<int>(std::floor(v)), -1, hi);
    };
    int col0 = std::max(clamp_index(min_col, raster_width) - 1, 0);
    int col1 = std::min(clamp_index(max_col, raster_width) + 1, raster_width - 1);
    int row0 = std::max(clamp_index(min_row, raster_height) - 1, 0);
    int row1 = std::min(clamp_index(max_row, raster_height) + 1, raster_height - 1);
    if (col0 > col1 || row0 > row1) return std::nullopt;

    const int w = col1 - col0 + 1;
    const int h = row1 - row0 + 1;
    std::vector<bool> mask(static_cast<std::size_t>(w) * h, false);
    int min_c = w, max_c = -1, min_r = h, max_r = -1;
    auto mark = [&](int cc, int rr) {
        mask[static_cast<std::size_t>(rr) * w + cc] = true;
        min_c = std::min(min_c, cc);
        max_c = std::max(max_c, cc);
        min_r = std::min(min_r, rr);
        max_r = std::max(max_r, rr);
    };

    if (c[2] == 0.0 && c[4] == 0.0) {
        // north-up: one sorted crossing list per row
        std::vector<double> xs;
        for (int rr = 0; rr < h; ++rr) {
            double row_centre = (row0 + rr) + 0.5;
            double ty = pixel_to_world(gt, 0.5, row_centre).y + eps;
            xs.clear();
            add_crossings(p.exterior, ty, xs);
            for (const auto& hole : p.holes) add_crossings(hole, ty, xs);
            if (xs.empty()) continue;
            std::sort(xs.begin(), xs.end());
            for (int cc = 0; cc < w; ++cc) {
                double tx = pixel_to_world(gt, (col0 + cc) + 0.5, row_centre).x;
                auto greater = xs.end() - std::upper_bound(xs.begin(), xs.end(), tx);
                if (greater % 2 == 1) mark(cc, rr);
            }
        }
    } else {
        for (int rr = 0; rr < h; ++rr) {
            for (int cc = 0; cc < w; ++cc) {
                point centre = pixel_to_world(gt, (col0 + cc) + 0.5, (row0 + rr) + 0.5);
                if (crosses_odd(p, centre.x, centre.y + eps)) mark(cc, rr);
            }
        }
    }
    if (max_c < 0) return std::nullopt;
    return trim(mask, col0, row0, w, min_c, max_c, min_r, max_r);
}

}  // namespace minicube
