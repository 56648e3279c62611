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

#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <random>

#include "minicube/error.hpp"
#include "minicube/geo.hpp"
#include "support/test_util.hpp"

using namespace minicube;
using namespace minicube::testing;

namespace {

errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const error& e) {
        return e.code();
    }
    return errc::internal;
}

geo_polygon square(double x0, double y0, double x1, double y1, crs_id crs = crs_id::utm(30, true)) {
    geo_polygon p;
    p.id = "sq";
    p.crs = crs;
    p.exterior = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    return p;
}

std::vector<bool> expand(const pixel_region& reg, int width, int height) {
    std::vector<bool> full(static_cast<std::size_t>(width) * height, false);
    for (int r = 0; r < reg.height; ++r) {
        for (int c = 0; c < reg.width; ++c) {
            if (reg.at(c, r)) full[static_cast<std::size_t>(reg.row + r) * width + reg.col + c] = true;
        }
    }
    return full;
}

}  // namespace

TEST(Utm, ForwardMatchesReferenceFixtures) {
    auto pts = nlohmann::json::parse(slurp(fixture_path("utm_points.json")));
    ASSERT_GT(pts.size(), 400u);
    double worst = 0;
    for (const auto& p : pts) {
        auto h = p["north"].get<bool>() ? hemisphere::north : hemisphere::south;
        auto u = utm_forward(p["zone"].get<int>(), h, p["lon"].get<double>(), p["lat"].get<double>());
        worst = std::max({worst, std::abs(u.easting - p["easting"].get<double>()),
                          std::abs(u.northing - p["northing"].get<double>())});
    }
    EXPECT_LT(worst, 1e-3);
}

TEST(Utm, KnownPointAndCentralMeridian) {
    auto u = utm_forward(30, hemisphere::north, -2.95, 43.26);
    EXPECT_NEAR(u.easting, 504058.19178511127, 1e-3);
    EXPECT_NEAR(u.northing, 4789689.225766113, 1e-3);
    for (int zone : {1, 30, 60}) {
        for (double lat : {-80.0, -10.0, 0.0, 33.3, 84.0}) {
            auto h = lat < 0 ? hemisphere::south : hemisphere::north;
            EXPECT_NEAR(utm_forward(zone, h, -183.0 + 6.0 * zone, lat).easting, 500000.0, 1e-6);
        }
    }
    EXPECT_NEAR(utm_forward(31, hemisphere::north, 3.0, 0.0).northing, 0.0, 1e-6);
    EXPECT_NEAR(utm_forward(31, hemisphere::south, 3.0, 0.0).northing, 10000000.0, 1e-6);
}

TEST(Utm, RoundTripBelowNanoDegree) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> zd(1, 60);
    std::uniform_real_distribution<double> off(-3, 3), lat_d(-80, 84);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        int zone = zd(rng);
        double lon = -183.0 + 6.0 * zone + off(rng);
        double lat = lat_d(rng);
        auto h = lat < 0 ? hemisphere::south : hemisphere::north;
        auto u = utm_forward(zone, h, lon, lat);
        auto back = utm_inverse(zone, h, u.easting, u.northing);
        double dlon = std::remainder(back.lon - lon, 360.0);
        worst = std::max({worst, std::abs(dlon), std::abs(back.lat - lat)});
    }
    EXPECT_LT(worst, 1e-9);
}

TEST(Utm, DomainErrors) {
    EXPECT_EQ(code_of([] { utm_forward(30, hemisphere::north, 0, 84.5); }), errc::out_of_domain);
    EXPECT_EQ(code_of([] { utm_forward(30, hemisphere::north, 0, -90); }), errc::out_of_domain);
    EXPECT_EQ(code_of([] { utm_forward(0, hemisphere::north, 0, 10); }), errc::out_of_domain);
    EXPECT_EQ(code_of([] { utm_forward(61, hemisphere::north, 0, 10); }), errc::out_of_domain);
    EXPECT_EQ(code_of([] { utm_forward(30, hemisphere::north, 181, 10); }), errc::out_of_domain);
    EXPECT_EQ(code_of([] { utm_inverse(30, hemisphere::north, 50000, 10); }), errc::out_of_domain);
    EXPECT_EQ(code_of([] { utm_inverse(30, hemisphere::north, 500000, -1); }), errc::out_of_domain);
    EXPECT_EQ(code_of([] { utm_inverse(30, hemisphere::north, 500000, 1.1e7); }), errc::out_of_domain);
}

TEST(Utm, ZoneOfLongitude) {
    EXPECT_EQ(utm_zone_of(-180.0), 1);
    EXPECT_EQ(utm_zone_of(-174.0001), 1);
    EXPECT_EQ(utm_zone_of(-174.0), 2);
    EXPECT_EQ(utm_zone_of(-2.95), 30);
    EXPECT_EQ(utm_zone_of(0.0), 31);
    EXPECT_EQ(utm_zone_of(179.999), 60);
    EXPECT_EQ(utm_zone_of(180.0), 60);
}

TEST(Crs, SupportedCodes) {
    EXPECT_EQ(crs_id::checked(4326), crs_id::wgs84());
    EXPECT_EQ(crs_id::checked(32630), crs_id::utm(30, true));
    EXPECT_EQ(crs_id::checked(32760), crs_id::utm(60, false));
    for (int bad : {3857, 32600, 32661, 32700, 32761, 0}) {
        EXPECT_EQ(code_of([&] { crs_id::checked(bad); }), errc::unsupported_crs) << bad;
    }
    auto p = square(0, 0, 1, 1, crs_id{3857});
    EXPECT_EQ(code_of([&] { transform_polygon(p, crs_id::wgs84()); }), errc::unsupported_crs);
}

TEST(Transform, AffineInverse) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1000, 1000);
    for (int i = 0; i < 200; ++i) {
        geo_transform gt{{d(rng) * 1000, d(rng), d(rng) * 0.1, d(rng) * 1000, d(rng) * 0.1, d(rng)}};
        if (std::abs(gt.determinant()) < 1e-3) continue;
        double col = d(rng), row = d(rng);
        point w = pixel_to_world(gt, col, row);
        point back = world_to_pixel(gt, w.x, w.y);
        EXPECT_TRUE(close_rel(back.x, col, 1e-9, 1.0)) << back.x << " vs " << col;
        EXPECT_TRUE(close_rel(back.y, row, 1e-9, 1.0)) << back.y << " vs " << row;
    }
    geo_transform singular{{0, 1, 2, 0, 2, 4}};
    EXPECT_EQ(code_of([&] { world_to_pixel(singular, 1, 1); }), errc::singular_transform);
    geo_transform gt{{100, 10, 0, 200, 0, -10}};
    EXPECT_EQ(gt.translated(3, 4), (geo_transform{{130, 10, 0, 160, 0, -10}}));
}

TEST(Transform, PolygonRoundTripAndIdentity) {
    geo_polygon p = square(-3.1, 43.0, -2.9, 43.2, crs_id::wgs84());
    p.attributes["farm"] = "a";
    EXPECT_EQ(transform_polygon(p, crs_id::wgs84()), p);
    auto utm = transform_polygon(p, crs_id::utm(30, true));
    EXPECT_EQ(utm.crs, crs_id::utm(30, true));
    EXPECT_EQ(utm.id, p.id);
    EXPECT_EQ(utm.attributes, p.attributes);
    auto back = transform_polygon(utm, crs_id::wgs84());
    for (std::size_t i = 0; i < p.exterior.size(); ++i) {
        EXPECT_LT(std::abs(back.exterior[i].x - p.exterior[i].x), 1e-8);
        EXPECT_LT(std::abs(back.exterior[i].y - p.exterior[i].y), 1e-8);
    }
    // zone to zone goes through geographic coordinates
    auto z31 = transform_polygon(utm, crs_id::utm(31, true));
    auto direct = transform_polygon(p, crs_id::utm(31, true));
    for (std::size_t i = 0; i < p.exterior.size(); ++i) {
        EXPECT_NEAR(z31.exterior[i].x, direct.exterior[i].x, 1e-6);
        EXPECT_NEAR(z31.exterior[i].y, direct.exterior[i].y, 1e-6);
    }
}

TEST(Transform, CrossZonePolygonUsesCentroidZone) {
    geo_polygon p = square(-1.0, 40.0, 2.0, 41.0, crs_id::wgs84());  // straddles the 30/31 boundary at 0 deg
    auto zone = utm_crs_for(p);
    EXPECT_EQ(zone, crs_id::utm(utm_zone_of(ring_centroid(p.exterior).x), true));
    EXPECT_EQ(zone.utm_zone(), 31);
    std::set<int> vertex_zones;
    for (const auto& v : p.exterior) vertex_zones.insert(utm_zone_of(v.x));
    EXPECT_EQ(vertex_zones.size(), 2u);
    geo_polygon south = square(20.0, -30.0, 21.0, -29.0, crs_id::wgs84());
    EXPECT_EQ(utm_crs_for(south), crs_id::utm(34, false));
}

TEST(Geometry, CentroidAndValidation) {
    auto c = ring_centroid(square(0, 0, 4, 2).exterior);
    EXPECT_DOUBLE_EQ(c.x, 2.0);
    EXPECT_DOUBLE_EQ(c.y, 1.0);
    geo_polygon degenerate;
    degenerate.exterior = {{0, 0}, {1, 1}, {0, 0}};
    EXPECT_EQ(code_of([&] { degenerate.validate(); }), errc::invalid_argument);
    EXPECT_NO_THROW(square(0, 0, 1, 1).validate());
}

TEST(Rasterize, SquareAndHole) {
    geo_transform gt{{0, 1, 0, 0, 0, 1}};
    auto reg = rasterize_polygon(square(0, 0, 2, 2), gt, 4, 4);
    ASSERT_TRUE(reg);
    EXPECT_EQ(reg->col, 0);
    EXPECT_EQ(reg->row, 0);
    EXPECT_EQ(reg->width, 2);
    EXPECT_EQ(reg->height, 2);
    EXPECT_EQ(reg->cell_count(), 4u);

    auto holed = square(0, 0, 2, 2);
    holed.holes.push_back({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    auto hreg = rasterize_polygon(holed, gt, 4, 4);
    ASSERT_TRUE(hreg);
    EXPECT_FALSE(hreg->at(0, 0));
    EXPECT_TRUE(hreg->at(1, 0));
    EXPECT_TRUE(hreg->at(0, 1));
    EXPECT_TRUE(hreg->at(1, 1));
}

TEST(Rasterize, EmptyAndClipped) {
    geo_transform gt{{0, 1, 0, 0, 0, 1}};
    EXPECT_FALSE(rasterize_polygon(square(10, 10, 12, 12), gt, 4, 4));
    EXPECT_FALSE(rasterize_polygon(square(0.6, 0.6, 1.4, 1.4), gt, 4, 4));  // contains no centre
    auto reg = rasterize_polygon(square(-5, -5, 1.7, 100), gt, 4, 4);
    ASSERT_TRUE(reg);
    EXPECT_EQ(reg->col, 0);
    EXPECT_EQ(reg->width, 2);
    EXPECT_EQ(reg->height, 4);
}

TEST(Rasterize, SharedEdgeCentresBelongToExactlyOnePolygon) {
    // edges run exactly through pixel centres, both horizontally and vertically
    for (geo_transform gt : {geo_transform{{0, 1, 0, 0, 0, 1}}, geo_transform{{0, 1, 0, 16, 0, -1}}}) {
        auto left = square(0, 0.5, 8.5, 15.5);
        auto right = square(8.5, 0.5, 16, 15.5);
        auto below = square(0, 7.5, 16, 15.5);
        auto above = square(0, 0.5, 16, 7.5);
        auto l = expand(*rasterize_polygon(left, gt, 16, 16), 16, 16);
        auto r = expand(*rasterize_polygon(right, gt, 16, 16), 16, 16);
        auto b = expand(*rasterize_polygon(below, gt, 16, 16), 16, 16);
        auto a = expand(*rasterize_polygon(above, gt, 16, 16), 16, 16);
        for (int row = 1; row < 15; ++row) {
            for (int col = 0; col < 16; ++col) {
                std::size_t i = static_cast<std::size_t>(row) * 16 + col;
                EXPECT_EQ(int(l[i]) + int(r[i]), 1) << col << "," << row;
                EXPECT_EQ(int(a[i]) + int(b[i]), 1) << col << "," << row;
            }
        }
    }
}

TEST(Rasterize, MatchesBruteForceOracle) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ctr(-10, 74);
    std::vector<geo_transform> grids{geo_transform{{1000, 10, 0, 2000, 0, -10}},
                                     geo_transform{{-3, 0.5, 0, -7, 0, 0.5}},
                                     geo_transform{{100, 8, 3, 400, 2.5, -9}}};  // rotated
    for (const auto& gt : grids) {
        for (int i = 0; i < 50; ++i) {
            point centre = pixel_to_world(gt, ctr(rng), ctr(rng));
            double scale = std::hypot(gt.c[1], gt.c[4]);
            auto p = random_polygon(rng, "p", centre.x, centre.y, 3 * scale, 30 * scale, crs_id::utm(30, true), i % 3 == 0);
            auto brute = brute_mask(p, gt, 64, 64);
            auto reg = rasterize_polygon(p, gt, 64, 64);
            bool any = std::find(brute.begin(), brute.end(), true) != brute.end();
            ASSERT_EQ(reg.has_value(), any);
            if (!reg) continue;
            auto got = expand(*reg, 64, 64);
            std::size_t diff = 0;
            for (std::size_t k = 0; k < got.size(); ++k) diff += got[k] != brute[k];
            EXPECT_EQ(diff, 0u) << "polygon " << i << " grid " << gt.c[2];
            // tight window: every border row/column holds a true cell
            bool top = false, bottom = false, lcol = false, rcol = false;
            for (int c = 0; c < reg->width; ++c) {
                top |= reg->at(c, 0);
                bottom |= reg->at(c, reg->height - 1);
            }
            for (int r = 0; r < reg->height; ++r) {
                lcol |= reg->at(0, r);
                rcol |= reg->at(reg->width - 1, r);
            }
            EXPECT_TRUE(top && bottom && lcol && rcol);
        }
    }
}

TEST(Rasterize, TranslationEquivariance) {
    std::mt19937_64 rng(9);
    geo_transform gt{{500000, 20, 0, 4800000, 0, -20}};
    for (int i = 0; i < 30; ++i) {
        auto p = random_polygon(rng, "p", 500000 + 40 * 20, 4800000 - 40 * 20, 60, 300, crs_id::utm(30, true));
        auto moved = p;
        int k = 1 + i % 5, m = 2 - i % 4;
        for (auto& v : moved.exterior) {
            v.x += k * 20;
            v.y -= m * 20;
        }
        auto a = rasterize_polygon(p, gt, 128, 128);
        auto b = rasterize_polygon(moved, gt, 128, 128);
        ASSERT_TRUE(a && b);
        EXPECT_EQ(b->col, a->col + k);
        EXPECT_EQ(b->row, a->row + m);
        EXPECT_EQ(b->mask, a->mask);
    }
}

TEST(Rasterize, AreaSanity) {
    std::mt19937_64 rng(21);
    geo_transform gt{{0, 2, 0, 0, 0, 2}};
    for (int i = 0; i < 40; ++i) {
        auto p = random_polygon(rng, "p", 64, 64, 10, 50, crs_id::utm(30, true));
        double area = 0, perimeter = 0;
        const auto& r = p.exterior;
        for (std::size_t a = 0, b = r.size() - 1; a < r.size(); b = a++) {
            area += (r[b].x * r[a].y - r[a].x * r[b].y) / 2;
            perimeter += std::hypot(r[a].x - r[b].x, r[a].y - r[b].y);
        }
        area = std::abs(area);
        auto reg = rasterize_polygon(p, gt, 64, 64);
        ASSERT_TRUE(reg);
        double cells = static_cast<double>(reg->cell_count()) * 4.0;
        double slack = perimeter * std::hypot(2.0, 2.0);
        EXPECT_GE(cells, area - slack);
        EXPECT_LE(cells, area + slack);
    }
}

TEST(Rasterize, HoleOutsideExteriorFollowsEvenOdd) {
    geo_transform gt{{0, 1, 0, 0, 0, 1}};
    auto p = square(2, 2, 10, 10);
    p.holes.push_back({{8, 4}, {14, 4}, {14, 8}, {8, 8}});
    auto reg = rasterize_polygon(p, gt, 16, 16);
    ASSERT_TRUE(reg);
    EXPECT_EQ(expand(*reg, 16, 16), brute_mask(p, gt, 16, 16));
}
