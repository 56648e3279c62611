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

#include <atomic>
#include <filesystem>
#include <random>
#include <thread>

#include "minicube/catalog.hpp"
#include "minicube/error.hpp"
#include "minicube/json_codec.hpp"
#include "support/scene_fixture.hpp"
#include "support/test_util.hpp"
#include "support/tiff_writer.hpp"

using namespace minicube;
using namespace minicube::testing;
namespace fs = std::filesystem;

namespace {

product_definition tiny_product() {
    product_definition d;
    d.name = "tiny";
    d.bands = {band_def{"band_0", sample_type::uint8, std::nullopt, 1.0, 0}};
    d.crs = crs_id::utm(30, true);
    d.resolution_x = d.resolution_y = 10;
    d.filename_rule = "{scene}_{timestamp}.tif";
    d.timestamp_format = "%Y%j";
    return d;
}

std::string write_tiny(const temp_dir& dir, const std::string& scene, int year, int doy, double x0, double y0) {
    tiff_spec s;
    s.width = s.height = 4;
    s.type = sample_type::uint8;
    s.transform = {{x0, 10, 0, y0, 0, -10}};
    char ts[16];
    std::snprintf(ts, sizeof ts, "%04d%03d", year, doy);
    std::string path = dir / (scene + "_" + ts + ".tif");
    write_geotiff(path, s, std::vector<double>(16, 1.0));
    return path;
}

std::vector<std::string> log_records(const std::string& path) {
    std::string text = slurp(path);
    std::vector<std::string> out;
    std::size_t pos = text.find('\n') + 1;
    while (true) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) break;
        out.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return out;
}

}  // namespace

TEST(FilenamePattern, CapturesAndLiterals) {
    filename_pattern p("{scene}_{timestamp}_{band}.tif");
    auto m = p.match("T30TWN_20240105T103021_B04.tif");
    ASSERT_TRUE(m);
    EXPECT_EQ((*m)["scene"], "T30TWN");
    EXPECT_EQ((*m)["timestamp"], "20240105T103021");
    EXPECT_EQ((*m)["band"], "B04");
    EXPECT_FALSE(p.match("T30TWN_20240105T103021_B04xtif"));  // '.' is literal
    EXPECT_FALSE(p.match("T30TWN_20240105T103021_B04.tiff"));

    filename_pattern q("S2*_{timestamp:\\d{8}}_{band:B\\d\\d}.tif");
    auto mq = q.match("S2B_MSIL2A_20240105_B8A.tif");
    EXPECT_FALSE(mq);
    mq = q.match("S2B_MSIL2A_20240105_B08.tif");
    ASSERT_TRUE(mq);
    EXPECT_EQ((*mq)["timestamp"], "20240105");
    EXPECT_TRUE(q.has_capture("band"));
    EXPECT_FALSE(q.has_capture("scene"));
}

TEST(FilenamePattern, RejectsBadRules) {
    for (const char* bad : {"{scene}_{band}.tif", "{timestamp", "timestamp}", "{timestamp}_{timestamp}",
                            "{timestamp:}", "{time stamp}", "{timestamp:(a|b)}", "{timestamp:[}"}) {
        EXPECT_EQ(code_of([&] { filename_pattern p(bad); }), errc::invalid_pattern) << bad;
    }
}

TEST(Timestamps, FormatsAndIso) {
    EXPECT_EQ(format_iso(parse_timestamp("20240105T103021", "%Y%m%dT%H%M%S")), "2024-01-05T10:30:21Z");
    EXPECT_EQ(format_iso(parse_timestamp("2024060", "%Y%j")), "2024-02-29T00:00:00Z");
    EXPECT_EQ(format_iso(parse_timestamp("d%2023-12-31", "d%%%Y-%m-%d")), "2023-12-31T00:00:00Z");
    EXPECT_EQ(code_of([] { parse_timestamp("20240105", "%Y%m%dT"); }), errc::invalid_argument);
    EXPECT_EQ(code_of([] { parse_timestamp("20241305", "%Y%m%d"); }), errc::invalid_argument);
    EXPECT_EQ(code_of([] { parse_timestamp("2024010512", "%Y%m%d"); }), errc::invalid_argument);
    EXPECT_EQ(parse_iso("2024-03-04"), parse_iso("2024-03-04T00:00:00Z"));
    EXPECT_EQ(parse_iso("2024-03-04 10:00:00"), parse_iso("2024-03-04T10:00:00"));
    EXPECT_EQ(code_of([] { parse_iso("2024-3-4"); }), errc::invalid_argument);
}

TEST(ProductInference, FromSceneFixtures) {
    auto def = s2_product();
    EXPECT_EQ(def.name, "s2");
    ASSERT_EQ(def.bands.size(), 3u);
    EXPECT_EQ(def.bands[0].name, "B02");
    EXPECT_EQ(def.bands[1].name, "B04");
    EXPECT_EQ(def.bands[2].name, "B08");
    for (const auto& b : def.bands) {
        EXPECT_EQ(b.type, sample_type::uint16);
        EXPECT_EQ(b.nodata, 0.0);
        EXPECT_EQ(b.band_index_in_file, 0);
    }
    EXPECT_EQ(def.crs, crs_id::utm(30, true));
    EXPECT_EQ(def.resolution_x, 20.0);
    EXPECT_EQ(def.resolution_y, 20.0);
    EXPECT_EQ(def.roles.at("nir"), "B08");
    EXPECT_EQ(def.roles.at("red"), "B04");
    EXPECT_EQ(def.roles.at("blue"), "B02");
    EXPECT_NO_THROW(def.validate());

    // JSON round trip
    nlohmann::json j = def;
    EXPECT_EQ(j.get<product_definition>(), def);
}

TEST(ProductInference, SingleFileMultiBand) {
    temp_dir dir;
    tiff_spec s;
    s.width = s.height = 8;
    s.bands = 3;
    s.type = sample_type::float32;
    s.nodata = "-9999";
    s.transform = {{0, 0.001, 0, 10, 0, -0.001}};
    s.epsg = 4326;
    auto bytes = encode_geotiff(s, std::vector<double>(192, 0.5));
    std::vector<sample_file> samples{{"L8_2024001.tif", as_bytes(bytes)}};
    auto def = infer_product_definition(samples, "l8", "L8_{timestamp}.tif", "%Y%j");
    ASSERT_EQ(def.bands.size(), 3u);
    EXPECT_EQ(def.bands[2].name, "band_2");
    EXPECT_EQ(def.bands[2].band_index_in_file, 2);
    EXPECT_EQ(def.bands[0].nodata, -9999.0);
    EXPECT_EQ(def.crs, crs_id::wgs84());
    EXPECT_TRUE(def.roles.empty());
    EXPECT_EQ(code_of([&] { infer_product_definition(samples, "l8", "X_{timestamp}.tif", "%Y%j"); }),
              errc::pattern_mismatch);
}

TEST(Catalog, RegisterIsIdempotentAndDetectsConflicts) {
    catalog cat(std::make_unique<memory_storage>());
    auto def = s2_product();
    cat.register_product(def);
    cat.register_product(def);
    EXPECT_EQ(cat.products().size(), 1u);
    auto other = def;
    other.resolution_x = 10;
    EXPECT_EQ(code_of([&] { cat.register_product(other); }), errc::conflicting_definition);
    EXPECT_EQ(code_of([&] { cat.product("nope"); }), errc::unknown_product);
    auto invalid = def;
    invalid.name = "bad";
    invalid.filename_rule = "{scene}.tif";
    EXPECT_EQ(code_of([&] { cat.register_product(invalid); }), errc::invalid_pattern);
}

TEST(Catalog, IngestScenesAndReingestIdempotently) {
    catalog cat(std::make_unique<memory_storage>());
    cat.register_product(s2_product());
    auto recs = cat.ingest_scene("s2", scene_files());
    ASSERT_EQ(recs.size(), 3u);
    for (const auto& r : recs) {
        EXPECT_FALSE(r.partial);
        EXPECT_EQ(r.files.size(), 3u);
        EXPECT_EQ(r.width, 64);
        EXPECT_EQ(r.height, 64);
        EXPECT_EQ(r.transform, (geo_transform{{500000, 20, 0, 4790000, 0, -20}}));
        EXPECT_EQ(r.footprint.bounds(), (bbox{500000, 4790000 - 1280, 500000 + 1280, 4790000}));
        EXPECT_EQ(r.id, scene_id("s2", "T30TWN", r.timestamp));
        EXPECT_EQ(r.id.size(), 32u);
    }
    auto before = cat.state();
    auto again = cat.ingest_scene("s2", scene_files());
    EXPECT_EQ(again, recs);
    EXPECT_EQ(cat.state(), before);
}

TEST(Catalog, PartialScenesStayHiddenUntilComplete) {
    temp_dir dir;
    auto files = scene_files();
    std::vector<std::string> copies;
    for (const auto& f : files) {
        if (f.find("20240703") == std::string::npos) continue;
        fs::copy_file(f, dir.path() / fs::path(f).filename());
        copies.push_back((dir.path() / fs::path(f).filename()).string());
    }
    catalog cat(std::make_unique<memory_storage>());
    cat.register_product(s2_product(dir.path().string()));
    auto first = cat.ingest_scene("s2", {copies[0], copies[1]});
    ASSERT_EQ(first.size(), 1u);
    EXPECT_TRUE(first[0].partial);
    EXPECT_TRUE(cat.query_datasets({}).empty());
    auto done = cat.ingest_scene("s2", {copies[2]});
    ASSERT_EQ(done.size(), 1u);
    EXPECT_FALSE(done[0].partial);
    EXPECT_EQ(done[0].id, first[0].id);
    EXPECT_EQ(cat.query_datasets({}).size(), 1u);
}

TEST(Catalog, IngestErrorsNameTheFile) {
    temp_dir dir;
    catalog cat(std::make_unique<memory_storage>());
    cat.register_product(s2_product());
    try {
        cat.ingest_scene("s2", {dir / "readme.txt"});
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::pattern_mismatch);
        EXPECT_EQ(e.detail(), dir / "readme.txt");
    }
    EXPECT_EQ(code_of([&] { cat.ingest_scene("s2", {dir / "T1_20240105T103021_B99.tif"}); }), errc::pattern_mismatch);

    // a band on a different grid
    tiff_spec s;
    s.width = s.height = 64;
    s.transform = {{500020, 20, 0, 4790000, 0, -20}};
    std::string odd = dir / "T30TWN_20240105T103021_B02.tif";
    write_geotiff(odd, s, std::vector<double>(64 * 64, 5));
    std::vector<std::string> mixed{odd};
    for (const auto& f : scene_files()) {
        if (f.find("20240105") != std::string::npos && f.find("B02") == std::string::npos) mixed.push_back(f);
    }
    try {
        cat.ingest_scene("s2", mixed);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::inconsistent_scene);
    }
    // wrong CRS
    s.transform = {{500000, 20, 0, 4790000, 0, -20}};
    s.epsg = 32631;
    write_geotiff(odd, s, std::vector<double>(64 * 64, 5));
    EXPECT_EQ(code_of([&] { cat.ingest_scene("s2", mixed); }), errc::inconsistent_scene);
    // not a TIFF
    spit(odd, "garbage");
    EXPECT_EQ(code_of([&] { cat.ingest_scene("s2", mixed); }), errc::unsupported_format);
    EXPECT_TRUE(cat.datasets().empty());
}

TEST(Catalog, ScanSourceIsIdempotentAndReportsFailures) {
    temp_dir dir;
    catalog cat(std::make_unique<memory_storage>());
    cat.register_product(s2_product(dir.path().string()));
    auto first = cat.scan_source("s2");
    EXPECT_TRUE(first.ingested.empty());
    for (const auto& f : scene_files()) fs::copy_file(f, dir.path() / fs::path(f).filename());
    spit(dir / "notes.txt", "ignored, does not match the rule");
    spit(dir / "T30TWN_20250101T000000_B04.tif", "broken");
    auto report = cat.scan_source("s2");
    EXPECT_EQ(report.ingested.size(), 3u);
    ASSERT_EQ(report.failures.size(), 1u);
    EXPECT_EQ(report.failures[0].uri, dir / "T30TWN_20250101T000000_B04.tif");
    EXPECT_EQ(report.failures[0].code, "unsupported_format");
    auto second = cat.scan_source("s2");
    EXPECT_TRUE(second.ingested.empty());

    auto missing = s2_product((dir.path() / "nope").string());
    missing.name = "gone";
    cat.register_product(missing);
    EXPECT_EQ(code_of([&] { cat.scan_source("gone"); }), errc::source_unavailable);
}

TEST(Catalog, QueryMatchesLinearScanOracle) {
    temp_dir dir;
    std::mt19937_64 rng(123);
    catalog cat(std::make_unique<memory_storage>());
    cat.register_product(tiny_product());
    auto other = tiny_product();
    other.name = "tiny2";
    other.filename_rule = "X{scene}_{timestamp}.tif";
    cat.register_product(other);
    std::uniform_real_distribution<double> xd(300000, 700000), yd(4000000, 5000000);
    std::uniform_int_distribution<int> doy(1, 365), year(2020, 2024);
    for (int i = 0; i < 200; ++i) {
        std::string scene = "s" + std::to_string(i);
        bool second = i % 4 == 0;
        std::string path = write_tiny(dir, (second ? "X" : "") + scene, year(rng), doy(rng), std::floor(xd(rng)),
                                      std::floor(yd(rng)));
        cat.ingest_scene(second ? "tiny2" : "tiny", {path});
    }
    auto all = cat.datasets();
    ASSERT_EQ(all.size(), 200u);

    std::uniform_real_distribution<double> span(10, 200000);
    for (int q = 0; q < 200; ++q) {
        dataset_filter f;
        if (q % 3 == 0) f.product = q % 2 ? "tiny" : "tiny2";
        if (q % 4 != 1) {
            double x = xd(rng), y = yd(rng);
            f.area = bbox{x, y, x + span(rng), y + span(rng)};
            f.area_crs = crs_id::utm(30, true);
        }
        if (q % 5 != 2) f.start = parse_timestamp(std::to_string(year(rng)) + "-01-01", "%Y-%m-%d") + std::chrono::days(doy(rng));
        if (q % 7 != 3) f.end = parse_timestamp(std::to_string(year(rng)) + "-01-01", "%Y-%m-%d") + std::chrono::days(doy(rng));

        std::vector<dataset_record> expected;
        for (const auto& r : all) {
            if (f.product && r.product != *f.product) continue;
            if (f.start && r.timestamp < *f.start) continue;
            if (f.end && r.timestamp >= *f.end) continue;
            if (f.area) {
                double x0 = r.transform.c[0], y1 = r.transform.c[3];
                double x1 = x0 + 40, y0 = y1 - 40;
                if (x1 < f.area->min_x || x0 > f.area->max_x || y1 < f.area->min_y || y0 > f.area->max_y) continue;
            }
            expected.push_back(r);
        }
        std::sort(expected.begin(), expected.end(),
                  [](const auto& a, const auto& b) { return std::tie(a.timestamp, a.id) < std::tie(b.timestamp, b.id); });
        EXPECT_EQ(cat.query_datasets(f), expected) << "query " << q;
    }
    EXPECT_EQ(code_of([&] {
        dataset_filter f;
        f.product = "zzz";
        cat.query_datasets(f); }), errc::unknown_product);
}

TEST(Catalog, QueryWithGeographicArea) {
    catalog cat(std::make_unique<memory_storage>());
    cat.register_product(s2_product());
    cat.ingest_scene("s2", scene_files());
    auto ll = utm_inverse(30, hemisphere::north, 500640, 4789360);  // tile centre
    dataset_filter inside;
    inside.area = bbox{ll.lon - 0.001, ll.lat - 0.001, ll.lon + 0.001, ll.lat + 0.001};
    inside.area_crs = crs_id::wgs84();
    EXPECT_EQ(cat.query_datasets(inside).size(), 3u);
    dataset_filter away = inside;
    away.area = bbox{ll.lon + 0.5, ll.lat, ll.lon + 0.6, ll.lat + 0.1};
    EXPECT_TRUE(cat.query_datasets(away).empty());
    dataset_filter window;
    window.start = parse_iso("2024-03-04T10:30:19Z");
    window.end = parse_iso("2024-07-03T10:30:31Z");
    auto hits = cat.query_datasets(window);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(format_iso(hits[0].timestamp), "2024-03-04T10:30:19Z");
}

TEST(Catalog, PersistenceRoundTripIsFieldExact) {
    temp_dir dir;
    catalog_state saved;
    {
        auto cat = catalog::open_directory(dir / "cat");
        cat->register_product(s2_product());
        cat->ingest_scene("s2", scene_files());
        cat->ingest_polygons(slurp(fixture_path("scenes_polygons.geojson")));
        cat->add_annotation("plot_01", "test", "alice", std::string("looks dry"));
        cat->add_annotation("plot_02", "test", "bob", std::nullopt);
        saved = cat->state();
    }
    auto reopened = catalog::open_directory(dir / "cat");
    EXPECT_EQ(reopened->state(), saved);
    reopened->compact();
    auto compacted = catalog::open_directory(dir / "cat");
    EXPECT_EQ(compacted->state(), saved);
    EXPECT_EQ(log_records(dir / "cat/catalog.log").size(), 0u);
}

TEST(Catalog, AutomaticCompaction) {
    temp_dir dir;
    catalog_state saved;
    {
        catalog cat(std::make_unique<file_storage>(dir / "cat"), 3);
        cat.register_product(s2_product());
        cat.ingest_scene("s2", scene_files());
        cat.ingest_polygons(slurp(fixture_path("scenes_polygons.geojson")));
        saved = cat.state();
    }
    EXPECT_GT(log_records(dir / "cat/catalog.snapshot").size(), 0u);
    EXPECT_EQ(catalog::open_directory(dir / "cat")->state(), saved);
}

TEST(Catalog, TruncatedLogReloadsToValidPrefix) {
    temp_dir dir;
    {
        auto cat = catalog::open_directory(dir / "cat");
        cat->register_product(s2_product());
        for (const auto& f : scene_files()) cat->ingest_scene("s2", {f});
        cat->ingest_polygons(slurp(fixture_path("scenes_polygons.geojson")));
        cat->add_annotation("plot_03", "wet", "carol", std::nullopt);
    }
    const std::string log = dir / "cat/catalog.log";
    const std::string full = slurp(log);
    auto records = log_records(log);
    const std::size_t header = full.find('\n') + 1;
    std::mt19937_64 rng(99);
    std::vector<std::size_t> cuts{header, full.size() - 1, full.size()};
    for (int i = 0; i < 40; ++i) cuts.push_back(std::uniform_int_distribution<std::size_t>(header, full.size())(rng));
    for (std::size_t cut : cuts) {
        temp_dir copy;
        fs::create_directories(copy.path() / "cat");
        spit(copy / "cat/catalog.log", full.substr(0, cut));
        auto reloaded = catalog::open_directory(copy / "cat");
        std::size_t complete = std::count(full.begin() + header, full.begin() + cut, '\n');
        auto mem = std::make_unique<memory_storage>();
        mem->append(std::span(records.data(), complete));
        catalog prefix(std::move(mem));
        EXPECT_EQ(reloaded->state(), prefix.state()) << "cut at " << cut;
    }
}

TEST(Catalog, CorruptCompleteRecordIsAnError) {
    temp_dir dir;
    fs::create_directories(dir.path() / "cat");
    spit(dir / "cat/catalog.log", "minicube-catalog 1\n{\"kind\":\"product\",\"record\":{}}\n");
    EXPECT_EQ(code_of([&] { catalog::open_directory(dir / "cat"); }), errc::corrupt_catalog);
    spit(dir / "cat/catalog.log", "something else\n");
    EXPECT_EQ(code_of([&] { catalog::open_directory(dir / "cat"); }), errc::corrupt_catalog);
}

TEST(Catalog, ReadersNeverSeePartialScenes) {
    temp_dir dir;
    catalog cat(std::make_unique<memory_storage>());
    cat.register_product(tiny_product());
    std::atomic<bool> done{false};
    std::atomic<std::size_t> violations{0}, reads{0};
    std::vector<std::thread> readers;
    for (int t = 0; t < 3; ++t) {
        readers.emplace_back([&] {
            while (!done) {
                for (const auto& r : cat.query_datasets({})) {
                    if (r.partial || r.files.size() != 1 || r.width != 4) ++violations;
                }
                ++reads;
            }
        });
    }
    for (int i = 0; i < 60; ++i) cat.ingest_scene("tiny", {write_tiny(dir, "c" + std::to_string(i), 2024, 1 + i, 400000, 4500000)});
    done = true;
    for (auto& t : readers) t.join();
    EXPECT_EQ(violations, 0u);
    EXPECT_GT(reads, 0u);
    EXPECT_EQ(cat.query_datasets({}).size(), 60u);
}

TEST(Polygons, GeoJsonImport) {
    catalog cat(std::make_unique<memory_storage>());
    EXPECT_EQ(cat.ingest_polygons(slurp(fixture_path("scenes_polygons.geojson"))), 12u);
    auto p = cat.polygon("plot_03");
    ASSERT_TRUE(p);
    EXPECT_EQ(p->crs, crs_id::wgs84());
    EXPECT_EQ(p->holes.size(), 1u);
    EXPECT_EQ(p->attributes.at("farm"), "f0");
    EXPECT_FALSE(cat.polygon("plot_99"));

    const char* multi = R"({"type":"FeatureCollection","features":[
        {"type":"Feature","properties":{"n":3},"geometry":{"type":"MultiPolygon","coordinates":[
            [[[500000,4780000],[500100,4780000],[500100,4780100],[500000,4780000]]],
            [[[500200,4780000],[500300,4780000],[500300,4780100],[500200,4780000]]]]}},
        {"type":"Feature","id":7,"properties":null,"geometry":{"type":"Polygon","coordinates":[
            [[500000,4780000],[500100,4780000],[500100,4780100]]]}}]})";
    auto polys = parse_geojson_polygons(multi, crs_id::utm(30, true));
    ASSERT_EQ(polys.size(), 3u);
    EXPECT_EQ(polys[0].id, "poly_0_0");
    EXPECT_EQ(polys[1].id, "poly_0_1");
    EXPECT_EQ(polys[2].id, "7");
    EXPECT_EQ(polys[0].attributes.at("n"), "3");
    EXPECT_EQ(polys[0].crs, crs_id::utm(30, true));
    EXPECT_EQ(polys[0].exterior.size(), 3u);
}

TEST(Polygons, MalformedInputNamesTheFeature) {
    auto check = [](const std::string& doc, const std::string& index) {
        try {
            parse_geojson_polygons(doc, std::nullopt);
            ADD_FAILURE() << doc;
        } catch (const error& e) {
            EXPECT_EQ(e.code(), errc::malformed_geojson);
            EXPECT_EQ(e.detail().empty() ? std::string() : e.detail(), index) << doc;
        }
    };
    std::string ok = R"({"type":"Feature","id":"a","geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1]]]}})";
    check(R"({"type":"FeatureCollection","features":[)" + ok +
              R"(,{"type":"Feature","geometry":{"type":"Point","coordinates":[0,0]}}]})",
          "1");
    check(R"({"type":"FeatureCollection","features":[)" + ok + "," + ok + "]}", "1");
    check(R"({"type":"FeatureCollection","features":[{"type":"Feature","geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0]]]}}]})",
          "0");
    EXPECT_EQ(code_of([] { parse_geojson_polygons("{not json", std::nullopt); }), errc::malformed_geojson);
    EXPECT_EQ(code_of([] { parse_geojson_polygons(R"({"type":"Feature"})", std::nullopt); }), errc::malformed_geojson);
}

TEST(Annotations, AddFilterAndValidate) {
    catalog cat(std::make_unique<memory_storage>());
    cat.ingest_polygons(slurp(fixture_path("scenes_polygons.geojson")));
    auto a = cat.add_annotation("plot_00", "test", "dana", std::nullopt);
    auto b = cat.add_annotation("plot_01", "test", "dana", std::string("n"));
    cat.add_annotation("plot_00", "other", "eve", std::nullopt);
    EXPECT_NE(a.id, b.id);
    EXPECT_EQ(cat.annotations().size(), 3u);
    auto for0 = cat.annotations(std::string("plot_00"));
    ASSERT_EQ(for0.size(), 2u);
    EXPECT_EQ(for0[0], a);
    EXPECT_EQ(code_of([&] { cat.add_annotation("ghost", "test", "x", std::nullopt); }), errc::unknown_polygon);
    EXPECT_EQ(code_of([&] { cat.add_annotation("plot_00", "", "x", std::nullopt); }), errc::invalid_argument);
}
