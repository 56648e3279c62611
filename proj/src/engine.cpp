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

#include "minicube/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "minicube/error.hpp"
#include "minicube/hash.hpp"
#include "minicube/json_codec.hpp"
#include "minicube/log.hpp"

namespace minicube {

namespace {

struct band_reader {
    std::shared_ptr<const byte_source> source;
    raster_metadata meta;  // nodata replaced by the band definition's
    int band_index = 0;
    double scale = 1.0;
};

// What one product contributes to a query.
struct product_plan {
    product_definition def;
    std::vector<dataset_record> datasets;
    std::vector<std::string> measures;             // measures this product can serve
    std::map<std::string, std::string> role_band;  // index role -> band
    std::set<std::string> bands;                   // bands to read
};

// Opens each URI once per query; safe to call from worker threads.
class reader_cache {
   public:
    explicit reader_cache(const engine_options& opts) : _opts(opts) {}

    band_reader get(const dataset_record& ds, const band_def& band) {
        const std::string& uri = ds.files.at(band.name);
        std::shared_ptr<entry> e;
        {
            std::lock_guard lock(_mutex);
            auto& slot = _entries[uri];
            if (!slot) slot = std::make_shared<entry>();
            e = slot;
        }
        std::call_once(e->once, [&] {
            e->source = _opts.opener ? _opts.opener(uri) : open_uri(uri);
            e->meta = parse_metadata(*e->source);
        });
        if (e->meta.width != ds.width || e->meta.height != ds.height || e->meta.transform != ds.transform) {
            throw error(errc::inconsistent_scene, "file " + uri + " no longer matches its catalog record", uri);
        }
        band_reader r;
        r.source = e->source;
        r.meta = e->meta;
        r.meta.nodata = band.nodata;
        r.band_index = band.band_index_in_file;
        r.scale = band.scale;
        return r;
    }

   private:
    struct entry {
        std::once_flag once;
        std::shared_ptr<const byte_source> source;
        raster_metadata meta;
    };
    const engine_options& _opts;
    std::mutex _mutex;
    std::map<std::string, std::shared_ptr<entry>> _entries;
};

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, n); ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

bool is_index_measure(const std::string& m) { return index_from_name(m).has_value(); }

std::vector<std::string> roles_of(index_kind k) {
    if (k == index_kind::ndvi) return {"nir", "red"};
    return {"nir", "red", "blue"};
}

}  // namespace

std::string_view to_string(aggregate_mode m) { return m == aggregate_mode::zonal ? "zonal" : "per_pixel"; }

aggregate_mode aggregate_mode_from_string(std::string_view s) {
    if (s == "zonal") return aggregate_mode::zonal;
    if (s == "per_pixel") return aggregate_mode::per_pixel;
    throw error(errc::invalid_argument, "unknown aggregate mode '" + std::string(s) + "'");
}

std::optional<index_kind> index_from_name(std::string_view name) {
    if (name == "ndvi") return index_kind::ndvi;
    if (name == "evi") return index_kind::evi;
    return std::nullopt;
}

std::string_view to_string(index_kind k) { return k == index_kind::ndvi ? "ndvi" : "evi"; }

void load_query::validate() const {
    if (polygon_ids.empty() && inline_polygons.empty()) throw error(errc::invalid_query, "query names no polygon");
    if (products.empty()) throw error(errc::invalid_query, "query names no product");
    if (measures.empty()) throw error(errc::invalid_query, "query names no measure");
    if (!(start < end)) throw error(errc::invalid_query, "query interval is empty (start must precede end)");
}

std::string load_query::fingerprint() const {
    auto sorted = [](std::vector<std::string> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    nlohmann::json inline_json = nlohmann::json::array();
    for (const auto& p : inline_polygons) inline_json.push_back(p);
    nlohmann::json j{{"polygons", sorted(polygon_ids)},
                     {"inline", inline_json},
                     {"products", sorted(products)},
                     {"measures", sorted(measures)},
                     {"aggregate", std::string(to_string(aggregate))}};
    return content_hash(j.dump());
}

std::optional<std::string> band_for_role(const product_definition& product, const std::string& role) {
    if (auto it = product.roles.find(role); it != product.roles.end()) return it->second;
    static const std::map<std::string, std::string> defaults{{"nir", "B08"}, {"red", "B04"}, {"blue", "B02"}};
    if (auto it = defaults.find(role); it != defaults.end() && product.find_band(it->second)) return it->second;
    return std::nullopt;
}

pixel_patch compute_index(index_kind kind, const std::map<std::string, pixel_patch>& bands) {
    auto role = [&](const char* name) -> const pixel_patch& {
        auto it = bands.find(name);
        if (it == bands.end()) {
            throw error(errc::missing_band_role, std::string("index ") + std::string(to_string(kind)) + " needs band role '" +
                                                     name + "'");
        }
        return it->second;
    };
    const pixel_patch& nir = role("nir");
    const pixel_patch& red = role("red");
    const pixel_patch* blue = kind == index_kind::evi ? &role("blue") : nullptr;
    auto aligned = [&](const pixel_patch& p) { return p.width == nir.width && p.height == nir.height; };
    if (!aligned(red) || (blue && !aligned(*blue))) throw error(errc::shape_mismatch, "index input patches differ in size");

    pixel_patch out;
    out.width = nir.width;
    out.height = nir.height;
    out.transform = nir.transform;
    out.band_name = std::string(to_string(kind));
    out.values.assign(nir.values.size(), 0.0);
    out.valid.assign(nir.values.size(), false);
    std::size_t guarded = 0;
    for (std::size_t i = 0; i < nir.values.size(); ++i) {
        if (!nir.valid[i] || !red.valid[i] || (blue && !blue->valid[i])) continue;
        double n = nir.values[i], r = red.values[i];
        double num, den;
        if (kind == index_kind::ndvi) {
            num = n - r;
            den = n + r;
        } else {
            double b = blue->values[i];
            num = evi_coefficients::gain * (n - r);
            den = n + evi_coefficients::c1 * r - evi_coefficients::c2 * b + evi_coefficients::l;
        }
        if (!(std::abs(den) >= index_denominator_guard)) {
            ++guarded;
            continue;
        }
        double v = num / den;
        if (!std::isfinite(v)) continue;
        out.values[i] = v;
        out.valid[i] = true;
    }
    if (guarded > 0 && get_log_level() <= log_level::debug) {
        log(log_level::debug, std::to_string(guarded) + " " + out.band_name + " cells invalidated by the denominator guard");
    }
    return out;
}

zonal_stats compute_zonal_stats(const pixel_patch& patch, const pixel_region& region) {
    if (patch.width != region.width || patch.height != region.height) {
        throw error(errc::shape_mismatch, "patch and region windows differ");
    }
    zonal_stats s;
    std::vector<double> values;
    for (std::size_t i = 0; i < region.mask.size(); ++i) {
        if (!region.mask[i]) continue;
        ++s.count;
        if (patch.valid[i]) values.push_back(patch.values[i]);
    }
    s.valid_count = values.size();
    if (values.empty()) return s;

    zonal_summary z;
    double sum = 0;
    z.min = values.front();
    z.max = values.front();
    for (double v : values) {
        sum += v;
        z.min = std::min(z.min, v);
        z.max = std::max(z.max, v);
    }
    const double n = static_cast<double>(values.size());
    z.mean = sum / n;
    double ss = 0;
    for (double v : values) ss += (v - z.mean) * (v - z.mean);
    z.stddev = std::sqrt(ss / n);

    auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (values.size() % 2 == 1) {
        z.median = *mid;
    } else {
        double upper = *mid;
        double lower = *std::max_element(values.begin(), mid);
        z.median = (lower + upper) / 2;
    }
    s.summary = z;
    return s;
}

engine::engine(const catalog& cat, engine_options options) : _catalog(cat), _options(std::move(options)) {}

observation_table engine::load(const load_query& q) const {
    q.validate();

    std::vector<geo_polygon> polys;
    for (const auto& id : q.polygon_ids) {
        auto p = _catalog.polygon(id);
        if (!p) throw error(errc::unknown_polygon, "unknown polygon '" + id + "'", id);
        polys.push_back(std::move(*p));
    }
    for (const auto& p : q.inline_polygons) {
        p.validate();
        polys.push_back(p);
    }

    std::vector<product_plan> plans;
    std::set<std::string> served;
    for (const auto& name : std::set<std::string>(q.products.begin(), q.products.end())) {
        product_plan plan;
        plan.def = _catalog.product(name);
        for (const auto& m : std::set<std::string>(q.measures.begin(), q.measures.end())) {
            if (auto k = index_from_name(m)) {
                std::map<std::string, std::string> found;
                for (const auto& role : roles_of(*k)) {
                    if (auto b = band_for_role(plan.def, role)) found[role] = *b;
                }
                if (found.size() != roles_of(*k).size()) continue;
                for (const auto& [role, band] : found) {
                    plan.role_band[role] = band;
                    plan.bands.insert(band);
                }
            } else if (plan.def.find_band(m)) {
                plan.bands.insert(m);
            } else {
                continue;
            }
            plan.measures.push_back(m);
            served.insert(m);
        }
        dataset_filter f;
        f.product = name;
        f.start = q.start;
        f.end = q.end;
        plan.datasets = _catalog.query_datasets(f);
        plans.push_back(std::move(plan));
    }
    for (const auto& m : q.measures) {
        if (served.contains(m)) continue;
        if (is_index_measure(m)) {
            throw error(errc::missing_band_role, "no queried product has the bands needed for '" + m + "'", m);
        }
        throw error(errc::unknown_measure, "measure '" + m + "' is neither a band of a queried product nor an index", m);
    }

    reader_cache readers(_options);
    std::vector<std::vector<zonal_row>> zonal_parts(polys.size());
    std::vector<std::vector<pixel_row>> pixel_parts(polys.size());
    unsigned threads = _options.threads ? _options.threads : std::max(1u, std::thread::hardware_concurrency());

    parallel_for(polys.size(), threads, [&](std::size_t pi) {
        const geo_polygon& source_poly = polys[pi];
        for (const auto& plan : plans) {
            if (plan.measures.empty()) continue;
            std::optional<geo_polygon> poly;
            try {
                poly = transform_polygon(source_poly, plan.def.crs);
            } catch (const error& e) {
                // far outside the product's projection domain: cannot overlap its scenes
                if (e.code() != errc::out_of_domain) throw;
                continue;
            }
            bbox pb = poly->bounds();
            for (const auto& ds : plan.datasets) {
                if (!pb.intersects(ds.footprint.bounds())) continue;
                auto region = rasterize_polygon(*poly, ds.transform, ds.width, ds.height);
                if (!region) continue;

                std::map<std::string, pixel_patch> band_patches;
                for (const auto& band : plan.bands) {
                    const band_def& def = *plan.def.find_band(band);
                    band_reader r = readers.get(ds, def);
                    pixel_patch patch = read_window(*r.source, r.meta, r.band_index, region->window());
                    if (r.scale != 1.0) {
                        for (auto& v : patch.values) v *= r.scale;
                    }
                    patch.band_name = band;
                    band_patches.emplace(band, std::move(patch));
                }

                for (const auto& m : plan.measures) {
                    pixel_patch measure_patch;
                    if (auto k = index_from_name(m)) {
                        std::map<std::string, pixel_patch> by_role;
                        for (const auto& role : roles_of(*k)) by_role.emplace(role, band_patches.at(plan.role_band.at(role)));
                        measure_patch = compute_index(*k, by_role);
                    } else {
                        measure_patch = band_patches.at(m);
                    }
                    if (q.aggregate == aggregate_mode::zonal) {
                        zonal_parts[pi].push_back(
                            {source_poly.id, plan.def.name, ds.timestamp, m, compute_zonal_stats(measure_patch, *region)});
                        continue;
                    }
                    for (int r = 0; r < region->height; ++r) {
                        for (int c = 0; c < region->width; ++c) {
                            if (!region->at(c, r) || !measure_patch.valid_at(c, r)) continue;
                            int col = region->col + c, row = region->row + r;
                            point centre = pixel_to_world(ds.transform, col + 0.5, row + 0.5);
                            pixel_parts[pi].push_back({source_poly.id, plan.def.name, ds.timestamp, m, col, row, centre.x,
                                                       centre.y, measure_patch.at(c, r)});
                        }
                    }
                }
            }
        }
    });

    observation_table table;
    table.mode = q.aggregate;
    table.fingerprint = q.fingerprint();
    if (q.aggregate == aggregate_mode::zonal) {
        for (auto& part : zonal_parts) std::move(part.begin(), part.end(), std::back_inserter(table.zonal));
        std::stable_sort(table.zonal.begin(), table.zonal.end(), [](const zonal_row& a, const zonal_row& b) {
            return std::tie(a.polygon_id, a.timestamp, a.measure, a.product) <
                   std::tie(b.polygon_id, b.timestamp, b.measure, b.product);
        });
    } else {
        for (auto& part : pixel_parts) std::move(part.begin(), part.end(), std::back_inserter(table.pixels));
        std::stable_sort(table.pixels.begin(), table.pixels.end(), [](const pixel_row& a, const pixel_row& b) {
            return std::tie(a.polygon_id, a.timestamp, a.measure, a.product, a.row, a.col) <
                   std::tie(b.polygon_id, b.timestamp, b.measure, b.product, b.row, b.col);
        });
    }
    return table;
}

std::vector<std::pair<instant, zonal_stats>> engine::timeseries(const std::string& polygon_id, const std::string& product,
                                                                const std::string& measure, instant start,
                                                                instant end) const {
    if (!(start < end)) return {};
    load_query q;
    q.polygon_ids = {polygon_id};
    q.products = {product};
    q.measures = {measure};
    q.start = start;
    q.end = end;
    auto table = load(q);
    std::vector<std::pair<instant, zonal_stats>> out;
    for (auto& row : table.zonal) out.emplace_back(row.timestamp, std::move(row.stats));
    return out;
}

}  // namespace minicube
