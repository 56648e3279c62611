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

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "minicube/error.hpp"
#include "minicube/json_codec.hpp"
#include "minicube/log.hpp"
#include "minicube/service.hpp"

namespace minicube {

using nlohmann::json;

namespace {

struct query_flags {
    std::vector<std::string> polygons;
    std::string polygons_file;
    std::vector<std::string> products;
    std::vector<std::string> measures;
    std::string start;
    std::string end;
    std::string aggregate = "zonal";
    unsigned threads = 0;

    void add_to(CLI::App* cmd, bool with_aggregate) {
        cmd->add_option("--polygon", polygons, "Catalog polygon id (repeatable)");
        cmd->add_option("--polygons-file", polygons_file, "GeoJSON file with inline polygons");
        cmd->add_option("--product", products, "Product name (repeatable)")->required();
        cmd->add_option("--measure", measures, "Band name, ndvi or evi (repeatable)")->required();
        cmd->add_option("--start", start, "Inclusive start (ISO 8601)")->required();
        cmd->add_option("--end", end, "Exclusive end (ISO 8601)")->required();
        if (with_aggregate) {
            cmd->add_option("--aggregate", aggregate, "zonal or per_pixel")->check(CLI::IsMember({"zonal", "per_pixel"}));
        }
        cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
    }
};

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::stringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::invalid_argument, "cannot read " + path, path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << content)) throw error(errc::io_failure, "cannot write " + path, path);
}

instant parse_time_flag(const std::string& text, const char* name) {
    try {
        return parse_iso(text);
    } catch (const error& e) {
        throw error(errc::invalid_argument, std::string("bad --") + name + " timestamp", text);
    }
}

load_query build_query(const query_flags& f) {
    load_query q;
    q.polygon_ids = f.polygons;
    if (!f.polygons_file.empty()) q.inline_polygons = parse_geojson_polygons(read_input(f.polygons_file), std::nullopt);
    q.products = f.products;
    q.measures = f.measures;
    q.start = parse_time_flag(f.start, "start");
    q.end = parse_time_flag(f.end, "end");
    q.aggregate = aggregate_mode_from_string(f.aggregate);
    q.validate();
    return q;
}

std::map<std::string, geo_polygon> query_geometry(const catalog& cat, const load_query& q) {
    std::map<std::string, geo_polygon> geometry;
    for (const auto& id : q.polygon_ids) {
        if (auto p = cat.polygon(id)) geometry.emplace(id, *p);
    }
    for (const auto& p : q.inline_polygons) geometry.emplace(p.id, p);
    return geometry;
}

std::string timeseries_csv(const std::vector<std::pair<instant, zonal_stats>>& series) {
    std::string out = "timestamp,count,valid_count,mean,std,min,max,median\r\n";
    for (const auto& [ts, s] : series) {
        out += format_iso(ts) + ',' + std::to_string(s.count) + ',' + std::to_string(s.valid_count);
        if (s.summary) {
            for (double v : {s.summary->mean, s.summary->stddev, s.summary->min, s.summary->max, s.summary->median}) {
                out += ',' + format_real(v);
            }
        } else {
            out += ",,,,,";
        }
        out += "\r\n";
    }
    return out;
}

std::string render_colored(const catalog& cat, const geo_polygon& poly, const std::string& product,
                           const std::string& measure, instant at, std::optional<double> lo, std::optional<double> hi) {
    auto def = cat.product(product);
    dataset_filter f;
    f.product = product;
    f.start = at;
    f.end = at + std::chrono::seconds(1);
    auto found = cat.query_datasets(f);
    if (found.empty()) throw error(errc::not_found, "no " + product + " dataset at " + format_iso(at), format_iso(at));
    const auto& ds = found.front();

    geo_polygon local = transform_polygon(poly, def.crs);
    auto region = rasterize_polygon(local, ds.transform, ds.width, ds.height);
    if (!region) return render_polygon_svg(local);

    load_query q;
    q.inline_polygons = {poly};
    q.products = {product};
    q.measures = {measure};
    q.start = f.start.value();
    q.end = f.end.value();
    q.aggregate = aggregate_mode::per_pixel;
    auto table = engine(cat).load(q);

    region_coloring coloring;
    coloring.region = *region;
    coloring.transform = ds.transform;
    coloring.values.assign(static_cast<std::size_t>(region->width) * region->height,
                           std::numeric_limits<double>::quiet_NaN());
    double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
    for (const auto& r : table.pixels) {
        int c = r.col - region->col, rr = r.row - region->row;
        if (c < 0 || rr < 0 || c >= region->width || rr >= region->height) continue;
        coloring.values[static_cast<std::size_t>(rr) * region->width + c] = r.value;
        vmin = std::min(vmin, r.value);
        vmax = std::max(vmax, r.value);
    }
    bool is_index = index_from_name(measure).has_value();
    coloring.lo = lo.value_or(is_index ? -1.0 : (std::isfinite(vmin) ? vmin : 0.0));
    coloring.hi = hi.value_or(is_index ? 1.0 : (std::isfinite(vmax) ? vmax : 1.0));
    return render_polygon_svg(local, coloring);
}

server* active_server = nullptr;

extern "C" void on_signal(int) {
    if (active_server) std::thread([] { active_server->stop(); }).detach();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"minicube: satellite imagery catalog, zonal statistics and export", "minicube"};
    app.require_subcommand(1);
    std::string config_path;
    std::string data_root;
    bool verbose = false;
    app.add_option("--config", config_path, "key=value configuration file");
    app.add_option("--data-root", data_root, "Directory holding the catalog and exports");
    app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

    // register-product
    std::string def_file;
    auto* reg = app.add_subcommand("register-product", "Register a product definition (JSON)");
    reg->add_option("definition", def_file, "Definition file, '-' for stdin")->required();

    // infer-product
    std::vector<std::string> samples;
    std::string rule, ts_format, name, src_kind = "local_dir", src_root;
    bool do_register = false;
    auto* infer = app.add_subcommand("infer-product", "Infer a product definition from sample files");
    infer->add_option("--sample", samples, "Sample GeoTIFF (repeatable)")->required();
    infer->add_option("--rule", rule, "Filename rule, e.g. {scene}_{timestamp}_{band}.tif")->required();
    infer->add_option("--timestamp-format", ts_format, "Timestamp format, e.g. %Y%m%dT%H%M%S")->required();
    infer->add_option("--name", name, "Product name")->required();
    infer->add_option("--source-kind", src_kind, "local_dir or http_listing")->check(CLI::IsMember({"local_dir", "http_listing"}));
    infer->add_option("--source-root", src_root, "Directory or listing URL");
    infer->add_flag("--register", do_register, "Also register the inferred definition");

    // ingest
    std::string product;
    std::vector<std::string> uris;
    auto* ingest = app.add_subcommand("ingest", "Ingest scene files");
    ingest->add_option("--product", product)->required();
    ingest->add_option("uris", uris, "Files or URLs")->required();

    // scan
    auto* scan = app.add_subcommand("scan", "Scan the product's source for new scenes");
    scan->add_option("--product", product)->required();

    // polygons-import
    std::string geojson_file;
    int crs_override = 0;
    auto* pimport = app.add_subcommand("polygons-import", "Import GeoJSON polygons");
    pimport->add_option("file", geojson_file, "GeoJSON file, '-' for stdin")->required();
    pimport->add_option("--crs", crs_override, "EPSG code overriding the file's CRS");

    // query
    query_flags qf;
    std::string format = "csv";
    std::string out_path;
    auto* query = app.add_subcommand("query", "Run a load query");
    qf.add_to(query, true);
    query->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    query->add_option("-o,--output", out_path, "Output file (default stdout)");

    // timeseries
    std::string polygon_id, measure, start, end;
    auto* ts = app.add_subcommand("timeseries", "Zonal time series of one polygon");
    ts->add_option("--polygon", polygon_id)->required();
    ts->add_option("--product", product)->required();
    ts->add_option("--measure", measure)->required();
    ts->add_option("--start", start)->required();
    ts->add_option("--end", end)->required();
    ts->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    // export / merge
    std::string dest, export_format_name = "csv";
    query_flags ef;
    auto* exp = app.add_subcommand("export", "Run a query and export it with a manifest");
    ef.add_to(exp, true);
    exp->add_option("--dest", dest, "Destination file")->required();
    exp->add_option("--export-format", export_format_name, "csv or geojson")->check(CLI::IsMember({"csv", "geojson"}));
    query_flags mf;
    auto* merge = app.add_subcommand("merge", "Merge new rows into an existing export");
    mf.add_to(merge, true);
    merge->add_option("--dest", dest, "Existing export")->required();

    // serve
    std::string listen;
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    serve->add_option("--listen", listen, "host:port");

    // render
    std::string at;
    std::optional<double> lo, hi;
    bool timeseries_plot = false;
    auto* render = app.add_subcommand("render", "Render a polygon or its time series as SVG");
    render->add_option("--polygon", polygon_id)->required();
    render->add_option("--product", product);
    render->add_option("--measure", measure);
    render->add_option("--at", at, "Scene timestamp for colouring cells");
    render->add_option("--start", start);
    render->add_option("--end", end);
    render->add_option("--lo", lo, "Value mapped to the low ramp colour");
    render->add_option("--hi", hi, "Value mapped to the high ramp colour");
    render->add_flag("--timeseries", timeseries_plot, "Plot the zonal mean over time");
    render->add_option("-o,--output", out_path, "Output file (default stdout)");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    if (verbose) set_log_level(log_level::info);
    service_config cfg = load_config(config_path);
    if (!data_root.empty()) cfg.data_root = data_root;
    if (!listen.empty()) cfg.listen = listen;
    cfg.validate();

    if (serve->parsed()) {
        server srv(cfg);
        srv.bind();
        err << "listening on port " << srv.port() << std::endl;
        active_server = &srv;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        srv.run();
        active_server = nullptr;
        return 0;
    }

    auto cat = catalog::open_directory(cfg.catalog_dir());
    auto engine_for = [&](unsigned threads) {
        engine_options o;
        o.threads = threads ? threads : cfg.threads;
        return engine(*cat, o);
    };

    if (reg->parsed()) {
        auto def = json::parse(read_input(def_file)).get<product_definition>();
        cat->register_product(def);
        out << json(def).dump(2) << "\n";
    } else if (infer->parsed()) {
        std::vector<sample_file> files;
        for (const auto& s : samples) files.push_back({filename_of(s), read_file_bytes(s)});
        auto def = infer_product_definition(files, name, rule, ts_format);
        def.source = source_kind_from_string(src_kind);
        def.source_root = src_root;
        if (do_register) cat->register_product(def);
        out << json(def).dump(2) << "\n";
    } else if (ingest->parsed()) {
        json recs = json::array();
        for (const auto& r : cat->ingest_scene(product, uris)) recs.push_back(r);
        out << recs.dump(2) << "\n";
    } else if (scan->parsed()) {
        auto report = cat->scan_source(product);
        for (const auto& f : report.failures) err << "warning: " << f.uri << ": " << f.message << "\n";
        json j = scan_report_to_json(report);
        j.erase("ingested");
        j["ingested_ids"] = json::array();
        for (const auto& d : report.ingested) j["ingested_ids"].push_back(d.id);
        out << j.dump(2) << "\n";
    } else if (pimport->parsed()) {
        std::optional<crs_id> crs;
        if (crs_override) crs = crs_id::checked(crs_override);
        auto n = cat->ingest_polygons(read_input(geojson_file), crs);
        out << json{{"imported", n}}.dump(2) << "\n";
    } else if (query->parsed()) {
        auto q = build_query(qf);
        auto table = engine_for(qf.threads).load(q);
        write_output(out_path, format == "csv" ? table_to_csv(table) : table_to_json(table).dump(2) + "\n", out);
    } else if (ts->parsed()) {
        auto series = engine_for(0).timeseries(polygon_id, product, measure, parse_time_flag(start, "start"),
                                               parse_time_flag(end, "end"));
        if (format == "csv") {
            out << timeseries_csv(series);
        } else {
            json points = json::array();
            for (const auto& [t, s] : series) {
                json p{{"timestamp", format_iso(t)}, {"count", s.count}, {"valid_count", s.valid_count}};
                if (s.summary) {
                    p["mean"] = s.summary->mean;
                    p["std"] = s.summary->stddev;
                    p["min"] = s.summary->min;
                    p["max"] = s.summary->max;
                    p["median"] = s.summary->median;
                }
                points.push_back(std::move(p));
            }
            out << json{{"polygon_id", polygon_id}, {"product", product}, {"measure", measure}, {"points", points}}.dump(2)
                << "\n";
        }
    } else if (exp->parsed()) {
        auto q = build_query(ef);
        auto table = engine_for(ef.threads).load(q);
        export_options opts;
        auto fmt = export_format_from_string(export_format_name);
        if (fmt == export_format::geojson) opts.geometry = query_geometry(*cat, q);
        auto m = export_table(table, fmt, dest, opts);
        out << json{{"destination", dest}, {"rows", table.size()}, {"covered", m.covered.size()}}.dump(2) << "\n";
    } else if (merge->parsed()) {
        auto q = build_query(mf);
        auto before = read_manifest(dest).covered.size();
        auto m = merge_incremental(dest, engine_for(mf.threads).load(q));
        out << json{{"destination", dest}, {"added", m.covered.size() - before}, {"covered", m.covered.size()}}.dump(2)
            << "\n";
    } else if (render->parsed()) {
        auto poly = cat->polygon(polygon_id);
        if (!poly) throw error(errc::unknown_polygon, "unknown polygon '" + polygon_id + "'", polygon_id);
        std::string svg;
        if (timeseries_plot) {
            if (product.empty() || measure.empty() || start.empty() || end.empty()) {
                throw error(errc::invalid_argument, "--timeseries needs --product, --measure, --start and --end");
            }
            std::vector<std::pair<instant, double>> points;
            for (const auto& [t, s] : engine_for(0).timeseries(polygon_id, product, measure, parse_time_flag(start, "start"),
                                                               parse_time_flag(end, "end"))) {
                if (s.summary) points.emplace_back(t, s.summary->mean);
            }
            svg = render_timeseries_svg(points, polygon_id + " " + measure);
        } else if (!at.empty()) {
            if (product.empty() || measure.empty()) throw error(errc::invalid_argument, "--at needs --product and --measure");
            svg = render_colored(*cat, *poly, product, measure, parse_time_flag(at, "at"), lo, hi);
        } else {
            svg = render_polygon_svg(*poly);
        }
        write_output(out_path, svg, out);
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return run(args, out, err);
    } catch (const error& e) {
        err << "error [" << errc_name(e.code()) << "]: " << e.what();
        if (!e.detail().empty()) err << " (" << e.detail() << ")";
        err << "\n";
        return is_user_error(e.code()) ? 1 : 2;
    } catch (const nlohmann::json::exception& e) {
        err << "error [invalid_argument]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace minicube
