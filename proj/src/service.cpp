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

#include "minicube/service.hpp"

#include <httplib.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "minicube/error.hpp"
#include "minicube/json_codec.hpp"
#include "minicube/log.hpp"

namespace minicube {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::chrono::seconds parse_seconds(const std::string& key, const std::string& value) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size() || v < 0) {
        throw error(errc::invalid_argument, "config key '" + key + "' needs a non-negative number of seconds", value);
    }
    return std::chrono::seconds(v);
}

json stats_fields(const zonal_stats& s) {
    json j{{"count", s.count}, {"valid_count", s.valid_count}};
    for (const char* k : {"mean", "std", "min", "max", "median"}) j[k] = nullptr;
    if (s.summary) {
        j["mean"] = s.summary->mean;
        j["std"] = s.summary->stddev;
        j["min"] = s.summary->min;
        j["max"] = s.summary->max;
        j["median"] = s.summary->median;
    }
    return j;
}

std::vector<std::string> string_list(const json& j, const char* key) {
    if (!j.contains(key)) return {};
    const auto& v = j.at(key);
    if (v.is_string()) return {v.get<std::string>()};
    return v.get<std::vector<std::string>>();
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                const std::string& detail) {
    send_json(res, json{{"code", code}, {"message", message}, {"detail", detail}}, status);
}

using handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps exceptions escaping a route to the error body.
httplib::Server::Handler guarded(handler fn) {
    return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const error& e) {
            if (!is_user_error(e.code())) log(log_level::error, req.method + " " + req.path + ": " + e.what());
            send_error(res, http_status_for(e.code()), errc_name(e.code()), e.what(), e.detail());
        } catch (const json::exception& e) {
            send_error(res, 400, errc_name(errc::invalid_argument), "malformed request body", e.what());
        } catch (const std::exception& e) {
            log(log_level::error, req.method + " " + req.path + ": " + e.what());
            send_error(res, 500, errc_name(errc::internal), "internal error", e.what());
        }
    };
}

std::optional<std::string> param(const httplib::Request& req, const char* key) {
    if (!req.has_param(key)) return std::nullopt;
    return req.get_param_value(key);
}

std::string required_param(const httplib::Request& req, const char* key) {
    auto v = param(req, key);
    if (!v || v->empty()) throw error(errc::invalid_argument, std::string("missing query parameter '") + key + "'", key);
    return *v;
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw error(errc::invalid_argument, "request body is not valid JSON", e.what());
    }
}

crs_id parse_crs(const std::string& text) {
    int epsg = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), epsg);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw error(errc::unsupported_crs, "bad EPSG code '" + text + "'", text);
    return crs_id::checked(epsg);
}

bbox parse_bbox(const std::string& text) {
    std::array<double, 4> v{};
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        auto comma = text.find(',', pos);
        if ((i < 3) == (comma == std::string::npos)) throw error(errc::invalid_argument, "bbox needs minx,miny,maxx,maxy", text);
        std::string part = text.substr(pos, i < 3 ? comma - pos : std::string::npos);
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v[i]);
        if (ec != std::errc() || ptr != part.data() + part.size()) throw error(errc::invalid_argument, "bad bbox number", part);
        pos = comma + 1;
    }
    if (v[0] > v[2] || v[1] > v[3]) throw error(errc::invalid_argument, "bbox minimum exceeds maximum", text);
    return {v[0], v[1], v[2], v[3]};
}

// Export files live directly under the export directory.
std::string export_destination(const service_config& cfg, const std::string& name) {
    if (name.empty() || name == "." || name == ".." || name.find('/') != std::string::npos ||
        name.find('\\') != std::string::npos) {
        throw error(errc::invalid_argument, "export name must be a plain file name", name);
    }
    std::error_code ec;
    std::filesystem::create_directories(cfg.export_dir(), ec);
    if (ec) throw error(errc::io_failure, "cannot create export directory " + cfg.export_dir(), ec.message());
    return (std::filesystem::path(cfg.export_dir()) / name).string();
}

load_query zonal_query_from(const json& body) {
    load_query q = load_query_from_json(body);
    if (q.aggregate != aggregate_mode::zonal) {
        throw error(errc::invalid_query, "the HTTP API serves zonal aggregation only");
    }
    return q;
}

json manifest_summary(const export_manifest& m, const std::string& destination) {
    return json{{"destination", destination},
                {"manifest", manifest_path(destination)},
                {"fingerprint", m.fingerprint},
                {"format", std::string(to_string(m.format))},
                {"covered", m.covered.size()},
                {"created_at", format_iso(m.created_at)},
                {"updated_at", format_iso(m.updated_at)}};
}

}  // namespace

std::chrono::seconds service_config::interval_for(const std::string& product) const {
    if (auto it = product_scan_intervals.find(product); it != product_scan_intervals.end()) return it->second;
    return scan_interval;
}

std::string service_config::catalog_dir() const { return (std::filesystem::path(data_root) / "catalog").string(); }
std::string service_config::export_dir() const { return (std::filesystem::path(data_root) / "exports").string(); }

void service_config::validate() const {
    parse_listen(listen);
    if (data_root.empty()) throw error(errc::invalid_argument, "data_root must not be empty");
    if (scan_interval.count() < 0) throw error(errc::invalid_argument, "scan_interval must be >= 0");
    for (const auto& [p, s] : product_scan_intervals) {
        if (s.count() < 0) throw error(errc::invalid_argument, "scan interval of '" + p + "' must be >= 0");
    }
}

service_config parse_config(std::string_view text) {
    service_config cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw error(errc::invalid_argument, "config line " + std::to_string(line_no) + " is not key=value", t);
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key == "listen") {
            cfg.listen = value;
        } else if (key == "data_root") {
            cfg.data_root = value;
        } else if (key == "scan_interval") {
            cfg.scan_interval = parse_seconds(key, value);
        } else if (key.starts_with("scan_interval.") && key.size() > 14) {
            cfg.product_scan_intervals[key.substr(14)] = parse_seconds(key, value);
        } else if (key == "static_path") {
            cfg.static_path = value;
        } else if (key == "threads") {
            cfg.threads = static_cast<unsigned>(parse_seconds(key, value).count());
        } else {
            throw error(errc::invalid_argument, "unknown config key '" + key + "'", key);
        }
    }
    cfg.validate();
    return cfg;
}

void apply_env_overrides(service_config& cfg) {
    if (const char* v = std::getenv("MINICUBE_LISTEN"); v && *v) cfg.listen = v;
    if (const char* v = std::getenv("MINICUBE_DATA_ROOT"); v && *v) cfg.data_root = v;
}

service_config load_config(const std::string& path) {
    service_config cfg;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw error(errc::invalid_argument, "cannot read config file " + path, path);
        std::stringstream buf;
        buf << in.rdbuf();
        cfg = parse_config(buf.str());
    }
    apply_env_overrides(cfg);
    cfg.validate();
    return cfg;
}

std::pair<std::string, int> parse_listen(const std::string& listen) {
    std::string host = "127.0.0.1";
    std::string port_text = listen;
    if (auto colon = listen.rfind(':'); colon != std::string::npos) {
        host = listen.substr(0, colon);
        port_text = listen.substr(colon + 1);
        if (host.empty()) host = "0.0.0.0";
    }
    int port = -1;
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
        throw error(errc::invalid_argument, "bad listen address '" + listen + "'", listen);
    }
    return {host, port};
}

json table_to_json(const observation_table& t) {
    json rows = json::array();
    if (t.mode == aggregate_mode::zonal) {
        for (const auto& r : t.zonal) {
            json j{{"polygon_id", r.polygon_id}, {"product", r.product}, {"timestamp", format_iso(r.timestamp)}, {"measure", r.measure}};
            j.update(stats_fields(r.stats));
            rows.push_back(std::move(j));
        }
    } else {
        for (const auto& r : t.pixels) {
            rows.push_back({{"polygon_id", r.polygon_id},
                            {"product", r.product},
                            {"timestamp", format_iso(r.timestamp)},
                            {"measure", r.measure},
                            {"col", r.col},
                            {"row", r.row},
                            {"x", r.x},
                            {"y", r.y},
                            {"value", r.value}});
        }
    }
    return json{{"mode", std::string(to_string(t.mode))}, {"fingerprint", t.fingerprint}, {"rows", rows}};
}

load_query load_query_from_json(const json& j) {
    if (!j.is_object()) throw error(errc::invalid_query, "query must be a JSON object");
    load_query q;
    q.polygon_ids = string_list(j, "polygon_ids");
    q.products = string_list(j, "products");
    q.measures = string_list(j, "measures");
    if (j.contains("polygons")) q.inline_polygons = parse_geojson_polygons(j.at("polygons").dump(), std::nullopt);
    if (!j.contains("start") || !j.contains("end")) throw error(errc::invalid_query, "query needs start and end");
    try {
        q.start = parse_iso(j.at("start").get<std::string>());
        q.end = parse_iso(j.at("end").get<std::string>());
    } catch (const error& e) {
        throw error(errc::invalid_query, e.what(), e.detail());
    }
    if (j.contains("aggregate")) q.aggregate = aggregate_mode_from_string(j.at("aggregate").get<std::string>());
    q.validate();
    return q;
}

json scan_report_to_json(const scan_report& r) {
    json ingested = json::array();
    for (const auto& d : r.ingested) ingested.push_back(d);
    json failures = json::array();
    for (const auto& f : r.failures) failures.push_back({{"uri", f.uri}, {"code", f.code}, {"message", f.message}});
    return json{{"product", r.product}, {"ingested_count", r.ingested.size()}, {"ingested", ingested}, {"failures", failures}};
}

int http_status_for(errc code) {
    switch (code) {
        case errc::unknown_product:
        case errc::unknown_polygon:
        case errc::not_found:
            return 404;
        case errc::conflicting_definition:
        case errc::lock_held:
        case errc::fingerprint_mismatch:
            return 409;
        case errc::source_unavailable:
            return 502;
        default:
            return is_user_error(code) ? 400 : 500;
    }
}

scheduler::scheduler(catalog& cat) : _catalog(cat) {}

scheduler::~scheduler() { stop(); }

std::optional<scan_report> scheduler::tick(const std::string& product) {
    {
        std::lock_guard lock(_mutex);
        auto& c = _counters[product];
        if (c.running) {
            ++c.skipped;
            return std::nullopt;
        }
        c.running = true;
    }
    scan_report report;
    report.product = product;
    try {
        report = _catalog.scan_source(product);
        for (const auto& f : report.failures) log(log_level::warn, "scan " + product + ": " + f.uri + ": " + f.message);
        if (!report.ingested.empty()) {
            log(log_level::info, "scan " + product + ": ingested " + std::to_string(report.ingested.size()) + " scene(s)");
        }
    } catch (const error& e) {
        log(log_level::warn, "scan " + product + " failed: " + e.what());
        report.failures.push_back({"", std::string(errc_name(e.code())), e.what()});
    } catch (const std::exception& e) {
        log(log_level::error, "scan " + product + " failed: " + e.what());
        report.failures.push_back({"", std::string(errc_name(errc::internal)), e.what()});
    }
    std::lock_guard lock(_mutex);
    auto& c = _counters[product];
    c.running = false;
    ++c.completed;
    return report;
}

void scheduler::schedule(const std::string& product, std::chrono::milliseconds interval) {
    if (interval.count() <= 0) return;
    std::lock_guard lock(_mutex);
    if (_stopping || _threads.contains(product)) return;
    _threads.emplace(product, std::thread([this, product, interval] {
        using clock = std::chrono::steady_clock;
        auto next = clock::now();
        while (true) {
            {
                std::unique_lock lock(_mutex);
                if (_wake.wait_until(lock, next, [this] { return _stopping; })) return;
            }
            auto started = clock::now();
            tick(product);
            next = started + interval;
            // ticks that fell inside a long scan are dropped, not queued
            auto now = clock::now();
            if (next <= now) {
                auto missed = (now - next) / interval + 1;
                next += missed * interval;
                std::lock_guard lock(_mutex);
                _counters[product].skipped += static_cast<std::size_t>(missed);
            }
        }
    }));
}

void scheduler::stop() {
    std::map<std::string, std::thread> threads;
    {
        std::lock_guard lock(_mutex);
        _stopping = true;
        threads.swap(_threads);
    }
    _wake.notify_all();
    for (auto& [_, t] : threads) t.join();
}

std::size_t scheduler::completed_ticks(const std::string& product) const {
    std::lock_guard lock(_mutex);
    auto it = _counters.find(product);
    return it == _counters.end() ? 0 : it->second.completed;
}

std::size_t scheduler::skipped_ticks(const std::string& product) const {
    std::lock_guard lock(_mutex);
    auto it = _counters.find(product);
    return it == _counters.end() ? 0 : it->second.skipped;
}

server::server(service_config cfg)
    : _config(std::move(cfg)),
      _catalog(catalog::open_directory(_config.catalog_dir())),
      _scheduler(*_catalog),
      _http(std::make_unique<httplib::Server>()) {
    _config.validate();
    // httplib defaults to SO_REUSEPORT, which would let a second instance share the port
    _http->set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    install_routes();
}

server::~server() { stop(); }

int server::bind() {
    if (_port >= 0) return _port;
    auto [host, port] = parse_listen(_config.listen);
    if (port == 0) {
        _port = _http->bind_to_any_port(host);
        if (_port < 0) throw error(errc::io_failure, "cannot bind " + host, _config.listen);
    } else {
        if (!_http->bind_to_port(host, port)) throw error(errc::io_failure, "cannot bind " + _config.listen + " (address in use?)", _config.listen);
        _port = port;
    }
    return _port;
}

void server::run() {
    bind();
    for (const auto& p : _catalog->products()) schedule_product(p.name);
    log(log_level::info, "listening on port " + std::to_string(_port));
    if (!_http->listen_after_bind()) throw error(errc::io_failure, "server stopped unexpectedly");
}

void server::start() {
    bind();
    _thread = std::thread([this] {
        try {
            run();
        } catch (const std::exception& e) {
            log(log_level::error, e.what());
        }
    });
    _http->wait_until_ready();
}

void server::stop() {
    _scheduler.stop();
    if (_http) _http->stop();
    if (_thread.joinable()) _thread.join();
}

void server::schedule_product(const std::string& product) {
    auto interval = _config.interval_for(product);
    if (interval.count() > 0) _scheduler.schedule(product, std::chrono::duration_cast<std::chrono::milliseconds>(interval));
}

void server::install_routes() {
    auto& http = *_http;
    engine_options eopts;
    eopts.threads = _config.threads;

    http.Get("/healthz", guarded([this](const httplib::Request&, httplib::Response& res) {
        send_json(res, {{"status", "ok"},
                        {"products", _catalog->products().size()},
                        {"datasets", _catalog->datasets().size()},
                        {"polygons", _catalog->polygons().size()},
                        {"annotations", _catalog->annotations().size()}});
    }));

    http.Post("/products", guarded([this](const httplib::Request& req, httplib::Response& res) {
        if (req.is_multipart_form_data()) {
            auto field = [&](const char* key) { return req.has_file(key) ? req.get_file_value(key).content : std::string(); };
            std::vector<sample_file> samples;
            for (const auto& f : req.get_file_values("sample")) {
                auto* p = reinterpret_cast<const std::byte*>(f.content.data());
                samples.push_back({f.filename.empty() ? f.name : f.filename, std::vector<std::byte>(p, p + f.content.size())});
            }
            if (samples.empty()) throw error(errc::invalid_argument, "multipart request carries no 'sample' file");
            auto def = infer_product_definition(samples, field("name"), field("rule"), field("timestamp_format"));
            if (auto kind = field("source_kind"); !kind.empty()) def.source = source_kind_from_string(kind);
            def.source_root = field("source_root");
            if (field("register") == "false") {
                send_json(res, def);
                return;
            }
            _catalog->register_product(def);
            schedule_product(def.name);
            send_json(res, def, 201);
            return;
        }
        auto def = parse_body(req).get<product_definition>();
        _catalog->register_product(def);
        schedule_product(def.name);
        send_json(res, def, 201);
    }));

    http.Get("/products", guarded([this](const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        for (const auto& p : _catalog->products()) out.push_back(p);
        send_json(res, out);
    }));

    http.Post("/datasets/scan", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto product = required_param(req, "product");
        send_json(res, scan_report_to_json(_catalog->scan_source(product)));
    }));

    http.Get("/datasets", guarded([this](const httplib::Request& req, httplib::Response& res) {
        dataset_filter f;
        f.product = param(req, "product");
        if (f.product && f.product->empty()) f.product.reset();
        if (f.product) _catalog->product(*f.product);
        if (auto b = param(req, "bbox")) {
            f.area = parse_bbox(*b);
            f.area_crs = crs_id::wgs84();
            if (auto c = param(req, "crs")) f.area_crs = parse_crs(*c);
        }
        if (auto s = param(req, "start")) f.start = parse_iso(*s);
        if (auto e = param(req, "end")) f.end = parse_iso(*e);
        json out = json::array();
        for (const auto& d : _catalog->query_datasets(f)) out.push_back(d);
        send_json(res, out);
    }));

    http.Post("/polygons", guarded([this](const httplib::Request& req, httplib::Response& res) {
        std::optional<crs_id> crs;
        if (auto c = param(req, "crs")) crs = parse_crs(*c);
        auto n = _catalog->ingest_polygons(req.body, crs);
        send_json(res, {{"imported", n}}, 201);
    }));

    http.Get("/polygons", guarded([this](const httplib::Request&, httplib::Response& res) {
        json features = json::array();
        for (const auto& p : _catalog->polygons()) features.push_back(to_geojson_feature(p));
        send_json(res, {{"type", "FeatureCollection"}, {"features", features}});
    }));

    http.Get(R"(/polygons/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        auto p = _catalog->polygon(id);
        if (!p) throw error(errc::unknown_polygon, "unknown polygon '" + id + "'", id);
        send_json(res, to_geojson_feature(*p));
    }));

    http.Post("/query", guarded([this, eopts](const httplib::Request& req, httplib::Response& res) {
        auto q = zonal_query_from(parse_body(req));
        auto table = engine(*_catalog, eopts).load(q);
        if (req.get_header_value("Accept").find("text/csv") != std::string::npos) {
            res.set_content(table_to_csv(table), "text/csv");
        } else {
            send_json(res, table_to_json(table));
        }
    }));

    http.Get("/timeseries", guarded([this, eopts](const httplib::Request& req, httplib::Response& res) {
        auto polygon_id = required_param(req, "polygon_id");
        auto product = required_param(req, "product");
        auto measure = required_param(req, "measure");
        instant start = parse_iso(required_param(req, "start"));
        instant end = parse_iso(required_param(req, "end"));
        json points = json::array();
        for (const auto& [ts, stats] : engine(*_catalog, eopts).timeseries(polygon_id, product, measure, start, end)) {
            json p{{"timestamp", format_iso(ts)}};
            p.update(stats_fields(stats));
            points.push_back(std::move(p));
        }
        send_json(res, {{"polygon_id", polygon_id}, {"product", product}, {"measure", measure}, {"points", points}});
    }));

    auto export_geometry = [this](const load_query& q) {
        std::map<std::string, geo_polygon> geometry;
        for (const auto& id : q.polygon_ids) {
            if (auto p = _catalog->polygon(id)) geometry.emplace(id, *p);
        }
        for (const auto& p : q.inline_polygons) geometry.emplace(p.id, p);
        return geometry;
    };

    http.Post("/export", guarded([this, eopts, export_geometry](const httplib::Request& req, httplib::Response& res) {
        json body = parse_body(req);
        auto q = zonal_query_from(body.at("query"));
        auto dest = export_destination(_config, body.at("name").get<std::string>());
        auto format = export_format_from_string(body.value("format", std::string("csv")));
        auto table = engine(*_catalog, eopts).load(q);
        export_options opts;
        if (format == export_format::geojson) opts.geometry = export_geometry(q);
        auto m = export_table(table, format, dest, opts);
        json out = manifest_summary(m, dest);
        out["rows"] = table.size();
        send_json(res, out, 201);
    }));

    http.Post("/export/merge", guarded([this, eopts](const httplib::Request& req, httplib::Response& res) {
        json body = parse_body(req);
        auto q = zonal_query_from(body.at("query"));
        auto dest = export_destination(_config, body.at("name").get<std::string>());
        auto before = read_manifest(dest).covered.size();
        auto m = merge_incremental(dest, engine(*_catalog, eopts).load(q));
        json out = manifest_summary(m, dest);
        out["added"] = m.covered.size() - before;
        send_json(res, out);
    }));

    http.Post("/annotations", guarded([this](const httplib::Request& req, httplib::Response& res) {
        json body = parse_body(req);
        auto label = body.at("label").get<std::string>();
        auto author = body.value("author", std::string());
        std::optional<std::string> note;
        if (body.contains("note") && !body.at("note").is_null()) note = body.at("note").get<std::string>();
        if (body.contains("polygon_ids")) {
            auto ids = body.at("polygon_ids").get<std::vector<std::string>>();
            for (const auto& id : ids) {
                if (!_catalog->polygon(id)) throw error(errc::unknown_polygon, "unknown polygon '" + id + "'", id);
            }
            json out = json::array();
            for (const auto& id : ids) out.push_back(_catalog->add_annotation(id, label, author, note));
            send_json(res, out, 201);
            return;
        }
        send_json(res, _catalog->add_annotation(body.at("polygon_id").get<std::string>(), label, author, note), 201);
    }));

    http.Get("/annotations", guarded([this](const httplib::Request& req, httplib::Response& res) {
        json out = json::array();
        for (const auto& a : _catalog->annotations(param(req, "polygon_id"))) out.push_back(a);
        send_json(res, out);
    }));

    if (!_config.static_path.empty()) {
        if (!http.set_mount_point("/", _config.static_path)) {
            log(log_level::warn, "static path " + _config.static_path + " is not a directory");
        }
    }
}

}  // namespace minicube
