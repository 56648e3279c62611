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

#include "minicube/export.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "minicube/error.hpp"
#include "minicube/json_codec.hpp"

namespace minicube {

using nlohmann::json;

namespace {

constexpr const char* manifest_header = "minicube-manifest 1";
constexpr const char* zonal_header = "polygon_id,product,timestamp,measure,count,valid_count,mean,std,min,max,median";
constexpr const char* pixel_header = "polygon_id,product,timestamp,measure,col,row,x,y,value";
constexpr const char* crlf = "\r\n";

std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string xml_escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct csv_record {
    std::string raw;  // record text without its line terminator
    std::vector<std::string> fields;
};

std::vector<csv_record> parse_csv(std::string_view text) {
    std::vector<csv_record> records;
    std::size_t i = 0;
    while (i < text.size()) {
        csv_record rec;
        std::size_t start = i;
        std::string field;
        bool in_quotes = false;
        bool done = false;
        while (i < text.size() && !done) {
            char c = text[i];
            if (in_quotes) {
                if (c == '"') {
                    if (i + 1 < text.size() && text[i + 1] == '"') {
                        field += '"';
                        i += 2;
                        continue;
                    }
                    in_quotes = false;
                } else {
                    field += c;
                }
                ++i;
                continue;
            }
            switch (c) {
                case '"': in_quotes = true; ++i; break;
                case ',': rec.fields.push_back(std::move(field)); field.clear(); ++i; break;
                case '\r':
                case '\n': done = true; break;
                default: field += c; ++i;
            }
        }
        if (in_quotes) throw error(errc::corrupt_manifest, "unterminated quoted CSV field");
        rec.fields.push_back(std::move(field));
        rec.raw = std::string(text.substr(start, i - start));
        if (i < text.size() && text[i] == '\r') ++i;
        if (i < text.size() && text[i] == '\n') ++i;
        if (!(rec.raw.empty() && rec.fields.size() == 1)) records.push_back(std::move(rec));
    }
    return records;
}

double parse_real(const std::string& s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw error(errc::corrupt_manifest, "bad number '" + s + "' in CSV");
    return v;
}

long long parse_int(const std::string& s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw error(errc::corrupt_manifest, "bad integer '" + s + "' in CSV");
    return v;
}

std::string zonal_line(const zonal_row& r) {
    std::string line = quote(r.polygon_id) + ',' + quote(r.product) + ',' + format_iso(r.timestamp) + ',' + quote(r.measure) +
                       ',' + std::to_string(r.stats.count) + ',' + std::to_string(r.stats.valid_count);
    if (r.stats.summary) {
        const auto& s = *r.stats.summary;
        for (double v : {s.mean, s.stddev, s.min, s.max, s.median}) line += ',' + format_real(v);
    } else {
        line += ",,,,,";
    }
    return line;
}

std::string pixel_line(const pixel_row& r) {
    return quote(r.polygon_id) + ',' + quote(r.product) + ',' + format_iso(r.timestamp) + ',' + quote(r.measure) + ',' +
           std::to_string(r.col) + ',' + std::to_string(r.row) + ',' + format_real(r.x) + ',' + format_real(r.y) + ',' +
           format_real(r.value);
}

// ordering of merged files: key fields, then row-major pixels
struct sort_key {
    std::string polygon_id;
    instant timestamp;
    std::string measure;
    std::string product;
    long long row = 0;
    long long col = 0;
    friend auto operator<=>(const sort_key&, const sort_key&) = default;
};

struct keyed_line {
    sort_key order;
    row_key key;
    std::string text;
};

keyed_line keyed_from_record(const csv_record& rec, aggregate_mode mode) {
    std::size_t expected = mode == aggregate_mode::zonal ? 11 : 9;
    if (rec.fields.size() != expected) throw error(errc::corrupt_manifest, "CSV row has " + std::to_string(rec.fields.size()) + " fields");
    keyed_line k;
    instant ts;
    try {
        ts = parse_iso(rec.fields[2]);
    } catch (const error&) {
        throw error(errc::corrupt_manifest, "bad timestamp '" + rec.fields[2] + "' in CSV");
    }
    k.key = {rec.fields[0], rec.fields[1], ts, rec.fields[3]};
    k.order = {rec.fields[0], ts, rec.fields[3], rec.fields[1], 0, 0};
    if (mode == aggregate_mode::per_pixel) {
        k.order.col = parse_int(rec.fields[4]);
        k.order.row = parse_int(rec.fields[5]);
    }
    k.text = rec.raw;
    return k;
}

// File lock held for the lifetime of the object.
class lock_file {
   public:
    explicit lock_file(std::string path) : _path(std::move(path)) {
        int fd = ::open(_path.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
        if (fd < 0) {
            if (errno == EEXIST) throw error(errc::lock_held, "another export holds " + _path, _path);
            throw error(errc::io_failure, "cannot create lock " + _path);
        }
        ::close(fd);
    }
    ~lock_file() { std::remove(_path.c_str()); }
    lock_file(const lock_file&) = delete;
    lock_file& operator=(const lock_file&) = delete;

   private:
    std::string _path;
};

void write_file(const std::string& path, const std::string& content) {
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw error(errc::io_failure, "cannot create " + path);
    std::size_t done = 0;
    while (done < content.size()) {
        ssize_t n = ::write(fd, content.data() + done, content.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            throw error(errc::io_failure, "write failed on " + path);
        }
        done += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
}

std::string read_text(const std::string& path, errc missing) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(missing, "cannot read " + path, path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string manifest_text(const export_manifest& m) {
    json covered = json::array();
    for (const auto& k : m.covered) covered.push_back({k.polygon_id, k.product, format_iso(k.timestamp), k.measure});
    json j{{"version", m.version},
           {"fingerprint", m.fingerprint},
           {"mode", std::string(to_string(m.mode))},
           {"format", std::string(to_string(m.format))},
           {"created_at", format_iso(m.created_at)},
           {"updated_at", format_iso(m.updated_at)},
           {"covered", covered}};
    return std::string(manifest_header) + "\n" + j.dump() + "\n";
}

// Writes data and manifest to temporaries, then renames data before manifest.
void commit(const std::string& destination, const std::string& data, const export_manifest& m,
            const export_options& options) {
    const std::string data_tmp = destination + ".tmp";
    const std::string manifest_tmp = manifest_path(destination) + ".tmp";
    try {
        write_file(data_tmp, data);
        write_file(manifest_tmp, manifest_text(m));
        if (options.before_commit) options.before_commit();
    } catch (...) {
        std::remove(data_tmp.c_str());
        std::remove(manifest_tmp.c_str());
        throw;
    }
    if (std::rename(data_tmp.c_str(), destination.c_str()) != 0) throw error(errc::io_failure, "cannot replace " + destination);
    if (std::rename(manifest_tmp.c_str(), manifest_path(destination).c_str()) != 0) {
        throw error(errc::io_failure, "cannot replace " + manifest_path(destination));
    }
}

std::set<row_key> keys_of(const observation_table& t) {
    std::set<row_key> keys;
    for (const auto& r : t.zonal) keys.insert({r.polygon_id, r.product, r.timestamp, r.measure});
    for (const auto& r : t.pixels) keys.insert({r.polygon_id, r.product, r.timestamp, r.measure});
    return keys;
}

json stats_json(const zonal_stats& s) {
    json j{{"count", s.count}, {"valid_count", s.valid_count}};
    if (s.summary) {
        j["mean"] = s.summary->mean;
        j["std"] = s.summary->stddev;
        j["min"] = s.summary->min;
        j["max"] = s.summary->max;
        j["median"] = s.summary->median;
    }
    return j;
}

std::string fmt3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    if (s == "-0.000") s = "0.000";
    return s;
}

}  // namespace

std::string_view to_string(export_format f) { return f == export_format::csv ? "csv" : "geojson"; }

export_format export_format_from_string(std::string_view s) {
    if (s == "csv") return export_format::csv;
    if (s == "geojson" || s == "json") return export_format::geojson;
    throw error(errc::invalid_argument, "unknown export format '" + std::string(s) + "'");
}

std::string manifest_path(const std::string& destination) { return destination + ".manifest"; }

export_manifest read_manifest(const std::string& destination) {
    std::string text = read_text(manifest_path(destination), errc::corrupt_manifest);
    auto nl = text.find('\n');
    if (nl == std::string::npos || text.substr(0, nl) != manifest_header) {
        throw error(errc::corrupt_manifest, manifest_path(destination) + " lacks the manifest header");
    }
    export_manifest m;
    try {
        json j = json::parse(text.substr(nl + 1));
        m.version = j.at("version").get<int>();
        m.fingerprint = j.at("fingerprint").get<std::string>();
        m.mode = aggregate_mode_from_string(j.at("mode").get<std::string>());
        m.format = export_format_from_string(j.at("format").get<std::string>());
        m.created_at = parse_iso(j.at("created_at").get<std::string>());
        m.updated_at = parse_iso(j.at("updated_at").get<std::string>());
        for (const auto& k : j.at("covered")) {
            m.covered.insert({k.at(0).get<std::string>(), k.at(1).get<std::string>(), parse_iso(k.at(2).get<std::string>()),
                              k.at(3).get<std::string>()});
        }
    } catch (const std::exception& e) {
        throw error(errc::corrupt_manifest, manifest_path(destination) + " is unreadable", e.what());
    }
    if (m.version != 1) throw error(errc::corrupt_manifest, "unsupported manifest version " + std::to_string(m.version));
    return m;
}

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
    (void)ec;
    return std::string(buf, ptr);
}

std::string table_to_csv(const observation_table& t) {
    std::string out = t.mode == aggregate_mode::zonal ? zonal_header : pixel_header;
    out += crlf;
    if (t.mode == aggregate_mode::zonal) {
        for (const auto& r : t.zonal) {
            out += zonal_line(r);
            out += crlf;
        }
    } else {
        for (const auto& r : t.pixels) {
            out += pixel_line(r);
            out += crlf;
        }
    }
    return out;
}

observation_table table_from_csv(std::string_view csv) {
    auto records = parse_csv(csv);
    if (records.empty()) throw error(errc::corrupt_manifest, "CSV has no header");
    observation_table t;
    if (records.front().raw == zonal_header) {
        t.mode = aggregate_mode::zonal;
    } else if (records.front().raw == pixel_header) {
        t.mode = aggregate_mode::per_pixel;
    } else {
        throw error(errc::corrupt_manifest, "unrecognised CSV header '" + records.front().raw + "'");
    }
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& f = records[i].fields;
        keyed_line k = keyed_from_record(records[i], t.mode);
        if (t.mode == aggregate_mode::zonal) {
            zonal_row r{k.key.polygon_id, k.key.product, k.key.timestamp, k.key.measure, {}};
            r.stats.count = static_cast<std::size_t>(parse_int(f[4]));
            r.stats.valid_count = static_cast<std::size_t>(parse_int(f[5]));
            if (!f[6].empty()) {
                r.stats.summary = zonal_summary{parse_real(f[6]), parse_real(f[7]), parse_real(f[8]), parse_real(f[9]),
                                                parse_real(f[10])};
            }
            t.zonal.push_back(std::move(r));
        } else {
            t.pixels.push_back({k.key.polygon_id, k.key.product, k.key.timestamp, k.key.measure,
                                static_cast<int>(parse_int(f[4])), static_cast<int>(parse_int(f[5])), parse_real(f[6]),
                                parse_real(f[7]), parse_real(f[8])});
        }
    }
    return t;
}

std::string table_to_geojson(const observation_table& t, const std::map<std::string, geo_polygon>& geometry) {
    if (t.mode != aggregate_mode::zonal) {
        throw error(errc::invalid_argument, "GeoJSON export needs a zonal table");
    }
    std::map<std::string, json> props;
    std::vector<std::string> order;
    for (const auto& r : t.zonal) {
        auto [it, inserted] = props.emplace(r.polygon_id, json::object());
        if (inserted) order.push_back(r.polygon_id);
        std::string key = r.measure + "@" + format_iso(r.timestamp);
        auto& slot = it->second[key];
        if (!slot.contains(r.product)) slot[r.product] = stats_json(r.stats);
    }
    json features = json::array();
    for (const auto& id : order) {
        json f{{"type", "Feature"}, {"id", id}, {"properties", props[id]}};
        auto g = geometry.find(id);
        f["geometry"] = g == geometry.end() ? json(nullptr) : to_geojson_geometry(g->second);
        features.push_back(std::move(f));
    }
    return json{{"type", "FeatureCollection"}, {"features", features}}.dump() + "\n";
}

export_manifest export_table(const observation_table& t, export_format format, const std::string& destination,
                             const export_options& options) {
    std::string data = format == export_format::csv ? table_to_csv(t) : table_to_geojson(t, options.geometry);
    lock_file lock(destination + ".lock");
    export_manifest m;
    m.fingerprint = t.fingerprint;
    m.mode = t.mode;
    m.format = format;
    m.covered = keys_of(t);
    m.created_at = now_utc();
    m.updated_at = m.created_at;
    commit(destination, data, m, options);
    return m;
}

export_manifest merge_incremental(const std::string& destination, const observation_table& t_new,
                                  const export_options& options) {
    lock_file lock(destination + ".lock");
    export_manifest m = read_manifest(destination);
    if (m.fingerprint != t_new.fingerprint || m.mode != t_new.mode) {
        throw error(errc::fingerprint_mismatch, "table was produced by a different query than " + destination);
    }
    if (m.format != export_format::csv) throw error(errc::invalid_argument, "incremental merge supports CSV exports only");

    auto records = parse_csv(read_text(destination, errc::corrupt_manifest));
    const char* header = m.mode == aggregate_mode::zonal ? zonal_header : pixel_header;
    if (records.empty() || records.front().raw != header) {
        throw error(errc::corrupt_manifest, destination + " does not start with the expected header");
    }
    std::vector<keyed_line> lines;
    std::set<row_key> present;
    for (std::size_t i = 1; i < records.size(); ++i) {
        lines.push_back(keyed_from_record(records[i], m.mode));
        present.insert(lines.back().key);
    }
    if (present != m.covered) {
        throw error(errc::corrupt_manifest, "manifest keys do not match the rows of " + destination);
    }

    std::set<row_key> added;
    auto admit = [&](const row_key& k) {
        if (m.covered.contains(k)) return false;
        // zonal keys are unique; first occurrence wins
        if (m.mode == aggregate_mode::zonal && added.contains(k)) return false;
        added.insert(k);
        return true;
    };
    for (const auto& r : t_new.zonal) {
        row_key k{r.polygon_id, r.product, r.timestamp, r.measure};
        if (!admit(k)) continue;
        lines.push_back({{r.polygon_id, r.timestamp, r.measure, r.product, 0, 0}, k, zonal_line(r)});
    }
    for (const auto& r : t_new.pixels) {
        row_key k{r.polygon_id, r.product, r.timestamp, r.measure};
        if (!m.covered.contains(k)) {
            added.insert(k);
            lines.push_back({{r.polygon_id, r.timestamp, r.measure, r.product, r.row, r.col}, k, pixel_line(r)});
        }
    }
    std::stable_sort(lines.begin(), lines.end(), [](const keyed_line& a, const keyed_line& b) { return a.order < b.order; });

    std::string data = std::string(header) + crlf;
    for (const auto& l : lines) {
        data += l.text;
        data += crlf;
    }
    m.covered.insert(added.begin(), added.end());
    m.updated_at = now_utc();
    commit(destination, data, m, options);
    return m;
}

rgb ramp_color(double value, double lo, double hi) {
    double t = hi > lo ? (value - lo) / (hi - lo) : 0.5;
    if (!std::isfinite(t)) t = 0.5;
    t = std::clamp(t, 0.0, 1.0);
    auto mix = [t](std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>(std::lround(a + (static_cast<double>(b) - a) * t));
    };
    return {mix(ramp_low.r, ramp_high.r), mix(ramp_low.g, ramp_high.g), mix(ramp_low.b, ramp_high.b)};
}

std::string to_hex(rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

std::string render_polygon_svg(const geo_polygon& p, const std::optional<region_coloring>& coloring) {
    if (p.exterior.empty()) throw error(errc::invalid_argument, "cannot render an empty polygon");
    constexpr double canvas = 512.0;
    bbox b = p.bounds();
    double w = b.max_x - b.min_x, h = b.max_y - b.min_y;
    if (!(w > 0)) w = 1;
    if (!(h > 0)) h = 1;
    const double mx = 0.05 * w, my = 0.05 * h;
    const double span_x = w + 2 * mx, span_y = h + 2 * my;
    const double scale = canvas / std::max(span_x, span_y);
    const double width = span_x * scale, height = span_y * scale;
    auto sx = [&](double x) { return fmt3((x - b.min_x + mx) * scale); };
    auto sy = [&](double y) { return fmt3((b.max_y + my - y) * scale); };

    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt3(width) + "\" height=\"" +
           fmt3(height) + "\" viewBox=\"0 0 " + fmt3(width) + " " + fmt3(height) + "\">\n";
    out += "<title>" + xml_escape(p.id) + "</title>\n";

    if (coloring) {
        const auto& reg = coloring->region;
        out += "<g id=\"cells\" stroke=\"none\">\n";
        for (int r = 0; r < reg.height; ++r) {
            for (int c = 0; c < reg.width; ++c) {
                std::size_t i = static_cast<std::size_t>(r) * reg.width + c;
                if (!reg.mask[i] || i >= coloring->values.size() || std::isnan(coloring->values[i])) continue;
                double col = reg.col + c, row = reg.row + r;
                std::string d = "M";
                bool first = true;
                for (auto [dc, dr] : {std::pair{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}) {
                    point w_pt = pixel_to_world(coloring->transform, col + dc, row + dr);
                    d += (first ? "" : " L") + sx(w_pt.x) + " " + sy(w_pt.y);
                    first = false;
                }
                d += " Z";
                out += "<path d=\"" + d + "\" fill=\"" + to_hex(ramp_color(coloring->values[i], coloring->lo, coloring->hi)) +
                       "\"/>\n";
            }
        }
        out += "</g>\n";
    }

    std::string d;
    auto subpath = [&](const ring& r) {
        for (std::size_t i = 0; i < r.size(); ++i) d += (i == 0 ? (d.empty() ? "M" : " M") : " L") + sx(r[i].x) + " " + sy(r[i].y);
        d += " Z";
    };
    subpath(p.exterior);
    for (const auto& hole : p.holes) subpath(hole);
    out += "<path id=\"outline\" d=\"" + d + "\" fill=\"none\" fill-rule=\"evenodd\" stroke=\"#222222\" stroke-width=\"1.5\"/>\n";
    out += "</svg>\n";
    return out;
}

std::string render_timeseries_svg(std::span<const std::pair<instant, double>> series, const std::string& title) {
    if (series.empty()) throw error(errc::invalid_argument, "cannot plot an empty series");
    std::vector<std::pair<instant, double>> pts(series.begin(), series.end());
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    constexpr double width = 640, height = 320, left = 70, right = 20, top = 30, bottom = 60;
    const double plot_w = width - left - right, plot_h = height - top - bottom;

    double lo = pts.front().second, hi = lo;
    for (const auto& [_, v] : pts) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double pad = (hi - lo) * 0.05;
    if (!(pad > 0)) pad = std::abs(lo) > 0 ? std::abs(lo) * 0.05 : 0.5;
    lo -= pad;
    hi += pad;

    const auto t0 = pts.front().first.time_since_epoch().count();
    const auto t1 = pts.back().first.time_since_epoch().count();
    auto px = [&](instant t) {
        if (t1 == t0) return left + plot_w / 2;
        return left + plot_w * static_cast<double>(t.time_since_epoch().count() - t0) / static_cast<double>(t1 - t0);
    };
    auto py = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"640\" height=\"320\" viewBox=\"0 0 640 320\" "
           "font-family=\"sans-serif\" font-size=\"11\">\n";
    if (!title.empty()) out += "<text x=\"" + fmt3(width / 2) + "\" y=\"18\" text-anchor=\"middle\">" + xml_escape(title) + "</text>\n";
    out += "<g id=\"axes\" stroke=\"#444444\">\n";
    out += "<line x1=\"" + fmt3(left) + "\" y1=\"" + fmt3(top + plot_h) + "\" x2=\"" + fmt3(left + plot_w) + "\" y2=\"" +
           fmt3(top + plot_h) + "\"/>\n";
    out += "<line x1=\"" + fmt3(left) + "\" y1=\"" + fmt3(top) + "\" x2=\"" + fmt3(left) + "\" y2=\"" + fmt3(top + plot_h) + "\"/>\n";
    out += "</g>\n<g id=\"yticks\" text-anchor=\"end\">\n";
    for (int i = 0; i <= 4; ++i) {
        double v = lo + (hi - lo) * i / 4.0;
        char label[32];
        std::snprintf(label, sizeof label, "%.4g", v);
        out += "<text x=\"" + fmt3(left - 6) + "\" y=\"" + fmt3(py(v) + 4) + "\">" + label + "</text>\n";
    }
    out += "</g>\n<g id=\"xticks\" text-anchor=\"middle\">\n";
    const std::size_t max_labels = 6;
    const std::size_t step = std::max<std::size_t>(1, (pts.size() + max_labels - 1) / max_labels);
    for (std::size_t i = 0; i < pts.size(); i += step) {
        out += "<text x=\"" + fmt3(px(pts[i].first)) + "\" y=\"" + fmt3(top + plot_h + 18) + "\">" +
               format_iso(pts[i].first).substr(0, 10) + "</text>\n";
    }
    out += "</g>\n";
    if (pts.size() >= 2) {
        out += "<polyline id=\"series\" fill=\"none\" stroke=\"#1a9850\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            out += (i ? " " : "") + fmt3(px(pts[i].first)) + "," + fmt3(py(pts[i].second));
        }
        out += "\"/>\n";
    }
    out += "<g id=\"markers\" fill=\"#1a9850\">\n";
    for (const auto& [t, v] : pts) out += "<circle cx=\"" + fmt3(px(t)) + "\" cy=\"" + fmt3(py(v)) + "\" r=\"3\"/>\n";
    out += "</g>\n</svg>\n";
    return out;
}

}  // namespace minicube
