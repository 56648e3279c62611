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

#ifndef MINICUBE_SERVICE_HPP
#define MINICUBE_SERVICE_HPP

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "minicube/catalog.hpp"
#include "minicube/engine.hpp"
#include "minicube/error.hpp"
#include "minicube/export.hpp"

namespace httplib {
class Server;
}

namespace minicube {

/**
 * Flat key=value configuration. Recognised keys: listen, data_root,
 * scan_interval (seconds, all products), scan_interval.<product>,
 * static_path, threads. Lines starting with '#' are comments.
 */
struct service_config {
    std::string listen = "127.0.0.1:8080";
    std::string data_root = ".";
    std::chrono::seconds scan_interval{0};  // 0 = scanning disabled
    std::map<std::string, std::chrono::seconds> product_scan_intervals;
    std::string static_path;
    unsigned threads = 0;

    std::chrono::seconds interval_for(const std::string& product) const;
    std::string catalog_dir() const;
    std::string export_dir() const;
    void validate() const;
};

service_config parse_config(std::string_view text);
/// MINICUBE_LISTEN and MINICUBE_DATA_ROOT take precedence over file values.
void apply_env_overrides(service_config& cfg);
/// Reads `path` when non-empty, then applies environment overrides.
service_config load_config(const std::string& path);

/// Splits "host:port"; a bare port binds to 127.0.0.1.
std::pair<std::string, int> parse_listen(const std::string& listen);

nlohmann::json table_to_json(const observation_table& t);
load_query load_query_from_json(const nlohmann::json& j);
nlohmann::json scan_report_to_json(const scan_report& r);

/// HTTP status for an error code: 404 unknown ids, 409 conflicts, 500 internal, 400 otherwise.
int http_status_for(errc code);

/**
 * Periodic source scanning, one background thread per product.
 *
 * Ticks start at fixed intervals measured from the previous tick start. A
 * tick that would overlap a running one for the same product is skipped.
 */
class scheduler {
   public:
    explicit scheduler(catalog& cat);
    ~scheduler();
    scheduler(const scheduler&) = delete;
    scheduler& operator=(const scheduler&) = delete;

    /// One scan; nullopt when a scan of `product` is already running. Never throws.
    std::optional<scan_report> tick(const std::string& product);

    /// Starts the periodic task for `product` unless interval is 0 or it already runs.
    void schedule(const std::string& product, std::chrono::milliseconds interval);
    void stop();

    std::size_t completed_ticks(const std::string& product) const;
    std::size_t skipped_ticks(const std::string& product) const;

   private:
    struct counters {
        bool running = false;
        std::size_t completed = 0;
        std::size_t skipped = 0;
    };

    catalog& _catalog;
    mutable std::mutex _mutex;
    std::condition_variable _wake;
    bool _stopping = false;
    std::map<std::string, counters> _counters;
    std::map<std::string, std::thread> _threads;
};

/// The HTTP API over one catalog directory.
class server {
   public:
    explicit server(service_config cfg);
    ~server();
    server(const server&) = delete;
    server& operator=(const server&) = delete;

    /// Binds the listen address (port 0 picks a free port); throws io_failure when busy.
    int bind();
    /// Serves until stop(); binds first if needed.
    void run();
    /// Runs in a background thread and returns once the socket accepts connections.
    void start();
    void stop();

    int port() const { return _port; }
    catalog& cat() { return *_catalog; }
    scheduler& scans() { return _scheduler; }
    const service_config& config() const { return _config; }

   private:
    void install_routes();
    void schedule_product(const std::string& product);

    service_config _config;
    std::unique_ptr<catalog> _catalog;
    scheduler _scheduler;
    std::unique_ptr<httplib::Server> _http;
    std::thread _thread;
    int _port = -1;
};

/// Command-line entry point; returns the process exit code (0 ok, 1 user error, 2 internal error).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace minicube

#endif
