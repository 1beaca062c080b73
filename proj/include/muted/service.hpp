#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "muted/interchange.hpp"

namespace muted {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string adapter_url;  // e.g. http://127.0.0.1:8090; empty disables text input
    std::size_t max_chars = 2000;
    double adapter_timeout_s = 10.0;

    // MUTED_ADAPTER_URL, MUTED_PORT, MUTED_MAX_CHARS; unset values keep defaults.
    static ServiceConfig from_env();
};

struct HttpReply {
    int status = 200;
    json body;
};

// Fetches an attention record for raw text. Returns nullopt when the adapter
// cannot be reached; otherwise the adapter status and body.
struct AdapterResponse {
    int status = 0;
    std::string body;
};
using AdapterFetch =
    std::function<std::optional<AdapterResponse>(const std::string& text, const std::string& language)>;

// HTTP client for POST {adapter_url}/attend.
AdapterFetch http_adapter(const ServiceConfig& config);

// Request handlers, independent of the socket layer.
HttpReply handle_health();
HttpReply handle_analyze(const std::string& request_body, const ServiceConfig& config,
                         const AdapterFetch& adapter);

// Wraps cpp-httplib. Config is immutable after construction; handlers keep
// all per-request data on the stack.
class Service {
public:
    explicit Service(ServiceConfig config);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Binds (port 0 picks a free port) and serves on a background thread.
    // Returns the bound port.
    int start();
    // Binds and serves on the calling thread until stop().
    bool run();
    void stop();

    int port() const noexcept { return port_; }

private:
    struct Impl;
    ServiceConfig config_;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace muted
