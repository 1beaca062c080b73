#include "muted/service.hpp"

#include <cstdlib>
#include <stdexcept>

#include <httplib.h>

#include "muted/analyzer.hpp"
#include "muted/error.hpp"
#include "muted/utf8.hpp"

namespace muted {

ServiceConfig ServiceConfig::from_env() {
    ServiceConfig c;
    if (const char* v = std::getenv("MUTED_ADAPTER_URL"); v && *v) c.adapter_url = v;
    if (const char* v = std::getenv("MUTED_PORT"); v && *v) c.port = std::atoi(v);
    if (const char* v = std::getenv("MUTED_MAX_CHARS"); v && *v) {
        c.max_chars = static_cast<std::size_t>(std::strtoull(v, nullptr, 10));
    }
    return c;
}

AdapterFetch http_adapter(const ServiceConfig& config) {
    const std::string url = config.adapter_url;
    const double timeout = config.adapter_timeout_s;
    return [url, timeout](const std::string& text,
                          const std::string& language) -> std::optional<AdapterResponse> {
        if (url.empty()) return std::nullopt;
        httplib::Client client(url);
        client.set_connection_timeout(std::chrono::duration<double>(std::min(timeout, 5.0)));
        client.set_read_timeout(std::chrono::duration<double>(timeout));
        const json req{{"text", text}, {"language", language}};
        auto res = client.Post("/attend", req.dump(), "application/json");
        if (!res) return std::nullopt;
        return AdapterResponse{res->status, res->body};
    };
}

namespace {

json error_body(const std::string& code, const std::string& message) {
    return {{"error", code}, {"message", message}, {"schema_version", kSchemaVersion}};
}

HttpReply fail(int status, const std::string& code, const std::string& message) {
    return {status, error_body(code, message)};
}

HttpReply invalid(const ValidationError& e, const std::string& code, int status = 400) {
    auto body = error_body(code, e.message());
    body["path"] = e.path();
    return {status, std::move(body)};
}

}  // namespace

HttpReply handle_health() {
    return {200, {{"status", "ok"}, {"schema_version", kSchemaVersion}}};
}

HttpReply handle_analyze(const std::string& request_body, const ServiceConfig& config,
                         const AdapterFetch& adapter) {
    json req;
    try {
        req = json::parse(request_body);
    } catch (const json::parse_error&) {
        return fail(400, "invalid_json", "request body is not valid JSON");
    }
    if (!req.is_object()) return fail(400, "invalid_request", "request body must be an object");

    AnalyzeOptions options;
    if (auto it = req.find("threshold"); it != req.end()) {
        if (!it->is_number()) return fail(400, "invalid_request", "threshold must be a number");
        options.extraction.threshold = it->get<double>();
        if (!(options.extraction.threshold >= 0.0 && options.extraction.threshold <= 1.0)) {
            return fail(400, "invalid_request", "threshold must lie in [0, 1]");
        }
    }
    if (auto it = req.find("mode"); it != req.end()) {
        const auto mode = it->is_string() ? parse_threshold_mode(it->get<std::string>()) : std::nullopt;
        if (!mode) return fail(400, "invalid_request", "mode must be \"relative\" or \"absolute\"");
        options.extraction.mode = *mode;
    }
    if (auto it = req.find("include_special"); it != req.end()) {
        if (!it->is_boolean()) return fail(400, "invalid_request", "include_special must be a boolean");
        options.extraction.include_special = it->get<bool>();
    }
    if (auto it = req.find("expand"); it != req.end()) {
        if (!it->is_boolean()) return fail(400, "invalid_request", "expand must be a boolean");
        options.roles.expand_modifiers = it->get<bool>();
    }
    if (auto it = req.find("palette"); it != req.end()) {
        const std::string p = it->is_string() ? it->get<std::string>() : "";
        if (p == "red") {
            options.heatmap.palette = Palette::red;
        } else if (p == "colorblind") {
            options.heatmap.palette = Palette::colorblind;
        } else {
            return fail(400, "invalid_request", "palette must be \"red\" or \"colorblind\"");
        }
    }

    const bool has_text = req.contains("text") && !req["text"].is_null();
    const bool has_record = req.contains("record") && !req["record"].is_null();
    if (has_text == has_record) {
        return fail(400, "invalid_request", "provide exactly one of \"text\" or \"record\"");
    }

    AttentionRecord record;
    if (has_record) {
        try {
            record = record_from_json(req["record"], true);
        } catch (const ValidationError& e) {
            return invalid(e, "invalid_record");
        }
    } else {
        if (!req["text"].is_string()) return fail(400, "invalid_request", "text must be a string");
        const auto text = req["text"].get<std::string>();
        std::size_t length = 0;
        try {
            length = utf8::length(text);
        } catch (const ValidationError& e) {
            return invalid(e, "invalid_request");
        }
        if (length == 0) return fail(400, "invalid_request", "text must not be empty");
        if (length > config.max_chars) {
            auto reply = fail(413, "text_too_long",
                              "text exceeds " + std::to_string(config.max_chars) + " characters");
            reply.body["max_chars"] = config.max_chars;
            return reply;
        }
        std::string language = "en";
        if (auto it = req.find("language"); it != req.end() && it->is_string()) {
            language = it->get<std::string>();
        }
        const auto response = adapter ? adapter(text, language) : std::nullopt;
        if (!response) return fail(502, "adapter_unreachable", "the model adapter did not answer");
        if (response->status != 200) {
            auto reply = fail(502, "adapter_error", "the model adapter returned an error");
            reply.body["adapter_status"] = response->status;
            return reply;
        }
        try {
            record = parse_attention_record(response->body, true);
        } catch (const ValidationError& e) {
            return invalid(e, "adapter_invalid_record", 502);
        }
    }

    try {
        if (utf8::length(record.text) > config.max_chars) {
            auto reply = fail(413, "text_too_long",
                              "text exceeds " + std::to_string(config.max_chars) + " characters");
            reply.body["max_chars"] = config.max_chars;
            return reply;
        }
        const auto a = analyze(record, options);
        json words = json::array();
        for (const auto& ws : a.prediction.word_scores) {
            words.push_back({{"word_index", ws.word_index}, {"score", ws.score}});
        }
        json body{
            {"schema_version", kSchemaVersion},
            {"record_id", a.record_id},
            {"classifier",
             {{"label", to_string(record.classifier_label)}, {"score", record.classifier_score}}},
            {"word_scores", words},
            {"char_spans", spans_to_json(a.prediction.char_spans)},
            {"roles",
             {{"target", spans_to_json(a.roles.target_char_spans)},
              {"argument", spans_to_json(a.roles.argument_char_spans)},
              {"parse_used", a.roles.from_parse}}},
            {"heatmap_html", a.heatmap_html},
            {"roles_html", a.roles_html},
            {"elapsed",
             {{"span_prediction", a.elapsed.span_prediction},
              {"attention_map", a.elapsed.attention_map},
              {"role_visuals", a.elapsed.role_visuals}}},
            {"prediction", prediction_to_json(a, options.extraction)},
        };
        return {200, std::move(body)};
    } catch (const ValidationError& e) {
        return invalid(e, "invalid_record");
    }
}

struct Service::Impl {
    httplib::Server server;
};

Service::Service(ServiceConfig config) : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
    auto adapter = http_adapter(config_);
    auto send = [](httplib::Response& res, const HttpReply& reply) {
        res.status = reply.status;
        res.set_content(reply.body.dump(), "application/json");
    };
    impl_->server.Get("/health", [send](const httplib::Request&, httplib::Response& res) {
        send(res, handle_health());
    });
    impl_->server.Post("/analyze", [this, adapter, send](const httplib::Request& req,
                                                         httplib::Response& res) {
        send(res, handle_analyze(req.body, config_, adapter));
    });
    impl_->server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string what = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            res.status = 500;
            res.set_content(error_body("internal", what).dump(), "application/json");
        });
}

Service::~Service() { stop(); }

int Service::start() {
    if (config_.port == 0) {
        port_ = impl_->server.bind_to_any_port(config_.host);
    } else {
        port_ = impl_->server.bind_to_port(config_.host, config_.port) ? config_.port : -1;
    }
    if (port_ <= 0) throw IoError("cannot bind " + config_.host + ":" + std::to_string(config_.port));
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port_;
}

bool Service::run() {
    port_ = config_.port;
    return impl_->server.listen(config_.host, config_.port);
}

void Service::stop() {
    if (impl_) impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace muted
