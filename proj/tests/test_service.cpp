#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <future>
#include <random>
#include <sstream>

#include <httplib.h>

#include "muted/cli.hpp"
#include "muted/interchange.hpp"
#include "muted/service.hpp"
#include "muted/synthetic.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace muted;
using test_support::fixture;

namespace {

std::string fixture_record(const std::string& name) { return oracle::slurp(fixture("records/" + name + ".json")); }

json cli_extract(const std::string& path, const std::vector<std::string>& extra = {}) {
    std::vector<std::string> args{"muted", "extract", path};
    args.insert(args.end(), extra.begin(), extra.end());
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(run_cli(args, out, err) == kExitOk);
    return json::parse(out.str());
}

AdapterFetch canned(int status, std::string body) {
    return [status, body](const std::string&, const std::string&) -> std::optional<AdapterResponse> {
        return AdapterResponse{status, body};
    };
}

const AdapterFetch kUnreachable = [](const std::string&, const std::string&) -> std::optional<AdapterResponse> {
    return std::nullopt;
};

}  // namespace

TEST_SUITE("cli_service") {

TEST_CASE("health") {
    const auto r = handle_health();
    CHECK(r.status == 200);
    CHECK(r.body["status"] == "ok");
    CHECK(r.body["schema_version"] == 1);
}

TEST_CASE("inlined record matches the CLI prediction for every fixture") {
    for (const char* name : {"fixture_en_1", "fixture_en_2", "fixture_de_1", "fixture_multi_token",
                             "fixture_emoji", "fixture_specials_only"}) {
        const json req{{"record", json::parse(fixture_record(name))}, {"threshold", 0.6}};
        const auto reply = handle_analyze(req.dump(), {}, kUnreachable);
        REQUIRE(reply.status == 200);
        const auto cli = cli_extract(fixture(std::string("records/") + name + ".json"), {"--threshold", "0.6"});
        CHECK(reply.body["prediction"] == cli);
        CHECK(reply.body["char_spans"] == cli["char_spans"]);
        CHECK(reply.body["roles"] == cli["roles"]);
        CHECK(reply.body["heatmap_html"].get<std::string>().find("muted-heatmap") != std::string::npos);
        CHECK(reply.body["elapsed"].size() == 3);
    }
}

TEST_CASE("request options are honoured") {
    const json rec = json::parse(fixture_record("fixture_en_2"));
    json req{{"record", rec}, {"threshold", 0.6}, {"expand", false}, {"mode", "relative"}, {"palette", "colorblind"}};
    const auto reply = handle_analyze(req.dump(), {}, kUnreachable);
    REQUIRE(reply.status == 200);
    const auto dir = fixture("records/fixture_en_2.json");
    CHECK(reply.body["prediction"] == cli_extract(dir, {"--threshold", "0.6", "--no-expand"}));
    CHECK(reply.body["heatmap_html"].get<std::string>().find("0,114,178") != std::string::npos);
}

TEST_CASE("bad requests") {
    const ServiceConfig cfg;
    CHECK(handle_analyze("{nope", cfg, kUnreachable).status == 400);
    CHECK(handle_analyze("{nope", cfg, kUnreachable).body["error"] == "invalid_json");
    CHECK(handle_analyze("[]", cfg, kUnreachable).status == 400);
    CHECK(handle_analyze("{}", cfg, kUnreachable).body["error"] == "invalid_request");
    const json rec = json::parse(fixture_record("fixture_en_1"));
    CHECK(handle_analyze(json{{"record", rec}, {"text", "x"}}.dump(), cfg, kUnreachable).status == 400);
    CHECK(handle_analyze(json{{"record", rec}, {"threshold", 2}}.dump(), cfg, kUnreachable).status == 400);
    CHECK(handle_analyze(json{{"record", rec}, {"mode", "median"}}.dump(), cfg, kUnreachable).status == 400);
    CHECK(handle_analyze(json{{"text", ""}}.dump(), cfg, kUnreachable).status == 400);

    auto broken = rec;
    broken["head_cls_rows"][0].erase(0);
    const auto r = handle_analyze(json{{"record", broken}}.dump(), cfg, kUnreachable);
    CHECK(r.status == 400);
    CHECK(r.body["error"] == "invalid_record");
    CHECK(r.body["path"] == "head_cls_rows[0]");
}

TEST_CASE("text length limit") {
    ServiceConfig cfg;
    cfg.max_chars = 5;
    const auto r = handle_analyze(json{{"text", "\xC3\xA4\xC3\xA4\xC3\xA4\xC3\xA4\xC3\xA4x"}}.dump(), cfg, kUnreachable);
    CHECK(r.status == 413);
    CHECK(r.body["error"] == "text_too_long");
    // five scalars are fine (and reach the adapter)
    CHECK(handle_analyze(json{{"text", "\xC3\xA4\xC3\xA4\xC3\xA4\xC3\xA4\xC3\xA4"}}.dump(), cfg, kUnreachable).status == 502);
    const json rec = json::parse(fixture_record("fixture_en_1"));
    CHECK(handle_analyze(json{{"record", rec}}.dump(), cfg, kUnreachable).status == 413);
}

TEST_CASE("adapter failures map to 502") {
    const ServiceConfig cfg;
    const auto text = json{{"text", "people are such stupid haters"}}.dump();
    auto r = handle_analyze(text, cfg, kUnreachable);
    CHECK(r.status == 502);
    CHECK(r.body["error"] == "adapter_unreachable");
    r = handle_analyze(text, cfg, canned(500, "boom"));
    CHECK(r.status == 502);
    CHECK(r.body["error"] == "adapter_error");
    CHECK(r.body["adapter_status"] == 500);
    r = handle_analyze(text, cfg, canned(200, "{\"schema_version\":1}"));
    CHECK(r.status == 502);
    CHECK(r.body["error"] == "adapter_invalid_record");
    r = handle_analyze(text, cfg, canned(200, fixture_record("fixture_en_1")));
    CHECK(r.status == 200);
    CHECK(r.body["record_id"] == "fixture_en_1");
    CHECK(http_adapter(cfg)("x", "en") == std::nullopt);
}

TEST_CASE("served over HTTP with a fake adapter and concurrent clients") {
    httplib::Server adapter;
    std::atomic<int> calls{0};
    std::string last_language;
    std::mutex mu;
    adapter.Post("/attend", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        const auto j = json::parse(req.body);
        {
            std::lock_guard lock(mu);
            last_language = j.value("language", "");
        }
        if (j["text"] == "unparseable") {
            res.status = 503;
            return;
        }
        res.set_content(fixture_record("fixture_de_1"), "application/json");
    });
    const int adapter_port = adapter.bind_to_any_port("127.0.0.1");
    std::thread adapter_thread([&] { adapter.listen_after_bind(); });
    adapter.wait_until_ready();

    ServiceConfig cfg;
    cfg.port = 0;
    cfg.adapter_url = "http://127.0.0.1:" + std::to_string(adapter_port);
    Service service(cfg);
    const int port = service.start();
    REQUIRE(port > 0);

    httplib::Client client("127.0.0.1", port);
    auto health = client.Get("/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(json::parse(health->body)["status"] == "ok");

    auto res = client.Post("/analyze", json{{"text", "Politiker lügen"}, {"language", "de"}, {"threshold", 0.6}}.dump(),
                           "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto body = json::parse(res->body);
    CHECK(body["prediction"] == cli_extract(fixture("records/fixture_de_1.json"), {"--threshold", "0.6"}));
    {
        std::lock_guard lock(mu);
        CHECK(last_language == "de");
    }

    res = client.Post("/analyze", json{{"text", "unparseable"}}.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 502);
    CHECK(json::parse(res->body)["error"] == "adapter_error");

    // 16 concurrent inlined-record requests
    std::mt19937_64 rng(6);
    std::vector<AttentionRecord> recs;
    for (int i = 0; i < 16; ++i) recs.push_back(synthetic_record(rng, "cc" + std::to_string(i), {.unicode = true}));
    std::vector<std::future<std::pair<int, json>>> futures;
    for (const auto& r : recs) {
        futures.push_back(std::async(std::launch::async, [&, r] {
            httplib::Client c("127.0.0.1", port);
            auto reply = c.Post("/analyze", json{{"record", record_to_json(r)}}.dump(), "application/json");
            return std::pair<int, json>{reply ? reply->status : -1, reply ? json::parse(reply->body) : json()};
        }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) {
        auto [status, j] = futures[i].get();
        CHECK(status == 200);
        const auto direct = handle_analyze(json{{"record", record_to_json(recs[i])}}.dump(), cfg, kUnreachable);
        CHECK(j["prediction"] == direct.body["prediction"]);
    }

    service.stop();
    adapter.stop();
    adapter_thread.join();
    CHECK(calls.load() == 2);
}

TEST_CASE("configuration from the environment") {
    ::setenv("MUTED_ADAPTER_URL", "http://adapter:9000", 1);
    ::setenv("MUTED_PORT", "9123", 1);
    ::setenv("MUTED_MAX_CHARS", "77", 1);
    auto c = ServiceConfig::from_env();
    CHECK(c.adapter_url == "http://adapter:9000");
    CHECK(c.port == 9123);
    CHECK(c.max_chars == 77);
    ::unsetenv("MUTED_ADAPTER_URL");
    ::unsetenv("MUTED_PORT");
    ::unsetenv("MUTED_MAX_CHARS");
    c = ServiceConfig::from_env();
    CHECK(c.adapter_url.empty());
    CHECK(c.port == 8080);
    CHECK(c.max_chars == 2000);
}

}  // TEST_SUITE
