#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "muted/attention.hpp"
#include "muted/cli.hpp"
#include "muted/evaluation.hpp"
#include "muted/interchange.hpp"
#include "muted/synthetic.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace muted;
namespace fs = std::filesystem;
using test_support::fixture;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "muted");
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("muted-test-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    void write(const std::string& name, const std::string& content) const {
        std::ofstream(path / name, std::ios::binary) << content;
    }
};

const char* const kFixtures[] = {"fixture_en_1",        "fixture_en_2",  "fixture_de_1",
                                 "fixture_multi_token", "fixture_emoji", "fixture_specials_only"};

}  // namespace

TEST_SUITE("cli_service") {

TEST_CASE("extract reproduces the golden files byte for byte") {
    for (const char* name : kFixtures) {
        const auto r = cli({"extract", fixture(std::string("records/") + name + ".json"), "--threshold", "0.6"});
        CHECK(r.code == kExitOk);
        CHECK(r.out == oracle::slurp(fixture(std::string("expected/") + name + ".expected.json")));
    }
}

TEST_CASE("extract at threshold 0 spans every word") {
    const auto r = cli({"extract", fixture("records/fixture_en_1.json"), "--threshold", "0"});
    REQUIRE(r.code == kExitOk);
    const auto j = json::parse(r.out);
    CHECK(j["selected_words"] == json::array({0, 1, 2, 3, 4}));
    CHECK(j["char_spans"] == json::parse("[[0,6],[7,10],[11,15],[16,22],[23,29]]"));
}

TEST_CASE("extract errors and exit codes") {
    auto r = cli({"extract", "/nonexistent/record.json"});
    CHECK(r.code == kExitIo);
    CHECK(json::parse(r.err)["error"] == "io");

    TempDir tmp;
    auto rec = json::parse(oracle::slurp(fixture("records/fixture_en_1.json")));
    rec["tokens"][3]["end"] = 99;
    tmp.write("bad.json", rec.dump());
    r = cli({"extract", (tmp.path / "bad.json").string()});
    CHECK(r.code == kExitValidation);
    const auto err = json::parse(r.err);
    CHECK(err["error"] == "validation");
    CHECK(err["path"] == "tokens[3].end");

    r = cli({"extract", fixture("records/fixture_en_1.json"), "--threshold", "1.5"});
    CHECK(r.code == kExitValidation);
    r = cli({"frobnicate"});
    CHECK(r.code == kExitValidation);
}

TEST_CASE("extract html and --out") {
    TempDir tmp;
    const auto out = (tmp.path / "o.html").string();
    auto r = cli({"extract", fixture("records/fixture_en_1.json"), "--format", "html", "--out", out});
    CHECK(r.code == kExitOk);
    CHECK(r.out.empty());
    const auto html = oracle::slurp(out);
    CHECK(html.find("muted-heatmap") != std::string::npos);
    CHECK(html.find("muted-roles") != std::string::npos);

    r = cli({"visualize", fixture("records/fixture_emoji.json"), "--palette", "colorblind"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.rfind("<!DOCTYPE html>", 0) == 0);
    CHECK(r.out.find("0,114,178") != std::string::npos);
}

TEST_CASE("evaluate a perfect 10-example set") {
    TempDir tmp;
    fs::create_directories(tmp.path / "records");
    std::mt19937_64 rng(10);
    std::string tsd = "id,spans,text\n";
    std::string tbo;
    for (int i = 0; i < 10; ++i) {
        auto r = synthetic_record(rng, "ex" + std::to_string(i), {.with_parse = false});
        tmp.write("records/" + r.id + ".json", serialize_attention_record(r));
        const auto pred = extract_spans(r, {0.5, ThresholdMode::relative});
        tsd += r.id + ",\"" + json(pred.char_set).dump() + "\",\"" + r.text + "\"\n";
        json pairs = json::array();
        pairs.push_back({{"target", nullptr}, {"argument", spans_to_json(pred.char_spans)}});
        tbo += json{{"id", r.id}, {"text", r.text}, {"pairs", pairs}}.dump() + "\n";
    }
    tmp.write("gold.csv", tsd);
    tmp.write("gold.jsonl", tbo);

    auto r = cli({"evaluate", "--dataset", (tmp.path / "gold.csv").string(), "--records",
                  (tmp.path / "records").string(), "--threshold", "0.5", "--format", "json"});
    REQUIRE(r.code == kExitOk);
    auto doc = json::parse(r.out);
    REQUIRE(doc["results"].size() == 1);
    CHECK(doc["results"][0]["setting"] == "tsd");
    CHECK(doc["results"][0]["mean_f1"] == 1.0);
    CHECK(doc["results"][0]["n_evaluated"] == 10);

    r = cli({"evaluate", "--dataset", (tmp.path / "gold.jsonl").string(), "--records",
             (tmp.path / "records").string(), "--threshold", "0.5", "--format", "json"});
    REQUIRE(r.code == kExitOk);
    doc = json::parse(r.out);
    REQUIRE(doc["results"].size() == 3);
    CHECK(doc["results"][0]["mean_f1"] == 1.0);  // target_and_arg
    CHECK(doc["results"][1]["mean_f1"] == 1.0);  // arg_only
    CHECK(doc["results"][2]["n_evaluated"] == 0);
    CHECK(doc["results"][2]["n_excluded"] == 10);

    r = cli({"evaluate", "--dataset", (tmp.path / "gold.csv").string(), "--records",
             (tmp.path / "records").string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("tsd") != std::string::npos);
}

TEST_CASE("evaluate reports skipped rows and missing inputs") {
    TempDir tmp;
    tmp.write("gold.jsonl", oracle::slurp(fixture("gold_fixtures.jsonl")) + "{broken\n");
    auto r = cli({"evaluate", "--dataset", (tmp.path / "gold.jsonl").string(), "--records", fixture("records"),
                  "--threshold", "0.6"});
    CHECK(r.code == kExitOk);
    CHECK(r.err.find("skipped_row") != std::string::npos);

    r = cli({"evaluate", "--dataset", (tmp.path / "gold.jsonl").string()});
    CHECK(r.code == kExitValidation);
    r = cli({"evaluate", "--dataset", (tmp.path / "missing.jsonl").string(), "--random-baseline"});
    CHECK(r.code == kExitIo);
    tmp.write("empty.jsonl", "");
    r = cli({"evaluate", "--dataset", (tmp.path / "empty.jsonl").string(), "--random-baseline"});
    CHECK(r.code == kExitValidation);
}

TEST_CASE("random baseline reports are identical across runs") {
    const auto ds = test_support::data_file("tbo_en_test_shape.jsonl");
    const std::vector<std::string> args{"evaluate", "--dataset", ds, "--random-baseline", "--seed", "42", "--format", "json"};
    const auto a = cli(args);
    const auto b = cli(args);
    REQUIRE(a.code == kExitOk);
    CHECK(a.out == b.out);
    const auto doc = json::parse(a.out);
    CHECK(doc["random_baseline"]["p"] == 0.5);
    CHECK(doc["results"][2]["n_evaluated"] == 342);
    auto other = args;
    other[5] = "43";
    CHECK(cli(other).out != a.out);
}

TEST_CASE("tune equals a manual rerun of evaluate per threshold") {
    const auto gold = fixture("gold_fixtures.jsonl");
    const auto recs = fixture("records");
    const auto r = cli({"tune", "--dataset", gold, "--records", recs, "--grid", "0.1:1.0:0.1", "--setting",
                        "target_and_arg", "--format", "json"});
    REQUIRE(r.code == kExitOk);
    const auto doc = json::parse(r.out);
    const auto& res = doc["results"][0];
    double best_f1 = -1;
    double best_tau = -1;
    for (int k = 1; k <= 10; ++k) {
        std::ostringstream tau;
        tau << k / 10.0;
        const auto e = cli({"evaluate", "--dataset", gold, "--records", recs, "--threshold", tau.str(), "--setting",
                            "target_and_arg", "--format", "json"});
        REQUIRE(e.code == kExitOk);
        const double f1 = json::parse(e.out)["results"][0]["mean_f1"];
        CHECK(res["grid"][k - 1]["mean_f1"].get<double>() == f1);
        if (f1 >= best_f1) {
            best_f1 = f1;
            best_tau = k / 10.0;
        }
    }
    CHECK(res["best_threshold"].get<double>() == doctest::Approx(best_tau).epsilon(1e-12));
    CHECK(res["best"]["mean_f1"].get<double>() == best_f1);

    const auto table = cli({"tune", "--dataset", gold, "--records", recs});
    CHECK(table.code == kExitOk);
    CHECK(table.out.find("best threshold") != std::string::npos);
}

TEST_CASE("bench reports three phases") {
    for (const char* n : {"1", "100"}) {
        const auto r = cli({"bench", "--n", n, "--records", fixture("records"), "--format", "json"});
        REQUIRE(r.code == kExitOk);
        const auto j = json::parse(r.out);
        CHECK(j["n_inputs"] == std::stoi(n));
        CHECK(j["phases"].size() == 3);
        for (const auto& [k, v] : j["phases"].items()) CHECK(v.get<double>() >= 0.0);
        CHECK(j["total_mean"].get<double>() >= 0.0);
    }
    const auto t = cli({"bench", "--n", "5"});
    CHECK(t.code == kExitOk);
    CHECK(t.out.find("span prediction") != std::string::npos);
    CHECK(t.out.find("attention map") != std::string::npos);
    CHECK(t.out.find("role visuals") != std::string::npos);
    CHECK(cli({"bench", "--n", "0"}).code == kExitValidation);
}

}  // TEST_SUITE
