#include "muted/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <ostream>
#include <random>

#include <CLI11.hpp>

#include "muted/analyzer.hpp"
#include "muted/error.hpp"
#include "muted/evaluation.hpp"
#include "muted/interchange.hpp"
#include "muted/service.hpp"
#include "muted/synthetic.hpp"

namespace muted {

namespace {

struct ExtractArgs {
    double threshold = 0.5;
    std::string mode = "relative";
    bool include_special = false;
    bool no_expand = false;
};

void add_extract_flags(CLI::App* cmd, ExtractArgs& a) {
    cmd->add_option("--threshold", a.threshold, "Span threshold in [0, 1]")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--mode", a.mode, "Threshold mode")
        ->check(CLI::IsMember({"relative", "absolute"}));
    cmd->add_flag("--include-special", a.include_special, "Let special tokens pass the threshold");
    cmd->add_flag("--no-expand", a.no_expand, "Do not pull modifiers into the target");
}

AnalyzeOptions analyze_options(const ExtractArgs& a) {
    AnalyzeOptions o;
    o.extraction.threshold = a.threshold;
    o.extraction.mode = *parse_threshold_mode(a.mode);
    o.extraction.include_special = a.include_special;
    o.roles.expand_modifiers = !a.no_expand;
    return o;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f << content;
    if (!f) throw IoError("cannot write " + path);
}

struct DatasetArgs {
    std::string dataset;
    std::string dataset_format;
    std::string records;
    std::vector<std::string> settings;
    std::string mode = "relative";
    bool no_expand = false;
    bool raw_span_as_target = false;
    std::string format = "table";
    std::string out;
};

void add_dataset_flags(CLI::App* cmd, DatasetArgs& a) {
    cmd->add_option("--dataset", a.dataset, "Gold dataset file")->required();
    cmd->add_option("--dataset-format", a.dataset_format, "tsd_csv or tbo_jsonl (default: by extension)")
        ->check(CLI::IsMember({"tsd_csv", "tbo_jsonl"}));
    cmd->add_option("--records", a.records, "Directory of attention-record JSON files");
    cmd->add_option("--setting", a.settings, "target_and_arg, arg_only, target_only or tsd")
        ->check(CLI::IsMember({"target_and_arg", "arg_only", "target_only", "tsd"}));
    cmd->add_option("--mode", a.mode, "Threshold mode")
        ->check(CLI::IsMember({"relative", "absolute"}));
    cmd->add_flag("--no-expand", a.no_expand, "Do not pull modifiers into the target");
    cmd->add_flag("--raw-span-as-target", a.raw_span_as_target,
                  "Score target_only against the raw span set");
    cmd->add_option("--format", a.format, "Output format")->check(CLI::IsMember({"table", "json"}));
    cmd->add_option("--out", a.out, "Write the report here instead of stdout");
}

DatasetFormat dataset_format_of(const DatasetArgs& a) {
    if (!a.dataset_format.empty()) return *parse_dataset_format(a.dataset_format);
    if (a.dataset.ends_with(".csv")) return DatasetFormat::tsd_csv;
    if (a.dataset.ends_with(".jsonl")) return DatasetFormat::tbo_jsonl;
    throw ValidationError("--dataset-format", "cannot infer the format of " + a.dataset);
}

std::vector<Setting> settings_of(const DatasetArgs& a, DatasetFormat format) {
    std::vector<Setting> out;
    for (const auto& s : a.settings) out.push_back(*parse_setting(s));
    if (out.empty()) {
        if (format == DatasetFormat::tsd_csv) {
            out = {Setting::tsd};
        } else {
            out = {Setting::target_and_arg, Setting::arg_only, Setting::target_only};
        }
    }
    return out;
}

GoldDataset load_dataset(const DatasetArgs& a, std::ostream& err) {
    auto ds = load_gold_dataset(a.dataset, dataset_format_of(a));
    for (const auto& issue : ds.issues) {
        err << json{{"warning", "skipped_row"}, {"line", issue.line}, {"message", issue.message}}.dump()
            << "\n";
    }
    return ds;
}

int cmd_extract(const std::string& record_path, const ExtractArgs& a, const std::string& format,
                const std::string& out_path, std::ostream& out) {
    const auto record = parse_attention_record(read_file(record_path));
    const auto options = analyze_options(a);
    const auto analysis = analyze(record, options);
    if (format == "html") {
        emit(out_path, analysis.heatmap_html + "\n" + analysis.roles_html + "\n", out);
    } else {
        emit(out_path, format_prediction_json(analysis, options.extraction), out);
    }
    return kExitOk;
}

int cmd_visualize(const std::string& record_path, const ExtractArgs& a, const std::string& palette,
                  const std::string& out_path, std::ostream& out) {
    const auto record = parse_attention_record(read_file(record_path));
    auto options = analyze_options(a);
    options.heatmap.palette = palette == "colorblind" ? Palette::colorblind : Palette::red;
    const auto analysis = analyze(record, options);
    std::string body = "<h3>Attention heatmap</h3>\n" + analysis.heatmap_html +
                       "\n<h3>Target and argument</h3>\n" + analysis.roles_html;
    emit(out_path, wrap_page(analysis.record_id, body), out);
    return kExitOk;
}

int cmd_evaluate(const DatasetArgs& a, double threshold, bool random, double p,
                 std::uint64_t seed, std::ostream& out, std::ostream& err) {
    const auto format = dataset_format_of(a);
    const auto ds = load_dataset(a, err);
    const auto mode = *parse_threshold_mode(a.mode);

    PredictionMap preds;
    if (random) {
        preds = random_predictions(ds.examples, p, seed);
    } else {
        if (a.records.empty()) throw ValidationError("--records", "required unless --random-baseline");
        const auto records = load_records_dir(a.records);
        RoleOptions roles{!a.no_expand};
        preds = build_predictions(records, ds.examples, {threshold, mode, false}, roles);
    }

    std::vector<EvalResult> results;
    for (auto setting : settings_of(a, format)) {
        EvalOptions eo{a.raw_span_as_target, random ? p : threshold, mode};
        results.push_back(evaluate_dataset(preds, ds.examples, setting, eo));
    }
    if (a.format == "json") {
        json doc{{"schema_version", kSchemaVersion}, {"results", json::array()}};
        if (random) doc["random_baseline"] = {{"p", p}, {"seed", seed}, {"generator", "mt19937_64"}};
        for (const auto& r : results) doc["results"].push_back(eval_result_to_json(r));
        emit(a.out, doc.dump(2) + "\n", out);
    } else {
        emit(a.out, format_eval_table(results), out);
    }
    return kExitOk;
}

int cmd_tune(const DatasetArgs& a, const std::string& grid_spec, std::ostream& out,
             std::ostream& err) {
    const auto format = dataset_format_of(a);
    const auto ds = load_dataset(a, err);
    if (a.records.empty()) throw ValidationError("--records", "required for tuning");
    const auto records = load_records_dir(a.records);
    const auto grid = grid_spec.empty() ? default_grid() : parse_grid(grid_spec);

    PipelineOptions po;
    po.mode = *parse_threshold_mode(a.mode);
    po.roles.expand_modifiers = !a.no_expand;
    po.raw_span_as_target = a.raw_span_as_target;

    json doc{{"schema_version", kSchemaVersion}, {"results", json::array()}};
    std::string table;
    for (auto setting : settings_of(a, format)) {
        const auto tuned = tune_threshold(records, ds.examples, setting, grid, po);
        auto j = tune_result_to_json(tuned);
        j["setting"] = to_string(setting);
        doc["results"].push_back(std::move(j));
        table += std::string("# ") + to_string(setting) + ": best threshold " +
                 json(tuned.best_threshold).dump() + "\n";
        table += format_eval_table(tuned.per_threshold);
    }
    emit(a.out, a.format == "json" ? doc.dump(2) + "\n" : table, out);
    return kExitOk;
}

int cmd_bench(int n, const std::string& records_dir, const std::vector<std::string>& record_files,
              const ExtractArgs& a, const std::string& format, std::ostream& out) {
    std::vector<AttentionRecord> records;
    if (!records_dir.empty()) {
        for (auto& [id, r] : load_records_dir(records_dir)) records.push_back(std::move(r));
    }
    for (const auto& f : record_files) records.push_back(parse_attention_record(read_file(f)));
    if (records.empty()) {
        std::mt19937_64 rng(7);
        for (int i = 0; i < 32; ++i) records.push_back(synthetic_record(rng, "bench-" + std::to_string(i)));
    }
    const auto report = run_bench(records, n, analyze_options(a));
    if (format == "json") {
        out << latency_report_to_json(report).dump(2) << "\n";
    } else {
        out << format_latency_table(report);
    }
    return kExitOk;
}

int cmd_serve(ServiceConfig config, std::ostream& out) {
    Service service(config);
    out << json{{"event", "listening"}, {"host", config.host}, {"port", config.port},
                {"adapter_url", config.adapter_url}, {"max_chars", config.max_chars}}
               .dump()
        << std::endl;
    return service.run() ? kExitOk : kExitIo;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Attention-based offensive span extraction and evaluation", "muted"};
    app.require_subcommand(1);

    ExtractArgs ex;
    std::string record_path;
    std::string out_path;
    std::string out_format = "json";
    auto* extract = app.add_subcommand("extract", "Predict spans for one attention record");
    extract->add_option("record", record_path, "Attention-record JSON")->required();
    add_extract_flags(extract, ex);
    extract->add_option("--format", out_format, "json or html")->check(CLI::IsMember({"json", "html"}));
    extract->add_option("--out", out_path, "Output file (default stdout)");

    std::string palette = "red";
    auto* visualize = app.add_subcommand("visualize", "Render heatmap and roles as an HTML page");
    visualize->add_option("record", record_path, "Attention-record JSON")->required();
    add_extract_flags(visualize, ex);
    visualize->add_option("--palette", palette)->check(CLI::IsMember({"red", "colorblind"}));
    visualize->add_option("--out", out_path, "Output file (default stdout)");

    DatasetArgs ds;
    double eval_threshold = 0.5;
    bool random = false;
    double p = 0.5;
    std::uint64_t seed = 0;
    auto* evaluate = app.add_subcommand("evaluate", "Character-level F1 against a gold dataset");
    add_dataset_flags(evaluate, ds);
    evaluate->add_option("--threshold", eval_threshold)->check(CLI::Range(0.0, 1.0));
    evaluate->add_flag("--random-baseline", random, "Score the seeded random baseline instead");
    evaluate->add_option("--p", p, "Random baseline selection probability")->check(CLI::Range(0.0, 1.0));
    evaluate->add_option("--seed", seed, "Random baseline seed");

    std::string grid;
    auto* tune = app.add_subcommand("tune", "Grid-search the threshold on a training split");
    add_dataset_flags(tune, ds);
    tune->add_option("--grid", grid, "a:b:step (default 0.05:1.00:0.05)");

    int n = 100;
    std::string bench_dir;
    std::vector<std::string> bench_files;
    std::string bench_format = "table";
    auto* bench = app.add_subcommand("bench", "Per-phase latency over n inputs");
    bench->add_option("--n", n, "Number of inputs")->check(CLI::PositiveNumber);
    bench->add_option("--records", bench_dir, "Directory of attention records");
    bench->add_option("--record", bench_files, "Attention record file (repeatable)");
    add_extract_flags(bench, ex);
    bench->add_option("--format", bench_format)->check(CLI::IsMember({"table", "json"}));

    auto config = ServiceConfig::from_env();
    auto* serve = app.add_subcommand("serve", "HTTP service for the web UI");
    serve->add_option("--port", config.port, "Listen port (env MUTED_PORT)");
    serve->add_option("--host", config.host, "Listen address");
    serve->add_option("--adapter-url", config.adapter_url, "Model adapter base URL (env MUTED_ADAPTER_URL)");
    serve->add_option("--max-chars", config.max_chars, "Maximum text length (env MUTED_MAX_CHARS)");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*extract) return cmd_extract(record_path, ex, out_format, out_path, out);
        if (*visualize) return cmd_visualize(record_path, ex, palette, out_path, out);
        if (*evaluate) return cmd_evaluate(ds, eval_threshold, random, p, seed, out, err);
        if (*tune) return cmd_tune(ds, grid, out, err);
        if (*bench) return cmd_bench(n, bench_dir, bench_files, ex, bench_format, out);
        if (*serve) return cmd_serve(config, out);
    } catch (const ValidationError& e) {
        err << json{{"error", "validation"}, {"path", e.path()}, {"message", e.message()}}.dump() << "\n";
        return kExitValidation;
    } catch (const IoError& e) {
        err << json{{"error", "io"}, {"message", e.what()}}.dump() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return kExitIo;
    }
    return kExitValidation;
}

}  // namespace muted
