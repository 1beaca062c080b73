#include "muted/analyzer.hpp"

#include <chrono>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "muted/attention.hpp"
#include "muted/error.hpp"

namespace muted {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

}  // namespace

std::string record_id_of(const AttentionRecord& record) {
    if (!record.id.empty()) return record.id;
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : record_to_json(record).dump()) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "rec-%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Analysis analyze(const AttentionRecord& record, const AnalyzeOptions& options) {
    Analysis a;
    a.record_id = record_id_of(record);

    const auto t0 = Clock::now();
    a.prediction = extract_spans(record, options.extraction);
    a.roles = roles_for(record, a.prediction, options.roles);
    const auto t1 = Clock::now();
    a.normalized_scores = normalize_scores(a.prediction.word_scores);
    a.heatmap_html = render_heatmap_html(record, a.normalized_scores, options.heatmap);
    const auto t2 = Clock::now();
    a.roles_html = render_roles_html(record.text, a.roles);
    const auto t3 = Clock::now();

    a.elapsed = {seconds_between(t0, t1), seconds_between(t1, t2), seconds_between(t2, t3)};
    return a;
}

json prediction_to_json(const Analysis& a, const ExtractionConfig& cfg) {
    json words = json::array();
    for (const auto& ws : a.prediction.word_scores) {
        words.push_back({{"word_index", ws.word_index}, {"score", ws.score}});
    }
    return {
        {"schema_version", kSchemaVersion},
        {"record_id", a.record_id},
        {"threshold", cfg.threshold},
        {"mode", to_string(cfg.mode)},
        {"selected_tokens", a.prediction.selected_tokens},
        {"word_scores", words},
        {"selected_words", a.prediction.selected_words},
        {"char_spans", spans_to_json(a.prediction.char_spans)},
        {"char_set", a.prediction.char_set},
        {"roles",
         {{"target", spans_to_json(a.roles.target_char_spans)},
          {"argument", spans_to_json(a.roles.argument_char_spans)},
          {"parse_used", a.roles.from_parse}}},
    };
}

std::string format_prediction_json(const Analysis& a, const ExtractionConfig& cfg) {
    return prediction_to_json(a, cfg).dump() + "\n";
}

LatencyReport run_bench(std::span<const AttentionRecord> records, int n,
                        const AnalyzeOptions& options) {
    if (n < 1) throw ValidationError("n", "need at least one input");
    if (records.empty()) throw ValidationError("records", "no records to benchmark");

    LatencyReport report;
    report.n_inputs = n;
    PhaseTimes sum;
    std::size_t sink = 0;
    const auto start = Clock::now();
    for (int i = 0; i < n; ++i) {
        const auto& record = records[static_cast<std::size_t>(i) % records.size()];
        const auto a = analyze(record, options);
        sum.span_prediction += a.elapsed.span_prediction;
        sum.attention_map += a.elapsed.attention_map;
        sum.role_visuals += a.elapsed.role_visuals;
        sink += a.heatmap_html.size() + a.roles_html.size();
    }
    const auto stop = Clock::now();

    const double count = static_cast<double>(n);
    report.mean = {sum.span_prediction / count, sum.attention_map / count,
                   sum.role_visuals / count};
    report.total_mean = seconds_between(start, stop) / count;

    std::ostringstream note;
    note << "cpu threads: " << std::thread::hardware_concurrency();
#ifdef _OPENMP
    note << ", openmp max threads: " << omp_get_max_threads();
#endif
    note << ", output bytes: " << sink;
    report.hardware_note = note.str();
    return report;
}

json latency_report_to_json(const LatencyReport& r) {
    return {{"n_inputs", r.n_inputs},
            {"phases",
             {{"span_prediction", r.mean.span_prediction},
              {"attention_map", r.mean.attention_map},
              {"role_visuals", r.mean.role_visuals}}},
            {"phase_sum", r.mean.span_prediction + r.mean.attention_map + r.mean.role_visuals},
            {"total_mean", r.total_mean},
            {"hardware_note", r.hardware_note}};
}

std::string format_latency_table(const LatencyReport& r) {
    std::ostringstream out;
    out << "Time taken (s) per input, mean over " << r.n_inputs << " inputs\n";
    out << std::left << std::setw(18) << "phase" << std::right << std::setw(14) << "seconds"
        << "\n";
    auto row = [&](const char* name, double v) {
        out << std::left << std::setw(18) << name << std::right << std::setw(14)
            << std::scientific << std::setprecision(3) << v << "\n";
    };
    row("span prediction", r.mean.span_prediction);
    row("attention map", r.mean.attention_map);
    row("role visuals", r.mean.role_visuals);
    row("total", r.total_mean);
    out << r.hardware_note << "\n";
    return out.str();
}

}  // namespace muted
