#pragma once

#include <span>
#include <string>
#include <vector>

#include "muted/html.hpp"
#include "muted/interchange.hpp"
#include "muted/record.hpp"
#include "muted/roles.hpp"

// The one analysis path shared by the CLI and the HTTP service, so both emit
// identical predictions for identical record + config.
namespace muted {

struct AnalyzeOptions {
    ExtractionConfig extraction;
    RoleOptions roles;
    HeatmapOptions heatmap;
};

// Seconds spent in each phase of one analysis.
struct PhaseTimes {
    double span_prediction = 0.0;  // head average, selection, role assignment
    double attention_map = 0.0;    // normalisation + heatmap fragment
    double role_visuals = 0.0;     // target/argument fragment
};

struct Analysis {
    std::string record_id;
    SpanPrediction prediction;
    TargetArgumentPair roles;
    std::vector<WordScore> normalized_scores;
    std::string heatmap_html;
    std::string roles_html;
    PhaseTimes elapsed;
};

// The record id, or "rec-" + FNV-1a of the canonical record JSON.
std::string record_id_of(const AttentionRecord& record);

Analysis analyze(const AttentionRecord& record, const AnalyzeOptions& options);

// The prediction document printed by `muted extract --format json`.
json prediction_to_json(const Analysis& analysis, const ExtractionConfig& cfg);
std::string format_prediction_json(const Analysis& analysis, const ExtractionConfig& cfg);

// --- latency benchmark -------------------------------------------------------

struct LatencyReport {
    int n_inputs = 0;
    PhaseTimes mean;           // per-phase mean seconds
    double total_mean = 0.0;   // wall time of the whole run divided by n
    std::string hardware_note;
};

// Analyses n inputs, cycling through `records`, with a monotonic clock.
LatencyReport run_bench(std::span<const AttentionRecord> records, int n,
                        const AnalyzeOptions& options);

json latency_report_to_json(const LatencyReport& report);
std::string format_latency_table(const LatencyReport& report);

}  // namespace muted
