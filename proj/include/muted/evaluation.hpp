#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "muted/interchange.hpp"
#include "muted/record.hpp"
#include "muted/roles.hpp"

namespace muted {

enum class Setting { target_and_arg, arg_only, target_only, tsd };

const char* to_string(Setting setting) noexcept;
std::optional<Setting> parse_setting(const std::string& s);

struct ExamplePrediction {
    SpanPrediction spans;
    TargetArgumentPair roles;
};

using PredictionMap = std::map<std::string, ExamplePrediction>;

struct EvalOptions {
    // target_only scores the raw span set instead of role-assigned target chars
    bool raw_span_as_target = false;
    // metadata copied into the result
    double threshold = 0.0;
    ThresholdMode mode = ThresholdMode::relative;
};

struct ExampleScore {
    std::string id;
    double f1 = 0.0;

    friend bool operator==(const ExampleScore&, const ExampleScore&) = default;
};

struct EvalResult {
    Setting setting = Setting::tsd;
    std::vector<ExampleScore> per_example_f1;  // in gold order
    double mean_f1 = 0.0;
    int n_evaluated = 0;
    int n_excluded = 0;  // null-target exclusions (target_only only)
    double threshold_used = 0.0;
    ThresholdMode mode_used = ThresholdMode::relative;

    friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

// Character-level F1 over sorted offset sets. Both empty -> 1, one empty -> 0.
double char_f1(std::span<const int> pred, std::span<const int> gold);

// Per-example F1 averaged over examples. Examples are scored in parallel;
// the result is identical to the serial reference for any thread count.
EvalResult evaluate_dataset(const PredictionMap& preds, std::span<const GoldExample> golds,
                            Setting setting, const EvalOptions& options = {});

namespace reference {
// Single-threaded version kept as the oracle for the parallel kernels.
EvalResult evaluate_dataset(const PredictionMap& preds, std::span<const GoldExample> golds,
                            Setting setting, const EvalOptions& options = {});
}  // namespace reference

// --- random baseline -------------------------------------------------------

// Words are maximal runs of non-whitespace scalars.
std::vector<CharSpan> whitespace_words(const std::string& text);

// Each word is selected independently with probability p. The generator is
// std::mt19937_64 and a draw u = (x >> 11) * 2^-53 selects iff u < p, so the
// output is bit-identical across platforms.
SpanPrediction random_baseline(const GoldExample& gold, double p, std::uint64_t seed);

// Per-example seeds derive from (seed, id), so the result does not depend on
// dataset order. Each selected word is then marked target with probability 1/2.
PredictionMap random_predictions(std::span<const GoldExample> golds, double p,
                                 std::uint64_t seed);

// --- threshold tuning ------------------------------------------------------

using RecordMap = std::map<std::string, AttentionRecord>;

struct PipelineOptions {
    ThresholdMode mode = ThresholdMode::relative;
    bool include_special = false;
    RoleOptions roles;
    bool raw_span_as_target = false;
};

// Runs extraction + role assignment for every gold id (in parallel).
PredictionMap build_predictions(const RecordMap& records, std::span<const GoldExample> golds,
                                const ExtractionConfig& cfg, const RoleOptions& roles = {});

struct TuneResult {
    double best_threshold = 0.0;
    std::vector<EvalResult> per_threshold;  // grid order
};

// Evaluates every grid point and keeps the best mean F1; ties go to the
// larger threshold.
TuneResult tune_threshold(const RecordMap& records, std::span<const GoldExample> golds,
                          Setting setting, std::span<const double> grid,
                          const PipelineOptions& options = {});

namespace reference {
// Serial counterparts of the parallel kernels above.
PredictionMap build_predictions(const RecordMap& records, std::span<const GoldExample> golds,
                                const ExtractionConfig& cfg, const RoleOptions& roles = {});
TuneResult tune_threshold(const RecordMap& records, std::span<const GoldExample> golds,
                          Setting setting, std::span<const double> grid,
                          const PipelineOptions& options = {});
}  // namespace reference

// "a:b:step", inclusive of b (within 1e-9).
std::vector<double> parse_grid(const std::string& text);
std::vector<double> default_grid();  // 0.05:1.00:0.05

// --- reporting -----------------------------------------------------------

json eval_result_to_json(const EvalResult& result);
json tune_result_to_json(const TuneResult& result);
std::string format_eval_table(std::span<const EvalResult> results);

}  // namespace muted
