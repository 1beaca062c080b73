#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "muted/record.hpp"

namespace muted {

using json = nlohmann::json;

// --- attention records (schema_version 1) ---------------------------------

// Parses and fully validates a record. Strict mode rejects unknown top-level
// fields. Errors are ValidationError with a JSON path.
AttentionRecord parse_attention_record(std::string_view bytes, bool strict = true);
AttentionRecord record_from_json(const json& j, bool strict = true);

json record_to_json(const AttentionRecord& record);
std::string serialize_attention_record(const AttentionRecord& record);

// Checks every record invariant; throws ValidationError on the first breach.
void validate_record(const AttentionRecord& record);

// Reads every *.json file in `dir`, keyed by the record id (file stem when the
// record carries none).
std::map<std::string, AttentionRecord> load_records_dir(const std::filesystem::path& dir,
                                                        bool strict = true);

// --- gold datasets ---------------------------------------------------------

struct GoldPair {
    std::optional<std::vector<CharSpan>> target;  // nullopt: target not in text
    std::vector<CharSpan> argument;

    friend bool operator==(const GoldPair&, const GoldPair&) = default;
};

struct GoldExample {
    std::string id;
    std::string text;
    std::string language;
    std::optional<CharSet> gold_char_set;     // TSD style
    std::optional<std::vector<GoldPair>> pairs;  // TBO style

    friend bool operator==(const GoldExample&, const GoldExample&) = default;
};

enum class DatasetFormat { tsd_csv, tbo_jsonl };

std::optional<DatasetFormat> parse_dataset_format(const std::string& s);

struct LoadIssue {
    std::size_t line = 0;  // 1-based physical line
    std::string message;
};

struct GoldDataset {
    std::vector<GoldExample> examples;
    std::vector<LoadIssue> issues;  // rows skipped while loading
};

// Invalid rows are skipped and reported in `issues`; a file without a single
// usable row throws ValidationError.
GoldDataset parse_gold_dataset(std::string_view content, DatasetFormat format);
GoldDataset load_gold_dataset(const std::filesystem::path& path, DatasetFormat format);

void validate_gold(const GoldExample& example);
json gold_to_json(const GoldExample& example);
GoldExample gold_from_json(const json& j);

// Character universe helpers shared with evaluation.
CharSet gold_target_chars(const GoldExample& example);
CharSet gold_argument_chars(const GoldExample& example);
bool all_targets_null(const GoldExample& example);

// --- misc ------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);  // throws IoError

json spans_to_json(const std::vector<CharSpan>& spans);

}  // namespace muted
