#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace muted {

inline constexpr int kSchemaVersion = 1;

// One subword token. Offsets are Unicode scalar indices into the record text,
// half-open [start, end). Special tokens carry start == end == 0.
struct TokenInfo {
    std::string text;
    int start = 0;
    int end = 0;
    int word_index = -1;
    bool special = false;

    friend bool operator==(const TokenInfo&, const TokenInfo&) = default;
};

struct ParseArc {
    int word_index = 0;
    int head = 0;  // word index of the syntactic head; root points to itself
    std::string label;
    std::string pos;

    friend bool operator==(const ParseArc&, const ParseArc&) = default;
};

enum class ClassifierLabel { hap, clean };

// Row i is the first-token attention row of head i in the last layer.
using HeadRows = std::vector<std::vector<double>>;

struct AttentionRecord {
    std::string id;  // optional in the wire format
    std::string text;
    std::string language;
    std::vector<TokenInfo> tokens;
    HeadRows head_cls_rows;
    int layer_index = 0;
    ClassifierLabel classifier_label = ClassifierLabel::hap;
    double classifier_score = 0.0;
    std::optional<std::vector<ParseArc>> parse;

    friend bool operator==(const AttentionRecord&, const AttentionRecord&) = default;
};

struct CharSpan {
    int start = 0;
    int end = 0;

    friend auto operator<=>(const CharSpan&, const CharSpan&) = default;
};

// Sorted, duplicate-free character offsets.
using CharSet = std::vector<int>;

struct WordScore {
    int word_index = 0;
    double score = 0.0;

    friend bool operator==(const WordScore&, const WordScore&) = default;
};

enum class ThresholdMode { relative, absolute };

struct ExtractionConfig {
    double threshold = 0.5;
    ThresholdMode mode = ThresholdMode::relative;
    bool include_special = false;
};

struct SpanPrediction {
    std::vector<int> selected_tokens;  // the token set T
    std::vector<WordScore> word_scores;
    std::vector<int> selected_words;
    std::vector<CharSpan> char_spans;
    CharSet char_set;

    friend bool operator==(const SpanPrediction&, const SpanPrediction&) = default;
};

const char* to_string(ThresholdMode mode) noexcept;
const char* to_string(ClassifierLabel label) noexcept;
std::optional<ThresholdMode> parse_threshold_mode(const std::string& s);

}  // namespace muted
