#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "muted/record.hpp"

// From per-head first-token attention rows to character spans:
// head average -> word max-aggregation -> thresholded selection -> spans.
namespace muted {

// Column means of the H x n matrix. Throws ValidationError naming the first
// ragged or non-finite row ("head_cls_rows[i]").
std::vector<double> average_heads(const HeadRows& rows);

// Relative mode keeps i iff scores[i] >= threshold * max(candidate scores);
// absolute mode iff scores[i] >= threshold. Candidates are the non-special
// tokens, plus specials when cfg.include_special is set.
std::vector<int> select_tokens(std::span<const double> scores,
                               std::span<const TokenInfo> tokens,
                               const ExtractionConfig& cfg);

// One entry per word, ordered by word index; score is the max over the word's
// tokens.
std::vector<WordScore> aggregate_to_words(std::span<const double> scores,
                                          std::span<const TokenInfo> tokens);

struct CharSpans {
    std::vector<CharSpan> spans;
    CharSet chars;
};

// Each word contributes the hull of its tokens. Whitespace between words is
// never added; touching or overlapping ranges are merged.
CharSpans words_to_char_spans(std::span<const int> selected_words,
                              std::span<const TokenInfo> tokens,
                              std::size_t text_length);

SpanPrediction extract_spans(const AttentionRecord& record, const ExtractionConfig& cfg);

// Same pipeline with the head average already computed (threshold sweeps).
SpanPrediction extract_spans(const AttentionRecord& record, std::span<const double> token_scores,
                             const ExtractionConfig& cfg);

// score / max; an all-zero input stays all-zero.
std::vector<WordScore> normalize_scores(std::span<const WordScore> word_scores);

// Number of words (max word_index + 1) carried by the tokens.
int word_count(std::span<const TokenInfo> tokens);

// Hull [min start, max end) of every token of each word; words without tokens
// get an empty {0, 0} range.
std::vector<CharSpan> word_ranges(std::span<const TokenInfo> tokens);

std::vector<CharSpan> merge_spans(std::vector<CharSpan> spans);
CharSet chars_of(std::span<const CharSpan> spans);

}  // namespace muted
