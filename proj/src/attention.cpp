#include "muted/attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "muted/error.hpp"
#include "muted/utf8.hpp"

namespace muted {

const char* to_string(ThresholdMode mode) noexcept {
    return mode == ThresholdMode::relative ? "relative" : "absolute";
}

const char* to_string(ClassifierLabel label) noexcept {
    return label == ClassifierLabel::hap ? "hap" : "clean";
}

std::optional<ThresholdMode> parse_threshold_mode(const std::string& s) {
    if (s == "relative") return ThresholdMode::relative;
    if (s == "absolute") return ThresholdMode::absolute;
    return std::nullopt;
}

std::vector<double> average_heads(const HeadRows& rows) {
    if (rows.empty()) throw ValidationError("head_cls_rows", "need at least one head row");
    const std::size_t n = rows.front().size();
    std::vector<double> mean(n, 0.0);
    for (std::size_t h = 0; h < rows.size(); ++h) {
        const auto& row = rows[h];
        const std::string where = "head_cls_rows[" + std::to_string(h) + "]";
        if (row.size() != n) {
            throw ValidationError(where, "row has " + std::to_string(row.size()) +
                                             " entries, expected " + std::to_string(n));
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(row[j])) throw ValidationError(where, "non-finite entry");
            mean[j] += row[j];
        }
    }
    const double heads = static_cast<double>(rows.size());
    for (double& v : mean) v /= heads;
    return mean;
}

namespace {

void check_lengths(std::span<const double> scores, std::span<const TokenInfo> tokens) {
    if (scores.size() != tokens.size()) {
        throw ValidationError("scores", "length " + std::to_string(scores.size()) +
                                            " does not match token count " +
                                            std::to_string(tokens.size()));
    }
}

double cutoff_for(double reference_max, const ExtractionConfig& cfg) {
    return cfg.mode == ThresholdMode::relative ? cfg.threshold * reference_max : cfg.threshold;
}

}  // namespace

std::vector<int> select_tokens(std::span<const double> scores,
                               std::span<const TokenInfo> tokens,
                               const ExtractionConfig& cfg) {
    check_lengths(scores, tokens);
    auto candidate = [&](std::size_t i) { return cfg.include_special || !tokens[i].special; };

    bool any = false;
    double best = 0.0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!candidate(i)) continue;
        best = any ? std::max(best, scores[i]) : scores[i];
        any = true;
    }
    std::vector<int> out;
    if (!any) return out;
    const double cutoff = cutoff_for(best, cfg);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (candidate(i) && scores[i] >= cutoff) out.push_back(static_cast<int>(i));
    }
    return out;
}

int word_count(std::span<const TokenInfo> tokens) {
    int words = 0;
    for (const auto& t : tokens) {
        if (!t.special) words = std::max(words, t.word_index + 1);
    }
    return words;
}

std::vector<WordScore> aggregate_to_words(std::span<const double> scores,
                                          std::span<const TokenInfo> tokens) {
    check_lengths(scores, tokens);
    const int words = word_count(tokens);
    std::vector<WordScore> out(static_cast<std::size_t>(words));
    std::vector<bool> seen(out.size(), false);
    for (int w = 0; w < words; ++w) out[static_cast<std::size_t>(w)].word_index = w;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& t = tokens[i];
        if (t.special) continue;
        if (t.word_index < 0) {
            throw ValidationError("tokens[" + std::to_string(i) + "].word_index",
                                  "non-special token without a word");
        }
        const auto w = static_cast<std::size_t>(t.word_index);
        out[w].score = seen[w] ? std::max(out[w].score, scores[i]) : scores[i];
        seen[w] = true;
    }
    return out;
}

std::vector<CharSpan> word_ranges(std::span<const TokenInfo> tokens) {
    std::vector<CharSpan> ranges(static_cast<std::size_t>(word_count(tokens)));
    std::vector<bool> seen(ranges.size(), false);
    for (const auto& t : tokens) {
        if (t.special) continue;
        const auto w = static_cast<std::size_t>(t.word_index);
        if (!seen[w]) {
            ranges[w] = {t.start, t.end};
            seen[w] = true;
        } else {
            ranges[w].start = std::min(ranges[w].start, t.start);
            ranges[w].end = std::max(ranges[w].end, t.end);
        }
    }
    return ranges;
}

std::vector<CharSpan> merge_spans(std::vector<CharSpan> spans) {
    std::erase_if(spans, [](const CharSpan& s) { return s.end <= s.start; });
    std::sort(spans.begin(), spans.end());
    std::vector<CharSpan> merged;
    for (const auto& s : spans) {
        if (!merged.empty() && s.start <= merged.back().end) {
            merged.back().end = std::max(merged.back().end, s.end);
        } else {
            merged.push_back(s);
        }
    }
    return merged;
}

CharSet chars_of(std::span<const CharSpan> spans) {
    CharSet chars;
    for (const auto& s : spans) {
        for (int c = s.start; c < s.end; ++c) chars.push_back(c);
    }
    std::sort(chars.begin(), chars.end());
    chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
    return chars;
}

CharSpans words_to_char_spans(std::span<const int> selected_words,
                              std::span<const TokenInfo> tokens,
                              std::size_t text_length) {
    const auto ranges = word_ranges(tokens);
    std::vector<CharSpan> picked;
    picked.reserve(selected_words.size());
    for (int w : selected_words) {
        if (w < 0 || static_cast<std::size_t>(w) >= ranges.size()) {
            throw ValidationError("selected_words", "unknown word index " + std::to_string(w));
        }
        const auto r = ranges[static_cast<std::size_t>(w)];
        if (r.end > static_cast<int>(text_length)) {
            throw ValidationError("selected_words", "word " + std::to_string(w) +
                                                        " extends past the text");
        }
        picked.push_back(r);
    }
    CharSpans out;
    out.spans = merge_spans(std::move(picked));
    out.chars = chars_of(out.spans);
    return out;
}

SpanPrediction extract_spans(const AttentionRecord& record, const ExtractionConfig& cfg) {
    const auto token_scores = average_heads(record.head_cls_rows);
    return extract_spans(record, token_scores, cfg);
}

SpanPrediction extract_spans(const AttentionRecord& record, std::span<const double> token_scores,
                             const ExtractionConfig& cfg) {
    const std::span<const TokenInfo> tokens(record.tokens);
    check_lengths(token_scores, tokens);

    SpanPrediction pred;
    pred.word_scores = aggregate_to_words(token_scores, tokens);

    // Selection happens on word scores so multi-token words stay atomic.
    bool any = false;
    double best = 0.0;
    for (const auto& ws : pred.word_scores) {
        best = any ? std::max(best, ws.score) : ws.score;
        any = true;
    }
    if (cfg.include_special) {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (!tokens[i].special) continue;
            best = any ? std::max(best, token_scores[i]) : token_scores[i];
            any = true;
        }
    }
    if (!any) return pred;

    const double cutoff = cutoff_for(best, cfg);
    std::vector<bool> word_on(pred.word_scores.size(), false);
    for (const auto& ws : pred.word_scores) {
        if (ws.score >= cutoff) {
            pred.selected_words.push_back(ws.word_index);
            word_on[static_cast<std::size_t>(ws.word_index)] = true;
        }
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& t = tokens[i];
        const bool on = t.special ? (cfg.include_special && token_scores[i] >= cutoff)
                                  : word_on[static_cast<std::size_t>(t.word_index)];
        if (on) pred.selected_tokens.push_back(static_cast<int>(i));
    }

    auto spans = words_to_char_spans(pred.selected_words, tokens, utf8::length(record.text));
    pred.char_spans = std::move(spans.spans);
    pred.char_set = std::move(spans.chars);
    return pred;
}

std::vector<WordScore> normalize_scores(std::span<const WordScore> word_scores) {
    std::vector<WordScore> out(word_scores.begin(), word_scores.end());
    double best = 0.0;
    for (const auto& ws : out) best = std::max(best, ws.score);
    for (auto& ws : out) ws.score = best > 0.0 ? ws.score / best : 0.0;
    return out;
}

}  // namespace muted
