#pragma once

#include <random>
#include <string>
#include <vector>

#include "muted/record.hpp"
#include "muted/utf8.hpp"

#ifndef MUTED_FIXTURE_DIR
#error "MUTED_FIXTURE_DIR must be defined by the build"
#endif

namespace test_support {

inline std::string fixture(const std::string& rel) { return std::string(MUTED_FIXTURE_DIR) + "/" + rel; }
inline std::string data_file(const std::string& rel) { return std::string(MUTED_DATA_DIR) + "/" + rel; }

// Record with <s> ... </s>, one head row. `word_tokens[w]` lists the token
// ranges of word w; `scores` gives one score per non-special token in order.
inline muted::AttentionRecord make_record(const std::string& text,
                                          const std::vector<std::vector<muted::CharSpan>>& word_tokens,
                                          const std::vector<double>& scores,
                                          double special_score = 0.0) {
    muted::AttentionRecord r;
    r.id = "t";
    r.text = text;
    r.language = "en";
    r.classifier_score = 0.5;
    const auto scalars = muted::utf8::decode(text);
    r.tokens.push_back({"<s>", 0, 0, -1, true});
    std::vector<double> row{special_score};
    std::size_t k = 0;
    for (std::size_t w = 0; w < word_tokens.size(); ++w) {
        for (const auto& span : word_tokens[w]) {
            r.tokens.push_back({muted::utf8::slice(scalars, span.start, span.end), span.start, span.end,
                                static_cast<int>(w), false});
            row.push_back(scores.at(k++));
        }
    }
    r.tokens.push_back({"</s>", 0, 0, -1, true});
    row.push_back(special_score);
    r.head_cls_rows = {row};
    return r;
}

// One token per whitespace-separated word.
inline muted::AttentionRecord simple_record(const std::string& text, const std::vector<double>& scores) {
    std::vector<std::vector<muted::CharSpan>> words;
    const auto s = muted::utf8::decode(text);
    int start = -1;
    for (int i = 0; i <= static_cast<int>(s.size()); ++i) {
        const bool space = i == static_cast<int>(s.size()) || s[static_cast<std::size_t>(i)] == U' ';
        if (space && start >= 0) {
            words.push_back({{start, i}});
            start = -1;
        } else if (!space && start < 0) {
            start = i;
        }
    }
    return make_record(text, words, scores);
}

// Random text drawn from ASCII, markup-significant characters, accented
// letters, combining marks, emoji with modifiers, CJK and assorted whitespace.
inline std::string fuzz_text(std::mt19937_64& rng, int max_len = 40) {
    static const std::u32string pool =
        U"abcXYZ019 .,!?<>&\"'/=;  \t\n\u00e4\u00f6\u00fc\u00df\u00e9\u0301\u0308\u200d"
        U"\u4f60\u597d\u00a0\U0001F921\U0001F44D\U0001F3FD\U0001F600";
    static const std::u32string script = U"<script>alert('x')</script>";
    std::uniform_int_distribution<int> len(0, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::u32string s;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
        if (rng() % 50 == 0) s += script;
        else s.push_back(pool[pick(rng)]);
    }
    return muted::utf8::encode(s);
}

// Whitespace-split words, each cut into 1-3 tokens, random scores.
inline muted::AttentionRecord fuzz_record(std::mt19937_64& rng, const std::string& text) {
    const auto s = muted::utf8::decode(text);
    std::vector<std::vector<muted::CharSpan>> words;
    int start = -1;
    for (int i = 0; i <= static_cast<int>(s.size()); ++i) {
        const bool space = i == static_cast<int>(s.size()) || muted::utf8::is_space(s[static_cast<std::size_t>(i)]);
        if (space && start >= 0) {
            std::vector<muted::CharSpan> toks;
            int a = start;
            while (a < i) {
                const int b = (i - a > 1 && rng() % 3 == 0) ? a + 1 + static_cast<int>(rng() % static_cast<unsigned>(i - a - 1)) : i;
                toks.push_back({a, b});
                a = b;
            }
            words.push_back(toks);
            start = -1;
        } else if (!space && start < 0) {
            start = i;
        }
    }
    std::vector<double> scores;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& w : words) {
        for (std::size_t k = 0; k < w.size(); ++k) scores.push_back(unit(rng));
    }
    return make_record(text, words, scores, unit(rng));
}

}  // namespace test_support
