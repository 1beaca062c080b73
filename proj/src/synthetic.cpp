#include "muted/synthetic.hpp"

#include <algorithm>
#include <array>
#include <string_view>
#include <vector>

#include "muted/utf8.hpp"

namespace muted {

namespace {

constexpr std::array<std::string_view, 24> kAscii = {
    "people", "are",   "really", "negative", "haters", "you",     "clowns", "all",
    "the",    "rich",  "white",  "dont",     "care",   "about",   "this",   "thread",
    "is",     "full",  "of",     "idiots",   "again",  "tonight", "lol",    "y'all",
};

constexpr std::array<std::string_view, 10> kUnicode = {
    "Politiker", "lügen", "notorisch", "über", "Größe", "🤡", "👍🏽", "naïve", "café", "é",
};

constexpr std::array<std::string_view, 9> kLabels = {
    "nsubj", "obj", "amod", "det", "compound", "advmod", "nmod", "case", "punct",
};

}  // namespace

AttentionRecord synthetic_record(std::mt19937_64& rng, const std::string& id,
                                 const SyntheticOptions& options) {
    std::uniform_int_distribution<int> word_count(options.min_words, options.max_words);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int words = word_count(rng);

    AttentionRecord r;
    r.id = id;
    r.language = options.unicode ? "de" : "en";
    r.layer_index = 3;
    r.classifier_label = unit(rng) < 0.8 ? ClassifierLabel::hap : ClassifierLabel::clean;
    r.classifier_score = unit(rng);

    r.tokens.push_back({"<s>", 0, 0, -1, true});
    std::u32string text;
    for (int w = 0; w < words; ++w) {
        std::string_view word;
        if (options.unicode && unit(rng) < 0.4) {
            word = kUnicode[std::uniform_int_distribution<std::size_t>(0, kUnicode.size() - 1)(rng)];
        } else {
            word = kAscii[std::uniform_int_distribution<std::size_t>(0, kAscii.size() - 1)(rng)];
        }
        if (w > 0) text.push_back(U' ');
        const auto scalars = utf8::decode(word);
        const int start = static_cast<int>(text.size());
        text += scalars;
        const int len = static_cast<int>(scalars.size());

        int pieces = 1;
        if (len >= 2 && unit(rng) < options.multi_token_prob) {
            pieces = std::min(len, std::uniform_int_distribution<int>(2, 3)(rng));
        }
        // Split points spread evenly across the word.
        for (int p = 0; p < pieces; ++p) {
            const int a = start + len * p / pieces;
            const int b = start + len * (p + 1) / pieces;
            r.tokens.push_back({utf8::slice(text, static_cast<std::size_t>(a),
                                            static_cast<std::size_t>(b)),
                                a, b, w, false});
        }
    }
    r.tokens.push_back({"</s>", 0, 0, -1, true});
    r.text = utf8::encode(text);

    const std::size_t n = r.tokens.size();
    for (int h = 0; h < options.heads; ++h) {
        std::vector<double> row(n);
        double sum = 0.0;
        for (auto& v : row) {
            v = unit(rng);
            v = v * v * v;  // skew so a few tokens dominate, like real attention
            sum += v;
        }
        for (auto& v : row) v = sum > 0.0 ? v / sum : 1.0 / static_cast<double>(n);
        r.head_cls_rows.push_back(std::move(row));
    }

    if (options.with_parse) {
        std::vector<ParseArc> parse;
        const int root = std::uniform_int_distribution<int>(0, words - 1)(rng);
        for (int w = 0; w < words; ++w) {
            if (w == root) {
                parse.push_back({w, w, "root", "VERB"});
                continue;
            }
            int head = std::uniform_int_distribution<int>(0, words - 1)(rng);
            if (head == w) head = root;
            const auto label =
                kLabels[std::uniform_int_distribution<std::size_t>(0, kLabels.size() - 1)(rng)];
            parse.push_back({w, head, std::string(label), "X"});
        }
        r.parse = std::move(parse);
    }
    return r;
}

}  // namespace muted
