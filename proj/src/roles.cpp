#include "muted/roles.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "muted/attention.hpp"
#include "muted/error.hpp"
#include "muted/utf8.hpp"

namespace muted {

bool is_subject_label(std::string_view label) noexcept {
    return label.find("subj") != std::string_view::npos;
}

bool is_modifier_label(std::string_view label) noexcept {
    const auto base = label.substr(0, label.find(':'));
    return base == "det" || base == "amod" || base == "compound" || base == "poss" ||
           base == "nmod" || base == "case";
}

namespace {

std::vector<CharSpan> spans_of(const std::vector<int>& words, std::span<const TokenInfo> tokens,
                               std::size_t text_length) {
    return words_to_char_spans(words, tokens, text_length).spans;
}

}  // namespace

TargetArgumentPair assign_roles(const SpanPrediction& pred, std::span<const ParseArc> parse,
                                std::span<const TokenInfo> tokens, std::size_t text_length,
                                const RoleOptions& options) {
    if (parse.empty()) throw MissingParseError();

    std::map<int, const ParseArc*> arc_of;
    for (const auto& arc : parse) arc_of[arc.word_index] = &arc;

    std::map<int, bool> in_target;  // selected word -> target membership
    for (int w : pred.selected_words) {
        auto it = arc_of.find(w);
        if (it == arc_of.end()) {
            throw ValidationError("parse", "no arc for selected word " + std::to_string(w));
        }
        in_target[w] = is_subject_label(it->second->label);
    }

    if (options.expand_modifiers) {
        // Fixed point: each pass adds selected modifiers whose head is target.
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto& [w, target] : in_target) {
                if (target) continue;
                const ParseArc& arc = *arc_of.at(w);
                if (arc.head == w || !is_modifier_label(arc.label)) continue;
                auto head = in_target.find(arc.head);
                if (head != in_target.end() && head->second) {
                    target = true;
                    changed = true;
                }
            }
        }
    }

    TargetArgumentPair pair;
    pair.from_parse = true;
    for (const auto& [w, target] : in_target) {
        (target ? pair.target_words : pair.argument_words).push_back(w);
    }
    pair.target_char_spans = spans_of(pair.target_words, tokens, text_length);
    pair.argument_char_spans = spans_of(pair.argument_words, tokens, text_length);
    return pair;
}

TargetArgumentPair argument_only(const SpanPrediction& pred) {
    TargetArgumentPair pair;
    pair.argument_words = pred.selected_words;
    std::sort(pair.argument_words.begin(), pair.argument_words.end());
    pair.argument_char_spans = pred.char_spans;
    return pair;
}

TargetArgumentPair roles_for(const AttentionRecord& record, const SpanPrediction& pred,
                             const RoleOptions& options) {
    if (!record.parse || record.parse->empty()) return argument_only(pred);
    return assign_roles(pred, *record.parse, record.tokens, utf8::length(record.text), options);
}

}  // namespace muted
