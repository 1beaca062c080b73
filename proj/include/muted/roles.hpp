#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "muted/record.hpp"

namespace muted {

struct TargetArgumentPair {
    std::vector<CharSpan> target_char_spans;  // empty when no target was found
    std::vector<CharSpan> argument_char_spans;
    std::vector<int> target_words;
    std::vector<int> argument_words;
    bool from_parse = false;  // false: argument-only fallback

    friend bool operator==(const TargetArgumentPair&, const TargetArgumentPair&) = default;
};

struct RoleOptions {
    // Pull det/amod/compound/poss/nmod/case dependents of a target into it.
    bool expand_modifiers = true;
};

bool is_subject_label(std::string_view label) noexcept;
bool is_modifier_label(std::string_view label) noexcept;

// Selected words carrying a subject label seed the target; selected modifier
// dependents of target words join it. Everything else selected is argument.
// Throws MissingParseError when `parse` is empty and ValidationError when a
// selected word has no arc.
TargetArgumentPair assign_roles(const SpanPrediction& pred, std::span<const ParseArc> parse,
                                std::span<const TokenInfo> tokens, std::size_t text_length,
                                const RoleOptions& options = {});

// Fallback used when no parse exists: every selected word is argument.
TargetArgumentPair argument_only(const SpanPrediction& pred);

// Convenience wrapper: roles from the record's own parse, or the fallback.
TargetArgumentPair roles_for(const AttentionRecord& record, const SpanPrediction& pred,
                             const RoleOptions& options = {});

}  // namespace muted
