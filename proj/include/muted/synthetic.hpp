#pragma once

#include <random>
#include <string>

#include "muted/record.hpp"

// Random but valid attention records for benchmarks and property tests.
namespace muted {

struct SyntheticOptions {
    int min_words = 3;
    int max_words = 12;
    int heads = 4;
    double multi_token_prob = 0.3;  // chance a word is split into 2-3 tokens
    bool with_parse = true;
    bool unicode = false;  // mix accented words and emoji into the vocabulary
};

AttentionRecord synthetic_record(std::mt19937_64& rng, const std::string& id,
                                 const SyntheticOptions& options = {});

}  // namespace muted
