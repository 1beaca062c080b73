#pragma once

#include <span>
#include <string>
#include <string_view>

#include "muted/record.hpp"
#include "muted/roles.hpp"

// HTML fragments for the heatmap and the target/argument view. The class names
// muted-heatmap, muted-word, muted-roles, muted-target and muted-argument are
// a stable contract for embedding pages.
namespace muted {

enum class Palette {
    red,         // white -> red alpha ramp
    colorblind,  // white -> blue (#0072B2) alpha ramp
};

struct HeatmapOptions {
    Palette palette = Palette::red;
};

// Escapes & < > " ' so the result is safe in element content and quoted
// attributes.
std::string escape_html(std::string_view text);

// One span per word, background alpha = score rounded to two decimals. Text
// between words is copied (escaped) unchanged. `normalized` must hold one score
// per word.
std::string render_heatmap_html(const AttentionRecord& record,
                                std::span<const WordScore> normalized,
                                const HeatmapOptions& options = {});

// Boxes target spans (TARGET) and argument spans (ARGUMENT); labels come from
// the data-label attribute via the embedded style block. Throws
// ValidationError when spans overlap or leave the text.
std::string render_roles_html(const std::string& text, const TargetArgumentPair& pair);

// Minimal standalone document around one or more fragments.
std::string wrap_page(std::string_view title, std::string_view body);

}  // namespace muted
