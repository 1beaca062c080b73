#include "muted/html.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

#include "muted/attention.hpp"
#include "muted/error.hpp"
#include "muted/utf8.hpp"

namespace muted {

std::string escape_html(std::string_view text) {
    std::string out;
    out.reserve(text.size() + text.size() / 8);
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

namespace {

std::string alpha_string(double score) {
    score = std::clamp(score, 0.0, 1.0);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", score);
    return buf;
}

void append_escaped(std::string& out, const std::u32string& scalars, int start, int end) {
    if (start >= end) return;
    out += escape_html(utf8::slice(scalars, static_cast<std::size_t>(start),
                                   static_cast<std::size_t>(end)));
}

constexpr std::string_view kRoleStyle =
    "<style>"
    ".muted-roles .muted-target,.muted-roles .muted-argument{border:1px solid;border-radius:4px;"
    "padding:0 3px;line-height:2}"
    ".muted-roles .muted-target{border-color:#b00020;background:#fde7ea}"
    ".muted-roles .muted-argument{border-color:#7a4b00;background:#fff3d6}"
    ".muted-roles [data-label]::after{content:attr(data-label);font:bold 0.6em sans-serif;"
    "margin-left:4px;vertical-align:middle}"
    "</style>";

struct Box {
    CharSpan span;
    bool target;
};

}  // namespace

std::string render_heatmap_html(const AttentionRecord& record,
                                std::span<const WordScore> normalized,
                                const HeatmapOptions& options) {
    const auto scalars = utf8::decode(record.text);
    const auto ranges = word_ranges(record.tokens);
    if (normalized.size() != ranges.size()) {
        throw ValidationError("word_scores", "expected " + std::to_string(ranges.size()) +
                                                 " scores, got " +
                                                 std::to_string(normalized.size()));
    }
    std::vector<double> score(ranges.size(), 0.0);
    for (const auto& ws : normalized) {
        if (ws.word_index < 0 || static_cast<std::size_t>(ws.word_index) >= score.size()) {
            throw ValidationError("word_scores", "unknown word " + std::to_string(ws.word_index));
        }
        score[static_cast<std::size_t>(ws.word_index)] = ws.score;
    }

    const char* rgb = options.palette == Palette::red ? "255,0,0" : "0,114,178";
    std::string out = "<div class=\"muted-heatmap\" lang=\"" + escape_html(record.language) + "\">";
    int pos = 0;
    for (std::size_t w = 0; w < ranges.size(); ++w) {
        const auto r = ranges[w];
        if (r.start < pos) throw ValidationError("tokens", "word ranges overlap");
        append_escaped(out, scalars, pos, r.start);
        const auto alpha = alpha_string(score[w]);
        out += "<span class=\"muted-word\" data-word=\"" + std::to_string(w) +
               "\" data-score=\"" + alpha + "\" style=\"background-color:rgba(" + rgb + "," +
               alpha + ")\">";
        append_escaped(out, scalars, r.start, r.end);
        out += "</span>";
        pos = r.end;
    }
    append_escaped(out, scalars, pos, static_cast<int>(scalars.size()));
    out += "</div>";
    return out;
}

std::string render_roles_html(const std::string& text, const TargetArgumentPair& pair) {
    const auto scalars = utf8::decode(text);
    std::vector<Box> boxes;
    for (const auto& s : pair.target_char_spans) boxes.push_back({s, true});
    for (const auto& s : pair.argument_char_spans) boxes.push_back({s, false});
    std::sort(boxes.begin(), boxes.end(),
              [](const Box& a, const Box& b) { return a.span < b.span; });
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const auto& s = boxes[i].span;
        if (s.start < 0 || s.start > s.end || static_cast<std::size_t>(s.end) > scalars.size()) {
            throw ValidationError("roles", "span [" + std::to_string(s.start) + "," +
                                               std::to_string(s.end) + ") outside the text");
        }
        if (i > 0 && s.start < boxes[i - 1].span.end) {
            throw ValidationError("roles", "target and argument spans overlap at " +
                                               std::to_string(s.start));
        }
    }

    // Same-role spans separated only by whitespace share one box.
    std::vector<Box> grouped;
    for (const auto& b : boxes) {
        if (b.span.start == b.span.end) continue;
        if (!grouped.empty() && grouped.back().target == b.target) {
            bool gap_is_space = true;
            for (int c = grouped.back().span.end; c < b.span.start; ++c) {
                gap_is_space = gap_is_space && utf8::is_space(scalars[static_cast<std::size_t>(c)]);
            }
            if (gap_is_space) {
                grouped.back().span.end = b.span.end;
                continue;
            }
        }
        grouped.push_back(b);
    }

    std::string out = "<div class=\"muted-roles\">";
    if (!grouped.empty()) out += kRoleStyle;
    int pos = 0;
    for (const auto& b : grouped) {
        append_escaped(out, scalars, pos, b.span.start);
        out += b.target ? "<span class=\"muted-target\" data-label=\"TARGET\">"
                        : "<span class=\"muted-argument\" data-label=\"ARGUMENT\">";
        append_escaped(out, scalars, b.span.start, b.span.end);
        out += "</span>";
        pos = b.span.end;
    }
    append_escaped(out, scalars, pos, static_cast<int>(scalars.size()));
    out += "</div>";
    return out;
}

std::string wrap_page(std::string_view title, std::string_view body) {
    std::string out = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>";
    out += escape_html(title);
    out += "</title></head><body>\n";
    out += body;
    out += "\n</body></html>\n";
    return out;
}

}  // namespace muted
