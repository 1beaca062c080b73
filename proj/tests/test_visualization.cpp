#include <doctest.h>

#include <random>

#include "muted/attention.hpp"
#include "muted/error.hpp"
#include "muted/html.hpp"
#include "muted/roles.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace muted;
using test_support::fuzz_record;
using test_support::fuzz_text;
using test_support::simple_record;

namespace {

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
    return n;
}

}  // namespace

TEST_SUITE("visualization") {

TEST_CASE("alpha follows the word score with two decimals") {
    const auto r = simple_record("a b", {0.0, 1.0});
    const std::vector<WordScore> scores{{0, 0.0}, {1, 1.0}};
    const auto html = render_heatmap_html(r, scores);
    CHECK(html.find("rgba(255,0,0,0.00)\">a</span>") != std::string::npos);
    CHECK(html.find("rgba(255,0,0,1.00)\">b</span>") != std::string::npos);
    CHECK(html.find("a</span> <span") != std::string::npos);
    CHECK(oracle::strip_markup(html) == "a b");
    CHECK(html.rfind("<div class=\"muted-heatmap\"", 0) == 0);

    const std::vector<WordScore> rounded{{0, 0.126}, {1, 0.994}};
    const auto h2 = render_heatmap_html(r, rounded, {Palette::colorblind});
    CHECK(h2.find("rgba(0,114,178,0.13)") != std::string::npos);
    CHECK(h2.find("rgba(0,114,178,0.99)") != std::string::npos);
    CHECK(count(h2, "class=\"muted-word\"") == 2);
}

TEST_CASE("heatmap needs one score per word") {
    const auto r = simple_record("a b", {0.0, 1.0});
    CHECK_THROWS_AS(render_heatmap_html(r, std::vector<WordScore>{{0, 0.5}}), ValidationError);
}

TEST_CASE("pair boxes people as TARGET and the rest as one ARGUMENT") {
    const std::string text = "people are really negative ass haters";
    TargetArgumentPair pair;
    pair.target_char_spans = {{0, 6}};
    pair.argument_char_spans = {{11, 17}, {18, 26}, {27, 30}, {31, 37}};
    const auto html = render_roles_html(text, pair);
    CHECK(html.find("<span class=\"muted-target\" data-label=\"TARGET\">people</span>") != std::string::npos);
    CHECK(html.find("<span class=\"muted-argument\" data-label=\"ARGUMENT\">really negative ass haters</span>") !=
          std::string::npos);
    CHECK(count(html, "muted-argument\" data-label") == 1);
    CHECK(oracle::strip_markup(html) == text);
}

TEST_CASE("boxes separated by punctuation stay apart") {
    TargetArgumentPair pair;
    pair.argument_char_spans = {{0, 2}, {3, 5}};
    const auto html = render_roles_html("ab,cd", pair);
    CHECK(count(html, "data-label=\"ARGUMENT\"") == 2);
}

TEST_CASE("empty pair leaves only the wrapper") {
    const std::string text = "nothing <here> & there";
    const auto html = render_roles_html(text, {});
    CHECK(html == "<div class=\"muted-roles\">nothing &lt;here&gt; &amp; there</div>");
}

TEST_CASE("argument covering the whole text is a single box") {
    TargetArgumentPair pair;
    pair.argument_char_spans = {{0, 9}};
    const auto html = render_roles_html("all of it", pair);
    CHECK(count(html, "data-label=\"ARGUMENT\"") == 1);
    CHECK(html.find(">all of it</span>") != std::string::npos);
    CHECK(count(html, "data-label=\"TARGET\"") == 0);
}

TEST_CASE("overlapping or out-of-range spans are rejected") {
    TargetArgumentPair pair;
    pair.target_char_spans = {{0, 4}};
    pair.argument_char_spans = {{3, 6}};
    CHECK_THROWS_AS(render_roles_html("abcdefg", pair), ValidationError);
    pair.argument_char_spans = {{5, 12}};
    CHECK_THROWS_AS(render_roles_html("abcdefg", pair), ValidationError);
}

TEST_CASE("hostile input is escaped") {
    const std::string text = "<script>alert('x')</script> you \"fools\"";
    const auto r = simple_record(text, {1.0, 0.5, 0.2});
    const auto pred = extract_spans(r, {0.0, ThresholdMode::relative});
    const auto heat = render_heatmap_html(r, normalize_scores(pred.word_scores));
    const auto roles = render_roles_html(text, argument_only(pred));
    for (const auto& html : {heat, roles}) {
        CHECK(html.find("<script") == std::string::npos);
        CHECK(html.find("&lt;script&gt;") != std::string::npos);
        CHECK(oracle::strip_markup(html) == text);
    }
    CHECK(escape_html("a&b<c>d\"e'f") == "a&amp;b&lt;c&gt;d&quot;e&#39;f");
}

TEST_CASE("markup-stripped output equals the input for fuzzed Unicode text") {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const auto text = fuzz_text(rng);
        const auto r = fuzz_record(rng, text);
        const auto pred = extract_spans(r, {unit(rng), ThresholdMode::relative});
        const auto heat = render_heatmap_html(r, normalize_scores(pred.word_scores));
        TargetArgumentPair pair;
        // alternate roles word by word to exercise both box kinds
        for (std::size_t k = 0; k < pred.char_spans.size(); ++k) {
            (k % 2 ? pair.target_char_spans : pair.argument_char_spans).push_back(pred.char_spans[k]);
        }
        const auto roles = render_roles_html(text, pair);
        CHECK(oracle::strip_markup(heat) == text);
        CHECK(oracle::strip_markup(roles) == text);
        CHECK(heat.find("<script") == std::string::npos);
        CHECK(roles.find("<script") == std::string::npos);
    }
}

TEST_CASE("wrap_page produces a standalone document") {
    const auto page = wrap_page("t<1>", "<p>x</p>");
    CHECK(page.rfind("<!DOCTYPE html>", 0) == 0);
    CHECK(page.find("<title>t&lt;1&gt;</title>") != std::string::npos);
    CHECK(page.find("<p>x</p>") != std::string::npos);
}

}  // TEST_SUITE
