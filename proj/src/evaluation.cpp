#include "muted/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <random>
#include <sstream>

#include "muted/attention.hpp"
#include "muted/error.hpp"
#include "muted/utf8.hpp"

namespace muted {

const char* to_string(Setting setting) noexcept {
    switch (setting) {
        case Setting::target_and_arg: return "target_and_arg";
        case Setting::arg_only: return "arg_only";
        case Setting::target_only: return "target_only";
        case Setting::tsd: return "tsd";
    }
    return "?";
}

std::optional<Setting> parse_setting(const std::string& s) {
    if (s == "target_and_arg") return Setting::target_and_arg;
    if (s == "arg_only") return Setting::arg_only;
    if (s == "target_only") return Setting::target_only;
    if (s == "tsd") return Setting::tsd;
    return std::nullopt;
}

double char_f1(std::span<const int> pred, std::span<const int> gold) {
    if (pred.empty() && gold.empty()) return 1.0;
    if (pred.empty() || gold.empty()) return 0.0;
    std::size_t common = 0;
    auto p = pred.begin();
    auto g = gold.begin();
    while (p != pred.end() && g != gold.end()) {
        if (*p < *g) {
            ++p;
        } else if (*g < *p) {
            ++g;
        } else {
            ++common;
            ++p;
            ++g;
        }
    }
    if (common == 0) return 0.0;
    const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
    const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
    return 2.0 * precision * recall / (precision + recall);
}

namespace {

CharSet chars_from(const std::vector<CharSpan>& spans) { return chars_of(spans); }

CharSet set_union(const CharSet& a, const CharSet& b) {
    CharSet out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

struct Job {
    const GoldExample* gold;
    const ExamplePrediction* pred;
};

// Shared front half of both evaluators: checks coverage and the gold shape
// the setting needs, and drops null-target examples for target_only.
std::vector<Job> plan(const PredictionMap& preds, std::span<const GoldExample> golds,
                      Setting setting, int& excluded) {
    std::vector<std::string> missing;
    std::vector<Job> jobs;
    jobs.reserve(golds.size());
    excluded = 0;
    for (const auto& g : golds) {
        auto it = preds.find(g.id);
        if (it == preds.end()) {
            missing.push_back(g.id);
            continue;
        }
        const bool wants_pairs = setting != Setting::tsd;
        if (wants_pairs && !g.pairs) {
            throw ValidationError(g.id, std::string("setting ") + to_string(setting) +
                                            " needs target/argument pairs");
        }
        if (!wants_pairs && !g.gold_char_set) {
            throw ValidationError(g.id, "setting tsd needs gold_chars");
        }
        if (setting == Setting::target_only && all_targets_null(g)) {
            ++excluded;
            continue;
        }
        jobs.push_back({&g, &it->second});
    }
    if (!missing.empty()) {
        std::string msg = "missing predictions for " + std::to_string(missing.size()) + " id(s):";
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
        if (missing.size() > 20) msg += " ...";
        throw ValidationError("predictions", msg);
    }
    return jobs;
}

double score_job(const Job& job, Setting setting, const EvalOptions& options) {
    const auto& g = *job.gold;
    const auto& p = *job.pred;
    switch (setting) {
        case Setting::tsd:
            return char_f1(p.spans.char_set, *g.gold_char_set);
        case Setting::target_and_arg:
            return char_f1(p.spans.char_set,
                           set_union(gold_target_chars(g), gold_argument_chars(g)));
        case Setting::arg_only:
            return char_f1(chars_from(p.roles.argument_char_spans), gold_argument_chars(g));
        case Setting::target_only: {
            const CharSet pred = options.raw_span_as_target
                                     ? p.spans.char_set
                                     : chars_from(p.roles.target_char_spans);
            return char_f1(pred, gold_target_chars(g));
        }
    }
    return 0.0;
}

EvalResult finish(std::vector<ExampleScore> scores, Setting setting, int excluded,
                  const EvalOptions& options) {
    EvalResult r;
    r.setting = setting;
    r.n_evaluated = static_cast<int>(scores.size());
    r.n_excluded = excluded;
    double sum = 0.0;
    for (const auto& s : scores) sum += s.f1;
    r.mean_f1 = scores.empty() ? 0.0 : sum / static_cast<double>(scores.size());
    r.per_example_f1 = std::move(scores);
    r.threshold_used = options.threshold;
    r.mode_used = options.mode;
    return r;
}

}  // namespace

EvalResult evaluate_dataset(const PredictionMap& preds, std::span<const GoldExample> golds,
                            Setting setting, const EvalOptions& options) {
    int excluded = 0;
    const auto jobs = plan(preds, golds, setting, excluded);
    std::vector<ExampleScore> scores(jobs.size());
    const auto count = static_cast<long long>(jobs.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < count; ++i) {
        const auto k = static_cast<std::size_t>(i);
        scores[k] = {jobs[k].gold->id, score_job(jobs[k], setting, options)};
    }
    return finish(std::move(scores), setting, excluded, options);
}

namespace reference {

EvalResult evaluate_dataset(const PredictionMap& preds, std::span<const GoldExample> golds,
                            Setting setting, const EvalOptions& options) {
    int excluded = 0;
    const auto jobs = plan(preds, golds, setting, excluded);
    std::vector<ExampleScore> scores;
    scores.reserve(jobs.size());
    for (const auto& job : jobs) scores.push_back({job.gold->id, score_job(job, setting, options)});
    return finish(std::move(scores), setting, excluded, options);
}

}  // namespace reference

// --- random baseline ---------------------------------------------------------

std::vector<CharSpan> whitespace_words(const std::string& text) {
    const auto scalars = utf8::decode(text);
    std::vector<CharSpan> words;
    int start = -1;
    for (std::size_t i = 0; i <= scalars.size(); ++i) {
        const bool space = i == scalars.size() || utf8::is_space(scalars[i]);
        if (space && start >= 0) {
            words.push_back({start, static_cast<int>(i)});
            start = -1;
        } else if (!space && start < 0) {
            start = static_cast<int>(i);
        }
    }
    return words;
}

namespace {

double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

SpanPrediction random_selection(const std::vector<CharSpan>& words, double p,
                                std::mt19937_64& rng) {
    SpanPrediction pred;
    std::vector<CharSpan> picked;
    for (std::size_t w = 0; w < words.size(); ++w) {
        const bool on = unit_draw(rng) < p;
        pred.word_scores.push_back({static_cast<int>(w), on ? 1.0 : 0.0});
        if (on) {
            pred.selected_words.push_back(static_cast<int>(w));
            picked.push_back(words[w]);
        }
    }
    // Whitespace words double as the token set.
    pred.selected_tokens = pred.selected_words;
    pred.char_spans = merge_spans(std::move(picked));
    pred.char_set = chars_of(pred.char_spans);
    return pred;
}

}  // namespace

SpanPrediction random_baseline(const GoldExample& gold, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p", "probability must lie in [0, 1]");
    std::mt19937_64 rng(seed);
    return random_selection(whitespace_words(gold.text), p, rng);
}

PredictionMap random_predictions(std::span<const GoldExample> golds, double p,
                                 std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p", "probability must lie in [0, 1]");
    PredictionMap out;
    for (const auto& g : golds) {
        std::mt19937_64 rng(splitmix64(seed ^ fnv1a(g.id)));
        const auto words = whitespace_words(g.text);
        ExamplePrediction ep;
        ep.spans = random_selection(words, p, rng);
        std::vector<CharSpan> target;
        std::vector<CharSpan> argument;
        for (int w : ep.spans.selected_words) {
            const bool is_target = unit_draw(rng) < 0.5;
            (is_target ? ep.roles.target_words : ep.roles.argument_words).push_back(w);
            (is_target ? target : argument).push_back(words[static_cast<std::size_t>(w)]);
        }
        ep.roles.target_char_spans = merge_spans(std::move(target));
        ep.roles.argument_char_spans = merge_spans(std::move(argument));
        out.emplace(g.id, std::move(ep));
    }
    return out;
}

// --- tuning -----------------------------------------------------------------

namespace {

std::vector<const AttentionRecord*> records_for(const RecordMap& records,
                                                std::span<const GoldExample> golds) {
    std::vector<const AttentionRecord*> out;
    std::vector<std::string> missing;
    for (const auto& g : golds) {
        auto it = records.find(g.id);
        if (it == records.end()) {
            missing.push_back(g.id);
            out.push_back(nullptr);
        } else {
            out.push_back(&it->second);
        }
    }
    if (!missing.empty()) {
        std::string msg = "no attention record for " + std::to_string(missing.size()) + " id(s):";
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
        throw ValidationError("records", msg);
    }
    return out;
}

template <typename Fn>
void parallel_for_each(std::size_t count, Fn&& fn) {
    std::exception_ptr failure;
    const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 4)
    for (long long i = 0; i < n; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(muted_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

PredictionMap build_predictions(const RecordMap& records, std::span<const GoldExample> golds,
                                const ExtractionConfig& cfg, const RoleOptions& roles) {
    const auto recs = records_for(records, golds);
    std::vector<ExamplePrediction> preds(golds.size());
    parallel_for_each(golds.size(), [&](std::size_t i) {
        const auto& r = *recs[i];
        preds[i].spans = extract_spans(r, cfg);
        preds[i].roles = roles_for(r, preds[i].spans, roles);
    });
    PredictionMap out;
    for (std::size_t i = 0; i < golds.size(); ++i) out.emplace(golds[i].id, std::move(preds[i]));
    return out;
}

TuneResult tune_threshold(const RecordMap& records, std::span<const GoldExample> golds,
                          Setting setting, std::span<const double> grid,
                          const PipelineOptions& options) {
    if (grid.empty()) throw ValidationError("grid", "threshold grid is empty");
    if (golds.empty()) throw ValidationError("golds", "no gold examples");
    if (records.empty()) throw ValidationError("records", "no attention records");
    for (double t : grid) {
        if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("grid", "thresholds must lie in [0, 1]");
    }
    const auto recs = records_for(records, golds);

    std::vector<std::vector<double>> token_scores(golds.size());
    parallel_for_each(golds.size(),
                      [&](std::size_t i) { token_scores[i] = average_heads(recs[i]->head_cls_rows); });

    // grid x example predictions, flattened so one parallel loop covers both.
    const std::size_t per = golds.size();
    std::vector<ExamplePrediction> flat(grid.size() * per);
    parallel_for_each(flat.size(), [&](std::size_t k) {
        const std::size_t t = k / per;
        const std::size_t i = k % per;
        ExtractionConfig cfg{grid[t], options.mode, options.include_special};
        flat[k].spans = extract_spans(*recs[i], token_scores[i], cfg);
        flat[k].roles = roles_for(*recs[i], flat[k].spans, options.roles);
    });

    TuneResult result;
    bool have_best = false;
    double best_mean = 0.0;
    for (std::size_t t = 0; t < grid.size(); ++t) {
        PredictionMap preds;
        for (std::size_t i = 0; i < per; ++i) preds.emplace(golds[i].id, std::move(flat[t * per + i]));
        EvalOptions eo{options.raw_span_as_target, grid[t], options.mode};
        auto r = evaluate_dataset(preds, golds, setting, eo);
        if (!have_best || r.mean_f1 > best_mean ||
            (r.mean_f1 == best_mean && grid[t] > result.best_threshold)) {
            best_mean = r.mean_f1;
            result.best_threshold = grid[t];
            have_best = true;
        }
        result.per_threshold.push_back(std::move(r));
    }
    return result;
}

namespace reference {

PredictionMap build_predictions(const RecordMap& records, std::span<const GoldExample> golds,
                                const ExtractionConfig& cfg, const RoleOptions& roles) {
    const auto recs = records_for(records, golds);
    PredictionMap out;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        ExamplePrediction ep;
        ep.spans = extract_spans(*recs[i], cfg);
        ep.roles = roles_for(*recs[i], ep.spans, roles);
        out.emplace(golds[i].id, std::move(ep));
    }
    return out;
}

TuneResult tune_threshold(const RecordMap& records, std::span<const GoldExample> golds,
                          Setting setting, std::span<const double> grid,
                          const PipelineOptions& options) {
    if (grid.empty()) throw ValidationError("grid", "threshold grid is empty");
    if (golds.empty()) throw ValidationError("golds", "no gold examples");
    TuneResult result;
    double best_mean = -1.0;
    for (double t : grid) {
        const auto preds = reference::build_predictions(
            records, golds, {t, options.mode, options.include_special}, options.roles);
        auto r = reference::evaluate_dataset(preds, golds, setting,
                                  {options.raw_span_as_target, t, options.mode});
        if (r.mean_f1 > best_mean || (r.mean_f1 == best_mean && t > result.best_threshold)) {
            best_mean = r.mean_f1;
            result.best_threshold = t;
        }
        result.per_threshold.push_back(std::move(r));
    }
    return result;
}

}  // namespace reference

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("grid", "not a number: \"" + item + "\"");
        }
    }
    if (parts.size() == 1) return parts;
    if (parts.size() != 3) throw ValidationError("grid", "expected a:b:step");
    const double lo = parts[0];
    const double hi = parts[1];
    const double step = parts[2];
    if (!(step > 0.0) || hi < lo) throw ValidationError("grid", "need step > 0 and a <= b");
    std::vector<double> grid;
    for (long k = 0;; ++k) {
        double v = lo + static_cast<double>(k) * step;
        if (v > hi + 1e-9) break;
        v = std::round(v * 1e9) / 1e9;  // 0.15000000000000002 -> 0.15
        grid.push_back(std::min(v, hi));
    }
    return grid;
}

std::vector<double> default_grid() { return parse_grid("0.05:1.00:0.05"); }

// --- reporting ---------------------------------------------------------------

json eval_result_to_json(const EvalResult& r) {
    json per = json::array();
    for (const auto& s : r.per_example_f1) per.push_back({{"id", s.id}, {"f1", s.f1}});
    return {{"setting", to_string(r.setting)},
            {"mean_f1", r.mean_f1},
            {"n_evaluated", r.n_evaluated},
            {"n_excluded", r.n_excluded},
            {"threshold", r.threshold_used},
            {"mode", to_string(r.mode_used)},
            {"per_example", per}};
}

json tune_result_to_json(const TuneResult& r) {
    json per = json::array();
    for (const auto& e : r.per_threshold) {
        per.push_back({{"threshold", e.threshold_used}, {"mean_f1", e.mean_f1}});
    }
    json best;
    for (const auto& e : r.per_threshold) {
        if (e.threshold_used == r.best_threshold) best = eval_result_to_json(e);
    }
    return {{"best_threshold", r.best_threshold}, {"grid", per}, {"best", best}};
}

std::string format_eval_table(std::span<const EvalResult> results) {
    std::ostringstream out;
    out << std::left << std::setw(16) << "setting" << std::right << std::setw(10) << "mode"
        << std::setw(11) << "threshold" << std::setw(10) << "mean_f1" << std::setw(12)
        << "evaluated" << std::setw(10) << "excluded" << "\n";
    for (const auto& r : results) {
        out << std::left << std::setw(16) << to_string(r.setting) << std::right << std::setw(10)
            << to_string(r.mode_used) << std::setw(11) << std::fixed << std::setprecision(2)
            << r.threshold_used << std::setw(10) << std::setprecision(4) << r.mean_f1
            << std::setw(12) << r.n_evaluated << std::setw(10) << r.n_excluded << "\n";
    }
    return out.str();
}

}  // namespace muted
