// Serial reference vs OpenMP kernels on a synthetic TBO-style corpus.
//
//   muted_bench_kernels [examples=2000] [repeats=3]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "muted/evaluation.hpp"
#include "muted/synthetic.hpp"

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double best_of(int repeats, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = Clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    const int examples = argc > 1 ? std::atoi(argv[1]) : 2000;
    const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;

    std::mt19937_64 rng(42);
    muted::RecordMap records;
    std::vector<muted::GoldExample> golds;
    for (int i = 0; i < examples; ++i) {
        const std::string id = "ex-" + std::to_string(i);
        auto r = muted::synthetic_record(rng, id);
        muted::GoldExample g{id, r.text, r.language, std::nullopt, std::vector<muted::GoldPair>{}};
        // First word as target, last word as argument.
        const auto words = muted::whitespace_words(r.text);
        muted::GoldPair pair;
        if (i % 4 != 0) pair.target = std::vector<muted::CharSpan>{words.front()};
        pair.argument = {words.back()};
        g.pairs->push_back(pair);
        golds.push_back(std::move(g));
        records.emplace(id, std::move(r));
    }
    const auto grid = muted::default_grid();

#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#endif
    std::printf("examples: %d, grid points: %zu\n", examples, grid.size());

    const auto preds = muted::build_predictions(records, golds, {0.5, muted::ThresholdMode::relative});
    const double build_ser = best_of(repeats, [&] {
        (void)muted::reference::build_predictions(records, golds, {0.5, muted::ThresholdMode::relative});
    });
    const double build_par = best_of(repeats, [&] {
        (void)muted::build_predictions(records, golds, {0.5, muted::ThresholdMode::relative});
    });
    const double eval_ser = best_of(repeats, [&] {
        (void)muted::reference::evaluate_dataset(preds, golds, muted::Setting::target_and_arg);
    });
    const double eval_par = best_of(repeats, [&] {
        (void)muted::evaluate_dataset(preds, golds, muted::Setting::target_and_arg);
    });
    muted::TuneResult tuned_ser, tuned_par;
    const double tune_ser = best_of(repeats, [&] {
        tuned_ser = muted::reference::tune_threshold(records, golds, muted::Setting::arg_only, grid);
    });
    const double tune_par = best_of(repeats, [&] {
        tuned_par = muted::tune_threshold(records, golds, muted::Setting::arg_only, grid);
    });

    std::printf("%-20s %12s %12s %8s\n", "kernel", "serial (s)", "openmp (s)", "speedup");
    std::printf("%-20s %12.5f %12.5f %8.2f\n", "build_predictions", build_ser, build_par, build_ser / build_par);
    std::printf("%-20s %12.5f %12.5f %8.2f\n", "evaluate_dataset", eval_ser, eval_par, eval_ser / eval_par);
    std::printf("%-20s %12.5f %12.5f %8.2f\n", "tune_threshold", tune_ser, tune_par, tune_ser / tune_par);

    const bool agree = tuned_ser.best_threshold == tuned_par.best_threshold &&
                       tuned_ser.per_threshold == tuned_par.per_threshold;
    std::printf("serial and parallel tuning agree: %s (best threshold %.2f)\n", agree ? "yes" : "NO",
                tuned_par.best_threshold);
    return agree ? 0 : 1;
}
