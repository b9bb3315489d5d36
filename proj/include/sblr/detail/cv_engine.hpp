#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "sblr/dataset.hpp"
#include "sblr/errors.hpp"
#include "sblr/model_selection.hpp"
#include "sblr/rng.hpp"

namespace sblr::detail {

/// Fold-resolved training/test data shared by every (eta, delta) cell.
struct FoldData {
    std::vector<DesignTriple> train_designs;
    std::vector<int> train_labels;
    std::vector<DesignTriple> test_designs;
    std::vector<int> test_labels;
};

inline std::vector<FoldData> prepare_folds(const Dataset& dataset, const std::vector<int>& fold_of,
                                           int k_folds, StandardizeMode mode) {
    std::vector<FoldData> folds(k_folds);
    if (mode == StandardizeMode::Global) {
        auto [std_data, stats] = standardize(dataset);
        (void)stats;
        const auto designs = build_design(std_data);
        const auto labels = labels_of(std_data);
        for (int f = 0; f < k_folds; ++f) {
            for (int i = 0; i < static_cast<int>(designs.size()); ++i) {
                if (fold_of[i] == f) {
                    folds[f].test_designs.push_back(designs[i]);
                    folds[f].test_labels.push_back(labels[i]);
                } else {
                    folds[f].train_designs.push_back(designs[i]);
                    folds[f].train_labels.push_back(labels[i]);
                }
            }
        }
    } else {
        for (int f = 0; f < k_folds; ++f) {
            Dataset train, test;
            train.n_nodes = test.n_nodes = dataset.n_nodes;
            for (int i = 0; i < dataset.n_subjects(); ++i) {
                (fold_of[i] == f ? test : train).subjects.push_back(dataset.subjects[i]);
            }
            auto [std_train, stats] = standardize(train);
            folds[f].train_designs = build_design(std_train);
            folds[f].train_labels = labels_of(std_train);
            const auto std_test = apply_standardization(test, stats);
            folds[f].test_designs = build_design(std_test);
            folds[f].test_labels = labels_of(std_test);
        }
    }
    for (int f = 0; f < k_folds; ++f) {
        bool has0 = false, has1 = false;
        for (int y : folds[f].train_labels) (y ? has1 : has0) = true;
        if (!has0 || !has1) {
            throw DataError("cross_validate: a training fold lost one class; dataset too small");
        }
    }
    return folds;
}

/// Runs every (eta, fold) lane down the descending delta path. `Method`
/// provides: Model, fit_cell(designs, labels, delta, eta, seed, warm) and
/// eval(model, designs, labels). Cell seeds are keyed by grid position so
/// the result is independent of lane scheduling.
template <class Method>
std::vector<std::vector<std::vector<double>>> run_cv_lanes(const std::vector<FoldData>& folds,
                                                           const PenaltyGrid& grid,
                                                           const Method& method,
                                                           std::uint64_t seed,
                                                           const CvOptions& options) {
    const int n_etas = static_cast<int>(grid.etas.size());
    const int n_deltas = static_cast<int>(grid.deltas.size());
    const int k_folds = static_cast<int>(folds.size());

    std::vector<std::vector<std::vector<double>>> dev(
        n_etas, std::vector<std::vector<double>>(n_deltas, std::vector<double>(k_folds, 0.0)));

    struct Lane {
        int eta_idx;
        int fold;
    };
    std::vector<Lane> lanes;
    lanes.reserve(static_cast<std::size_t>(n_etas) * k_folds);
    for (int e = 0; e < n_etas; ++e) {
        for (int f = 0; f < k_folds; ++f) lanes.push_back({e, f});
    }

    auto run_lane = [&](const Lane& lane) {
        const FoldData& fd = folds[lane.fold];
        typename Method::Model warm{};
        bool have_warm = false;
        for (int d = 0; d < n_deltas; ++d) {
            const std::uint64_t cell_key =
                (static_cast<std::uint64_t>(lane.eta_idx) * n_deltas + d) * k_folds + lane.fold;
            const std::uint64_t cell_seed = substream_seed(seed, cell_key + 0x43764365ULL);
            typename Method::Model model = method.fit_cell(
                fd.train_designs, fd.train_labels, grid.deltas[d], grid.etas[lane.eta_idx],
                cell_seed, (options.warm_start && have_warm) ? &warm : nullptr);
            dev[lane.eta_idx][d][lane.fold] = method.eval(model, fd.test_designs, fd.test_labels);
            warm = std::move(model);
            have_warm = true;
        }
    };

    const int threads = std::max(1, options.threads);
    if (threads == 1) {
        for (const Lane& lane : lanes) run_lane(lane);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t j = next.fetch_add(1);
                if (j >= lanes.size()) return;
                run_lane(lanes[j]);
            }
        };
        std::vector<std::thread> pool;
        const int n_workers = std::min<int>(threads, static_cast<int>(lanes.size()));
        pool.reserve(n_workers);
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return dev;
}

/// Fill per-cell means and standard errors and apply the selection rule.
CvTable assemble_cv_table(const PenaltyGrid& grid, int k_folds,
                          const std::vector<int>& fold_of,
                          const std::vector<std::vector<std::vector<double>>>& dev);

}  // namespace sblr::detail
