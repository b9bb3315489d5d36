#include "sblr/model_selection.hpp"

#include <algorithm>
#include <cmath>

#include "sblr/detail/cv_engine.hpp"
#include "sblr/errors.hpp"
#include "sblr/rng.hpp"

namespace sblr {

double deviance(const SblrParams& params, const std::vector<DesignTriple>& designs,
                const std::vector<int>& labels) {
    const int m = static_cast<int>(designs.size());
    double ll = 0.0;
    for (int i = 0; i < m; ++i) {
        ll += log_likelihood(labels[i], logit_value(params, designs[i]));
    }
    return -2.0 * ll / m;
}

namespace {

constexpr std::uint64_t kGridProbeKey = 0x44656C4DULL;
constexpr std::uint64_t kFoldKey = 0x466F6C64ULL;

}  // namespace

FitConfig grid_probe_config(FitConfig base) {
    base.n_restarts = 3;
    base.seed = substream_seed(base.seed, kGridProbeKey);
    return base;
}

namespace {

bool all_empty_at(const std::vector<DesignTriple>& designs, const std::vector<int>& labels,
                  double delta, double eta, const FitConfig& probe) {
    FitConfig cfg = grid_probe_config(probe);
    cfg.delta = delta;
    cfg.eta = eta;
    return fit(designs, labels, cfg).params.all_empty();
}

}  // namespace

PenaltyGrid make_penalty_grid(const std::vector<DesignTriple>& designs,
                              const std::vector<int>& labels, const std::vector<double>& etas,
                              int n_deltas, const FitConfig& probe_config) {
    if (etas.empty()) throw ConfigError("make_penalty_grid: need at least one eta");
    if (n_deltas < 2) throw ConfigError("make_penalty_grid: need at least two delta values");
    for (double e : etas) {
        if (!(e > 0.0 && e <= 1.0)) throw ConfigError("make_penalty_grid: etas must lie in (0, 1]");
    }
    const double eta_min = *std::min_element(etas.begin(), etas.end());

    double lo = 0.0, hi = 0.0;  // lo: nonempty fit, hi: all-empty fit
    if (all_empty_at(designs, labels, 1.0, eta_min, probe_config)) {
        hi = 1.0;
        double x = 1.0;
        for (int step = 0; step < 60 && lo == 0.0; ++step) {
            x *= 0.5;
            if (all_empty_at(designs, labels, x, eta_min, probe_config)) {
                hi = x;
            } else {
                lo = x;
            }
        }
        if (lo == 0.0) {
            throw ConfigError("make_penalty_grid: no penalty produces a nonempty fit");
        }
    } else {
        lo = 1.0;
        double x = 1.0;
        for (int step = 0; step < 60 && hi == 0.0; ++step) {
            x *= 2.0;
            if (all_empty_at(designs, labels, x, eta_min, probe_config)) {
                hi = x;
            } else {
                lo = x;
            }
        }
        if (hi == 0.0) {
            throw ConfigError("make_penalty_grid: no penalty shrinks the model to empty");
        }
    }
    for (int step = 0; step < 10; ++step) {
        const double mid = std::sqrt(lo * hi);
        if (all_empty_at(designs, labels, mid, eta_min, probe_config)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    PenaltyGrid grid;
    grid.etas = etas;
    grid.delta_max = hi;
    grid.delta_min = 0.01 * hi;
    grid.deltas.resize(n_deltas);
    for (int j = 0; j < n_deltas; ++j) {
        const double frac = static_cast<double>(j) / (n_deltas - 1);
        grid.deltas[j] = (j == n_deltas - 1) ? grid.delta_min : grid.delta_max * std::pow(0.01, frac);
    }
    return grid;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int k_folds, std::uint64_t seed) {
    const int n = static_cast<int>(labels.size());
    if (k_folds < 2) throw ConfigError("cross_validate: need at least two folds");
    if (k_folds > n) throw ConfigError("cross_validate: more folds than subjects");

    std::vector<int> class0, class1;
    for (int i = 0; i < n; ++i) (labels[i] ? class1 : class0).push_back(i);

    Rng rng(seed, kFoldKey);
    auto shuffle = [&rng](std::vector<int>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            std::swap(v[i], v[rng.uniform_int(0, i)]);
        }
    };
    shuffle(class0);
    shuffle(class1);

    std::vector<int> fold_of(n, 0);
    int pos = 0;
    for (int i : class0) fold_of[i] = pos++ % k_folds;
    for (int i : class1) fold_of[i] = pos++ % k_folds;
    return fold_of;
}

namespace detail {

CvTable assemble_cv_table(const PenaltyGrid& grid, int k_folds, const std::vector<int>& fold_of,
                          const std::vector<std::vector<std::vector<double>>>& dev) {
    CvTable table;
    table.grid = grid;
    table.n_folds = k_folds;
    table.fold_of_subject = fold_of;
    const int n_etas = static_cast<int>(grid.etas.size());
    const int n_deltas = static_cast<int>(grid.deltas.size());
    table.cells.assign(n_etas, std::vector<CvCell>(n_deltas));
    for (int e = 0; e < n_etas; ++e) {
        for (int d = 0; d < n_deltas; ++d) {
            CvCell& cell = table.cells[e][d];
            cell.fold_deviances = dev[e][d];
            double mean = 0.0;
            for (double x : cell.fold_deviances) mean += x;
            mean /= k_folds;
            double ss = 0.0;
            for (double x : cell.fold_deviances) ss += (x - mean) * (x - mean);
            cell.mean_deviance = mean;
            cell.std_error = std::sqrt(ss / (k_folds - 1)) / std::sqrt(static_cast<double>(k_folds));
        }
    }
    table.selected = one_se_select(table);
    return table;
}

}  // namespace detail

namespace {

struct SblrCvMethod {
    FitConfig base;
    using Model = SblrParams;

    Model fit_cell(const std::vector<DesignTriple>& designs, const std::vector<int>& labels,
                   double delta, double eta, std::uint64_t seed, const Model* warm) const {
        FitConfig cfg = base;
        cfg.delta = delta;
        cfg.eta = eta;
        cfg.seed = seed;
        std::vector<SblrParams> extras;
        if (warm) extras.push_back(*warm);
        return fit(designs, labels, cfg, extras).params;
    }

    double eval(const Model& model, const std::vector<DesignTriple>& designs,
                const std::vector<int>& labels) const {
        return deviance(model, designs, labels);
    }
};

}  // namespace

CvTable cross_validate(const Dataset& dataset, const PenaltyGrid& grid, int k_folds,
                       const FitConfig& fit_config, std::uint64_t seed, const CvOptions& options) {
    const auto labels = labels_of(dataset);
    const auto fold_of = stratified_folds(labels, k_folds, seed);
    const auto folds = detail::prepare_folds(dataset, fold_of, k_folds, options.standardize);
    SblrCvMethod method{fit_config};
    const auto dev = detail::run_cv_lanes(folds, grid, method, seed, options);
    return detail::assemble_cv_table(grid, k_folds, fold_of, dev);
}

CvSelection one_se_select(const CvTable& table) {
    const int n_etas = static_cast<int>(table.grid.etas.size());
    const int n_deltas = static_cast<int>(table.grid.deltas.size());

    CvSelection best;
    bool have = false;
    for (int e = 0; e < n_etas; ++e) {
        // Minimum-deviance cell for this eta; ties prefer the larger delta
        // (the smaller index, deltas are descending).
        int min_d = 0;
        for (int d = 1; d < n_deltas; ++d) {
            if (table.cells[e][d].mean_deviance < table.cells[e][min_d].mean_deviance) min_d = d;
        }
        const double threshold =
            table.cells[e][min_d].mean_deviance + table.cells[e][min_d].std_error;
        int pick = min_d;
        for (int d = 0; d < n_deltas; ++d) {  // descending deltas: first hit is largest
            if (table.cells[e][d].mean_deviance <= threshold) {
                pick = d;
                break;
            }
        }
        const double dev = table.cells[e][pick].mean_deviance;
        // Across etas: smallest deviance; ties prefer larger delta, then larger eta.
        bool better = false;
        if (!have) {
            better = true;
        } else if (dev != best.mean_deviance) {
            better = dev < best.mean_deviance;
        } else if (table.grid.deltas[pick] != best.delta) {
            better = table.grid.deltas[pick] > best.delta;
        } else {
            better = table.grid.etas[e] >= best.eta;
        }
        if (better) {
            best.eta_index = e;
            best.delta_index = pick;
            best.eta = table.grid.etas[e];
            best.delta = table.grid.deltas[pick];
            best.mean_deviance = dev;
            have = true;
        }
    }
    return best;
}

}  // namespace sblr
