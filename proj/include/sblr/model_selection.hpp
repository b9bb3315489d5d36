#pragma once

#include <cstdint>
#include <vector>

#include "sblr/dataset.hpp"
#include "sblr/solver.hpp"

namespace sblr {

/// Penalty grid: one shared list of delta values (strictly decreasing,
/// log-equally spaced from delta_max down to 0.01 * delta_max) crossed with
/// a list of L1 fractions.
struct PenaltyGrid {
    std::vector<double> etas;
    std::vector<double> deltas;
    double delta_max = 0.0;
    double delta_min = 0.0;
};

struct CvCell {
    double mean_deviance = 0.0;
    double std_error = 0.0;  // sample sd of fold deviances / sqrt(n_folds)
    std::vector<double> fold_deviances;
};

struct CvSelection {
    int eta_index = -1;
    int delta_index = -1;
    double eta = 0.0;
    double delta = 0.0;
    double mean_deviance = 0.0;
};

struct CvTable {
    PenaltyGrid grid;
    int n_folds = 0;
    std::vector<int> fold_of_subject;
    std::vector<std::vector<CvCell>> cells;  // [eta_index][delta_index]
    CvSelection selected;
};

enum class StandardizeMode {
    PerFold,  // recompute standardization on each training fold (no leakage)
    Global,   // standardize once on the full dataset before splitting
};

struct CvOptions {
    StandardizeMode standardize = StandardizeMode::PerFold;
    bool warm_start = true;  // carry each lane's previous solution down the delta path
    int threads = 1;
};

/// Held-out deviance: minus twice the average log-likelihood.
double deviance(const SblrParams& params, const std::vector<DesignTriple>& designs,
                const std::vector<int>& labels);

/// Find delta_max by geometric search: starting from delta = 1, double or
/// halve until a bracket is found where the fit at the smallest eta is
/// all-empty above and nonempty below, then bisect ten times (log scale) and
/// keep the empty upper end. The probe fits use three fixed-seed restarts.
/// Throws ConfigError if no bracket appears within 60 doublings.
PenaltyGrid make_penalty_grid(const std::vector<DesignTriple>& designs,
                              const std::vector<int>& labels, const std::vector<double>& etas,
                              int n_deltas, const FitConfig& probe_config);

/// The exact fit configuration the grid search probes with (three restarts
/// on a dedicated substream); delta_max guarantees emptiness under it.
FitConfig grid_probe_config(FitConfig base);

/// Stratified k-fold assignment: per-class shuffles dealt round-robin, so
/// fold sizes differ by at most one and per-fold class counts track the
/// global ratio within one subject. Deterministic given the seed.
std::vector<int> stratified_folds(const std::vector<int>& labels, int k_folds, std::uint64_t seed);

/// Cross-validate the coordinate-descent model over the grid. Fold fits are
/// keyed by (eta, delta, fold) so threading cannot change the table.
CvTable cross_validate(const Dataset& dataset, const PenaltyGrid& grid, int k_folds,
                       const FitConfig& fit_config, std::uint64_t seed,
                       const CvOptions& options = {});

/// One-standard-error rule: per eta, take the most penalized delta whose
/// mean deviance is within one standard error of that eta's minimum; among
/// those, return the pair with the smallest mean deviance (ties prefer
/// larger delta, then larger eta).
CvSelection one_se_select(const CvTable& table);

}  // namespace sblr
