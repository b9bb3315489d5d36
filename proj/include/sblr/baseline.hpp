#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sblr/dataset.hpp"
#include "sblr/model_selection.hpp"

namespace sblr {

/// Unstructured logistic model on the three matrix predictors: symmetric
/// zero-diagonal coefficient matrices stored as strictly-lower-triangular
/// vectors. The linear predictor pairs each entry with twice the matching
/// predictor entry, which is the matrix dot product restricted to one
/// triangle.
struct UnstructuredParams {
    int n_nodes = 0;
    double intercept = 0.0;
    std::vector<double> b1, b2, b3;  // length V(V-1)/2 each

    static int tri_size(int v) { return v * (v - 1) / 2; }
    static int tri_index(int u, int v) { return u * (u - 1) / 2 + v; }  // u > v
    static std::pair<int, int> tri_unindex(int idx);

    bool all_zero() const;
    /// Union of nonzero entries across the three matrices as (u, v<u) pairs.
    std::vector<std::pair<int, int>> selected_edges() const;

    bool operator==(const UnstructuredParams&) const = default;
};

struct UnstructuredFitOptions {
    double tolerance = 1e-5;
    int max_cycles = 1000;
    bool descent_safeguard = true;
    const UnstructuredParams* warm = nullptr;   // initial point; zeros otherwise
    std::vector<double>* loss_trace = nullptr;  // per full-sweep objective values
};

double logit_unstructured(const UnstructuredParams& params, const DesignTriple& design);
double loss_unstructured(const UnstructuredParams& params, const std::vector<DesignTriple>& designs,
                         const std::vector<int>& labels, double delta, double eta);
double deviance_unstructured(const UnstructuredParams& params,
                             const std::vector<DesignTriple>& designs,
                             const std::vector<int>& labels);

/// Cyclic coordinate descent with quadratic surrogates and soft-threshold
/// updates on the stacked lower-triangular features; the intercept is
/// unpenalized. Deterministic: the objective is convex, so the zero (or
/// warm) start needs no restarts.
UnstructuredParams fit_unstructured(const std::vector<DesignTriple>& designs,
                                    const std::vector<int>& labels, double delta, double eta,
                                    const UnstructuredFitOptions& options = {});

/// Same delta_max search and grid shape as the structured model, probing
/// with fit_unstructured.
PenaltyGrid make_penalty_grid_unstructured(const std::vector<DesignTriple>& designs,
                                           const std::vector<int>& labels,
                                           const std::vector<double>& etas, int n_deltas,
                                           const UnstructuredFitOptions& options = {});

CvTable cv_unstructured(const Dataset& dataset, const PenaltyGrid& grid, int k_folds,
                        std::uint64_t seed, const CvOptions& options = {},
                        const UnstructuredFitOptions& fit_options = {});

}  // namespace sblr
