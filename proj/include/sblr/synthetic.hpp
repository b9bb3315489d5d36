#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sblr/dataset.hpp"

namespace sblr {

/// Quadratic age effect lambda(g) = gamma g^2 + rho g + alpha in raw years.
struct AgeEffectSpec {
    double gamma = 0.0;
    double rho = 0.0;
    double alpha = 0.0;

    double operator()(double age) const { return gamma * age * age + rho * age + alpha; }
};

/// Benchmark generator configuration. Networks are built from overlapping
/// rank-1 basis subgraphs with uniform loadings plus bounded relative noise;
/// follow-up visits perturb every edge by a percent-scale relative change
/// and advance age by one year. The response depends on two of the basis
/// subgraphs through configurable age effects; the default shapes are one
/// increasing linear effect crossing zero mid-range and one constant
/// negative effect, with magnitudes calibrated so the standardized signal
/// keeps held-out deviance near the coin-flip ceiling (strong effects
/// saturate the logistic response and make every classifier look perfect).
struct GeneratorConfig {
    int n = 100;
    int v = 20;
    std::uint64_t seed = 0;
    double noise_frac = 0.05;  // first-visit relative noise bound
    int basis_count = 11;
    double age_low = 60.0;
    double age_high = 90.0;
    int max_visits = 5;
    std::vector<int> signal_indices = {3, 11};  // 1-based into the basis list
    std::vector<AgeEffectSpec> age_effects = {{0.0, 0.008, -0.6}, {0.0, 0.0, -0.08}};
};

using BasisVector = std::vector<std::uint8_t>;  // 0/1 node indicator

struct GroundTruth {
    std::vector<std::vector<int>> signal_supports;
    std::vector<std::pair<int, int>> signal_edges;  // sorted (u, v<u) clique union
    std::vector<AgeEffectSpec> effects;
    std::uint64_t seed = 0;
    GeneratorConfig config;
};

struct SyntheticData {
    Dataset dataset;
    GroundTruth truth;
};

struct Recovery {
    double tpr = 0.0;
    double fpr = 0.0;
};

/// Basis subgraph node indicators: support size h+1 for the h-th vector
/// (1-based, up to ten) and 4 for any later one; supports drawn uniformly
/// without replacement. Deterministic given the config seed.
std::vector<BasisVector> gen_basis(const GeneratorConfig& config);

/// One subject's visit sequence (no label). Draw order within the subject's
/// substream: visit count, baseline age, the basis loadings in order, the
/// first-visit noise factors over lower-triangular (u, v<u) pairs in row
/// order, then per follow-up visit the relative-change factors in the same
/// pair order. Substream key: subjects tag, then subject index.
LongitudinalSubject gen_subject(const GeneratorConfig& config,
                                const std::vector<BasisVector>& basis, int subject_index);

/// Response probabilities: pools the dataset's own standardization, then
/// evaluates the two signal components with raw-age effects.
std::vector<double> response_probabilities(const Dataset& dataset, const GeneratorConfig& config,
                                           const std::vector<BasisVector>& basis);

/// Bernoulli labels from per-subject substreams (labels tag, subject index).
std::vector<int> draw_labels(const std::vector<double>& probabilities,
                             const GeneratorConfig& config);

GroundTruth ground_truth_of(const GeneratorConfig& config, const std::vector<BasisVector>& basis);

/// Full pipeline: basis, subjects, pooled standardization, labels.
SyntheticData generate(const GeneratorConfig& config);

/// TPR: recovered fraction of true signal edges. FPR: fraction of the
/// non-signal pairs that were selected.
Recovery evaluate_recovery(const std::vector<std::pair<int, int>>& estimated_edges,
                           const GroundTruth& truth, int v);

void save_truth(const GroundTruth& truth, const std::string& path);
GroundTruth load_truth(const std::string& path);

}  // namespace sblr
