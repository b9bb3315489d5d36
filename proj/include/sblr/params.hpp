#pragma once

#include <utility>
#include <vector>

#include "sblr/dataset.hpp"

namespace sblr {

/// One rank-1 component: a node loading vector and the quadratic age-effect
/// coefficients. The component's contribution to the logit for a subject is
/// alpha * b'x0 b + rho * b'x1 b + gamma * b'x2 b with b = beta.
struct Component {
    std::vector<double> beta;
    double alpha = 0.0;
    double rho = 0.0;
    double gamma = 0.0;

    bool operator==(const Component&) const = default;
};

struct SblrParams {
    double intercept = 0.0;
    std::vector<Component> components;

    int n_components() const { return static_cast<int>(components.size()); }
    int n_nodes() const { return components.empty() ? 0 : static_cast<int>(components[0].beta.size()); }

    /// A component is empty when it contributes nothing off-diagonal: either
    /// its age coefficients are all zero or fewer than two beta entries are
    /// nonzero.
    bool component_empty(int h) const;
    bool all_empty() const;

    bool operator==(const SblrParams&) const = default;
};

/// Quadratic age effect in the original (raw) age scale.
struct AgeEffect {
    double gamma = 0.0;
    double rho = 0.0;
    double alpha = 0.0;

    double operator()(double age) const { return gamma * age * age + rho * age + alpha; }
};

struct SubgraphEdge {
    int u = 0;  // u > v
    int v = 0;
    double weight = 0.0;  // normalized component-matrix entry
};

/// A component rescaled so the largest-magnitude off-diagonal entry of
/// beta beta' is exactly 1, with the age coefficients scaled by the inverse
/// square so the product lambda(g) * beta beta' is unchanged.
struct NormalizedComponent {
    bool empty = true;
    std::vector<double> beta;          // beta / sqrt(scale)
    double scale = 0.0;                // the pre-normalization max |beta_u beta_v|
    double alpha = 0.0, rho = 0.0, gamma = 0.0;  // scaled age coefficients

    /// Entry (u,v) of the normalized component matrix, computed as the raw
    /// product divided by the scale so the maximum is exactly +/-1.
    double entry(const Component& raw, int u, int v) const {
        return raw.beta[u] * raw.beta[v] / scale;
    }
};

std::vector<NormalizedComponent> normalize_components(const SblrParams& params);

/// Map standardized-scale age coefficients back to the raw age scale. Throws
/// ConfigError when the age design is degenerate (zero sd).
std::vector<AgeEffect> recover_age_effect(const SblrParams& params, const StandardizationStats& stats);

/// Edge lists of the nonempty components; each is a clique over the support
/// of its beta vector, with normalized entries as weights.
std::vector<std::vector<SubgraphEdge>> extract_subgraphs(const SblrParams& params);

/// Union of the component edge sets as sorted (u, v<u) pairs.
std::vector<std::pair<int, int>> selected_edges(const SblrParams& params);

}  // namespace sblr
