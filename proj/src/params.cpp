#include "sblr/params.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sblr/errors.hpp"

namespace sblr {

bool SblrParams::component_empty(int h) const {
    const Component& c = components[h];
    if (c.alpha == 0.0 && c.rho == 0.0 && c.gamma == 0.0) return true;
    int nnz = 0;
    for (double b : c.beta) {
        if (b != 0.0 && ++nnz >= 2) return false;
    }
    return true;
}

bool SblrParams::all_empty() const {
    for (int h = 0; h < n_components(); ++h) {
        if (!component_empty(h)) return false;
    }
    return true;
}

std::vector<NormalizedComponent> normalize_components(const SblrParams& params) {
    std::vector<NormalizedComponent> out(params.n_components());
    for (int h = 0; h < params.n_components(); ++h) {
        const Component& c = params.components[h];
        NormalizedComponent& nc = out[h];
        if (params.component_empty(h)) continue;

        double max_mag = 0.0;
        const int v = static_cast<int>(c.beta.size());
        for (int a = 0; a < v; ++a) {
            for (int b = 0; b < a; ++b) {
                max_mag = std::max(max_mag, std::fabs(c.beta[a] * c.beta[b]));
            }
        }
        if (max_mag == 0.0) continue;  // support of size <= 1

        nc.empty = false;
        nc.scale = max_mag;
        const double inv_root = 1.0 / std::sqrt(max_mag);
        nc.beta.resize(c.beta.size());
        for (std::size_t i = 0; i < c.beta.size(); ++i) nc.beta[i] = c.beta[i] * inv_root;
        nc.alpha = c.alpha * max_mag;
        nc.rho = c.rho * max_mag;
        nc.gamma = c.gamma * max_mag;
    }
    return out;
}

std::vector<AgeEffect> recover_age_effect(const SblrParams& params, const StandardizationStats& stats) {
    if (stats.age_sd <= 0.0 || stats.agesq_sd <= 0.0) {
        throw ConfigError("recover_age_effect: degenerate age standardization (zero sd)");
    }
    std::vector<AgeEffect> out;
    out.reserve(params.components.size());
    for (const Component& c : params.components) {
        AgeEffect e;
        e.gamma = c.gamma / stats.agesq_sd;
        e.rho = c.rho / stats.age_sd;
        e.alpha = c.alpha - c.rho * stats.age_mean / stats.age_sd -
                  c.gamma * stats.agesq_mean / stats.agesq_sd;
        out.push_back(e);
    }
    return out;
}

std::vector<std::vector<SubgraphEdge>> extract_subgraphs(const SblrParams& params) {
    std::vector<std::vector<SubgraphEdge>> out(params.n_components());
    const auto normalized = normalize_components(params);
    for (int h = 0; h < params.n_components(); ++h) {
        if (normalized[h].empty) continue;
        const Component& c = params.components[h];
        std::vector<int> support;
        for (int u = 0; u < static_cast<int>(c.beta.size()); ++u) {
            if (c.beta[u] != 0.0) support.push_back(u);
        }
        for (std::size_t a = 1; a < support.size(); ++a) {
            for (std::size_t b = 0; b < a; ++b) {
                SubgraphEdge e;
                e.u = support[a];
                e.v = support[b];
                e.weight = normalized[h].entry(c, e.u, e.v);
                out[h].push_back(e);
            }
        }
    }
    return out;
}

std::vector<std::pair<int, int>> selected_edges(const SblrParams& params) {
    std::set<std::pair<int, int>> uniq;
    for (const auto& edges : extract_subgraphs(params)) {
        for (const auto& e : edges) uniq.emplace(e.u, e.v);
    }
    return {uniq.begin(), uniq.end()};
}

}  // namespace sblr
