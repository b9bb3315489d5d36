#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "sblr/errors.hpp"
#include "sblr/params.hpp"
#include "test_util.hpp"

using namespace sblr;

namespace {

SblrParams one_component(std::vector<double> beta, double alpha, double rho, double gamma) {
    SblrParams p;
    Component c;
    c.beta = std::move(beta);
    c.alpha = alpha;
    c.rho = rho;
    c.gamma = gamma;
    p.components.push_back(std::move(c));
    return p;
}

}  // namespace

TEST_CASE("normalize: (2, 2, 0, ...) scales the age effect by 4") {
    const SblrParams p = one_component({2.0, 2.0, 0.0, 0.0, 0.0}, 0.5, -0.25, 0.125);
    const auto nc = normalize_components(p);
    REQUIRE(!nc[0].empty);
    CHECK(nc[0].scale == 4.0);
    CHECK(nc[0].alpha == 2.0);
    CHECK(nc[0].rho == -1.0);
    CHECK(nc[0].gamma == 0.5);
    CHECK(nc[0].entry(p.components[0], 1, 0) == 1.0);  // exactly
}

TEST_CASE("normalize: empty component stays empty") {
    const SblrParams p = one_component({0.0, 0.4, 0.0}, 0.5, 0.0, 0.0);  // single support node
    CHECK(p.component_empty(0));
    const auto nc = normalize_components(p);
    CHECK(nc[0].empty);

    const SblrParams q = one_component({0.3, 0.4, 0.1}, 0.0, 0.0, 0.0);  // zero age effect
    CHECK(q.component_empty(0));
    CHECK(normalize_components(q)[0].empty);
}

TEST_CASE("normalize: the age-effect / component product is unchanged") {
    Rng rng(77);
    for (int rep = 0; rep < 20; ++rep) {
        SblrParams p = testutil::random_params(1, 8, 0.8, 1000 + rep);
        const auto nc = normalize_components(p);
        REQUIRE(!nc[0].empty);
        const Component& c = p.components[0];
        for (int trial = 0; trial < 100; ++trial) {
            const double g = rng.uniform(50.0, 100.0);
            const int u = rng.uniform_int(0, 7);
            int v = rng.uniform_int(0, 6);
            if (v >= u) ++v;
            const double before = (c.gamma * g * g + c.rho * g + c.alpha) * c.beta[u] * c.beta[v];
            const double after = (nc[0].gamma * g * g + nc[0].rho * g + nc[0].alpha) *
                                 nc[0].beta[u] * nc[0].beta[v];
            CHECK(std::fabs(before - after) <= 1e-10 * std::max(1.0, std::fabs(before)));
        }
        // Largest off-diagonal magnitude is exactly one.
        double max_mag = 0.0;
        for (int u = 0; u < 8; ++u) {
            for (int v = 0; v < u; ++v) {
                max_mag = std::max(max_mag, std::fabs(nc[0].entry(c, u, v)));
            }
        }
        CHECK(max_mag == 1.0);
    }
}

TEST_CASE("recover_age_effect: identity standardization is a no-op") {
    const SblrParams p = one_component({0.5, 0.5, 0.0}, 0.3, -0.2, 0.1);
    StandardizationStats stats;
    stats.age_mean = 0.0;
    stats.age_sd = 1.0;
    stats.agesq_mean = 0.0;
    stats.agesq_sd = 1.0;
    const auto eff = recover_age_effect(p, stats);
    CHECK(eff[0].alpha == 0.3);
    CHECK(eff[0].rho == -0.2);
    CHECK(eff[0].gamma == 0.1);
}

TEST_CASE("recover_age_effect: hand-computed linear case") {
    const SblrParams p = one_component({0.5, 0.5, 0.0}, 0.4, 1.0, 0.0);
    StandardizationStats stats;
    stats.age_mean = 70.0;
    stats.age_sd = 8.0;
    stats.agesq_mean = 4900.0;
    stats.agesq_sd = 1000.0;
    const auto eff = recover_age_effect(p, stats);
    CHECK(eff[0].rho == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(eff[0].alpha == doctest::Approx(0.4 - 8.75).epsilon(1e-12));
    CHECK(eff[0].gamma == 0.0);
}

TEST_CASE("recover_age_effect: the two scales agree at any raw age") {
    Rng rng(88);
    for (int rep = 0; rep < 30; ++rep) {
        const SblrParams p = testutil::random_params(2, 5, 0.7, 2000 + rep);
        StandardizationStats stats;
        stats.age_mean = rng.uniform(60.0, 80.0);
        stats.age_sd = rng.uniform(2.0, 12.0);
        stats.agesq_mean = stats.age_mean * stats.age_mean + rng.uniform(0.0, 100.0);
        stats.agesq_sd = rng.uniform(200.0, 2000.0);
        const auto eff = recover_age_effect(p, stats);
        for (int h = 0; h < 2; ++h) {
            const Component& c = p.components[h];
            for (int t = 0; t < 30; ++t) {
                const double g = rng.uniform(55.0, 95.0);
                const double g_std = (g - stats.age_mean) / stats.age_sd;
                const double g2_std = (g * g - stats.agesq_mean) / stats.agesq_sd;
                const double in_std = c.gamma * g2_std + c.rho * g_std + c.alpha;
                const double in_raw = eff[h](g);
                CHECK(std::fabs(in_std - in_raw) <= 1e-10 * std::max(1.0, std::fabs(in_std)));
            }
        }
    }
}

TEST_CASE("recover_age_effect: degenerate age design is an error") {
    const SblrParams p = one_component({0.5, 0.5}, 0.1, 0.2, 0.3);
    StandardizationStats stats;  // zero sds
    CHECK_THROWS_AS(recover_age_effect(p, stats), ConfigError);
}

TEST_CASE("extract_subgraphs: clique over the support") {
    std::vector<double> beta(16, 0.0);
    beta[3] = 0.5;
    beta[9] = -0.25;
    beta[14] = 1.5;
    const SblrParams p = one_component(beta, 1.0, 0.0, 0.0);
    const auto subgraphs = extract_subgraphs(p);
    REQUIRE(subgraphs[0].size() == 3);
    std::set<std::pair<int, int>> edges;
    for (const auto& e : subgraphs[0]) edges.emplace(e.u, e.v);
    CHECK(edges == std::set<std::pair<int, int>>{{9, 3}, {14, 3}, {14, 9}});
}

TEST_CASE("extract_subgraphs: empty component gives no edges") {
    const SblrParams p = one_component({0.0, 0.0, 0.0}, 1.0, 1.0, 1.0);
    CHECK(extract_subgraphs(p)[0].empty());
}

TEST_CASE("extract_subgraphs: support of size k yields k(k-1)/2 edges") {
    Rng rng(99);
    for (int rep = 0; rep < 10; ++rep) {
        const int v = 12;
        std::vector<double> beta(v, 0.0);
        const int support = rng.uniform_int(2, v);
        for (int j = 0; j < support; ++j) beta[j] = rng.uniform(0.1, 1.0);
        const SblrParams p = one_component(beta, 0.5, 0.0, 0.0);
        const auto subgraphs = extract_subgraphs(p);
        CHECK(static_cast<int>(subgraphs[0].size()) == support * (support - 1) / 2);
    }
}
