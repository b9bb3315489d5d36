#include "sblr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "sblr/errors.hpp"
#include "sblr/rng.hpp"

namespace sblr {

namespace {

using nlohmann::json;

constexpr std::uint64_t kBasisTag = 0x42415349ULL;
constexpr std::uint64_t kSubjectTag = 0x5355424AULL;
constexpr std::uint64_t kLabelTag = 0x4C41424CULL;

void check_config(const GeneratorConfig& cfg) {
    if (cfg.n < 2) throw ConfigError("generator: need at least two subjects");
    if (cfg.v < 12) throw ConfigError("generator: V must be at least 12 to host the basis supports");
    if (cfg.basis_count < 1) throw ConfigError("generator: need at least one basis vector");
    if (cfg.max_visits < 1) throw ConfigError("generator: max_visits must be >= 1");
    if (!(cfg.noise_frac >= 0.0)) throw ConfigError("generator: noise_frac must be >= 0");
    if (!(cfg.age_low < cfg.age_high)) throw ConfigError("generator: need age_low < age_high");
    if (cfg.signal_indices.size() != cfg.age_effects.size()) {
        throw ConfigError("generator: one age effect per signal index required");
    }
    for (int idx : cfg.signal_indices) {
        if (idx < 1 || idx > cfg.basis_count) {
            throw ConfigError("generator: signal index outside the basis list");
        }
    }
}

int support_size(int h_one_based) {
    return h_one_based <= 10 ? h_one_based + 1 : 4;
}

}  // namespace

std::vector<BasisVector> gen_basis(const GeneratorConfig& config) {
    check_config(config);
    Rng rng(config.seed, kBasisTag);
    std::vector<BasisVector> basis;
    basis.reserve(config.basis_count);
    std::vector<int> nodes(config.v);
    for (int h = 1; h <= config.basis_count; ++h) {
        const int size = support_size(h);
        std::iota(nodes.begin(), nodes.end(), 0);
        for (int j = 0; j < size; ++j) {
            std::swap(nodes[j], nodes[rng.uniform_int(j, config.v - 1)]);
        }
        BasisVector q(config.v, 0);
        for (int j = 0; j < size; ++j) q[nodes[j]] = 1;
        basis.push_back(std::move(q));
    }
    return basis;
}

LongitudinalSubject gen_subject(const GeneratorConfig& config,
                                const std::vector<BasisVector>& basis, int subject_index) {
    Rng rng(substream_seed(config.seed, kSubjectTag), static_cast<std::uint64_t>(subject_index));
    const int v = config.v;

    const int visits = rng.uniform_int(1, config.max_visits);
    const double base_age = rng.uniform(config.age_low, config.age_high);
    std::vector<double> loadings(basis.size());
    for (double& l : loadings) l = rng.uniform(0.0, 1.0);

    Matrix w(v);
    for (std::size_t h = 0; h < basis.size(); ++h) {
        const BasisVector& q = basis[h];
        for (int r = 0; r < v; ++r) {
            if (!q[r]) continue;
            for (int c = 0; c < v; ++c) {
                if (q[c]) w(r, c) += loadings[h];
            }
        }
    }
    for (int r = 0; r < v; ++r) w(r, r) = 0.0;
    for (int r = 1; r < v; ++r) {
        for (int c = 0; c < r; ++c) {
            const double factor = 1.0 + rng.uniform(-config.noise_frac, config.noise_frac);
            w(r, c) *= factor;
            w(c, r) = w(r, c);
        }
    }

    LongitudinalSubject subject;
    subject.visits.resize(visits);
    subject.visits[0].age = base_age;
    subject.visits[0].network = w;
    for (int s = 1; s < visits; ++s) {
        Matrix next = subject.visits[s - 1].network;
        for (int r = 1; r < v; ++r) {
            for (int c = 0; c < r; ++c) {
                const double factor = 1.0 + rng.normal() / 100.0;
                next(r, c) *= factor;
                next(c, r) = next(r, c);
            }
        }
        subject.visits[s].age = base_age + s;
        subject.visits[s].network = std::move(next);
    }
    return subject;
}

std::vector<double> response_probabilities(const Dataset& dataset, const GeneratorConfig& config,
                                           const std::vector<BasisVector>& basis) {
    const auto [std_data, stats] = standardize(dataset);
    (void)stats;

    std::vector<std::vector<int>> supports;
    for (int idx : config.signal_indices) {
        std::vector<int> sup;
        const BasisVector& q = basis[idx - 1];
        for (int u = 0; u < config.v; ++u) {
            if (q[u]) sup.push_back(u);
        }
        supports.push_back(std::move(sup));
    }

    std::vector<double> probs(dataset.n_subjects());
    for (int i = 0; i < dataset.n_subjects(); ++i) {
        const auto& raw_visits = dataset.subjects[i].visits;
        const auto& std_visits = std_data.subjects[i].visits;
        double z = 0.0;
        for (std::size_t k = 0; k < supports.size(); ++k) {
            const AgeEffectSpec& effect = config.age_effects[k];
            double acc = 0.0;
            for (std::size_t s = 0; s < raw_visits.size(); ++s) {
                const Matrix& w = std_visits[s].network;
                double quad = 0.0;
                for (int a : supports[k]) {
                    for (int b : supports[k]) quad += w(a, b);
                }
                acc += effect(raw_visits[s].age) * quad;
            }
            z += acc / static_cast<double>(raw_visits.size());
        }
        probs[i] = 1.0 / (1.0 + std::exp(-z));
    }
    return probs;
}

std::vector<int> draw_labels(const std::vector<double>& probabilities,
                             const GeneratorConfig& config) {
    std::vector<int> labels(probabilities.size());
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        Rng rng(substream_seed(config.seed, kLabelTag), static_cast<std::uint64_t>(i));
        labels[i] = rng.bernoulli(probabilities[i]) ? 1 : 0;
    }
    return labels;
}

GroundTruth ground_truth_of(const GeneratorConfig& config, const std::vector<BasisVector>& basis) {
    GroundTruth truth;
    truth.seed = config.seed;
    truth.config = config;
    truth.effects = config.age_effects;
    std::set<std::pair<int, int>> edges;
    for (int idx : config.signal_indices) {
        std::vector<int> sup;
        for (int u = 0; u < config.v; ++u) {
            if (basis[idx - 1][u]) sup.push_back(u);
        }
        for (std::size_t a = 1; a < sup.size(); ++a) {
            for (std::size_t b = 0; b < a; ++b) edges.emplace(sup[a], sup[b]);
        }
        truth.signal_supports.push_back(std::move(sup));
    }
    truth.signal_edges.assign(edges.begin(), edges.end());
    return truth;
}

SyntheticData generate(const GeneratorConfig& config) {
    check_config(config);
    const auto basis = gen_basis(config);

    SyntheticData out;
    out.dataset.n_nodes = config.v;
    out.dataset.subjects.resize(config.n);
    for (int i = 0; i < config.n; ++i) {
        out.dataset.subjects[i] = gen_subject(config, basis, i);
    }
    const auto probs = response_probabilities(out.dataset, config, basis);
    const auto labels = draw_labels(probs, config);
    for (int i = 0; i < config.n; ++i) out.dataset.subjects[i].label = labels[i];
    out.truth = ground_truth_of(config, basis);
    return out;
}

Recovery evaluate_recovery(const std::vector<std::pair<int, int>>& estimated_edges,
                           const GroundTruth& truth, int v) {
    const std::set<std::pair<int, int>> signal(truth.signal_edges.begin(),
                                               truth.signal_edges.end());
    long hits = 0, false_hits = 0;
    std::set<std::pair<int, int>> seen;
    for (auto e : estimated_edges) {
        if (e.first < e.second) std::swap(e.first, e.second);
        if (!seen.insert(e).second) continue;
        if (signal.count(e)) {
            ++hits;
        } else {
            ++false_hits;
        }
    }
    Recovery rec;
    const long n_signal = static_cast<long>(signal.size());
    const long n_pairs = static_cast<long>(v) * (v - 1) / 2;
    rec.tpr = n_signal > 0 ? static_cast<double>(hits) / n_signal : 0.0;
    rec.fpr = n_pairs > n_signal ? static_cast<double>(false_hits) / (n_pairs - n_signal) : 0.0;
    return rec;
}

void save_truth(const GroundTruth& truth, const std::string& path) {
    json doc;
    doc["seed"] = truth.seed;
    json cfg;
    cfg["n"] = truth.config.n;
    cfg["V"] = truth.config.v;
    cfg["seed"] = truth.config.seed;
    cfg["noise_frac"] = truth.config.noise_frac;
    cfg["basis_count"] = truth.config.basis_count;
    cfg["age_low"] = truth.config.age_low;
    cfg["age_high"] = truth.config.age_high;
    cfg["max_visits"] = truth.config.max_visits;
    cfg["signal_indices"] = truth.config.signal_indices;
    json effects = json::array();
    for (const auto& e : truth.config.age_effects) {
        effects.push_back({{"gamma", e.gamma}, {"rho", e.rho}, {"alpha", e.alpha}});
    }
    cfg["age_effects"] = effects;
    doc["config"] = std::move(cfg);
    doc["signal_supports"] = truth.signal_supports;
    json edges = json::array();
    for (const auto& [u, v] : truth.signal_edges) edges.push_back({u, v});
    doc["signal_edges"] = std::move(edges);
    json teffects = json::array();
    for (const auto& e : truth.effects) {
        teffects.push_back({{"gamma", e.gamma}, {"rho", e.rho}, {"alpha", e.alpha}});
    }
    doc["effects"] = std::move(teffects);

    std::ofstream out(path);
    if (!out) throw DataError("cannot write truth file: " + path);
    out << doc.dump(1) << "\n";
}

GroundTruth load_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open truth file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("malformed truth JSON in " + path + ": " + e.what());
    }
    GroundTruth truth;
    truth.seed = doc.at("seed").get<std::uint64_t>();
    const json& cfg = doc.at("config");
    truth.config.n = cfg.at("n").get<int>();
    truth.config.v = cfg.at("V").get<int>();
    truth.config.seed = cfg.at("seed").get<std::uint64_t>();
    truth.config.noise_frac = cfg.at("noise_frac").get<double>();
    truth.config.basis_count = cfg.at("basis_count").get<int>();
    truth.config.age_low = cfg.at("age_low").get<double>();
    truth.config.age_high = cfg.at("age_high").get<double>();
    truth.config.max_visits = cfg.at("max_visits").get<int>();
    truth.config.signal_indices = cfg.at("signal_indices").get<std::vector<int>>();
    truth.config.age_effects.clear();
    for (const auto& e : cfg.at("age_effects")) {
        truth.config.age_effects.push_back(
            {e.at("gamma").get<double>(), e.at("rho").get<double>(), e.at("alpha").get<double>()});
    }
    truth.signal_supports = doc.at("signal_supports").get<std::vector<std::vector<int>>>();
    for (const auto& e : doc.at("signal_edges")) {
        truth.signal_edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    truth.effects.clear();
    for (const auto& e : doc.at("effects")) {
        truth.effects.push_back(
            {e.at("gamma").get<double>(), e.at("rho").get<double>(), e.at("alpha").get<double>()});
    }
    return truth;
}

}  // namespace sblr
