#include "sblr/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sblr/detail/cv_engine.hpp"
#include "sblr/errors.hpp"
#include "sblr/solver.hpp"

namespace sblr {

std::pair<int, int> UnstructuredParams::tri_unindex(int idx) {
    int u = 1;
    while (tri_index(u + 1, 0) <= idx) ++u;
    return {u, idx - tri_index(u, 0)};
}

bool UnstructuredParams::all_zero() const {
    for (const auto* v : {&b1, &b2, &b3}) {
        for (double x : *v) {
            if (x != 0.0) return false;
        }
    }
    return true;
}

std::vector<std::pair<int, int>> UnstructuredParams::selected_edges() const {
    std::vector<std::pair<int, int>> out;
    const int p = static_cast<int>(b1.size());
    for (int idx = 0; idx < p; ++idx) {
        if (b1[idx] != 0.0 || b2[idx] != 0.0 || b3[idx] != 0.0) {
            out.push_back(tri_unindex(idx));
        }
    }
    return out;
}

namespace {

constexpr double kProbFloor = 1e-12;

double clamp_prob(double p) {
    return std::min(1.0 - kProbFloor, std::max(kProbFloor, p));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double penalty_term(double c, double delta, double eta) {
    return delta * (eta * std::fabs(c) + 0.5 * (1.0 - eta) * c * c);
}

/// Feature matrix: column j holds 2 * X(u,v) for the j-th lower-triangular
/// pair, blocks ordered x0 | x1 | x2; columns contiguous over subjects.
struct FeatureMatrix {
    int n = 0, p = 0, tri = 0;
    std::vector<double> cols;

    FeatureMatrix(const std::vector<DesignTriple>& designs, int v) {
        n = static_cast<int>(designs.size());
        tri = UnstructuredParams::tri_size(v);
        p = 3 * tri;
        cols.resize(static_cast<std::size_t>(p) * n);
        for (int j = 0; j < p; ++j) {
            const int block = j / tri;
            const auto [eu, ev] = UnstructuredParams::tri_unindex(j % tri);
            double* col = cols.data() + static_cast<std::size_t>(j) * n;
            for (int i = 0; i < n; ++i) {
                const DesignTriple& d = designs[i];
                const Matrix& m = block == 0 ? d.x0 : block == 1 ? d.x1 : d.x2;
                col[i] = 2.0 * m(eu, ev);
            }
        }
    }

    const double* col(int j) const { return cols.data() + static_cast<std::size_t>(j) * n; }
};

struct LrState {
    const FeatureMatrix& feat;
    std::vector<double> y;
    const std::vector<int>& labels;
    double delta, eta;
    std::vector<double> coef;
    double intercept = 0.0;
    std::vector<double> logit, logit_scr, prob;
    double nll = 0.0;
    double pen = 0.0;

    LrState(const FeatureMatrix& f, const std::vector<int>& lab, double d, double e)
        : feat(f), labels(lab), delta(d), eta(e) {
        y.resize(f.n);
        for (int i = 0; i < f.n; ++i) y[i] = static_cast<double>(lab[i]);
        coef.assign(f.p, 0.0);
        logit.assign(f.n, 0.0);
        logit_scr.resize(f.n);
        prob.assign(f.n, 0.5);
    }

    void start_from(const UnstructuredParams* warm) {
        if (warm) {
            intercept = warm->intercept;
            std::copy(warm->b1.begin(), warm->b1.end(), coef.begin());
            std::copy(warm->b2.begin(), warm->b2.end(), coef.begin() + feat.tri);
            std::copy(warm->b3.begin(), warm->b3.end(), coef.begin() + 2 * feat.tri);
        }
        for (int i = 0; i < feat.n; ++i) {
            double z = intercept;
            for (int j = 0; j < feat.p; ++j) {
                if (coef[j] != 0.0) z += coef[j] * feat.col(j)[i];
            }
            logit[i] = z;
            prob[i] = sigmoid(z);
        }
        double ll = 0.0;
        for (int i = 0; i < feat.n; ++i) ll += log_likelihood(labels[i], logit[i]);
        nll = -ll / feat.n;
        pen = 0.0;
        for (double c : coef) pen += penalty_term(c, delta, eta);
    }

    double loss() const { return nll + pen; }

    /// One coordinate update with the descent safeguard; returns true if the
    /// coefficient changed.
    bool update_feature(int j, bool safeguard) {
        const double* col = feat.col(j);
        const double c0 = coef[j];
        double b_acc = 0.0, a_acc = 0.0;
        for (int i = 0; i < feat.n; ++i) {
            const double p = clamp_prob(prob[i]);
            b_acc += (y[i] - p) * col[i];
            a_acc += p * (1.0 - p) * col[i] * col[i];
        }
        const double b = -b_acc / feat.n;
        const double a = a_acc / feat.n;
        const double denom = a + delta * (1.0 - eta);
        double theta = 0.0;
        if (denom > 0.0) {
            const double z = a * c0 - b;
            const double t = delta * eta;
            theta = (z > t) ? (z - t) / denom : (z < -t) ? (z + t) / denom : 0.0;
        }
        if (theta == c0) return false;

        const double old_loss = loss();
        double cand = theta;
        double accepted = std::numeric_limits<double>::quiet_NaN();
        double trial_nll = 0.0, trial_pen = 0.0;
        for (int halvings = 0; halvings <= 30; ++halvings) {
            if (cand == c0) break;
            const double step = cand - c0;
            double ll = 0.0;
            for (int i = 0; i < feat.n; ++i) {
                const double z = logit[i] + col[i] * step;
                logit_scr[i] = z;
                ll += log_likelihood(labels[i], z);
            }
            trial_nll = -ll / feat.n;
            trial_pen = pen - penalty_term(c0, delta, eta) + penalty_term(cand, delta, eta);
            if (!safeguard || trial_nll + trial_pen <= old_loss) {
                accepted = cand;
                break;
            }
            cand = 0.5 * (cand + c0);
        }
        if (std::isnan(accepted)) return false;
        coef[j] = accepted;
        std::swap(logit, logit_scr);
        for (int i = 0; i < feat.n; ++i) prob[i] = sigmoid(logit[i]);
        nll = trial_nll;
        pen = trial_pen;
        return true;
    }

    void update_intercept(bool safeguard) {
        double b_acc = 0.0, a_acc = 0.0;
        for (int i = 0; i < feat.n; ++i) {
            const double p = clamp_prob(prob[i]);
            b_acc += y[i] - p;
            a_acc += p * (1.0 - p);
        }
        const double a = a_acc / feat.n;
        const double theta = a > 0.0 ? intercept + b_acc / feat.n / a : 0.0;
        if (theta == intercept) return;
        const double old_loss = loss();
        double cand = theta;
        for (int halvings = 0; halvings <= 30; ++halvings) {
            if (cand == intercept) return;
            const double step = cand - intercept;
            double ll = 0.0;
            for (int i = 0; i < feat.n; ++i) {
                const double z = logit[i] + step;
                logit_scr[i] = z;
                ll += log_likelihood(labels[i], z);
            }
            const double trial_nll = -ll / feat.n;
            if (!safeguard || trial_nll + pen <= old_loss) {
                intercept = cand;
                std::swap(logit, logit_scr);
                for (int i = 0; i < feat.n; ++i) prob[i] = sigmoid(logit[i]);
                nll = trial_nll;
                return;
            }
            cand = 0.5 * (cand + intercept);
        }
    }

    UnstructuredParams snapshot(int v) const {
        UnstructuredParams out;
        out.n_nodes = v;
        out.intercept = intercept;
        out.b1.assign(coef.begin(), coef.begin() + feat.tri);
        out.b2.assign(coef.begin() + feat.tri, coef.begin() + 2 * feat.tri);
        out.b3.assign(coef.begin() + 2 * feat.tri, coef.end());
        return out;
    }
};

}  // namespace

double logit_unstructured(const UnstructuredParams& params, const DesignTriple& design) {
    const int v = design.x0.n();
    double z = params.intercept;
    for (int u = 1; u < v; ++u) {
        for (int w = 0; w < u; ++w) {
            const int idx = UnstructuredParams::tri_index(u, w);
            z += 2.0 * (params.b1[idx] * design.x0(u, w) + params.b2[idx] * design.x1(u, w) +
                        params.b3[idx] * design.x2(u, w));
        }
    }
    return z;
}

double loss_unstructured(const UnstructuredParams& params, const std::vector<DesignTriple>& designs,
                         const std::vector<int>& labels, double delta, double eta) {
    const int n = static_cast<int>(designs.size());
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
        ll += log_likelihood(labels[i], logit_unstructured(params, designs[i]));
    }
    double pen = 0.0;
    for (const auto* v : {&params.b1, &params.b2, &params.b3}) {
        for (double c : *v) pen += penalty_term(c, delta, eta);
    }
    return -ll / n + pen;
}

double deviance_unstructured(const UnstructuredParams& params,
                             const std::vector<DesignTriple>& designs,
                             const std::vector<int>& labels) {
    const int m = static_cast<int>(designs.size());
    double ll = 0.0;
    for (int i = 0; i < m; ++i) {
        ll += log_likelihood(labels[i], logit_unstructured(params, designs[i]));
    }
    return -2.0 * ll / m;
}

UnstructuredParams fit_unstructured(const std::vector<DesignTriple>& designs,
                                    const std::vector<int>& labels, double delta, double eta,
                                    const UnstructuredFitOptions& options) {
    const int n = static_cast<int>(designs.size());
    if (n < 2) throw ConfigError("fit_unstructured: need at least two subjects");
    if (!(delta > 0.0)) throw ConfigError("fit_unstructured: delta must be > 0");
    if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("fit_unstructured: eta must be in [0, 1]");
    bool has0 = false, has1 = false;
    for (int y : labels) (y ? has1 : has0) = true;
    if (!has0 || !has1) throw DataError("fit_unstructured: both classes must be present");
    const int v = designs[0].x0.n();
    for (const DesignTriple& d : designs) {
        for (const Matrix* m : {&d.x0, &d.x1, &d.x2}) {
            for (double x : m->data()) {
                if (!std::isfinite(x)) throw DataError("fit_unstructured: non-finite design entry");
            }
        }
    }

    const FeatureMatrix feat(designs, v);
    LrState state(feat, labels, delta, eta);
    state.start_from(options.warm);

    // Full sweeps establish the active set; in between, only nonzero
    // coefficients are cycled. Convergence is judged on full sweeps.
    double prev_full = state.loss();
    if (options.loss_trace) options.loss_trace->push_back(prev_full);
    for (int cycle = 1; cycle <= options.max_cycles; ++cycle) {
        for (int j = 0; j < feat.p; ++j) state.update_feature(j, options.descent_safeguard);
        state.update_intercept(options.descent_safeguard);
        const double cur = state.loss();
        if (options.loss_trace) options.loss_trace->push_back(cur);
        const bool full_converged = std::fabs(prev_full - cur) / std::max(prev_full, 1e-300) <
                                    options.tolerance;
        prev_full = cur;
        if (full_converged) break;

        std::vector<int> active;
        for (int j = 0; j < feat.p; ++j) {
            if (state.coef[j] != 0.0) active.push_back(j);
        }
        double prev_inner = cur;
        for (int inner = 0; inner < options.max_cycles; ++inner) {
            for (int j : active) state.update_feature(j, options.descent_safeguard);
            state.update_intercept(options.descent_safeguard);
            const double inner_cur = state.loss();
            if (std::fabs(prev_inner - inner_cur) / std::max(prev_inner, 1e-300) <
                options.tolerance) {
                break;
            }
            prev_inner = inner_cur;
        }
    }
    return state.snapshot(v);
}

PenaltyGrid make_penalty_grid_unstructured(const std::vector<DesignTriple>& designs,
                                           const std::vector<int>& labels,
                                           const std::vector<double>& etas, int n_deltas,
                                           const UnstructuredFitOptions& options) {
    if (etas.empty()) throw ConfigError("make_penalty_grid: need at least one eta");
    if (n_deltas < 2) throw ConfigError("make_penalty_grid: need at least two delta values");
    const double eta_min = *std::min_element(etas.begin(), etas.end());

    auto all_zero_at = [&](double delta) {
        return fit_unstructured(designs, labels, delta, eta_min, options).all_zero();
    };

    double lo = 0.0, hi = 0.0;
    if (all_zero_at(1.0)) {
        hi = 1.0;
        double x = 1.0;
        for (int step = 0; step < 60 && lo == 0.0; ++step) {
            x *= 0.5;
            (all_zero_at(x) ? hi : lo) = x;
        }
        if (lo == 0.0) throw ConfigError("make_penalty_grid: no penalty produces a nonzero fit");
    } else {
        lo = 1.0;
        double x = 1.0;
        for (int step = 0; step < 60 && hi == 0.0; ++step) {
            x *= 2.0;
            (all_zero_at(x) ? hi : lo) = x;
        }
        if (hi == 0.0) throw ConfigError("make_penalty_grid: no penalty shrinks the model to zero");
    }
    for (int step = 0; step < 10; ++step) {
        const double mid = std::sqrt(lo * hi);
        (all_zero_at(mid) ? hi : lo) = mid;
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

namespace {

struct LrCvMethod {
    UnstructuredFitOptions options;
    using Model = UnstructuredParams;

    Model fit_cell(const std::vector<DesignTriple>& designs, const std::vector<int>& labels,
                   double delta, double eta, std::uint64_t /*seed*/, const Model* warm) const {
        UnstructuredFitOptions opts = options;
        opts.warm = warm;
        return fit_unstructured(designs, labels, delta, eta, opts);
    }

    double eval(const Model& model, const std::vector<DesignTriple>& designs,
                const std::vector<int>& labels) const {
        return deviance_unstructured(model, designs, labels);
    }
};

}  // namespace

CvTable cv_unstructured(const Dataset& dataset, const PenaltyGrid& grid, int k_folds,
                        std::uint64_t seed, const CvOptions& options,
                        const UnstructuredFitOptions& fit_options) {
    const auto labels = labels_of(dataset);
    const auto fold_of = stratified_folds(labels, k_folds, seed);
    const auto folds = detail::prepare_folds(dataset, fold_of, k_folds, options.standardize);
    LrCvMethod method{fit_options};
    const auto dev = detail::run_cv_lanes(folds, grid, method, seed, options);
    return detail::assemble_cv_table(grid, k_folds, fold_of, dev);
}

}  // namespace sblr
