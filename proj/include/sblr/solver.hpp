#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sblr/dataset.hpp"
#include "sblr/params.hpp"
#include "sblr/rng.hpp"

namespace sblr {

class Rng;

struct FitConfig {
    int k = 1;                 // component budget
    double delta = 0.1;        // overall penalty factor, > 0
    double eta = 0.5;          // L1 fraction in [0, 1]
    double tolerance = 1e-5;   // relative loss-change stopping threshold
    int max_cycles = 1000;     // cap on full coordinate sweeps
    int n_restarts = 1;        // independent random initializations
    std::uint64_t seed = 0;
    bool descent_safeguard = true;

    /// Use order-invariant (value-sorted) reductions for all node-indexed
    /// sums. Makes fits bitwise reproducible under node relabeling when the
    /// visit order is conjugated accordingly; slower, off by default.
    bool order_invariant = false;

    /// Within-sweep order of beta coordinates; empty means 0..V-1.
    std::vector<int> node_visit_order;
};

struct FitResult {
    SblrParams params;
    double final_loss = 0.0;
    std::vector<double> loss_trace;  // initial loss, then after each cycle
    int cycles_used = 0;
    bool converged = false;
    int restart_index = 0;
};

enum class AgeCoeff { Alpha, Rho, Gamma };

/// Stable Bernoulli log-likelihood given the linear predictor.
double log_likelihood(int label, double logit);

/// From-scratch quadratic form beta' X beta (naive nested loops).
double quad_form(const std::vector<double>& beta, const Matrix& x);

/// From-scratch linear predictor for one subject.
double logit_value(const SblrParams& params, const DesignTriple& design);

/// Elastic-net penalty over strictly-lower-triangular component entries.
double penalty_value(const SblrParams& params, double delta, double eta);

/// From-scratch penalized loss (mean negative log-likelihood + penalty).
double loss_value(const SblrParams& params, const std::vector<DesignTriple>& designs,
                  const std::vector<int>& labels, double delta, double eta);

/// Draw a fresh parameter set with every entry ~ U(-1/K, 1/K). Draw order:
/// intercept, then per component its beta entries followed by alpha, rho,
/// gamma; fixed so seeded runs are reproducible.
SblrParams random_init(int k, int v, Rng& rng);

/// Incremental coordinate-descent state over a fixed dataset.
///
/// Maintains the linear predictors, per-subject probabilities and the
/// quadratic forms u*[h][i] = beta_h' X*_i beta_h. A beta-entry update
/// computes the three partial row products (X*_i beta_h)_u fresh over the
/// nonzero beta entries (O(n * nnz) work), after which the predictors and
/// quadratic forms shift by exact affine increments: with zero-diagonal
/// predictors every linear predictor is affine in any single beta entry.
/// Age-coefficient and intercept updates are O(n) against the cached
/// quadratic forms.
///
/// Components whose beta vector reaches all zeros can never leave that state
/// (every closed-form update returns zero there), so they are zeroed out and
/// skipped from then on. When a beta vector drops to at most one nonzero
/// entry its quadratic forms are snapped to their exact value of zero so the
/// degenerate-case rules fire on exact zeros.
class CoordinateState {
public:
    CoordinateState(const std::vector<DesignTriple>& designs, const std::vector<int>& labels,
                    double delta, double eta, int k, bool order_invariant = false);

    /// Reset to a fresh parameter point (must have the same K and V).
    void reset(const SblrParams& init);

    int n_subjects() const { return n_; }
    int n_nodes() const { return v_; }
    int n_components() const { return k_; }

    /// One closed-form coordinate update; returns the committed value.
    double update_beta_entry(int h, int u, bool safeguard = true);
    double update_age_coeff(int h, AgeCoeff which, bool safeguard = true);
    double update_intercept(bool safeguard = true);

    /// One full cycle in the fixed order: all beta entries (component-major,
    /// node order per `order`), then (alpha, rho, gamma) per component, then
    /// the intercept. Returns the loss after the cycle.
    double sweep(const std::vector<int>& order, bool safeguard);

    double current_loss() const { return nll_ + penalty_total(); }
    double mean_negative_loglik() const { return nll_; }
    double penalty_total() const;

    const SblrParams& params() const { return params_; }
    const std::vector<double>& logits() const { return logit_; }
    double from_scratch_logit(int i) const;
    double from_scratch_loss() const;

    /// The quadratic-plus-penalty surrogate minimized by one update:
    ///   b (t - theta0) + a/2 (t - theta0)^2 + d |t| + e t^2 / 2.
    struct Surrogate {
        double theta0 = 0.0;
        double a = 0.0;
        double b = 0.0;
        double d = 0.0;
        double e = 0.0;

        double operator()(double t) const {
            const double dt = t - theta0;
            return b * dt + 0.5 * a * dt * dt + d * std::abs(t) + 0.5 * e * t * t;
        }
    };

    Surrogate beta_surrogate(int h, int u);
    Surrogate age_surrogate(int h, AgeCoeff which);
    Surrogate intercept_surrogate();

    /// Bytes held by the incremental caches (memory accounting for scaling
    /// reports; excludes the design matrices themselves).
    std::size_t accounted_bytes() const;

private:
    struct BetaSums {
        double abs1 = 0.0;  // sum |beta_v|
        double sq2 = 0.0;   // sum beta_v^2
        double quad4 = 0.0; // sum beta_v^4
    };

    struct UpdateCoeffs {
        double a = 0.0, b = 0.0, d = 0.0, e = 0.0;
        BetaSums excl;  // sums excluding the updated entry (beta updates only)
    };

    BetaSums beta_sums(int h, int exclude) const;
    double penalty_of(double abs_coeffs, double sq_coeffs, const BetaSums& s) const;
    double penalty_component(int h) const;
    UpdateCoeffs beta_coeffs(int h, int u);
    UpdateCoeffs age_coeffs_for(int h, AgeCoeff which) const;
    double commit_beta(int h, int u, double theta, const UpdateCoeffs& c, bool safeguard);
    double commit_age(int h, AgeCoeff which, double theta, bool safeguard);
    double commit_intercept(double theta, bool safeguard);
    void snap_quadforms(int h);
    void mark_dead(int h);
    double trial_penalty_total(int h, double pen_h) const;

    const std::vector<DesignTriple>* designs_;
    std::vector<double> y_;
    std::vector<int> labels_;
    int n_ = 0, v_ = 0, k_ = 0;
    double delta_ = 0.0, eta_ = 0.0;
    bool order_invariant_ = false;

    // Node-major packed copy of the designs: for each node u and subject i,
    // the u-th rows of x0, x1, x2 laid out back to back, so one coordinate
    // update streams a single contiguous block.
    std::vector<double> xpack_;
    const double* pack_row(int u, int i) const {
        return xpack_.data() + (static_cast<std::size_t>(u) * n_ + i) * 3 * v_;
    }

    SblrParams params_;
    std::vector<double> logit_, prob_;
    std::vector<double> u0_, u1_, u2_;  // [h][i]
    std::vector<int> nnz_;
    std::vector<char> dead_;
    std::vector<double> pen_;
    double nll_ = 0.0;

    mutable std::vector<double> scratch_terms_;
    std::vector<double> m_scr_, logit_scr_, prob_scr_;
    std::vector<double> d0_scr_, d1_scr_, d2_scr_;  // per-subject row products
    std::vector<int> support_scr_;

    double* uptr(std::vector<double>& u, int h) { return u.data() + static_cast<std::size_t>(h) * n_; }
    const double* uptr(const std::vector<double>& u, int h) const {
        return u.data() + static_cast<std::size_t>(h) * n_;
    }
    double invariant_sum() const;  // sums scratch_terms_ in value order
};

/// Single coordinate-descent trajectory from an explicit initialization.
FitResult fit_from(const std::vector<DesignTriple>& designs, const std::vector<int>& labels,
                   const SblrParams& init, const FitConfig& config);

/// Full fit: n_restarts seeded random initializations (substream r of the
/// config seed for restart r) plus any extra initializations (warm starts),
/// returning the run with the smallest final penalized loss; ties go to the
/// smaller restart index.
FitResult fit(const std::vector<DesignTriple>& designs, const std::vector<int>& labels,
              const FitConfig& config, const std::vector<SblrParams>& extra_inits = {});

}  // namespace sblr
