#include "sblr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sblr/errors.hpp"

namespace sblr {

namespace {

constexpr double kProbFloor = 1e-12;

double clamp_prob(double p) {
    return std::min(1.0 - kProbFloor, std::max(kProbFloor, p));
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

/// log-likelihood and probability from one exp evaluation; identical values
/// to log_likelihood() and sigmoid() above.
inline double loglik_and_prob(int label, double z, double& prob) {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        prob = 1.0 / (1.0 + e);
        return static_cast<double>(label) * z - (z + std::log1p(e));
    }
    const double e = std::exp(z);
    prob = e / (1.0 + e);
    return static_cast<double>(label) * z - std::log1p(e);
}

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

/// Ascending by value, minus zero before plus zero; gives every permutation
/// of the same multiset an identical accumulation order.
void sort_terms(std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end(), [](double a, double b) {
        if (a != b) return a < b;
        return std::signbit(a) && !std::signbit(b);
    });
}

}  // namespace

double log_likelihood(int label, double logit) {
    return static_cast<double>(label) * logit - softplus(logit);
}

double quad_form(const std::vector<double>& beta, const Matrix& x) {
    const int v = x.n();
    double total = 0.0;
    for (int r = 0; r < v; ++r) {
        if (beta[r] == 0.0) continue;
        double acc = 0.0;
        const double* row = x.row(r);
        for (int c = 0; c < v; ++c) acc += row[c] * beta[c];
        total += beta[r] * acc;
    }
    return total;
}

double logit_value(const SblrParams& params, const DesignTriple& design) {
    if (!params.components.empty() &&
        static_cast<int>(params.components[0].beta.size()) != design.x0.n()) {
        throw ConfigError("logit_value: component length does not match design dimension");
    }
    double z = params.intercept;
    for (const Component& c : params.components) {
        z += c.alpha * quad_form(c.beta, design.x0) + c.rho * quad_form(c.beta, design.x1) +
             c.gamma * quad_form(c.beta, design.x2);
    }
    return z;
}

double penalty_value(const SblrParams& params, double delta, double eta) {
    double total = 0.0;
    for (const Component& c : params.components) {
        const double a_abs = std::fabs(c.alpha) + std::fabs(c.rho) + std::fabs(c.gamma);
        const double a_sq = c.alpha * c.alpha + c.rho * c.rho + c.gamma * c.gamma;
        const int v = static_cast<int>(c.beta.size());
        double s = 0.0, q = 0.0;
        for (int u = 0; u < v; ++u) {
            for (int w = 0; w < u; ++w) {
                const double prod = std::fabs(c.beta[u]) * std::fabs(c.beta[w]);
                s += prod;
                q += prod * prod;
            }
        }
        total += delta * (eta * a_abs * s + 0.5 * (1.0 - eta) * a_sq * q);
    }
    return total;
}

double loss_value(const SblrParams& params, const std::vector<DesignTriple>& designs,
                  const std::vector<int>& labels, double delta, double eta) {
    const int n = static_cast<int>(designs.size());
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
        ll += log_likelihood(labels[i], logit_value(params, designs[i]));
    }
    return -ll / n + penalty_value(params, delta, eta);
}

SblrParams random_init(int k, int v, Rng& rng) {
    const double bound = 1.0 / static_cast<double>(k);
    SblrParams params;
    params.intercept = rng.uniform(-bound, bound);
    params.components.resize(k);
    for (Component& c : params.components) {
        c.beta.resize(v);
        for (double& b : c.beta) b = rng.uniform(-bound, bound);
        c.alpha = rng.uniform(-bound, bound);
        c.rho = rng.uniform(-bound, bound);
        c.gamma = rng.uniform(-bound, bound);
    }
    return params;
}

// ---------------------------------------------------------------------------
// CoordinateState
// ---------------------------------------------------------------------------

CoordinateState::CoordinateState(const std::vector<DesignTriple>& designs,
                                 const std::vector<int>& labels, double delta, double eta, int k,
                                 bool order_invariant)
    : designs_(&designs),
      labels_(labels),
      n_(static_cast<int>(designs.size())),
      k_(k),
      delta_(delta),
      eta_(eta),
      order_invariant_(order_invariant) {
    if (n_ == 0) throw ConfigError("CoordinateState: empty design list");
    if (static_cast<int>(labels.size()) != n_) {
        throw ConfigError("CoordinateState: designs and labels disagree on n");
    }
    v_ = designs[0].x0.n();
    y_.resize(n_);
    for (int i = 0; i < n_; ++i) y_[i] = static_cast<double>(labels_[i]);

    u0_.assign(static_cast<std::size_t>(k_) * n_, 0.0);
    u1_.assign(static_cast<std::size_t>(k_) * n_, 0.0);
    u2_.assign(static_cast<std::size_t>(k_) * n_, 0.0);
    logit_.assign(n_, 0.0);
    prob_.assign(n_, 0.0);
    nnz_.assign(k_, 0);
    dead_.assign(k_, 0);
    pen_.assign(k_, 0.0);
    m_scr_.resize(n_);
    logit_scr_.resize(n_);
    prob_scr_.resize(n_);
    d0_scr_.resize(n_);
    d1_scr_.resize(n_);
    d2_scr_.resize(n_);
    support_scr_.reserve(v_);
    scratch_terms_.reserve(static_cast<std::size_t>(v_) * v_);

    xpack_.resize(static_cast<std::size_t>(v_) * n_ * 3 * v_);
    for (int u = 0; u < v_; ++u) {
        for (int i = 0; i < n_; ++i) {
            double* dst = xpack_.data() + (static_cast<std::size_t>(u) * n_ + i) * 3 * v_;
            const DesignTriple& d = designs[i];
            std::copy(d.x0.row(u), d.x0.row(u) + v_, dst);
            std::copy(d.x1.row(u), d.x1.row(u) + v_, dst + v_);
            std::copy(d.x2.row(u), d.x2.row(u) + v_, dst + 2 * v_);
        }
    }
}

double CoordinateState::invariant_sum() const {
    sort_terms(scratch_terms_);
    double acc = 0.0;
    for (double t : scratch_terms_) acc += t;
    return acc;
}

void CoordinateState::reset(const SblrParams& init) {
    if (init.n_components() != k_ || init.n_nodes() != v_) {
        throw ConfigError("reset: initialization has wrong K or V");
    }
    params_ = init;

    for (int h = 0; h < k_; ++h) {
        const auto& beta = params_.components[h].beta;
        nnz_[h] = 0;
        for (double b : beta) nnz_[h] += (b != 0.0);
        dead_[h] = 0;

        std::vector<double>* u_arr[3] = {&u0_, &u1_, &u2_};
        for (int i = 0; i < n_; ++i) {
            for (int m = 0; m < 3; ++m) {
                double uq = 0.0;
                if (order_invariant_) {
                    // All V^2 products in one multiset, summed value-sorted.
                    scratch_terms_.clear();
                    for (int u = 0; u < v_; ++u) {
                        const double* row = pack_row(u, i) + m * v_;
                        for (int w = 0; w < v_; ++w) {
                            scratch_terms_.push_back(beta[u] * row[w] * beta[w]);
                        }
                    }
                    uq = invariant_sum();
                } else {
                    for (int u = 0; u < v_; ++u) {
                        if (beta[u] == 0.0) continue;
                        const double* row = pack_row(u, i) + m * v_;
                        double s = 0.0;
                        for (int w = 0; w < v_; ++w) s += row[w] * beta[w];
                        uq += beta[u] * s;
                    }
                }
                uptr(*u_arr[m], h)[i] = uq;
            }
        }
        if (nnz_[h] <= 1) {
            std::fill(uptr(u0_, h), uptr(u0_, h) + n_, 0.0);
            std::fill(uptr(u1_, h), uptr(u1_, h) + n_, 0.0);
            std::fill(uptr(u2_, h), uptr(u2_, h) + n_, 0.0);
        }
    }

    for (int i = 0; i < n_; ++i) {
        double z = params_.intercept;
        for (int h = 0; h < k_; ++h) {
            const Component& c = params_.components[h];
            z += c.alpha * uptr(u0_, h)[i] + c.rho * uptr(u1_, h)[i] + c.gamma * uptr(u2_, h)[i];
        }
        logit_[i] = z;
        prob_[i] = sigmoid(z);
    }
    double ll = 0.0;
    for (int i = 0; i < n_; ++i) ll += log_likelihood(labels_[i], logit_[i]);
    nll_ = -ll / n_;

    for (int h = 0; h < k_; ++h) {
        pen_[h] = penalty_component(h);
        if (nnz_[h] == 0) mark_dead(h);
    }
}

CoordinateState::BetaSums CoordinateState::beta_sums(int h, int exclude) const {
    const auto& beta = params_.components[h].beta;
    BetaSums out;
    if (order_invariant_) {
        scratch_terms_.clear();
        for (int v = 0; v < v_; ++v) {
            if (v == exclude) continue;
            scratch_terms_.push_back(std::fabs(beta[v]));
        }
        sort_terms(scratch_terms_);
        for (double t : scratch_terms_) {
            out.abs1 += t;
            const double t2 = t * t;
            out.sq2 += t2;
            out.quad4 += t2 * t2;
        }
    } else {
        for (int v = 0; v < v_; ++v) {
            if (v == exclude) continue;
            const double t = std::fabs(beta[v]);
            out.abs1 += t;
            const double t2 = t * t;
            out.sq2 += t2;
            out.quad4 += t2 * t2;
        }
    }
    return out;
}

double CoordinateState::penalty_of(double abs_coeffs, double sq_coeffs, const BetaSums& s) const {
    // Lower-triangular pair sums via the symmetric-square identities; both
    // are exactly zero when at most one beta entry is nonzero.
    const double pair_abs = std::max(0.0, 0.5 * (s.abs1 * s.abs1 - s.sq2));
    const double pair_sq = std::max(0.0, 0.5 * (s.sq2 * s.sq2 - s.quad4));
    return delta_ * (eta_ * abs_coeffs * pair_abs + 0.5 * (1.0 - eta_) * sq_coeffs * pair_sq);
}

double CoordinateState::penalty_component(int h) const {
    const Component& c = params_.components[h];
    const double a_abs = std::fabs(c.alpha) + std::fabs(c.rho) + std::fabs(c.gamma);
    const double a_sq = c.alpha * c.alpha + c.rho * c.rho + c.gamma * c.gamma;
    return penalty_of(a_abs, a_sq, beta_sums(h, -1));
}

double CoordinateState::penalty_total() const {
    double total = 0.0;
    for (int h = 0; h < k_; ++h) total += pen_[h];
    return total;
}

double CoordinateState::trial_penalty_total(int h, double pen_h) const {
    double total = 0.0;
    for (int g = 0; g < k_; ++g) total += (g == h) ? pen_h : pen_[g];
    return total;
}

CoordinateState::UpdateCoeffs CoordinateState::beta_coeffs(int h, int u) {
    const Component& c = params_.components[h];
    const double* beta = c.beta.data();

    // Fresh partial row products (X*_i beta)_u; the diagonal is zero, so the
    // u-th term never contributes and the result is independent of beta_u.
    if (order_invariant_) {
        for (int i = 0; i < n_; ++i) {
            const double* rows = pack_row(u, i);
            double* outs[3] = {&d0_scr_[i], &d1_scr_[i], &d2_scr_[i]};
            for (int m = 0; m < 3; ++m) {
                const double* row = rows + m * v_;
                scratch_terms_.clear();
                for (int w = 0; w < v_; ++w) scratch_terms_.push_back(row[w] * beta[w]);
                *outs[m] = invariant_sum();
            }
        }
    } else if (2 * nnz_[h] >= v_) {
        const int span = 3 * v_;
        for (int i = 0; i < n_; ++i) {
            const double* r0 = pack_row(u, i);
            if (i + 2 < n_) {
                const double* ahead = r0 + 2 * span;
                for (int off = 0; off < span; off += 8) __builtin_prefetch(ahead + off, 0, 0);
            }
            const double* r1 = r0 + v_;
            const double* r2 = r1 + v_;
            double a0 = 0.0, a1 = 0.0, a2 = 0.0;
            for (int w = 0; w < v_; ++w) {
                a0 += r0[w] * beta[w];
                a1 += r1[w] * beta[w];
                a2 += r2[w] * beta[w];
            }
            d0_scr_[i] = a0;
            d1_scr_[i] = a1;
            d2_scr_[i] = a2;
        }
    } else {
        support_scr_.clear();
        for (int w = 0; w < v_; ++w) {
            if (beta[w] != 0.0) support_scr_.push_back(w);
        }
        for (int i = 0; i < n_; ++i) {
            const double* r0 = pack_row(u, i);
            const double* r1 = r0 + v_;
            const double* r2 = r1 + v_;
            double a0 = 0.0, a1 = 0.0, a2 = 0.0;
            for (int w : support_scr_) {
                a0 += r0[w] * beta[w];
                a1 += r1[w] * beta[w];
                a2 += r2[w] * beta[w];
            }
            d0_scr_[i] = a0;
            d1_scr_[i] = a1;
            d2_scr_[i] = a2;
        }
    }

    UpdateCoeffs out;
    double b_acc = 0.0, a_acc = 0.0;
    for (int i = 0; i < n_; ++i) {
        const double m = c.alpha * d0_scr_[i] + c.rho * d1_scr_[i] + c.gamma * d2_scr_[i];
        m_scr_[i] = m;
        const double p = clamp_prob(prob_[i]);
        b_acc += (y_[i] - p) * m;
        a_acc += p * (1.0 - p) * m * m;
    }
    out.b = -2.0 * b_acc / n_;
    out.a = 4.0 * a_acc / n_;

    out.excl = beta_sums(h, u);
    const double a_abs = std::fabs(c.alpha) + std::fabs(c.rho) + std::fabs(c.gamma);
    const double a_sq = c.alpha * c.alpha + c.rho * c.rho + c.gamma * c.gamma;
    out.d = delta_ * eta_ * a_abs * out.excl.abs1;
    out.e = delta_ * (1.0 - eta_) * a_sq * out.excl.sq2;
    return out;
}

CoordinateState::UpdateCoeffs CoordinateState::age_coeffs_for(int h, AgeCoeff which) const {
    const double* uq = which == AgeCoeff::Alpha ? uptr(u0_, h)
                     : which == AgeCoeff::Rho   ? uptr(u1_, h)
                                                : uptr(u2_, h);
    UpdateCoeffs out;
    double b_acc = 0.0, a_acc = 0.0;
    for (int i = 0; i < n_; ++i) {
        const double p = clamp_prob(prob_[i]);
        b_acc += (y_[i] - p) * uq[i];
        a_acc += p * (1.0 - p) * uq[i] * uq[i];
    }
    out.b = -b_acc / n_;
    out.a = a_acc / n_;

    out.excl = beta_sums(h, -1);
    const double pair_abs = std::max(0.0, 0.5 * (out.excl.abs1 * out.excl.abs1 - out.excl.sq2));
    const double pair_sq = std::max(0.0, 0.5 * (out.excl.sq2 * out.excl.sq2 - out.excl.quad4));
    out.d = delta_ * eta_ * pair_abs;
    out.e = delta_ * (1.0 - eta_) * pair_sq;
    return out;
}

CoordinateState::Surrogate CoordinateState::beta_surrogate(int h, int u) {
    const UpdateCoeffs c = beta_coeffs(h, u);
    return Surrogate{params_.components[h].beta[u], c.a, c.b, c.d, c.e};
}

CoordinateState::Surrogate CoordinateState::age_surrogate(int h, AgeCoeff which) {
    const UpdateCoeffs c = age_coeffs_for(h, which);
    const Component& comp = params_.components[h];
    const double theta0 = which == AgeCoeff::Alpha ? comp.alpha
                        : which == AgeCoeff::Rho   ? comp.rho
                                                   : comp.gamma;
    return Surrogate{theta0, c.a, c.b, c.d, c.e};
}

CoordinateState::Surrogate CoordinateState::intercept_surrogate() {
    double b_acc = 0.0, a_acc = 0.0;
    for (int i = 0; i < n_; ++i) {
        const double p = clamp_prob(prob_[i]);
        b_acc += y_[i] - p;
        a_acc += p * (1.0 - p);
    }
    return Surrogate{params_.intercept, a_acc / n_, -b_acc / n_, 0.0, 0.0};
}

double CoordinateState::update_beta_entry(int h, int u, bool safeguard) {
    if (dead_[h]) return params_.components[h].beta[u];

    const UpdateCoeffs c = beta_coeffs(h, u);
    const double theta0 = params_.components[h].beta[u];
    double theta;
    if (c.a + c.e == 0.0) {
        theta = 0.0;
    } else {
        const double z = c.a * theta0 - c.b;
        theta = soft_threshold(z, c.d) / (c.a + c.e);
    }
    return commit_beta(h, u, theta, c, safeguard);
}

double CoordinateState::commit_beta(int h, int u, double theta, const UpdateCoeffs& c,
                                    bool safeguard) {
    Component& comp = params_.components[h];
    const double theta0 = comp.beta[u];
    if (theta == theta0) return theta0;

    const double old_loss = nll_ + penalty_total();
    const double a_abs = std::fabs(comp.alpha) + std::fabs(comp.rho) + std::fabs(comp.gamma);
    const double a_sq = comp.alpha * comp.alpha + comp.rho * comp.rho + comp.gamma * comp.gamma;

    double cand = theta;
    double accepted = std::numeric_limits<double>::quiet_NaN();
    double trial_nll = 0.0, trial_pen = 0.0;
    for (int halvings = 0; halvings <= 30; ++halvings) {
        if (cand == theta0) break;  // collapsed onto the current value
        const double step = cand - theta0;
        double ll = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double z = logit_[i] + 2.0 * m_scr_[i] * step;
            logit_scr_[i] = z;
            ll += loglik_and_prob(labels_[i], z, prob_scr_[i]);
        }
        trial_nll = -ll / n_;
        BetaSums full = c.excl;
        const double t = std::fabs(cand);
        full.abs1 += t;
        full.sq2 += t * t;
        full.quad4 += t * t * t * t;
        trial_pen = penalty_of(a_abs, a_sq, full);
        const double trial_loss = trial_nll + trial_penalty_total(h, trial_pen);
        if (!safeguard || trial_loss <= old_loss) {
            accepted = cand;
            break;
        }
        cand = 0.5 * (cand + theta0);
    }
    if (std::isnan(accepted)) return theta0;  // keep the current value

    const double step = accepted - theta0;
    comp.beta[u] = accepted;
    std::swap(logit_, logit_scr_);
    std::swap(prob_, prob_scr_);
    nll_ = trial_nll;
    pen_[h] = trial_pen;
    nnz_[h] += (accepted != 0.0) - (theta0 != 0.0);

    // Quadratic forms are affine in this entry with slope 2 (X*_i beta)_u.
    {
        double* q0 = uptr(u0_, h);
        double* q1 = uptr(u1_, h);
        double* q2 = uptr(u2_, h);
        for (int i = 0; i < n_; ++i) {
            q0[i] += 2.0 * d0_scr_[i] * step;
            q1[i] += 2.0 * d1_scr_[i] * step;
            q2[i] += 2.0 * d2_scr_[i] * step;
        }
    }

    if (nnz_[h] <= 1) snap_quadforms(h);
    return accepted;
}

double CoordinateState::update_age_coeff(int h, AgeCoeff which, bool safeguard) {
    Component& comp = params_.components[h];
    double& slot = which == AgeCoeff::Alpha ? comp.alpha
                 : which == AgeCoeff::Rho   ? comp.rho
                                            : comp.gamma;
    if (dead_[h]) return slot;

    const UpdateCoeffs c = age_coeffs_for(h, which);
    double theta;
    if (c.a + c.e == 0.0) {
        theta = 0.0;
    } else {
        const double z = c.a * slot - c.b;
        theta = soft_threshold(z, c.d) / (c.a + c.e);
    }
    return commit_age(h, which, theta, safeguard);
}

double CoordinateState::commit_age(int h, AgeCoeff which, double theta, bool safeguard) {
    Component& comp = params_.components[h];
    double& slot = which == AgeCoeff::Alpha ? comp.alpha
                 : which == AgeCoeff::Rho   ? comp.rho
                                            : comp.gamma;
    const double theta0 = slot;
    if (theta == theta0) return theta0;

    const double* uq = which == AgeCoeff::Alpha ? uptr(u0_, h)
                     : which == AgeCoeff::Rho   ? uptr(u1_, h)
                                                : uptr(u2_, h);
    const double old_loss = nll_ + penalty_total();
    const BetaSums sums = beta_sums(h, -1);

    double cand = theta;
    double accepted = std::numeric_limits<double>::quiet_NaN();
    double trial_nll = 0.0, trial_pen = 0.0;
    for (int halvings = 0; halvings <= 30; ++halvings) {
        if (cand == theta0) break;
        const double step = cand - theta0;
        double ll = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double z = logit_[i] + uq[i] * step;
            logit_scr_[i] = z;
            ll += loglik_and_prob(labels_[i], z, prob_scr_[i]);
        }
        trial_nll = -ll / n_;
        const double a0 = which == AgeCoeff::Alpha ? cand : comp.alpha;
        const double r0 = which == AgeCoeff::Rho ? cand : comp.rho;
        const double g0 = which == AgeCoeff::Gamma ? cand : comp.gamma;
        trial_pen = penalty_of(std::fabs(a0) + std::fabs(r0) + std::fabs(g0),
                               a0 * a0 + r0 * r0 + g0 * g0, sums);
        const double trial_loss = trial_nll + trial_penalty_total(h, trial_pen);
        if (!safeguard || trial_loss <= old_loss) {
            accepted = cand;
            break;
        }
        cand = 0.5 * (cand + theta0);
    }
    if (std::isnan(accepted)) return theta0;

    slot = accepted;
    std::swap(logit_, logit_scr_);
    std::swap(prob_, prob_scr_);
    nll_ = trial_nll;
    pen_[h] = trial_pen;
    return accepted;
}

double CoordinateState::update_intercept(bool safeguard) {
    const Surrogate s = intercept_surrogate();
    const double theta = s.a > 0.0 ? params_.intercept - s.b / s.a : 0.0;
    return commit_intercept(theta, safeguard);
}

double CoordinateState::commit_intercept(double theta, bool safeguard) {
    const double theta0 = params_.intercept;
    if (theta == theta0) return theta0;

    const double old_loss = nll_ + penalty_total();
    double cand = theta;
    double accepted = std::numeric_limits<double>::quiet_NaN();
    double trial_nll = 0.0;
    for (int halvings = 0; halvings <= 30; ++halvings) {
        if (cand == theta0) break;
        const double step = cand - theta0;
        double ll = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double z = logit_[i] + step;
            logit_scr_[i] = z;
            ll += loglik_and_prob(labels_[i], z, prob_scr_[i]);
        }
        trial_nll = -ll / n_;
        const double trial_loss = trial_nll + penalty_total();
        if (!safeguard || trial_loss <= old_loss) {
            accepted = cand;
            break;
        }
        cand = 0.5 * (cand + theta0);
    }
    if (std::isnan(accepted)) return theta0;

    params_.intercept = accepted;
    std::swap(logit_, logit_scr_);
    std::swap(prob_, prob_scr_);
    nll_ = trial_nll;
    return accepted;
}

void CoordinateState::snap_quadforms(int h) {
    // At most one nonzero beta entry: every quadratic form is exactly zero
    // (zero diagonal), so replace the incrementally tracked values.
    std::fill(uptr(u0_, h), uptr(u0_, h) + n_, 0.0);
    std::fill(uptr(u1_, h), uptr(u1_, h) + n_, 0.0);
    std::fill(uptr(u2_, h), uptr(u2_, h) + n_, 0.0);
    if (nnz_[h] == 0) mark_dead(h);
}

void CoordinateState::mark_dead(int h) {
    // With beta identically zero every remaining update for this component
    // returns zero, so the age coefficients are zeroed now and the component
    // is skipped; the linear predictors and the loss are unaffected.
    Component& comp = params_.components[h];
    comp.alpha = 0.0;
    comp.rho = 0.0;
    comp.gamma = 0.0;
    pen_[h] = 0.0;
    dead_[h] = 1;
}

double CoordinateState::sweep(const std::vector<int>& order, bool safeguard) {
    for (int h = 0; h < k_; ++h) {
        if (dead_[h]) continue;
        for (int u : order) update_beta_entry(h, u, safeguard);
    }
    for (int h = 0; h < k_; ++h) {
        if (dead_[h]) continue;
        update_age_coeff(h, AgeCoeff::Alpha, safeguard);
        update_age_coeff(h, AgeCoeff::Rho, safeguard);
        update_age_coeff(h, AgeCoeff::Gamma, safeguard);
    }
    update_intercept(safeguard);
    return current_loss();
}

double CoordinateState::from_scratch_logit(int i) const {
    return logit_value(params_, (*designs_)[i]);
}

double CoordinateState::from_scratch_loss() const {
    return loss_value(params_, *designs_, labels_, delta_, eta_);
}

std::size_t CoordinateState::accounted_bytes() const {
    const auto bytes = [](const auto& v) { return v.capacity() * sizeof(v[0]); };
    return bytes(xpack_) + bytes(u0_) + bytes(u1_) + bytes(u2_) + bytes(logit_) + bytes(prob_) +
           bytes(m_scr_) + bytes(logit_scr_) + bytes(prob_scr_) + bytes(d0_scr_) +
           bytes(d1_scr_) + bytes(d2_scr_) + bytes(y_) + bytes(labels_);
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

namespace {

void validate_config(const FitConfig& cfg, int v) {
    if (cfg.k < 1) throw ConfigError("fit: K must be >= 1");
    if (!(cfg.delta > 0.0)) throw ConfigError("fit: delta must be > 0");
    if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0)) throw ConfigError("fit: eta must be in [0, 1]");
    if (!(cfg.tolerance > 0.0)) throw ConfigError("fit: tolerance must be > 0");
    if (cfg.max_cycles < 1) throw ConfigError("fit: max_cycles must be >= 1");
    if (cfg.n_restarts < 1) throw ConfigError("fit: n_restarts must be >= 1");
    if (!cfg.node_visit_order.empty()) {
        if (static_cast<int>(cfg.node_visit_order.size()) != v) {
            throw ConfigError("fit: node_visit_order must list every node exactly once");
        }
        std::vector<char> seen(v, 0);
        for (int u : cfg.node_visit_order) {
            if (u < 0 || u >= v || seen[u]) {
                throw ConfigError("fit: node_visit_order must list every node exactly once");
            }
            seen[u] = 1;
        }
    }
}

std::vector<int> visit_order(const FitConfig& cfg, int v) {
    if (!cfg.node_visit_order.empty()) return cfg.node_visit_order;
    std::vector<int> order(v);
    std::iota(order.begin(), order.end(), 0);
    return order;
}

FitResult run_single(CoordinateState& state, const SblrParams& init, const FitConfig& cfg,
                     const std::vector<int>& order) {
    state.reset(init);
    FitResult res;
    res.loss_trace.push_back(state.current_loss());
    for (int cycle = 1; cycle <= cfg.max_cycles; ++cycle) {
        const double prev = res.loss_trace.back();
        const double cur = state.sweep(order, cfg.descent_safeguard);
        res.loss_trace.push_back(cur);
        res.cycles_used = cycle;
        const double rel = std::fabs(prev - cur) / std::max(prev, 1e-300);
        if (rel < cfg.tolerance) {
            res.converged = true;
            break;
        }
    }
    res.params = state.params();
    res.final_loss = res.loss_trace.back();
    return res;
}

}  // namespace

FitResult fit_from(const std::vector<DesignTriple>& designs, const std::vector<int>& labels,
                   const SblrParams& init, const FitConfig& cfg) {
    if (designs.empty()) throw ConfigError("fit: empty dataset");
    validate_config(cfg, designs[0].x0.n());
    CoordinateState state(designs, labels, cfg.delta, cfg.eta, init.n_components(),
                          cfg.order_invariant);
    const auto order = visit_order(cfg, designs[0].x0.n());
    return run_single(state, init, cfg, order);
}

FitResult fit(const std::vector<DesignTriple>& designs, const std::vector<int>& labels,
              const FitConfig& cfg, const std::vector<SblrParams>& extra_inits) {
    const int n = static_cast<int>(designs.size());
    if (n < 2) throw ConfigError("fit: need at least two subjects");
    if (static_cast<int>(labels.size()) != n) throw ConfigError("fit: designs/labels length mismatch");
    const int v = designs[0].x0.n();
    validate_config(cfg, v);

    bool has0 = false, has1 = false;
    for (int y : labels) {
        if (y == 0) has0 = true;
        else if (y == 1) has1 = true;
        else throw DataError("fit: labels must be 0 or 1");
    }
    if (!has0 || !has1) throw DataError("fit: both classes must be present");
    for (const DesignTriple& d : designs) {
        if (d.x0.n() != v || d.x1.n() != v || d.x2.n() != v) {
            throw ConfigError("fit: designs disagree on V");
        }
        for (const Matrix* m : {&d.x0, &d.x1, &d.x2}) {
            for (double x : m->data()) {
                if (!std::isfinite(x)) throw DataError("fit: non-finite design entry");
            }
        }
    }

    CoordinateState state(designs, labels, cfg.delta, cfg.eta, cfg.k, cfg.order_invariant);
    const auto order = visit_order(cfg, v);

    FitResult best;
    bool have_best = false;
    for (int r = 0; r < cfg.n_restarts; ++r) {
        Rng rng(cfg.seed, static_cast<std::uint64_t>(r));
        const SblrParams init = random_init(cfg.k, v, rng);
        FitResult res = run_single(state, init, cfg, order);
        res.restart_index = r;
        if (!have_best || res.final_loss < best.final_loss) {
            best = std::move(res);
            have_best = true;
        }
    }
    for (std::size_t j = 0; j < extra_inits.size(); ++j) {
        FitResult res = run_single(state, extra_inits[j], cfg, order);
        res.restart_index = cfg.n_restarts + static_cast<int>(j);
        if (!have_best || res.final_loss < best.final_loss) {
            best = std::move(res);
            have_best = true;
        }
    }
    return best;
}

}  // namespace sblr
