#pragma once

#include <cstddef>
#include <vector>

namespace sblr {

/// Dense square matrix of doubles, row-major. Network adjacency matrices and
/// the derived matrix predictors are all V x V, symmetric with zero diagonal;
/// symmetry is a data invariant checked at ingestion, not enforced here.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int n, double fill = 0.0)
        : n_(n), d_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), fill) {}

    int n() const { return n_; }

    double& operator()(int r, int c) { return d_[idx(r, c)]; }
    double operator()(int r, int c) const { return d_[idx(r, c)]; }

    double* row(int r) { return d_.data() + idx(r, 0); }
    const double* row(int r) const { return d_.data() + idx(r, 0); }

    std::vector<double>& data() { return d_; }
    const std::vector<double>& data() const { return d_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t idx(int r, int c) const {
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(c);
    }

    int n_ = 0;
    std::vector<double> d_;
};

}  // namespace sblr
