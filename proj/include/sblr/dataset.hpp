#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sblr/matrix.hpp"

namespace sblr {

/// One network observation: the subject's age at the visit and the symmetric
/// zero-diagonal V x V adjacency matrix measured then.
struct Visit {
    double age = 0.0;
    Matrix network;
};

/// A subject: binary outcome plus an age-ordered sequence of visits (>= 1).
struct LongitudinalSubject {
    int label = 0;
    std::vector<Visit> visits;
};

struct Dataset {
    int n_nodes = 0;
    std::vector<LongitudinalSubject> subjects;

    int n_subjects() const { return static_cast<int>(subjects.size()); }
};

/// Pooled per-edge and age moments used to put all predictors on a common
/// scale. Variances use the population convention (divide by the observation
/// count). Edges whose pooled variance is zero keep sd = 0 and standardize
/// to 0 everywhere.
struct StandardizationStats {
    Matrix edge_mean;
    Matrix edge_sd;
    double age_mean = 0.0;
    double age_sd = 0.0;
    double agesq_mean = 0.0;
    double agesq_sd = 0.0;
};

struct StdVisit {
    Matrix network;     // standardized edges
    double age = 0.0;   // standardized age
    double agesq = 0.0; // standardized squared age (from raw age^2, not age~^2)
};

struct StdSubject {
    int label = 0;
    std::vector<StdVisit> visits;
};

struct StandardizedDataset {
    int n_nodes = 0;
    std::vector<StdSubject> subjects;

    int n_subjects() const { return static_cast<int>(subjects.size()); }
};

/// The three per-subject averaged matrix predictors: visit mean of the
/// standardized networks, and the same mean weighted by standardized age and
/// standardized squared age. All three inherit symmetry and zero diagonal.
struct DesignTriple {
    Matrix x0;
    Matrix x1;
    Matrix x2;
};

enum class DatasetFormat { Json, CsvBundle };

struct LoadOptions {
    /// When set, near-symmetric matrices are replaced by (W + W^T)/2 instead
    /// of being rejected. Off by default: stored values must match exactly.
    bool symmetrize = false;
};

/// Throws DataError naming the subject, visit and entry on the first broken
/// invariant: asymmetry, nonzero diagonal, inconsistent node count, label
/// outside {0,1}, empty visit list, or decreasing ages within a subject.
void validate(const Dataset& dataset);

Dataset load_dataset(const std::string& path, DatasetFormat format, const LoadOptions& opts = {});
void save_dataset(const Dataset& dataset, const std::string& path, DatasetFormat format);

/// Pooled standardization over all (subject, visit) observations.
std::pair<StandardizedDataset, StandardizationStats> standardize(const Dataset& dataset);

/// Standardize with precomputed stats (held-out data in cross-validation).
StandardizedDataset apply_standardization(const Dataset& dataset, const StandardizationStats& stats);

std::vector<DesignTriple> build_design(const StandardizedDataset& dataset);

std::vector<int> labels_of(const Dataset& dataset);
std::vector<int> labels_of(const StandardizedDataset& dataset);

}  // namespace sblr
