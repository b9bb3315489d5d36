#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sblr/baseline.hpp"
#include "sblr/dataset.hpp"
#include "sblr/model_selection.hpp"
#include "sblr/solver.hpp"
#include "sblr/synthetic.hpp"

namespace sblr {

/// Fit report: parameters, age effects in both scales, normalized component
/// entries, edge lists, the loss trace and convergence metadata, plus a
/// config echo. `stats` enables original-scale age effects; `cv` attaches
/// the selected cell when the fit came out of a cross-validation run.
nlohmann::json fit_report_json(const FitResult& result, const FitConfig& config,
                               const StandardizationStats* stats, const CvTable* cv);

nlohmann::json lr_report_json(const UnstructuredParams& params, double delta, double eta,
                              const CvTable* cv);

/// One CSV row per (eta, delta, fold) cell evaluation.
void write_cv_table_csv(const CvTable& table, const std::string& path);

/// Means, standard errors, the per-eta one-standard-error path, and the
/// selected cell.
nlohmann::json cv_summary_json(const CvTable& table);

struct RecoveryRow {
    std::string fit_path;
    std::string truth_path;
    std::string model;
    int n_selected = 0;
    double tpr = 0.0;
    double fpr = 0.0;
    bool has_cv_deviance = false;
    double cv_deviance = 0.0;
};

nlohmann::json recovery_report_json(const std::vector<RecoveryRow>& rows);

/// Reproducibility manifest written once per output directory.
struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double wall_time_seconds = 0.0;
    std::uint64_t accounted_bytes = 0;
    std::uint64_t peak_rss_bytes = 0;
};

void write_manifest(const RunManifest& manifest, const std::string& path);

/// VmHWM from /proc/self/status; 0 when unavailable.
std::uint64_t peak_rss_bytes();

void write_json_file(const nlohmann::json& doc, const std::string& path);
nlohmann::json read_json_file(const std::string& path);

/// Edges recorded in a fit report (either model), as (u, v<u) pairs.
std::vector<std::pair<int, int>> edges_from_report(const nlohmann::json& report);

}  // namespace sblr
