#include "sblr/reports.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sblr/errors.hpp"
#include "sblr/params.hpp"

namespace sblr {

using nlohmann::json;

namespace {

json config_echo(const FitConfig& cfg) {
    json out;
    out["k"] = cfg.k;
    out["delta"] = cfg.delta;
    out["eta"] = cfg.eta;
    out["tolerance"] = cfg.tolerance;
    out["max_cycles"] = cfg.max_cycles;
    out["n_restarts"] = cfg.n_restarts;
    out["seed"] = cfg.seed;
    out["descent_safeguard"] = cfg.descent_safeguard;
    return out;
}

json selection_echo(const CvTable& cv) {
    json out;
    out["delta"] = cv.selected.delta;
    out["eta"] = cv.selected.eta;
    out["delta_index"] = cv.selected.delta_index;
    out["eta_index"] = cv.selected.eta_index;
    out["mean_deviance"] = cv.selected.mean_deviance;
    out["delta_max"] = cv.grid.delta_max;
    out["n_folds"] = cv.n_folds;
    return out;
}

}  // namespace

json fit_report_json(const FitResult& result, const FitConfig& config,
                     const StandardizationStats* stats, const CvTable* cv) {
    json doc;
    doc["model"] = "sblr";
    doc["config"] = config_echo(config);
    doc["seed"] = config.seed;
    doc["intercept"] = result.params.intercept;
    doc["final_loss"] = result.final_loss;
    doc["cycles_used"] = result.cycles_used;
    doc["converged"] = result.converged;
    doc["restart_index"] = result.restart_index;
    doc["loss_trace"] = result.loss_trace;
    if (stats) {
        doc["standardization"] = {{"age_mean", stats->age_mean},
                                  {"age_sd", stats->age_sd},
                                  {"agesq_mean", stats->agesq_mean},
                                  {"agesq_sd", stats->agesq_sd}};
    }

    const auto normalized = normalize_components(result.params);
    const auto subgraphs = extract_subgraphs(result.params);
    std::vector<AgeEffect> original;
    if (stats && stats->age_sd > 0.0 && stats->agesq_sd > 0.0) {
        original = recover_age_effect(result.params, *stats);
    }

    json components = json::array();
    for (int h = 0; h < result.params.n_components(); ++h) {
        const Component& c = result.params.components[h];
        json jc;
        jc["empty"] = result.params.component_empty(h);
        jc["beta"] = c.beta;
        jc["alpha"] = c.alpha;
        jc["rho"] = c.rho;
        jc["gamma"] = c.gamma;
        if (!original.empty()) {
            jc["original_scale"] = {{"alpha", original[h].alpha},
                                    {"rho", original[h].rho},
                                    {"gamma", original[h].gamma}};
        }
        if (!normalized[h].empty) {
            jc["normalized"] = {{"scale", normalized[h].scale},
                                {"beta", normalized[h].beta},
                                {"alpha", normalized[h].alpha},
                                {"rho", normalized[h].rho},
                                {"gamma", normalized[h].gamma}};
        }
        json edges = json::array();
        for (const auto& e : subgraphs[h]) {
            edges.push_back({{"u", e.u}, {"v", e.v}, {"weight", e.weight}});
        }
        jc["edges"] = std::move(edges);
        components.push_back(std::move(jc));
    }
    doc["components"] = std::move(components);

    json sel_edges = json::array();
    for (const auto& [u, v] : selected_edges(result.params)) sel_edges.push_back({u, v});
    doc["selected_edges"] = std::move(sel_edges);
    if (cv) doc["cv_selection"] = selection_echo(*cv);
    return doc;
}

json lr_report_json(const UnstructuredParams& params, double delta, double eta, const CvTable* cv) {
    json doc;
    doc["model"] = "lr";
    doc["config"] = {{"delta", delta}, {"eta", eta}};
    doc["intercept"] = params.intercept;
    const char* names[3] = {"b1_edges", "b2_edges", "b3_edges"};
    const std::vector<double>* mats[3] = {&params.b1, &params.b2, &params.b3};
    for (int m = 0; m < 3; ++m) {
        json edges = json::array();
        for (int idx = 0; idx < static_cast<int>(mats[m]->size()); ++idx) {
            if ((*mats[m])[idx] != 0.0) {
                const auto [u, v] = UnstructuredParams::tri_unindex(idx);
                edges.push_back({{"u", u}, {"v", v}, {"coef", (*mats[m])[idx]}});
            }
        }
        doc[names[m]] = std::move(edges);
    }
    json sel_edges = json::array();
    for (const auto& [u, v] : params.selected_edges()) sel_edges.push_back({u, v});
    doc["selected_edges"] = std::move(sel_edges);
    if (cv) doc["cv_selection"] = selection_echo(*cv);
    return doc;
}

void write_cv_table_csv(const CvTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write CV table: " + path);
    out << "eta_index,eta,delta_index,delta,fold,deviance\n";
    out.precision(17);
    for (std::size_t e = 0; e < table.grid.etas.size(); ++e) {
        for (std::size_t d = 0; d < table.grid.deltas.size(); ++d) {
            const CvCell& cell = table.cells[e][d];
            for (int f = 0; f < table.n_folds; ++f) {
                out << e << "," << table.grid.etas[e] << "," << d << "," << table.grid.deltas[d]
                    << "," << f << "," << cell.fold_deviances[f] << "\n";
            }
        }
    }
}

json cv_summary_json(const CvTable& table) {
    json doc;
    doc["etas"] = table.grid.etas;
    doc["deltas"] = table.grid.deltas;
    doc["delta_max"] = table.grid.delta_max;
    doc["delta_min"] = table.grid.delta_min;
    doc["n_folds"] = table.n_folds;
    doc["fold_of_subject"] = table.fold_of_subject;

    json cells = json::array();
    json path = json::array();  // per-eta one-standard-error choices
    for (std::size_t e = 0; e < table.grid.etas.size(); ++e) {
        json row = json::array();
        for (std::size_t d = 0; d < table.grid.deltas.size(); ++d) {
            row.push_back({{"mean_deviance", table.cells[e][d].mean_deviance},
                           {"std_error", table.cells[e][d].std_error}});
        }
        cells.push_back(std::move(row));

        std::size_t min_d = 0;
        for (std::size_t d = 1; d < table.grid.deltas.size(); ++d) {
            if (table.cells[e][d].mean_deviance < table.cells[e][min_d].mean_deviance) min_d = d;
        }
        const double threshold =
            table.cells[e][min_d].mean_deviance + table.cells[e][min_d].std_error;
        std::size_t pick = min_d;
        for (std::size_t d = 0; d < table.grid.deltas.size(); ++d) {
            if (table.cells[e][d].mean_deviance <= threshold) {
                pick = d;
                break;
            }
        }
        path.push_back({{"eta", table.grid.etas[e]},
                        {"delta", table.grid.deltas[pick]},
                        {"delta_index", pick},
                        {"mean_deviance", table.cells[e][pick].mean_deviance}});
    }
    doc["cells"] = std::move(cells);
    doc["one_se_path"] = std::move(path);
    doc["selected"] = {{"eta", table.selected.eta},
                       {"delta", table.selected.delta},
                       {"eta_index", table.selected.eta_index},
                       {"delta_index", table.selected.delta_index},
                       {"mean_deviance", table.selected.mean_deviance}};
    return doc;
}

json recovery_report_json(const std::vector<RecoveryRow>& rows) {
    json doc;
    json jrows = json::array();
    double tpr_sum = 0.0, fpr_sum = 0.0, dev_sum = 0.0;
    double tpr_ss = 0.0, fpr_ss = 0.0, dev_ss = 0.0;
    int dev_count = 0;
    for (const auto& r : rows) {
        json jr;
        jr["fit"] = r.fit_path;
        jr["truth"] = r.truth_path;
        jr["model"] = r.model;
        jr["n_selected"] = r.n_selected;
        jr["tpr"] = r.tpr;
        jr["fpr"] = r.fpr;
        if (r.has_cv_deviance) {
            jr["cv_deviance"] = r.cv_deviance;
            dev_sum += r.cv_deviance;
            dev_ss += r.cv_deviance * r.cv_deviance;
            ++dev_count;
        }
        tpr_sum += r.tpr;
        fpr_sum += r.fpr;
        tpr_ss += r.tpr * r.tpr;
        fpr_ss += r.fpr * r.fpr;
        jrows.push_back(std::move(jr));
    }
    doc["rows"] = std::move(jrows);
    const int n = static_cast<int>(rows.size());
    auto mean_sd = [](double sum, double ss, int count) {
        json out;
        if (count == 0) return out;
        const double mean = sum / count;
        out["mean"] = mean;
        if (count > 1) {
            out["sd"] = std::sqrt(std::max(0.0, (ss - count * mean * mean) / (count - 1)));
        }
        return out;
    };
    doc["summary"] = {{"n", n},
                      {"tpr", mean_sd(tpr_sum, tpr_ss, n)},
                      {"fpr", mean_sd(fpr_sum, fpr_ss, n)},
                      {"cv_deviance", mean_sd(dev_sum, dev_ss, dev_count)}};
    return doc;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    json doc;
    doc["command"] = manifest.command;
    doc["config"] = manifest.config;
    doc["seed"] = manifest.seed;
    doc["versions"] = {{"app", "sblr 0.1.0"}, {"format", 1}};
    doc["inputs"] = manifest.inputs;
    doc["outputs"] = manifest.outputs;
    doc["wall_time_seconds"] = manifest.wall_time_seconds;
    doc["peak_memory"] = {{"accounted_bytes", manifest.accounted_bytes},
                          {"vm_hwm_bytes", manifest.peak_rss_bytes}};
    write_json_file(doc, path);
}

std::uint64_t peak_rss_bytes() {
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("VmHWM:", 0) == 0) {
            std::istringstream is(line.substr(6));
            std::uint64_t kb = 0;
            is >> kb;
            return kb * 1024;
        }
    }
    return 0;
}

void write_json_file(const json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << doc.dump(1) << "\n";
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("malformed JSON in " + path + ": " + e.what());
    }
    return doc;
}

std::vector<std::pair<int, int>> edges_from_report(const json& report) {
    std::vector<std::pair<int, int>> out;
    for (const auto& e : report.at("selected_edges")) {
        out.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    return out;
}

}  // namespace sblr
