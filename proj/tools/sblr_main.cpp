#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sblr/baseline.hpp"
#include "sblr/bench.hpp"
#include "sblr/errors.hpp"
#include "sblr/model_selection.hpp"
#include "sblr/params.hpp"
#include "sblr/reports.hpp"
#include "sblr/solver.hpp"
#include "sblr/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sblr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNoConvergence = 4;

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    for (double x : parse_double_list(csv)) out.push_back(static_cast<int>(x));
    return out;
}

/// Replay support: pull the config echo out of a manifest (or a bare config
/// object) and inject its entries as command-line defaults for any flag the
/// user did not pass explicitly.
std::vector<std::string> inject_config_defaults(const std::vector<std::string>& args) {
    std::string config_path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") config_path = args[i + 1];
    }
    if (config_path.empty()) return args;

    json doc = read_json_file(config_path);
    if (doc.contains("config")) doc = doc.at("config");

    auto have_flag = [&](const std::string& flag) {
        for (const auto& a : args) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        }
        return false;
    };

    std::vector<std::string> out = args;
    for (const auto& [key, value] : doc.items()) {
        const std::string flag = "--" + key;
        if (have_flag(flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) out.push_back(flag);
        } else if (value.is_string()) {
            out.push_back(flag);
            out.push_back(value.get<std::string>());
        } else {
            out.push_back(flag);
            out.push_back(value.dump());
        }
    }
    return out;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

Dataset load_input(const std::string& path) {
    const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
    return load_dataset(path, csv ? DatasetFormat::CsvBundle : DatasetFormat::Json);
}

void finish_manifest(RunManifest& manifest, const Timer& timer, const fs::path& out_dir) {
    manifest.wall_time_seconds = timer.seconds();
    manifest.peak_rss_bytes = peak_rss_bytes();
    manifest.outputs.push_back((out_dir / "manifest.json").string());
    write_manifest(manifest, (out_dir / "manifest.json").string());
}

struct SimulateArgs {
    int n = 100;
    int v = 20;
    std::uint64_t seed = 0;
    double noise_frac = 0.05;
    int max_visits = 5;
    double age_low = 60.0;
    double age_high = 90.0;
    std::string output_dir = ".";
};

int cmd_simulate(const SimulateArgs& a) {
    Timer timer;
    GeneratorConfig cfg;
    cfg.n = a.n;
    cfg.v = a.v;
    cfg.seed = a.seed;
    cfg.noise_frac = a.noise_frac;
    cfg.max_visits = a.max_visits;
    cfg.age_low = a.age_low;
    cfg.age_high = a.age_high;

    const SyntheticData data = generate(cfg);
    const fs::path dir(a.output_dir);
    fs::create_directories(dir);
    save_dataset(data.dataset, (dir / "dataset.json").string(), DatasetFormat::Json);
    save_truth(data.truth, (dir / "truth.json").string());

    RunManifest manifest;
    manifest.command = "simulate";
    manifest.seed = a.seed;
    manifest.config = {{"n", a.n},           {"v", a.v},
                       {"seed", a.seed},     {"noise-frac", a.noise_frac},
                       {"max-visits", a.max_visits}, {"age-low", a.age_low},
                       {"age-high", a.age_high},     {"output-dir", a.output_dir}};
    manifest.outputs = {(dir / "dataset.json").string(), (dir / "truth.json").string()};
    finish_manifest(manifest, timer, dir);
    std::cout << "wrote " << (dir / "dataset.json").string() << " (n=" << a.n << ", V=" << a.v
              << ")\n";
    return kExitOk;
}

struct FitArgs {
    std::string input;
    std::string output_dir = ".";
    int k = 5;
    double delta = 0.1;
    double eta = 0.5;
    int restarts = 20;
    std::uint64_t seed = 0;
    double tolerance = 1e-5;
    int max_cycles = 1000;
};

int cmd_fit(const FitArgs& a) {
    Timer timer;
    const Dataset dataset = load_input(a.input);
    const auto [std_data, stats] = standardize(dataset);
    const auto designs = build_design(std_data);
    const auto labels = labels_of(std_data);

    FitConfig cfg;
    cfg.k = a.k;
    cfg.delta = a.delta;
    cfg.eta = a.eta;
    cfg.n_restarts = a.restarts;
    cfg.seed = a.seed;
    cfg.tolerance = a.tolerance;
    cfg.max_cycles = a.max_cycles;

    const FitResult result = fit(designs, labels, cfg);

    const fs::path dir(a.output_dir);
    fs::create_directories(dir);
    write_json_file(fit_report_json(result, cfg, &stats, nullptr),
                    (dir / "fit_report.json").string());

    RunManifest manifest;
    manifest.command = "fit";
    manifest.seed = a.seed;
    manifest.config = {{"input", a.input},     {"output-dir", a.output_dir},
                       {"k", a.k},             {"delta", a.delta},
                       {"eta", a.eta},         {"restarts", a.restarts},
                       {"seed", a.seed},       {"tolerance", a.tolerance},
                       {"max-cycles", a.max_cycles}};
    manifest.inputs = {a.input};
    manifest.outputs = {(dir / "fit_report.json").string()};
    finish_manifest(manifest, timer, dir);

    int nonempty = 0;
    for (int h = 0; h < result.params.n_components(); ++h) {
        nonempty += !result.params.component_empty(h);
    }
    std::cout << "fit: loss=" << result.final_loss << " cycles=" << result.cycles_used
              << " nonempty_components=" << nonempty << " converged=" << result.converged << "\n";
    return result.converged ? kExitOk : kExitNoConvergence;
}

struct CvArgs {
    std::string input;
    std::string output_dir = ".";
    std::string method = "sblr";
    int k = 5;
    int folds = 5;
    std::string etas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
    int n_deltas = 20;
    int restarts = 20;
    std::uint64_t seed = 0;
    std::string standardize_mode = "fold";
    int threads = 1;
    bool cold_start = false;
    double tolerance = 1e-5;
    int max_cycles = 1000;
};

int cmd_cv(const CvArgs& a) {
    Timer timer;
    if (a.method != "sblr" && a.method != "lr") {
        throw ConfigError("cv: --method must be sblr or lr");
    }
    if (a.standardize_mode != "fold" && a.standardize_mode != "global") {
        throw ConfigError("cv: --standardize must be fold or global");
    }
    const Dataset dataset = load_input(a.input);
    const auto [std_data, stats] = standardize(dataset);
    const auto designs = build_design(std_data);
    const auto labels = labels_of(std_data);
    const auto etas = parse_double_list(a.etas);

    CvOptions options;
    options.standardize =
        a.standardize_mode == "fold" ? StandardizeMode::PerFold : StandardizeMode::Global;
    options.warm_start = !a.cold_start;
    options.threads = a.threads;

    const fs::path dir(a.output_dir);
    fs::create_directories(dir);

    CvTable table;
    bool converged = true;
    if (a.method == "sblr") {
        FitConfig cfg;
        cfg.k = a.k;
        cfg.n_restarts = a.restarts;
        cfg.seed = a.seed;
        cfg.tolerance = a.tolerance;
        cfg.max_cycles = a.max_cycles;
        const PenaltyGrid grid = make_penalty_grid(designs, labels, etas, a.n_deltas, cfg);
        table = cross_validate(dataset, grid, a.folds, cfg, a.seed, options);

        FitConfig final_cfg = cfg;
        final_cfg.delta = table.selected.delta;
        final_cfg.eta = table.selected.eta;
        const FitResult final_fit = fit(designs, labels, final_cfg);
        converged = final_fit.converged;
        write_json_file(fit_report_json(final_fit, final_cfg, &stats, &table),
                        (dir / "selected_fit.json").string());
    } else {
        UnstructuredFitOptions opts;
        opts.tolerance = a.tolerance;
        opts.max_cycles = a.max_cycles;
        const PenaltyGrid grid =
            make_penalty_grid_unstructured(designs, labels, etas, a.n_deltas, opts);
        table = cv_unstructured(dataset, grid, a.folds, a.seed, options, opts);
        const UnstructuredParams final_fit =
            fit_unstructured(designs, labels, table.selected.delta, table.selected.eta, opts);
        write_json_file(lr_report_json(final_fit, table.selected.delta, table.selected.eta, &table),
                        (dir / "selected_fit.json").string());
    }
    write_cv_table_csv(table, (dir / "cv_table.csv").string());
    write_json_file(cv_summary_json(table), (dir / "cv_summary.json").string());

    RunManifest manifest;
    manifest.command = "cv";
    manifest.seed = a.seed;
    manifest.config = {{"input", a.input},
                       {"output-dir", a.output_dir},
                       {"method", a.method},
                       {"k", a.k},
                       {"folds", a.folds},
                       {"etas", a.etas},
                       {"n-deltas", a.n_deltas},
                       {"restarts", a.restarts},
                       {"seed", a.seed},
                       {"standardize", a.standardize_mode},
                       {"threads", a.threads},
                       {"cold-start", a.cold_start},
                       {"tolerance", a.tolerance},
                       {"max-cycles", a.max_cycles}};
    manifest.inputs = {a.input};
    manifest.outputs = {(dir / "cv_table.csv").string(), (dir / "cv_summary.json").string(),
                        (dir / "selected_fit.json").string()};
    finish_manifest(manifest, timer, dir);

    std::cout << "cv(" << a.method << "): selected delta=" << table.selected.delta
              << " eta=" << table.selected.eta << " mean_deviance=" << table.selected.mean_deviance
              << "\n";
    return converged ? kExitOk : kExitNoConvergence;
}

struct EvaluateArgs {
    std::string truth;
    std::vector<std::string> fits;
    std::string output_dir = ".";
};

int cmd_evaluate(const EvaluateArgs& a) {
    Timer timer;
    const GroundTruth truth = load_truth(a.truth);
    std::vector<RecoveryRow> rows;
    for (const auto& path : a.fits) {
        const json report = read_json_file(path);
        RecoveryRow row;
        row.fit_path = path;
        row.truth_path = a.truth;
        row.model = report.value("model", "unknown");
        const auto edges = edges_from_report(report);
        row.n_selected = static_cast<int>(edges.size());
        const Recovery rec = evaluate_recovery(edges, truth, truth.config.v);
        row.tpr = rec.tpr;
        row.fpr = rec.fpr;
        if (report.contains("cv_selection")) {
            row.has_cv_deviance = true;
            row.cv_deviance = report.at("cv_selection").at("mean_deviance").get<double>();
        }
        rows.push_back(std::move(row));
    }

    const fs::path dir(a.output_dir);
    fs::create_directories(dir);
    const json report = recovery_report_json(rows);
    write_json_file(report, (dir / "recovery_report.json").string());

    RunManifest manifest;
    manifest.command = "evaluate";
    manifest.config = {{"truth", a.truth}, {"output-dir", a.output_dir}};
    manifest.inputs = a.fits;
    manifest.inputs.push_back(a.truth);
    manifest.outputs = {(dir / "recovery_report.json").string()};
    finish_manifest(manifest, timer, dir);

    for (const auto& row : rows) {
        std::cout << row.model << " tpr=" << row.tpr << " fpr=" << row.fpr
                  << " selected=" << row.n_selected << "\n";
    }
    if (report.at("summary").at("tpr").contains("mean")) {
        std::cout << "mean tpr=" << report.at("summary").at("tpr").at("mean").get<double>()
                  << " mean fpr=" << report.at("summary").at("fpr").at("mean").get<double>()
                  << "\n";
    }
    return kExitOk;
}

struct BenchArgs {
    std::string mode = "n";
    std::string values;
    int n = 100;
    int v = 50;
    int k = 5;
    std::uint64_t seed = 0;
    std::string output_dir = ".";
};

int cmd_bench(const BenchArgs& a) {
    Timer timer;
    std::vector<int> values = parse_int_list(a.values);
    if (values.empty()) {
        if (a.mode == "n") values = {125, 250, 500, 1000};
        if (a.mode == "k") values = {2, 4, 8, 16};
        if (a.mode == "v") values = {25, 50, 100, 200};
    }
    const BenchReport report = run_bench(a.mode, values, a.n, a.v, a.k, a.seed);

    const fs::path dir(a.output_dir);
    fs::create_directories(dir);
    {
        std::ofstream csv(dir / "bench.csv");
        csv << "mode,size,seconds_per_cycle,bytes\n";
        csv.precision(17);
        for (const auto& p : report.points) {
            csv << report.mode << "," << p.size << "," << p.seconds_per_cycle << "," << p.bytes
                << "\n";
        }
    }
    json summary;
    summary["mode"] = report.mode;
    summary["time_slope"] = report.time_slope;
    summary["memory_slope"] = report.memory_slope;
    json points = json::array();
    for (const auto& p : report.points) {
        points.push_back({{"size", p.size},
                          {"seconds_per_cycle", p.seconds_per_cycle},
                          {"bytes", p.bytes}});
    }
    summary["points"] = std::move(points);
    write_json_file(summary, (dir / "bench_summary.json").string());

    RunManifest manifest;
    manifest.command = "bench";
    manifest.seed = a.seed;
    std::string values_csv;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) values_csv += ",";
        values_csv += std::to_string(values[i]);
    }
    manifest.config = {{"mode", a.mode}, {"values", values_csv}, {"n", a.n},
                       {"v", a.v},       {"k", a.k},             {"seed", a.seed},
                       {"output-dir", a.output_dir}};
    manifest.outputs = {(dir / "bench.csv").string(), (dir / "bench_summary.json").string()};
    finish_manifest(manifest, timer, dir);

    std::cout << "bench(" << report.mode << "): time_slope=" << report.time_slope
              << " memory_slope=" << report.memory_slope << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clique signal-subgraph learning from longitudinal networks"};
    app.require_subcommand(1);

    std::string config_file;

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a benchmark dataset with ground truth");
    sim_cmd->add_option("--n", sim.n, "Subjects");
    sim_cmd->add_option("--v", sim.v, "Nodes");
    sim_cmd->add_option("--seed", sim.seed, "RNG seed");
    sim_cmd->add_option("--noise-frac", sim.noise_frac, "First-visit relative noise bound");
    sim_cmd->add_option("--max-visits", sim.max_visits, "Maximum visits per subject");
    sim_cmd->add_option("--age-low", sim.age_low, "Baseline age lower bound");
    sim_cmd->add_option("--age-high", sim.age_high, "Baseline age upper bound");
    sim_cmd->add_option("--output-dir", sim.output_dir, "Output directory");
    sim_cmd->add_option("--config", config_file, "Config JSON supplying defaults");

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the bilinear model at fixed penalties");
    fit_cmd->add_option("--input", fit_args.input, "Dataset JSON")->required();
    fit_cmd->add_option("--output-dir", fit_args.output_dir, "Output directory");
    fit_cmd->add_option("--k", fit_args.k, "Component budget");
    fit_cmd->add_option("--delta", fit_args.delta, "Overall penalty factor");
    fit_cmd->add_option("--eta", fit_args.eta, "L1 fraction");
    fit_cmd->add_option("--restarts", fit_args.restarts, "Random initializations");
    fit_cmd->add_option("--seed", fit_args.seed, "RNG seed");
    fit_cmd->add_option("--tolerance", fit_args.tolerance, "Relative loss-change threshold");
    fit_cmd->add_option("--max-cycles", fit_args.max_cycles, "Sweep cap");
    fit_cmd->add_option("--config", config_file, "Config JSON supplying defaults");

    CvArgs cv_args;
    auto* cv_cmd = app.add_subcommand("cv", "Cross-validate penalties and fit the selected model");
    cv_cmd->add_option("--input", cv_args.input, "Dataset JSON")->required();
    cv_cmd->add_option("--output-dir", cv_args.output_dir, "Output directory");
    cv_cmd->add_option("--method", cv_args.method, "sblr or lr");
    cv_cmd->add_option("--k", cv_args.k, "Component budget (sblr)");
    cv_cmd->add_option("--folds", cv_args.folds, "Cross-validation folds");
    cv_cmd->add_option("--etas", cv_args.etas, "Comma-separated L1 fractions");
    cv_cmd->add_option("--n-deltas", cv_args.n_deltas, "Grid size along delta");
    cv_cmd->add_option("--restarts", cv_args.restarts, "Random initializations per fit");
    cv_cmd->add_option("--seed", cv_args.seed, "RNG seed");
    cv_cmd->add_option("--standardize", cv_args.standardize_mode, "fold or global");
    cv_cmd->add_option("--threads", cv_args.threads, "Worker cap for grid cells");
    cv_cmd->add_flag("--cold-start", cv_args.cold_start, "Disable warm starts along delta");
    cv_cmd->add_option("--tolerance", cv_args.tolerance, "Relative loss-change threshold");
    cv_cmd->add_option("--max-cycles", cv_args.max_cycles, "Sweep cap");
    cv_cmd->add_option("--config", config_file, "Config JSON supplying defaults");

    EvaluateArgs eval_args;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score fit reports against ground truth");
    eval_cmd->add_option("--truth", eval_args.truth, "Truth JSON")->required();
    eval_cmd->add_option("--fit", eval_args.fits, "Fit report JSON (repeatable)")->required();
    eval_cmd->add_option("--output-dir", eval_args.output_dir, "Output directory");
    eval_cmd->add_option("--config", config_file, "Config JSON supplying defaults");

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "Per-sweep timing ladders");
    bench_cmd->add_option("--mode", bench_args.mode, "Ladder variable: n, k or v");
    bench_cmd->add_option("--values", bench_args.values, "Comma-separated ladder values");
    bench_cmd->add_option("--n", bench_args.n, "Fixed subject count");
    bench_cmd->add_option("--v", bench_args.v, "Fixed node count");
    bench_cmd->add_option("--k", bench_args.k, "Fixed component budget");
    bench_cmd->add_option("--seed", bench_args.seed, "RNG seed");
    bench_cmd->add_option("--output-dir", bench_args.output_dir, "Output directory");
    bench_cmd->add_option("--config", config_file, "Config JSON supplying defaults");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = inject_config_defaults(args);
        std::vector<const char*> cargs;
        cargs.push_back(argv[0]);
        for (const auto& s : args) cargs.push_back(s.c_str());
        app.parse(static_cast<int>(cargs.size()), const_cast<char**>(cargs.data()));

        if (sim_cmd->parsed()) return cmd_simulate(sim);
        if (fit_cmd->parsed()) return cmd_fit(fit_args);
        if (cv_cmd->parsed()) return cmd_cv(cv_args);
        if (eval_cmd->parsed()) return cmd_evaluate(eval_args);
        if (bench_cmd->parsed()) return cmd_bench(bench_args);
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
