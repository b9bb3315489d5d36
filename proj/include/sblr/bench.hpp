#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sblr/dataset.hpp"
#include "sblr/solver.hpp"

namespace sblr {

/// Random dataset for complexity measurements: i.i.d. standard-normal edges
/// per visit, baseline age uniform on [60, 90) advancing one year per visit,
/// one to five visits, fair-coin labels.
Dataset gen_bench_dataset(int n, int v, std::uint64_t seed);

struct BenchPoint {
    double size = 0.0;              // the swept parameter value
    double seconds_per_cycle = 0.0; // timer around full sweeps, I/O excluded
    std::uint64_t bytes = 0;        // designs + solver caches
};

struct BenchReport {
    std::string mode;  // "n", "k" or "v"
    std::vector<BenchPoint> points;
    double time_slope = 0.0;    // log-log regression slope
    double memory_slope = 0.0;
};

/// Average seconds per full coordinate sweep in the dense regime (penalty
/// small enough that nothing shrinks away). Also reports accounted memory.
double time_per_cycle(const std::vector<DesignTriple>& designs, const std::vector<int>& labels,
                      const FitConfig& config, int warmup_cycles, int timed_cycles,
                      std::uint64_t* accounted_bytes = nullptr);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Ladder over one of n / K / V with the other two held at the given values.
BenchReport run_bench(const std::string& mode, const std::vector<int>& values, int n, int v, int k,
                      std::uint64_t seed);

}  // namespace sblr
