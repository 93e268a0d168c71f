#ifndef DRAM_ORACLE_FEATURES_HPP
#define DRAM_ORACLE_FEATURES_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dram_oracle/config.hpp"
#include "dram_oracle/dramsim.hpp"
#include "dram_oracle/trace.hpp"

namespace dram_oracle {

// Model inputs for one (workload, device, operating point) sample. t_reuse_s
// holds the sentinel value cfg.never_reused_sentinel_s() when no address in
// the trace was ever re-referenced.
struct FeatureVector {
    std::string workload;
    std::string device;
    double temp_c = 0.0;
    double t_refp_s = 0.0;
    double v_dd = 0.0;
    double t_reuse_s = 0.0;
    double h_dp_bits = 0.0;
    double mem_accesses_per_cycle = 0.0;
    double wait_cycles_ratio = 0.0;
    std::vector<double> nuisance;  // order matches nuisance_feature_names()

    bool operator==(const FeatureVector&) const = default;
};

// Auxiliary trace statistics standing in for the wider hardware-counter set.
const std::vector<std::string>& nuisance_feature_names();

// Numeric dataset schema, in CSV column order (after workload and device):
// temp_c, t_refp_s, v_dd, core features, nuisance features.
const std::vector<std::string>& feature_schema();

std::vector<double> feature_values(const FeatureVector& fv);  // schema order

// Mean over re-referencing accesses of cpi * (instruction distance since the
// last access to the same word) / f_clk. First touches are excluded; a trace
// where nothing is re-referenced yields nullopt.
std::optional<double> reuse_time(const MemoryTrace& trace, double f_clk_hz);
std::optional<double> reuse_time(const TraceStats& stats, double cpi, double f_clk_hz);

// Shannon entropy (bits) of the empirical distribution of 32-bit written
// values. Throws ValidationError when the trace contains no writes.
double data_entropy(const MemoryTrace& trace);

// accesses / total cycles. Throws ValidationError when total_cycles == 0.
double access_rate(const MemoryTrace& trace);

// min(1, accesses * stall_cost / total_cycles).
double wait_cycles_ratio(const MemoryTrace& trace, double stall_cost_cycles);

FeatureVector extract_features(const MemoryTrace& trace, const TraceStats& stats,
                               const std::string& device, const EnvPoint& env,
                               const SimConfig& cfg);

// Spearman rank correlation: Pearson correlation of fractional ranks, ties
// averaged. Throws ValidationError (length mismatch / n < 2) or NumericError
// (zero rank variance in either argument).
double spearman(std::span<const double> xs, std::span<const double> ys);

std::vector<double> fractional_ranks(std::span<const double> xs);

}  // namespace dram_oracle

#endif
