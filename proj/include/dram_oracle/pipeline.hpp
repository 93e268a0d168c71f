#ifndef DRAM_ORACLE_PIPELINE_HPP
#define DRAM_ORACLE_PIPELINE_HPP

#include <string>
#include <vector>

#include "dram_oracle/dataset.hpp"
#include "dram_oracle/dramsim.hpp"
#include "dram_oracle/features.hpp"
#include "dram_oracle/trace.hpp"

namespace dram_oracle {

// One profiled workload: trace, per-word statistics and the program-feature
// part of its FeatureVector (environment fields are stamped per sample).
struct ProfiledWorkload {
    WorkloadSpec spec;
    MemoryTrace trace;
    TraceStats stats;
    FeatureVector base_features;
};

ProfiledWorkload profile_workload(const WorkloadSpec& spec, const SimConfig& cfg, Exec exec);

// Loads every *.wl spec under dir (sorted by filename) and profiles it.
std::vector<ProfiledWorkload> profile_workload_dir(const std::string& dir, const SimConfig& cfg,
                                                   Exec exec);

// Builds cfg.device_ids.size() profiles; device seeds derive from base_seed
// and the device id.
std::vector<DimmProfile> build_device_set(const SimConfig& cfg, uint64_t base_seed, Exec exec);

// Characterization over the full (workload x device x t_refp x temp) grid.
// WER rows are labeled by one run each; P_UE rows by n_exp repeated runs.
Dataset build_wer_dataset(const std::vector<ProfiledWorkload>& workloads,
                          const std::vector<DimmProfile>& devices, const SimConfig& cfg,
                          const std::vector<double>& trefp_grid,
                          const std::vector<double>& temp_grid, double v_dd, uint64_t seed,
                          Exec exec);

Dataset build_pue_dataset(const std::vector<ProfiledWorkload>& workloads,
                          const std::vector<DimmProfile>& devices, const SimConfig& cfg,
                          const std::vector<double>& trefp_grid,
                          const std::vector<double>& temp_grid, double v_dd, uint32_t n_exp,
                          uint64_t seed, Exec exec);

}  // namespace dram_oracle

#endif
