#ifndef DRAM_ORACLE_DRAMSIM_HPP
#define DRAM_ORACLE_DRAMSIM_HPP

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dram_oracle/config.hpp"
#include "dram_oracle/trace.hpp"

namespace dram_oracle {

// One operating point. Ranges are platform limits.
struct EnvPoint {
    double t_refp_s = 0.064;
    double v_dd = 1.5;
    double temp_c = 50.0;

    void validate() const;  // throws ValidationError outside supported ranges
};

// A cell whose retention falls below the materialization ceiling and can
// therefore err at some supported operating point. orientation is the bit
// value the cell decays towards (true/anti cell).
struct WeakCell {
    uint64_t word = 0;  // word index within the device
    double retention_s = 0.0;  // at 50 degC, 1.5 V
    uint8_t bit = 0;           // 0..63
    uint8_t orientation = 0;

    bool operator==(const WeakCell&) const = default;
};

struct DimmProfile {
    std::string device_id;
    uint64_t n_rows = 0;
    uint32_t words_per_row = 0;
    uint64_t device_seed = 0;
    double shift = 0.0;  // applied log-retention shift
    std::vector<WeakCell> cells;  // sorted by (word, bit)

    uint64_t words() const { return n_rows * words_per_row; }

    bool operator==(const DimmProfile&) const = default;
};

// Samples the weak-cell field: per word a Poisson(weak_cell_rate) number of
// draws, lognormal retention, fair-coin orientation; draws outside
// [floor, ceiling] are not materialized. shift is added to retention_mu_log,
// plus sigma_dev * gauss(device_seed) when sigma_dev > 0. When
// screen_below_s > 0 a deterministic post-pass re-places cells so that no
// word holds more than one cell below the screening threshold.
DimmProfile build_dimm(const SimConfig& cfg, const std::string& device_id, uint64_t device_seed,
                       double shift = 0.0, Exec exec = Exec::parallel);

// base * exp(-alpha (temp - 50)) * (v_dd / 1.5)^beta.
double retention_at(double base_retention_s, const EnvPoint& env, const SimConfig& cfg);

// Post-run error census through the SECDED lens: per 64-bit word, 1 flipped
// bit corrects (CE), 2 detect uncorrected (UE), 3+ escape detection (SDC).
struct RunOutcome {
    std::vector<uint64_t> ce_words;
    std::vector<uint64_t> ue_words;
    std::vector<uint64_t> sdc_words;
    uint64_t mem_size_words = 0;  // words allocated by the workload
};

// One characterization window of `trace` on `dimm` at `env`. A weak cell
// flips iff retention_at(base, env) * noise(run_seed) is shorter than its
// effective refresh interval (min of t_refp and the word's reuse interval)
// and the stored bit differs from the cell's discharge orientation. Rows
// adjacent to a row accessed above hammer_threshold_per_s have their cells'
// retention scaled by interference_factor. noise is lognormal(sigma_vrt),
// independent of env. stats must come from trace_stats(trace, cfg.words_per_row).
RunOutcome simulate_run(const MemoryTrace& trace, const TraceStats& stats,
                        const DimmProfile& dimm, const EnvPoint& env, uint64_t run_seed,
                        const SimConfig& cfg, Exec exec = Exec::parallel);

// |CE words| / allocated words.
double measure_wer(const RunOutcome& outcome);

// Fraction of n_exp repeated runs in which at least one uncorrectable or
// silent error manifests. Run i uses pue_run_seed(seed, i).
double estimate_pue(const MemoryTrace& trace, const TraceStats& stats, const DimmProfile& dimm,
                    const EnvPoint& env, uint32_t n_exp, uint64_t seed, const SimConfig& cfg,
                    Exec exec = Exec::parallel);

uint64_t pue_run_seed(uint64_t base_seed, uint32_t run_index);

// Profile file format "DODM": versioned little-endian, 24-byte cell records.
inline constexpr char kDimmMagic[4] = {'D', 'O', 'D', 'M'};
inline constexpr uint16_t kDimmVersion = 1;

void write_dimm(const DimmProfile& dimm, std::ostream& sink);
void write_dimm_file(const DimmProfile& dimm, const std::string& path);
DimmProfile read_dimm(std::istream& source);
DimmProfile read_dimm_file(const std::string& path);

}  // namespace dram_oracle

#endif
