#ifndef DRAM_ORACLE_TRACE_HPP
#define DRAM_ORACLE_TRACE_HPP

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dram_oracle/config.hpp"
#include "dram_oracle/errors.hpp"

namespace dram_oracle {

enum class AccessKind : uint8_t { read = 0, write = 1 };

// One memory reference. Addresses are byte addresses at 64-bit word
// granularity (multiples of 8); instr_index is strictly increasing within a
// trace. value is meaningful only for writes.
struct MemoryAccess {
    uint64_t instr_index = 0;
    uint64_t address = 0;
    AccessKind kind = AccessKind::read;
    uint32_t value = 0;

    bool operator==(const MemoryAccess&) const = default;
};

enum class ReuseProfile : uint8_t { uniform = 0, zipfian = 1, streaming = 2 };

std::string to_string(ReuseProfile p);
ReuseProfile reuse_profile_from_string(const std::string& s);

// Parameters of a synthetic workload. threads > 1 models a shared-footprint
// parallel program: each selected word is touched by a burst of `threads`
// adjacent accesses, which shortens the mean per-word reuse gap.
struct WorkloadSpec {
    std::string name = "workload";
    uint64_t n_instructions = 0;
    uint64_t footprint_words = 0;
    double target_access_rate = 0.0;  // accesses per cycle, (0, 1]
    double cpi = 1.0;
    double write_fraction = 0.5;
    uint32_t value_alphabet_size = 1;
    ReuseProfile reuse_profile = ReuseProfile::uniform;
    double zipf_s = 1.0;  // exponent, zipfian profile only
    uint32_t threads = 1;
    uint64_t seed = 0;

    double total_cycles() const { return static_cast<double>(n_instructions) * cpi; }

    // Throws ValidationError on any violated invariant. capacity_words = 0
    // skips the device-capacity check.
    void validate(uint64_t capacity_words) const;

    KvMap to_kv() const;
    static WorkloadSpec from_kv(const KvMap& kv);

    bool operator==(const WorkloadSpec&) const = default;
};

struct MemoryTrace {
    WorkloadSpec spec;
    std::vector<MemoryAccess> accesses;

    double total_cycles() const { return spec.total_cycles(); }
    double duration_s(double f_clk_hz) const { return total_cycles() / f_clk_hz; }

    bool operator==(const MemoryTrace&) const = default;
};

// Deterministic for a fixed spec (including seed). The produced trace meets
// the rate contract |accesses/cycle - target| / target <= 0.05 for
// n_instructions >= 1e5.
MemoryTrace generate_trace(const WorkloadSpec& spec, uint64_t capacity_words = 0,
                           Exec exec = Exec::parallel);

// Trace file format "DOTR": little-endian, versioned header with a
// length-prefixed key=value metadata block, then fixed 24-byte records
// (u64 instr_index, u64 address, u8 kind, u32 value, 3 pad bytes).
inline constexpr char kTraceMagic[4] = {'D', 'O', 'T', 'R'};
inline constexpr uint16_t kTraceVersion = 1;
inline constexpr size_t kTraceRecordSize = 24;

uint64_t write_trace(const MemoryTrace& trace, std::ostream& sink);
uint64_t write_trace_file(const MemoryTrace& trace, const std::string& path);
MemoryTrace read_trace(std::istream& source);
MemoryTrace read_trace_file(const std::string& path);

// Single-pass per-word statistics consumed by the feature extractor and the
// retention simulator.
struct WordStat {
    uint64_t count = 0;
    uint64_t first_instr = 0;
    uint64_t last_instr = 0;
    uint64_t gap_sum_instr = 0;  // sum of successive-access distances
    uint64_t gap_min_instr = 0;
    bool written = false;
    uint32_t final_value = 0;
};

struct TraceStats {
    uint64_t n_reads = 0;
    uint64_t n_writes = 0;
    uint64_t distinct_words = 0;
    std::unordered_map<uint64_t, WordStat> words;  // keyed by word index (address / 8)
    std::vector<uint64_t> row_counts;              // filled when words_per_row > 0

    uint64_t total_accesses() const { return n_reads + n_writes; }
};

TraceStats trace_stats(const MemoryTrace& trace, uint32_t words_per_row = 0);

}  // namespace dram_oracle

#endif
