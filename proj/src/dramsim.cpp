#include "dram_oracle/dramsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "dram_oracle/binio.hpp"
#include "dram_oracle/rng.hpp"

namespace dram_oracle {

void EnvPoint::validate() const {
    if (t_refp_s < kTrefpMinS - 1e-12 || t_refp_s > kTrefpMaxS + 1e-12)
        throw ValidationError("t_refp_s out of supported range [0.064, 2.283]");
    if (v_dd < kVddMin - 1e-12 || v_dd > kVddMax + 1e-12)
        throw ValidationError("v_dd out of supported range [1.428, 1.5]");
    if (temp_c < kTempMinC - 1e-9 || temp_c > kTempMaxC + 1e-9)
        throw ValidationError("temp_c out of supported range [50, 70]");
}

namespace {

constexpr uint64_t kCountStream = 0x636e7430;
constexpr uint64_t kRetStream = 0x72657430;
constexpr uint64_t kBitStream = 0x62697430;
constexpr uint64_t kOrientStream = 0x6f726930;
constexpr uint64_t kShiftStream = 0x73686630;
constexpr uint64_t kReplaceStream = 0x72706c30;
constexpr uint64_t kNoiseStream = 0x6e6f6930;
constexpr uint64_t kRunStream = 0x72756e30;

// Deterministic weak-cell draws for one word. Bit positions within a word
// are deduplicated by redraw.
void draw_word_cells(const SimConfig& cfg, uint64_t seed, double mu, uint64_t word,
                     std::vector<WeakCell>& out) {
    const uint32_t count = poisson(seed, mix(seed, kCountStream, word), cfg.weak_cell_rate);
    if (count == 0) return;
    uint64_t used_bits = 0;
    for (uint32_t j = 0; j < count; ++j) {
        const double r =
            std::exp(mu + cfg.retention_sigma_log * gauss(seed, mix(seed, kRetStream, word, j)));
        if (r < cfg.retention_floor_s || r > cfg.retention_ceiling_s) continue;
        uint8_t bit = 0;
        bool placed = false;
        for (uint32_t attempt = 0; attempt < 64; ++attempt) {
            bit = static_cast<uint8_t>(mix(seed, kBitStream, word * 64 + j, attempt) % 64);
            if (!(used_bits & (1ull << bit))) {
                used_bits |= 1ull << bit;
                placed = true;
                break;
            }
        }
        if (!placed) continue;  // word already saturated with weak bits
        WeakCell cell;
        cell.word = word;
        cell.bit = bit;
        cell.retention_s = r;
        cell.orientation = static_cast<uint8_t>(mix(seed, kOrientStream, word, j) & 1);
        out.push_back(cell);
    }
}

}  // namespace

DimmProfile build_dimm(const SimConfig& cfg, const std::string& device_id, uint64_t device_seed,
                       double shift, Exec exec) {
    cfg.validate();
    if (cfg.weak_cell_rate < 0) throw ValidationError("weak_cell_rate must be non-negative");

    DimmProfile dimm;
    dimm.device_id = device_id;
    dimm.n_rows = cfg.n_rows;
    dimm.words_per_row = cfg.words_per_row;
    dimm.device_seed = device_seed;
    dimm.shift = shift;
    if (cfg.sigma_dev > 0.0)
        dimm.shift += cfg.sigma_dev * gauss(device_seed, mix(device_seed, kShiftStream));

    const double mu = cfg.retention_mu_log + dimm.shift;
    const uint64_t n_words = dimm.words();

    if (exec == Exec::parallel) {
        std::vector<std::vector<WeakCell>> partial;
        int n_chunks = 64;
        partial.resize(n_chunks);
        const uint64_t chunk = (n_words + n_chunks - 1) / n_chunks;
#pragma omp parallel for schedule(dynamic)
        for (int c = 0; c < n_chunks; ++c) {
            const uint64_t lo = c * chunk;
            const uint64_t hi = std::min(n_words, lo + chunk);
            for (uint64_t w = lo; w < hi; ++w)
                draw_word_cells(cfg, device_seed, mu, w, partial[c]);
        }
        for (auto& p : partial)
            dimm.cells.insert(dimm.cells.end(), p.begin(), p.end());
    } else {
        for (uint64_t w = 0; w < n_words; ++w)
            draw_word_cells(cfg, device_seed, mu, w, dimm.cells);
    }

    // Word-major order is already guaranteed; enforce (word, bit) order.
    std::sort(dimm.cells.begin(), dimm.cells.end(), [](const WeakCell& a, const WeakCell& b) {
        return a.word != b.word ? a.word < b.word : a.bit < b.bit;
    });

    // SECDED screening: keep at most one cell below the threshold per word;
    // surplus cells move to deterministically chosen words that have none.
    if (cfg.screen_below_s > 0.0) {
        std::unordered_map<uint64_t, uint64_t> occupied_bits;
        for (const WeakCell& c : dimm.cells) occupied_bits[c.word] |= 1ull << c.bit;

        std::unordered_set<uint64_t> has_one;  // words holding a sub-threshold cell
        for (size_t i = 0; i < dimm.cells.size(); ++i) {
            WeakCell& c = dimm.cells[i];
            if (c.retention_s >= cfg.screen_below_s) continue;
            if (!has_one.count(c.word)) {
                has_one.insert(c.word);
                continue;
            }
            occupied_bits[c.word] &= ~(1ull << c.bit);
            uint64_t new_word = c.word;
            uint8_t new_bit = c.bit;
            const uint64_t max_attempts = 64 * n_words;
            for (uint64_t attempt = 0;; ++attempt) {
                if (attempt >= max_attempts)
                    throw NumericError("screening could not re-place weak cells; "
                                       "weak_cell_rate too high for screen_below_s");
                const uint64_t cand = mix(device_seed, kReplaceStream, i, attempt) % n_words;
                if (has_one.count(cand)) continue;
                const uint8_t bit = static_cast<uint8_t>(
                    mix(device_seed, kReplaceStream, i, attempt + 1000000) % 64);
                if (occupied_bits[cand] & (1ull << bit)) continue;
                new_word = cand;
                new_bit = bit;
                break;
            }
            c.word = new_word;
            c.bit = new_bit;
            occupied_bits[new_word] |= 1ull << new_bit;
            has_one.insert(new_word);
        }
        std::sort(dimm.cells.begin(), dimm.cells.end(), [](const WeakCell& a, const WeakCell& b) {
            return a.word != b.word ? a.word < b.word : a.bit < b.bit;
        });
    }

    return dimm;
}

double retention_at(double base_retention_s, const EnvPoint& env, const SimConfig& cfg) {
    return base_retention_s * std::exp(-cfg.temp_alpha * (env.temp_c - kTempRefC)) *
           std::pow(env.v_dd / kVddNominal, cfg.vdd_beta);
}

namespace {

inline uint64_t stored_word_value(const TraceStats& stats, uint64_t word, uint64_t reset_pattern) {
    auto it = stats.words.find(word);
    if (it == stats.words.end() || !it->second.written) return reset_pattern;
    // A 32-bit write fills both halves of the 64-bit ECC word.
    const uint64_t v = it->second.final_value;
    return (v << 32) | v;
}

}  // namespace

RunOutcome simulate_run(const MemoryTrace& trace, const TraceStats& stats,
                        const DimmProfile& dimm, const EnvPoint& env, uint64_t run_seed,
                        const SimConfig& cfg, Exec exec) {
    env.validate();
    if (trace.spec.footprint_words > dimm.words())
        throw ValidationError("trace footprint exceeds device capacity");

    const double duration_s = trace.duration_s(cfg.f_clk_hz);
    const double cycles_to_s = trace.spec.cpi / cfg.f_clk_hz;

    // Rows driven above the interference threshold weaken their neighbours.
    // Sized by the device so rows adjacent to the last accessed row are seen.
    std::vector<uint8_t> hammered;
    if (!stats.row_counts.empty() && duration_s > 0.0) {
        const size_t n = static_cast<size_t>(dimm.n_rows);
        std::vector<uint8_t> hot(n, 0);
        for (size_t r = 0; r < n && r < stats.row_counts.size(); ++r)
            hot[r] = static_cast<double>(stats.row_counts[r]) / duration_s >
                             cfg.hammer_threshold_per_s
                         ? 1
                         : 0;
        hammered.assign(n, 0);
        for (size_t r = 0; r < n; ++r) {
            const bool left = r > 0 && hot[r - 1];
            const bool right = r + 1 < n && hot[r + 1];
            hammered[r] = left || right ? 1 : 0;
        }
    }

    const double temp_vdd_factor = std::exp(-cfg.temp_alpha * (env.temp_c - kTempRefC)) *
                                   std::pow(env.v_dd / kVddNominal, cfg.vdd_beta);
    const uint64_t footprint = trace.spec.footprint_words;
    const uint64_t noise_seed = mix(run_seed, kNoiseStream);

    const size_t n_cells = dimm.cells.size();
    std::vector<uint8_t> flips(n_cells, 0);

    auto eval_cell = [&](size_t i) {
        const WeakCell& cell = dimm.cells[i];
        if (cell.word >= footprint) return;  // outside the workload's allocation

        const uint64_t stored = stored_word_value(stats, cell.word, cfg.reset_pattern);
        const uint8_t stored_bit = static_cast<uint8_t>((stored >> cell.bit) & 1);
        if (stored_bit == cell.orientation) return;  // decay target already stored

        // Effective refresh interval: explicit refresh or the word's own
        // access cadence, whichever is shorter.
        double interval = env.t_refp_s;
        auto it = stats.words.find(cell.word);
        if (it != stats.words.end() && it->second.count >= 2) {
            const double gap_instr =
                cfg.reuse_min_gap
                    ? static_cast<double>(it->second.gap_min_instr)
                    : static_cast<double>(it->second.gap_sum_instr) /
                          static_cast<double>(it->second.count - 1);
            interval = std::min(interval, gap_instr * cycles_to_s);
        }

        double base = cell.retention_s;
        const uint64_t row = cell.word / dimm.words_per_row;
        if (row < hammered.size() && hammered[row]) base *= cfg.interference_factor;

        const double noise =
            cfg.sigma_vrt > 0.0 ? std::exp(cfg.sigma_vrt * gauss(noise_seed, i)) : 1.0;
        if (base * temp_vdd_factor * noise < interval) flips[i] = 1;
    };

    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < static_cast<int64_t>(n_cells); ++i)
            eval_cell(static_cast<size_t>(i));
    } else {
        for (size_t i = 0; i < n_cells; ++i) eval_cell(i);
    }

    // Cells are (word, bit)-sorted, so flipped bits per word group contiguously.
    RunOutcome out;
    out.mem_size_words = footprint;
    size_t i = 0;
    while (i < n_cells) {
        const uint64_t word = dimm.cells[i].word;
        uint32_t flipped = 0;
        while (i < n_cells && dimm.cells[i].word == word) {
            if (flips[i]) ++flipped;
            ++i;
        }
        if (flipped == 1)
            out.ce_words.push_back(word);
        else if (flipped == 2)
            out.ue_words.push_back(word);
        else if (flipped >= 3)
            out.sdc_words.push_back(word);
    }
    return out;
}

double measure_wer(const RunOutcome& outcome) {
    if (outcome.mem_size_words == 0) throw ValidationError("measure_wer: zero memory size");
    return static_cast<double>(outcome.ce_words.size()) /
           static_cast<double>(outcome.mem_size_words);
}

uint64_t pue_run_seed(uint64_t base_seed, uint32_t run_index) {
    return mix(base_seed, kRunStream, run_index);
}

double estimate_pue(const MemoryTrace& trace, const TraceStats& stats, const DimmProfile& dimm,
                    const EnvPoint& env, uint32_t n_exp, uint64_t seed, const SimConfig& cfg,
                    Exec exec) {
    if (n_exp == 0) throw ValidationError("estimate_pue: n_exp must be >= 1");

    uint32_t n_ue = 0;
    if (exec == Exec::parallel) {
        // Runs are independent; inner cell loops stay serial here.
        int64_t hits = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : hits)
        for (int64_t i = 0; i < static_cast<int64_t>(n_exp); ++i) {
            const RunOutcome o =
                simulate_run(trace, stats, dimm, env,
                             pue_run_seed(seed, static_cast<uint32_t>(i)), cfg, Exec::serial);
            if (!o.ue_words.empty() || !o.sdc_words.empty()) ++hits;
        }
        n_ue = static_cast<uint32_t>(hits);
    } else {
        for (uint32_t i = 0; i < n_exp; ++i) {
            const RunOutcome o =
                simulate_run(trace, stats, dimm, env, pue_run_seed(seed, i), cfg, Exec::serial);
            if (!o.ue_words.empty() || !o.sdc_words.empty()) ++n_ue;
        }
    }
    return static_cast<double>(n_ue) / static_cast<double>(n_exp);
}

void write_dimm(const DimmProfile& dimm, std::ostream& sink) {
    BinWriter w(sink);
    w.bytes(kDimmMagic, 4);
    w.u16(kDimmVersion);
    w.str(dimm.device_id);
    w.u64(dimm.n_rows);
    w.u32(dimm.words_per_row);
    w.u64(dimm.device_seed);
    w.f64(dimm.shift);
    w.u64(dimm.cells.size());
    for (const WeakCell& c : dimm.cells) {
        w.u64(c.word);
        w.f64(c.retention_s);
        w.u8(c.bit);
        w.u8(c.orientation);
        const uint8_t pad[6] = {0};
        w.bytes(pad, 6);
    }
}

void write_dimm_file(const DimmProfile& dimm, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(IoError::Kind::open_failed, "cannot open " + path + " for writing");
    write_dimm(dimm, out);
}

DimmProfile read_dimm(std::istream& source) {
    BinReader r(source);
    expect_magic(r, kDimmMagic, "device profile");
    expect_version(r, kDimmVersion, "device profile");
    DimmProfile dimm;
    dimm.device_id = r.str();
    dimm.n_rows = r.u64();
    dimm.words_per_row = r.u32();
    dimm.device_seed = r.u64();
    dimm.shift = r.f64();
    const uint64_t n = r.u64();
    dimm.cells.resize(n);
    for (uint64_t i = 0; i < n; ++i) {
        WeakCell& c = dimm.cells[i];
        c.word = r.u64();
        c.retention_s = r.f64();
        c.bit = r.u8();
        c.orientation = r.u8();
        uint8_t pad[6];
        r.bytes(pad, 6);
    }
    return dimm;
}

DimmProfile read_dimm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoError::Kind::open_failed, "cannot open " + path);
    return read_dimm(in);
}

}  // namespace dram_oracle
