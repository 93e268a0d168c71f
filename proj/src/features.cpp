#include "dram_oracle/features.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "dram_oracle/errors.hpp"

namespace dram_oracle {

namespace {

const std::vector<std::string> kNuisanceNames = {
    "read_fraction",
    "write_fraction",
    "distinct_word_fraction",
    "footprint_log2",
    "reads_per_cycle",
    "writes_per_cycle",
    "first_touch_fraction",
    "accesses_per_word_mean",
    "accesses_per_word_cv",
    "reuse_gap_mean_log10",
    "reuse_gap_cv",
    "top_word_share",
    "top_decile_share",
    "row_count_cv",
    "row_count_max_share",
    "instr_span_fraction",
    "value_zero_fraction",
    "value_msb_fraction",
    "distinct_value_fraction",
    "value_low_byte_entropy",
    "burstiness",
    "threads_log2",
    "cpi_log10",
};

std::vector<std::string> build_schema() {
    std::vector<std::string> s = {"temp_c",    "t_refp_s",
                                  "v_dd",      "t_reuse_s",
                                  "h_dp_bits", "mem_accesses_per_cycle",
                                  "wait_cycles_ratio"};
    for (const auto& n : kNuisanceNames) s.push_back(n);
    return s;
}

double entropy_bits(const std::vector<uint64_t>& counts, uint64_t total) {
    double h = 0.0;
    for (uint64_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

}  // namespace

const std::vector<std::string>& nuisance_feature_names() { return kNuisanceNames; }

const std::vector<std::string>& feature_schema() {
    static const std::vector<std::string> schema = build_schema();
    return schema;
}

std::vector<double> feature_values(const FeatureVector& fv) {
    std::vector<double> v = {fv.temp_c,    fv.t_refp_s,
                             fv.v_dd,      fv.t_reuse_s,
                             fv.h_dp_bits, fv.mem_accesses_per_cycle,
                             fv.wait_cycles_ratio};
    v.insert(v.end(), fv.nuisance.begin(), fv.nuisance.end());
    return v;
}

std::optional<double> reuse_time(const TraceStats& stats, double cpi, double f_clk_hz) {
    // Deterministic summation order: accumulate per word sorted by index.
    std::vector<std::pair<uint64_t, const WordStat*>> words;
    words.reserve(stats.words.size());
    for (const auto& [w, ws] : stats.words)
        if (ws.count >= 2) words.emplace_back(w, &ws);
    if (words.empty()) return std::nullopt;
    std::sort(words.begin(), words.end());

    double gap_sum = 0.0;
    uint64_t n_pairs = 0;
    for (const auto& [w, ws] : words) {
        gap_sum += static_cast<double>(ws->gap_sum_instr);
        n_pairs += ws->count - 1;
    }
    const double mean_gap_instr = gap_sum / static_cast<double>(n_pairs);
    return mean_gap_instr * cpi / f_clk_hz;
}

std::optional<double> reuse_time(const MemoryTrace& trace, double f_clk_hz) {
    if (trace.accesses.empty()) throw ValidationError("reuse_time: empty trace");
    const TraceStats stats = trace_stats(trace);
    return reuse_time(stats, trace.spec.cpi, f_clk_hz);
}

double data_entropy(const MemoryTrace& trace) {
    std::unordered_map<uint32_t, uint64_t> hist;
    uint64_t total = 0;
    for (const MemoryAccess& a : trace.accesses) {
        if (a.kind != AccessKind::write) continue;
        ++hist[a.value];
        ++total;
    }
    if (total == 0) throw ValidationError("data_entropy: trace contains no writes");

    // Unobserved symbols contribute zero, so the sum over observed counts is
    // exactly the full-alphabet sum. Sort for a stable summation order.
    std::vector<std::pair<uint32_t, uint64_t>> items(hist.begin(), hist.end());
    std::sort(items.begin(), items.end());
    double h = 0.0;
    for (const auto& [value, count] : items) {
        const double p = static_cast<double>(count) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h < 0.0 ? 0.0 : h;
}

double access_rate(const MemoryTrace& trace) {
    const double cycles = trace.total_cycles();
    if (!(cycles > 0.0)) throw ValidationError("access_rate: total_cycles is zero");
    return static_cast<double>(trace.accesses.size()) / cycles;
}

double wait_cycles_ratio(const MemoryTrace& trace, double stall_cost_cycles) {
    const double cycles = trace.total_cycles();
    if (!(cycles > 0.0)) return 0.0;
    const double stalled = static_cast<double>(trace.accesses.size()) * stall_cost_cycles;
    return std::min(1.0, stalled / cycles);
}

FeatureVector extract_features(const MemoryTrace& trace, const TraceStats& stats,
                               const std::string& device, const EnvPoint& env,
                               const SimConfig& cfg) {
    env.validate();
    if (trace.accesses.empty()) throw ValidationError("extract_features: empty trace");

    FeatureVector fv;
    fv.workload = trace.spec.name;
    fv.device = device;
    fv.temp_c = env.temp_c;
    fv.t_refp_s = env.t_refp_s;
    fv.v_dd = env.v_dd;

    const auto reuse = reuse_time(stats, trace.spec.cpi, cfg.f_clk_hz);
    fv.t_reuse_s = reuse ? *reuse : cfg.never_reused_sentinel_s();
    fv.h_dp_bits = stats.n_writes > 0 ? data_entropy(trace) : 0.0;
    fv.mem_accesses_per_cycle = access_rate(trace);
    fv.wait_cycles_ratio = wait_cycles_ratio(trace, cfg.stall_cost_cycles);

    const double n = static_cast<double>(trace.accesses.size());
    const double n_words = static_cast<double>(stats.distinct_words);
    const double footprint = static_cast<double>(trace.spec.footprint_words);

    // Per-word count moments and shares, in sorted word order.
    std::vector<std::pair<uint64_t, const WordStat*>> words;
    words.reserve(stats.words.size());
    for (const auto& [w, ws] : stats.words) words.emplace_back(w, &ws);
    std::sort(words.begin(), words.end());

    double count_sum = 0.0, count_sq = 0.0, max_count = 0.0;
    double gap_sum = 0.0, gap_sq = 0.0;
    uint64_t n_gaps = 0;
    std::vector<double> counts;
    counts.reserve(words.size());
    for (const auto& [w, ws] : words) {
        const double c = static_cast<double>(ws->count);
        counts.push_back(c);
        count_sum += c;
        count_sq += c * c;
        max_count = std::max(max_count, c);
        if (ws->count >= 2) {
            const double mean_gap =
                static_cast<double>(ws->gap_sum_instr) / static_cast<double>(ws->count - 1);
            gap_sum += static_cast<double>(ws->gap_sum_instr);
            gap_sq += mean_gap * mean_gap * static_cast<double>(ws->count - 1);
            n_gaps += ws->count - 1;
        }
    }
    const double count_mean = n_words > 0 ? count_sum / n_words : 0.0;
    const double count_var = n_words > 0 ? count_sq / n_words - count_mean * count_mean : 0.0;
    const double count_cv = count_mean > 0 ? std::sqrt(std::max(0.0, count_var)) / count_mean : 0.0;

    std::vector<double> sorted_counts = counts;
    std::sort(sorted_counts.begin(), sorted_counts.end(), std::greater<>());
    double top_decile = 0.0;
    const size_t decile = std::max<size_t>(1, sorted_counts.size() / 10);
    for (size_t i = 0; i < decile && i < sorted_counts.size(); ++i) top_decile += sorted_counts[i];

    const double gap_mean = n_gaps > 0 ? gap_sum / static_cast<double>(n_gaps) : 0.0;
    const double gap_var = n_gaps > 0 ? gap_sq / static_cast<double>(n_gaps) - gap_mean * gap_mean : 0.0;
    const double gap_cv = gap_mean > 0 ? std::sqrt(std::max(0.0, gap_var)) / gap_mean : 0.0;

    // Write-value statistics.
    uint64_t zero_writes = 0, msb_writes = 0;
    std::unordered_map<uint32_t, uint64_t> value_hist;
    std::vector<uint64_t> low_byte(256, 0);
    for (const MemoryAccess& a : trace.accesses) {
        if (a.kind != AccessKind::write) continue;
        if (a.value == 0) ++zero_writes;
        if (a.value & 0x80000000u) ++msb_writes;
        ++value_hist[a.value];
        ++low_byte[a.value & 0xffu];
    }
    const double n_writes = static_cast<double>(stats.n_writes);

    // Access burstiness over 64 equal instruction windows.
    constexpr size_t kWindows = 64;
    std::vector<uint64_t> win(kWindows, 0);
    for (const MemoryAccess& a : trace.accesses) {
        size_t w = static_cast<size_t>(a.instr_index * kWindows / trace.spec.n_instructions);
        if (w >= kWindows) w = kWindows - 1;
        ++win[w];
    }
    double wmean = n / static_cast<double>(kWindows), wvar = 0.0;
    for (uint64_t c : win) {
        const double d = static_cast<double>(c) - wmean;
        wvar += d * d;
    }
    wvar /= static_cast<double>(kWindows);
    const double burstiness = wmean > 0 ? wvar / wmean : 0.0;

    const double span =
        n > 0 ? static_cast<double>(trace.accesses.back().instr_index -
                                    trace.accesses.front().instr_index)
              : 0.0;

    double row_cv = 0.0, row_max_share = 0.0;
    if (!stats.row_counts.empty()) {
        double rs = 0.0, rsq = 0.0, rmax = 0.0;
        for (uint64_t c : stats.row_counts) {
            const double d = static_cast<double>(c);
            rs += d;
            rsq += d * d;
            rmax = std::max(rmax, d);
        }
        const double rn = static_cast<double>(stats.row_counts.size());
        const double rmean = rs / rn;
        const double rvar = rsq / rn - rmean * rmean;
        row_cv = rmean > 0 ? std::sqrt(std::max(0.0, rvar)) / rmean : 0.0;
        row_max_share = rs > 0 ? rmax / rs : 0.0;
    }

    fv.nuisance = {
        n > 0 ? static_cast<double>(stats.n_reads) / n : 0.0,
        n > 0 ? n_writes / n : 0.0,
        footprint > 0 ? n_words / footprint : 0.0,
        std::log2(std::max(1.0, footprint)),
        static_cast<double>(stats.n_reads) / trace.total_cycles(),
        n_writes / trace.total_cycles(),
        n > 0 ? n_words / n : 0.0,
        n_words > 0 ? n / n_words : 0.0,
        count_cv,
        gap_mean > 0 ? std::log10(gap_mean) : 0.0,
        gap_cv,
        count_sum > 0 ? max_count / count_sum : 0.0,
        count_sum > 0 ? top_decile / count_sum : 0.0,
        row_cv,
        row_max_share,
        static_cast<double>(trace.spec.n_instructions) > 0
            ? span / static_cast<double>(trace.spec.n_instructions)
            : 0.0,
        n_writes > 0 ? static_cast<double>(zero_writes) / n_writes : 0.0,
        n_writes > 0 ? static_cast<double>(msb_writes) / n_writes : 0.0,
        n_writes > 0 ? static_cast<double>(value_hist.size()) / n_writes : 0.0,
        stats.n_writes > 0 ? entropy_bits(low_byte, stats.n_writes) : 0.0,
        burstiness,
        std::log2(static_cast<double>(trace.spec.threads)),
        std::log10(trace.spec.cpi),
    };
    return fv;
}

std::vector<double> fractional_ranks(std::span<const double> xs) {
    const size_t n = xs.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return xs[a] < xs[b]; });

    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t t = i; t <= j; ++t) ranks[order[t]] = avg;  // ties get average ranks
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ValidationError("spearman: length mismatch");
    if (xs.size() < 2) throw ValidationError("spearman: need at least 2 samples");

    const std::vector<double> rx = fractional_ranks(xs);
    const std::vector<double> ry = fractional_ranks(ys);
    const double n = static_cast<double>(xs.size());

    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw NumericError("spearman: zero rank variance");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace dram_oracle
